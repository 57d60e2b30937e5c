"""Two-qubit density-matrix algebra: Bell projections, gate noise, swapping and pumping.

States are plain ``(4, 4)`` complex arrays in the basis ``|00>, |01>, |10>, |11>``.
The first qubit belongs to the left station of a link, the second to the right.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePurificationError, InvalidStateError, ParameterError
from .gates import GateModel

_S = 1 / np.sqrt(2)

BELL_VECTORS = {
    "phi+": np.array([_S, 0, 0, _S], dtype=complex),
    "phi-": np.array([_S, 0, 0, -_S], dtype=complex),
    "psi+": np.array([0, _S, _S, 0], dtype=complex),
    "psi-": np.array([0, _S, -_S, 0], dtype=complex),
}
BELL_LABELS = tuple(BELL_VECTORS)

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)

# Pauli P_k with |beta_k> = (1 x P_k)|phi+>; applying P_k again on the second
# qubit maps beta_k back to phi+ (up to a global phase).
_CORRECTIONS = {"phi+": _I2, "phi-": _Z, "psi+": _X, "psi-": _X @ _Z}

STANDARD = "standard"
MODIFIED = "modified"
_ACCEPTED = {STANDARD: ((0, 0), (1, 1)), MODIFIED: ((1, 1),)}

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10


@dataclass(frozen=True)
class BellDecomposition:
    p_phi_plus: float
    p_phi_minus: float
    p_psi_plus: float
    p_psi_minus: float
    residual: float


def projector(label: str) -> np.ndarray:
    v = BELL_VECTORS[label]
    return np.outer(v, v.conj())


def werner(fidelity: float) -> np.ndarray:
    """Werner state with weight ``fidelity`` on phi+ and the rest spread evenly."""
    if not 0.0 <= fidelity <= 1.0:
        raise ParameterError(f"Werner fidelity must lie in [0, 1], got {fidelity}")
    other = (1.0 - fidelity) / 3.0
    rho = fidelity * projector("phi+")
    for label in ("phi-", "psi+", "psi-"):
        rho = rho + other * projector(label)
    return rho


def bell_diagonal(weights: dict[str, float]) -> np.ndarray:
    rho = np.zeros((4, 4), dtype=complex)
    for label, w in weights.items():
        rho += w * projector(label)
    return rho


def maximally_mixed() -> np.ndarray:
    return np.eye(4, dtype=complex) / 4


def check_state(rho: np.ndarray) -> np.ndarray:
    """Return ``rho`` as a complex array after validating the state invariants."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise InvalidStateError(f"expected a 4x4 density matrix, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > HERMITIAN_TOL:
        raise InvalidStateError("density matrix is not Hermitian")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise InvalidStateError(f"density matrix has trace {tr!r}, expected 1")
    if np.linalg.eigvalsh(rho).min() < -PSD_TOL:
        raise InvalidStateError("density matrix has a negative eigenvalue")
    return rho


def _hermitize(rho: np.ndarray) -> np.ndarray:
    return 0.5 * (rho + rho.conj().T)


def bell_fidelity(rho: np.ndarray, target: str = "phi+", validate: bool = True) -> float:
    if validate:
        rho = check_state(rho)
    v = BELL_VECTORS[target]
    return float(np.clip((v.conj() @ rho @ v).real, 0.0, 1.0))


def bell_decomposition(rho: np.ndarray) -> BellDecomposition:
    rho = check_state(rho)
    w = {label: float((v.conj() @ rho @ v).real) for label, v in BELL_VECTORS.items()}
    residual = max(0.0, 1.0 - sum(w.values()))
    return BellDecomposition(w["phi+"], w["phi-"], w["psi+"], w["psi-"], residual)


def to_werner(rho: np.ndarray) -> np.ndarray:
    """Twirl ``rho`` into the Werner state with the same phi+ weight."""
    return werner(bell_fidelity(rho))


def depolarizing_parameter(gate_fidelity: float) -> float:
    """Solve ``F = F' + (1 - F')/4`` for the depolarizing weight ``F'``."""
    if not 0.25 <= gate_fidelity <= 1.0:
        raise ParameterError(f"gate fidelity must lie in [1/4, 1], got {gate_fidelity}")
    return (4.0 * gate_fidelity - 1.0) / 3.0


def depolarize(rho: np.ndarray, gate_fidelity: float, unitary: np.ndarray | None = None) -> np.ndarray:
    """Apply a (possibly noisy) two-qubit gate acting on both qubits of ``rho``.

    The output is ``F' U rho U^dag + (1 - F') Tr(rho) 1/4``.
    """
    rho = check_state(rho)
    fp = depolarizing_parameter(gate_fidelity)
    if unitary is not None:
        rho = unitary @ rho @ unitary.conj().T
    out = fp * rho + (1.0 - fp) * np.trace(rho) * np.eye(4) / 4
    return _hermitize(out)


def apply_local(rho: np.ndarray, op_first: np.ndarray, op_second: np.ndarray) -> np.ndarray:
    u = np.kron(op_first, op_second)
    return _hermitize(u @ rho @ u.conj().T)


_BELL_STACK = np.stack([v.reshape(2, 2) for v in BELL_VECTORS.values()])  # (k, b1, b2)
_CORR_STACK = np.stack([_CORRECTIONS[label] for label in BELL_VECTORS])


def entanglement_swap(
    left: np.ndarray, right: np.ndarray, gate: GateModel, validate: bool = True
) -> tuple[np.ndarray, float]:
    """Swap ``left`` (qubits a, b1) and ``right`` (qubits b2, c) into a pair (a, c).

    The Bell measurement on (b1, b2) is preceded by the depolarizing noise of one
    two-qubit gate; every outcome is corrected by a perfect Pauli on c, so the
    returned state is the outcome average.  The second return value is the
    probability that the gate itself succeeds.
    """
    if validate:
        left = check_state(left)
        right = check_state(right)
    fp = depolarizing_parameter(gate.fidelity)
    L = left.reshape(2, 2, 2, 2)  # a, b1, a', b1'
    R = right.reshape(2, 2, 2, 2)  # b2, c, b2', c'

    # project (b1, b2) on each Bell state, then undo its Pauli on c
    m = np.einsum("kxy,axbz,ycwd,kzw->kacbd", _BELL_STACK.conj(), L, R, _BELL_STACK)
    ideal = np.einsum("kpc,kacbd,kqd->apbq", _CORR_STACK, m, _CORR_STACK.conj()).reshape(4, 4)

    # Fully depolarized (b1, b2) leaves rho_a x rho_c; the Pauli corrections then
    # twirl c into the maximally mixed state.
    rho_a = np.einsum("abcb->ac", L)
    noise = np.kron(rho_a, _I2 / 2)
    out = _hermitize(fp * ideal + (1.0 - fp) * noise)
    return out, gate.success_prob


def _cnot_indices() -> np.ndarray:
    # Index map of the bilateral CNOT (a1 -> a2, b1 -> b2) on qubit order
    # (a1, b1, a2, b2), as a permutation of the 16 basis states.
    perm = np.empty(16, dtype=int)
    for idx in range(16):
        a1, b1, a2, b2 = (idx >> 3) & 1, (idx >> 2) & 1, (idx >> 1) & 1, idx & 1
        perm[idx] = (a1 << 3) | (b1 << 2) | ((a2 ^ a1) << 1) | (b2 ^ b1)
    return perm


_BILATERAL_CNOT = _cnot_indices()


def _depolarize_pair(rho4: np.ndarray, fp: float, pair: tuple[int, int]) -> np.ndarray:
    """Depolarize qubits ``pair`` of a 4-qubit state held as an 8-index tensor."""
    if fp == 1.0:
        return rho4
    i, j = pair
    others = [q for q in range(4) if q not in pair]
    k, l = others
    letters = "abcd"
    ket = list(letters)
    bra = list("efgh")
    bra[i], bra[j] = ket[i], ket[j]
    reduced = np.einsum("".join(ket) + "".join(bra) + "->" + ket[k] + ket[l] + bra[k] + bra[l], rho4)
    ident = np.einsum("ac,bd->abcd", _I2, _I2) / 4  # (q_i, q_j, q_i', q_j')
    out_ket = list("abcd")
    out_bra = list("efgh")
    mixed = np.einsum(
        f"{out_ket[k]}{out_ket[l]}{out_bra[k]}{out_bra[l]},{out_ket[i]}{out_ket[j]}{out_bra[i]}{out_bra[j]}->abcdefgh",
        reduced,
        ident,
    )
    return fp * rho4 + (1.0 - fp) * mixed


def purify(
    keep: np.ndarray,
    fresh: np.ndarray,
    gate: GateModel,
    variant: str = STANDARD,
    validate: bool = True,
) -> tuple[np.ndarray, float]:
    """One pumping round: bilateral CNOT from ``keep`` onto ``fresh``, measure ``fresh``.

    ``variant="standard"`` accepts the parity-even outcomes 00 and 11,
    ``variant="modified"`` accepts only 11.  Returns the renormalized kept pair
    and the total success probability (heralding probability times the gate
    success probability of both stations).
    """
    if variant not in _ACCEPTED:
        raise ParameterError(f"unknown purification variant {variant!r}")
    if validate:
        keep = check_state(keep)
        fresh = check_state(fresh)
    fp = depolarizing_parameter(gate.fidelity)

    rho = np.kron(keep, fresh)  # qubit order (a1, b1, a2, b2)
    rho = rho[np.ix_(_BILATERAL_CNOT, _BILATERAL_CNOT)]
    # the permutation is an involution, so indexing by it applies U rho U^dag
    rho4 = rho.reshape((2,) * 8)
    rho4 = _depolarize_pair(rho4, fp, (0, 2))
    rho4 = _depolarize_pair(rho4, fp, (1, 3))

    out = np.zeros((2, 2, 2, 2), dtype=complex)
    for x, y in _ACCEPTED[variant]:
        out += rho4[:, :, x, y, :, :, x, y]
    out = out.reshape(4, 4)
    p_herald = float(np.trace(out).real)
    if p_herald <= 1e-300:
        raise DegeneratePurificationError("purification heralds with zero probability")
    return _hermitize(out / p_herald), p_herald * gate.success_prob**2
