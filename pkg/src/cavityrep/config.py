"""JSON run configuration with unit-suffixed keys.

Missing keys fall back to the defaults below; unknown keys are rejected.
Overrides use dotted paths, e.g. ``link.cooperativity=1000`` or
``sweep.distances_km=[100,200]``.
"""
from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from . import generation as gen
from .errors import ParameterError
from .optimize import FAMILIES, SweepSpec
from .rates import ARCHITECTURES, VARIANTS, RepeaterConfig


class ConfigError(ParameterError):
    """The run configuration is malformed."""


DEFAULTS: dict[str, Any] = {
    "link": {
        "cooperativity": 100.0,
        "gamma_rad_per_s": 2 * math.pi * 6e6,
        "eta_d": 0.5,
        "l_att_km": 22.0,
        "r_dark_hz": 25.0,
        "tau_local_s": 10e-6,
        "c_fiber_km_per_s": 2e5,
    },
    "sweep": {
        "distances_km": [100.0, 200.0, 400.0, 600.0, 800.0, 1000.0],
        "cooperativities": [100.0],
        "qubits_per_station": 2,
        "families": list(FAMILIES),
        "n_values": [0, 1, 2, 3, 4, 5],
        "j_values": [0, 1, 2],
        "variants": list(VARIANTS),
        "architectures": list(ARCHITECTURES),
        "rate_floor_hz": 1e-6,
        "formulas": "corrected",
    },
    "rate": {
        "distance_km": 1000.0,
        "n": 4,
        "j": 0,
        "variant": "standard",
        "architecture": "parallel",
        "qubits_per_station": 2,
        "scheme": gen.TWO_PHOTON,
        "gate": "gate1",
        "emitter": gen.CAVITY,
        "eps_sq": None,
        "T_s": None,
        "optimize": True,
        "formulas": "corrected",
    },
    "validation": {
        "distance_km": 1000.0,
        "trials": 20000,
        "band": [0.5, 2.0],
    },
    "output": {
        "csv_path": None,
        "json_path": None,
    },
    "seed": 0,
    "workers": 1,
}


def _merge(defaults: dict, given: dict, path: str = "") -> dict:
    out = copy.deepcopy(defaults)
    for key, value in given.items():
        where = f"{path}{key}"
        if key not in defaults:
            raise ConfigError(f"unknown key '{where}'")
        if isinstance(defaults[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"'{where}' must be an object")
            out[key] = _merge(defaults[key], value, where + ".")
        else:
            out[key] = value
    return out


def _parse_value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_override(data: dict, assignment: str) -> dict:
    if "=" not in assignment:
        raise ConfigError(f"override '{assignment}' is not of the form key=value")
    key, text = assignment.split("=", 1)
    parts = key.strip().split(".")
    node = data
    for part in parts[:-1]:
        if part not in node or not isinstance(node[part], dict):
            raise ConfigError(f"unknown key '{key}'")
        node = node[part]
    if parts[-1] not in node or isinstance(node[parts[-1]], dict):
        raise ConfigError(f"unknown key '{key}'")
    node[parts[-1]] = _parse_value(text)
    return data


@dataclass
class RunConfig:
    data: dict = field(default_factory=lambda: copy.deepcopy(DEFAULTS))
    source: str = "<defaults>"

    @classmethod
    def from_text(cls, text: str, source: str = "<string>") -> "RunConfig":
        try:
            given = json.loads(text) if text.strip() else {}
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
        if not isinstance(given, dict):
            raise ConfigError(f"{source}:1:1: top level must be an object")
        try:
            return cls(_merge(DEFAULTS, given), source)
        except ConfigError as exc:
            raise ConfigError(f"{source}:{_line_of(text, str(exc))}: {exc}") from None

    @classmethod
    def load(cls, path: str | Path | None) -> "RunConfig":
        if path is None:
            return cls()
        p = Path(path)
        try:
            text = p.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"{p}: cannot read config ({exc.strerror})") from None
        return cls.from_text(text, str(p))

    def override(self, assignments) -> "RunConfig":
        data = copy.deepcopy(self.data)
        for a in assignments or ():
            apply_override(data, a)
        return RunConfig(data, self.source)

    # typed views

    def link_params(self) -> gen.LinkParams:
        d = self.data["link"]
        try:
            return gen.LinkParams(
                cooperativity=float(d["cooperativity"]),
                gamma=float(d["gamma_rad_per_s"]),
                eta_d=float(d["eta_d"]),
                l_att=float(d["l_att_km"]),
                r_dark=float(d["r_dark_hz"]),
                tau_local=float(d["tau_local_s"]),
                c_fiber=float(d["c_fiber_km_per_s"]),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"link: {exc}") from None

    def sweep_spec(self) -> SweepSpec:
        s = self.data["sweep"]
        try:
            return SweepSpec(
                distances=tuple(float(x) for x in s["distances_km"]),
                cooperativities=tuple(float(x) for x in s["cooperativities"]),
                qubits_per_station=int(s["qubits_per_station"]),
                families=tuple(s["families"]),
                n_values=tuple(int(x) for x in s["n_values"]),
                j_values=tuple(int(x) for x in s["j_values"]),
                variants=tuple(s["variants"]),
                architectures=tuple(s["architectures"]),
                link=self.link_params(),
                rate_floor_hz=float(s["rate_floor_hz"]),
                formulas=str(s["formulas"]),
            )
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ParameterError):
                raise
            raise ConfigError(f"sweep: {exc}") from None

    def repeater_config(self) -> RepeaterConfig:
        r = self.data["rate"]
        try:
            return RepeaterConfig(
                n=int(r["n"]),
                j=int(r["j"]),
                variant=r["variant"],
                architecture=r["architecture"],
                qubits_per_station=int(r["qubits_per_station"]),
                scheme=r["scheme"],
                gate=r["gate"],
                L_total=float(r["distance_km"]),
                link=self.link_params(),
                eps_sq=None if r["eps_sq"] is None else float(r["eps_sq"]),
                T=None if r["T_s"] is None else float(r["T_s"]),
                emitter=r["emitter"],
                formulas=r["formulas"],
            )
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ParameterError):
                raise
            raise ConfigError(f"rate: {exc}") from None

    @property
    def seed(self) -> int:
        return int(self.data["seed"])

    @property
    def workers(self) -> int:
        return int(self.data["workers"])


def _line_of(text: str, message: str) -> str:
    # anchor "unknown key 'a.b.c'" style messages at the first line naming the key
    if "'" in message:
        key = message.split("'")[1].split(".")[-1]
        for number, line in enumerate(text.splitlines(), start=1):
            col = line.find(f'"{key}"')
            if col >= 0:
                return f"{number}:{col + 1}"
    return "1:1"
