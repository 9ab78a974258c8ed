"""Structured run configuration: [section] key = value files.

Unknown sections or keys are hard errors (drift protection).  The [walk]
section accepts either an absolute jump size `delta` or `delta_times_m`
(delta * m held fixed), the latter so one file can drive sweeps over m.
"""

from __future__ import annotations

import configparser
from pathlib import Path

from .walks import WalkConfig

__all__ = ["RunConfig", "load_config"]


def _int_list(raw: str) -> list[int]:
    return [int(tok) for tok in raw.replace(" ", "").split(",") if tok]


_SCHEMA = {
    "walk": {
        "m": int, "c": float, "delta": float, "delta_times_m": float,
        "p": float, "q": float, "t_star": float, "seed": int,
    },
    "tsg": {"n": int},
    "mc": {
        "pipeline": str, "replicates": int, "cmds_dim": int, "ase_dim": int,
        "n_values": _int_list, "m_values": _int_list,
    },
    "sweep": {"d_values": _int_list, "replicates": int, "ase_dim": int},
    "detect": {"replicates": int, "level": float},
}


class RunConfig:
    """Parsed configuration file with typed section lookups."""

    def __init__(self, sections: dict[str, dict]):
        self.sections = sections

    def require(self, *names: str) -> None:
        missing = [s for s in names if s not in self.sections]
        if missing:
            raise ValueError(f"config missing required section(s): {', '.join(missing)}")

    def get(self, section: str, key: str, default=None):
        return self.sections.get(section, {}).get(key, default)

    def walk_config(self, seed_override: int | None = None,
                    m_override: int | None = None) -> WalkConfig:
        self.require("walk")
        walk = dict(self.sections["walk"])
        for key in ("m", "c", "p", "q", "t_star"):
            if key not in walk:
                raise ValueError(f"[walk] section missing key '{key}'")
        m = int(m_override if m_override is not None else walk["m"])
        if ("delta" in walk) == ("delta_times_m" in walk):
            raise ValueError("[walk] needs exactly one of 'delta' or 'delta_times_m'")
        delta = walk["delta"] if "delta" in walk else walk["delta_times_m"] / m
        seed = walk.get("seed", 0)
        if seed_override is not None:
            seed = seed_override
        return WalkConfig(m=m, c=walk["c"], delta=delta, p=walk["p"],
                          q=walk["q"], t_star=walk["t_star"], seed=seed)

    def n_vertices(self) -> int:
        self.require("tsg")
        if "n" not in self.sections["tsg"]:
            raise ValueError("[tsg] section missing key 'n'")
        return self.sections["tsg"]["n"]

    def resolved(self) -> dict:
        """Plain nested dict for manifest echoing."""
        return {s: dict(v) for s, v in self.sections.items()}


def load_config(path: Path) -> RunConfig:
    parser = configparser.ConfigParser(strict=True, interpolation=None)
    read = parser.read(path)
    if not read:
        raise FileNotFoundError(f"config file not found: {path}")
    sections: dict[str, dict] = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ValueError(f"unknown config section [{section}]")
        allowed = _SCHEMA[section]
        parsed = {}
        for key, raw in parser.items(section):
            if key not in allowed:
                raise ValueError(f"unknown key '{key}' in section [{section}]")
            try:
                parsed[key] = allowed[key](raw)
            except ValueError as exc:
                raise ValueError(f"bad value for [{section}] {key} = {raw!r}") from exc
        sections[section] = parsed
    return RunConfig(sections)
