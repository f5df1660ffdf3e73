"""Run configuration: flat key = value text with [section] headers (INI).

A find-orbits config looks like::

    [run]
    half_dim = 1
    starts = 200
    seed = 0
    outer_factor = 4
    output_dir = out

    [hamiltonian]
    name = product_morse
    epsilon = 0.01

    [tolerances]
    newton = 1e-10
    phi = 1e-12
    dedup = 1e-6

Custom trigonometric-polynomial systems use name = trig_polynomial plus one
[term.N] section per term with keys time_cos, time_sin, space_modes
(comma-separated, one per coordinate) and amplitude.  A morse-homology
config replaces [hamiltonian] with [surface] (same keys, half_dim fixed
at 1).
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .hamiltonians import HamiltonianSystem, builtin, from_trig_polynomial

__all__ = ["ConfigError", "RunConfig", "SurfaceConfig",
           "load_run_config", "load_surface_config"]


class ConfigError(Exception):
    """Malformed configuration, with section/key diagnostics."""


_RUN_KEYS = {"half_dim", "starts", "seed", "outer_factor", "n0", "output_dir"}
_HAM_KEYS = {"name", "epsilon", "matrix"}
_TOL_KEYS = {"newton", "phi", "dedup"}
_TERM_KEYS = {"time_cos", "time_sin", "space_modes", "amplitude"}


@dataclass
class RunConfig:
    half_dim: int
    system: HamiltonianSystem
    hamiltonian_name: str
    starts: int = 200
    seed: int = 0
    outer_factor: int = 4
    n0_override: Optional[int] = None
    output_dir: str = "."
    newton_tol: float = 1e-10
    fiber_tol: float = 1e-12
    dedup_tol: float = 1e-6
    echo: dict = field(default_factory=dict)


@dataclass
class SurfaceConfig:
    surface: HamiltonianSystem
    surface_name: str
    seed: int = 0
    output_dir: str = "."
    echo: dict = field(default_factory=dict)


def _read(path) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"config {path} is not valid key = value text: {exc}") from exc
    return parser


def _get(parser, section, key, cast, default=None, required=False):
    if not parser.has_section(section):
        if required:
            raise ConfigError(f"missing required section [{section}]")
        return default
    if not parser.has_option(section, key):
        if required:
            raise ConfigError(f"missing required key {key!r} in [{section}]")
        return default
    raw = parser.get(section, key)
    try:
        return cast(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{section}] {key} = {raw!r}: {exc}") from exc


def _check_known(parser, section, allowed):
    if not parser.has_section(section):
        return
    for key in parser.options(section):
        if key not in allowed:
            raise ConfigError(
                f"unknown key {key!r} in [{section}]; allowed: {sorted(allowed)}"
            )


def _parse_terms(parser, half_dim):
    terms = []
    for section in parser.sections():
        if not section.startswith("term."):
            continue
        _check_known(parser, section, _TERM_KEYS)
        modes_raw = _get(parser, section, "space_modes", str, required=True)
        try:
            modes = tuple(int(v.strip()) for v in modes_raw.split(",") if v.strip())
        except ValueError as exc:
            raise ConfigError(f"[{section}] space_modes = {modes_raw!r}: {exc}") from exc
        if len(modes) != 2 * half_dim:
            raise ConfigError(
                f"[{section}] space_modes must list {2 * half_dim} integers, "
                f"got {len(modes)}"
            )
        terms.append({
            "time_cos": _get(parser, section, "time_cos", int, default=0),
            "time_sin": _get(parser, section, "time_sin", int, default=0),
            "space_modes": modes,
            "amplitude": _get(parser, section, "amplitude", float, required=True),
        })
    if not terms:
        raise ConfigError("trig_polynomial needs at least one [term.N] section")
    return terms


def _parse_matrix(raw: str) -> np.ndarray:
    rows = [r for r in raw.split(";") if r.strip()]
    try:
        mat = np.array([[float(v) for v in r.split(",")] for r in rows])
    except ValueError as exc:
        raise ValueError(f"matrix rows must be comma-separated numbers: {exc}")
    return mat


def _build_system(parser, section, half_dim, default_eps):
    _check_known(parser, section, _HAM_KEYS)
    name = _get(parser, section, "name", str, required=True)
    if name == "trig_polynomial":
        return from_trig_polynomial(_parse_terms(parser, half_dim), half_dim), name
    if name == "linear_quadratic":
        raw = _get(parser, section, "matrix", str, required=True)
        try:
            mat = _parse_matrix(raw)
        except ValueError as exc:
            raise ConfigError(f"[{section}] matrix: {exc}") from exc
        return builtin(name, half_dim=half_dim, matrix=mat), name
    eps = _get(parser, section, "epsilon", float, default=default_eps)
    try:
        return builtin(name, half_dim=half_dim, epsilon=eps), name
    except ValueError as exc:
        raise ConfigError(f"[{section}]: {exc}") from exc


def load_run_config(path) -> RunConfig:
    """Parse and validate a find-orbits configuration file."""
    parser = _read(path)
    for section in parser.sections():
        if section not in ("run", "hamiltonian", "tolerances") and not section.startswith("term."):
            raise ConfigError(f"unknown section [{section}]")
    _check_known(parser, "run", _RUN_KEYS)
    _check_known(parser, "tolerances", _TOL_KEYS)

    half_dim = _get(parser, "run", "half_dim", int, required=True)
    if half_dim < 1:
        raise ConfigError("[run] half_dim must be >= 1")
    starts = _get(parser, "run", "starts", int, default=200)
    if starts < 1:
        raise ConfigError("[run] starts must be >= 1")
    outer_factor = _get(parser, "run", "outer_factor", int, default=4)
    if outer_factor < 2:
        raise ConfigError("[run] outer_factor must be >= 2")
    n0 = _get(parser, "run", "n0", int, default=None)
    if n0 is not None and n0 < 1:
        raise ConfigError("[run] n0 must be >= 1")

    tols = {
        "newton": _get(parser, "tolerances", "newton", float, default=1e-10),
        "phi": _get(parser, "tolerances", "phi", float, default=1e-12),
        "dedup": _get(parser, "tolerances", "dedup", float, default=1e-6),
    }
    for key, val in tols.items():
        if not val > 0:
            raise ConfigError(f"[tolerances] {key} must be positive")

    system, name = _build_system(parser, "hamiltonian", half_dim, default_eps=0.01)
    echo = {s: dict(parser.items(s)) for s in parser.sections()}
    return RunConfig(
        half_dim=half_dim,
        system=system,
        hamiltonian_name=name,
        starts=starts,
        seed=_get(parser, "run", "seed", int, default=0),
        outer_factor=outer_factor,
        n0_override=n0,
        output_dir=_get(parser, "run", "output_dir", str, default="."),
        newton_tol=tols["newton"],
        fiber_tol=tols["phi"],
        dedup_tol=tols["dedup"],
        echo=echo,
    )


def load_surface_config(path) -> SurfaceConfig:
    """Parse and validate a morse-homology configuration file."""
    parser = _read(path)
    for section in parser.sections():
        if section not in ("run", "surface") and not section.startswith("term."):
            raise ConfigError(f"unknown section [{section}]")
    _check_known(parser, "run", {"seed", "output_dir"})
    surface, name = _build_system(parser, "surface", 1, default_eps=1.0)
    if surface.time_dependent:
        raise ConfigError("[surface] must define a time-independent function")
    echo = {s: dict(parser.items(s)) for s in parser.sections()}
    return SurfaceConfig(
        surface=surface,
        surface_name=name,
        seed=_get(parser, "run", "seed", int, default=0),
        output_dir=_get(parser, "run", "output_dir", str, default="."),
        echo=echo,
    )
