"""Experiment configuration: a single JSON file describing the channel, the
input alphabet, the power grid, quadrature settings and tolerances.

Complex entries are written as [re, im] pairs (bare reals are accepted).
Parse errors carry the line/column from the JSON decoder; validation errors
carry the dotted path of the offending field.
"""

import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .errors import ConfigError, InputError
from .finite_alphabet import (
    Constellation,
    QuadratureSpec,
    builtin_constellation,
    BUILTIN_NAMES,
)
from .model import ChannelInstance, Eavesdropper, RNG_NAME

ALL_CASES = ("gaussian", "finite_no_pc", "finite_pc")

_GRID_DEFAULT = {"min": 0.1, "max": 1000.0, "count": 40, "spacing": "log"}


@dataclass
class ExperimentConfig:
    """Validated experiment description plus the raw dict it came from
    (echoed verbatim into JSON outputs)."""

    H: np.ndarray = field(repr=False)
    eavesdroppers: list = field(repr=False)
    n0: float = 1.0
    p0_fixed: float = None
    constellation: Constellation = None
    p0_grid: np.ndarray = field(default=None, repr=False)
    quad: QuadratureSpec = None
    rank_tol: float = None
    mu_tol: float = 1e-10
    delta: float = 1e-6
    cases: tuple = ALL_CASES
    raw: dict = field(default_factory=dict, repr=False)

    def channel_instance(self, p0: float) -> ChannelInstance:
        return ChannelInstance(H=self.H, eavesdroppers=self.eavesdroppers, n0=self.n0, p0=p0)


def _complex_entry(v, path):
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in v
    ):
        return complex(v[0], v[1])
    raise ConfigError(f"{path}: expected a real number or [re, im] pair, got {v!r}")


def _require(d, key, path, types=None):
    if key not in d:
        raise ConfigError(f"{path}: missing required key {key!r}")
    v = d[key]
    if types is not None and not isinstance(v, types):
        raise ConfigError(f"{path}.{key}: wrong type {type(v).__name__}")
    return v


def _positive(v, path):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0 or not np.isfinite(v):
        raise ConfigError(f"{path}: must be a positive finite number, got {v!r}")
    return float(v)


def _parse_matrix(rows, path):
    if not isinstance(rows, list) or not rows:
        raise ConfigError(f"{path}: expected a non-empty list of rows")
    width = None
    out = []
    for i, row in enumerate(rows):
        if not isinstance(row, list) or not row:
            raise ConfigError(f"{path}[{i}]: expected a non-empty row list")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ConfigError(f"{path}[{i}]: ragged row (expected {width} entries)")
        out.append([_complex_entry(v, f"{path}[{i}][{j}]") for j, v in enumerate(row)])
    return np.array(out, dtype=np.complex128)


def _parse_constellation(spec, path):
    try:
        if isinstance(spec, str):
            return builtin_constellation(spec)
        if isinstance(spec, dict):
            name = spec.get("name", "custom")
            pts = _require(spec, "points", path, list)
            points = [_complex_entry(v, f"{path}.points[{i}]") for i, v in enumerate(pts)]
            return Constellation(name=str(name), points=np.array(points))
    except InputError as e:
        raise ConfigError(f"{path}: {e}") from e
    raise ConfigError(
        f"{path}: expected a builtin name {BUILTIN_NAMES} or an object with 'points'"
    )


def _parse_grid(spec, path):
    if isinstance(spec, list):
        if not spec:
            raise ConfigError(f"{path}: grid list is empty")
        grid = np.array([_positive(v, f"{path}[{i}]") for i, v in enumerate(spec)])
    elif isinstance(spec, dict):
        lo = _positive(_require(spec, "min", path), f"{path}.min")
        hi = _positive(_require(spec, "max", path), f"{path}.max")
        count = _require(spec, "count", path, int)
        spacing = spec.get("spacing", "log")
        if count < 1:
            raise ConfigError(f"{path}.count: must be >= 1")
        if hi <= lo and count > 1:
            raise ConfigError(f"{path}: max must exceed min")
        if spacing == "log":
            grid = np.geomspace(lo, hi, count)
        elif spacing == "linear":
            grid = np.linspace(lo, hi, count)
        else:
            raise ConfigError(f"{path}.spacing: must be 'log' or 'linear', got {spacing!r}")
    else:
        raise ConfigError(f"{path}: expected a list or a min/max/count object")
    if grid.size > 1 and np.any(np.diff(grid) <= 0):
        raise ConfigError(f"{path}: grid must be strictly increasing")
    return grid


def parse_config(raw: dict) -> ExperimentConfig:
    """Validate a parsed JSON object into an ExperimentConfig."""
    if not isinstance(raw, dict):
        raise ConfigError("top level: expected a JSON object")

    ch = _require(raw, "channel", "top level", dict)
    H = _parse_matrix(_require(ch, "H", "channel"), "channel.H")
    eav_spec = _require(ch, "eavesdroppers", "channel", list)
    if not eav_spec:
        raise ConfigError("channel.eavesdroppers: need at least one entry")
    eavesdroppers = []
    for i, e in enumerate(eav_spec):
        p = f"channel.eavesdroppers[{i}]"
        if not isinstance(e, dict):
            raise ConfigError(f"{p}: expected an object with n_antennas and sigma2")
        n_ant = _require(e, "n_antennas", p, int)
        s2 = _positive(_require(e, "sigma2", p), f"{p}.sigma2")
        try:
            eavesdroppers.append(Eavesdropper(n_antennas=n_ant, sigma2=s2))
        except InputError as err:
            raise ConfigError(f"{p}: {err}") from err
    n0 = _positive(_require(ch, "N0", "channel"), "channel.N0")
    p0_fixed = _positive(ch["P0"], "channel.P0") if "P0" in ch else None

    constellation = _parse_constellation(raw.get("constellation", "bpsk"), "constellation")
    grid = _parse_grid(raw.get("P0_grid", dict(_GRID_DEFAULT)), "P0_grid")

    q = raw.get("quadrature", {})
    if not isinstance(q, dict):
        raise ConfigError("quadrature: expected an object")
    rng_name = q.get("rng", RNG_NAME)
    if rng_name != RNG_NAME:
        raise ConfigError(f"quadrature.rng: only {RNG_NAME!r} is supported, got {rng_name!r}")
    try:
        quad = QuadratureSpec(
            scheme=q.get("scheme", "gauss-hermite"),
            nodes=q.get("nodes", QuadratureSpec.nodes),
            mc_samples=q.get("mc_samples", QuadratureSpec.mc_samples),
            seed=int(q.get("seed", QuadratureSpec.seed)),
        )
    except InputError as e:
        raise ConfigError(f"quadrature: {e}") from e

    tol = raw.get("tolerances", {})
    if not isinstance(tol, dict):
        raise ConfigError("tolerances: expected an object")
    rank_tol = tol.get("rank_tol")
    if rank_tol is not None:
        rank_tol = _positive(rank_tol, "tolerances.rank_tol")
    mu_tol = _positive(tol.get("mu_tol", 1e-10), "tolerances.mu_tol")
    delta = _positive(tol.get("delta", 1e-6), "tolerances.delta")

    cases = raw.get("cases", list(ALL_CASES))
    if not isinstance(cases, list) or not cases:
        raise ConfigError("cases: expected a non-empty list")
    for c in cases:
        if c not in ALL_CASES:
            raise ConfigError(f"cases: unknown case {c!r}; valid: {ALL_CASES}")
    cases = tuple(c for c in ALL_CASES if c in cases)

    try:
        ChannelInstance(H=H, eavesdroppers=eavesdroppers, n0=n0, p0=float(grid[-1]))
    except InputError as e:
        raise ConfigError(f"channel: {e}") from e

    return ExperimentConfig(
        H=H,
        eavesdroppers=eavesdroppers,
        n0=n0,
        p0_fixed=p0_fixed,
        constellation=constellation,
        p0_grid=grid,
        quad=quad,
        rank_tol=rank_tol,
        mu_tol=mu_tol,
        delta=delta,
        cases=cases,
        raw=raw,
    )


def bundled_config_path(name: str):
    """Path of a config shipped with the package (no .json suffix needed)."""
    fname = name if name.endswith(".json") else name + ".json"
    ref = resources.files("secalloc").joinpath("configs", fname)
    return ref if ref.is_file() else None


def load_config(path) -> ExperimentConfig:
    """Read and validate a config file.  `path` may also name a bundled
    config such as 'mimo3x3_bpsk_sweep'."""
    import os

    text = None
    if not os.path.exists(path):
        ref = bundled_config_path(str(path))
        if ref is not None:
            text = ref.read_text(encoding="utf-8")
    if text is None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON at line {e.lineno} column {e.colno}: {e.msg}") from e
    return parse_config(raw)
