"""Run configuration: schema, defaults, loading, and canonical hashing.

Configs are TOML or JSON files mirroring one schema. Validation happens
entirely up front with field-level messages, so a bad config never
touches the filesystem or starts a computation. The canonical JSON form
(sorted keys, full-precision floats) feeds the manifest hash, which is
what makes replay checks meaningful.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

try:
    import tomllib as _toml
except ModuleNotFoundError:
    import tomli as _toml

from .errors import ValidationError
from .exponents import NoiseParams, build_ledger

__all__ = [
    "GridConfig",
    "TimeConfig",
    "NoiseConfig",
    "InitialConfig",
    "SolverConfig",
    "OutputConfig",
    "DiagnosticsConfig",
    "RunConfig",
    "load_config",
    "config_from_mapping",
    "canonical_json",
    "config_hash",
    "PIPELINES",
]

PIPELINES = ("exponents", "sample-noise", "run-linear", "run-full",
             "diagnostics")


def _require(mapping: dict, key: str, where: str):
    if key not in mapping:
        raise ValidationError(f"missing required field {where}{key}")
    return mapping[key]


def _take(mapping: dict, key: str, default):
    return mapping.get(key, default)


def _check_unknown(mapping: dict, known, where: str) -> None:
    extra = set(mapping) - set(known)
    if extra:
        raise ValidationError(
            f"unknown field(s) {sorted(extra)} in {where or 'config root'}"
        )


def _as_int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(f"{where} must be an integer, got {value!r}")
    return value


def _as_float(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{where} must be a number, got {value!r}")
    return float(value)


@dataclass(frozen=True)
class GridConfig:
    n_x: int = 32
    n_z: int = 65
    height: float | None = None

    @staticmethod
    def parse(raw: dict) -> "GridConfig":
        _check_unknown(raw, ("n_x", "n_z", "height"), "grid")
        cfg = GridConfig(
            n_x=_as_int(_take(raw, "n_x", 32), "grid.n_x"),
            n_z=_as_int(_take(raw, "n_z", 65), "grid.n_z"),
            height=(None if raw.get("height") is None
                    else _as_float(raw["height"], "grid.height")),
        )
        if cfg.n_x < 4 or cfg.n_x % 2:
            raise ValidationError("grid.n_x must be an even integer >= 4")
        if cfg.n_z < 9:
            raise ValidationError("grid.n_z must be at least 9")
        if cfg.height is not None and cfg.height <= 0:
            raise ValidationError("grid.height must be positive")
        return cfg


@dataclass(frozen=True)
class TimeConfig:
    horizon: float = 1.0
    n_steps: int = 200
    scheme: str = "be"
    store_every: int = 1

    @staticmethod
    def parse(raw: dict) -> "TimeConfig":
        _check_unknown(raw, ("horizon", "n_steps", "scheme", "store_every"),
                       "time")
        cfg = TimeConfig(
            horizon=_as_float(_take(raw, "horizon", 1.0), "time.horizon"),
            n_steps=_as_int(_take(raw, "n_steps", 200), "time.n_steps"),
            scheme=_take(raw, "scheme", "be"),
            store_every=_as_int(_take(raw, "store_every", 1),
                                "time.store_every"),
        )
        if cfg.horizon <= 0:
            raise ValidationError("time.horizon must be positive")
        if cfg.n_steps < 1:
            raise ValidationError("time.n_steps must be at least 1")
        if cfg.scheme not in ("be", "cn"):
            raise ValidationError("time.scheme must be 'be' or 'cn'")
        if cfg.store_every < 1 or cfg.n_steps % cfg.store_every:
            raise ValidationError(
                "time.store_every must divide time.n_steps"
            )
        return cfg


@dataclass(frozen=True)
class NoiseConfig:
    hurst: float = 0.9
    sobolev_deficit: float = 0.0
    sigma0: float = 0.1
    n_modes: int = 8
    decay: str = "default"

    @staticmethod
    def parse(raw: dict) -> "NoiseConfig":
        _check_unknown(
            raw, ("hurst", "sobolev_deficit", "sigma0", "n_modes", "decay"),
            "noise",
        )
        cfg = NoiseConfig(
            hurst=_as_float(_require(raw, "hurst", "noise."), "noise.hurst"),
            sobolev_deficit=_as_float(
                _take(raw, "sobolev_deficit", 0.0), "noise.sobolev_deficit"),
            sigma0=_as_float(_take(raw, "sigma0", 0.1), "noise.sigma0"),
            n_modes=_as_int(_take(raw, "n_modes", 8), "noise.n_modes"),
            decay=_take(raw, "decay", "default"),
        )
        if cfg.sigma0 <= 0:
            raise ValidationError("noise.sigma0 must be positive")
        if cfg.n_modes < 0:
            raise ValidationError("noise.n_modes must be non-negative")
        if cfg.decay not in ("default", "critical"):
            raise ValidationError("noise.decay must be 'default' or 'critical'")
        return cfg

    def params(self) -> NoiseParams:
        return NoiseParams(self.hurst, self.sobolev_deficit)


@dataclass(frozen=True)
class InitialConfig:
    kind: str = "standing-eddy"
    amplitude: float = 0.05

    @staticmethod
    def parse(raw: dict) -> "InitialConfig":
        _check_unknown(raw, ("kind", "amplitude"), "initial")
        cfg = InitialConfig(
            kind=_take(raw, "kind", "standing-eddy"),
            amplitude=_as_float(_take(raw, "amplitude", 0.05),
                                "initial.amplitude"),
        )
        if cfg.kind not in ("standing-eddy", "zero"):
            raise ValidationError(
                "initial.kind must be 'standing-eddy' or 'zero'"
            )
        return cfg


@dataclass(frozen=True)
class SolverConfig:
    form: str = "skew"
    method: str = "march"
    picard_tol: float = 1e-10
    picard_max_iter: int = 60
    picard_max_halvings: int = 3

    @staticmethod
    def parse(raw: dict) -> "SolverConfig":
        _check_unknown(
            raw,
            ("form", "method", "picard_tol", "picard_max_iter",
             "picard_max_halvings"),
            "solver",
        )
        cfg = SolverConfig(
            form=_take(raw, "form", "skew"),
            method=_take(raw, "method", "march"),
            picard_tol=_as_float(_take(raw, "picard_tol", 1e-10),
                                 "solver.picard_tol"),
            picard_max_iter=_as_int(_take(raw, "picard_max_iter", 60),
                                    "solver.picard_max_iter"),
            picard_max_halvings=_as_int(
                _take(raw, "picard_max_halvings", 3),
                "solver.picard_max_halvings"),
        )
        if cfg.form not in ("skew", "conservative", "convective"):
            raise ValidationError(
                "solver.form must be 'skew', 'conservative' or 'convective'"
            )
        if cfg.method not in ("march", "picard"):
            raise ValidationError("solver.method must be 'march' or 'picard'")
        if cfg.picard_tol <= 0:
            raise ValidationError("solver.picard_tol must be positive")
        if cfg.picard_max_iter < 1:
            raise ValidationError("solver.picard_max_iter must be >= 1")
        if cfg.picard_max_halvings < 0:
            raise ValidationError("solver.picard_max_halvings must be >= 0")
        return cfg


@dataclass(frozen=True)
class OutputConfig:
    fields: bool = True

    @staticmethod
    def parse(raw: dict) -> "OutputConfig":
        _check_unknown(raw, ("fields",), "output")
        val = _take(raw, "fields", True)
        if not isinstance(val, bool):
            raise ValidationError("output.fields must be a boolean")
        return OutputConfig(fields=val)


@dataclass(frozen=True)
class DiagnosticsConfig:
    qs: tuple[float, ...] = (1.05, 1.9)
    resolutions: tuple[int, ...] = (65, 129, 257)
    replicas: int = 4
    horizon: float = 0.25
    interior: tuple[float, float] = (0.3, 0.7)
    near_wall: tuple[float, float] = (0.6, 1.0)

    @staticmethod
    def parse(raw: dict) -> "DiagnosticsConfig":
        _check_unknown(
            raw,
            ("qs", "resolutions", "replicas", "horizon", "interior",
             "near_wall"),
            "diagnostics",
        )
        qs = tuple(
            _as_float(v, "diagnostics.qs[]")
            for v in _take(raw, "qs", (1.05, 1.9))
        )
        resolutions = tuple(
            _as_int(v, "diagnostics.resolutions[]")
            for v in _take(raw, "resolutions", (65, 129, 257))
        )
        interior = tuple(
            _as_float(v, "diagnostics.interior[]")
            for v in _take(raw, "interior", (0.3, 0.7))
        )
        near_wall = tuple(
            _as_float(v, "diagnostics.near_wall[]")
            for v in _take(raw, "near_wall", (0.6, 1.0))
        )
        cfg = DiagnosticsConfig(
            qs=qs, resolutions=resolutions,
            replicas=_as_int(_take(raw, "replicas", 4),
                             "diagnostics.replicas"),
            horizon=_as_float(_take(raw, "horizon", 0.25),
                              "diagnostics.horizon"),
            interior=interior, near_wall=near_wall,
        )
        for name, box in (("interior", interior), ("near_wall", near_wall)):
            if len(box) != 2 or not 0.0 <= box[0] < box[1] <= 1.0:
                raise ValidationError(
                    f"diagnostics.{name} must be an increasing pair in [0, 1]"
                )
        if cfg.replicas < 1:
            raise ValidationError("diagnostics.replicas must be >= 1")
        if cfg.horizon <= 0:
            raise ValidationError("diagnostics.horizon must be positive")
        return cfg


@dataclass(frozen=True)
class RunConfig:
    r: float
    seed: int = 0
    pipeline: str | None = None
    grid: GridConfig = field(default_factory=GridConfig)
    time: TimeConfig = field(default_factory=TimeConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    initial: InitialConfig = field(default_factory=InitialConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    diagnostics: DiagnosticsConfig = field(default_factory=DiagnosticsConfig)

    def ledger(self):
        """Exponent ledger for this run; validates admissibility."""
        return build_ledger(self.noise.params(), self.r)


_SECTIONS = {
    "grid": GridConfig,
    "time": TimeConfig,
    "noise": NoiseConfig,
    "initial": InitialConfig,
    "solver": SolverConfig,
    "output": OutputConfig,
    "diagnostics": DiagnosticsConfig,
}


def config_from_mapping(raw: dict) -> RunConfig:
    """Validate a parsed mapping into a RunConfig.

    Every admissibility consequence is checked here as well, so a
    returned config is safe to execute.
    """
    if not isinstance(raw, dict):
        raise ValidationError("config root must be a table/object")
    known = set(_SECTIONS) | {"r", "seed", "pipeline"}
    _check_unknown(raw, known, "")
    if "r" not in raw:
        raise ValidationError("missing required field r")
    r = _as_float(raw["r"], "r")
    seed = _as_int(_take(raw, "seed", 0), "seed")
    if seed < 0:
        raise ValidationError("seed must be non-negative")
    pipeline = _take(raw, "pipeline", None)
    if pipeline is not None and pipeline not in PIPELINES:
        raise ValidationError(
            f"pipeline must be one of {', '.join(PIPELINES)}"
        )
    sections = {}
    for name, cls in _SECTIONS.items():
        sub = _take(raw, name, {})
        if not isinstance(sub, dict):
            raise ValidationError(f"{name} must be a table/object")
        sections[name] = cls.parse(sub)
    cfg = RunConfig(r=r, seed=seed, pipeline=pipeline, **sections)
    # Exercise the exponent chain now: inadmissible (H, s, r) must fail
    # before any output exists.
    cfg.ledger()
    if cfg.noise.n_modes > cfg.grid.n_x // 2 - 1:
        raise ValidationError(
            "noise.n_modes exceeds what grid.n_x can represent"
        )
    return cfg


def load_config(path) -> RunConfig:
    """Read a TOML or JSON config file and validate it."""
    p = Path(path)
    if not p.is_file():
        raise ValidationError(f"config file not found: {p}")
    text = p.read_bytes()
    if p.suffix == ".json":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config is not valid JSON: {exc}") from exc
    else:
        try:
            raw = _toml.loads(text.decode("utf-8"))
        except (_toml.TOMLDecodeError, UnicodeDecodeError) as exc:
            raise ValidationError(f"config is not valid TOML: {exc}") from exc
    return config_from_mapping(raw)


def canonical_json(cfg: RunConfig) -> str:
    """Canonical serialized form: sorted keys, repr-precision floats."""
    return json.dumps(asdict(cfg), sort_keys=True, separators=(",", ":"))


def config_hash(cfg: RunConfig) -> str:
    return hashlib.sha256(canonical_json(cfg).encode("utf-8")).hexdigest()
