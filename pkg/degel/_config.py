# SPDX-FileCopyrightText: 2024 DB Systel GmbH
#
# SPDX-License-Identifier: Apache-2.0

"""
Experiment configuration: a line-oriented `key = value` text format.

Sections are written as dotted keys (`grid.n = 129`). `#` starts a comment,
blank lines are ignored. Keys and their defaults:

    experiment            (required) solve | exact-check | exponent | deadcore | obstacle |
                          barrier-root | approximation | recession | nondegeneracy | comparison
    seed                  0
    grid.n                65            odd, >= 9
    grid.radius           1.0
    grid.center           0,0
    operator.name         trace         trace | pucci_plus | pucci_minus | bellman_inf |
                                        m_momentum | p_laplacian | infinity_laplacian
    operator.lambda       1.0
    operator.Lambda       1.0
    operator.p            2.0           exponent of the normalized p-Laplacian
    operator.m            3
    operator.sigma        1,1
    operator.monotone     false         wide-stencil evaluation of the Pucci operators
    operator.fallback     true          Laplacian where the p-Laplacian gradient vanishes
    degeneracy.enabled    true
    degeneracy.p          2.0
    degeneracy.q          3.0
    degeneracy.a          const:0       const:<v> | power:<alpha> | table:<path>
    degeneracy.eps_reg    1e-8
    degeneracy.L1         1.0
    degeneracy.L2         1.0
    source.kind           const         const | exact | deadcore
    source.value          0.0           constant value, or Thiele modulus for deadcore
    source.mu             1.0
    boundary              const:0       const:<v> | power:<alpha> | saddle |
                                        linear:<b1>,<b2> | exact
    obstacle              none          none | paraboloid:<c0>,<c1>
    solver.dt_safety      0.4
    solver.tol            1e-7
    solver.max_iter       500000
    solver.report_every   10000
    analysis.x0           0,0
    analysis.r_min        4h of the grid
    analysis.r_max        0.25
    analysis.per_decade   8
    analysis.beta         1/(p+1)
    analysis.mu           source.mu
    analysis.threshold    10 * solver.tol
    analysis.slope_tol    per experiment
    barrier.m_inf         1.0
    barrier.diam          2.0
    barrier.norm_a        sup of the modulating function on the unit ball
    barrier.N             2
    approximation.deltas  0.1,0.01,0.001
    recession.taus        0.1,0.01,0.001,0.0001
    output.path           results
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass, field, fields
from functools import partial

import numpy as np

from ._barriers import exact_example_solution, exact_example_source
from ._degeneracy import DegeneracyLaw, Modulation, modulation_from_spec
from ._errors import ConfigError, ParameterError
from ._grid import Grid2D, Point, PointFunction, make_grid
from ._helpers import read_text_lines
from ._operators import OperatorSpec, operator_from_name
from ._solver import (
    DIMENSION,
    BoundedSource,
    ConstantSource,
    DeadCoreSource,
    ProblemSpec,
    SolverConfig,
    SourceSpec,
)

EXPERIMENTS = (
    "solve",
    "exact-check",
    "exponent",
    "deadcore",
    "obstacle",
    "barrier-root",
    "approximation",
    "recession",
    "nondegeneracy",
    "comparison",
)


def _to_bool(raw: str) -> bool:
    lowered = raw.lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected a boolean, got '{raw}'")


def _to_float_list(raw: str) -> tuple[float, ...]:
    items = tuple(float(item) for item in raw.split(","))
    if not items:
        raise ValueError("expected a comma-separated list of numbers")
    return items


def _to_point(raw: str) -> tuple[float, float]:
    items = _to_float_list(raw)
    if len(items) != 2:
        raise ValueError(f"expected two comma-separated numbers, got '{raw}'")
    return (items[0], items[1])


def _to_int(raw: str) -> int:
    return int(raw)


# Converter per key. Names map to the attribute of the config section
KEYS: dict[str, Callable[[str], object]] = {
    "experiment": str,
    "seed": _to_int,
    "grid.n": _to_int,
    "grid.radius": float,
    "grid.center": _to_point,
    "operator.name": str,
    "operator.lambda": float,
    "operator.Lambda": float,
    "operator.p": float,
    "operator.m": _to_int,
    "operator.sigma": _to_point,
    "operator.monotone": _to_bool,
    "operator.fallback": _to_bool,
    "degeneracy.enabled": _to_bool,
    "degeneracy.p": float,
    "degeneracy.q": float,
    "degeneracy.a": str,
    "degeneracy.eps_reg": float,
    "degeneracy.L1": float,
    "degeneracy.L2": float,
    "source.kind": str,
    "source.value": float,
    "source.mu": float,
    "boundary": str,
    "obstacle": str,
    "solver.dt_safety": float,
    "solver.tol": float,
    "solver.max_iter": _to_int,
    "solver.report_every": _to_int,
    "analysis.x0": _to_point,
    "analysis.r_min": float,
    "analysis.r_max": float,
    "analysis.per_decade": _to_int,
    "analysis.beta": float,
    "analysis.mu": float,
    "analysis.threshold": float,
    "analysis.slope_tol": float,
    "barrier.m_inf": float,
    "barrier.diam": float,
    "barrier.norm_a": float,
    "barrier.N": _to_int,
    "approximation.deltas": _to_float_list,
    "recession.taus": _to_float_list,
    "output.path": str,
}

_ALIASES = {"lambda": "lam", "Lambda": "Lam"}
_TOP_LEVEL = {
    "approximation.deltas": "deltas",
    "recession.taus": "taus",
    "output.path": "output_path",
}


@dataclass(frozen=True)
class GridSection:
    """Grid settings"""

    n: int = 65
    radius: float = 1.0
    center: Point = (0.0, 0.0)


@dataclass(frozen=True)
class OperatorSection:
    """Operator settings"""

    name: str = "trace"
    lam: float = 1.0
    Lam: float = 1.0
    p: float = 2.0
    m: int = 3
    sigma: tuple[float, float] = (1.0, 1.0)
    monotone: bool = False
    fallback: bool = True


@dataclass(frozen=True)
class DegeneracySection:
    """Degeneracy law settings"""

    enabled: bool = True
    p: float = 2.0
    q: float = 3.0
    a: str = "const:0"
    eps_reg: float = 1e-8
    L1: float = 1.0
    L2: float = 1.0


@dataclass(frozen=True)
class SourceSection:
    """Source term settings"""

    kind: str = "const"
    value: float = 0.0
    mu: float = 1.0


@dataclass(frozen=True)
class SolverSection:
    """Pseudo-time iteration settings"""

    dt_safety: float = 0.4
    tol: float = 1e-7
    max_iter: int = 500_000
    report_every: int = 10_000


@dataclass(frozen=True)
class AnalysisSection:
    """Measurement settings; unset values are derived per experiment"""

    x0: Point = (0.0, 0.0)
    r_min: float | None = None
    r_max: float = 0.25
    per_decade: int = 8
    beta: float | None = None
    mu: float | None = None
    threshold: float | None = None
    slope_tol: float | None = None


@dataclass(frozen=True)
class BarrierSection:
    """Inputs of the barrier constants"""

    m_inf: float = 1.0
    diam: float = 2.0
    norm_a: float | None = None
    N: int = 2


_SECTIONS = {
    "grid": GridSection,
    "operator": OperatorSection,
    "degeneracy": DegeneracySection,
    "source": SourceSection,
    "solver": SolverSection,
    "analysis": AnalysisSection,
    "barrier": BarrierSection,
}


def _constant(value: float, x1, x2) -> np.ndarray:
    return np.full(np.shape(x1), value)


def _power(alpha: float, x1, x2) -> np.ndarray:
    return np.hypot(x1, x2) ** alpha


def _saddle(x1, x2) -> np.ndarray:
    return np.asarray(x1) ** 2 - np.asarray(x2) ** 2


def _linear(b1: float, b2: float, x1, x2) -> np.ndarray:
    return b1 * np.asarray(x1) + b2 * np.asarray(x2)


def _paraboloid(c0: float, c1: float, x1, x2) -> np.ndarray:
    return c0 - c1 * (np.asarray(x1) ** 2 + np.asarray(x2) ** 2)


def _numbers(spec: str, arg: str, count: int) -> list[float]:
    try:
        numbers = [float(item) for item in arg.split(",")]
    except ValueError as exc:
        raise ParameterError(f"invalid number in '{spec}'") from exc
    if len(numbers) != count:
        raise ParameterError(f"'{spec}' needs {count} comma-separated numbers")
    return numbers


def boundary_from_spec(spec: str, p: float) -> PointFunction:
    """
    Parse `const:<v>`, `power:<alpha>`, `saddle`, `linear:<b1>,<b2>` or `exact`.

    `exact` is the sharp profile |x|^{(p+2)/(p+1)}.
    """
    kind, _, arg = spec.strip().partition(":")
    if kind == "const":
        return partial(_constant, *_numbers(spec, arg, 1))
    if kind == "power":
        return partial(_power, *_numbers(spec, arg, 1))
    if kind == "linear":
        return partial(_linear, *_numbers(spec, arg, 2))
    if kind == "saddle" and not arg:
        return _saddle
    if kind == "exact" and not arg:
        return partial(exact_example_solution, p=p)
    raise ParameterError(
        f"unknown boundary spec '{spec}', expected const:, power:, saddle, linear: or exact"
    )


def obstacle_from_spec(spec: str) -> PointFunction | None:
    """Parse `none` or `paraboloid:<c0>,<c1>` for c0 - c1 |x|^2"""
    kind, _, arg = spec.strip().partition(":")
    if kind == "none" and not arg:
        return None
    if kind == "paraboloid":
        return partial(_paraboloid, *_numbers(spec, arg, 2))
    raise ParameterError(f"unknown obstacle spec '{spec}', expected none or paraboloid:")


@dataclass(frozen=True)
class ExperimentConfig:
    """A parsed experiment file. `lines` maps every given key to its line number"""

    experiment: str
    seed: int = 0
    grid: GridSection = field(default_factory=GridSection)
    operator: OperatorSection = field(default_factory=OperatorSection)
    degeneracy: DegeneracySection = field(default_factory=DegeneracySection)
    source: SourceSection = field(default_factory=SourceSection)
    boundary: str = "const:0"
    obstacle: str = "none"
    solver: SolverSection = field(default_factory=SolverSection)
    analysis: AnalysisSection = field(default_factory=AnalysisSection)
    barrier: BarrierSection = field(default_factory=BarrierSection)
    deltas: tuple[float, ...] = (0.1, 0.01, 0.001)
    taus: tuple[float, ...] = (0.1, 0.01, 0.001, 0.0001)
    output_path: str = "results"
    lines: dict[str, int] = field(default_factory=dict, compare=False)

    @property
    def p(self) -> float:
        """Degeneracy exponent, 0 without degeneracy"""
        return self.degeneracy.p if self.degeneracy.enabled else 0.0

    def make_grid(self, n: int | None = None) -> Grid2D:
        """The configured grid, optionally with another resolution"""
        return make_grid(self.grid.n if n is None else n, self.grid.center, self.grid.radius)

    def build_operator(self) -> OperatorSpec:
        """The configured operator"""
        op = self.operator
        return operator_from_name(
            op.name, op.lam, op.Lam, op.p, op.m, op.sigma, op.monotone, op.fallback
        )

    def build_modulation(self) -> Modulation:
        """The configured modulating function"""
        return modulation_from_spec(self.degeneracy.a)

    def build_degeneracy(self) -> DegeneracyLaw | None:
        """The configured degeneracy law, None if disabled"""
        deg = self.degeneracy
        if not deg.enabled:
            return None
        return DegeneracyLaw(deg.p, deg.q, self.build_modulation(), deg.L1, deg.L2)

    def build_source(self) -> SourceSpec:
        """The configured source term"""
        src = self.source
        if src.kind == "const":
            return ConstantSource(src.value)
        if src.kind == "deadcore":
            return DeadCoreSource(partial(_constant, src.value), src.mu)
        if src.kind == "exact":
            if not self.degeneracy.enabled:
                raise ParameterError("the exact source needs an enabled degeneracy law")
            a = self.build_modulation()
            deg = self.degeneracy

            def exact(x1, x2, u):
                return exact_example_source(x1, x2, deg.p, deg.q, DIMENSION, a)

            return BoundedSource(exact)
        raise ParameterError(f"unknown source kind '{src.kind}', expected const, exact or deadcore")

    def build_boundary(self) -> PointFunction:
        """The configured boundary data"""
        return boundary_from_spec(self.boundary, self.p)

    def build_obstacle(self) -> PointFunction | None:
        """The configured obstacle"""
        return obstacle_from_spec(self.obstacle)

    def build_problem(self) -> ProblemSpec:
        """The configured equation with its data"""
        return ProblemSpec(
            operator=self.build_operator(),
            degeneracy=self.build_degeneracy(),
            source=self.build_source(),
            boundary=self.build_boundary(),
            obstacle=self.build_obstacle(),
        )

    def solver_config(self) -> SolverConfig:
        """Iteration parameters of the solver"""
        s = self.solver
        return SolverConfig(
            dt_safety=s.dt_safety,
            tol=s.tol,
            max_iter=s.max_iter,
            report_every=s.report_every,
            eps_reg=self.degeneracy.eps_reg,
        )

    def threshold(self) -> float:
        """Free-boundary threshold"""
        a = self.analysis
        return 10.0 * self.solver.tol if a.threshold is None else a.threshold

    def beta(self) -> float:
        """Hoelder exponent of the gradient used for critical zones"""
        return 1.0 / (self.p + 1.0) if self.analysis.beta is None else self.analysis.beta

    def reaction_order(self) -> float:
        """Reaction order used for dead-core exponents"""
        return self.source.mu if self.analysis.mu is None else self.analysis.mu

    def to_lines(self) -> list[str]:
        """The resolved configuration in its own file format"""
        out = [f"experiment = {self.experiment}", f"seed = {self.seed}"]
        for name in _SECTIONS:
            section = getattr(self, name)
            reverse = {v: k for k, v in _ALIASES.items()}
            for item in fields(section):
                value = getattr(section, item.name)
                if value is None:
                    continue
                out.append(f"{name}.{reverse.get(item.name, item.name)} = {_render(value)}")
        out.append(f"boundary = {self.boundary}")
        out.append(f"obstacle = {self.obstacle}")
        for key, attribute in _TOP_LEVEL.items():
            out.append(f"{key} = {_render(getattr(self, attribute))}")
        return out


def _render(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ",".join(f"{v:g}" for v in value)
    return str(value)


def _read_pairs(text: str) -> tuple[dict[str, object], dict[str, int]]:
    values: dict[str, object] = {}
    lines: dict[str, int] = {}
    for number, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, raw = line.partition("=")
        key, raw = key.strip(), raw.strip()
        if not sep or not key:
            raise ConfigError(f"expected 'key = value', got '{raw_line.strip()}'", line=number)
        if key not in KEYS:
            raise ConfigError("unknown key", line=number, key=key)
        if key in values:
            raise ConfigError(
                f"duplicate key, first given on line {lines[key]}", line=number, key=key
            )
        if not raw:
            raise ConfigError("missing value", line=number, key=key)
        try:
            values[key] = KEYS[key](raw)
        except ValueError as exc:
            raise ConfigError(f"invalid value '{raw}': {exc}", line=number, key=key) from exc
        lines[key] = number
    return values, lines


def _assemble(values: dict[str, object], lines: dict[str, int]) -> ExperimentConfig:
    if "experiment" not in values:
        raise ConfigError("missing required key", key="experiment")
    sections: dict[str, dict[str, object]] = {name: {} for name in _SECTIONS}
    top: dict[str, object] = {}
    for key, value in values.items():
        if key in _TOP_LEVEL:
            top[_TOP_LEVEL[key]] = value
            continue
        prefix, _, name = key.partition(".")
        if name:
            sections[prefix][_ALIASES.get(name, name)] = value
        else:
            top[key] = value
    built = {name: cls(**sections[name]) for name, cls in _SECTIONS.items()}
    return ExperimentConfig(**top, **built, lines=lines)  # type: ignore[arg-type]


def _checked(cfg: ExperimentConfig, key: str, check: Callable[[], object]) -> None:
    try:
        check()
    except ParameterError as exc:
        raise ConfigError(str(exc), line=cfg.lines.get(key), key=key) from exc


def _require(cfg: ExperimentConfig, key: str, condition: bool, message: str) -> None:
    if not condition:
        raise ConfigError(message, line=cfg.lines.get(key), key=key)


def validate_config(cfg: ExperimentConfig) -> None:
    """
    Build every configured object once, so that bad values fail before any solve.

    Raises:
        ConfigError: Naming the offending key and its line.
    """
    _require(
        cfg,
        "experiment",
        cfg.experiment in EXPERIMENTS,
        f"unknown experiment '{cfg.experiment}', expected one of {', '.join(EXPERIMENTS)}",
    )
    _checked(cfg, "grid.n", cfg.make_grid)
    _checked(cfg, "operator.name", cfg.build_operator)
    _checked(cfg, "degeneracy.a", cfg.build_degeneracy)
    _checked(cfg, "boundary", cfg.build_boundary)
    _checked(cfg, "obstacle", cfg.build_obstacle)
    source_key = "source.mu" if cfg.source.kind == "deadcore" else "source.kind"
    _checked(cfg, source_key, cfg.build_problem)
    for name in ("dt_safety", "tol", "max_iter", "report_every"):
        single = {name: getattr(cfg.solver, name)}
        _checked(cfg, f"solver.{name}", partial(SolverConfig, **single))
    _checked(cfg, "degeneracy.eps_reg", partial(SolverConfig, eps_reg=cfg.degeneracy.eps_reg))

    a = cfg.analysis
    _require(cfg, "analysis.r_max", a.r_max > 0, "r_max must be positive")
    _require(
        cfg,
        "analysis.r_min",
        a.r_min is None or 0 < a.r_min < a.r_max,
        "r_min must lie in (0, r_max)",
    )
    _require(cfg, "analysis.per_decade", a.per_decade >= 1, "per_decade must be positive")
    if cfg.experiment in ("barrier-root", "nondegeneracy"):
        _require(
            cfg,
            "barrier.m_inf",
            cfg.barrier.m_inf > 0,
            f"m_inf > 0 required for the barrier root, got m_inf={cfg.barrier.m_inf}",
        )
    if cfg.experiment == "deadcore":
        _require(
            cfg,
            "source.kind",
            cfg.source.kind == "deadcore",
            "the deadcore experiment needs source.kind = deadcore",
        )
    if cfg.experiment == "obstacle":
        _require(
            cfg, "obstacle", cfg.obstacle != "none", "the obstacle experiment needs an obstacle"
        )
    if cfg.experiment == "exact-check":
        _require(
            cfg,
            "degeneracy.enabled",
            cfg.degeneracy.enabled,
            "the exact example needs an enabled degeneracy law",
        )
    if cfg.experiment == "approximation":
        _require(
            cfg,
            "approximation.deltas",
            all(d > 0 for d in cfg.deltas) and len(cfg.deltas) >= 2,
            "at least two positive deltas are required",
        )
    if cfg.experiment == "recession":
        _require(
            cfg,
            "recession.taus",
            all(t > 0 for t in cfg.taus) and len(cfg.taus) >= 2,
            "at least two positive taus are required",
        )


def parse_config(text: str) -> ExperimentConfig:
    """
    Parse and validate an experiment configuration.

    Args:
        text (str): The configuration in `key = value` format.

    Returns:
        ExperimentConfig: The populated configuration with defaults filled in.

    Raises:
        ConfigError: On unknown or duplicate keys, type mismatches, missing
        required keys, or values that violate a precondition.
    """
    values, lines = _read_pairs(text)
    cfg = _assemble(values, lines)
    validate_config(cfg)
    logging.debug("Parsed configuration: %s", cfg)
    return cfg


def load_config(path: str) -> ExperimentConfig:
    """Read and parse a configuration file"""
    try:
        text = "\n".join(read_text_lines(path))
    except OSError as exc:
        raise ConfigError(f"cannot read configuration {path}: {exc}") from exc
    return parse_config(text)
