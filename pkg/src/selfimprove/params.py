"""Theory constants shared by every module.

``TheoryParams`` holds the primitive scalars; ``DerivedConstants`` the three
quantities derived from them (confidence radii and the inverse-root question
budget).  Both are frozen value objects and safe to share across workers.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, fields, replace

from .errors import ParameterError

# Absolute tolerance for comparisons against domain boundaries.
BOUNDARY_TOL = 1e-12

_CONFIG_EXTRA_KEYS = frozenset({"nu"})


@dataclass(frozen=True)
class TheoryParams:
    """Primitive model/task constants.

    ``c`` and ``gamma`` couple per-question acceptance to expected reward;
    ``beta_lo < beta_hi`` bound the power-law difficulty ratio of adjacent
    levels; ``n``/``m`` are the per-iteration question and answer budgets;
    ``L`` is the number of difficulty levels.
    """

    c: float = 0.9
    gamma: float = 0.02
    delta: float = 0.05
    delta_prime: float = 0.05
    pi_size: int = 1000
    tau: float = 1.0
    n: int = 2000
    m: int = 4
    L: int = 5
    beta_lo: float = 0.1
    beta_hi: float = 0.4

    def __post_init__(self) -> None:
        checks = [
            (0.0 < self.c < 1.0, "c must lie in (0, 1)"),
            (0.0 <= self.gamma < 1.0, "gamma must lie in [0, 1)"),
            (0.0 < self.delta < 1.0, "delta must lie in (0, 1)"),
            (0.0 < self.delta_prime <= 1.0, "delta_prime must lie in (0, 1]"),
            (isinstance(self.pi_size, int) and self.pi_size >= 2,
             "pi_size must be an integer >= 2"),
            (0.0 < self.tau <= 1.0, "tau must lie in (0, 1]"),
            (isinstance(self.n, int) and self.n >= 1, "n must be an integer >= 1"),
            (isinstance(self.m, int) and self.m >= 1, "m must be an integer >= 1"),
            (isinstance(self.L, int) and self.L >= 2, "L must be an integer >= 2"),
            (self.beta_lo > 0.0, "beta_lo must be positive"),
            (self.beta_hi > self.beta_lo,
             "beta_hi must exceed beta_lo (0 < beta_lo < beta_hi)"),
        ]
        for ok, message in checks:
            if not ok:
                raise ParameterError(message)

    def with_betas(self, beta_lo: float, beta_hi: float) -> "TheoryParams":
        return replace(self, beta_lo=beta_lo, beta_hi=beta_hi)


@dataclass(frozen=True)
class DerivedConstants:
    """Confidence radii and budget parameter derived from ``TheoryParams``."""

    c_delta: float
    c_delta_prime: float
    nu: float


def derive_constants(p: TheoryParams, nu: float | None = None) -> DerivedConstants:
    """Compute the derived constants; ``nu`` overrides sqrt(1/n) when given.

    The override exists because parameter scans sweep the budget parameter as
    a continuous axis instead of re-deriving it from an integer ``n``.
    """
    if nu is None:
        nu = math.sqrt(1.0 / p.n)
    elif nu < 0.0:
        raise ParameterError("nu must be non-negative")
    return DerivedConstants(
        c_delta=math.sqrt(2.0 * math.log(p.pi_size / p.delta)),
        c_delta_prime=math.sqrt(math.log(1.0 / p.delta_prime) / 2.0),
        nu=float(nu),
    )


@dataclass(frozen=True)
class ValidityCheck:
    name: str
    valid: bool
    first_violation: str | None = None


@dataclass(frozen=True)
class ValidityReport:
    """Well-definedness report for the downstream computations.

    Never raised; callers inspect ``all_valid`` or individual entries.  The
    ``sigma_degenerate`` flag marks the noiseless limit in which every map
    collapses to the constant 1 - gamma.
    """

    checks: tuple[ValidityCheck, ...]
    sigma_degenerate: bool

    @property
    def all_valid(self) -> bool:
        return all(c.valid for c in self.checks)

    def entry(self, name: str) -> ValidityCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


SIGMA_MAX = math.sqrt(4.0 / 27.0)


def _interval_check(name: str, a: float, p: TheoryParams, d: DerivedConstants) -> ValidityCheck:
    inner = a * (1.0 - p.gamma) - d.c_delta_prime * d.nu
    if inner <= BOUNDARY_TOL:
        return ValidityCheck(name, False, "radicand a*(1-gamma) - c_delta_prime*nu must be positive")
    sigma = a * d.c_delta * d.nu / (p.c * inner ** 1.5)
    if sigma >= SIGMA_MAX - BOUNDARY_TOL and d.nu > 0.0:
        return ValidityCheck(name, False, "sigma must stay below sqrt(4/27)")
    return ValidityCheck(name, True)


def validate_domain(p: TheoryParams, d: DerivedConstants) -> ValidityReport:
    """Report, per downstream computation, whether its regime holds."""
    a_hard = 2.0 ** (-p.beta_hi)
    checks = [
        _interval_check("invariant_interval_baseline", 1.0, p, d),
        _interval_check("invariant_interval_hard", a_hard, p, d),
    ]

    # Error-functional regime in the large-initialization limit: the only
    # conditions free of the initialization are the two radicands and the
    # geometric-series denominator.
    violations = []
    t1_inner = 1.0 - p.gamma - d.c_delta_prime * d.nu
    if t1_inner <= BOUNDARY_TOL:
        violations.append("radicand 1 - gamma - c_delta_prime*nu must be positive")
    t3_inner = a_hard * (1.0 - p.gamma) - d.c_delta_prime * d.nu
    if t3_inner <= BOUNDARY_TOL:
        violations.append("radicand 2^(-beta_hi)*(1-gamma) - c_delta_prime*nu must be positive")
    elif not violations:
        ratio = d.c_delta * d.nu / (2.0 * p.c * t3_inner ** 1.5) * math.exp(-p.beta_hi / p.L)
        if ratio >= 1.0 - BOUNDARY_TOL and d.nu > 0.0:
            violations.append("geometric-series ratio must stay below 1")
    ef = ValidityCheck("error_functional", not violations,
                       violations[0] if violations else None)
    checks.append(ef)
    checks.append(ValidityCheck("improvement_margin", ef.valid, ef.first_violation))

    return ValidityReport(checks=tuple(checks), sigma_degenerate=(d.nu == 0.0))


def load_config(path: str) -> tuple[TheoryParams, float | None]:
    """Load a JSON config whose keys match ``TheoryParams`` field names.

    An optional ``nu`` key overrides the budget parameter; when both ``n``
    and ``nu`` appear, ``nu`` wins and a warning is emitted.  Unknown keys
    are rejected.
    """
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ParameterError("config must be a JSON object")

    known = {f.name for f in fields(TheoryParams)}
    unknown = set(raw) - known - _CONFIG_EXTRA_KEYS
    if unknown:
        raise ParameterError(f"unknown config keys: {sorted(unknown)}")

    nu_override = raw.pop("nu", None)
    if nu_override is not None and "n" in raw:
        warnings.warn("config sets both n and nu; nu wins", stacklevel=2)
    for key in ("pi_size", "n", "m", "L"):
        if key in raw:
            value = raw[key]
            if isinstance(value, float) and not value.is_integer():
                raise ParameterError(f"{key} must be an integer")
            raw[key] = int(value)
    params = TheoryParams(**raw)
    return params, (float(nu_override) if nu_override is not None else None)
