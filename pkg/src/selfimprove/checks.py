"""Named property checks backing the ``verify`` command.

Each check re-validates one family of invariants, most against an
independent oracle (bisection for the cubic roots, finite differences for
monotonicities, exhaustive summation for the discrete inequalities).
``fast`` shrinks sample counts so the whole table stays under a minute.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import cubic, dynamics, montecarlo, regions, simulate
from .errors import DomainError
from .params import SIGMA_MAX, TheoryParams, derive_constants, validate_domain

_SEED = 20240613


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def bisect_root(f, lo: float, hi: float, tol: float = 1e-14, iters: int = 120) -> float:
    """Plain bisection oracle; ``f`` must change sign on [lo, hi]."""
    flo = f(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol or mid <= lo or mid >= hi:
            break
        if (f(mid) > 0.0) == (flo > 0.0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def oracle_cubic_roots(sigma: float) -> tuple[float, float]:
    """Bisection on y*(1-y)^2 - sigma^2 over (0, 1/3) and (1/3, 1)."""
    def f(y: float) -> float:
        return y * (1.0 - y) ** 2 - sigma * sigma
    return bisect_root(f, 1e-300, 1.0 / 3.0), bisect_root(f, 1.0 / 3.0, 1.0 - 1e-16)


def _rng() -> np.random.Generator:
    return np.random.default_rng(_SEED)


def _admissible_sigma(rng, count: int) -> np.ndarray:
    return rng.uniform(1e-4, SIGMA_MAX - 1e-4, size=count)


def _random_map_setting(rng, p: TheoryParams):
    """Random (a, nu) with a healthy margin from the fold."""
    a = rng.uniform(0.3, 3.0)
    sig_per_nu = cubic.effective_sigma(a, p, derive_constants(p, nu=1e-9)) / 1e-9
    nu_fold = SIGMA_MAX / sig_per_nu  # first-order fold estimate
    nu = rng.uniform(0.05, 0.8) * nu_fold
    if not cubic.invariant_interval(a, p, derive_constants(p, nu=nu)).valid:
        nu *= 0.5
    return a, nu


# ---------------------------------------------------------------------------
# params
# ---------------------------------------------------------------------------

def check_derived_constants_monotone(fast: bool) -> CheckResult:
    base = TheoryParams()
    d = derive_constants(base)
    bigger_class = derive_constants(TheoryParams(pi_size=10_000))
    tighter = derive_constants(TheoryParams(delta=0.01))
    more_questions = derive_constants(TheoryParams(n=8000))
    ok = (bigger_class.c_delta > d.c_delta and tighter.c_delta > d.c_delta
          and more_questions.nu < d.nu
          and abs(d.nu * d.nu * base.n - 1.0) < 1e-12)
    return CheckResult("derived-constants-monotone", ok,
                       f"c_delta={d.c_delta:.6f} nu={d.nu:.6f}")


def check_validate_domain_noiseless(fast: bool) -> CheckResult:
    rng = _rng()
    trials = 20 if fast else 200
    for _ in range(trials):
        p = TheoryParams(c=rng.uniform(0.05, 0.95), gamma=rng.uniform(0.0, 0.5),
                         beta_lo=rng.uniform(0.01, 2.0),
                         beta_hi=rng.uniform(2.01, 4.0))
        report = validate_domain(p, derive_constants(p, nu=0.0))
        if not (report.all_valid and report.sigma_degenerate):
            return CheckResult("validate-domain-noiseless", False, f"failed for {p}")
    return CheckResult("validate-domain-noiseless", True, f"{trials} random params")


# ---------------------------------------------------------------------------
# cubic
# ---------------------------------------------------------------------------

def check_cubic_oracle(fast: bool, count: int | None = None) -> CheckResult:
    rng = _rng()
    count = count or (200 if fast else 1000)
    worst = 0.0
    for sigma in _admissible_sigma(rng, count):
        ym, yp = cubic.cubic_roots(float(sigma))
        om, op = oracle_cubic_roots(float(sigma))
        worst = max(worst, abs(ym - om), abs(yp - op))
    return CheckResult("cubic-trig-vs-bisection", worst < 1e-10,
                       f"max deviation {worst:.3e} over {count} sigma")


def check_fixed_point_residuals(fast: bool) -> CheckResult:
    p = TheoryParams()
    worst = 0.0
    a_grid = np.linspace(0.4, 2.5, 10)
    for a in a_grid:
        sig_per_nu = cubic.effective_sigma(a, p, derive_constants(p, nu=1e-9)) / 1e-9
        for frac in np.linspace(0.08, 0.9, 10):
            d = derive_constants(p, nu=float(frac * SIGMA_MAX / sig_per_nu))
            interval = cubic.invariant_interval(a, p, d)
            if not interval.valid:
                continue
            spec = dynamics.map_spec(a, p, d)
            for endpoint in (interval.lo, interval.hi):
                worst = max(worst, abs(dynamics.eval_map(spec, endpoint) - endpoint))
    return CheckResult("fixed-point-residuals", worst < 1e-10,
                       f"max residual {worst:.3e} on 10x10 grid")


def check_gap_identities(fast: bool, count: int | None = None) -> CheckResult:
    rng = _rng()
    count = count or (200 if fast else 1000)
    p = TheoryParams()
    for sigma in _admissible_sigma(rng, count):
        exact = cubic.exact_root_gap(float(sigma))
        if exact < cubic.gap_lower_bound(float(sigma)) - 1e-12:
            return CheckResult("gap-bound-and-identity", False, f"bound fails at sigma={sigma}")
    special = cubic.exact_root_gap(math.sqrt(2.0 / 27.0))
    if abs(special - 1.0 / math.sqrt(3.0)) > 1e-12:
        return CheckResult("gap-bound-and-identity", False, "special value mismatch")
    # length identity |I| = scale * exact gap
    for _ in range(10 if fast else 50):
        a, nu = _random_map_setting(rng, p)
        d = derive_constants(p, nu=nu)
        interval = cubic.invariant_interval(a, p, d)
        if not interval.valid:
            continue
        sigma = cubic.effective_sigma(a, p, d)
        scale = 1.0 - p.gamma - d.c_delta_prime * d.nu / a
        ident = scale * cubic.exact_root_gap(sigma)
        if abs(ident - interval.length) > 1e-12 * max(1.0, interval.length):
            return CheckResult("gap-bound-and-identity", False,
                               f"length identity off at a={a}, nu={nu}")
    return CheckResult("gap-bound-and-identity", True, f"{count} sigma samples")


def check_interval_inclusion(fast: bool, count: int | None = None) -> CheckResult:
    rng = _rng()
    count = count or (100 if fast else 500)
    p = TheoryParams()
    done_a = done_nu = 0
    while done_a < count or done_nu < count:
        a1, nu = _random_map_setting(rng, p)
        a2 = a1 * rng.uniform(1.01, 2.0)
        d = derive_constants(p, nu=nu)
        i1, i2 = cubic.invariant_interval(a1, p, d), cubic.invariant_interval(a2, p, d)
        if done_a < count and i1.valid and i2.valid:
            if not (i2.lo < i1.lo and i1.hi < i2.hi):
                return CheckResult("interval-inclusion", False,
                                   f"scale inclusion fails at a1={a1}, a2={a2}, nu={nu}")
            done_a += 1
        nu2 = nu * rng.uniform(1.01, 1.5)
        j1 = cubic.invariant_interval(a1, p, derive_constants(p, nu=nu))
        j2 = cubic.invariant_interval(a1, p, derive_constants(p, nu=nu2))
        if done_nu < count and j1.valid and j2.valid:
            if not (j1.lo < j2.lo and j2.hi < j1.hi):
                return CheckResult("interval-inclusion", False,
                                   f"budget inclusion fails at a={a1}, nu={nu}->{nu2}")
            done_nu += 1
    return CheckResult("interval-inclusion", True, f"{count} pairs per direction")


def check_conjugate_derivatives(fast: bool) -> CheckResult:
    rng = _rng()
    for _ in range(20 if fast else 100):
        sigma = float(_admissible_sigma(rng, 1)[0])
        ym, yp = cubic.cubic_roots(sigma)
        g_lo = (1.0 - ym) / (2.0 * ym)   # conjugate map derivative at a fixed point
        g_hi = (1.0 - yp) / (2.0 * yp)
        if not (g_lo > 1.0 > g_hi >= 0.0):
            return CheckResult("conjugate-derivative-classification", False,
                               f"sigma={sigma}: {g_lo}, {g_hi}")
    return CheckResult("conjugate-derivative-classification", True,
                       "repelling below, attracting above")


# ---------------------------------------------------------------------------
# dynamics
# ---------------------------------------------------------------------------

def check_map_monotonicities(fast: bool) -> CheckResult:
    rng = _rng()
    p = TheoryParams()
    h = 1e-7
    for _ in range(100 if fast else 1000):
        a, nu = _random_map_setting(rng, p)
        d = derive_constants(p, nu=nu)
        spec = dynamics.map_spec(a, p, d)
        x = rng.uniform(spec.domain_lo + 0.05, 1.0)
        up_x = dynamics.eval_map(spec, x + h) - dynamics.eval_map(spec, x - h)
        spec_hi = dynamics.map_spec(a, p, derive_constants(p, nu=nu + h))
        spec_lo = dynamics.map_spec(a, p, derive_constants(p, nu=nu - h))
        down_nu = dynamics.eval_map(spec_hi, x) - dynamics.eval_map(spec_lo, x)
        up_a = (dynamics.eval_map(dynamics.map_spec(a + h, p, d), x)
                - dynamics.eval_map(dynamics.map_spec(a - h, p, d), x))
        if not (up_x > 0.0 and down_nu < 0.0 and up_a > 0.0):
            return CheckResult("map-monotonicities", False, f"a={a}, nu={nu}, x={x}")
    return CheckResult("map-monotonicities", True, "increasing in x and a, decreasing in nu")


def check_coefficient_telescoping(fast: bool) -> CheckResult:
    rng = _rng()
    for _ in range(20 if fast else 100):
        p = TheoryParams(L=int(rng.integers(2, 12)),
                         beta_lo=rng.uniform(0.01, 1.0),
                         beta_hi=rng.uniform(1.01, 3.0))
        co = dynamics.curriculum_coefficients(p)
        product = math.prod(co.mid)
        target = p.L ** (-p.beta_hi)
        if abs(product - target) > 1e-12 * target:
            return CheckResult("coefficient-telescoping", False, f"L={p.L}")
        if not (co.first >= 1.0 and co.final >= 1.0):
            return CheckResult("coefficient-telescoping", False, "coefficient below 1")
    return CheckResult("coefficient-telescoping", True, "mid product equals L^(-beta_hi)")


def classify_trajectory_inside(traj: dynamics.Trajectory, interval: cubic.Interval,
                               plateau_tol: float = dynamics.PLATEAU_TOL) -> bool:
    """Inside-behavior: never a genuine decrease, never leaves the closed
    interval (1e-12 slack for rounding at the attracting endpoint)."""
    if not traj.stayed_in_domain:
        return False
    if not traj.strictly_increasing(plateau_tol):
        return False
    return all(interval.lo - 1e-12 <= v <= interval.hi + 1e-12 for v in traj.values)


def check_trajectory_classification(fast: bool, count: int | None = None,
                                    steps: int = 100) -> CheckResult:
    rng = _rng()
    count = count or (50 if fast else 200)
    p = TheoryParams()
    d = derive_constants(p, nu=0.05)
    interval = cubic.invariant_interval(1.0, p, d)
    spec = dynamics.map_spec(1.0, p, d)
    margin = 1e-6
    for _ in range(count):
        inside = rng.uniform(interval.lo + margin, interval.hi - margin)
        traj = dynamics.iterate_baseline(p, d, inside, steps)
        if not classify_trajectory_inside(traj, interval):
            return CheckResult("trajectory-classification", False,
                               f"inside x0={inside} misclassified")
        if rng.random() < 0.5:
            outside = rng.uniform(spec.domain_lo + margin, interval.lo - margin)
        else:
            outside = rng.uniform(interval.hi + margin, 1.0 - p.gamma)
        traj = dynamics.iterate_baseline(p, d, outside, steps)
        first_step_down = len(traj.values) > 1 and traj.values[1] < traj.values[0] - dynamics.PLATEAU_TOL
        if not (first_step_down or not traj.stayed_in_domain):
            return CheckResult("trajectory-classification", False,
                               f"outside x0={outside} misclassified")
    return CheckResult("trajectory-classification", True,
                       f"{count} starts per side, {steps} steps")


def check_trajectory_reproducibility(fast: bool) -> CheckResult:
    p = TheoryParams()
    d = derive_constants(p, nu=0.03)
    a = dynamics.iterate_baseline(p, d, 0.4, 50)
    b = dynamics.iterate_baseline(p, d, 0.4, 50)
    c1 = dynamics.iterate_curriculum(p, d, 0.4)
    c2 = dynamics.iterate_curriculum(p, d, 0.4)
    ok = a.values == b.values and c1.values == c2.values
    return CheckResult("trajectory-reproducibility", ok, "bit-identical reruns")


# ---------------------------------------------------------------------------
# regions
# ---------------------------------------------------------------------------

def _sample_error_tuple(rng, p: TheoryParams):
    beta_lo = rng.uniform(0.02, 1.0)
    beta_hi = beta_lo + rng.uniform(0.02, 1.0)
    x0 = rng.uniform(0.05, 0.95) * (1.0 - p.gamma)
    nu = rng.uniform(1e-4, 0.04)
    return beta_lo, beta_hi, nu, x0


def check_error_functional_monotone(fast: bool, count: int | None = None,
                                    step: float = 1e-6, guard: float = 1e-9) -> CheckResult:
    rng = _rng()
    count = count or (200 if fast else 2000)
    p = TheoryParams()
    d = derive_constants(p)
    done = 0
    while done < count:
        beta_lo, beta_hi, nu, x0 = _sample_error_tuple(rng, p)
        try:
            d_nu = (regions.error_functional(beta_lo, beta_hi, nu + step, x0, p, d)
                    - regions.error_functional(beta_lo, beta_hi, nu - step, x0, p, d))
            d_x0 = (regions.error_functional(beta_lo, beta_hi, nu, x0 + step, p, d)
                    - regions.error_functional(beta_lo, beta_hi, nu, x0 - step, p, d))
            d_beta = (regions.error_functional(beta_lo, beta_hi + step, nu, x0, p, d)
                      - regions.error_functional(beta_lo, beta_hi - step, nu, x0, p, d))
        except DomainError:
            continue
        if not (d_nu < guard and d_x0 > -guard and d_beta < guard):
            return CheckResult("error-functional-monotone", False,
                               f"sign violation at ({beta_lo}, {beta_hi}, {nu}, {x0})")
        done += 1
    return CheckResult("error-functional-monotone", True,
                       f"{count} admissible tuples, step {step}")


def check_improvement_equivalence(fast: bool) -> CheckResult:
    rng = _rng()
    p = TheoryParams()
    d = derive_constants(p)
    trials = 20 if fast else 100
    done = 0
    while done < trials:
        beta_lo, beta_hi, nu, _ = _sample_error_tuple(rng, p)
        nu = min(nu, 0.02)
        try:
            threshold = regions.improvement_threshold(beta_lo, beta_hi, nu, p, d)
        except (regions.BracketError, DomainError):
            continue
        if threshold >= 1.0 - p.gamma:
            continue
        for x0 in (threshold * 0.9 + 1e-9, threshold * 1.1,
                   rng.uniform(threshold, 1.0 - p.gamma)):
            try:
                margin = regions.improvement_margin(beta_lo, beta_hi, nu, x0, p, d)
            except DomainError:
                if x0 > threshold:
                    return CheckResult("improvement-equivalence", False,
                                       f"domain error above threshold at {x0}")
                continue
            if (margin < 0.0) != (x0 > threshold):
                if abs(x0 - threshold) < 1e-9:
                    continue
                return CheckResult("improvement-equivalence", False,
                                   f"margin sign mismatch at x0={x0}, threshold={threshold}")
        done += 1
    return CheckResult("improvement-equivalence", True,
                       "margin < 0 exactly above the threshold")


def check_threshold_curve(fast: bool) -> CheckResult:
    p = TheoryParams()
    d = derive_constants(p)
    nu_c = regions.collapse_budget(p.beta_lo, p.beta_hi, p, d)
    grid = np.linspace(0.05, 0.95, 10 if fast else 25) * nu_c
    curve = regions.threshold_curve(p.beta_lo, p.beta_hi, grid, p, d)
    xs = [x for _, x, ok in curve.samples if ok]
    if len(xs) != len(grid):
        return CheckResult("threshold-curve", False, "threshold undefined below nu_c")
    if any(b <= a for a, b in zip(xs, xs[1:])):
        return CheckResult("threshold-curve", False, "not strictly increasing")
    slope = (regions.improvement_threshold(p.beta_lo, p.beta_hi, 1.5e-6, p, d)
             - regions.improvement_threshold(p.beta_lo, p.beta_hi, 0.5e-6, p, d)) / 1e-6
    first = dynamics.curriculum_coefficients(p).first
    expected = d.c_delta_prime / first
    ok = abs(slope - expected) <= 0.02 * expected
    return CheckResult("threshold-curve", ok,
                       f"increasing; slope at 0 = {slope:.6f} vs {expected:.6f}")


def check_critical_budgets(fast: bool) -> CheckResult:
    p = TheoryParams()
    d = derive_constants(p)
    nu_t = regions.baseline_half_error_budget(p, d)
    betas = np.linspace(0.3, 0.9, 4 if fast else 8)
    prev = None
    for beta in betas:
        nu_c = regions.collapse_budget(0.1, float(beta), p, d)
        if prev is not None and nu_c >= prev:
            return CheckResult("critical-budgets", False, "nu_c not decreasing in beta_hi")
        prev = nu_c
        star = regions.max_improving_nu(0.1, float(beta), 0.5 * (1 - p.gamma), p, d)
        if not star < nu_t:
            return CheckResult("critical-budgets", False, "max improving nu above nu_T")
    return CheckResult("critical-budgets", True, f"nu_T={nu_t:.5f}")


def check_growth_ratio(fast: bool) -> CheckResult:
    grid = np.linspace(0.01, 20.0, 50 if fast else 200)
    for levels in (2, 3, 5, 10):
        values = [regions.coefficient_growth_ratio(float(b), levels) for b in grid]
        if any(b <= a for a, b in zip(values, values[1:])):
            return CheckResult("growth-ratio-increasing", False, f"L={levels}")
        if not (values[0] < 0.05 and values[-1] > 1e3):
            return CheckResult("growth-ratio-increasing", False,
                               f"endpoint magnitudes off for L={levels}")
    return CheckResult("growth-ratio-increasing", True, "L in {2,3,5,10}")


def check_conditional_mean(fast: bool) -> CheckResult:
    levels_max = 8 if fast else 12
    betas = np.linspace(0.05, 5.0, 10 if fast else 20)
    violations = 0
    for levels in range(2, levels_max + 1):
        for beta in betas:
            for t in np.linspace(0.0, math.log(levels) * 0.999, 20 if fast else 50):
                lhs, rhs = regions.conditional_mean_check(levels, float(beta), float(t))
                if lhs > rhs + 1e-12:
                    violations += 1
    return CheckResult("conditional-mean-inequality", violations == 0,
                       f"violations={violations}")


def check_geometric_identity(fast: bool) -> CheckResult:
    rng = _rng()
    for _ in range(50 if fast else 500):
        q = rng.uniform(0.0, 0.99)
        length = int(rng.integers(2, 12))
        ratio_form = (1.0 - q ** (length - 1)) / (1.0 - q)
        sum_form = sum(q ** j for j in range(length - 1))
        if abs(ratio_form - sum_form) > 1e-12 * max(1.0, abs(sum_form)):
            return CheckResult("geometric-forms-identity", False, f"q={q}, L={length}")
    return CheckResult("geometric-forms-identity", True, "ratio equals explicit sum")


def check_feasibility_length_bounds(fast: bool) -> CheckResult:
    p = TheoryParams()
    for nu in np.linspace(0.002, 0.03, 5 if fast else 15):
        d = derive_constants(p, nu=float(nu))
        d0 = derive_constants(p, nu=0.0)
        now = regions.feasibility_interval(p, d)
        base = regions.feasibility_interval(p, d0)
        if not (now.valid and base.valid):
            continue
        shrink = base.length - now.length
        lo_bound = 2.0 ** p.beta_hi * d.c_delta_prime * nu
        inner = 2.0 ** (-p.beta_hi) * (1.0 - p.gamma) - d.c_delta_prime * nu
        hi_bound = lo_bound + 1.5 * math.sqrt(3.0) * d.c_delta * nu / (p.c * math.sqrt(inner))
        if not lo_bound - 1e-12 <= shrink <= hi_bound + 1e-12:
            return CheckResult("feasibility-length-bounds", False,
                               f"nu={nu}: shrink={shrink} outside [{lo_bound}, {hi_bound}]")
    return CheckResult("feasibility-length-bounds", True, "two-sided shrinkage bound holds")


def check_tail_exceeds_baseline(fast: bool) -> CheckResult:
    rng = _rng()
    p = TheoryParams()
    d = derive_constants(p)
    done = 0
    while done < (50 if fast else 300):
        beta_lo, beta_hi, nu, x0 = _sample_error_tuple(rng, p)
        try:
            t1, _, t3 = regions._error_terms(beta_lo, beta_hi, nu, x0, p, d)
        except DomainError:
            continue
        if not t3 > t1:
            return CheckResult("tail-exceeds-baseline-term", False,
                               f"t3 <= t1 at ({beta_lo}, {beta_hi}, {nu}, {x0})")
        done += 1
    return CheckResult("tail-exceeds-baseline-term", True, "hard-level tail dominates")


def check_coefficients_increasing(fast: bool) -> CheckResult:
    grid = np.linspace(0.01, 5.0, 30 if fast else 100)
    p = TheoryParams()
    firsts, finals = [], []
    for beta_lo in grid:
        co = dynamics.curriculum_coefficients(p.with_betas(float(beta_lo), 6.0))
        firsts.append(co.first)
        finals.append(co.final)
    ok = (all(b > a for a, b in zip(firsts, firsts[1:]))
          and all(b > a for a, b in zip(finals, finals[1:])))
    return CheckResult("coefficients-increasing", ok,
                       "first and final coefficients increase in beta_lo")


# ---------------------------------------------------------------------------
# montecarlo
# ---------------------------------------------------------------------------

def _small_panel(kind: str) -> montecarlo.ScanConfig:
    return montecarlo.ScanConfig(kind=kind, vary="beta_hi",
                                 vary_values=(0.3, 0.4), fixed_value=0.1,
                                 nu_values=(0.005, 0.012), x0_points=400)


def check_scan_determinism(fast: bool) -> CheckResult:
    p = TheoryParams()
    cfg = _small_panel("feasible")
    first = montecarlo.run_scan(cfg, p)
    again = montecarlo.run_scan(cfg, p, threads=2)
    ok = first.cells == again.cells
    return CheckResult("scan-determinism", ok, "single- vs multi-thread identical")


def check_scan_contains_analytic(fast: bool) -> CheckResult:
    p = TheoryParams()
    points = 500 if fast else 2000
    grid = montecarlo.x0_grid(p, points)
    cell = (1.0 - p.gamma) / points
    for nu in (0.005, 0.012, 0.02):
        d = derive_constants(p, nu=nu)
        feas = montecarlo.classify_feasible(grid, p, d)
        analytic = regions.feasibility_interval(p, d)
        if analytic.valid:
            inside = (grid > analytic.lo + cell) & (grid < analytic.hi - cell)
            if not feas[inside].all():
                return CheckResult("scan-contains-analytic", False,
                                   f"feasible point misclassified at nu={nu}")
        impr = montecarlo.classify_improvement(grid, p, d)
        try:
            threshold = regions.improvement_threshold(p.beta_lo, p.beta_hi, nu, p, d)
        except regions.BracketError:
            continue
        if analytic.valid and threshold < 1.0 - p.gamma:
            lo = max(threshold, analytic.lo)
            hi = min(1.0 - p.gamma, analytic.hi)
            inside = (grid > lo + cell) & (grid < hi - cell)
            if not impr[inside].all():
                return CheckResult("scan-contains-analytic", False,
                                   f"improving point misclassified at nu={nu}")
    return CheckResult("scan-contains-analytic", True,
                       "analytic regions contained in measured regions")


def check_grid_refinement(fast: bool) -> CheckResult:
    p = TheoryParams()
    d = derive_constants(p, nu=0.012)

    def lower_endpoint(points: int) -> float:
        grid = montecarlo.x0_grid(p, points)
        flags = montecarlo.classify_feasible(grid, p, d)
        lo, _, _ = montecarlo.measured_interval(grid, flags, None)
        return lo

    reference = lower_endpoint(16000)
    err_coarse = abs(lower_endpoint(1000) - reference)
    err_fine = abs(lower_endpoint(2000) - reference)
    ok = err_fine <= 0.75 * err_coarse + 1e-9
    return CheckResult("grid-refinement-convergence", ok,
                       f"halving the step: {err_coarse:.2e} -> {err_fine:.2e}")


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def check_acceptance_ratio_laws(fast: bool, worlds: int | None = None) -> CheckResult:
    rng = _rng()
    p = TheoryParams()
    worlds = worlds or (50 if fast else 200)
    for _ in range(worlds):
        count = int(rng.integers(5, 400))
        alpha = rng.uniform(0.05, 1.0, size=count)
        weights = rng.dirichlet(np.ones(count))
        world = simulate.SimWorld(weights=weights, alpha=alpha, c=p.c, gamma=p.gamma)
        ratios = [simulate.mean_to_min_acceptance_ratio(world, m) for m in range(1, 65)]
        if any(r < 1.0 - 1e-12 for r in ratios):
            return CheckResult("acceptance-ratio-laws", False, "ratio below 1")
        if any(b > a + 1e-12 for a, b in zip(ratios, ratios[1:])):
            return CheckResult("acceptance-ratio-laws", False, "ratio increased in m")
        if abs(simulate.mean_to_min_acceptance_ratio(world, 1024) - 1.0) > 1e-6:
            return CheckResult("acceptance-ratio-laws", False, "no convergence to 1")
    for m in range(1, 51):
        values = [simulate.acceptance_gain_ratio(y, m) for y in np.linspace(0.0, 0.999, 60)]
        if any(b < a - 1e-12 for a, b in zip(values, values[1:])):
            return CheckResult("acceptance-ratio-laws", False, f"gain ratio not increasing, m={m}")
    return CheckResult("acceptance-ratio-laws", True, f"{worlds} random worlds, m up to 1024")


def check_world_invariants(fast: bool) -> CheckResult:
    p = TheoryParams()
    world = simulate.build_world(2000 if fast else 10_000, 0.5, p, seed=7)
    ok = (abs(world.expected_reward - 0.5) < 1e-3
          and simulate.satisfies_coupling(world.alpha, world.weights, p.c, p.gamma)
          and world.alpha.min() > 0.0 and world.alpha.max() <= 1.0)
    return CheckResult("world-invariants", ok,
                       f"V={world.expected_reward:.6f}, min alpha={world.alpha.min():.4f}")


def check_sim_reproducibility(fast: bool) -> CheckResult:
    p = TheoryParams(n=500)
    d = derive_constants(p)
    world = simulate.build_world(1000, 0.5, p, seed=3)
    a = simulate.run_replications(world, p, d, rounds=3, replications=3, seed=11)
    b = simulate.run_replications(world, p, d, rounds=3, replications=3, seed=11)
    return CheckResult("sim-reproducibility", a == b, "identical seeds, identical records")


def check_sim_bound_coverage(fast: bool, replications: int | None = None,
                             rounds: int = 5) -> CheckResult:
    p = TheoryParams()
    d = derive_constants(p)
    replications = replications or (50 if fast else 500)
    world = simulate.build_world(10_000, 0.5, p, seed=_SEED)
    records = simulate.run_replications(world, p, d, rounds, replications, seed=_SEED)
    live = [r for r in records if not r.collapsed]
    covered = sum(r.bound_satisfied for r in live)
    rate = covered / len(live)
    return CheckResult("sim-bound-coverage", rate >= 0.95,
                       f"coverage {rate:.4f} over {len(live)} rounds")


def check_acceptance_count_mean(fast: bool) -> CheckResult:
    p = TheoryParams(n=400)
    d = derive_constants(p)
    world = simulate.build_world(800, 0.5, p, seed=5)
    replications = 200 if fast else 1000
    records = simulate.run_replications(world, p, d, 1, replications, seed=17)
    counts = np.array([r.n_accept for r in records], dtype=float)
    accept = simulate.multi_try_acceptance(world.alpha, p.m)
    z = float(world.weights @ accept)
    expected = p.n * z
    # Each draw's acceptance indicator is marginally Bernoulli(z) and draws
    # are independent, so the count is Binomial(n, z).
    se = math.sqrt(p.n * z * (1.0 - z) / replications)
    dev = abs(counts.mean() - expected)
    return CheckResult("acceptance-count-mean", dev <= 3.0 * se,
                       f"|mean - nZ| = {dev:.3f} vs 3 SE = {3*se:.3f}")


def check_update_range(fast: bool) -> CheckResult:
    p = TheoryParams(n=500)
    d = derive_constants(p)
    world = simulate.build_world(1000, 0.5, p, seed=9)
    current = world
    ss = np.random.SeedSequence(23)
    for t, child in enumerate(ss.spawn(5)):
        rng = np.random.Generator(np.random.Philox(child))
        current, record = simulate._one_round(current, p, rng, 0, t)
        if not ((current.alpha > 0.0).all() and (current.alpha <= 1.0).all()):
            return CheckResult("update-range", False, "alpha escaped (0, 1]")
        if not record.collapsed and record.v_realized != current.expected_reward:
            return CheckResult("update-range", False, "recorded V mismatch")
    return CheckResult("update-range", True, "alpha in (0,1], V consistent")


CHECKS = [
    check_derived_constants_monotone,
    check_validate_domain_noiseless,
    check_cubic_oracle,
    check_fixed_point_residuals,
    check_gap_identities,
    check_interval_inclusion,
    check_conjugate_derivatives,
    check_map_monotonicities,
    check_coefficient_telescoping,
    check_trajectory_classification,
    check_trajectory_reproducibility,
    check_error_functional_monotone,
    check_improvement_equivalence,
    check_threshold_curve,
    check_critical_budgets,
    check_growth_ratio,
    check_conditional_mean,
    check_geometric_identity,
    check_feasibility_length_bounds,
    check_tail_exceeds_baseline,
    check_coefficients_increasing,
    check_scan_determinism,
    check_scan_contains_analytic,
    check_grid_refinement,
    check_acceptance_ratio_laws,
    check_world_invariants,
    check_sim_reproducibility,
    check_sim_bound_coverage,
    check_acceptance_count_mean,
    check_update_range,
]


def run_checks(fast: bool = False) -> list[CheckResult]:
    return [fn(fast) for fn in CHECKS]
