"""Numerical diagnostics: contraction rates, weight regularity, boundary tests.

Each estimator returns a small result dataclass and can be serialized into a
uniform JSON report ({name, params, estimate, stderr, budget, seed, flags})
via :func:`make_report`.  Monte Carlo pieces take explicit RngStream seeds so
every number in a report is reproducible bit-for-bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

from .dynamics import (
    AUTO,
    CoupledEnsembleResult,
    CoupledPair,
    IntegratorConfig,
    coupled_ensemble,
    simulate_ensemble,
)
from .errors import EstimatorError, FitError, ParameterError
from .model import ModelParams, TestVectorField, gap_vector, self_consistent_profile_values
from .sampler import RngStream, sample_invariant
from .symmetry import ExtensionParams, extended_weight, fold_T, scaling_exponent_h

# ---------------------------------------------------------------------------
# spectral constants


def k_constant(n: int) -> float:
    """Smallest eigenvalue of the n x n second-difference matrix.

    The matrix has 2 on the diagonal and -1 on the off-diagonals; the value
    equals 2 - 2 cos(pi/(n+1)) and lower-bounds the Hessian quadratic form of
    the log-gap potential on the unit box.
    """
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    if n == 1:
        return 2.0
    vals = eigvalsh_tridiagonal(np.full(n, 2.0), np.full(n - 1, -1.0))
    return float(vals[0])


def contraction_rate(params: ModelParams) -> float:
    """Exponential contraction rate (beta' - 1) * k_N; nonpositive iff beta < N+1."""
    return (params.beta_prime - 1.0) * k_constant(params.n_particles)


# ---------------------------------------------------------------------------
# decay-rate fitting


@dataclass(frozen=True)
class RateFit:
    """Least-squares decay rate of the mean coupled distance."""

    times: np.ndarray
    mean_distances: np.ndarray
    window: np.ndarray
    rate: float
    stderr: float
    n_pairs: int


def _stack_pairs(pairs) -> tuple[np.ndarray, np.ndarray, float]:
    if isinstance(pairs, CoupledEnsembleResult):
        return pairs.times, pairs.distances, pairs.merge_tol
    pairs = list(pairs)
    if not pairs:
        raise FitError("no coupled pairs supplied")
    times = pairs[0].a.times
    tol = pairs[0].merge_tol
    for p in pairs:
        if not np.array_equal(p.a.times, times):
            raise FitError("coupled pairs must share a common time grid")
    return times, np.vstack([p.distances for p in pairs]), tol


def fit_decay(
    pairs,
    merge_tol: float | None = None,
    *,
    n_bootstrap: int = 200,
    bootstrap_seed: int = 0,
    min_points: int = 5,
    min_pairs: int = 100,
) -> RateFit:
    """Fit exp(-rate * t) to the mean coupled distance.

    Only times where the mean distance exceeds 10 * merge_tol enter the fit
    (below that the merge rule distorts the decay); fewer than ``min_points``
    usable grid points raises FitError.  The stderr comes from a pair-level
    bootstrap with ``n_bootstrap`` resamples.
    """
    times, dist, tol = _stack_pairs(pairs)
    if merge_tol is not None:
        tol = merge_tol
    n_pairs = dist.shape[0]
    if n_pairs < min_pairs:
        raise FitError(f"need at least {min_pairs} pairs, got {n_pairs}")
    mean = dist.mean(axis=0)
    window = mean > 10.0 * tol
    if window.sum() < min_points:
        raise FitError(
            f"only {int(window.sum())} grid points above 10*merge_tol={10 * tol!r}; "
            "decay window degenerate"
        )
    t = times[window]
    y = np.log(mean[window])
    slope = _ls_slope(t, y)

    gen = RngStream(bootstrap_seed, 0xB00).generator()
    counts = gen.multinomial(n_pairs, np.full(n_pairs, 1.0 / n_pairs), size=n_bootstrap)
    boot_means = (counts / n_pairs) @ dist[:, window]
    with np.errstate(divide="ignore"):
        boot_y = np.log(boot_means)
    boot_y[~np.isfinite(boot_y)] = y.min()
    tc = t - t.mean()
    boot_slopes = (boot_y @ tc) / (tc @ tc)
    return RateFit(
        times=times,
        mean_distances=mean,
        window=window,
        rate=float(-slope),
        stderr=float(boot_slopes.std(ddof=1)),
        n_pairs=n_pairs,
    )


def _ls_slope(t, y):
    tc = t - t.mean()
    return float((y @ tc) / (tc @ tc))


def lipschitz_smoothing_check(
    params: ModelParams,
    cfg: IntegratorConfig,
    t: float,
    *,
    trials: int = 2000,
    n_pairs: int = 10,
    n_directions: int = 10,
    seed: RngStream = RngStream(0, 0),
) -> tuple[float, float]:
    """Worst observed |E f(X_t) - E f(Y_t)| / |x - y| over linear unit f.

    Start pairs are independent stationary draws; each pair runs ``trials``
    synchronously coupled (common random numbers) copies.  The direction set
    is the pair's own difference direction plus ``n_directions - 1`` random
    unit vectors, so the t -> 0 limit of the statistic is 1 by construction.
    Returns (max ratio, standard error at the maximizing pair/direction).
    """
    n = params.n_particles
    starts = sample_invariant(params, seed.child(1), 4 * n_pairs).points
    gen = seed.child(2).generator()
    best = (-np.inf, 0.0)
    made = 0
    idx = 0
    while made < n_pairs and idx + 1 < len(starts):
        x0, y0 = starts[idx], starts[idx + 1]
        idx += 2
        sep = np.linalg.norm(x0 - y0)
        if sep < 0.05:
            continue
        made += 1
        pair_cfg = IntegratorConfig(
            dt=cfg.dt, seed=cfg.seed.child(1000 + made), scheme=cfg.scheme,
            min_gap=cfg.min_gap, drift_cap=cfg.drift_cap,
            max_subdivisions=cfg.max_subdivisions,
        )
        res = coupled_ensemble(
            params, pair_cfg, x0, y0, "synchronous", t, n_pairs=trials,
            record_stride=max(1, int(round(t / cfg.dt))),
            merge_tol=0.0,  # estimator of the semigroup: copies never merge
        )
        diff = res.final_a - res.final_b
        dirs = gen.standard_normal((n_directions - 1, n))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        dirs = np.vstack([(x0 - y0) / sep, dirs])
        proj = diff @ dirs.T
        ratios = np.abs(proj.mean(axis=0)) / sep
        errs = proj.std(axis=0, ddof=1) / math.sqrt(trials) / sep
        j = int(np.argmax(ratios))
        if ratios[j] > best[0]:
            best = (float(ratios[j]), float(errs[j]))
    if made < n_pairs:
        raise EstimatorError("could not build enough well-separated start pairs")
    return best


# ---------------------------------------------------------------------------
# Muckenhoupt product over balls


@dataclass(frozen=True)
class BallQuery:
    """A ball for weight averaging plus its Monte Carlo budget."""

    center: np.ndarray
    radius: float
    mc_budget: int = 1000
    seed: RngStream = RngStream(0, 0)

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.center, dtype=float))
        object.__setattr__(self, "center", c)
        if not np.all(np.isfinite(c)):
            raise ParameterError("ball center must be finite")
        if not (self.radius > 0):
            raise ParameterError(f"radius must be positive, got {self.radius!r}")
        if self.mc_budget < 1000:
            raise ParameterError(f"mc_budget must be >= 1000, got {self.mc_budget}")


@dataclass(frozen=True)
class A2Result:
    product: float
    stderr: float
    kurtosis: float
    heavy_tail: bool
    budget: int


def _uniform_ball(gen, center, radius, count):
    n = center.size
    z = gen.standard_normal((count, n))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    r = radius * gen.random(count) ** (1.0 / n)
    return center + z * r[:, None]


def _plain_kurtosis(v):
    m = v.mean()
    s2 = ((v - m) ** 2).mean()
    if s2 == 0.0:
        return 0.0
    return float(((v - m) ** 4).mean() / s2**2)


def a2_product_mc(ep: ExtensionParams, query: BallQuery) -> A2Result:
    """Monte Carlo (avg weight) * (avg 1/weight) over a ball.

    Uniform-in-ball sampling (gaussian direction, radius scaled by U^(1/N)).
    The stderr uses the delta method with the covariance of the two averages.
    The heavy-tail flag requires the plain kurtosis of either integrand to
    exceed 100 at both half and full budget (a doubling confirmation).
    """
    gen = query.seed.generator()
    pts = _uniform_ball(gen, query.center, query.radius, query.mc_budget)
    w = extended_weight(ep, pts)
    ok = np.isfinite(w) & (w > 0.0)
    flags_nonfinite = not bool(ok.all())
    w = np.where(ok, w, 1.0)
    inv = 1.0 / w
    n = query.mc_budget
    m1, m2 = w.mean(), inv.mean()
    v1 = w.var(ddof=1) / n
    v2 = inv.var(ddof=1) / n
    cov = np.cov(w, inv, ddof=1)[0, 1] / n
    var_prod = m2**2 * v1 + m1**2 * v2 + 2.0 * m1 * m2 * cov
    half = n // 2
    kurt_full = max(_plain_kurtosis(w), _plain_kurtosis(inv))
    kurt_half = max(_plain_kurtosis(w[:half]), _plain_kurtosis(inv[:half]))
    heavy = (kurt_full > 100.0 and kurt_half > 100.0) or flags_nonfinite
    return A2Result(
        product=float(m1 * m2),
        stderr=float(np.sqrt(max(var_prod, 0.0))),
        kurtosis=float(kurt_full),
        heavy_tail=bool(heavy),
        budget=n,
    )


def a2_interval_analytic(exponent: float, radius: float = 1.0) -> float:
    """Exact interval product for the 1-d weight y^e on [0, r].

    Equals 1/((1+e)(1-e)) independent of the radius for |e| < 1, and +inf
    otherwise (the weight or its inverse fails local integrability).
    """
    if not (radius > 0):
        raise ParameterError(f"radius must be positive, got {radius!r}")
    if abs(exponent) >= 1.0:
        return math.inf
    return 1.0 / ((1.0 + exponent) * (1.0 - exponent))


@dataclass(frozen=True)
class A2FamilyResult:
    """Ball-family scan of the weight: per-ball products plus summary fits.

    ``certified_*`` statistics are taken over the balls whose estimate carries
    no heavy-tail warning; on those the product estimator has a trustworthy
    mean at the given budget.  The raw statistics keep every finite estimate,
    flagged or not, and are dominated by balls touching the vanishing set of
    the weight, where the inverse integrand has infinite variance and the
    sample mean is far from converged at any feasible budget (so the raw max
    is a lottery over near-singular draws, not a property of the weight).
    """

    radii: np.ndarray
    centers: np.ndarray
    products: np.ndarray
    stderrs: np.ndarray
    kurtoses: np.ndarray
    heavy: np.ndarray
    raw_max: float
    raw_slope: float
    certified_max: float
    certified_slope: float
    n_heavy: int
    n_nonfinite: int
    n_certified: int


def _loglog_slope(radii, products, mask):
    if mask.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(radii[mask]), np.log(products[mask]), 1)[0])


def a2_ball_family(
    ep: ExtensionParams,
    *,
    n_balls: int = 1000,
    radius_range: tuple[float, float] = (1e-3, 1.0),
    box_half_width: float = 1.0,
    mc_budget: int = 4000,
    seed: RngStream = RngStream(0, 0),
) -> A2FamilyResult:
    """Scan the extended weight with random balls: radii log-uniform over
    ``radius_range``, centers uniform in the centered box.

    Ball i uses the child stream seed.child(1000 + i), so any ball can be
    recomputed in isolation and the scan order is irrelevant.
    """
    lo, hi = radius_range
    if not (0 < lo < hi):
        raise ParameterError(f"radius_range must be increasing positive, got {radius_range!r}")
    n = ep.model.n_particles
    gen = seed.child(3).generator()
    radii = np.exp(gen.uniform(math.log(lo), math.log(hi), size=n_balls))
    centers = gen.uniform(-box_half_width, box_half_width, size=(n_balls, n))
    products = np.empty(n_balls)
    stderrs = np.empty(n_balls)
    kurtoses = np.empty(n_balls)
    heavy = np.empty(n_balls, dtype=bool)
    for i in range(n_balls):
        res = a2_product_mc(ep, BallQuery(centers[i], float(radii[i]),
                                          mc_budget=mc_budget,
                                          seed=seed.child(1000 + i)))
        products[i], stderrs[i] = res.product, res.stderr
        kurtoses[i], heavy[i] = res.kurtosis, res.heavy_tail
    finite = np.isfinite(products) & (products > 0)
    certified = finite & ~heavy
    return A2FamilyResult(
        radii=radii,
        centers=centers,
        products=products,
        stderrs=stderrs,
        kurtoses=kurtoses,
        heavy=heavy,
        raw_max=float(products[finite].max()) if finite.any() else float("inf"),
        raw_slope=_loglog_slope(radii, products, finite),
        certified_max=float(products[certified].max()) if certified.any() else float("nan"),
        certified_slope=_loglog_slope(radii, products, certified),
        n_heavy=int(heavy.sum()),
        n_nonfinite=int((~np.isfinite(products)).sum()),
        n_certified=int(certified.sum()),
    )


# ---------------------------------------------------------------------------
# ball-mass scaling


@dataclass(frozen=True)
class MassScalingFit:
    radii: np.ndarray
    masses: np.ndarray
    slope: float
    stderr: float
    expected: float


def max_valid_radius(ep: ExtensionParams, y: np.ndarray) -> float:
    """Largest radius at which the local scaling regime is clean:
    a quarter of the smallest positive folded low gap, and delta/4."""
    t = fold_T(np.asarray(y, dtype=float))
    g = np.diff(t, prepend=0.0)
    pos = g[g > 0.0]
    bound = ep.delta / 4.0
    if pos.size:
        bound = min(bound, float(pos.min()) / 4.0)
    return bound


def ball_mass_exponent(
    ep: ExtensionParams,
    y: np.ndarray,
    radii: Sequence[float],
    *,
    mc_budget: int = 200_000,
    seed: RngStream = RngStream(0, 0),
    n_bootstrap: int = 200,
) -> MassScalingFit:
    """Fit the exponent of ball mass ~ r^h around y from MC mass estimates.

    One shared uniform-in-unit-ball sample drives every radius (common random
    numbers), which removes most of the noise from the log-log slope.  Radii
    above :func:`max_valid_radius` raise ParameterError.
    """
    y = np.asarray(y, dtype=float)
    radii = np.asarray(sorted(radii), dtype=float)
    if radii.size < 2 or np.any(radii <= 0):
        raise ParameterError("need at least two positive radii")
    bound = max_valid_radius(ep, y)
    if np.any(radii >= bound):
        raise ParameterError(
            f"radii must stay below {bound!r} (quarter of smallest positive "
            f"folded gap and delta/4) for a clean scaling window"
        )
    n = y.size
    gen = seed.generator()
    z = gen.standard_normal((mc_budget, n))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    u = z * (gen.random(mc_budget) ** (1.0 / n))[:, None]
    vol1 = math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)

    weights = np.empty((mc_budget, radii.size))
    for j, r in enumerate(radii):
        weights[:, j] = extended_weight(ep, y + r * u)
    if not np.all(np.isfinite(weights)):
        raise EstimatorError("weight evaluated non-finite inside a scaling ball")
    masses = weights.mean(axis=0) * vol1 * radii**n
    if np.any(masses <= 0):
        raise EstimatorError("zero mass estimate; increase mc_budget")
    log_r = np.log(radii)
    slope = _ls_slope(log_r, np.log(masses))

    bgen = seed.child(1).generator()
    counts = bgen.multinomial(mc_budget, np.full(mc_budget, 1.0 / mc_budget), size=n_bootstrap)
    boot_mean = (counts / mc_budget) @ weights
    boot_mass = boot_mean * vol1 * radii**n
    with np.errstate(divide="ignore"):
        boot_log = np.log(boot_mass)
    lc = log_r - log_r.mean()
    boot_slopes = (boot_log @ lc) / (lc @ lc)
    expected = scaling_exponent_h(ep.model, y)
    return MassScalingFit(
        radii=radii,
        masses=masses,
        slope=float(slope),
        stderr=float(np.std(boot_slopes[np.isfinite(boot_slopes)], ddof=1)),
        expected=float(expected),
    )


# ---------------------------------------------------------------------------
# boundary classification


@dataclass(frozen=True)
class RegularityReport:
    """Outcome of the series/capacity test at a boundary point."""

    h: float
    h_prime: float
    branch: str  # "a": h' > -1 (power capacity); "b": h' <= -1 (incl. log case)
    regular: bool
    logarithmic: bool

    def __post_init__(self):
        if self.branch == "a" and not self.h_prime > -1.0:
            raise ParameterError("branch 'a' requires h' > -1")


def wiener_classify(ep: ExtensionParams, z: np.ndarray, tie_tol: float = 0.0) -> RegularityReport:
    """Classify a boundary point by the capacity series of its scaling exponent.

    With h' = 1 - h(z): branch a when h' > -1 (the capacity integral converges
    like a power), branch b otherwise (the logarithmic case h' = -1 included).
    Both branches make the series diverge, so the point is regular either way.
    """
    h = scaling_exponent_h(ep.model, z, tie_tol=tie_tol)
    h_prime = 1.0 - h
    branch = "a" if h_prime > -1.0 else "b"
    return RegularityReport(
        h=float(h),
        h_prime=float(h_prime),
        branch=branch,
        regular=True,
        logarithmic=bool(h_prime == -1.0),
    )


def capacity_asymptotic(ep: ExtensionParams, y: np.ndarray, r: float, R0: float) -> float:
    """Two-scale capacity surrogate (integral_r^R0 s^{h'} ds)^(-1).

    Closed form in both regimes: power-type for h' != -1 and inverse log for
    the critical exponent.  Diverges as r -> R0.
    """
    if not (0 < r < R0):
        raise ParameterError(f"need 0 < r < R0, got r={r!r}, R0={R0!r}")
    bound = max_valid_radius(ep, y)
    if r >= bound:
        raise ParameterError(f"r must stay below the validity bound {bound!r}")
    h_prime = 1.0 - scaling_exponent_h(ep.model, y)
    if h_prime == -1.0:
        integral = math.log(R0 / r)
    else:
        integral = (R0 ** (h_prime + 1.0) - r ** (h_prime + 1.0)) / (h_prime + 1.0)
    return 1.0 / integral


def semimartingale_classify(params: ModelParams) -> bool:
    """True iff beta' >= 1: the drift's total variation is locally integrable."""
    return params.beta_prime >= 1.0


def _power_integral(a: float, b: float, p: float) -> float:
    """integral_a^b y^p dy with the divergence at a = 0 signalled as +inf."""
    if a == 0.0:
        if p <= -1.0:
            return math.inf
        return b ** (p + 1.0) / (p + 1.0)
    if p == -1.0:
        return math.log(b / a)
    return (b ** (p + 1.0) - a ** (p + 1.0)) / (p + 1.0)


def nu_mass(params: ModelParams, i: int, eps: float) -> tuple[float, float]:
    """Masses of the two drift-decomposition measures over the collision box.

    The box constrains the collision gap to [0, eps] and every other low gap
    to [eps, 2*eps].  In gap coordinates both masses factor into 1-d power
    integrals: the first measure carries the exponent beta' - 2 on the
    collision gap (divergent iff beta' <= 1), the second carries it on the
    neighbouring gap, which the box keeps away from zero.  The O(1) factor of
    the dependent top gap is dropped, so values are comparability-class
    normalizations, not exact masses; by gap exchangeability the result does
    not depend on which coordinate i is probed.  beta' = 1 gives (0, 0): the
    drift vanishes identically.
    """
    n = params.n_particles
    if not 1 <= i <= n:
        raise ParameterError(f"coordinate index must lie in 1..{n}, got {i}")
    hi = 1.0 / (2.0 * (n + 2))
    if not (0.0 < eps < hi):
        raise ParameterError(f"eps must lie in (0, {hi!r}), got {eps!r}")
    bp = params.beta_prime
    if bp == 1.0:
        return 0.0, 0.0
    const = abs(1.0 - bp) * math.exp(-params.log_normalization())
    sing0 = _power_integral(0.0, eps, bp - 2.0)
    reg0 = _power_integral(0.0, eps, bp - 1.0)
    side = _power_integral(eps, 2.0 * eps, bp - 1.0)
    side_sing = _power_integral(eps, 2.0 * eps, bp - 2.0)
    nu1 = const * sing0 * side ** (n - 1)
    if n >= 2:
        nu2 = const * side_sing * reg0 * side ** (n - 2)
    else:
        nu2 = const * reg0
    return float(nu1), float(nu2)


# ---------------------------------------------------------------------------
# integration-by-parts residual


@dataclass(frozen=True)
class IbpResult:
    residual: float
    stderr: float
    n_used: int
    n_rejected: int


def ibp_residual(
    params: ModelParams,
    u: Callable[[np.ndarray], np.ndarray],
    field: TestVectorField,
    samples: int,
    seed: RngStream,
    *,
    grad_u: Callable[[np.ndarray], np.ndarray] | None = None,
    fd_step: float = 1e-6,
    max_reject_fraction: float = 1e-3,
) -> IbpResult:
    """Monte Carlo residual of the stationary integration-by-parts identity.

    Estimates E[<grad u, w phi>] + E[u (w B + <grad w, phi>)] where B is the
    boundary functional; the identity makes this zero.  Gradients default to
    central differences with step ``fd_step``.  Non-finite sample rows are
    rejected; more than ``max_reject_fraction`` of them raises EstimatorError.
    """
    x = sample_invariant(params, seed, samples).points
    n = params.n_particles

    def central_diff(f, pts):
        out = np.empty_like(pts)
        for j in range(n):
            h = np.zeros(n)
            h[j] = fd_step
            out[:, j] = (f(pts + h) - f(pts - h)) / (2.0 * fd_step)
        return out

    gu = grad_u(x) if grad_u is not None else central_diff(u, x)
    w = np.asarray(field.weight(x), dtype=float)
    if field.weight_gradient is not None:
        gw = np.asarray(field.weight_gradient(x), dtype=float)
    else:
        gw = central_diff(field.weight, x)
    phi = np.asarray(field.profile(x), dtype=float)

    g = gap_vector(x)
    x_ext = np.pad(x, ((0, 0), (1, 1)), constant_values=(0.0, 1.0))
    phi_ext = self_consistent_profile_values(field, x_ext)
    with np.errstate(divide="ignore", invalid="ignore"):
        bfun = (params.beta_prime - 1.0) * np.sum(np.diff(phi_ext, axis=1) / g, axis=1)
    bfun = bfun + np.sum(field.profile_derivative(x), axis=1)

    uval = np.asarray(u(x), dtype=float)
    integrand = np.sum(gu * phi, axis=1) * w + uval * (w * bfun + np.sum(gw * phi, axis=1))
    finite = np.isfinite(integrand)
    n_rej = int((~finite).sum())
    if n_rej > max_reject_fraction * samples:
        raise EstimatorError(
            f"{n_rej} of {samples} integrand evaluations were non-finite"
        )
    vals = integrand[finite]
    return IbpResult(
        residual=float(vals.mean()),
        stderr=float(vals.std(ddof=1) / math.sqrt(vals.size)),
        n_used=int(vals.size),
        n_rejected=n_rej,
    )


def ibp_battery() -> list[tuple[str, Callable, Callable, TestVectorField]]:
    """Standard (name, u, grad_u, field) quadruples for residual batteries.

    Five smooth test cases covering constant, linear, quadratic and
    exponential observables against flat and varying field weights; all
    profiles vanish at the walls.  Each call builds fresh closures.
    """
    ones = lambda x: np.ones(x.shape[:-1])
    poly = TestVectorField(
        weight=ones,
        profile=lambda y: y * (1.0 - y),
        profile_derivative=lambda y: 1.0 - 2.0 * y,
        weight_gradient=lambda x: np.zeros_like(x),
        name="flat_poly",
    )
    sine = TestVectorField(
        weight=ones,
        profile=lambda y: np.sin(np.pi * y) / np.pi,
        profile_derivative=lambda y: np.cos(np.pi * y),
        weight_gradient=lambda x: np.zeros_like(x),
        name="flat_sine",
    )
    bump_w = TestVectorField(
        weight=lambda x: 1.0 + np.sum(x * (1.0 - x), axis=-1),
        profile=lambda y: y * (1.0 - y),
        profile_derivative=lambda y: 1.0 - 2.0 * y,
        weight_gradient=lambda x: 1.0 - 2.0 * x,
        name="bump_weight",
    )
    quad_w = TestVectorField(
        weight=lambda x: 1.0 + np.sum(x, axis=-1) ** 2,
        profile=lambda y: y * y * (1.0 - y),
        profile_derivative=lambda y: 2.0 * y - 3.0 * y * y,
        weight_gradient=lambda x: 2.0 * np.sum(x, axis=-1)[..., None] * np.ones_like(x),
        name="quadratic_weight",
    )
    return [
        ("const_u", ones, lambda x: np.zeros_like(x), poly),
        ("linear_u", lambda x: np.sum(x, axis=-1), lambda x: np.ones_like(x), poly),
        (
            "quadratic_u",
            lambda x: np.sum(x * x, axis=-1),
            lambda x: 2.0 * x,
            sine,
        ),
        (
            "linear_u_bump_w",
            lambda x: np.sum(x, axis=-1),
            lambda x: np.ones_like(x),
            bump_w,
        ),
        (
            "exp_u_quad_w",
            lambda x: np.exp(-np.sum(x, axis=-1)),
            lambda x: -np.exp(-np.sum(x, axis=-1))[..., None] * np.ones_like(x),
            quad_w,
        ),
    ]


# ---------------------------------------------------------------------------
# fv refinement ladder


@dataclass(frozen=True)
class FvLadder:
    dts: np.ndarray
    estimates: np.ndarray
    stderrs: np.ndarray
    ratios: np.ndarray
    stabilizes: bool


def fv_refinement_ladder(
    params: ModelParams,
    dts: Sequence[float],
    *,
    n_paths: int = 1000,
    t_end: float = 1.0,
    seed: RngStream = RngStream(0, 0),
    scheme: str = "fold_em",
    uncap_finest: bool = True,
    min_gap_factor: float = 1.0,
) -> FvLadder:
    """Mean drift variation per path across a dt ladder.

    Each level runs with substep trigger min_gap_factor * sqrt(2 dt), so the
    trigger tracks the noise scale across levels.  Coarse levels keep the
    drift cap; the finest level runs uncapped (``uncap_finest``) so the
    variation estimate at the highest resolution is not clipped.  A
    stabilizing ladder (last ratio within [0.9, 1.1]) is the numerical
    signature of a finite-variation drift part.
    """
    dts = np.asarray(sorted(dts, reverse=True), dtype=float)
    estimates, stderrs = [], []
    for lev, dt in enumerate(dts):
        cap = None if (uncap_finest and lev == len(dts) - 1) else AUTO
        cfg = IntegratorConfig(
            dt=float(dt),
            seed=seed.child(10 + lev),
            scheme=scheme,
            min_gap=min_gap_factor * math.sqrt(2.0 * dt),
            drift_cap=cap,
        )
        x0 = sample_invariant(params, seed.child(100 + lev), n_paths).points
        res = simulate_ensemble(params, cfg, x0, t_end)
        estimates.append(res.fv_l1.mean())
        stderrs.append(res.fv_l1.std(ddof=1) / math.sqrt(n_paths))
    estimates = np.asarray(estimates)
    stderrs = np.asarray(stderrs)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = estimates[1:] / estimates[:-1]
    ratios = np.nan_to_num(ratios, nan=1.0)
    stabilizes = bool(estimates[-1] == 0.0 or (0.9 <= ratios[-1] <= 1.1))
    return FvLadder(
        dts=dts, estimates=estimates, stderrs=stderrs, ratios=ratios, stabilizes=stabilizes
    )


# ---------------------------------------------------------------------------
# uniform report schema


def dirichlet_gap_moments(params: ModelParams) -> tuple[float, float]:
    """Stationary mean and variance of a single gap."""
    b, bp = params.beta, params.beta_prime
    mean = 1.0 / (params.n_particles + 1)
    var = bp * (b - bp) / (b**2 * (b + 1.0))
    return mean, var


def make_report(
    name: str,
    params: dict,
    estimate: float,
    stderr: float,
    budget: int,
    seed: int,
    flags: Sequence[str] = (),
    details: dict | None = None,
) -> dict:
    """Uniform JSON-ready estimator report."""
    rep = {
        "name": name,
        "params": params,
        "estimate": _jsonable(estimate),
        "stderr": _jsonable(stderr),
        "budget": int(budget),
        "seed": int(seed),
        "flags": sorted(flags),
    }
    if details:
        rep["details"] = {k: _jsonable(v) for k, v in sorted(details.items())}
    return rep


def _jsonable(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return v
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    return v
