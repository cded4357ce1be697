"""Closed-form quantities for the interacting gap diffusion on the ordered simplex.

The configuration space is the set of ordered points 0 < x^1 < ... < x^N < 1.
Together with the fixed walls x^0 = 0 and x^{N+1} = 1 a configuration carries
N+1 gaps g_i = x^i - x^{i-1} that sum to one.  The stationary density is

    q(x) = (1/Z) * prod_i g_i^(beta' - 1),      beta' = beta / (N + 1),

i.e. the gap vector is symmetric-Dirichlet distributed.  This module holds the
parameter/record types and the exact formulas built on them: log density,
drift (the gradient of log q), the log-gap potential and its Hessian quadratic
form, and the boundary functional used by the integration-by-parts identity.

All operations accept plain arrays with shape (..., N) and broadcast over
leading axes; the dataclass wrappers validate at construction time.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import gammaln

from .errors import DomainError

EPS = float(np.finfo(float).eps)
#: default absolute slack for membership tests on the closed simplex
SIMPLEX_TOL = 4.0 * EPS

Profile = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ModelParams:
    """Particle count and inverse-temperature pair (N, beta).

    ``beta_prime`` is beta / (N + 1); it may be passed explicitly but is always
    checked against the recomputed value.
    """

    n_particles: int
    beta: float
    beta_prime: float | None = None

    def __post_init__(self):
        n = self.n_particles
        if not isinstance(n, (int, np.integer)) or n < 1:
            raise DomainError(f"n_particles must be a positive integer, got {n!r}")
        if not np.isfinite(self.beta) or self.beta <= 0:
            raise DomainError(f"beta must be a positive real, got {self.beta!r}")
        derived = self.beta / (n + 1)
        if self.beta_prime is None:
            object.__setattr__(self, "beta_prime", derived)
        elif abs(self.beta_prime - derived) > 4 * EPS * max(1.0, derived):
            raise DomainError(
                f"beta_prime={self.beta_prime!r} inconsistent with beta/(N+1)={derived!r}"
            )

    @property
    def n_gaps(self) -> int:
        return self.n_particles + 1

    def log_normalization(self) -> float:
        """log Z with Z = Gamma(beta')^(N+1) / Gamma(beta), kept in log form."""
        return float((self.n_particles + 1) * gammaln(self.beta_prime) - gammaln(self.beta))


def gap_vector(x: np.ndarray) -> np.ndarray:
    """Gaps (x^1 - 0, x^2 - x^1, ..., 1 - x^N); shape (..., N+1)."""
    x = np.asarray(x, dtype=float)
    return np.diff(x, axis=-1, prepend=0.0, append=1.0)


def coords_from_gaps(g: np.ndarray) -> np.ndarray:
    """Inverse of :func:`gap_vector`; drops the dependent top gap."""
    g = np.asarray(g, dtype=float)
    return np.cumsum(g[..., :-1], axis=-1)


def in_closed_simplex(x: np.ndarray, tol: float = SIMPLEX_TOL) -> np.ndarray:
    """Membership test for {0 <= x^1 <= ... <= x^N <= 1} up to ``tol``."""
    g = gap_vector(x)
    return np.all(g >= -tol, axis=-1)


@dataclass(frozen=True)
class SimplexPoint:
    """An ordered configuration in the closed simplex.

    Construction validates ordering and the unit box up to ``tol``; the wrapped
    array is made read-only.
    """

    coords: np.ndarray
    tol: float = SIMPLEX_TOL

    def __post_init__(self):
        arr = np.array(self.coords, dtype=float, copy=True)
        if arr.ndim != 1 or arr.size < 1:
            raise DomainError("a simplex point is a 1-d vector with at least one entry")
        if not np.all(np.isfinite(arr)):
            raise DomainError("simplex point has non-finite coordinates")
        g = gap_vector(arr)
        if np.any(g < -self.tol):
            i = int(np.argmin(g))
            raise DomainError(
                f"ordering violated at gap {i}: value {g[i]!r} below -tol={-self.tol!r}"
            )
        arr.flags.writeable = False
        object.__setattr__(self, "coords", arr)

    @property
    def n(self) -> int:
        return self.coords.size

    def gaps(self) -> "GapVector":
        return GapVector(gap_vector(self.coords))


@dataclass(frozen=True)
class GapVector:
    """N+1 nonnegative spacings summing to one (within 4 machine epsilons)."""

    gaps: np.ndarray
    tol: float = SIMPLEX_TOL

    def __post_init__(self):
        arr = np.array(self.gaps, dtype=float, copy=True)
        if arr.ndim != 1 or arr.size < 2:
            raise DomainError("a gap vector has at least two entries")
        if np.any(arr < -self.tol):
            raise DomainError(f"negative gap: {arr.min()!r}")
        s = arr.sum()
        if abs(s - 1.0) > self.tol * arr.size:
            raise DomainError(f"gaps sum to {s!r}, not 1")
        arr.flags.writeable = False
        object.__setattr__(self, "gaps", arr)

    def point(self) -> SimplexPoint:
        return SimplexPoint(coords_from_gaps(self.gaps))


def log_density(params: ModelParams, x: np.ndarray) -> np.ndarray:
    """log q(x) = -log Z + (beta' - 1) * sum_i log g_i, broadcast over (..., N).

    On the boundary the value is -inf when beta' > 1, +inf when beta' < 1 and
    the finite constant when beta' = 1; no error is raised either way.
    """
    g = gap_vector(x)
    const = -params.log_normalization()
    a = params.beta_prime - 1.0
    if a == 0.0:
        return np.full(g.shape[:-1], const)
    with np.errstate(divide="ignore"):
        s = np.sum(np.log(g), axis=-1)
    return const + a * s


def drift(params: ModelParams, x: np.ndarray) -> np.ndarray:
    """Drift b_i = (beta' - 1) (1/g_i - 1/g_{i+1}), the gradient of log q.

    Requires a strictly interior point; a vanishing gap raises DomainError
    naming the offending gap index.
    """
    g = gap_vector(x)
    if np.any(g <= 0.0):
        flat = np.min(g, axis=tuple(range(g.ndim - 1))) if g.ndim > 1 else g
        i = int(np.argmin(flat))
        raise DomainError(f"drift undefined: gap {i} vanishes (value {flat[i]!r})")
    inv = 1.0 / g
    return (params.beta_prime - 1.0) * (inv[..., :-1] - inv[..., 1:])


def potential_V(x: np.ndarray) -> np.ndarray:
    """Log-gap barrier V(x) = -sum_i log g_i; +inf outside the open simplex."""
    g = gap_vector(x)
    out_shape = g.shape[:-1]
    inside = np.all(g > 0.0, axis=-1)
    result = np.full(out_shape, np.inf)
    if np.any(inside):
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = -np.sum(np.log(np.where(g > 0.0, g, 1.0)), axis=-1)
        result = np.where(inside, vals, np.inf)
    if out_shape == ():
        return float(result)
    return result


def hessian_quadratic_form(x: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """Quadratic form of the Hessian of V at x applied to a direction xi.

    Equals rho_1 xi_1^2 + sum_{i=1}^{N-1} rho_{i+1} (xi_{i+1} - xi_i)^2
    + rho_{N+1} xi_N^2 with rho_i = 1/g_i^2, hence it dominates the Dirichlet
    form of the path graph Laplacian because every rho_i >= 1.
    """
    g = gap_vector(x)
    if np.any(g <= 0.0):
        raise DomainError("hessian quadratic form needs a strictly interior point")
    xi = np.asarray(xi, dtype=float)
    rho = 1.0 / g**2
    inner = np.diff(xi, axis=-1)
    val = rho[..., 0] * xi[..., 0] ** 2 + rho[..., -1] * xi[..., -1] ** 2
    if inner.shape[-1]:
        val = val + np.sum(rho[..., 1:-1] * inner**2, axis=-1)
    return val


@dataclass(frozen=True)
class TestVectorField:
    """Separable test field x -> w(x) * (phi(x^1), ..., phi(x^N)).

    ``weight`` is a smooth scalar function on the closed simplex, ``profile`` a
    smooth function on [0, 1] vanishing at both endpoints (checked numerically
    at construction), ``profile_derivative`` its derivative.  An optional
    ``weight_gradient`` avoids finite differencing in estimators.
    """

    weight: Callable[[np.ndarray], np.ndarray]
    profile: Profile
    profile_derivative: Profile
    weight_gradient: Callable[[np.ndarray], np.ndarray] | None = None
    name: str = "field"

    __test__ = False  # not a pytest class despite the name

    def __post_init__(self):
        for endpoint in (0.0, 1.0):
            v = float(self.profile(np.asarray(endpoint)))
            if abs(v) > 1e-12:
                raise DomainError(
                    f"profile must vanish at {endpoint}, got {v!r}"
                )


def ibp_functional(params: ModelParams, x: np.ndarray, field: TestVectorField) -> np.ndarray:
    """Boundary functional of the integration-by-parts identity.

    (beta' - 1) * sum_{i=0}^{N} (phi(x^{i+1}) - phi(x^i)) / (x^{i+1} - x^i)
    + sum_{i=1}^{N} phi'(x^i), with the walls x^0 = 0 and x^{N+1} = 1.
    Affine in beta at fixed x.  A vanishing gap raises DomainError.
    """
    x = np.asarray(x, dtype=float)
    g = gap_vector(x)
    if np.any(g <= 0.0):
        raise DomainError("ibp functional needs a strictly interior point")
    pad = [(0, 0)] * (x.ndim - 1) + [(1, 1)]
    x_ext = np.pad(x, pad, constant_values=(0.0, 1.0))
    phi_ext = self_consistent_profile_values(field, x_ext)
    quotients = np.diff(phi_ext, axis=-1) / g
    return (params.beta_prime - 1.0) * np.sum(quotients, axis=-1) + np.sum(
        field.profile_derivative(x), axis=-1
    )


def self_consistent_profile_values(field: TestVectorField, x_ext: np.ndarray) -> np.ndarray:
    """Profile values with the endpoint zeros imposed exactly.

    The profile vanishes at 0 and 1 only up to 1e-12; pinning the wall values
    keeps difference quotients against tiny gaps from amplifying that residue.
    """
    phi = np.asarray(field.profile(x_ext), dtype=float)
    phi = phi.copy()
    phi[..., 0] = 0.0
    phi[..., -1] = 0.0
    return phi
