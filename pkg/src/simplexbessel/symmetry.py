"""Folding map, wall reflections, and the extended weight on ambient space.

The simplex sits inside R^N as a fundamental domain for the group generated by
coordinate sign flips, coordinate permutations, and the N+1 reflections H_i
that swap the wall at 1 with the i-th particle block.  ``fold_T`` maps an
arbitrary ambient point to its representative (tent-folded, then sorted);
``extended_weight`` continues the stationary density to all of R^N through the
fold, with the top-gap factor frozen at delta^(beta'-1) outside the collar
{x^N <= 1 - delta} so that the weight stays comparable to the product of the
first N gap factors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParameterError
from .model import ModelParams, gap_vector

__all__ = [
    "ExtensionParams",
    "fold_T",
    "reflect_H",
    "log_extended_weight",
    "extended_weight",
    "degeneracy_d",
    "scaling_exponent_h",
]


@dataclass(frozen=True)
class ExtensionParams:
    """Model parameters plus the collar width delta of the extension.

    delta must lie in (0, 1/(2(N+2))): small enough that a ball of radius
    delta around any folded point stays inside one branch regime.
    """

    model: ModelParams
    delta: float

    def __post_init__(self):
        hi = 1.0 / (2.0 * (self.model.n_particles + 2))
        if not (0.0 < self.delta < hi):
            raise ParameterError(
                f"delta must lie in (0, {hi!r}) for N={self.model.n_particles}, "
                f"got {self.delta!r}"
            )


def fold_T(y: np.ndarray) -> np.ndarray:
    """Fold an ambient point into the closed ordered simplex.

    Each coordinate passes through the 2-periodic tent map (reflection at the
    walls 0 and 1), then the result is sorted.  Both stages are 1-Lipschitz
    and the composite is the identity on the closed simplex.
    """
    z = np.remainder(np.abs(np.asarray(y, dtype=float)), 2.0)
    return np.sort(np.minimum(z, 2.0 - z), axis=-1)


def reflect_H(i: int, x: np.ndarray) -> np.ndarray:
    """Reflection H_i: keep x^1..x^i, send x^j -> 1 - (x^j - x^i) reversed.

    Defined for 0 <= i <= N (with x^0 = 0); H_N is the identity.  Each H_i maps
    the closed simplex to itself and permutes the gap multiset, so it preserves
    the stationary density.  Involutive.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    if not 0 <= i <= n:
        raise DomainError(f"reflection index must lie in 0..{n}, got {i}")
    if i == n:
        return x.copy()
    pivot = x[..., i - 1 : i] if i > 0 else np.zeros_like(x[..., :1])
    tail = 1.0 - (x[..., i:] - pivot)
    return np.concatenate([x[..., :i], tail[..., ::-1]], axis=-1)


def log_extended_weight(ep: ExtensionParams, y: np.ndarray) -> np.ndarray:
    """log of the extended weight at ambient points, broadcast over (..., N).

    Inside the folded collar (T y)^N <= 1 - delta this is the stationary
    log density at T y; outside, the top-gap factor is replaced by
    delta^(beta'-1) and only the first N gaps of T y enter.  Degenerate points
    give +/- inf according to the sign of beta' - 1.
    """
    p = ep.model
    t = fold_T(y)
    a = p.beta_prime - 1.0
    const = -p.log_normalization()
    if a == 0.0:
        return np.full(t.shape[:-1], const)
    g_low = np.diff(t, axis=-1, prepend=0.0)
    top = 1.0 - t[..., -1]
    with np.errstate(divide="ignore"):
        base = np.sum(np.log(g_low), axis=-1)
        top_log = np.where(top >= ep.delta, np.log(np.maximum(top, ep.delta)), np.log(ep.delta))
    return const + a * (base + top_log)


def extended_weight(ep: ExtensionParams, y: np.ndarray) -> np.ndarray:
    """exp of :func:`log_extended_weight`; may be 0 or +inf at degeneracies."""
    with np.errstate(over="ignore"):
        return np.exp(log_extended_weight(ep, y))


def degeneracy_d(y: np.ndarray, tie_tol: float = 0.0) -> np.ndarray:
    """Number of vanishing low gaps of the folded point (0 <= d <= N).

    Counts i in 1..N with (T y)^i = (T y)^{i-1} under the wall convention
    (T y)^0 = 0.  Ties are exact by default; ``tie_tol`` loosens the test.
    """
    t = fold_T(y)
    g_low = np.diff(t, axis=-1, prepend=0.0)
    d = np.sum(g_low <= tie_tol, axis=-1)
    if d.shape == ():
        return int(d)
    return d


def scaling_exponent_h(p: ModelParams, y: np.ndarray, tie_tol: float = 0.0) -> np.ndarray:
    """Local mass-scaling exponent h(y) = N - d(y) + beta' d(y).

    The extended weight gives mass ~ r^h to small balls around y.
    """
    d = np.asarray(degeneracy_d(y, tie_tol=tie_tol), dtype=float)
    h = p.n_particles - d + p.beta_prime * d
    if h.shape == ():
        return float(h)
    return h
