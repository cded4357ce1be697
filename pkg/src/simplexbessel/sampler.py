"""Exact samplers for the stationary law and reproducible RNG streams.

The gap vector is symmetric Dirichlet(beta', ..., beta') with N+1 components,
so exact stationary configurations come from normalized Gamma(beta', 1)
variates followed by a cumulative sum.  All randomness flows through
counter-based Philox streams keyed by (seed, stream_id): equal keys reproduce
bit-for-bit regardless of what other streams were consumed, which is what
makes worker-count-independent output possible.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .model import ModelParams

_U64 = 0xFFFFFFFFFFFFFFFF


@dataclass(frozen=True)
class RngStream:
    """A named, restartable randomness source: Philox keyed by (seed, stream_id)."""

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed & _U64, self.stream_id & _U64], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def child(self, offset: int) -> "RngStream":
        return RngStream(self.seed, (self.stream_id + offset) & _U64)


def path_stream(base: RngStream, path_index: int, substream: int = 0) -> RngStream:
    """Per-path stream: the high 32 bits keep the base stream id, the low bits
    hold (path_index, substream).  Keep explicit stream ids below 2**32 and
    path counts below 2**31 so the key spaces cannot collide."""
    sid = ((base.stream_id & 0xFFFFFFFF) << 32) | ((path_index << 1) | (substream & 1))
    return RngStream(base.seed, sid & _U64)


def gamma_variates(gen: np.random.Generator, shape: float, size) -> np.ndarray:
    """Gamma(shape, 1) draws valid for every shape > 0.

    For shape < 1 the density is unbounded at zero; draw Gamma(shape + 1) and
    multiply by U^(1/shape) (computed as exp(log(U)/shape) to dodge underflow),
    which boosts the shape exactly.
    """
    if shape <= 0:
        raise ParameterError(f"gamma shape must be positive, got {shape!r}")
    if shape >= 1.0:
        return gen.standard_gamma(shape, size=size)
    g = gen.standard_gamma(shape + 1.0, size=size)
    log_u = np.log(gen.random(size=size))
    return g * np.exp(log_u / shape)


@dataclass(frozen=True)
class SampleBatch:
    """A batch of stationary configurations, one per row.

    ``points`` has shape (count, N); rows are sorted and lie in the closed
    simplex by construction.
    """

    points: np.ndarray
    params: ModelParams
    seed_record: RngStream

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != self.params.n_particles:
            raise ParameterError(
                f"points must have shape (count, {self.params.n_particles}), got {pts.shape}"
            )
        object.__setattr__(self, "points", pts)

    @property
    def count(self) -> int:
        return self.points.shape[0]

    def write_csv(self, fileobj: io.TextIOBase) -> None:
        n = self.params.n_particles
        fileobj.write(",".join(f"x{i}" for i in range(1, n + 1)) + "\n")
        for row in self.points:
            fileobj.write(",".join(format(v, ".17g") for v in row) + "\n")


def sample_invariant(params: ModelParams, rng: RngStream, count: int) -> SampleBatch:
    """Exact draws from the stationary law via normalized Gamma gaps."""
    if count < 1:
        raise ParameterError(f"count must be >= 1, got {count}")
    gen = rng.generator()
    raw = gamma_variates(gen, params.beta_prime, (count, params.n_particles + 1))
    gaps = raw / raw.sum(axis=1, keepdims=True)
    # cumsum may overshoot 1.0 by an ulp; clip to honor the simplex contract
    points = np.minimum(np.cumsum(gaps[:, :-1], axis=1), 1.0)
    return SampleBatch(points=points, params=params, seed_record=rng)


def sample_uniform_simplex(n: int, rng: RngStream, count: int) -> np.ndarray:
    """Uniform draws on the ordered simplex (sorted uniforms); density N!."""
    if n < 1 or count < 1:
        raise ParameterError("n and count must be >= 1")
    gen = rng.generator()
    return np.sort(gen.random((count, n)), axis=1)


#: bounds for the nonzero gaps in probe constructions
_PROBE_GAP_LO = 0.05
_PROBE_GAP_HI = 0.10


def probe_points(n: int, d_target: int, count: int, rng: RngStream) -> np.ndarray:
    """Ambient points whose folded degeneracy is exactly ``d_target``.

    The folded point gets ``d_target`` vanishing low gaps at uniformly chosen
    positions; the remaining low gaps are drawn from [0.05, 0.10] so they stay
    well separated from zero, then random sign flips and a random coordinate
    permutation disguise the construction.  d_target = n collapses everything
    to the origin.  Raises ParameterError when the nonzero gaps cannot fit in
    the unit interval.
    """
    if not 0 <= d_target <= n:
        raise ParameterError(f"d_target must lie in 0..{n}, got {d_target}")
    if count < 1:
        raise ParameterError(f"count must be >= 1, got {count}")
    free = n - d_target
    if free * _PROBE_GAP_HI > 0.95:
        raise ParameterError(
            f"cannot fit {free} gaps of size up to {_PROBE_GAP_HI} inside the unit "
            f"interval; lower n - d_target"
        )
    gen = rng.generator()
    gaps = np.zeros((count, n))
    if free:
        values = gen.uniform(_PROBE_GAP_LO, _PROBE_GAP_HI, size=(count, free))
        for row in range(count):
            pos = gen.choice(n, size=free, replace=False)
            gaps[row, np.sort(pos)] = values[row]
    folded = np.cumsum(gaps, axis=1)
    signs = np.where(gen.random((count, n)) < 0.5, -1.0, 1.0)
    out = folded * signs
    for row in range(count):
        out[row] = out[row, gen.permutation(n)]
    return out
