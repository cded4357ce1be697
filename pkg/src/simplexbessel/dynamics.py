"""Time integrators for the gap diffusion, with coupling support.

The continuum dynamics is a Brownian motion with the singular drift
(beta' - 1)(1/g_i - 1/g_{i+1}) on each coordinate, normally reflected at the
collision faces and the two walls.  Instead of simulating local times, one
Euler-Maruyama step is followed by folding every coordinate back into [0, 1]
through the 2-periodic tent map and re-sorting; the fold and the sort are both
1-Lipschitz, so they can only help contraction estimates.  An alternative
scheme steps the N+1 gaps directly and reflects them at zero.

Stability near collisions is handled two ways: the drift displacement per step
is capped (default cap 0.25 * min_gap), and a step whose starting state has a
gap below min_gap is re-executed as four quarter-steps, recursively down to
dt/1024.  Per level the cap shrinks with the substep noise scale (factor 2)
and the re-trigger threshold with the substep itself (factor 4), so only the
worst rows keep subdividing and the work per base step stays bounded.

Randomness: path p consumes base-step gaussians from the Philox stream
(seed, path_stream(p, 0)) in step order and substep gaussians from
(seed, path_stream(p, 1)).  Both depend only on the path index and the path's
own history, so splitting an ensemble across workers or chunks cannot change
any output byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import IntegratorError, ParameterError
from .model import ModelParams, gap_vector
from .sampler import RngStream, path_stream

SCHEMES = ("fold_em", "gap_em")

#: sentinel: resolve drift_cap to its default (0.25 * min_gap)
AUTO = "auto"

#: doubles held by one pregenerated noise buffer (~128 MB)
_NOISE_BUDGET = 16_000_000


@dataclass(frozen=True)
class IntegratorConfig:
    """Step size, scheme and the singular-drift safeguards.

    ``min_gap`` (default 10*sqrt(2*dt)) is the substep trigger; 0 disables
    subdivision.  ``drift_cap`` bounds the drift displacement per step; the
    string "auto" resolves to 0.25*min_gap, None disables capping.  Per
    subdivision level the trigger shrinks by 4 and the cap by 2.
    """

    dt: float
    seed: RngStream
    scheme: str = "fold_em"
    min_gap: float | None = None
    drift_cap: float | None | str = AUTO
    max_subdivisions: int = 5

    def __post_init__(self):
        if not np.isfinite(self.dt) or self.dt <= 0:
            raise ParameterError(f"dt must be a positive real, got {self.dt!r}")
        if self.scheme not in SCHEMES:
            raise ParameterError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.min_gap is None:
            object.__setattr__(self, "min_gap", 10.0 * math.sqrt(2.0 * self.dt))
        elif self.min_gap < 0:
            raise ParameterError(f"min_gap must be >= 0, got {self.min_gap!r}")
        if isinstance(self.drift_cap, str):
            if self.drift_cap != AUTO:
                raise ParameterError("drift_cap must be a positive real, None or 'auto'")
            object.__setattr__(self, "drift_cap", 0.25 * self.min_gap)
        elif self.drift_cap is not None and self.drift_cap <= 0:
            raise ParameterError(f"drift_cap must be positive or None, got {self.drift_cap!r}")
        if self.max_subdivisions < 0:
            raise ParameterError("max_subdivisions must be >= 0")

    @property
    def merge_tol(self) -> float:
        """Coupling merge threshold sqrt(dt)/10."""
        return math.sqrt(self.dt) / 10.0


# ---------------------------------------------------------------------------
# single-step kernels (vectorized over rows; lean slicing, no np.diff/pad)

def _gaps(X):
    """Gap matrix (rows, N+1) of sorted rows X in [0, 1]."""
    rows, n = X.shape
    G = np.empty((rows, n + 1))
    G[:, 0] = X[:, 0]
    if n > 1:
        np.subtract(X[:, 1:], X[:, :-1], out=G[:, 1:-1])
    np.subtract(1.0, X[:, -1], out=G[:, -1])
    return G


def _gap_increments(D):
    """Coordinate displacements (rows, N) -> induced gap increments (rows, N+1)."""
    rows, n = D.shape
    out = np.empty((rows, n + 1))
    out[:, 0] = D[:, 0]
    if n > 1:
        np.subtract(D[:, 1:], D[:, :-1], out=out[:, 1:-1])
    np.negative(D[:, -1], out=out[:, -1])
    return out


def _drift_displacement(a, G, dt, cap):
    """Capped drift displacement over dt from the gap matrix G (rows, N+1).

    Returns (disp (rows, N), capped_l1 (rows,) or None).  With a cap, inverse
    gaps are bounded at cap/(|a| dt) before differencing, which both prevents
    inf - inf at a collision and enforces |disp| <= cap outright; capped_l1
    records |a| dt * sum over gaps of (1/g - bound)+, the l1 inverse-gap mass
    the bound removed (+inf on an exactly collided row).
    """
    if cap is None:
        inv = np.reciprocal(G)
        disp = inv[:, :-1] - inv[:, 1:]
        disp *= a * dt
        if not np.all(np.isfinite(disp)):
            raise IntegratorError("infinite drift at a collision with capping disabled")
        return disp, None
    bound = cap / (abs(a) * dt)
    inv = np.reciprocal(G)
    over = inv - bound
    np.maximum(over, 0.0, out=over)
    capped = over.sum(axis=1)
    capped *= abs(a) * dt
    np.minimum(inv, bound, out=inv)
    disp = inv[:, :-1] - inv[:, 1:]
    disp *= a * dt
    return disp, capped


def _step_fold_em(a, X, G, dt, sqrt2dt, Z, cap):
    """Euler step + tent fold + sort.  Returns (Xn, disp|None, capped|None, events)."""
    if a == 0.0:
        disp = capped = None
        Y = sqrt2dt * Z
        Y += X
    else:
        if G is None:
            G = _gaps(X)
        disp, capped = _drift_displacement(a, G, dt, cap)
        Y = sqrt2dt * Z
        Y += X
        Y += disp
    z = np.remainder(Y, 2.0)
    t = 2.0 - z
    np.minimum(z, t, out=t)
    events = (t != Y).sum(axis=1)
    if t.shape[1] > 1:
        events = events + (t[:, 1:] < t[:, :-1]).sum(axis=1)
        t.sort(axis=1)
    return t, disp, capped, events


def _step_gap_em(a, X, G, dt, sqrt2dt, Z, cap):
    """Euler step on the gaps with reflection at zero and renormalization."""
    if G is None:
        G = _gaps(X)
    if a == 0.0:
        disp = capped = None
        Gn = G.copy()
    else:
        disp, capped = _drift_displacement(a, G, dt, cap)
        Gn = G + _gap_increments(disp)
    Zg = _gap_increments(Z)
    Zg *= sqrt2dt
    Gn += Zg
    events = (Gn < 0.0).sum(axis=1)
    np.abs(Gn, out=Gn)
    Gn /= Gn.sum(axis=1, keepdims=True)
    Xn = np.cumsum(Gn[:, :-1], axis=1)
    return Xn, disp, capped, events


_KERNELS: dict[str, Callable] = {"fold_em": _step_fold_em, "gap_em": _step_gap_em}


def step(params: ModelParams, cfg: IntegratorConfig, x: np.ndarray, gaussians: np.ndarray):
    """One integrator step from x with caller-supplied standard gaussians.

    Returns (new point, applied drift displacement).  No subdivision happens
    here; that is :func:`simulate`'s job.
    """
    x = np.asarray(x, dtype=float)
    z = np.asarray(gaussians, dtype=float)
    if x.shape != z.shape or x.ndim != 1:
        raise ParameterError("x and gaussians must be 1-d arrays of equal length")
    a = params.beta_prime - 1.0
    with np.errstate(divide="ignore"):
        xn, disp, _, _ = _KERNELS[cfg.scheme](
            a, x[None], None, cfg.dt, math.sqrt(2.0 * cfg.dt), z[None], cfg.drift_cap
        )
    if disp is None:
        disp = np.zeros((1, x.size))
    return xn[0], disp[0]


# ---------------------------------------------------------------------------
# noise plumbing

class _PathNoise:
    """Per-path Philox gaussians: pregenerated base steps, lazy substep draws."""

    def __init__(self, base: RngStream, global_paths: np.ndarray, n_coords: int, n_steps: int):
        self.base = base
        self.paths = global_paths
        self.n = n_coords
        self.n_steps = n_steps
        self.chunk = max(1, min(n_steps, _NOISE_BUDGET // max(1, len(global_paths) * n_coords)))
        self._gens = [path_stream(base, int(p), 0).generator() for p in global_paths]
        self._sub: list[np.random.Generator | None] = [None] * len(global_paths)
        self._buf: np.ndarray | None = None
        self._start = 0

    def base_step(self, k: int) -> np.ndarray:
        if self._buf is None or not (self._start <= k < self._start + self._buf.shape[1]):
            m = min(self.chunk, self.n_steps - k)
            buf = np.empty((len(self._gens), m, self.n))
            for j, gen in enumerate(self._gens):
                buf[j] = gen.standard_normal((m, self.n))
            self._buf, self._start = buf, k
        return self._buf[:, k - self._start, :]

    def sub_draw(self, rows: np.ndarray) -> np.ndarray:
        out = np.empty((len(rows), self.n))
        sub = self._sub
        for i, r in enumerate(rows):
            gen = sub[r]
            if gen is None:
                gen = path_stream(self.base, int(self.paths[r]), 1).generator()
                sub[r] = gen
            out[i] = gen.standard_normal(self.n)
        return out


class _Accum:
    """Per-path accumulators.

    ``fv_net`` collects the signed applied-drift vector within one base step
    (substeps included) and is consumed by the driver after every step;
    ``events`` and ``clipped`` run until drained at a recording boundary.
    """

    def __init__(self, n_paths: int, n_coords: int):
        self.fv_net = np.zeros((n_paths, n_coords))
        self.events = np.zeros(n_paths, dtype=np.int64)
        self.clipped = np.zeros(n_paths)

    def add(self, rows, disp, capped, events):
        self.events[rows] += events
        if disp is not None:
            self.fv_net[rows] += disp
        if capped is not None:
            self.clipped[rows] += capped

    def add_full(self, disp, capped, events):
        self.events += events
        if disp is not None:
            self.fv_net += disp
        if capped is not None:
            self.clipped += capped

    def drain(self):
        out = (self.events.copy(), self.clipped.copy())
        self.events[:] = 0
        self.clipped[:] = 0.0
        return out


def _advance(kernel, a, X, dt, level, cfg, rows, Z, noise, acc, full):
    """Advance X[rows] by one step of size dt at a subdivision level.

    Rows whose smallest gap is below min_gap * 4^-level are re-executed as four
    quarter steps (fresh substep noise), until max_subdivisions.  ``full``
    marks rows == arange(len(X)), enabling copy-free paths.
    """
    Xv = X if full else X[rows]
    G = None
    tight = None
    if a != 0.0 and cfg.min_gap > 0.0 and level < cfg.max_subdivisions:
        G = _gaps(Xv)
        mask = G.min(axis=1) < cfg.min_gap * 0.25**level
        if mask.any():
            tight = mask
    cap = cfg.drift_cap
    if cap is not None:
        cap = cap * 0.5**level
    sqrt2dt = math.sqrt(2.0 * dt)
    if tight is None:
        xn, disp, capped, events = kernel(a, Xv, G, dt, sqrt2dt, Z, cap)
        if full:
            X[:] = xn
            acc.add_full(disp, capped, events)
        else:
            X[rows] = xn
            acc.add(rows, disp, capped, events)
        return
    easy = ~tight
    if easy.any():
        er = rows[easy]
        xn, disp, capped, events = kernel(a, Xv[easy], G[easy], dt, sqrt2dt, Z[easy], cap)
        X[er] = xn
        acc.add(er, disp, capped, events)
    hard = rows[tight]
    for _ in range(4):
        z_sub = noise.sub_draw(hard)
        _advance(kernel, a, X, 0.25 * dt, level + 1, cfg, hard, z_sub, noise, acc, False)


def _n_steps(t_end: float, dt: float) -> int:
    if not np.isfinite(t_end) or t_end <= 0.0:
        raise ParameterError(f"t_end must be positive, got {t_end!r}")
    n = int(round(t_end / dt))
    if n < 1 or abs(n * dt - t_end) > 1e-9 * max(1.0, abs(t_end)):
        raise ParameterError(
            f"t_end={t_end!r} is not an integer multiple of dt={dt!r}"
        )
    return n


def _prepare_x0(x0, n_paths: int | None) -> np.ndarray:
    arr = np.asarray(x0, dtype=float)
    if arr.ndim == 1:
        if n_paths is None:
            n_paths = 1
        arr = np.tile(arr, (n_paths, 1))
    elif n_paths is not None and arr.shape[0] != n_paths:
        raise ParameterError(f"x0 has {arr.shape[0]} rows, expected {n_paths}")
    if np.any(gap_vector(arr) < -1e-12):
        raise ParameterError("x0 must lie in the closed simplex")
    return np.clip(arr, 0.0, 1.0)


# ---------------------------------------------------------------------------
# public results

@dataclass(frozen=True)
class Trajectory:
    """A single recorded path on a uniform grid starting at t = 0.

    ``fv_increments`` holds, per recording interval, the net drift vector
    actually applied (substeps summed); ``reflection_events`` counts boundary
    folds plus order restorations; ``capped_mass`` is the l1 drift mass the
    displacement cap removed.  All three have one row per interval, so their
    length is ``len(times) - 1``.
    """

    times: np.ndarray
    states: np.ndarray
    fv_increments: np.ndarray
    reflection_events: np.ndarray
    capped_mass: np.ndarray

    def __post_init__(self):
        if self.times.ndim != 1 or self.states.shape[0] != self.times.size:
            raise ParameterError("times and states are inconsistently shaped")
        if self.fv_increments.shape != (self.times.size - 1, self.states.shape[1]):
            raise ParameterError("fv_increments must have one row per interval")
        if np.any(np.diff(self.times) <= 0):
            raise ParameterError("times must be strictly increasing")

    @property
    def n(self) -> int:
        return self.states.shape[1]

    @property
    def fv_l1(self) -> np.ndarray:
        """l1 norm of each recorded drift increment."""
        return np.abs(self.fv_increments).sum(axis=1)

    def write_csv(self, fileobj) -> None:
        n = self.n
        header = ["t"] + [f"x{i}" for i in range(1, n + 1)] + ["fv_l1", "reflections"]
        fileobj.write(",".join(header) + "\n")
        fv = np.concatenate([[0.0], self.fv_l1])
        ev = np.concatenate([[0], self.reflection_events])
        for k, t in enumerate(self.times):
            cells = [format(t, ".17g")]
            cells += [format(v, ".17g") for v in self.states[k]]
            cells += [format(fv[k], ".17g"), str(int(ev[k]))]
            fileobj.write(",".join(cells) + "\n")


def fv_variation(traj: Trajectory) -> float:
    """l1-in-space, sum-in-time variation of the recorded drift increments."""
    return float(np.abs(traj.fv_increments).sum())


@dataclass(frozen=True)
class CoupledPair:
    """Two trajectories on a common grid plus their distance record."""

    a: Trajectory
    b: Trajectory
    coupling: str
    distances: np.ndarray
    merge_time: float | None
    merge_tol: float

    def __post_init__(self):
        if not np.array_equal(self.a.times, self.b.times):
            raise ParameterError("coupled trajectories must share their time grid")
        if self.distances.shape != self.a.times.shape:
            raise ParameterError("distances must align with the time grid")

    def write_csv(self, fileobj) -> None:
        n = self.a.n
        header = (
            ["t"]
            + [f"x{i}" for i in range(1, n + 1)]
            + [f"y{i}" for i in range(1, n + 1)]
            + ["fv_l1", "reflections", "dist"]
        )
        fileobj.write(",".join(header) + "\n")
        fv = np.concatenate([[0.0], self.a.fv_l1 + self.b.fv_l1])
        ev = np.concatenate([[0], self.a.reflection_events + self.b.reflection_events])
        for k, t in enumerate(self.a.times):
            cells = [format(t, ".17g")]
            cells += [format(v, ".17g") for v in self.a.states[k]]
            cells += [format(v, ".17g") for v in self.b.states[k]]
            cells += [format(fv[k], ".17g"), str(int(ev[k])), format(self.distances[k], ".17g")]
            fileobj.write(",".join(cells) + "\n")


@dataclass(frozen=True)
class EnsembleResult:
    """Terminal states and per-path accumulators of an ensemble run.

    ``fv_l1`` is the per-path sum over base steps of the l1 norm of the net
    drift applied within that step; it does not depend on the recording
    stride.  ``series_fv_inc`` (when recording) holds the net drift vector per
    recording interval, shaped (intervals, paths, coords).
    """

    final_states: np.ndarray
    fv_l1: np.ndarray
    reflection_events: np.ndarray
    capped_mass: np.ndarray
    times: np.ndarray | None = None
    states: np.ndarray | None = None
    series_fv_inc: np.ndarray | None = None
    series_events: np.ndarray | None = None
    series_capped: np.ndarray | None = None


@dataclass(frozen=True)
class CoupledEnsembleResult:
    """Distance records of a coupled ensemble on the recorded grid."""

    times: np.ndarray
    distances: np.ndarray  # (paths, len(times))
    final_a: np.ndarray
    final_b: np.ndarray
    merged: np.ndarray
    merge_tol: float
    coupling: str


# ---------------------------------------------------------------------------
# drivers

def simulate_ensemble(
    params: ModelParams,
    cfg: IntegratorConfig,
    x0,
    t_end: float,
    *,
    n_paths: int | None = None,
    record_stride: int | None = None,
    collect_states: bool = False,
    path_offset: int = 0,
) -> EnsembleResult:
    """Advance an ensemble of paths to t_end.

    With ``record_stride`` set, accumulators are drained (and states snapshot
    when ``collect_states``) every that many base steps.  ``path_offset``
    shifts the global path indices so chunked execution reproduces a single
    monolithic run exactly.
    """
    X = _prepare_x0(x0, n_paths)
    n_paths_eff, n = X.shape
    a = params.beta_prime - 1.0
    kernel = _KERNELS[cfg.scheme]
    steps = _n_steps(t_end, cfg.dt)
    noise = _PathNoise(cfg.seed, path_offset + np.arange(n_paths_eff), n, steps)
    acc = _Accum(n_paths_eff, n)
    rows = np.arange(n_paths_eff)
    recording = record_stride is not None

    rec_times = [0.0]
    rec_states = [X.copy()] if collect_states else None
    inc_series, ev_series, cap_series = [], [], []
    interval_net = np.zeros((n_paths_eff, n)) if recording else None
    net_abs = np.empty((n_paths_eff, n))
    total_fv_l1 = np.zeros(n_paths_eff)
    total_events = np.zeros(n_paths_eff, dtype=np.int64)
    total_clipped = np.zeros(n_paths_eff)

    with np.errstate(divide="ignore"):
        for k in range(steps):
            Z = noise.base_step(k)
            try:
                _advance(kernel, a, X, cfg.dt, 0, cfg, rows, Z, noise, acc, True)
            except IntegratorError as e:
                raise IntegratorError(str(e), step_index=k) from None
            if a != 0.0:
                net = acc.fv_net
                if recording:
                    interval_net += net
                np.abs(net, out=net_abs)
                total_fv_l1 += net_abs.sum(axis=1)
                net[:] = 0.0
            last = k == steps - 1
            if recording and ((k + 1) % record_stride == 0 or last):
                events, clipped = acc.drain()
                rec_times.append((k + 1) * cfg.dt)
                if collect_states:
                    rec_states.append(X.copy())
                inc_series.append(interval_net.copy())
                interval_net[:] = 0.0
                ev_series.append(events)
                cap_series.append(clipped)
                total_events += events
                total_clipped += clipped
    if not recording:
        events, clipped = acc.drain()
        total_events += events
        total_clipped += clipped

    return EnsembleResult(
        final_states=X,
        fv_l1=total_fv_l1,
        reflection_events=total_events,
        capped_mass=total_clipped,
        times=np.asarray(rec_times) if recording else None,
        states=np.asarray(rec_states) if collect_states else None,
        series_fv_inc=np.asarray(inc_series) if recording else None,
        series_events=np.asarray(ev_series) if recording else None,
        series_capped=np.asarray(cap_series) if recording else None,
    )


def simulate(
    params: ModelParams,
    cfg: IntegratorConfig,
    x0,
    t_end: float,
    record_stride: int = 1,
) -> Trajectory:
    """Single-path convenience wrapper producing a :class:`Trajectory`."""
    res = simulate_ensemble(
        params, cfg, np.asarray(x0, dtype=float), t_end,
        record_stride=record_stride, collect_states=True,
    )
    return Trajectory(
        times=res.times,
        states=res.states[:, 0, :],
        fv_increments=res.series_fv_inc[:, 0, :],
        reflection_events=res.series_events[:, 0],
        capped_mass=res.series_capped[:, 0],
    )


COUPLINGS = ("synchronous", "reflection")


def _couple_noise(coupling, Xa, Xb, Z):
    if coupling == "synchronous":
        return Z
    diff = Xa - Xb
    norm = np.linalg.norm(diff, axis=1, keepdims=True)
    safe = np.where(norm > 0.0, norm, 1.0)
    e = diff / safe
    zb = Z - 2.0 * np.sum(Z * e, axis=1, keepdims=True) * e
    return np.where(norm > 0.0, zb, Z)


def _advance_pair(kernel, a, Xa, Xb, dt, level, cfg, rows, Z, noise, acc_a, acc_b, coupling):
    """Coupled analogue of :func:`_advance`; Z drives copy a, copy b gets the
    coupling image of the same draw, re-derived at every substep."""
    Xav = Xa[rows]
    Xbv = Xb[rows]
    Ga = Gb = None
    tight = None
    if a != 0.0 and cfg.min_gap > 0.0 and level < cfg.max_subdivisions:
        Ga = _gaps(Xav)
        Gb = _gaps(Xbv)
        thr = cfg.min_gap * 0.25**level
        mask = np.minimum(Ga.min(axis=1), Gb.min(axis=1)) < thr
        if mask.any():
            tight = mask
    cap = cfg.drift_cap
    if cap is not None:
        cap = cap * 0.5**level
    sqrt2dt = math.sqrt(2.0 * dt)
    if tight is None:
        easy_rows, xa, xb, za = rows, Xav, Xbv, Z
        ga, gb = Ga, Gb
    else:
        easy = ~tight
        easy_rows = rows[easy]
        xa, xb, za = Xav[easy], Xbv[easy], Z[easy]
        ga, gb = Ga[easy], Gb[easy]
    if easy_rows.size:
        zb = _couple_noise(coupling, xa, xb, za)
        na, da, ca, ea = kernel(a, xa, ga, dt, sqrt2dt, za, cap)
        nb, db, cb, eb = kernel(a, xb, gb, dt, sqrt2dt, zb, cap)
        Xa[easy_rows] = na
        Xb[easy_rows] = nb
        acc_a.add(easy_rows, da, ca, ea)
        acc_b.add(easy_rows, db, cb, eb)
    if tight is not None:
        hard = rows[tight]
        for _ in range(4):
            z_sub = noise.sub_draw(hard)
            _advance_pair(
                kernel, a, Xa, Xb, 0.25 * dt, level + 1, cfg, hard, z_sub,
                noise, acc_a, acc_b, coupling,
            )


def coupled_ensemble(
    params: ModelParams,
    cfg: IntegratorConfig,
    x0,
    y0,
    coupling: str,
    t_end: float,
    *,
    n_pairs: int = 1,
    record_stride: int = 1,
    path_offset: int = 0,
    collect_series: bool = False,
    merge_tol: float | None = None,
):
    """Drive ``n_pairs`` coupled copies and record their distances.

    Copies merge once their distance drops below merge_tol (default
    sqrt(dt)/10 from the config) and are advanced bit-identically afterwards;
    pass ``merge_tol=0.0`` to keep the copies separate forever, which is what
    semigroup estimators need.  Returns a :class:`CoupledEnsembleResult`, plus
    per-copy series when ``collect_series`` (used to build full
    :class:`CoupledPair` objects).
    """
    if coupling not in COUPLINGS:
        raise ParameterError(f"coupling must be one of {COUPLINGS}, got {coupling!r}")
    Xa = _prepare_x0(x0, n_pairs)
    Xb = _prepare_x0(y0, n_pairs)
    if Xa.shape != Xb.shape:
        raise ParameterError("x0 and y0 must have matching shapes")
    n_pairs_eff, n = Xa.shape
    a = params.beta_prime - 1.0
    kernel = _KERNELS[cfg.scheme]
    steps = _n_steps(t_end, cfg.dt)
    noise = _PathNoise(cfg.seed, path_offset + np.arange(n_pairs_eff), n, steps)
    acc_a = _Accum(n_pairs_eff, n)
    acc_b = _Accum(n_pairs_eff, n)
    merged = np.zeros(n_pairs_eff, dtype=bool)
    merge_step = np.full(n_pairs_eff, -1, dtype=np.int64)
    tol = cfg.merge_tol if merge_tol is None else merge_tol
    if tol < 0:
        raise ParameterError(f"merge_tol must be >= 0, got {merge_tol!r}")
    rows = np.arange(n_pairs_eff)

    rec_times = [0.0]
    rec_dist = [np.linalg.norm(Xa - Xb, axis=1)]
    series = {"ta": [Xa.copy()], "tb": [Xb.copy()]} if collect_series else None
    inc_a = np.zeros((n_pairs_eff, n)) if collect_series else None
    inc_b = np.zeros((n_pairs_eff, n)) if collect_series else None
    drains_a, drains_b = [], []

    with np.errstate(divide="ignore"):
        for k in range(steps):
            Z = noise.base_step(k)
            active = rows[~merged]
            done = rows[merged]
            if active.size:
                _advance_pair(
                    kernel, a, Xa, Xb, cfg.dt, 0, cfg, active, Z[~merged],
                    noise, acc_a, acc_b, coupling,
                )
            if done.size:
                _advance(kernel, a, Xa, cfg.dt, 0, cfg, done, Z[merged], noise, acc_a, False)
                Xb[done] = Xa[done]
                acc_b.fv_net[done] = acc_a.fv_net[done]
                acc_b.events[done] = acc_a.events[done]
                acc_b.clipped[done] = acc_a.clipped[done]
            if a != 0.0:
                if collect_series:
                    inc_a += acc_a.fv_net
                    inc_b += acc_b.fv_net
                acc_a.fv_net[:] = 0.0
                acc_b.fv_net[:] = 0.0
            dist = np.linalg.norm(Xa - Xb, axis=1)
            # tol = 0.0 disables the rule even for pairs that coalesce bitwise
            newly = (~merged) & (dist <= tol) if tol > 0.0 else np.zeros_like(merged)
            if newly.any():
                Xb[newly] = Xa[newly]
                merged |= newly
                merge_step[newly] = k + 1
                dist = np.linalg.norm(Xa - Xb, axis=1)
            last = k == steps - 1
            if (k + 1) % record_stride == 0 or last:
                rec_times.append((k + 1) * cfg.dt)
                rec_dist.append(dist.copy())
                if collect_series:
                    series["ta"].append(Xa.copy())
                    series["tb"].append(Xb.copy())
                    drains_a.append((inc_a.copy(),) + acc_a.drain())
                    drains_b.append((inc_b.copy(),) + acc_b.drain())
                    inc_a[:] = 0.0
                    inc_b[:] = 0.0

    result = CoupledEnsembleResult(
        times=np.asarray(rec_times),
        distances=np.asarray(rec_dist).T,
        final_a=Xa,
        final_b=Xb,
        merged=merged,
        merge_tol=tol,
        coupling=coupling,
    )
    if collect_series:
        return result, series, drains_a, drains_b, merge_step
    return result


def simulate_coupled(
    params: ModelParams,
    cfg: IntegratorConfig,
    x0,
    y0,
    coupling: str,
    t_end: float,
    record_stride: int = 1,
) -> CoupledPair:
    """Single coupled pair with full trajectories for both copies."""
    result, series, drains_a, drains_b, merge_step = coupled_ensemble(
        params, cfg, np.asarray(x0, dtype=float), np.asarray(y0, dtype=float),
        coupling, t_end, n_pairs=1, record_stride=record_stride, collect_series=True,
    )

    def unpack(states, drains):
        incs = np.asarray([d[0][0] for d in drains])
        events = np.asarray([d[1][0] for d in drains])
        clipped = np.asarray([d[2][0] for d in drains])
        return Trajectory(
            times=result.times,
            states=np.asarray([s[0] for s in states]),
            fv_increments=incs,
            reflection_events=events,
            capped_mass=clipped,
        )

    merge_time = float(merge_step[0] * cfg.dt) if merge_step[0] > 0 else None
    return CoupledPair(
        a=unpack(series["ta"], drains_a),
        b=unpack(series["tb"], drains_b),
        coupling=coupling,
        distances=result.distances[0],
        merge_time=merge_time,
        merge_tol=result.merge_tol,
    )
