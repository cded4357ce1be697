"""Integrator, ensemble-driver and coupling tests.

Oracles: the zero-drift case is folded Brownian motion (exact variance of the
coordinate sum), the drift accumulator vanishes identically at the critical
parameter, and chunked/monolithic runs must agree bit for bit because the
noise is keyed by global path index.
"""

import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst

from simplexbessel import (
    IntegratorConfig,
    ModelParams,
    ParameterError,
    RngStream,
    coupled_ensemble,
    fv_variation,
    in_closed_simplex,
    sample_invariant,
    simulate,
    simulate_coupled,
    simulate_ensemble,
    step,
)


def _params(n=2, beta=6.0):
    return ModelParams(n_particles=n, beta=beta)


# ---------------------------------------------------------------------------
# configuration plumbing


def test_config_defaults_and_derived_values():
    cfg = IntegratorConfig(dt=1e-4, seed=RngStream(0, 0))
    assert cfg.min_gap == pytest.approx(10.0 * math.sqrt(2e-4))
    assert cfg.drift_cap == pytest.approx(0.25 * cfg.min_gap)
    assert cfg.merge_tol == pytest.approx(math.sqrt(1e-4) / 10.0)


@pytest.mark.parametrize(
    "kwargs,match",
    [
        (dict(dt=0.0), "dt"),
        (dict(dt=-1e-3), "dt"),
        (dict(dt=1e-3, scheme="euler"), "scheme"),
        (dict(dt=1e-3, min_gap=-0.1), "min_gap"),
        (dict(dt=1e-3, drift_cap=0.0), "drift_cap"),
        (dict(dt=1e-3, drift_cap="fast"), "drift_cap"),
        (dict(dt=1e-3, max_subdivisions=-1), "max_subdivisions"),
    ],
)
def test_config_validation(kwargs, match):
    with pytest.raises(ParameterError, match=match):
        IntegratorConfig(seed=RngStream(0, 0), **kwargs)


def test_t_end_must_align_with_dt():
    p = _params()
    cfg = IntegratorConfig(dt=1e-3, seed=RngStream(0, 0))
    with pytest.raises(ParameterError, match="multiple"):
        simulate(p, cfg, [0.3, 0.6], 0.0015)
    with pytest.raises(ParameterError, match="t_end"):
        simulate(p, cfg, [0.3, 0.6], -1.0)


def test_x0_outside_simplex_rejected():
    p = _params()
    cfg = IntegratorConfig(dt=1e-3, seed=RngStream(0, 0))
    with pytest.raises(ParameterError, match="simplex"):
        simulate(p, cfg, [0.6, 0.3], 0.01)


# ---------------------------------------------------------------------------
# zero-drift oracle: folded Brownian motion


def test_critical_beta_is_brownian_with_zero_drift_mass():
    # beta' = 1 kills the drift; the coordinate sum is then a martingale whose
    # variance folding barely touches at this horizon.
    p = _params(2, 3.0)
    cfg = IntegratorConfig(dt=1e-4, seed=RngStream(12, 0), min_gap=0.0, drift_cap=None)
    res = simulate_ensemble(p, cfg, np.array([0.35, 0.65]), 0.01, n_paths=4000)
    assert np.all(res.fv_l1 == 0.0)
    change = res.final_states.sum(axis=1) - 1.0
    target = 4.0 * 0.01  # N copies of Var = 2t
    assert abs(change.var(ddof=1) - target) < 0.05 * target


def test_fv_increments_identically_zero_at_critical_beta():
    p = _params(3, 4.0)
    cfg = IntegratorConfig(dt=1e-3, seed=RngStream(12, 1))
    traj = simulate(p, cfg, [0.2, 0.5, 0.8], 0.05)
    assert np.all(traj.fv_increments == 0.0)
    assert fv_variation(traj) == 0.0


# ---------------------------------------------------------------------------
# accounting


def test_fv_total_is_stride_independent_and_netting_contracts():
    p = _params(2, 1.2)  # beta' < 1: strong drift, substepping active
    x0 = np.array([0.3, 0.7])
    cfg = IntegratorConfig(dt=1e-3, seed=RngStream(21, 0))
    fine = simulate(p, cfg, x0, 0.05, record_stride=1)
    coarse = simulate(p, cfg, x0, 0.05, record_stride=10)
    ens = simulate_ensemble(p, cfg, x0, 0.05, n_paths=1)
    # stride-1 recording nets exactly per base step, matching the accumulator
    assert fv_variation(fine) == pytest.approx(float(ens.fv_l1[0]), rel=1e-12)
    # coarser recording nets more cancellation, never more variation
    assert fv_variation(coarse) <= fv_variation(fine) + 1e-12
    assert fine.fv_increments.shape == (50, 2)
    assert coarse.fv_increments.shape == (5, 2)


def test_capped_mass_accounting():
    p = _params(2, 1.2)
    x0 = np.array([0.3, 0.7])
    tight = IntegratorConfig(
        dt=1e-3, seed=RngStream(22, 0), min_gap=0.0, drift_cap=1e-6
    )
    res = simulate_ensemble(p, tight, x0, 0.02, n_paths=8)
    assert np.all(res.capped_mass > 0.0)
    free = IntegratorConfig(dt=1e-3, seed=RngStream(22, 0), min_gap=0.0, drift_cap=None)
    res2 = simulate_ensemble(p, free, x0, 0.02, n_paths=8)
    assert np.all(res2.capped_mass == 0.0)


def test_chunked_runs_reproduce_monolithic_bitwise():
    p = _params(2, 1.5)  # beta' = 0.5 exercises subdivision paths
    cfg = IntegratorConfig(dt=1e-3, seed=RngStream(23, 0))
    x0 = sample_invariant(p, RngStream(23, 1), 20).points
    whole = simulate_ensemble(p, cfg, x0, 0.05)
    lo = simulate_ensemble(p, cfg, x0[:10], 0.05, path_offset=0)
    hi = simulate_ensemble(p, cfg, x0[10:], 0.05, path_offset=10)
    assert np.array_equal(whole.final_states, np.vstack([lo.final_states, hi.final_states]))
    assert np.array_equal(whole.fv_l1, np.concatenate([lo.fv_l1, hi.fv_l1]))
    assert np.array_equal(
        whole.reflection_events, np.concatenate([lo.reflection_events, hi.reflection_events])
    )
    assert np.array_equal(whole.capped_mass, np.concatenate([lo.capped_mass, hi.capped_mass]))


def test_coupled_chunking_bitwise():
    p = _params()
    cfg = IntegratorConfig(dt=1e-3, seed=RngStream(24, 0))
    x0 = sample_invariant(p, RngStream(24, 1), 8).points
    y0 = sample_invariant(p, RngStream(24, 2), 8).points
    whole = coupled_ensemble(p, cfg, x0, y0, "reflection", 0.05, n_pairs=8)
    lo = coupled_ensemble(p, cfg, x0[:4], y0[:4], "reflection", 0.05, n_pairs=4)
    hi = coupled_ensemble(
        p, cfg, x0[4:], y0[4:], "reflection", 0.05, n_pairs=4, path_offset=4
    )
    assert np.array_equal(whole.distances, np.vstack([lo.distances, hi.distances]))
    assert np.array_equal(whole.final_a, np.vstack([lo.final_a, hi.final_a]))


# ---------------------------------------------------------------------------
# couplings


def test_identical_starts_merge_immediately():
    p = _params()
    cfg = IntegratorConfig(dt=1e-3, seed=RngStream(25, 0))
    pair = simulate_coupled(p, cfg, [0.3, 0.6], [0.3, 0.6], "synchronous", 0.02)
    assert np.all(pair.distances == 0.0)
    assert np.array_equal(pair.a.states, pair.b.states)


def test_merged_pairs_stay_bitwise_merged():
    p = _params()
    cfg = IntegratorConfig(dt=1e-3, seed=RngStream(26, 0))
    x0 = sample_invariant(p, RngStream(26, 1), 64).points
    y0 = sample_invariant(p, RngStream(26, 2), 64).points
    res = coupled_ensemble(p, cfg, x0, y0, "reflection", 1.0, n_pairs=64, record_stride=100)
    assert res.merged.any()  # reflection at this horizon forces meetings
    assert np.array_equal(res.final_a[res.merged], res.final_b[res.merged])
    # distance is exactly zero from the merge on
    last = res.distances[:, -1]
    assert np.all(last[res.merged] == 0.0)


def test_merge_tol_zero_disables_merging():
    p = _params()
    cfg = IntegratorConfig(dt=1e-3, seed=RngStream(26, 0))
    x0 = sample_invariant(p, RngStream(26, 1), 32).points
    y0 = sample_invariant(p, RngStream(26, 2), 32).points
    res = coupled_ensemble(
        p, cfg, x0, y0, "synchronous", 1.0, n_pairs=32, record_stride=100, merge_tol=0.0
    )
    assert not res.merged.any()
    # contraction still drives distances below the default threshold, so the
    # override (not the dynamics) is what kept the copies separate
    assert res.distances[:, -1].min() < cfg.merge_tol


def test_merge_tol_validation_and_coupling_names():
    p = _params()
    cfg = IntegratorConfig(dt=1e-3, seed=RngStream(0, 0))
    with pytest.raises(ParameterError, match="merge_tol"):
        coupled_ensemble(p, cfg, [0.3, 0.6], [0.2, 0.5], "synchronous", 0.01, merge_tol=-1.0)
    with pytest.raises(ParameterError, match="coupling"):
        coupled_ensemble(p, cfg, [0.3, 0.6], [0.2, 0.5], "mirror", 0.01)
    with pytest.raises(ParameterError, match="rows"):
        coupled_ensemble(
            p, cfg, np.zeros((3, 2)) + [0.3, 0.6], np.zeros((3, 2)) + [0.2, 0.5],
            "reflection", 0.01, n_pairs=2,
        )
    with pytest.raises(ParameterError, match="matching"):
        coupled_ensemble(p, cfg, [0.3, 0.6], [[0.2, 0.5, 0.8]], "reflection", 0.01)


def test_both_couplings_contract_at_convex_parameters():
    p = _params()
    cfg = IntegratorConfig(dt=1e-3, seed=RngStream(27, 0), min_gap=math.sqrt(2e-3))
    x0 = sample_invariant(p, RngStream(27, 1), 200).points
    y0 = sample_invariant(p, RngStream(27, 2), 200).points
    sep0 = np.linalg.norm(x0 - y0, axis=1).mean()
    for coupling in ("synchronous", "reflection"):
        res = coupled_ensemble(p, cfg, x0, y0, coupling, 0.5, n_pairs=200, record_stride=500)
        assert res.distances[:, -1].mean() < 0.5 * sep0


# ---------------------------------------------------------------------------
# trajectories and CSV


def test_trajectory_csv_layout():
    p = _params(2, 2.0)
    cfg = IntegratorConfig(dt=1e-3, seed=RngStream(28, 0))
    traj = simulate(p, cfg, [0.3, 0.6], 0.005)
    buf = io.StringIO()
    traj.write_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "t,x1,x2,fv_l1,reflections"
    assert len(lines) == 2 + traj.times.size - 1
    first = lines[1].split(",")
    assert float(first[0]) == 0.0 and first[-2] == "0" and first[-1] == "0"
    parsed = np.array([[float(v) for v in ln.split(",")[1:3]] for ln in lines[1:]])
    assert np.array_equal(parsed, traj.states)


def test_coupled_pair_csv_has_distance_column():
    p = _params()
    cfg = IntegratorConfig(dt=1e-3, seed=RngStream(28, 1))
    pair = simulate_coupled(p, cfg, [0.3, 0.6], [0.2, 0.5], "reflection", 0.004)
    buf = io.StringIO()
    pair.write_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "t,x1,x2,y1,y2,fv_l1,reflections,dist"
    assert float(lines[1].split(",")[-1]) == pytest.approx(pair.distances[0])


def test_gap_em_scheme_runs_and_stays_in_simplex():
    p = _params(3, 2.0)
    cfg = IntegratorConfig(dt=1e-3, seed=RngStream(29, 0), scheme="gap_em")
    res = simulate_ensemble(
        p, cfg, sample_invariant(p, RngStream(29, 1), 16).points, 0.05,
        record_stride=10, collect_states=True,
    )
    assert np.all(in_closed_simplex(res.states.reshape(-1, 3)))


def test_single_step_returns_displacement():
    p = _params(2, 1.5)
    cfg = IntegratorConfig(dt=1e-4, seed=RngStream(0, 0), drift_cap=None)
    x1, disp = step(p, cfg, np.array([0.3, 0.6]), np.zeros(2))
    # noiseless step moves by exactly the drift displacement, then folds/sorts
    assert np.allclose(np.sort(np.array([0.3, 0.6]) + disp), x1)
    with pytest.raises(ParameterError, match="1-d"):
        step(p, cfg, np.zeros((2, 2)), np.zeros((2, 2)))


@settings(max_examples=20, deadline=None)
@given(
    n=hst.integers(min_value=1, max_value=3),
    beta_prime=hst.floats(min_value=0.3, max_value=3.0),
    seed=hst.integers(min_value=0, max_value=2**31),
)
def test_simulation_confined_to_simplex(n, beta_prime, seed):
    p = ModelParams(n_particles=n, beta=beta_prime * (n + 1))
    cfg = IntegratorConfig(dt=5e-3, seed=RngStream(seed, 0))
    x0 = sample_invariant(p, RngStream(seed, 1), 8).points
    res = simulate_ensemble(p, cfg, x0, 0.1, record_stride=4, collect_states=True)
    flat = res.states.reshape(-1, n)
    assert np.all(in_closed_simplex(flat))
