"""Distributional and reproducibility tests for the exact stationary sampler.

The joint law of the gaps is symmetric Dirichlet, so every check here has an
exact closed-form oracle: Beta marginals, the aggregation/normalization
independence property, and plain moment identities.
"""

import io

import numpy as np
import pytest
import scipy.stats as st
from hypothesis import given, settings
from hypothesis import strategies as hst

from simplexbessel import (
    ModelParams,
    ParameterError,
    RngStream,
    degeneracy_d,
    gamma_variates,
    path_stream,
    probe_points,
    sample_invariant,
    sample_uniform_simplex,
)
from simplexbessel.sampler import SampleBatch

# 1% two-sided KS critical value, asymptotic: c / sqrt(n)
KS_CRIT_1PCT = 1.6276


def test_gap_means_within_three_se():
    p = ModelParams(n_particles=3, beta=2.0)
    batch = sample_invariant(p, RngStream(101, 0), 20_000)
    gaps = np.diff(batch.points, axis=1, prepend=0.0, append=1.0)
    _, var = (0.25, p.beta_prime * (p.beta - p.beta_prime) / (p.beta**2 * (p.beta + 1)))
    se = np.sqrt(var / batch.count)
    assert np.all(np.abs(gaps.mean(axis=0) - 0.25) < 3 * se)


def test_first_coordinate_beta_marginal_ks():
    # x^1 is one Dirichlet component: Beta(beta', N*beta')
    p = ModelParams(n_particles=3, beta=2.0)
    batch = sample_invariant(p, RngStream(102, 0), 20_000)
    stat = st.kstest(batch.points[:, 0], st.beta(0.5, 1.5).cdf).statistic
    assert stat < KS_CRIT_1PCT / np.sqrt(batch.count)


def test_tail_probability_exact_value():
    # N=2, beta=3: x^1 ~ Beta(1, 2), so P(x^1 > 1/2) = 1/4
    p = ModelParams(n_particles=2, beta=3.0)
    batch = sample_invariant(p, RngStream(103, 0), 40_000)
    frac = (batch.points[:, 0] > 0.5).mean()
    se = np.sqrt(0.25 * 0.75 / batch.count)
    assert abs(frac - 0.25) < 3 * se


@pytest.mark.parametrize("beta", [1.5, 3.0, 6.0])
def test_joint_law_complete_characterization(beta):
    """Whole-law test at N=2 with no quadrature.

    For Dirichlet gaps, u = x1/x2 and v = x2 are independent with exact Beta
    laws Beta(b', b') and Beta(2b', b').  Pushing both through their CDFs
    gives an iid-uniform pair; KS on each plus a chi-square on the 10x10
    occupancy grid then pins the full 2-d law.
    """
    p = ModelParams(n_particles=2, beta=beta)
    bp = p.beta_prime
    pts = sample_invariant(p, RngStream(104, int(beta * 10)), 20_000).points
    n = pts.shape[0]
    u = st.beta(bp, bp).cdf(pts[:, 0] / pts[:, 1])
    v = st.beta(2 * bp, bp).cdf(pts[:, 1])
    assert st.kstest(u, "uniform").statistic < KS_CRIT_1PCT / np.sqrt(n)
    assert st.kstest(v, "uniform").statistic < KS_CRIT_1PCT / np.sqrt(n)
    counts, _, _ = np.histogram2d(u, v, bins=10, range=[[0, 1], [0, 1]])
    expected = n / 100.0
    chi2 = ((counts - expected) ** 2 / expected).sum()
    assert chi2 < st.chi2(99).ppf(0.999)


def test_reproducible_and_stream_isolated():
    p = ModelParams(n_particles=4, beta=3.0)
    a = sample_invariant(p, RngStream(7, 5), 100).points
    # consuming a different stream in between must not disturb this one
    sample_invariant(p, RngStream(7, 6), 1000)
    b = sample_invariant(p, RngStream(7, 5), 100).points
    assert np.array_equal(a, b)
    c = sample_invariant(p, RngStream(8, 5), 100).points
    assert not np.array_equal(a, c)


def test_child_offsets_and_path_streams_distinct():
    base = RngStream(3, 12)
    assert base.child(4) == RngStream(3, 16)
    keys = {
        path_stream(base, p, s).stream_id for p in range(50) for s in (0, 1)
    }
    assert len(keys) == 100
    assert all(k >> 32 == 12 for k in keys)


def test_gamma_variates_small_shape_ks():
    gen = RngStream(9, 0).generator()
    draws = gamma_variates(gen, 0.3, 20_000)
    assert np.all(draws > 0)
    stat = st.kstest(draws, st.gamma(a=0.3).cdf).statistic
    assert stat < KS_CRIT_1PCT / np.sqrt(draws.size)


def test_gamma_variates_rejects_bad_shape():
    gen = RngStream(9, 1).generator()
    with pytest.raises(ParameterError, match="shape"):
        gamma_variates(gen, 0.0, 10)


@pytest.mark.parametrize("d_target", [0, 1, 2, 3])
def test_probe_points_hit_requested_degeneracy(d_target):
    pts = probe_points(3, d_target, 40, RngStream(11, d_target))
    assert np.all(degeneracy_d(pts) == d_target)


def test_probe_points_errors():
    with pytest.raises(ParameterError, match="d_target"):
        probe_points(3, 4, 5, RngStream(0, 0))
    with pytest.raises(ParameterError, match="d_target"):
        probe_points(3, -1, 5, RngStream(0, 0))
    with pytest.raises(ParameterError, match="cannot fit"):
        probe_points(12, 0, 5, RngStream(0, 0))


def test_uniform_simplex_sorted_with_beta_max():
    pts = sample_uniform_simplex(3, RngStream(13, 0), 20_000)
    assert np.all(np.diff(pts, axis=1) >= 0)
    # max of 3 iid uniforms ~ Beta(3, 1)
    stat = st.kstest(pts[:, -1], st.beta(3, 1).cdf).statistic
    assert stat < KS_CRIT_1PCT / np.sqrt(pts.shape[0])


def test_sample_batch_shape_validation_and_csv():
    p = ModelParams(n_particles=2, beta=3.0)
    with pytest.raises(ParameterError, match="shape"):
        SampleBatch(points=np.zeros((4, 3)), params=p, seed_record=RngStream(0, 0))
    batch = sample_invariant(p, RngStream(14, 0), 5)
    buf = io.StringIO()
    batch.write_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "x1,x2"
    parsed = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    assert np.array_equal(parsed, batch.points)  # .17g round-trips exactly


def test_sample_invariant_count_validation():
    p = ModelParams(n_particles=1, beta=1.0)
    with pytest.raises(ParameterError, match="count"):
        sample_invariant(p, RngStream(0, 0), 0)


@settings(max_examples=25)
@given(
    n=hst.integers(min_value=1, max_value=6),
    beta=hst.floats(min_value=0.2, max_value=12.0, allow_nan=False),
    seed=hst.integers(min_value=0, max_value=2**32),
)
def test_samples_lie_in_closed_simplex(n, beta, seed):
    p = ModelParams(n_particles=n, beta=beta)
    pts = sample_invariant(p, RngStream(seed, 0), 64).points
    assert np.all(pts >= 0.0) and np.all(pts <= 1.0)
    assert np.all(np.diff(pts, axis=1) >= 0.0)
