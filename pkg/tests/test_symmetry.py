import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from simplexbessel import (
    DomainError,
    ExtensionParams,
    ModelParams,
    ParameterError,
    degeneracy_d,
    extended_weight,
    fold_T,
    gap_vector,
    log_density,
    log_extended_weight,
    reflect_H,
    scaling_exponent_h,
)

P2 = ModelParams(n_particles=2, beta=4.0)
EP2 = ExtensionParams(P2, delta=0.05)


# coordinates are float32 values away from the denormal range so that adding
# small even integers is exact in float64 (sector-invariance needs exact shifts)
_coord = st.floats(-5, 5, allow_nan=False, width=32).filter(
    lambda v: v == 0.0 or abs(v) >= 1e-3
)
ambient = st.integers(1, 4).flatmap(
    lambda n: st.lists(_coord, min_size=n, max_size=n).map(np.asarray)
)

simplex_pts = st.integers(1, 4).flatmap(
    lambda n: st.lists(st.integers(1, 40), min_size=n + 1, max_size=n + 1).map(
        lambda w: np.cumsum(np.asarray(w[:-1], dtype=float)) / sum(w)
    )
)


# --- fold -------------------------------------------------------------------

def test_fold_fixed_values():
    assert fold_T(np.array([0.3])) == pytest.approx([0.3])
    assert fold_T(np.array([-0.3])) == pytest.approx([0.3])
    assert fold_T(np.array([1.7])) == pytest.approx([0.3])
    assert fold_T(np.array([2.3])) == pytest.approx([0.3])
    # sorting after the tent
    assert fold_T(np.array([0.9, -0.2])) == pytest.approx([0.2, 0.9])
    # the tent stage is exact in floats: |.| is free, the subtractions in
    # remainder and 2 - z are Sterbenz-exact in these ranges
    z = 2.9585735931288071
    assert float(fold_T(np.array([z]))[0]) == z - 2.0
    y = 0.9585735931288071
    assert float(fold_T(np.array([-y]))[0]) == y
    assert float(fold_T(np.array([1.0 + y]))[0]) == 2.0 - (1.0 + y)


@given(simplex_pts)
def test_fold_fixes_the_simplex(x):
    assert fold_T(x) == pytest.approx(x, abs=0)


@given(ambient, ambient)
def test_fold_is_1_lipschitz(y, z):
    if y.size != z.size:
        z = np.resize(z, y.size)
    dy = np.linalg.norm(fold_T(y) - fold_T(z))
    assert dy <= np.linalg.norm(y - z) + 1e-12


@given(ambient)
def test_fold_lands_in_the_simplex(y):
    t = fold_T(y)
    assert np.all(np.diff(t) >= 0)
    assert t.min() >= 0.0 and t.max() <= 1.0
    # idempotent
    assert fold_T(t) == pytest.approx(t, abs=0)


# --- wall reflections ---------------------------------------------------------

def test_reflection_fixed_value():
    got = reflect_H(0, np.array([0.2, 0.3]))
    assert got == pytest.approx([0.7, 0.8])


def test_reflection_top_is_identity():
    x = np.array([0.1, 0.4, 0.6])
    assert reflect_H(3, x) == pytest.approx(x, abs=0)
    with pytest.raises(DomainError):
        reflect_H(4, x)
    with pytest.raises(DomainError):
        reflect_H(-1, x)


@given(simplex_pts, st.data())
def test_reflection_involutive_and_measure_preserving(x, data):
    i = data.draw(st.integers(0, x.size))
    hx = reflect_H(i, x)
    # stays in the simplex
    g = gap_vector(hx)
    assert g.min() >= -1e-12
    # involution
    assert reflect_H(i, hx) == pytest.approx(x, abs=1e-12)
    # permutes the gap multiset, hence preserves the stationary density
    assert np.sort(g) == pytest.approx(np.sort(gap_vector(x)), abs=1e-12)
    p = ModelParams(n_particles=x.size, beta=2.0)
    interior = gap_vector(x).min() > 1e-9 and g.min() > 1e-9
    if interior:
        assert log_density(p, hx) == pytest.approx(float(log_density(p, x)), abs=1e-9)


# --- extended weight ----------------------------------------------------------

def test_weight_matches_density_inside_collar():
    y = np.array([-0.35, 0.6])  # folds to (0.35, 0.6), top gap 0.4 > delta
    lw = log_extended_weight(EP2, y)
    assert lw == pytest.approx(float(log_density(P2, fold_T(y))), abs=1e-13)


def test_weight_branch_outside_collar():
    y = np.array([0.2, 0.99])  # top gap 0.01 < delta = 0.05
    a = P2.beta_prime - 1.0
    lw_expected = float(log_density(P2, fold_T(y))) - a * math.log(0.01) + a * math.log(0.05)
    assert log_extended_weight(EP2, y) == pytest.approx(lw_expected, abs=1e-12)


def test_weight_constant_when_beta_prime_is_one():
    ep = ExtensionParams(ModelParams(n_particles=2, beta=3.0), delta=0.05)
    vals = extended_weight(ep, np.array([[0.1, 0.2], [-3.7, 0.99], [5.0, -5.0]]))
    assert vals == pytest.approx([2.0, 2.0, 2.0], abs=1e-13)


@given(ambient, st.data())
def test_weight_sector_invariance(y, data):
    """Sign flips, permutations and 2-periodic shifts leave the weight alone."""
    p = ModelParams(n_particles=y.size, beta=3.7)
    ep = ExtensionParams(p, delta=0.04)
    signs = np.asarray(
        data.draw(st.lists(st.sampled_from([-1.0, 1.0]), min_size=y.size, max_size=y.size))
    )
    shifts = 2.0 * np.asarray(
        data.draw(st.lists(st.integers(-2, 2), min_size=y.size, max_size=y.size)),
        dtype=float,
    )
    perm = data.draw(st.permutations(list(range(y.size))))
    y2 = (signs * y + shifts)[list(perm)]
    a, b = log_extended_weight(ep, y), log_extended_weight(ep, y2)
    if np.isfinite(a) and np.isfinite(b):
        assert b == pytest.approx(float(a), abs=1e-9)
    else:
        assert a == b


@given(ambient)
def test_weight_comparable_to_frozen_branch(y):
    """Swapping the top-gap factor for its frozen value moves log w by at most
    |beta'-1| * log(1/delta) plus a small safety margin."""
    p = ModelParams(n_particles=y.size, beta=1.5)
    ep = ExtensionParams(p, delta=0.4 / (2.0 * (y.size + 2)))
    a = p.beta_prime - 1.0
    t = fold_T(y)
    g_low = np.diff(t, prepend=0.0)
    if g_low.min() <= 1e-9:
        return
    frozen = (
        -p.log_normalization() + a * (np.sum(np.log(g_low)) + math.log(ep.delta))
    )
    lw = float(log_extended_weight(ep, y))
    assert abs(lw - frozen) <= abs(a) * math.log(1.0 / ep.delta) + math.log(2.0)


def test_extension_params_validation():
    with pytest.raises(ParameterError):
        ExtensionParams(P2, delta=0.2)  # bound for N=2 is 1/8
    with pytest.raises(ParameterError):
        ExtensionParams(P2, delta=0.0)


# --- degeneracy and scaling exponent ------------------------------------------

def test_degeneracy_values():
    assert degeneracy_d(np.array([0.0, 0.3])) == 1
    assert degeneracy_d(np.array([0.3, 0.3])) == 1  # tie after folding
    assert degeneracy_d(np.array([0.0, 0.0])) == 2
    assert degeneracy_d(np.array([0.2, 0.5])) == 0
    assert degeneracy_d(np.array([-0.3, 0.3])) == 1  # folds to a tie


def test_scaling_exponent_values():
    # d=1 at beta'=0.5 on three particles: h = 3 - 1 + 0.5 = 2.5
    p = ModelParams(n_particles=3, beta=2.0)
    assert scaling_exponent_h(p, np.array([0.0, 0.1, 0.2])) == pytest.approx(2.5)
    # d=0 gives h = N regardless of beta
    assert scaling_exponent_h(P2, np.array([0.2, 0.5])) == pytest.approx(2.0)
    # full collapse gives h = beta' * N
    p6 = ModelParams(n_particles=2, beta=6.0)
    assert scaling_exponent_h(p6, np.array([0.0, 0.0])) == pytest.approx(4.0)


@given(ambient)
def test_degeneracy_counts_vanishing_low_gaps(y):
    d = degeneracy_d(y)
    t = fold_T(y)
    assert d == int(np.sum(np.diff(t, prepend=0.0) == 0.0))
    assert 0 <= d <= y.size
