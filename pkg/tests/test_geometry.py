import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tentspace.geometry import (GeometryError, WhitneyParams, ball_contains, chain_holds,
                                check_inclusion_suite, cone_contains, derive_params,
                                tent_contains, torus_distance_n, whitney_box_contains)


@st.composite
def whitney(draw):
    a2 = draw(st.floats(1.0 + 1e-6, 50.0))
    frac = draw(st.floats(1e-6, 1.0 - 1e-6))
    return WhitneyParams(frac / a2, a2)


def test_default_derived_values():
    d = derive_params(WhitneyParams(0.25, 2.0))
    assert d.alpha0 == pytest.approx(0.375)
    assert d.alphaC == pytest.approx(2.5)
    assert d.alphaT == pytest.approx(2.125)
    assert d.alphaStarUpper == pytest.approx(2.25)
    assert d.alphaStarLower == pytest.approx(0.25)
    assert d.star == pytest.approx((0.25 / (1 + math.sqrt(2)), math.sqrt(2)))
    assert d.doubleStar[1] == pytest.approx(2 ** 0.25)


@given(whitney())
def test_chain_holds_for_consistent_parameters(w):
    assert chain_holds(w)
    c = derive_params(w).chain(w)
    assert list(c) == sorted(c)


@pytest.mark.parametrize("a1,a2", [(0.5, 2.0), (0.0, 2.0), (0.1, 1.0), (0.7, 1.5), (-0.1, 3.0)])
def test_inconsistent_parameters_rejected(a1, a2):
    with pytest.raises(GeometryError):
        WhitneyParams(a1, a2)


@given(st.floats(0, 1, exclude_max=True), st.floats(0, 1, exclude_max=True),
       st.floats(0, 1, exclude_max=True))
def test_torus_distance_is_a_metric(a, b, c):
    d = lambda x, y: float(torus_distance_n(np.float64(x), np.float64(y), 1))
    assert 0 <= d(a, b) <= 0.5
    assert d(a, b) == d(b, a)
    assert d(a, c) <= d(a, b) + d(b, c) + 1e-15


def test_torus_distance_wraps():
    assert torus_distance_n(np.float64(0.95), np.float64(0.05), 1) == pytest.approx(0.1)
    assert torus_distance_n(np.array([0.95, 0.0]), np.array([0.05, 0.0]), 2) == pytest.approx(0.1)


def test_membership_predicates():
    assert cone_contains(0.5, 0.55, 0.1, 1.0)
    assert not cone_contains(0.5, 0.65, 0.1, 1.0)
    # tent of B(0.5, 0.2): B(y, a t) inside B
    assert tent_contains(0.5, 0.2, 0.5, 0.1, 1.0)
    assert not tent_contains(0.5, 0.2, 0.62, 0.1, 1.0)
    assert whitney_box_contains(0.5, 0.1, 0.52, 0.15, (0.25, 2.0))
    assert not whitney_box_contains(0.5, 0.1, 0.52, 0.21, (0.25, 2.0))
    assert ball_contains(0.0, 0.1, 0.95)


@pytest.mark.parametrize("n", [1, 2])
def test_inclusions_have_no_counterexamples(n):
    res = check_inclusion_suite(WhitneyParams(0.25, 2.0), trials=3000, seed=7, n=n)
    assert len(res) == 10
    assert all(r.passed and r.trials == 3000 for r in res), [(r.name, r.witness) for r in res]


@given(whitney(), st.integers(0, 2 ** 16))
def test_inclusions_hold_across_parameters(w, seed):
    res = check_inclusion_suite(w, trials=200, seed=seed)
    assert all(r.passed for r in res), [(r.name, r.witness) for r in res if not r.passed]


def test_inclusion_suite_rejects_bad_arguments():
    with pytest.raises(GeometryError):
        check_inclusion_suite(WhitneyParams(0.25, 2.0), trials=0, seed=0)
    with pytest.raises(GeometryError):
        check_inclusion_suite(WhitneyParams(0.25, 2.0), trials=5, seed=0, n=3)
