from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tentspace.factorization import (FACTORIZERS, FactorizationError, HolderTriplet,
                                     box_holder_chain, check_holder, check_m1, check_m2,
                                     check_multiplication, factorize_F1, factorize_F2,
                                     factorize_F3, factorize_general, holder_relation,
                                     lattice_covering, power_split)
from tentspace.functionals import INF, NormSpec, tent_norm, whitney_average
from tentspace.geometry import WhitneyParams, derive_params
from tentspace.grid import GridSpec, random_function, read_grid_function

S0 = NormSpec(2, 2, 2, 0)


@pytest.fixture(scope="module")
def spec():
    return GridSpec(n=1, Ny=128, t_levels=40)


@pytest.fixture(scope="module")
def u(spec):
    return random_function(spec, "smooth-bump-mix", 4)


def _check_factors(res, u):
    scale = u.abs.max()
    assert res.reconstruction_error <= 1e-12 * scale
    off = ~u.support()
    for f in res.factors:
        assert np.all(f.values >= 0) and np.all(f.values[off] == 0)
        assert np.all(np.isfinite(f.values))
    assert np.allclose(res.product().values, u.abs, rtol=1e-12, atol=0)
    assert all(np.isfinite(n) and n > 0 for n in res.norms)
    assert np.isfinite(res.constant) and res.constant > 0


@pytest.mark.parametrize("name", sorted(FACTORIZERS))
@pytest.mark.parametrize("s0", [S0, NormSpec(2, 2, 2, -1), NormSpec(4, 2, 1, 0.5)], ids=str)
def test_constructions_reconstruct_exactly(spec, u, name, s0):
    res = FACTORIZERS[name](u, s0)
    _check_factors(res, u)
    assert res.source_norm == pytest.approx(tent_norm(u, s0))


def test_target_spaces(u):
    assert [str(s) for s in factorize_F1(u, S0).target_specs] == [
        "T[p=2,q=2,r=inf,beta=0]", "T[p=inf,q=inf,r=2,beta=0.0]"]
    assert [(s.p, s.q, s.r) for s in factorize_F2(u, S0).target_specs] == [(2, INF, INF), (INF, 2, 2)]
    assert [(s.p, s.q, s.r) for s in factorize_F3(u, S0).target_specs] == [
        (2, INF, INF), (INF, 2, INF), (INF, INF, 2)]


def test_f1_first_factor_is_star_average(spec, u):
    res = factorize_F1(u, S0)
    star = whitney_average(u, 2, derive_params(S0.whitney).star).values
    supp = u.support()
    assert np.allclose(res.factors[0].values[supp], star[supp], rtol=1e-14)
    assert res.diagnostics["covering_bound_holds"]


def test_f3_is_trivial_in_infinite_outer_exponent(u):
    res = factorize_F3(u, NormSpec(INF, 2, 2, 0))
    assert np.array_equal(res.factors[0].values, u.support().astype(float))


@pytest.mark.parametrize("s0", [S0, NormSpec(INF, 2, 2, -1), NormSpec(2, INF, 2, -0.5)], ids=str)
def test_constants_translation_invariant(u, s0):
    for name in ("F1", "F3"):
        a = FACTORIZERS[name](u, s0).constant
        b = FACTORIZERS[name](u.shifted(37), s0).constant
        assert abs(a - b) <= 1e-10 * a


def test_f2_rejections(spec):
    u = random_function(spec, "tent-indicator", 3)
    with pytest.raises(FactorizationError, match="vanishes"):
        factorize_F2(u, S0)
    v = random_function(spec, "smooth-bump-mix", 1)
    with pytest.raises(FactorizationError, match="ptilde"):
        factorize_F2(v, S0, ptilde=2.0)
    with pytest.raises(FactorizationError, match="finite"):
        factorize_F2(v, NormSpec(INF, 2, 2))
    with pytest.raises(FactorizationError, match="Whitney exponent"):
        factorize_F1(v, NormSpec(2, 2))
    with pytest.raises(FactorizationError, match="non-finite"):
        factorize_F1(v.with_values(np.where(v.values > 0, INF, 0.0)), S0)


def test_holder_bookkeeping():
    assert holder_relation(4.0, 4.0, 2.0) and holder_relation(INF, 3, 3)
    assert not holder_relation(3.0, 3.0, 2.0)
    # 1/3 + 1/6 = 1/2 only holds exactly in rationals
    assert holder_relation(3.0, 6.0, 2.0)
    assert HolderTriplet(3.0, 6.0, 2.0).theta == Fraction(2, 3)
    assert HolderTriplet(INF, INF, INF).theta == Fraction(1, 2)
    with pytest.raises(FactorizationError):
        HolderTriplet(3.0, 3.0, 2.0)


def test_check_holder_names_coordinate():
    with pytest.raises(FactorizationError, match="coordinate q"):
        check_holder(S0, NormSpec(4, 3, 4), NormSpec(4, 4, 4))
    with pytest.raises(FactorizationError, match="coordinate beta"):
        check_holder(S0, NormSpec(4, 4, 4, 1), NormSpec(4, 4, 4, 0))
    with pytest.raises(FactorizationError, match="Whitney"):
        check_holder(S0, NormSpec(4, 4, 4, whitney=WhitneyParams(0.2, 2)), NormSpec(4, 4, 4))


@pytest.mark.parametrize("s1,s2", [
    (NormSpec(4, 4, 4, 0), NormSpec(4, 4, 4, 0)),
    (NormSpec(4, 4, INF, -1 / 3), NormSpec(4, 4, 2, 1 / 3)),
    (NormSpec(3, INF, 6, 0), NormSpec(6, 2, 3, 0)),
], ids=["halves", "mixed-r", "thirds"])
def test_general_factorization(u, s1, s2):
    res = factorize_general(u, S0, s1, s2)
    _check_factors(res, u)
    assert res.target_specs == [s1, s2]


def test_general_rejects_non_holder(u):
    with pytest.raises(FactorizationError):
        factorize_general(u, S0, NormSpec(4, 4, INF), NormSpec(4, 4, INF))


@given(theta=st.fractions(0, 1), seed=st.integers(0, 2 ** 16))
def test_power_split_multiplies_back(theta, seed):
    s = GridSpec(n=1, Ny=32, t_levels=12)
    u = random_function(s, "tent-indicator", seed)
    a, b = power_split(u, theta)
    assert np.allclose(a.values * b.values, u.abs, rtol=1e-14, atol=0)
    assert np.all(a.values[~u.support()] == 0) and np.all(b.values[~u.support()] == 0)


def test_lattice_covering_default():
    base = WhitneyParams(0.25, 2.0)
    N, ratio = lattice_covering(base, derive_params(base).doubleStar)
    # five fine heights carrying 11 + 8 + 6 + 5 + 4 boundary intervals
    assert N == 34
    assert ratio ** 0.5 == pytest.approx(1.48867, rel=1e-4)
    assert ratio >= 1


def test_factor_files(tmp_path, u):
    res = factorize_F3(u, S0)
    paths = res.write(str(tmp_path / "u"))
    assert [p.rsplit("/", 1)[1] for p in paths] == ["u.f1.txt", "u.f2.txt", "u.f3.txt"]
    assert np.array_equal(read_grid_function(paths[2]).values, res.factors[2].values)


@pytest.mark.parametrize("r", [0.5, 1, 2, INF])
@given(seed=st.integers(0, 2 ** 16))
def test_box_holder_chain_constant_at_most_one(r, seed):
    s = GridSpec(n=1, Ny=48, t_levels=20)
    f, g, h = (random_function(s, gen, seed) for gen in ("lognormal-noise", "smooth-bump-mix", "lognormal-noise"))
    rep = box_holder_chain(f, g, h.shifted(3), r)
    assert rep.passed and rep.constant <= 1 + 1e-12


def test_box_holder_chain_is_attained_by_constants(spec):
    c = random_function(spec, "slab", 0)
    rep = box_holder_chain(c, c, c, 2)
    assert rep.constant == pytest.approx(1.0, abs=1e-12)


def test_multiplication_constants_finite(spec, u):
    g = random_function(spec, "lognormal-noise", 2)
    assert np.isfinite(check_m1(u, g, 2, 2).constant)
    assert np.isfinite(check_m2(u, g, u, S0).constant)
    rep = check_multiplication(u, g, S0, NormSpec(4, 4, 4), NormSpec(4, 4, 4))
    assert rep.passed and 0 < rep.constant < INF


def test_multiplication_of_factors_recovers_source(u):
    s1, s2 = NormSpec(4, 4, 4, 0), NormSpec(4, 4, 4, 0)
    res = factorize_general(u, S0, s1, s2)
    rep = check_multiplication(res.factors[0], res.factors[1], S0, s1, s2)
    assert rep.detail["lhs"] == pytest.approx(res.source_norm, rel=1e-12)
    assert rep.constant == pytest.approx(1 / res.constant, rel=1e-12)
