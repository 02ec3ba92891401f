import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tentspace import measures as ms
from tentspace.grid import GridError, GridSpec, random_function


@pytest.fixture(scope="module")
def spec():
    return GridSpec()


def point_mass(spec, m=2.5):
    k = int(spec.t_max / spec.dy / 4)
    return ms.DiscreteMeasure([0.5], [(k + 0.5) * spec.dy], [m])


def test_validation():
    with pytest.raises(GridError):
        ms.DiscreteMeasure([0.1], [0.1], [0.0])
    with pytest.raises(GridError):
        ms.DiscreteMeasure([0.1], [-0.1], [1.0])
    with pytest.raises(GridError):
        ms.DiscreteMeasure([0.1, 0.2], [0.1], [1.0])
    with pytest.raises(GridError):
        ms.DiscreteMeasure([], [], [])
    mu = ms.DiscreteMeasure([1.25], [0.1], [2.0])
    assert mu.y[0] == 0.25 and mu.totalMass == 2.0
    assert mu.scaled(3).totalMass == 6.0


def test_single_atom_balayage():
    mu = ms.DiscreteMeasure([0.3], [0.1], [2.0])
    assert ms.balayage(mu, 0.35) == pytest.approx(20.0)
    assert ms.balayage(mu, 0.4) == 0.0  # open shadow
    assert ms.balayage(mu, 0.25) == ms.balayage(mu, 0.35)
    mu2 = ms.DiscreteMeasure([[0.3, 0.3]], [0.1], [2.0], n=2)
    assert ms.balayage(mu2, [0.35, 0.35]) == pytest.approx(200.0)


@given(seed=st.integers(0, 2 ** 20), atoms=st.integers(1, 30))
def test_total_mass_identity_is_exact_in_one_dimension(seed, atoms):
    mu = ms.random_measure(GridSpec(), atoms, seed)
    assert ms.integrate_balayage(mu) == pytest.approx(2.0 * mu.totalMass, rel=1e-12)


def test_total_mass_identity_two_dimensions_by_quadrature():
    spec = GridSpec(n=2, Ny=128, t_levels=8)
    mu = ms.random_measure(spec, 5, 3)
    assert ms.integrate_balayage(mu, spec) == pytest.approx(math.pi * mu.totalMass, rel=0.05)
    with pytest.raises(GridError):
        ms.integrate_balayage(mu)


def test_point_mass_attains_one_half(spec):
    rep = ms.check_balayage_lemma(point_mass(spec), spec)
    assert rep["norm"] == pytest.approx(0.5, abs=1e-14)
    assert rep["fubini_constant"] == pytest.approx(0.5, abs=1e-14)
    assert rep["passed"]


def test_extension_of_point_mass(spec):
    mu = point_mass(spec, m=4.0)
    # 1/balayage = t/m on the whole shadow
    assert ms.extension(mu, mu.y[0], mu.t[0], spec) == pytest.approx(mu.t[0] / 4.0)
    assert ms.extension(mu, 0.0, mu.t[0] / 2, spec) == math.inf


@given(seed=st.integers(0, 2 ** 16), lam=st.floats(1e-3, 1e3))
def test_lemma_bound_and_scale_invariance(seed, lam):
    spec = GridSpec()
    mu = ms.random_measure(spec, 10, seed)
    a = ms.check_balayage_lemma(mu, spec)
    b = ms.check_balayage_lemma(mu.scaled(lam), spec)
    assert a["norm"] <= a["fubini_constant"] * (1 + 1e-12)
    assert a["norm"] <= 0.55
    assert b["norm"] == pytest.approx(a["norm"], rel=1e-10)


def test_carleson_norm_matches_brute_force():
    spec = GridSpec(n=1, Ny=32, t_levels=6, t_min=2.0 ** -5, t_max=2.0 ** -3)
    mu = ms.DiscreteMeasure([0.2, 0.3, 0.71], [0.05, 0.1, 0.07], [1.0, 2.0, 0.5])
    best = 0.0
    for c in spec.y:
        for R in np.linspace(spec.dy / 4, 0.499, 4000):
            d = np.minimum(np.abs(mu.y - c), 1 - np.abs(mu.y - c)) + mu.t
            best = max(best, mu.mass[d <= R].sum() / spec.ball_measure([R])[0])
    got = ms.carleson_norm_measure(mu, spec)
    assert got >= best * (1 - 1e-12)
    assert got == pytest.approx(best, rel=1e-2)


@given(seed=st.integers(0, 2 ** 16))
def test_adaptive_family_dominates_ladder(seed):
    spec = GridSpec(n=1, Ny=128, t_levels=16)
    mu = ms.random_measure(spec, 8, seed)
    lad = ms.carleson_norm_measure(mu, spec, family="ladder", steps_per_octave=2)
    ada = ms.carleson_norm_measure(mu, spec, family="adaptive")
    assert ada >= lad * (1 - 1e-12)
    with pytest.raises(GridError):
        ms.carleson_norm_measure(mu, spec, family="dyadic")


def test_factorize_measure(spec):
    mu = ms.random_measure(spec, 10, 11)
    r = ms.factorize_measure(mu, spec)
    assert r.reconstruction_error <= 1e-12
    assert np.allclose(r.boundary_factor_at_atoms * r.carleson_weights, mu.mass, rtol=1e-12)
    assert r.holder_ok
    assert 0 < r.t1_ratio < math.inf and 0 < r.maximal_constant < math.inf
    assert r.carleson_norm <= 0.55
    with pytest.raises(GridError):
        ms.factorize_measure(mu, spec, p0=1.0)


def test_density_measure_and_carleson_inequality():
    spec = GridSpec(n=1, Ny=64, t_levels=20)
    f = random_function(spec, "smooth-bump-mix", 1)
    mu = ms.DiscreteMeasure.from_density(f)
    assert mu.totalMass == pytest.approx(
        math.fsum((f.values * spec.cell_area * spec.dt).ravel().tolist()), rel=1e-12)
    cm = ms.cell_measure(spec, 4, 30)
    ratio = ms.carleson_inequality_ratio(f, cm, 2.0)
    assert 0 < ratio < math.inf
    with pytest.raises(GridError):
        ms.carleson_inequality_ratio(f, ms.random_measure(spec, 3, 0), 2.0)


def test_fubini_constant_needs_covered_shadow():
    spec = GridSpec(n=1, Ny=16, t_levels=4)
    mu = ms.DiscreteMeasure([0.5 + 1e-3], [1e-4], [1.0])
    with pytest.raises(GridError):
        ms.fubini_constant(mu, spec)


@pytest.mark.parametrize("n", [1, 2])
def test_measure_roundtrip(tmp_path, n):
    mu = ms.random_measure(GridSpec(n=n, Ny=32, t_levels=4), 7, 2)
    p = tmp_path / "mu.txt"
    ms.write_measure(mu, p)
    nu = ms.read_measure(p, n)
    assert np.array_equal(nu.y, mu.y) and np.array_equal(nu.t, mu.t) and np.array_equal(nu.mass, mu.mass)
    p.write_text("0.1,0.1,-1\n")
    with pytest.raises(GridError):
        ms.read_measure(p)
