import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tentspace.geometry import WhitneyParams
from tentspace.grid import (GENERATORS, CellMeasure, GridError, GridFunction, GridSpec,
                            SupportMarginError, build_prefix_sums, integrate_region,
                            random_function, read_grid_function, read_manifest,
                            write_grid_function)


def test_heights_are_geometric_and_refine(default_spec):
    s = default_spec
    assert s.t[0] == s.t_min and s.t[-1] == pytest.approx(s.t_max, rel=1e-14)
    assert np.allclose(s.t[1:] / s.t[:-1], math.exp(s.log_rho))
    r = s.refine()
    assert (r.Ny, r.t_levels) == (2 * s.Ny, 2 * s.t_levels - 1)
    assert np.allclose(r.t[::2], s.t, rtol=1e-13)


@pytest.mark.parametrize("n", [1, 2])
@given(radius=st.floats(0.0, 0.49))
def test_window_counts_match_brute_force(n, radius):
    s = GridSpec(n=n, Ny=16 if n == 1 else 12, t_levels=3)
    offs, counts = s.window([radius])
    r = np.arange(s.Ny)
    r = np.minimum(r, s.Ny - r) * s.dy
    if n == 1:
        expected = int(np.sum(r < radius))
    else:
        expected = int(np.sum(np.hypot(r[:, None], r[None, :]) < radius))
    assert counts[0] == expected
    assert s.ball_measure([radius])[0] == expected * s.cell_area


def test_window_refuses_radius_beyond_half():
    with pytest.raises(GridError, match="torus safety"):
        GridSpec().window([0.5])


def test_torus_safety_check():
    GridSpec().check_torus_safe(WhitneyParams(0.25, 2.0))
    with pytest.raises(GridError):
        GridSpec(t_max=0.25).check_torus_safe(WhitneyParams(0.25, 2.0))


def _slab_quadrature(K, lo, hi):
    s = GridSpec(n=1, Ny=8, t_levels=K, t_min=0.1, t_max=0.2)
    f = GridFunction(s, np.ones(s.shape))
    return integrate_region(f, lambda y, t: (t >= lo) & (t <= hi), CellMeasure(s, "dydt/t"))


def test_slab_quadrature_closed_form_refines_monotonically():
    # int_0^1 int_{0.1}^{0.2} dy dt/t = ln 2; error ~ step in log t
    errs = [abs(_slab_quadrature(K, 0.1, 0.2) - math.log(2)) for K in (5, 9, 17, 33, 65)]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert errs[-1] < 0.012
    assert errs[0] / errs[-1] == pytest.approx(16, rel=1e-9)


def test_measure_kinds_and_unknown_kind(small_spec):
    f = GridFunction(small_spec, np.ones(small_spec.shape))
    t = small_spec.t
    total = integrate_region(f, None, CellMeasure(small_spec, "dydt"))
    assert total == pytest.approx(math.fsum(small_spec.dt))
    b = integrate_region(f, None, CellMeasure(small_spec, "dydt*t^(-beta-1)", beta=-1.0))
    assert b == pytest.approx(total)
    assert integrate_region(f, None, CellMeasure(small_spec, "dydt/t^{n+1}")) == \
        pytest.approx(math.fsum(small_spec.dt / t ** 2))
    with pytest.raises(GridError):
        CellMeasure(small_spec, "dy")


@given(st.integers(0, 63), st.integers(0, 63), st.integers(0, 23), st.integers(0, 2 ** 16))
def test_prefix_queries_match_direct_sums(i0, i1, k, seed):
    s = GridSpec(n=1, Ny=64, t_levels=24, t_min=2.0 ** -7, t_max=2.0 ** -3)
    vals = np.random.default_rng(seed).random(s.shape)
    m = CellMeasure(s, "dydt")
    tab = build_prefix_sums(GridFunction(s, vals), m)
    idx = np.arange(i0, i1 + 1) if i0 <= i1 else np.r_[i0:64, 0:i1 + 1]
    direct = math.fsum((vals[idx, k] * m.weights[idx, k]).tolist())
    assert tab.query(k, i0, i1) == pytest.approx(direct, rel=1e-12)


def test_prefix_rectangles_in_two_dimensions(rng):
    s = GridSpec(n=2, Ny=10, t_levels=4)
    vals = rng.random(s.shape)
    m = CellMeasure(s, "dydt")
    tab = build_prefix_sums(GridFunction(s, vals), m)
    w = vals * m.weights
    assert tab.query_rect(2, 8, 1, 3, 5) == pytest.approx(w[np.r_[8, 9, 0, 1]][:, 3:6, 2].sum())
    assert tab.level_total(1) == pytest.approx(w[..., 1].sum())


@pytest.mark.parametrize("gen", GENERATORS)
def test_generators_are_deterministic_and_supported_in_band(default_spec, gen):
    a = random_function(default_spec, gen, 3)
    b = random_function(default_spec, gen, 3)
    assert np.array_equal(a.values, b.values)
    assert a.abs.max() > 0 and np.all(a.values >= 0)
    a.check_margin(2.0)


def test_refined_generator_samples_same_function(default_spec):
    a = random_function(default_spec, "smooth-bump-mix", 5)
    b = random_function(default_spec.refine(), "smooth-bump-mix", 5)
    assert np.allclose(b.values[::2, ::2], a.values, rtol=1e-12)


def test_unknown_generator(default_spec):
    with pytest.raises(GridError, match="unknown generator"):
        random_function(default_spec, "noise", 0)


def test_margin_violation_reported(small_spec):
    vals = np.zeros(small_spec.shape)
    vals[3, 0] = 1.0
    with pytest.raises(SupportMarginError, match="level 0"):
        GridFunction(small_spec, vals).check_margin(2.0)


def test_shape_mismatch():
    with pytest.raises(GridError):
        GridFunction(GridSpec(Ny=8, t_levels=4), np.zeros((8, 5)))


@pytest.mark.parametrize("dtype", [float, complex])
def test_text_roundtrip(tmp_path, small_spec, rng, dtype):
    vals = rng.random(small_spec.shape).astype(dtype)
    if dtype is complex:
        vals = vals + 1j * rng.random(small_spec.shape)
    f = GridFunction(small_spec, vals)
    p = tmp_path / "f.txt"
    write_grid_function(f, p, manifest="unit test")
    g = read_grid_function(p)
    assert g.spec == f.spec and np.array_equal(g.values, f.values)
    assert read_manifest(p) == "unit test"


def test_truncated_file_rejected(tmp_path, small_spec):
    p = tmp_path / "f.txt"
    write_grid_function(GridFunction(small_spec, np.zeros(small_spec.shape)), p)
    lines = p.read_text().splitlines()
    p.write_text("\n".join(lines[:-1]) + "\n")
    with pytest.raises(GridError, match="expected"):
        read_grid_function(p)


def test_shift_is_exact_translation(small_spec, rng):
    f = GridFunction(small_spec, rng.random(small_spec.shape))
    assert np.array_equal(f.shifted(5).values[5], f.values[0])
    assert np.array_equal(f.shifted(5).shifted(-5).values, f.values)


def test_unit_slab_volume():
    # f = 1 on [0,1) x [0.1, 0.2] against dy dt: volume 0.1
    s = GridSpec(n=1, Ny=16, t_levels=64, t_min=0.1, t_max=0.2)
    v = integrate_region(GridFunction(s, np.ones(s.shape)), None, CellMeasure(s, "dydt"))
    assert v == pytest.approx(0.1, rel=0.02)
    assert integrate_region(GridFunction(s, np.zeros(s.shape)), None, CellMeasure(s, "dydt")) == 0.0
