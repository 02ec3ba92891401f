"""Acceptance criteria, one test each.

Every test records a ``PASS``/``FAIL`` line with the measured value and its
tolerance; the lines are echoed in the pytest terminal summary.  Criteria
1-10 read the records of a full ``tentspace verify`` run on the bundled
default configuration (plus direct recomputation where that is cheap);
criterion 11 is that run, repeated.

Run alone with ``pytest tests/test_acceptance.py -v`` (about three minutes).
"""

import json
import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from tentspace.functionals import NormSpec, tent_norm
from tentspace.geometry import WhitneyParams, chain_holds, check_inclusion_suite
from tentspace.grid import GridSpec, random_function
from tentspace.harness import load_config, run_suite

ROOT = Path(__file__).resolve().parents[1]
CONFIG = ROOT / "default.cfg"
WALL_LIMIT = 120.0


def record(n, ok, text):
    ACCEPTANCE_LINES[n] = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {text}"
    return ok


def _num(v):
    return float(v) if not isinstance(v, str) else float(v.replace("inf", "Infinity"))


def _verify(workdir):
    workdir.mkdir()
    t0 = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "tentspace", "verify", "--config", str(CONFIG)],
                          cwd=workdir, capture_output=True, text=True)
    return proc, time.perf_counter() - t0


@pytest.fixture(scope="module")
def runs(tmp_path_factory):
    base = tmp_path_factory.mktemp("accept")
    return [_verify(base / f"run{i}") + (base / f"run{i}",) for i in (1, 2)]


@pytest.fixture(scope="module")
def records(runs):
    proc, _, wd = runs[0]
    assert (wd / "report.json").exists(), proc.stderr
    doc = json.loads((wd / "report.json").read_text())
    return {(r["suite"], r["check"]): r for r in doc["records"]}


def _select(records, suite, prefix=""):
    return {k[1]: v for k, v in records.items() if k[0] == suite and k[1].startswith(prefix)}


def _all_pass(rs):
    return bool(rs) and all(r["status"] == "pass" for r in rs.values())


def test_criterion_01_geometry_inclusions(records):
    w = WhitneyParams(0.25, 2.0)
    t0 = time.perf_counter()
    res = [r for n in (1, 2) for r in check_inclusion_suite(w, trials=100_000, seed=1, n=n)]
    elapsed = time.perf_counter() - t0
    bad = sum(r.violations for r in res)
    inclusion = {k: v for k, v in _select(records, "geometry").items() if k.startswith("n")}
    ok = (len(res) == 20 and all(r.trials == 100_000 for r in res) and bad == 0
          and elapsed < 5.0 and len(inclusion) == 20 and _all_pass(inclusion)
          and all(_num(r["constant"]) == 0 for r in inclusion.values()))
    assert record(1, ok, f"10 inclusions x n in {{1,2}} x 1e5 configurations: {bad} counterexamples, "
                         f"{elapsed:.2f} s (limit 0 / 5 s)")


def test_criterion_02_derived_chain(records):
    rng = np.random.default_rng(2024)
    fails = 0
    for _ in range(1000):
        a2 = 1.0 + 20.0 * rng.random() + 1e-9
        w = WhitneyParams(rng.uniform(1e-6, 1 - 1e-6) / a2, a2)
        fails += not chain_holds(w)
    rec = records[("geometry", "derived_chain")]
    ok = fails == 0 and rec["status"] == "pass"
    assert record(2, ok, f"1000 random consistent (alpha1, alpha2): {fails} chain violations (limit 0)")


def test_criterion_03_slab_anchor(records):
    exact = math.sqrt(2 * math.log(2))
    f = random_function(GridSpec(), "slab", 0)
    fr = random_function(GridSpec().refine(), "slab", 0)
    e0 = abs(tent_norm(f, NormSpec(2, 2)) / exact - 1)
    e1 = abs(tent_norm(fr, NormSpec(2, 2)) / exact - 1)
    rs = _select(records, "functionals", "slab_anchor")
    ok = e0 <= 0.03 and e1 <= 0.015 and len(rs) == 4 and _all_pass(rs)
    assert record(3, ok, f"slab norm vs (2 ln 2)^(1/2) = {exact:.5f}: error {e0:.2%} default "
                         f"(limit 3%), {e1:.2%} refined (limit 1.5%)")


def test_criterion_04_quasi_norm_axioms(records):
    cfg = load_config(CONFIG)
    cats = {s.category for s in cfg.specs}
    betas = {s.beta for s in cfg.specs}
    hom = _select(records, "functionals", "homogeneity/")
    lat = _select(records, "functionals", "lattice/")
    pw = _select(records, "functionals", "power_identity/")
    h = max(_num(r["constant"]) for r in hom.values())
    p = max(_num(r["constant"]) for r in pw.values())
    ok = (cats == {"A", "B", "C", "D"} and {-1.0, -0.5} <= betas and len(cfg.specs) == 5
          and len(hom) == len(lat) == len(pw) == 5 and _all_pass(hom) and _all_pass(lat)
          and _all_pass(pw) and h <= 1e-12 and p <= 1e-10)
    assert record(4, ok, f"5 specs, categories {''.join(sorted(cats))}: homogeneity {h:.1e} (limit 1e-12), "
                         f"lattice exact, power identity {p:.1e} (limit 1e-10)")


def test_criterion_05_coincidence(records):
    rs = _select(records, "coincidence")
    qs = {k.split("/")[1] for k in rs}
    fin = {k: v for k, v in rs.items() if k.endswith("/finite")}
    ref = {k: v for k, v in rs.items() if k.endswith("/refinement")}
    worst = max(_num(r["constant"]) for r in ref.values())
    finite = all(math.isfinite(_num(r["constant"])) for r in fin.values())
    ok = {"q=1", "q=2", "q=inf"} <= qs and len(fin) == len(ref) >= 3 and _all_pass(rs) and finite \
        and worst < 0.2
    assert record(5, ok, f"K1, K2 finite for q in {{1,2,inf}}; largest refinement change of "
                         f"K1, K2, K2/K1 {worst:.1%} (limit 20%)")


def test_criterion_06_factorizations(records):
    rs = _select(records, "factorization")
    kinds = {k.split("/")[0] for k in rs} & {"F1", "F2", "F3", "general"}
    rec = max(_num(v["constant"]) for k, v in rs.items() if k.endswith("/reconstruction"))
    tr = max(_num(v["constant"]) for k, v in rs.items() if k.endswith("/translation"))
    rf = max(_num(v["constant"]) for k, v in rs.items() if k.endswith("/refinement"))
    finite = all(math.isfinite(_num(v["constant"])) for k, v in rs.items() if k.endswith("/constant"))
    cfg = load_config(CONFIG, {"suites": "factorization", "timing": "true"})
    t0 = time.perf_counter()
    run_suite(cfg, threads=1)
    elapsed = time.perf_counter() - t0
    ok = (kinds == {"F1", "F2", "F3", "general"} and cfg.corpus == 50 and _all_pass(rs)
          and rec <= 1e-12 and tr <= 1e-10 and rf <= 0.2 and finite and elapsed < 60)
    assert record(6, ok, f"F1/F2/F3/general on 50 functions: reconstruction {rec:.1e} max|u| (limit 1e-12), "
                         f"translation {tr:.1e} (limit 1e-10), refinement {rf:.1%} (limit 20%), "
                         f"{elapsed:.1f} s (limit 60 s)")


def test_criterion_07_multiplication(records):
    rs = _select(records, "multiplication")
    chain = {k: v for k, v in rs.items() if k.startswith("M2_box_chain")}
    worst_chain = max(_num(v["constant"]) for v in chain.values())
    consts = {k: v for k, v in rs.items() if k.endswith("/constant")}
    refs = [_num(v["constant"]) for k, v in rs.items() if k.endswith("/refinement")]
    kinds = {k.split("/")[0] for k in consts}
    ok = (len(chain) >= 4 and worst_chain <= 1 + 1e-12 and {"M1", "M2", "general"} <= kinds
          and all(math.isfinite(_num(v["constant"])) for v in consts.values())
          and max(refs) < 0.2 and _all_pass(rs))
    assert record(7, ok, f"box-Hölder chain worst ratio {worst_chain:.15f} (limit 1 + 1e-12); "
                         f"M1/M2/general finite, refinement change {max(refs):.1%} (limit 20%)")


def test_criterion_08_balayage_lemma(records):
    pm = _num(records[("measures", "point_mass")]["constant"])
    rnd = _num(records[("measures", "random_10_atom")]["constant"])
    mass = _num(records[("measures", "total_mass_identity")]["constant"])
    cfg = load_config(CONFIG)
    ok = (abs(pm - 0.5) <= 0.05 and rnd <= 0.55 and mass <= 1e-10 and cfg.measures == 100
          and all(records[("measures", k)]["status"] == "pass"
                  for k in ("point_mass", "random_10_atom", "total_mass_identity")))
    assert record(8, ok, f"point mass {pm:.12g} (target 1/2, slack 5%); worst of 100 random "
                         f"10-atom measures {rnd:.4f} (limit 0.55); mass identity {mass:.1e} (limit 1e-10)")


def test_criterion_09_measure_factorization(records):
    rs = _select(records, "measures", "factorization/")
    rec = _num(rs["factorization/reconstruction"]["constant"])
    t1 = _num(rs["factorization/T1_inf_factor"]["constant"])
    cn = _num(rs["factorization/carleson_factor"]["constant"])
    ok = _all_pass(rs) and rec <= 1e-12 and math.isfinite(t1) and math.isfinite(cn)
    assert record(9, ok, f"100 measures: atomwise reconstruction {rec:.1e}; "
                         f"T^1_inf factor constant {t1:.4g}, Carleson factor {cn:.4g} (both finite)")


def test_criterion_10_duality(records):
    rs = _select(records, "duality")
    cases = {k.rsplit("/", 1)[0] for k in rs}
    want = {f"p={p},q={q},r={r},beta0={b}" for p, q, r in ((2, 2, 2), (4, 2, 2), (2, 4, 4))
            for b in (0, -1)}
    consts = [_num(v["constant"]) for k, v in rs.items() if k.endswith("/constant")]
    refs = [_num(v["constant"]) for k, v in rs.items() if k.endswith("/refinement")]
    ok = cases == want and _all_pass(rs) and all(map(math.isfinite, consts)) and max(refs) < 0.2
    assert record(10, ok, f"6 cases x 100 pairs: C in [{min(consts):.3f}, {max(consts):.3f}], "
                          f"refinement change {max(refs):.1%} (limit 20%)")


def test_criterion_11_full_verify(runs):
    (p1, t1, d1), (p2, t2, d2) = runs
    same = all((d1 / f).read_bytes() == (d2 / f).read_bytes() for f in ("report.csv", "report.json"))
    ok = p1.returncode == 0 and p2.returncode == 0 and same and max(t1, t2) < WALL_LIMIT
    assert record(11, ok, f"verify --config default.cfg: exit {p1.returncode}/{p2.returncode}, "
                          f"reports {'byte-identical' if same else 'DIFFER'}, "
                          f"wall {t1:.1f} s / {t2:.1f} s (limit {WALL_LIMIT:.0f} s)"), p1.stdout + p1.stderr


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
