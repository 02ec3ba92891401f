"""The verification suites.

Each suite is a function ``cfg -> list[Record]``.  Checks are independent;
an exception inside a check becomes a failing record carrying the message,
so one bad input never hides the rest of a report.
"""

from dataclasses import dataclass, field
import math
import time

import numpy as np

from .. import factorization as fz
from .. import measures as ms
from ..functionals import (INF, NormSpec, carleson_C, conical_A, dual_exponent,
                           nontangential_N, pairing, power_identity_check, tent_norm,
                           whitney_average, whitney_average_levels)
from ..geometry import WhitneyParams, chain_holds, check_inclusion_suite, derive_params
from ..grid import CorpusConfig, GridFunction, random_function
from .config import RunConfig
from .multiplier import estimate_multiplier_norm

PLUMBING = "plumbing"


@dataclass
class Record:
    suite: str
    check: str
    anchor: str
    status: str
    constant: float
    tolerance: float
    seconds: float | None = None
    witness: object = None
    detail: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.status == "pass"


class _Suite:
    """Collects records for one suite, timing each check."""

    def __init__(self, name, cfg: RunConfig):
        self.name = name
        self.cfg = cfg
        self.records = []

    def check(self, check, anchor, fn, tolerance):
        """Run ``fn() -> (passed, constant[, witness[, detail]])`` into a record."""
        t0 = time.perf_counter()
        try:
            out = fn()
            passed, constant = out[0], out[1]
            witness = out[2] if len(out) > 2 else None
            detail = out[3] if len(out) > 3 else {}
            status = "pass" if passed else "fail"
        except Exception as e:  # a crashing check is a failed check
            status, constant, witness, detail = "fail", math.nan, f"{type(e).__name__}: {e}", {}
        secs = time.perf_counter() - t0 if self.cfg.timing else None
        self.records.append(Record(self.name, check, anchor, status, float(constant),
                                   float(tolerance), secs, None if status == "pass" else witness,
                                   detail))


def _rel_change(a, b):
    if a == b:
        return 0.0
    if not (math.isfinite(a) and math.isfinite(b)) or a == 0:
        return INF
    return abs(b / a - 1.0)


def _corpus(spec, count, seed, generators=("lognormal-noise", "smooth-bump-mix")):
    """``count`` deterministic (generator, seed) pairs cycling through ``generators``."""
    return [(generators[i % len(generators)], seed * 10_000 + i) for i in range(count)]


def _fixtures(spec):
    """The default fixture set: closed form, sparse and rough inputs."""
    out = [("slab", random_function(spec, "slab", 0)),
           ("tent-indicator", random_function(spec, "tent-indicator", 3))]
    out += [(f"lognormal-noise#{s}", random_function(spec, "lognormal-noise", s)) for s in (1, 2, 3)]
    out += [(f"smooth-bump-mix#{s}", random_function(spec, "smooth-bump-mix", s)) for s in (1, 2)]
    return out


def _ratio_max(num, den):
    """Largest pointwise ``num/den`` (inf if ``den`` vanishes under a positive ``num``)."""
    num = np.asarray(num)
    den = np.asarray(den)
    if np.any((den <= 0) & (num > 0)):
        return INF
    pos = den > 0
    return float(np.max(num[pos] / den[pos])) if pos.any() else 0.0


def _spec_label(s: NormSpec):
    f = lambda e: "inf" if e == INF else ("none" if e is None else format(e, "g"))
    return f"p={f(s.p)},q={f(s.q)},r={f(s.r)},beta={s.beta:g}"


# --------------------------------------------------------------------------
# geometry
# --------------------------------------------------------------------------

def geometry_suite(cfg: RunConfig):
    S = _Suite("geometry", cfg)
    tol = cfg.tol("geometry")
    for n in (1, 2):
        results = {}

        def run_all(n=n):
            if n not in results:
                results[n] = check_inclusion_suite(cfg.whitney, cfg.trials, cfg.seed, n=n)
            return results[n]

        for i, name in enumerate(("W_lower", "W_upper", "C1", "C2", "T1", "T2", "star_nesting",
                                  "double_star_pair", "inner_ball", "outer_ball")):
            def one(i=i, n=n):
                r = run_all(n)[i]
                frac = r.violations / r.trials
                return frac <= tol, frac, r.witness, {"trials": r.trials, "resampled": r.resampled}
            anchor = "inclusion " + name
            try:
                anchor = run_all(n)[i].anchor
            except Exception:
                pass
            S.check(f"n{n}/{name}", anchor, one, tol)

    def chain():
        rng = np.random.default_rng(cfg.seed)
        bad = []
        for _ in range(1000):
            a2 = 1.0 + 15.0 * rng.random() + 1e-9
            a1 = (1.0 / a2) * (1e-6 + (1 - 2e-6) * rng.random())
            w = WhitneyParams(a1, a2)
            if not chain_holds(w):
                bad.append((a1, a2))
        return not bad, len(bad), bad[:1] or None
    S.check("derived_chain", "chain a1** < a1* < a1 < 1/a2 < 1/a2* < 1/a2** < 1", chain, 0.0)

    def derived():
        d = derive_params(cfg.whitney)
        a1, a2 = cfg.whitney.pair
        want = {"alpha0": (1 - a1) / a2, "alphaC": a2 + a1 * a2, "alphaT": a2 + a1 / a2,
                "alphaStarUpper": a2 + a1, "alphaStarLower": 1 / a2 - a1}
        bad = {k: getattr(d, k) for k, v in want.items() if getattr(d, k) != v}
        return not bad, len(bad), bad or None, {k: getattr(d, k) for k in want}
    S.check("derived_values", "cone and tent apertures from the Whitney parameters", derived, 0.0)

    def torus():
        s = cfg.specs[0]
        cfg.grid.check_torus_safe(cfg.whitney, s.aperture)
        return True, 0.0
    S.check("torus_safety", PLUMBING, torus, 0.5)
    return S.records


# --------------------------------------------------------------------------
# functionals
# --------------------------------------------------------------------------

def functionals_suite(cfg: RunConfig):
    S = _Suite("functionals", cfg)
    spec = cfg.grid
    tol = cfg.tol("functionals")
    a, b = CorpusConfig().slab
    vn = 2.0 if spec.n == 1 else math.pi
    ref = math.sqrt(vn * math.log(b / a))

    for r in (None, 2.0):
        s = NormSpec(2, 2, r, whitney=cfg.whitney)
        tag = "classical" if r is None else "whitney_r2"

        def slab(g=spec, t=tol, s=s):
            val = tent_norm(random_function(g, "slab", 0), s)
            err = abs(val / ref - 1)
            return err <= t, err, {"value": val, "reference": ref}, {"value": val, "reference": ref}
        S.check(f"slab_anchor/{tag}", "slab closed form (v_n ln(b/a))^(1/2)", slab, tol)
        if cfg.refine:
            S.check(f"slab_anchor/{tag}/refined", "slab closed form (v_n ln(b/a))^(1/2)",
                    lambda s=s: slab(spec.refine(), tol / 2, s), tol / 2)

    fixtures = _fixtures(spec)
    rng_seed = cfg.seed
    for s in cfg.specs:
        label = _spec_label(s)

        def homog(s=s):
            worst = 0.0
            for _, f in fixtures:
                base = tent_norm(f, s)
                for lam in (0.37, 5.2, -2.0):
                    v = tent_norm(f.with_values(lam * f.values), s)
                    worst = max(worst, abs(v - abs(lam) * base) / max(abs(lam) * base, 1e-300))
            return worst <= 1e-12, worst
        S.check(f"homogeneity/{label}", "absolute homogeneity of the quasi-norm", homog, 1e-12)

        def lattice(s=s):
            rng = np.random.default_rng(rng_seed)
            worst = 0.0
            for name, f in fixtures:
                g = f.with_values(f.abs * rng.random(spec.shape))
                ng, nf = tent_norm(g, s), tent_norm(f, s)
                if not ng <= nf:
                    return False, ng - nf, {"fixture": name, "g": ng, "f": nf}
                worst = max(worst, ng / nf if nf else 0.0)
            return True, worst
        S.check(f"lattice/{label}", "lattice property |g| <= |f| implies ||g|| <= ||f||", lattice, 1.0)

        def zero(s=s):
            return tent_norm(GridFunction(spec, np.zeros(spec.shape)), s) == 0.0, 0.0
        S.check(f"zero/{label}", "||0|| = 0", zero, 0.0)

        def power(s=s):
            worst = 0.0
            for name, f in fixtures:
                for theta in (0.5, 1.0 / 3.0):
                    rep = power_identity_check(f, s, theta)
                    if rep["rel_err"] > worst:
                        worst = rep["rel_err"]
            return worst <= 1e-10, worst
        S.check(f"power_identity/{label}", "[T^{p,r}_{q,beta}]^theta = T^{p/theta,r/theta}_{q/theta,beta theta}",
                power, 1e-10)

    f = fixtures[2][1]
    xs = [0.0, 0.3, 0.71875, 0.5 + 1e-3][: 4] if spec.n == 1 else [np.array([0.1, 0.7]), np.array([0.5, 0.25])]

    def pointwise():
        G = f.level_major()
        worst = 0.0
        A = conical_A(f, 2.0)
        N = nontangential_N(f)
        C = carleson_C(f, 2.0)
        for x in xs:
            i = tuple(np.round(np.atleast_1d(x) * spec.Ny).astype(int) % spec.Ny)
            on_grid = np.allclose(np.atleast_1d(x) * spec.Ny, np.round(np.atleast_1d(x) * spec.Ny))
            a_pt = conical_A(G, 2.0, x=x, spec=spec)
            n_pt = nontangential_N(G, x=x, spec=spec)
            if on_grid:
                worst = max(worst, abs(a_pt - A[i]) / A[i], abs(n_pt - N[i]) / max(N[i], 1e-300),
                            abs(carleson_C(G, 2.0, x=x, spec=spec) - C[i]) / max(C[i], 1e-300))
        return worst <= 1e-12, worst
    S.check("pointwise_vs_grid", PLUMBING, pointwise, 1e-12)

    def prefix():
        A1 = conical_A(f, 2.0)
        if spec.n != 1:
            return True, 0.0
        A2 = conical_A(f, 2.0, method="prefix")
        err = float(np.max(np.abs(A1 - A2) / A1))
        return err <= 1e-12, err
    S.check("prefix_vs_direct", PLUMBING, prefix, 1e-12)

    def apertures():
        G = f.level_major()
        ok = True
        prev = None
        for al in (0.5, 1.0, 1.5):
            cur = (conical_A(G, 2.0, al, spec=spec), nontangential_N(G, al, spec=spec),
                   carleson_C(G, 2.0, al, spec=spec))
            if prev is not None:
                ok &= bool(np.all(cur[0] >= prev[0]) and np.all(cur[1] >= prev[1])
                           and np.all(cur[2] <= prev[2]))
            prev = cur
        return ok, 0.0
    S.check("aperture_monotonicity", "A and N grow, C shrinks with the aperture", apertures, 0.0)

    def jensen():
        worst = 0.0
        for _, g in fixtures:
            w1 = whitney_average(g, 1.0, cfg.whitney).values
            w2 = whitney_average(g, 2.0, cfg.whitney).values
            wi = whitney_average(g, INF, cfg.whitney).values
            worst = max(worst, _ratio_max(w1, w2), _ratio_max(w2, wi))
        return worst <= 1 + 1e-12, worst
    S.check("whitney_jensen", "power means: W_1 <= W_2 <= W_inf", jensen, 1 + 1e-12)

    def whitney_change():
        d = derive_params(cfg.whitney)
        other = WhitneyParams(*d.star)
        ratios = []
        for s in cfg.specs:
            if s.r is None:
                continue
            for _, g in fixtures:
                n0 = tent_norm(g, s)
                n1 = tent_norm(g, s.replace(whitney=other))
                if n0 > 0:
                    ratios.append(n1 / n0)
        lo, hi = min(ratios), max(ratios)
        return bool(lo > 0 and math.isfinite(hi)), hi, None, {"C_low": lo, "C_high": hi}
    S.check("whitney_change", "change of Whitney parameters: two-sided norm bound", whitney_change, INF)

    def aperture_change():
        ratios = []
        for s in cfg.specs:
            for _, g in fixtures:
                n0 = tent_norm(g, s)
                n1 = tent_norm(g, s.replace(aperture=1.5))
                if n0 > 0:
                    ratios.append(n1 / n0)
        lo, hi = min(ratios), max(ratios)
        return bool(lo > 0 and math.isfinite(hi)), hi, None, {"C_low": lo, "C_high": hi}
    S.check("aperture_change", "change of aperture: two-sided norm bound", aperture_change, INF)
    return S.records


# --------------------------------------------------------------------------
# coincidence T^{p,q}_q = T^p_q
# --------------------------------------------------------------------------

def _sandwich_constants(f: GridFunction, q, w: WhitneyParams, kind="A"):
    """Pointwise constants of the two coincidence inequalities for one function."""
    spec = f.spec
    d = derive_params(w)
    G = f.level_major()
    Wq = whitney_average_levels(spec, G, q, w.pair)
    if q == INF:
        lo = nontangential_N(G, d.alpha0, spec=spec)
        mid = nontangential_N(Wq, 1.0, spec=spec)
        hi = nontangential_N(G, d.alphaC, spec=spec)
    elif kind == "A":
        lo = conical_A(G, q, d.alpha0, spec=spec)
        mid = conical_A(Wq, q, 1.0, spec=spec)
        hi = conical_A(G, q, d.alphaC, spec=spec)
    else:
        lo = carleson_C(G, q, d.alphaT, spec=spec)
        mid = carleson_C(Wq, q, 1.0, spec=spec)
        hi = carleson_C(G, q, d.alpha0, spec=spec)
    return _ratio_max(lo, mid), _ratio_max(mid, hi)


def coincidence_suite(cfg: RunConfig):
    S = _Suite("coincidence", cfg)
    spec = cfg.grid
    tol = cfg.tol("coincidence")
    gens = ("smooth-bump-mix", "lognormal-noise", "tent-indicator")
    corpus = _corpus(spec, cfg.functions, cfg.seed, gens)
    ref = spec.refine()
    cases = [("A", 1.0), ("A", 2.0), ("N", INF)]
    anchors = {"A": "coincidence: A^{alpha_0}_q(f) <= K1 A_q(W_q f) <= K1 K2 A^{alpha_C}_q(f)",
               "N": "coincidence: N^{alpha_0}(f) <= K1 N(W_inf f) <= K1 K2 N^{alpha_C}(f)",
               "C": "coincidence: C^{alpha_T}_q(f) <= K1 C_q(W_q f) <= K1 K2 C^{alpha_0}_q(f)"}
    c_count = max(1, cfg.functions // 10)
    cases += [("C", 1.0), ("C", 2.0)]

    for kind, q in cases:
        items = corpus if kind != "C" else corpus[:c_count]
        tag = f"{kind}/q={'inf' if q == INF else format(q, 'g')}"
        cache = {}

        def compute(items=items, q=q, kind=kind, cache=cache):
            if not cache:
                base, fine = [], []
                for gen, seed in items:
                    base.append(_sandwich_constants(random_function(spec, gen, seed), q, cfg.whitney, kind))
                    if cfg.refine:
                        fine.append(_sandwich_constants(random_function(ref, gen, seed), q, cfg.whitney, kind))
                cache["base"], cache["fine"] = np.array(base), np.array(fine)
            return cache

        def finite(compute=compute):
            c = compute()["base"]
            K1, K2 = float(c[:, 0].max()), float(c[:, 1].max())
            return bool(math.isfinite(K1) and math.isfinite(K2)), max(K1, K2), None, {"K1": K1, "K2": K2}
        S.check(f"{tag}/finite", anchors[kind], finite, INF)
        if cfg.refine:
            def stable(compute=compute):
                c = compute()
                b, f = c["base"], c["fine"]
                ch = [_rel_change(float(b[:, 0].max()), float(f[:, 0].max())),
                      _rel_change(float(b[:, 1].max()), float(f[:, 1].max())),
                      _rel_change(float(b[:, 1].max() / b[:, 0].max()),
                                  float(f[:, 1].max() / f[:, 0].max()))]
                worst = max(ch)
                return worst < tol, worst, None, {"K1": ch[0], "K2": ch[1], "K2/K1": ch[2]}
            S.check(f"{tag}/refinement", anchors[kind], stable, tol)
    return S.records


# --------------------------------------------------------------------------
# factorization
# --------------------------------------------------------------------------

def _third_split(s0: NormSpec):
    """Hölderian partners with shares 2/3 and 1/3 of every reciprocal."""
    f = lambda e, k: e if e == INF else e * k
    s1 = s0.replace(p=f(s0.p, 1.5), q=f(s0.q, 1.5), r=f(s0.r, 1.5), beta=s0.beta * 2 / 3)
    s2 = s0.replace(p=f(s0.p, 3.0), q=f(s0.q, 3.0), r=f(s0.r, 3.0), beta=s0.beta - s0.beta * 2 / 3)
    return s1, s2


def _mixed_split(s0: NormSpec):
    """Partners with shares 1, 1/2 and 0 of the reciprocals of p, q and r.

    Unequal shares make the general construction mix the three extremal
    factors instead of reducing to a single power split.
    """
    twice = lambda e: e if e == INF else 2 * e
    s1 = s0.replace(q=twice(s0.q), r=INF, beta=s0.beta * 2 / 3)
    s2 = s0.replace(p=INF, q=twice(s0.q), beta=s0.beta - s0.beta * 2 / 3)
    return s1, s2


def _run_factorizer(which, u, s0):
    if which == "general":
        s1, s2 = _mixed_split(s0)
        return fz.factorize_general(u, s0, s1, s2)
    return fz.FACTORIZERS[which](u, s0)


def factorization_suite(cfg: RunConfig):
    S = _Suite("factorization", cfg)
    spec = cfg.grid
    tol = cfg.tol("factorization")
    with_r = [s for s in cfg.specs if s.r is not None]
    if not with_r:
        S.check("specs", PLUMBING, lambda: (False, math.nan, "no spec with a Whitney exponent"), 0.0)
        return S.records
    primary = next((s for s in with_r if s.p < INF and s.q < INF), with_r[0])
    corpus = _corpus(spec, cfg.corpus, cfg.seed + 1)
    shift = spec.Ny // 3 + 1
    ref = spec.refine()

    for which in ("F1", "F2", "F3", "general"):
        if which == "F2" and not (primary.p < INF and primary.q < INF):
            continue
        label = f"{which}/{_spec_label(primary)}"
        anchor = {"F1": "F1: T^{p,r}_q -> T^{p,inf}_q . T^{inf,r}_inf",
                  "F2": "F2: T^{p,r}_q -> T^{p,inf}_inf . T^{inf,r}_q",
                  "F3": "F3: T^{p,r}_q -> T^{p,inf}_inf . T^{inf,inf}_q . T^{inf,r}_inf",
                  "general": "general factorization under the Hölderian relation"}[which]
        data = {}

        def compute(which=which, data=data):
            if not data:
                rec, const, shifted, fine, extras = [], [], [], [], []
                for gen, seed in corpus:
                    u = random_function(spec, gen, seed)
                    r = _run_factorizer(which, u, primary)
                    rec.append(r.reconstruction_error / float(u.abs.max()))
                    const.append(r.constant)
                    extras.append(r.diagnostics)
                    shifted.append(_run_factorizer(which, u.shifted(shift), primary).constant)
                    if cfg.refine:
                        fine.append(_run_factorizer(which, random_function(ref, gen, seed), primary).constant)
                data.update(rec=np.array(rec), const=np.array(const), shifted=np.array(shifted),
                            fine=np.array(fine), extras=extras)
            return data

        def recon(compute=compute):
            e = float(compute()["rec"].max())
            return e <= 1e-12, e
        S.check(f"{label}/reconstruction", "strong factorization |u| = product of |factors|", recon, 1e-12)

        def finite(compute=compute):
            c = compute()["const"]
            return bool(np.all(np.isfinite(c))), float(c.max()), None, {"C_min": float(c.min())}
        S.check(f"{label}/constant", anchor, finite, INF)

        def translate(compute=compute):
            d = compute()
            err = float(np.max(np.abs(d["shifted"] / d["const"] - 1)))
            return err <= 1e-10, err
        S.check(f"{label}/translation", anchor, translate, 1e-10)

        if cfg.refine:
            def refine(compute=compute):
                d = compute()
                err = float(np.max(np.abs(d["fine"] / d["const"] - 1)))
                return err < tol, err
            S.check(f"{label}/refinement", anchor, refine, tol)

        if which == "F1":
            def bounds(compute=compute):
                ex = compute()["extras"]
                kv = max(e["K_star_v"] for e in ex)
                kw = max(e["K_dstar_w"] for e in ex)
                cov = all(e["covering_bound_holds"] for e in ex)
                return bool(math.isfinite(kv) and math.isfinite(kw) and cov), max(kv, kw), None, {
                    "K_star_v": kv, "K_dstar_w": kw, "covering_N": ex[0]["covering_N"],
                    "covering_factor": ex[0]["covering_factor"]}
            S.check(f"{label}/pointwise", "F1 pointwise: W*_inf(v) <= K W_r(u), W**_r(w) <= K", bounds, INF)
        if which == "F2":
            def maximal(compute=compute):
                k = max(e["K_maximal"] for e in compute()["extras"])
                return bool(math.isfinite(k)), k
            S.check(f"{label}/pointwise", "F2 pointwise: N(W_inf v) <= K M(u~^pt)^(1/pt)", maximal, INF)

    # the remaining specs: every construction that applies, on a small corpus
    small = corpus[: max(1, cfg.corpus // 10)]
    for s0 in with_r:
        if s0 == primary:
            continue
        for which in ("F1", "F2", "F3", "general"):
            if which == "F2" and not (s0.p < INF and s0.q < INF):
                continue

            def run(which=which, s0=s0):
                errs, consts = [], []
                for gen, seed in small:
                    u = random_function(spec, gen, seed)
                    r = _run_factorizer(which, u, s0)
                    errs.append(r.reconstruction_error / float(u.abs.max()))
                    consts.append(r.constant)
                e = max(errs)
                return bool(e <= 1e-12 and all(map(math.isfinite, consts))), max(consts), None, {
                    "reconstruction": e}
            S.check(f"{which}/{_spec_label(s0)}/constant", "factorization constant, additional spec", run, INF)

    def rejections():
        u = random_function(spec, "tent-indicator", 3)
        try:
            fz.factorize_F2(u, primary)
        except fz.FactorizationError:
            pass
        else:
            return False, 1.0, "F2 accepted an input whose conical functional vanishes"
        try:
            fz.factorize_general(u, primary, primary, primary)
        except fz.FactorizationError:
            return True, 0.0
        return False, 1.0, "general factorization accepted a non-Hölderian triplet"
    S.check("rejections", PLUMBING, rejections, 0.0)
    return S.records


# --------------------------------------------------------------------------
# multiplication
# --------------------------------------------------------------------------

def multiplication_suite(cfg: RunConfig):
    S = _Suite("multiplication", cfg)
    spec = cfg.grid
    tol = cfg.tol("multiplication")
    ref = spec.refine()
    triples = [(("lognormal-noise", cfg.seed * 100 + i), ("smooth-bump-mix", cfg.seed * 100 + i),
                ("lognormal-noise", cfg.seed * 100 + 50 + i)) for i in range(max(1, cfg.corpus // 5))]

    def fns(g, triple):
        return [random_function(g, gen, seed) for gen, seed in triple]

    for r in (1.0, 2.0, 4.0, INF):
        def chain(r=r):
            worst, wit = 0.0, None
            for tr in triples:
                rep = fz.box_holder_chain(*fns(spec, tr), r, cfg.whitney)
                if rep.constant > worst:
                    worst, wit = rep.constant, rep.witness
            return worst <= 1 + 1e-12, worst, wit
        S.check(f"M2_box_chain/r={'inf' if r == INF else format(r, 'g')}",
                "M2 per box: W_r(fgh) <= W_inf(f) W_inf(g) W_r(h)", chain, 1 + 1e-12)

    def zero():
        f, g, h = fns(spec, triples[0])
        z = f.with_values(np.zeros(spec.shape))
        s0 = NormSpec(2, 2, 2, whitney=cfg.whitney)
        return fz.check_m2(z, g, h, s0).constant == 0.0, 0.0
    S.check("zero_factor", "product with a zero factor has norm 0", zero, 0.0)

    def stable_check(name, anchor, one):
        data = {}

        def compute():
            if not data:
                data["base"] = [one(spec, tr) for tr in triples]
                data["fine"] = [one(ref, tr) for tr in triples] if cfg.refine else []
            return data

        def finite():
            b = compute()["base"]
            return bool(all(map(math.isfinite, b))), max(b)
        S.check(f"{name}/constant", anchor, finite, INF)
        if cfg.refine:
            def stable():
                d = compute()
                ch = _rel_change(max(d["base"]), max(d["fine"]))
                return ch < tol, ch
            S.check(f"{name}/refinement", anchor, stable, tol)

    for p0, q0 in ((2.0, 2.0), (1.0, 2.0)):
        stable_check(f"M1/p={p0:g},q={q0:g}", "M1: T^p_inf . T^inf_q -> T^p_q",
                     lambda g, tr, p0=p0, q0=q0: fz.check_m1(*fns(g, tr)[:2], p0, q0).constant)
    s_m2 = NormSpec(2, 2, 2, whitney=cfg.whitney)
    stable_check("M2/p=2,q=2,r=2", "M2: T^{p,inf}_inf . T^{inf,inf}_q . T^{inf,r}_inf -> T^{p,r}_q",
                 lambda g, tr: fz.check_m2(*fns(g, tr), s_m2).constant)
    for kind, s0 in (("thirds", NormSpec(2, 2, 2, whitney=cfg.whitney)),
                     ("thirds", NormSpec(2, 2, 2, -1.0, whitney=cfg.whitney)),
                     ("mixed", NormSpec(2, 2, 2, -1.0, whitney=cfg.whitney))):
        s1, s2 = (_third_split if kind == "thirds" else _mixed_split)(s0)
        stable_check(f"general/{kind}/{_spec_label(s0)}", "general multiplication under the Hölderian relation",
                     lambda g, tr, s0=s0, s1=s1, s2=s2: fz.check_multiplication(
                         fns(g, tr)[0], fns(g, tr)[1], s0, s1, s2).constant)

    def multiplier():
        s0 = NormSpec(2, 2, 2, whitney=cfg.whitney)
        s1, s2 = _third_split(s0)
        worst = 0.0
        for tr in triples[:3]:
            w = fns(spec, tr)[1]
            lower = estimate_multiplier_norm(w, s1, s0, probes=4, seed=cfg.seed)
            worst = max(worst, lower / tent_norm(w, s2))
        return bool(math.isfinite(worst)), worst
    S.check("multiplier_lower_bound", "multiplier norm lower bound against ||w||_{s2}", multiplier, INF)

    def scalar():
        s0 = NormSpec(2, 2, 2, whitney=cfg.whitney)
        w = GridFunction(spec, np.full(spec.shape, 3.0))
        est = estimate_multiplier_norm(w, s0, s0, probes=3, seed=cfg.seed)
        err = abs(est - 3.0) / 3.0
        return err <= 1e-12, err
    S.check("multiplier_scalar", "scalar multiplier has norm |c|", scalar, 1e-12)
    return S.records


# --------------------------------------------------------------------------
# measures
# --------------------------------------------------------------------------

def measures_suite(cfg: RunConfig):
    S = _Suite("measures", cfg)
    spec = cfg.grid
    tol = cfg.tol("measures")
    n = spec.n
    limit = 1.0 / ms.UNIT_BALL_VOLUME[n]

    def point_mass():
        m = max(1, int(spec.t_max / spec.dy / 4))
        t0 = (m + 0.5) * spec.dy
        y0 = np.full(n, 0.5) if n > 1 else 0.5
        mu = ms.DiscreteMeasure([y0] if n > 1 else [y0], [t0], [2.5], n)
        rep = ms.check_balayage_lemma(mu, spec)
        err = abs(rep["norm"] / limit - 1) if n == 1 else 0.0
        ok = rep["norm"] <= rep["fubini_constant"] * (1 + 1e-12) and err <= tol
        return ok, rep["norm"], rep["witness_ball"], {"fubini_constant": rep["fubini_constant"]}
    S.check("point_mass", "balayage lemma: ||E(dmu) dmu||_C <= 1/v_n", point_mass, tol)

    measures = [ms.random_measure(spec, 10, cfg.seed * 1000 + i) for i in range(cfg.measures)]

    def lemma():
        worst, wit, kmax = 0.0, None, 0.0
        for mu in measures:
            rep = ms.check_balayage_lemma(mu, spec, slack=tol)
            kmax = max(kmax, rep["fubini_constant"])
            if not rep["norm"] <= rep["fubini_constant"] * (1 + 1e-12):
                return False, rep["norm"], rep["witness_ball"]
            if rep["norm"] > worst:
                worst, wit = rep["norm"], rep["witness_ball"]
        return worst <= limit + tol, worst, wit, {"max_fubini_constant": kmax}
    S.check("random_10_atom", "balayage lemma: ||E(dmu) dmu||_C <= 1/v_n", lemma, limit + tol)

    def mass_identity():
        worst = 0.0
        for mu in measures:
            v = ms.integrate_balayage(mu, spec)
            worst = max(worst, abs(v / (ms.UNIT_BALL_VOLUME[n] * mu.totalMass) - 1))
        bound = 1e-10 if n == 1 else tol
        return worst <= bound, worst
    S.check("total_mass_identity", "Fubini: int balayage = v_n total mass", mass_identity,
            1e-10 if n == 1 else tol)

    data = {}

    def fact():
        if not data:
            data["r"] = [ms.factorize_measure(mu, spec) for mu in measures]
        return data["r"]

    def fact_recon():
        e = max(r.reconstruction_error for r in fact())
        return e <= 1e-12, e
    S.check("factorization/reconstruction", "|dmu| = E^{-1} . E |dmu| on every atom", fact_recon, 1e-12)

    def fact_t1():
        rs = fact()
        c = max(r.t1_ratio for r in rs)
        km = max(r.maximal_constant for r in rs)
        ok = all(r.holder_ok for r in rs) and math.isfinite(c) and math.isfinite(km)
        return ok, c, None, {"maximal_constant": km}
    S.check("factorization/T1_inf_factor", "||E^{-1}||_{T^1_inf} <= C total mass", fact_t1, INF)

    def fact_carleson():
        c = max(r.carleson_norm for r in fact())
        return c <= limit + tol, c
    S.check("factorization/carleson_factor", "||E |dmu| ||_C <= 1/v_n", fact_carleson, limit + tol)

    def carleson_inequality():
        worst = 0.0
        for i in range(max(1, cfg.measures // 10)):
            f = random_function(spec, ("lognormal-noise", "smooth-bump-mix")[i % 2], cfg.seed * 77 + i)
            mu = ms.cell_measure(spec, cfg.seed * 91 + i, 40)
            worst = max(worst, ms.carleson_inequality_ratio(f, mu, 2.0))
        return bool(math.isfinite(worst)), worst
    S.check("carleson_inequality", "int |f|^p d|mu| <= C ||f||^p_{T^p_inf} ||mu||_C", carleson_inequality, INF)

    def f2_balayage():
        s0 = NormSpec(2, 2, 2, whitney=cfg.whitney)
        worst_err, worst_c = 0.0, 0.0
        for i in range(3):
            u = random_function(spec, ("lognormal-noise", "smooth-bump-mix")[i % 2], cfg.seed * 31 + i)
            WU = whitney_average_levels(spec, u.level_major(), s0.r, cfg.whitney.pair)
            ut = conical_A(WU, s0.q, spec=spec)
            dens = WU ** s0.q / spec.t.reshape((-1,) + (1,) * n)
            mu = ms.DiscreteMeasure.from_density(GridFunction.from_level_major(spec, dens))
            bal = ms.balayage_grid(mu, spec)
            worst_err = max(worst_err, float(np.max(np.abs(bal - ut ** s0.q) / ut ** s0.q)))
            E = ms.extension_at_atoms(mu, spec, bal)
            c = ms.carleson_norm_measure(mu, spec, weights=E * mu.mass, family="ladder")
            worst_c = max(worst_c, c / ms.fubini_constant(mu, spec))
        return worst_err <= 1e-10 and worst_c <= 1 + 1e-12, worst_err, None, {"carleson_over_fubini": worst_c}
    S.check("F2_balayage_route", "balayage of W(u)^q/t equals A_q(W u)^q", f2_balayage, 1e-10)
    return S.records


# --------------------------------------------------------------------------
# duality
# --------------------------------------------------------------------------

def duality_suite(cfg: RunConfig):
    S = _Suite("duality", cfg)
    spec = cfg.grid
    tol = cfg.tol("duality")
    ref = spec.refine()
    pairs = [(("lognormal-noise", cfg.seed * 500 + i), ("smooth-bump-mix", cfg.seed * 500 + 250 + i))
             if i % 2 == 0 else
             (("smooth-bump-mix", cfg.seed * 500 + i), ("lognormal-noise", cfg.seed * 500 + 250 + i))
             for i in range(cfg.pairs)]
    n_fine = max(1, cfg.pairs // 5)

    def ratio(g, pr, s, sd, beta0):
        f = random_function(g, *pr[0])
        h = random_function(g, *pr[1])
        lhs = abs(pairing(f, h, beta0))
        rhs = tent_norm(f, s) * tent_norm(h, sd)
        return lhs / rhs

    for p, q, r in ((2.0, 2.0, 2.0), (4.0, 2.0, 2.0), (2.0, 4.0, 4.0)):
        for beta0 in (0.0, -1.0):
            beta = beta0 / 2
            s = NormSpec(p, q, r, beta, whitney=cfg.whitney)
            sd = NormSpec(dual_exponent(p), dual_exponent(q), dual_exponent(r), beta0 - beta,
                          whitney=cfg.whitney)
            label = f"p={p:g},q={q:g},r={r:g},beta0={beta0:g}"
            data = {}

            def compute(s=s, sd=sd, beta0=beta0, data=data):
                if not data:
                    data["base"] = np.array([ratio(spec, pr, s, sd, beta0) for pr in pairs])
                    if cfg.refine:
                        data["fine"] = np.array([ratio(ref, pr, s, sd, beta0) for pr in pairs[:n_fine]])
                return data

            def bound(compute=compute):
                c = compute()["base"]
                return bool(np.all(np.isfinite(c))), float(c.max())
            S.check(f"{label}/constant", "pairing bound |(f,h)_beta0| <= C ||f|| ||h||_dual", bound, INF)
            if cfg.refine:
                def stable(compute=compute):
                    d = compute()
                    ch = _rel_change(float(d["base"][:n_fine].max()), float(d["fine"].max()))
                    return ch < tol, ch
                S.check(f"{label}/refinement", "pairing bound |(f,h)_beta0| <= C ||f|| ||h||_dual",
                        stable, tol)
    return S.records


SUITE_FUNCS = {
    "geometry": geometry_suite,
    "functionals": functionals_suite,
    "coincidence": coincidence_suite,
    "factorization": factorization_suite,
    "multiplication": multiplication_suite,
    "measures": measures_suite,
    "duality": duality_suite,
}
