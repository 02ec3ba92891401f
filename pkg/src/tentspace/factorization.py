"""Constructive factorizations of tent-space functions and the matching
multiplication checks.

Every factorizer works on moduli: it factors ``|u|`` and sets all factors to
zero off the support of ``u``.  The factors therefore inherit the support
margin of ``u`` and every Whitney average below is well defined.
"""

from dataclasses import dataclass, field
from fractions import Fraction
import math

import numpy as np

from .functionals import (DEFAULT_WHITNEY, INF, NormSpec, ball_average, conical_A, exact_reciprocal,
                          maximal_function, nontangential_N, tent_norm,
                          whitney_average_levels)
from .geometry import WhitneyParams, derive_params
from .grid import GridError, GridFunction, GridSpec, write_grid_function


class FactorizationError(GridError):
    """Input outside a construction's hypotheses."""


# --------------------------------------------------------------------------
# exponent bookkeeping
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class HolderTriplet:
    """Extended exponents with ``1/e0 = 1/e1 + 1/e2`` in exact arithmetic."""

    e1: float
    e2: float
    e0: float

    def __post_init__(self):
        if not holder_relation(self.e1, self.e2, self.e0):
            raise FactorizationError(
                f"1/{self.e0} != 1/{self.e1} + 1/{self.e2} in exact arithmetic")

    @property
    def theta(self):
        """Share of the first exponent: ``(1/e1) / (1/e0)``, 1/2 if ``e0 = inf``."""
        r0 = exact_reciprocal(self.e0)
        if r0 == 0:
            return Fraction(1, 2)
        return exact_reciprocal(self.e1) / r0


def holder_relation(e1, e2, e0):
    return exact_reciprocal(e0) == exact_reciprocal(e1) + exact_reciprocal(e2)


def _exact(x):
    return Fraction(x).limit_denominator(10 ** 9)


def check_holder(s0: NormSpec, s1: NormSpec, s2: NormSpec):
    """Raise naming the first coordinate where ``(s1, s2) -> s0`` is not Hölderian."""
    for name in ("p", "q", "r"):
        e0, e1, e2 = (getattr(s, name) for s in (s0, s1, s2))
        if None in (e0, e1, e2):
            raise FactorizationError(f"coordinate {name}: Whitney exponents must all be given")
        if not holder_relation(e1, e2, e0):
            raise FactorizationError(f"coordinate {name}: 1/{e0} != 1/{e1} + 1/{e2}")
    if _exact(s0.beta) != _exact(s1.beta) + _exact(s2.beta):
        raise FactorizationError(f"coordinate beta: {s0.beta} != {s1.beta} + {s2.beta}")
    if not (s0.whitney == s1.whitney == s2.whitney and s0.aperture == s1.aperture == s2.aperture):
        raise FactorizationError("Whitney parameters and apertures must agree across the triplet")


# --------------------------------------------------------------------------
# results
# --------------------------------------------------------------------------

@dataclass
class FactorResult:
    """Factors of ``|u|`` with their target spaces and norms.

    ``constant`` is the norm product over the source norm.
    """

    construction: str
    factors: list
    target_specs: list
    norms: list
    source_spec: NormSpec
    source_norm: float
    reconstruction_error: float
    params: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    @property
    def constant(self):
        prod = math.prod(self.norms)
        if self.source_norm == 0:
            return 0.0 if prod == 0 else INF
        return prod / self.source_norm

    def product(self) -> GridFunction:
        vals = np.ones(self.factors[0].spec.shape)
        for f in self.factors:
            vals = vals * f.abs
        return self.factors[0].with_values(vals)

    def manifest(self, i):
        ps = " ".join(f"{k}={v}" for k, v in sorted(self.params.items()))
        return (f"construction={self.construction} factor={i + 1}/{len(self.factors)} "
                f"target={self.target_specs[i]} source={self.source_spec} {ps}").strip()

    def write(self, stem):
        """Write ``<stem>.f1.txt``, ``<stem>.f2.txt``... and return the paths."""
        paths = []
        for i, f in enumerate(self.factors):
            p = f"{stem}.f{i + 1}.txt"
            write_grid_function(f, p, manifest=self.manifest(i))
            paths.append(p)
        return paths


def _weight(spec, beta):
    return (spec.t ** (-beta)).reshape((1,) * spec.n + (-1,))


def _modulus(u: GridFunction):
    a = u.abs
    if not np.all(np.isfinite(a)):
        raise FactorizationError("input has non-finite values")
    return a


def _reconstruction_error(u_abs, factors):
    prod = np.ones_like(u_abs)
    for f in factors:
        prod = prod * f.abs
    supp = u_abs > 0
    if not supp.any():
        return 0.0
    return float(np.max(np.abs(prod[supp] - u_abs[supp])))


def _quotient(num, den, supp):
    """``num/den`` on ``supp`` and 0 elsewhere; ``den`` must be positive on ``supp``."""
    if np.any(den[supp] <= 0):
        raise FactorizationError("quotient undefined: divisor vanishes on the support")
    out = np.zeros_like(num)
    out[supp] = num[supp] / den[supp]
    return out


def _lm(spec, vals):
    return np.moveaxis(vals, -1, 0)


def _from_lm(arr):
    return np.moveaxis(arr, 0, -1)


def _need_r(s0):
    if s0.r is None:
        raise FactorizationError("the constructions need a Whitney exponent r0 (got the classical scale)")


# --------------------------------------------------------------------------
# covering used to re-express norms between Whitney parameters
# --------------------------------------------------------------------------

def _box_volume(a1, a2, n, s=1.0):
    return (2.0 if n == 1 else math.pi) * (a1 * s) ** n * (a2 * s - s / a2)


def lattice_covering(base: WhitneyParams | tuple, fine: WhitneyParams | tuple, n: int = 1):
    """Cover one base Whitney box by fine boxes on an explicit lattice.

    Heights: fine boxes at ``s_j = (t/A2) a2 c^j`` with ``c`` just below
    ``a2**2``, enough to reach ``A2 t``.  Boundary: intervals (n=1) or
    squares inscribed in the fine balls (n=2) tiling the base ball.

    Returns ``(N, volume_ratio)`` with ``volume_ratio = sum |fine_i| / |base|``.
    The box ``W(y,t)`` then satisfies
    ``W_r(w)(y,t) <= volume_ratio**(1/r) * sup W'_r(w)``.
    """
    A1, A2 = base.pair if isinstance(base, WhitneyParams) else base
    a1, a2 = fine.pair if isinstance(fine, WhitneyParams) else fine
    c = a2 ** 2 * (1 - 1e-9)
    L, U = 1.0 / A2, A2
    s = [L * a2]
    while s[-1] * a2 < U:
        s.append(s[-1] * c)
    N = 0
    vol = 0.0
    for sj in s:
        rho = a1 * sj
        if n == 1:
            m = math.ceil(A1 / rho) + 1
        else:
            m = (math.ceil(2 * A1 / (rho * math.sqrt(2.0))) + 1) ** 2
        N += m
        vol += m * _box_volume(a1, a2, n, sj)
    return N, vol / _box_volume(A1, A2, n)


# --------------------------------------------------------------------------
# F1: T^{p,r}_q -> T^{p,inf}_q . T^{inf,r}_inf
# --------------------------------------------------------------------------

def _f1_core(spec: GridSpec, U, s0: NormSpec):
    """F1 on an unweighted level-major modulus ``U``; returns level-major (v, w, extras)."""
    d = derive_params(s0.whitney)
    r0 = s0.r
    supp = U > 0
    star = whitney_average_levels(spec, U, r0, d.star)
    v = np.where(supp, star, 0.0)
    w = _quotient(U, v, supp)

    # W*_inf(v) <= K W_r(u) and W**_r(w) <= K, on the grid
    base_r = whitney_average_levels(spec, U, r0, s0.whitney.pair)
    star_inf_v = whitney_average_levels(spec, v, INF, d.star)
    pos = base_r > 0
    if np.any(star_inf_v[~pos] > 0):
        k_v = INF
    else:
        k_v = float(np.max(star_inf_v[pos] / base_r[pos])) if pos.any() else 0.0
    dstar_w = whitney_average_levels(spec, w, r0, d.doubleStar)
    N, vr = lattice_covering(s0.whitney, d.doubleStar, spec.n)
    extras = {"K_star_v": k_v, "K_dstar_w": float(dstar_w.max()),
              "w_norm_double_star": float(dstar_w.max()),
              "covering_N": N, "covering_factor": vr ** inv_r(r0)}
    return v, w, extras


def inv_r(r):
    return 0.0 if r == INF else 1.0 / r


def factorize_F1(u: GridFunction, s0: NormSpec) -> FactorResult:
    """``v = W*_{r0}(u)`` and ``w = u/v`` on the support.

    Targets ``T^{p0,inf}_{q0,beta0}`` (weight carried by ``v``) and
    ``T^{inf,r0}_inf``.  The ``w`` norm is also reported with the
    double-star parameters and the covering factor that converts it back.
    """
    _need_r(s0)
    spec = u.spec
    ua = _modulus(u)
    u.check_margin(s0.whitney.alpha2)
    U = _lm(spec, ua * _weight(spec, s0.beta))
    v, w, extras = _f1_core(spec, U, s0)
    vf = GridFunction(spec, _from_lm(v) * _weight(spec, -s0.beta))
    wf = GridFunction(spec, _from_lm(w))
    sv = s0.replace(r=INF)
    sw = s0.replace(p=INF, q=INF, beta=0.0)
    norms = [tent_norm(vf, sv), tent_norm(wf, sw)]
    extras["covering_bound_holds"] = bool(
        norms[1] <= extras["covering_factor"] * extras["w_norm_double_star"] * (1 + 1e-12))
    return FactorResult("F1", [vf, wf], [sv, sw], norms, s0, tent_norm(u, s0),
                        _reconstruction_error(ua, [vf, wf]), {}, extras)


# --------------------------------------------------------------------------
# F2: T^{p,r}_q -> T^{p,inf}_inf . T^{inf,r}_q
# --------------------------------------------------------------------------

def _f2_core(spec: GridSpec, U, s0: NormSpec, ptilde):
    p0, q0, r0 = s0.p, s0.q, s0.r
    if not (p0 < INF and q0 < INF):
        raise FactorizationError("F2 needs finite p0 and q0")
    if not 0 < ptilde < p0:
        raise FactorizationError(f"ptilde must lie in (0, p0={p0}), got {ptilde}")
    supp = U > 0
    WU = whitney_average_levels(spec, U, r0, s0.whitney.pair)
    ut = conical_A(WU, q0, s0.aperture, spec=spec)
    if np.any(ut <= 0):
        raise FactorizationError("the conical functional of W(u) vanishes at a boundary point")
    h = np.power(ut, ptilde)
    v_full = np.power(ball_average(spec, h, spec.t), 1.0 / ptilde)
    v = np.where(supp, v_full, 0.0)
    w = _quotient(U, v, supp)

    Nv = nontangential_N(whitney_average_levels(spec, v, INF, s0.whitney.pair), spec=spec)
    Mh = np.power(maximal_function(spec, h), 1.0 / ptilde)
    extras = {"K_maximal": float(np.max(Nv / Mh)), "u_tilde_min": float(ut.min()),
              "u_tilde_max": float(ut.max())}
    return v, w, extras, ut


def factorize_F2(u: GridFunction, s0: NormSpec, ptilde=None) -> FactorResult:
    """``v = P_0[u~^pt]^{1/pt}`` with ``u~ = A_{q0}(W_{r0} u)``, ``w = u/v``.

    Targets ``T^{p0,inf}_{inf,beta0}`` and ``T^{inf,r0}_{q0}``.
    ``ptilde`` defaults to ``p0/2``.
    """
    _need_r(s0)
    spec = u.spec
    ptilde = s0.p / 2 if ptilde is None else ptilde
    ua = _modulus(u)
    u.check_margin(s0.whitney.alpha2)
    U = _lm(spec, ua * _weight(spec, s0.beta))
    v, w, extras, _ = _f2_core(spec, U, s0, ptilde)
    vf = GridFunction(spec, _from_lm(v) * _weight(spec, -s0.beta))
    wf = GridFunction(spec, _from_lm(w))
    sv = s0.replace(r=INF, q=INF)
    sw = s0.replace(p=INF, beta=0.0)
    norms = [tent_norm(vf, sv), tent_norm(wf, sw)]
    return FactorResult("F2", [vf, wf], [sv, sw], norms, s0, tent_norm(u, s0),
                        _reconstruction_error(ua, [vf, wf]), {"ptilde": ptilde}, extras)


# --------------------------------------------------------------------------
# F3: T^{p,r}_q -> T^{p,inf}_inf . T^{inf,inf}_q . T^{inf,r}_inf
# --------------------------------------------------------------------------

def _f3_core(spec, U, s0: NormSpec, ptilde):
    v1, w1, ex1 = _f1_core(spec, U, s0)
    supp = U > 0
    ones = supp.astype(float)
    if s0.p == INF:
        a, b, ex2 = ones, v1, {}
    elif s0.q == INF:
        a, b, ex2 = v1, ones, {}
    else:
        a, b, ex2, _ = _f2_core(spec, v1, s0.replace(r=INF, beta=0.0), ptilde)
    extras = {f"F1_{k}": v for k, v in ex1.items()}
    extras.update({f"F2_{k}": v for k, v in ex2.items()})
    return a, b, w1, extras


def factorize_F3(u: GridFunction, s0: NormSpec, ptilde=None) -> FactorResult:
    """F1, then F2 on the first F1 factor (trivial when ``p0`` or ``q0`` is infinite)."""
    _need_r(s0)
    spec = u.spec
    ptilde = s0.p / 2 if ptilde is None else ptilde
    ua = _modulus(u)
    u.check_margin(s0.whitney.alpha2)
    U = _lm(spec, ua * _weight(spec, s0.beta))
    a, b, c, extras = _f3_core(spec, U, s0, ptilde)
    fs = [GridFunction(spec, _from_lm(a) * _weight(spec, -s0.beta)),
          GridFunction(spec, _from_lm(b)), GridFunction(spec, _from_lm(c))]
    specs = [s0.replace(r=INF, q=INF), s0.replace(p=INF, r=INF, beta=0.0),
             s0.replace(p=INF, q=INF, beta=0.0)]
    norms = [tent_norm(f, s) for f, s in zip(fs, specs)]
    return FactorResult("F3", fs, specs, norms, s0, tent_norm(u, s0),
                        _reconstruction_error(ua, fs), {"ptilde": ptilde}, extras)


# --------------------------------------------------------------------------
# powers and the general Hölderian split
# --------------------------------------------------------------------------

def _power0(x, e):
    """``x**e`` with ``0**0 = 0`` so that every factor vanishes off the support."""
    if e == 0:
        return (x > 0).astype(float)
    return np.power(x, e)


def power_split(u: GridFunction, theta) -> tuple:
    """``(|u|^{1-theta}, |u|^theta)``; exponent 0 gives the support indicator."""
    if not 0 <= theta <= 1:
        raise FactorizationError("theta must lie in [0, 1]")
    ua = _modulus(u)
    return (u.with_values(_power0(ua, 1 - float(theta))), u.with_values(_power0(ua, float(theta))))


def factorize_general(u: GridFunction, s0: NormSpec, s1: NormSpec, s2: NormSpec,
                      ptilde=None) -> FactorResult:
    """Factor ``T_{s0} -> T_{s1} . T_{s2}`` for a Hölderian triplet.

    F3 splits the unweighted ``|u| t^{-beta0}`` into extremal factors
    ``(a, b, c)``; each is split by powers with shares
    ``theta = (1/e1)/(1/e0)`` per coordinate, then regrouped:
    ``f1 = a^thp b^thq c^thr t^{beta1}`` and ``f2`` takes the complements.
    """
    check_holder(s0, s1, s2)
    _need_r(s0)
    spec = u.spec
    ptilde = s0.p / 2 if ptilde is None else ptilde
    ua = _modulus(u)
    u.check_margin(s0.whitney.alpha2)
    U = _lm(spec, ua * _weight(spec, s0.beta))
    a, b, c, extras = _f3_core(spec, U, s0, ptilde)
    th = {k: HolderTriplet(getattr(s1, k), getattr(s2, k), getattr(s0, k)).theta for k in "pqr"}
    f1 = _power0(a, float(th["p"])) * _power0(b, float(th["q"])) * _power0(c, float(th["r"]))
    f2 = (_power0(a, float(1 - th["p"])) * _power0(b, float(1 - th["q"]))
          * _power0(c, float(1 - th["r"])))
    fs = [GridFunction(spec, _from_lm(f1) * _weight(spec, -s1.beta)),
          GridFunction(spec, _from_lm(f2) * _weight(spec, -s2.beta))]
    norms = [tent_norm(fs[0], s1), tent_norm(fs[1], s2)]
    params = {"ptilde": ptilde, **{f"theta_{k}": str(v) for k, v in th.items()}}
    return FactorResult("general", fs, [s1, s2], norms, s0, tent_norm(u, s0),
                        _reconstruction_error(ua, fs), params, extras)


FACTORIZERS = {"F1": factorize_F1, "F2": factorize_F2, "F3": factorize_F3}


# --------------------------------------------------------------------------
# multiplication
# --------------------------------------------------------------------------

@dataclass
class MultiplicationReport:
    kind: str
    constant: float
    bound: float
    passed: bool
    witness: object = None
    detail: dict = field(default_factory=dict)


def _ratio(num, den):
    if num == 0:
        return 0.0
    return INF if den == 0 else num / den


def box_holder_chain(f: GridFunction, g: GridFunction, h: GridFunction, r,
                     params=None, tol=1e-12) -> MultiplicationReport:
    """Per-box ``W_r(fgh) <= W_inf(f) W_inf(g) W_r(h)``; constant is the worst ratio."""
    spec = f.spec
    params = DEFAULT_WHITNEY.pair if params is None else getattr(params, "pair", params)
    F, G, H = f.level_major(), g.level_major(), h.level_major()
    lhs = whitney_average_levels(spec, F * G * H, r, params)
    rhs = (whitney_average_levels(spec, F, INF, params)
           * whitney_average_levels(spec, G, INF, params)
           * whitney_average_levels(spec, H, r, params))
    pos = rhs > 0
    if np.any(lhs[~pos] > 0):
        idx = np.argwhere((lhs > 0) & ~pos)[0]
        return MultiplicationReport("M2-box", INF, 1 + tol, False, tuple(int(i) for i in idx))
    if not pos.any():
        return MultiplicationReport("M2-box", 0.0, 1 + tol, True)
    ratio = np.where(pos, lhs / np.where(pos, rhs, 1.0), 0.0)
    worst = float(ratio.max())
    idx = tuple(int(i) for i in np.unravel_index(int(np.argmax(ratio)), ratio.shape))
    ok = worst <= 1 + tol
    return MultiplicationReport("M2-box", worst, 1 + tol, ok, None if ok else idx)


def _product(*fs):
    vals = np.ones(fs[0].spec.shape)
    for f in fs:
        vals = vals * f.abs
    return fs[0].with_values(vals)


def check_m1(f: GridFunction, g: GridFunction, p0, q0, aperture=1.0, bound=INF):
    """``||fg||_{T^p0_q0} <= C ||f||_{T^p0_inf} ||g||_{T^inf_q0}`` (classical scale)."""
    s0 = NormSpec(p0, q0, aperture=aperture)
    lhs = tent_norm(_product(f, g), s0)
    nf = tent_norm(f, s0.replace(q=INF))
    ng = tent_norm(g, s0.replace(p=INF))
    C = _ratio(lhs, nf * ng)
    return MultiplicationReport("M1", C, bound, C <= bound,
                                detail={"lhs": lhs, "f": nf, "g": ng})


def check_m2(f, g, h, s0: NormSpec, bound=INF):
    """``||fgh||_{s0} <= C ||f||_{T^{p0,inf}_inf} ||g||_{T^{inf,inf}_q0} ||h||_{T^{inf,r0}_inf}``."""
    _need_r(s0)
    lhs = tent_norm(_product(f, g, h), s0)
    nf = tent_norm(f, s0.replace(q=INF, r=INF, beta=0.0))
    ng = tent_norm(g, s0.replace(p=INF, r=INF, beta=0.0))
    nh = tent_norm(h, s0.replace(p=INF, q=INF, beta=s0.beta))
    C = _ratio(lhs, nf * ng * nh)
    return MultiplicationReport("M2", C, bound, C <= bound,
                                detail={"lhs": lhs, "f": nf, "g": ng, "h": nh})


def check_multiplication(f1: GridFunction, f2: GridFunction, s0: NormSpec, s1: NormSpec,
                         s2: NormSpec, bound=INF):
    """``||f1 f2||_{s0} <= C ||f1||_{s1} ||f2||_{s2}`` for a Hölderian triplet."""
    check_holder(s0, s1, s2)
    lhs = tent_norm(_product(f1, f2), s0)
    n1, n2 = tent_norm(f1, s1), tent_norm(f2, s2)
    C = _ratio(lhs, n1 * n2)
    return MultiplicationReport("general", C, bound, C <= bound,
                                detail={"lhs": lhs, "f1": n1, "f2": n2})
