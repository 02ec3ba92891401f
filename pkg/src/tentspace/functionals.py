"""Tent-space functionals and quasi-norms on a :class:`GridSpec`.

The boundary functionals come in two flavours.  Called with ``x=None`` they
evaluate at every boundary sample through the window kernels.  Called with a
boundary coordinate ``x`` they evaluate directly from cell-centre membership;
the grid path is checked against this pointwise path in the tests.
"""

from dataclasses import dataclass, field
from fractions import Fraction
import math

import numpy as np

from .geometry import WhitneyParams, torus_distance_n
from .grid import (CellMeasure, GridError, GridFunction, GridSpec, cell_points,
                   window_max, window_sum)

INF = math.inf
DEFAULT_WHITNEY = WhitneyParams(0.25, 2.0)


def inv(e):
    """Reciprocal of an extended exponent with ``1/inf = 0``."""
    return 0.0 if e == INF else 1.0 / e


def exact_reciprocal(e) -> Fraction:
    """Reciprocal as an exact rational (``inf -> 0``)."""
    if e == INF:
        return Fraction(0)
    if isinstance(e, Fraction):
        return 1 / e
    return 1 / Fraction(e).limit_denominator(10 ** 9)


@dataclass(frozen=True)
class NormSpec:
    """Exponents and weight selecting ``T^{p,r}_{q,beta}``.

    ``r=None`` is the sentinel for the classical scale ``T^p_q`` (no Whitney
    average), so that coincidence with ``r=q`` stays a testable statement.
    """

    p: float
    q: float
    r: float | None = None
    beta: float = 0.0
    aperture: float = 1.0
    whitney: WhitneyParams = field(default=DEFAULT_WHITNEY)

    def __post_init__(self):
        for name in ("p", "q"):
            v = getattr(self, name)
            if not v > 0:
                raise GridError(f"exponent {name} must lie in (0, inf], got {v}")
        if self.r is not None and not self.r > 0:
            raise GridError(f"exponent r must lie in (0, inf], got {self.r}")
        if not self.aperture > 0:
            raise GridError("aperture must be positive")

    @property
    def category(self):
        if self.p < INF and self.q < INF:
            return "A"
        if self.q < INF:
            return "B"
        if self.p < INF:
            return "C"
        return "D"

    @property
    def tau(self):
        return min(self.p, self.q, INF if self.r is None else self.r)

    @property
    def banach(self):
        return self.tau >= 1

    def replace(self, **kw):
        d = dict(p=self.p, q=self.q, r=self.r, beta=self.beta,
                 aperture=self.aperture, whitney=self.whitney)
        d.update(kw)
        return NormSpec(**d)

    def __str__(self):
        r = "none" if self.r is None else self.r
        return f"T[p={self.p},q={self.q},r={r},beta={self.beta}]"


# --------------------------------------------------------------------------
# Whitney averages
# --------------------------------------------------------------------------

def _box_bands(spec: GridSpec, a2):
    L = spec.box_level_halfwidth(a2)
    k = np.arange(spec.t_levels)
    return L, np.clip(k - L, 0, spec.t_levels - 1), np.clip(k + L, 0, spec.t_levels - 1)


def _virtual_dt_sum(spec: GridSpec, L):
    """Height measure of every box, continuing the geometric grid past its ends."""
    k = np.arange(spec.t_levels)
    total = np.zeros(spec.t_levels)
    for d in range(-L, L + 1):
        total += spec.t_min * np.exp(spec.log_rho * (k + d)) * spec.log_rho
    return total


def whitney_average_levels(spec: GridSpec, F, r, params):
    """Whitney ``L^r`` average of a level-major non-negative array."""
    from . import _kernels

    a1, a2 = params
    L, lo, hi = _box_bands(spec, a2)
    radii = a1 * spec.t
    if r == INF:
        M = _kernels.level_band_max(F, lo, hi)
        return window_max(spec, M, radii)
    S = _kernels.level_band_sum(np.power(F, r), spec.dt, lo, hi)
    num = window_sum(spec, S, radii)
    _, counts = spec.window(radii)
    den = counts * _virtual_dt_sum(spec, L)
    den = den.reshape((-1,) + (1,) * spec.n)
    return np.power(num / den, 1.0 / r)


def whitney_average(f: GridFunction, r, params=DEFAULT_WHITNEY.pair, check=True) -> GridFunction:
    """``W_r(f)(y,t)``: ``L^r`` mean of ``|f|`` over the Whitney box at ``(y,t)``.

    ``r=inf`` gives the box maximum.  Raises :class:`SupportMarginError` if
    ``f`` is non-zero on a level whose boxes leave the grid.
    """
    if isinstance(params, WhitneyParams):
        params = params.pair
    if check:
        f.check_margin(params[1])
    out = whitney_average_levels(f.spec, f.level_major(), r, params)
    return GridFunction.from_level_major(f.spec, out)


# --------------------------------------------------------------------------
# boundary functionals
# --------------------------------------------------------------------------

def _levels(g):
    return g.level_major() if isinstance(g, GridFunction) else np.asarray(g)


def _spec_of(g, spec):
    if isinstance(g, GridFunction):
        return g.spec
    if spec is None:
        raise GridError("a GridSpec is needed for raw arrays")
    return spec


def _pointwise_mask(spec, x, radii_per_level):
    y, t = cell_points(spec)
    d = torus_distance_n(y, x, spec.n)
    return d < np.broadcast_to(radii_per_level, spec.shape)


def conical_sum_levels(spec, G, aperture):
    """``sum_k dy^n dt_k / t_k^{n+1} * (window sum of G at level k)``, per boundary point."""
    W = window_sum(spec, G, aperture * spec.t)
    wk = spec.cell_area * spec.dt / spec.t ** (spec.n + 1)
    acc = np.zeros(spec.boundary_shape)
    for k in range(spec.t_levels):
        acc += wk[k] * W[k]
    return acc


def conical_A(g, q, aperture=1.0, x=None, spec=None, method="direct"):
    """Conical functional ``(int_{Gamma_a(x)} |g|^q dydt/t^{n+1})^{1/q}``.

    ``method="prefix"`` (n=1 only) answers the per-level interval sums from
    a :class:`PrefixTable` instead of the direct window kernel.
    """
    spec = _spec_of(g, spec)
    G = np.power(_levels(g), q)
    if x is not None:
        mask = _pointwise_mask(spec, x, aperture * spec.t)
        w = CellMeasure(spec, "dydt/t^{n+1}").weights
        return math.fsum(np.moveaxis(np.where(mask, np.moveaxis(G, 0, -1) * w, 0.0), -1, 0)
                         .ravel().tolist()) ** (1.0 / q)
    if method == "prefix":
        from .grid import build_prefix_sums
        tab = build_prefix_sums(GridFunction.from_level_major(spec, G), CellMeasure(spec, "dydt/t^{n+1}"))
        W = tab.window_sums(aperture * spec.t)
        return np.power(np.sum(W, axis=0), 1.0 / q)
    return np.power(conical_sum_levels(spec, G, aperture), 1.0 / q)


def nontangential_N(g, aperture=1.0, x=None, spec=None):
    """Non-tangential maximal functional: max of ``|g|`` over cells in the cone."""
    spec = _spec_of(g, spec)
    G = _levels(g)
    if x is not None:
        mask = _pointwise_mask(spec, x, aperture * spec.t)
        vals = np.moveaxis(G, 0, -1)[mask]
        return float(vals.max()) if vals.size else 0.0
    M = window_max(spec, G, aperture * spec.t)
    return M.max(axis=0)


def ball_ladder(spec: GridSpec, steps_per_octave: int = 1, cap: float = 0.5):
    """Radii ``dy * 2**(j/steps)`` strictly below ``cap``."""
    radii = []
    j = 0
    while True:
        R = spec.dy * 2.0 ** (j / steps_per_octave)
        if not R < cap:
            break
        radii.append(R)
        j += 1
    return np.array(radii)


def tent_ratios(spec, G, aperture, radii):
    """``|B|^{-1} int_{tent of B} G dydt/t`` for every grid-centred ball.

    Returns an array of shape ``(len(radii),) + boundary_shape``.
    """
    wk = spec.cell_area * spec.dt / spec.t
    out = np.zeros((len(radii),) + spec.boundary_shape)
    for j, R in enumerate(radii):
        h = R - aperture * spec.t
        W = window_sum(spec, G, h)
        acc = np.zeros(spec.boundary_shape)
        for k in range(spec.t_levels):
            if h[k] > 0:
                acc += wk[k] * W[k]
        out[j] = acc / spec.ball_measure([R])[0]
    return out


def carleson_C(g, q, aperture=1.0, x=None, spec=None, radii=None):
    """Carleson functional over the grid-centred ball family.

    ``sup_{B ∋ x} (|B|^{-1} int_{tent_a(B)} |g|^q dydt/t)^{1/q}`` with ``B``
    ranging over balls centred at boundary samples with radii ``radii``
    (default: the dyadic ladder).
    """
    spec = _spec_of(g, spec)
    radii = ball_ladder(spec) if radii is None else np.asarray(radii, dtype=float)
    G = np.power(_levels(g), q)
    ratios = tent_ratios(spec, G, aperture, radii)
    if x is not None:
        d = torus_distance_n(spec.y, x, spec.n)
        best = 0.0
        for j, R in enumerate(radii):
            inside = d < R
            if inside.any():
                best = max(best, float(ratios[j][inside].max()))
        return best ** (1.0 / q)
    M = window_max(spec, ratios, radii)
    return np.power(M.max(axis=0), 1.0 / q)


def carleson_sup(g, q, aperture=1.0, spec=None, radii=None):
    """``sup_x C_q(g)(x)``: the supremum over every ball in the family."""
    spec = _spec_of(g, spec)
    radii = ball_ladder(spec) if radii is None else np.asarray(radii, dtype=float)
    ratios = tent_ratios(spec, np.power(_levels(g), q), aperture, radii)
    return float(ratios.max()) ** (1.0 / q)


def ball_average(spec: GridSpec, h, radii):
    """``P_0``: mean of boundary array ``h`` over open balls ``B(y, radii[k])``.

    ``h`` may hold ``+inf``; the mean is then ``+inf`` wherever an infinite
    sample falls in the ball.
    """
    H = np.broadcast_to(h, (len(radii),) + spec.boundary_shape)
    S = window_sum(spec, H, radii)
    _, counts = spec.window(radii)
    return S / counts.reshape((-1,) + (1,) * spec.n)


def maximal_function(spec: GridSpec, h, radii=None):
    """Discrete Hardy-Littlewood maximal function over grid-centred balls."""
    radii = ball_ladder(spec) if radii is None else np.asarray(radii, dtype=float)
    avgs = ball_average(spec, h, radii)
    return window_max(spec, avgs, radii).max(axis=0)


# --------------------------------------------------------------------------
# quasi-norms
# --------------------------------------------------------------------------

def boundary_lp(spec: GridSpec, h, p):
    """``L^p`` norm over the torus with uniform weight ``dy^n`` (max for p=inf)."""
    h = np.asarray(h, dtype=float)
    if p == INF:
        return float(h.max())
    return (math.fsum(np.power(h, p).ravel().tolist()) * spec.cell_area) ** (1.0 / p)


def weighted_levels(f: GridFunction, beta):
    """``|f| t^{-beta}`` in level-major layout."""
    F = f.level_major()
    if beta == 0:
        return F
    w = f.spec.t ** (-beta)
    return F * w.reshape((-1,) + (1,) * f.spec.n)


def prepared_levels(f: GridFunction, s: NormSpec, check=True):
    """Weighted and (unless ``s.r`` is None) Whitney-averaged ``|f|``."""
    G = weighted_levels(f, s.beta)
    if s.r is not None:
        if check:
            f.check_margin(s.whitney.alpha2)
        G = whitney_average_levels(f.spec, G, s.r, s.whitney.pair)
    return G


def tent_norm(f: GridFunction, s: NormSpec, radii=None) -> float:
    """Quasi-norm of ``f`` in ``T^{p,r}_{q,beta}`` (classical scale if ``s.r`` is None)."""
    spec = f.spec
    G = prepared_levels(f, s)
    cat = s.category
    if cat == "A":
        Aq = conical_A(G, s.q, s.aperture, spec=spec)
        return boundary_lp(spec, Aq, s.p)
    if cat == "B":
        return carleson_sup(G, s.q, s.aperture, spec=spec, radii=radii)
    if cat == "C":
        return boundary_lp(spec, nontangential_N(G, s.aperture, spec=spec), s.p)
    return float(G.max())


def boundary_functional(f: GridFunction, s: NormSpec, radii=None):
    """The boundary function whose ``L^p`` norm is the tent norm (category A-C)."""
    G = prepared_levels(f, s)
    if s.category == "A":
        return conical_A(G, s.q, s.aperture, spec=f.spec)
    if s.category == "B":
        return carleson_C(G, s.q, s.aperture, spec=f.spec, radii=radii)
    if s.category == "C":
        return nontangential_N(G, s.aperture, spec=f.spec)
    raise GridError("category D has no boundary functional")


def power_spec(s: NormSpec, theta):
    """Spec of ``[T^{p,r}_{q,beta}]^theta = T^{p/theta, r/theta}_{q/theta, beta*theta}``."""
    r = None if s.r is None else s.r / theta
    return s.replace(p=s.p / theta, q=s.q / theta, r=r, beta=s.beta * theta)


def power_identity_check(f: GridFunction, s: NormSpec, theta, rtol=1e-10):
    """Compare ``||f^{1/theta}||_s^theta`` with ``||f||_{power_spec(s, theta)}``."""
    if not 0 < theta <= 1:
        raise GridError("theta must lie in (0, 1]")
    lhs = tent_norm(f.with_values(np.power(f.abs, 1.0 / theta)), s) ** theta
    rhs = tent_norm(f, power_spec(s, theta))
    scale = max(abs(lhs), abs(rhs))
    err = 0.0 if scale == 0 else abs(lhs - rhs) / scale
    return {"lhs": lhs, "rhs": rhs, "rel_err": err, "passed": err <= rtol,
            "theta": theta, "spec": str(s)}


def pairing(f: GridFunction, h: GridFunction, beta0) -> float:
    """``(f, h)_{beta0} = int f h t^{-beta0-1} dydt``."""
    if f.spec != h.spec:
        raise GridError("pairing needs functions on the same grid")
    w = CellMeasure(f.spec, "dydt*t^(-beta-1)", beta=beta0).weights
    prod = np.asarray(f.values) * np.asarray(h.values) * w
    if np.iscomplexobj(prod):
        return complex(math.fsum(prod.real.ravel().tolist()), math.fsum(prod.imag.ravel().tolist()))
    return math.fsum(prod.ravel().tolist())


def dual_exponent(e):
    if e == 1:
        return INF
    if e == INF:
        return 1.0
    return e / (e - 1.0)
