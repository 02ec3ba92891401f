"""Cones, tents and Whitney boxes over the flat torus ``[0, 1)^n``.

All predicates use exact strict comparisons (no epsilon).  Points are passed
as boundary coordinates plus a height; every predicate broadcasts over numpy
arrays, with the boundary coordinate on the last axis when ``n > 1``.
"""

from dataclasses import dataclass
import math

import numpy as np


class GeometryError(ValueError):
    """Invalid geometric parameters."""


@dataclass(frozen=True)
class WhitneyParams:
    """Consistent Whitney parameters, ``0 < alpha1 < 1/alpha2 < 1``."""

    alpha1: float
    alpha2: float

    def __post_init__(self):
        a1, a2 = self.alpha1, self.alpha2
        if not (a1 > 0 and a2 > 1 and a1 < 1.0 / a2 < 1.0):
            raise GeometryError(
                f"Whitney parameters ({a1}, {a2}) are not consistent: need 0 < alpha1 < 1/alpha2 < 1")

    @property
    def pair(self):
        return (self.alpha1, self.alpha2)


@dataclass(frozen=True)
class DerivedParams:
    alpha0: float
    alphaC: float
    alphaT: float
    alphaStarUpper: float
    alphaStarLower: float
    star: tuple
    doubleStar: tuple
    wStar: tuple
    wDoubleStar: tuple

    def chain(self, w):
        """The values ``a1**, a1*, a1, 1/a2, 1/a2*, 1/a2**`` in increasing order."""
        return (self.doubleStar[0], self.star[0], w.alpha1,
                1.0 / w.alpha2, 1.0 / self.star[1], 1.0 / self.doubleStar[1])


def derive_params(w: WhitneyParams) -> DerivedParams:
    a1, a2 = w.alpha1, w.alpha2
    r2 = math.sqrt(a2)
    r4 = math.sqrt(r2)
    star = (a1 / (1.0 + r2), r2)
    double_star = (a1 / (2.0 * (1.0 + r2) * r4), r4)
    return DerivedParams(
        alpha0=(1.0 - a1) / a2,
        alphaC=a2 + a1 * a2,
        alphaT=a2 + a1 / a2,
        alphaStarUpper=a2 + a1,
        alphaStarLower=1.0 / a2 - a1,
        star=star,
        doubleStar=double_star,
        wStar=(a1 / a2, a2),
        wDoubleStar=(a1 * a2, a2),
    )


def chain_holds(w: WhitneyParams, d: DerivedParams | None = None) -> bool:
    d = derive_params(w) if d is None else d
    c = d.chain(w)
    return c[0] > 0 and all(a < b for a, b in zip(c, c[1:])) and c[-1] < 1


def max_aperture(w: WhitneyParams) -> float:
    """Largest aperture the verification suites place on the torus."""
    d = derive_params(w)
    return max(d.alphaC, d.alphaT, d.alphaStarUpper, w.alpha2)


# --------------------------------------------------------------------------
# torus metric
# --------------------------------------------------------------------------

def torus_distance(a, b):
    """Wrap-around Euclidean distance on ``[0,1)^n``.

    Scalars and 1-d arrays are treated as ``n = 1`` coordinates; arrays whose
    last axis has length 2 are ``n = 2`` when passed as such by the caller
    via ``n=2`` helpers below.
    """
    d = np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)) % 1.0
    return np.minimum(d, 1.0 - d)


def torus_distance_n(a, b, n):
    d = torus_distance(a, b)
    if n == 1:
        return d
    return np.sqrt(np.sum(d * d, axis=-1))


# --------------------------------------------------------------------------
# predicates
# --------------------------------------------------------------------------

def cone_contains(x, y, t, aperture, n=1):
    """True iff ``(y, t)`` lies in the open cone of given aperture at ``x``."""
    if not np.all(np.asarray(aperture) > 0):
        raise GeometryError("aperture must be positive")
    return torus_distance_n(y, x, n) < aperture * np.asarray(t)


def tent_contains(center, radius, y, t, aperture, closed=False, n=1):
    """True iff ``B(y, aperture*t)`` sits inside ``B(center, radius)``.

    The open tent uses ``<``; the closed variant uses ``<=``.
    """
    radius = np.asarray(radius, dtype=float)
    if not np.all((radius > 0) & (radius <= 0.5)):
        raise GeometryError("ball radius must lie in (0, 1/2]")
    lhs = torus_distance_n(y, center, n) + aperture * np.asarray(t)
    return lhs <= radius if closed else lhs < radius


def whitney_box_contains(cy, ct, y, t, params, n=1):
    """True iff ``(y, t)`` is in the Whitney box around ``(cy, ct)``."""
    a1, a2 = params
    if not (a1 > 0 and a2 > 1):
        raise GeometryError("Whitney box needs a1 > 0 and a2 > 1")
    ct = np.asarray(ct)
    t = np.asarray(t)
    return (torus_distance_n(y, cy, n) < a1 * ct) & (ct / a2 < t) & (t < a2 * ct)


def ball_contains(center, radius, x, n=1):
    return torus_distance_n(x, center, n) < radius


# --------------------------------------------------------------------------
# inclusion suite
# --------------------------------------------------------------------------

@dataclass
class InclusionResult:
    name: str
    anchor: str
    trials: int
    violations: int
    resampled: int
    witness: dict | None = None

    @property
    def passed(self):
        return self.violations == 0


class _Sampler:
    """Draws generic reals on the torus and heights in a torus-safe range."""

    def __init__(self, rng, n, t_lo, t_hi):
        self.rng = rng
        self.n = n
        self.t_lo = t_lo
        self.t_hi = t_hi

    def point(self, m):
        shape = (m,) if self.n == 1 else (m, self.n)
        return self.rng.random(shape)

    def height(self, m):
        u = self.rng.random(m)
        return self.t_lo * (self.t_hi / self.t_lo) ** u

    def near(self, y, radius):
        """Points in a cube of half-side ``radius`` around ``y`` (wrapped)."""
        shape = np.shape(y)
        off = (2.0 * self.rng.random(shape) - 1.0)
        r = radius if self.n == 1 else radius[:, None]
        return (y + off * r) % 1.0

    def height_between(self, lo, hi):
        u = self.rng.random(np.shape(lo))
        return lo * (hi / lo) ** u


def _inclusions(w: WhitneyParams, n):
    """(name, anchor, sample, check) for every set inclusion.

    ``sample(S, m)`` returns a dict of candidate configurations plus the
    boolean mask of those satisfying the hypothesis side; ``check`` evaluates
    the conclusion on accepted configurations.
    """
    a1, a2 = w.pair
    d = derive_params(w)
    ws, wss = d.wStar, d.wDoubleStar
    st, dst = d.star, d.doubleStar
    a0, aC, aT = d.alpha0, d.alphaC, d.alphaT
    aU, aL = d.alphaStarUpper, d.alphaStarLower

    def box_pair(S, m, params):
        # (z, s) arbitrary, (y, t) drawn near the box W_params(z, s)
        z, s = S.point(m), S.height(m)
        y = S.near(z, params[0] * s)
        t = S.height_between(s / params[1], s * params[1])
        return z, s, y, t

    def w_first(S, m):
        z, s, y, t = box_pair(S, m, ws)
        hyp = whitney_box_contains(z, s, y, t, ws, n)
        return dict(z=z, s=s, y=y, t=t), hyp

    def w_first_check(c):
        return whitney_box_contains(c["y"], c["t"], c["z"], c["s"], (a1, a2), n)

    def w_second(S, m):
        y, t = S.point(m), S.height(m)
        z = S.near(y, a1 * t)
        s = S.height_between(t / a2, t * a2)
        hyp = whitney_box_contains(y, t, z, s, (a1, a2), n)
        return dict(z=z, s=s, y=y, t=t), hyp

    def w_second_check(c):
        return whitney_box_contains(c["z"], c["s"], c["y"], c["t"], wss, n)

    def c1(S, m):
        x, s = S.point(m), S.height(m)
        z = S.near(x, a0 * s)
        y = S.near(z, ws[0] * s)
        t = S.height_between(s / ws[1], s * ws[1])
        hyp = cone_contains(x, z, s, a0, n) & whitney_box_contains(z, s, y, t, ws, n)
        return dict(x=x, z=z, s=s, y=y, t=t), hyp

    def c1_check(c):
        return cone_contains(c["x"], c["y"], c["t"], 1.0, n)

    def c2(S, m):
        x, t = S.point(m), S.height(m)
        y = S.near(x, t)
        z = S.near(y, a1 * t)
        s = S.height_between(t / a2, t * a2)
        hyp = cone_contains(x, y, t, 1.0, n) & whitney_box_contains(y, t, z, s, (a1, a2), n)
        return dict(x=x, y=y, t=t, z=z, s=s), hyp

    def c2_check(c):
        return cone_contains(c["x"], c["z"], c["s"], aC, n)

    def ball(S, m):
        c = S.point(m)
        R = S.height_between(np.full(m, S.t_hi * aT * a2), np.full(m, 0.45))
        return c, R

    def t1(S, m):
        c, R = ball(S, m)
        z = S.near(c, R)
        s = S.height_between(np.full(m, S.t_lo), R / aT)
        y = S.near(z, ws[0] * s)
        t = S.height_between(s / ws[1], s * ws[1])
        hyp = tent_contains(c, R, z, s, aT, n=n) & whitney_box_contains(z, s, y, t, ws, n)
        return dict(c=c, R=R, z=z, s=s, y=y, t=t), hyp

    def t1_check(c):
        return tent_contains(c["c"], c["R"], c["y"], c["t"], 1.0, n=n)

    def t2(S, m):
        c, R = ball(S, m)
        y = S.near(c, R)
        t = S.height_between(np.full(m, S.t_lo), R)
        z = S.near(y, a1 * t)
        s = S.height_between(t / a2, t * a2)
        hyp = tent_contains(c, R, y, t, 1.0, n=n) & whitney_box_contains(y, t, z, s, (a1, a2), n)
        return dict(c=c, R=R, y=y, t=t, z=z, s=s), hyp

    def t2_check(c):
        return tent_contains(c["c"], c["R"], c["z"], c["s"], a0, n=n)

    def star_nest(S, m):
        y, t = S.point(m), S.height(m)
        z = S.near(y, st[0] * t)
        s = S.height_between(t / st[1], t * st[1])
        z0 = S.near(z, st[0] * s)
        s0 = S.height_between(s / st[1], s * st[1])
        hyp = whitney_box_contains(y, t, z, s, st, n) & whitney_box_contains(z, s, z0, s0, st, n)
        return dict(y=y, t=t, z=z, s=s, z0=z0, s0=s0), hyp

    def star_nest_check(c):
        return whitney_box_contains(c["y"], c["t"], c["z0"], c["s0"], (a1, a2), n)

    def star_pair(S, m):
        y, t = S.point(m), S.height(m)
        z = S.near(y, dst[0] * t)
        s = S.height_between(t / dst[1], t * dst[1])
        z0 = S.near(y, dst[0] * t)
        s0 = S.height_between(t / dst[1], t * dst[1])
        hyp = whitney_box_contains(y, t, z, s, dst, n) & whitney_box_contains(y, t, z0, s0, dst, n)
        return dict(y=y, t=t, z=z, s=s, z0=z0, s0=s0), hyp

    def star_pair_check(c):
        return whitney_box_contains(c["z"], c["s"], c["z0"], c["s0"], st, n)

    def inner_ball(S, m):
        y, t = S.point(m), S.height(m)
        x = S.near(y, aL * t)
        z = S.near(y, a1 * t)
        s = S.height_between(t / a2, t * a2)
        hyp = ball_contains(y, aL * t, x, n) & whitney_box_contains(y, t, z, s, (a1, a2), n)
        return dict(y=y, t=t, x=x, z=z, s=s), hyp

    def inner_ball_check(c):
        return ball_contains(c["z"], c["s"], c["x"], n)

    def outer_ball(S, m):
        y, t = S.point(m), S.height(m)
        z = S.near(y, a1 * t)
        s = S.height_between(t / a2, t * a2)
        x = S.near(z, s)
        hyp = whitney_box_contains(y, t, z, s, (a1, a2), n) & ball_contains(z, s, x, n)
        return dict(y=y, t=t, x=x, z=z, s=s), hyp

    def outer_ball_check(c):
        return ball_contains(c["y"], aU * c["t"], c["x"], n)

    return [
        ("W_lower", "W: W_*(z,s) inside {(y,t) : W(y,t) contains (z,s)}", w_first, w_first_check),
        ("W_upper", "W: {(y,t) : W(y,t) contains (z,s)} inside W_**(z,s)", w_second, w_second_check),
        ("C1", "C1: Whitney boxes over the alpha_0-cone lie in the unit cone", c1, c1_check),
        ("C2", "C2: Whitney boxes over the unit cone lie in the alpha_C-cone", c2, c2_check),
        ("T1", "T1: Whitney boxes over the alpha_T-tent lie in the unit tent", t1, t1_check),
        ("T2", "T2: Whitney boxes over the unit tent lie in the alpha_0-tent", t2, t2_check),
        ("star_nesting", "star boxes of star-box points lie in the base box", star_nest, star_nest_check),
        ("double_star_pair", "two points of one double-star box see each other's star box", star_pair, star_pair_check),
        ("inner_ball", "B(y, alpha_* t) lies in B(z, s) for (z,s) in W(y,t)", inner_ball, inner_ball_check),
        ("outer_ball", "B(z, s) lies in B(y, alpha^* t) for (z,s) in W(y,t)", outer_ball, outer_ball_check),
    ]


def _safe_height_range(w: WhitneyParams):
    # every radius built from these heights stays below 1/2 (torus safety);
    # the largest product is alpha_T * alpha_2 on the tent checks
    top = 0.45 / (max_aperture(w) * w.alpha2 ** 2 * 4.0)
    return top * 1e-2, top


def check_inclusion_suite(w: WhitneyParams, trials: int, seed: int, n: int = 1,
                          batch: int = 65536):
    """Sample configurations per inclusion and test the conclusion side.

    Configurations failing the hypothesis side are resampled, not counted.
    Returns a list of :class:`InclusionResult`, one per inclusion.
    """
    if trials < 1:
        raise GeometryError("trials must be at least 1")
    if n not in (1, 2):
        raise GeometryError("boundary dimension must be 1 or 2")
    rng = np.random.default_rng(seed)
    t_lo, t_hi = _safe_height_range(w)
    S = _Sampler(rng, n, t_lo, t_hi)
    results = []
    for name, anchor, sample, check in _inclusions(w, n):
        done = 0
        resampled = 0
        violations = 0
        witness = None
        while done < trials:
            m = min(batch, 2 * (trials - done) + 16)
            cfg, hyp = sample(S, m)
            hyp = np.asarray(hyp)
            idx = np.flatnonzero(hyp)[: trials - done]
            resampled += int(m - hyp.sum())
            acc = {k: np.asarray(v)[idx] for k, v in cfg.items()}
            ok = np.asarray(check(acc))
            bad = np.flatnonzero(~ok)
            if bad.size and witness is None:
                j = bad[0]
                witness = {k: np.asarray(v)[j].tolist() for k, v in acc.items()}
            violations += int(bad.size)
            done += idx.size
        results.append(InclusionResult(name, anchor, trials, violations, resampled, witness))
    return results
