"""Finite atomic measures on the closed upper half-space.

Balayage sweeps atoms down cones against ``s^{-n}``; the extension averages
the reciprocal balayage over boundary balls on the grid (the same ``P_0`` the
F2 construction uses).  Carleson norms use closed tents.
"""

from dataclasses import dataclass
import math

import numpy as np

from .functionals import ball_average, ball_ladder, boundary_lp, maximal_function, nontangential_N
from .geometry import torus_distance_n
from .grid import GridError, GridFunction, GridSpec

UNIT_BALL_VOLUME = {1: 2.0, 2: math.pi}


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Atoms ``(y_a, t_a)`` with positive masses ``m_a``.

    ``cells`` optionally records the grid cell of each atom (level-major
    index tuple) for measures built on a grid.
    """

    y: np.ndarray
    t: np.ndarray
    mass: np.ndarray
    n: int = 1
    cells: tuple | None = None

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float) % 1.0
        t = np.asarray(self.t, dtype=float).reshape(-1)
        m = np.asarray(self.mass, dtype=float).reshape(-1)
        if self.n == 1:
            y = y.reshape(-1)
        else:
            y = y.reshape(-1, self.n)
        if t.size < 1:
            raise GridError("a measure needs at least one atom")
        if not (y.shape[0] == t.size == m.size):
            raise GridError("atom arrays differ in length")
        if not np.all(np.isfinite(m) & (m > 0)):
            raise GridError("atom masses must be positive and finite")
        if not np.all(t > 0):
            raise GridError("atom heights must be positive")
        for name, v in (("y", y), ("t", t), ("mass", m)):
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @property
    def size(self):
        return self.t.size

    @property
    def totalMass(self):
        return math.fsum(self.mass.tolist())

    def check_heights(self, spec: GridSpec):
        if np.any(self.t < spec.t_min) or np.any(self.t > spec.t_max):
            raise GridError("atom heights must lie in [t_min, t_max]")

    def scaled(self, lam):
        return DiscreteMeasure(self.y, self.t, self.mass * lam, self.n, self.cells)

    @classmethod
    def from_density(cls, f: GridFunction):
        """One atom per cell where ``f > 0``, mass = density times cell volume."""
        spec = f.spec
        F = f.level_major()
        idx = np.nonzero(F > 0)
        vol = spec.cell_area * spec.dt
        mass = F[idx] * vol[idx[0]]
        t = spec.t[idx[0]]
        if spec.n == 1:
            y = idx[1] / spec.Ny
        else:
            y = np.stack([idx[1] / spec.Ny, idx[2] / spec.Ny], axis=-1)
        return cls(y, t, mass, spec.n, cells=idx)


def random_measure(spec: GridSpec, atoms: int, seed: int, min_height_cells: float = 16.0):
    """Atoms with uniform positions, log-uniform heights and lognormal masses.

    Heights start at ``min_height_cells * dy`` so every atom's shadow holds
    many boundary samples.
    """
    rng = np.random.default_rng(seed)
    lo = max(spec.t_min, min_height_cells * spec.dy)
    hi = spec.t_max
    t = lo * (hi / lo) ** rng.random(atoms)
    y = rng.random(atoms) if spec.n == 1 else rng.random((atoms, spec.n))
    m = np.exp(rng.standard_normal(atoms))
    return DiscreteMeasure(y, t, m, spec.n)


# --------------------------------------------------------------------------
# balayage and extension
# --------------------------------------------------------------------------

def _atom_dist(mu: DiscreteMeasure, x):
    x = np.asarray(x, dtype=float)
    if mu.n == 1:
        return torus_distance_n(x.reshape(-1)[:, None], mu.y[None, :], 1)
    return torus_distance_n(x.reshape(-1, mu.n)[:, None, :], mu.y[None, :, :], mu.n)


def balayage(mu: DiscreteMeasure, x, chunk: int = 1 << 22):
    """``sum over atoms with |x - y_a| < t_a of m_a / t_a^n`` at boundary point(s) ``x``."""
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0 or (mu.n > 1 and x.ndim == 1)
    pts = x.reshape(-1) if mu.n == 1 else x.reshape(-1, mu.n)
    vals = mu.mass / mu.t ** mu.n
    out = np.empty(pts.shape[0])
    step = max(1, chunk // max(mu.size, 1))
    for s in range(0, pts.shape[0], step):
        d = _atom_dist(mu, pts[s:s + step])
        out[s:s + step] = np.sum(np.where(d < mu.t[None, :], vals[None, :], 0.0), axis=1)
    return float(out[0]) if scalar else out.reshape(x.shape[:1] if mu.n == 1 else x.shape[:-1])


def balayage_grid(mu: DiscreteMeasure, spec: GridSpec):
    """Balayage at every boundary sample (shape ``boundary_shape``)."""
    if mu.n != spec.n:
        raise GridError("measure and grid dimensions differ")
    pts = spec.y.reshape(-1) if spec.n == 1 else spec.y.reshape(-1, 2)
    return balayage(mu, pts).reshape(spec.boundary_shape)


def integrate_balayage(mu: DiscreteMeasure, spec: GridSpec | None = None):
    """``int A(dmu)(x) dx`` over the torus.

    For n=1 the balayage is a step function with breakpoints ``y_a ± t_a``
    and the integral is exact.  For n=2 it is the grid quadrature on ``spec``.
    """
    if mu.n == 1:
        if np.any(mu.t >= 0.5):
            raise GridError("atom shadows must stay below half the torus")
        br = np.unique(np.concatenate([(mu.y - mu.t) % 1.0, (mu.y + mu.t) % 1.0, [0.0, 1.0]]))
        mids = 0.5 * (br[:-1] + br[1:])
        vals = balayage(mu, mids)
        return math.fsum((np.diff(br) * vals).tolist())
    if spec is None:
        raise GridError("n=2 balayage integral needs a grid")
    return math.fsum(balayage_grid(mu, spec).ravel().tolist()) * spec.cell_area


def _ball_mask(spec: GridSpec, y, t):
    return torus_distance_n(spec.y, y, spec.n) < t


def extension(mu: DiscreteMeasure, y, t, spec: GridSpec, bal=None):
    """``E(dmu)(y,t)``: grid mean of ``1/balayage`` over ``B(y, t)``.

    Returns ``inf`` when the balayage vanishes at some sample of the ball
    (then ``1/E`` is 0, which is what the factorization uses).
    """
    bal = balayage_grid(mu, spec) if bal is None else bal
    mask = _ball_mask(spec, y, t)
    cnt = int(mask.sum())
    if cnt == 0:
        raise GridError("ball contains no boundary sample; refine the grid")
    vals = bal[mask]
    if np.any(vals == 0):
        return math.inf
    return math.fsum((1.0 / vals).tolist()) / cnt


def extension_at_atoms(mu: DiscreteMeasure, spec: GridSpec, bal=None):
    bal = balayage_grid(mu, spec) if bal is None else bal
    if mu.cells is not None:
        # atoms sit on grid cells: same ball average through the window kernel
        return extension_grid(mu, spec, bal)[mu.cells]
    return np.array([extension(mu, mu.y[a], mu.t[a], spec, bal) for a in range(mu.size)])


def extension_grid(mu: DiscreteMeasure, spec: GridSpec, bal=None):
    """``E(dmu)`` at every grid cell (level-major), via the shared ball average."""
    bal = balayage_grid(mu, spec) if bal is None else bal
    with np.errstate(divide="ignore"):
        rec = np.where(bal > 0, 1.0 / np.where(bal > 0, bal, 1.0), np.inf)
    return ball_average(spec, rec, spec.t)


# --------------------------------------------------------------------------
# Carleson norms
# --------------------------------------------------------------------------

def _centers(spec):
    return spec.y.reshape(-1) if spec.n == 1 else spec.y.reshape(-1, 2)


def carleson_norm_measure(mu: DiscreteMeasure, spec: GridSpec, weights=None,
                          family: str = "adaptive", steps_per_octave: int = 1,
                          return_witness: bool = False):
    """``sup_B |nu|(closed tent of B) / |B|`` over grid-centred balls.

    ``weights`` replaces the atom masses (absolute values are taken), so
    the same atoms can carry ``E(dmu) dmu``.  ``|B|`` is the grid measure of
    the open ball.  ``family="ladder"`` uses the dyadic radius ladder;
    ``"adaptive"`` tries, for every centre, each radius at which an atom
    enters the closed tent, which is the exact supremum over all radii.
    """
    w = np.abs(mu.mass if weights is None else np.asarray(weights, dtype=float))
    C = _centers(spec)
    best = 0.0
    witness = None
    chunk = max(1, (1 << 21) // max(mu.size, 1))
    for s in range(0, C.shape[0], chunk):
        c = C[s:s + chunk]
        d = _atom_dist(mu, c) + mu.t[None, :]        # radius at which each atom enters
        if family == "ladder":
            radii = ball_ladder(spec, steps_per_octave)
            meas = spec.ball_measure(radii)
            for R, bm in zip(radii, meas):
                mass = np.sum(np.where(d <= R, w[None, :], 0.0), axis=1)
                j = int(np.argmax(mass))
                val = mass[j] / bm
                if val > best:
                    best, witness = val, (c[j].tolist() if spec.n > 1 else float(c[j]), float(R))
        elif family == "adaptive":
            order = np.argsort(d, axis=1, kind="stable")
            ds = np.take_along_axis(d, order, axis=1)
            ms = np.cumsum(w[order], axis=1)
            # ties: the mass at a radius includes every atom entering at that radius
            last = np.ones_like(ds, dtype=bool)
            last[:, :-1] = ds[:, 1:] != ds[:, :-1]
            ok = last & (ds < 0.5)
            if not ok.any():
                continue
            meas = np.where(ok, spec.ball_measure(np.where(ok, ds, 0.0).ravel()).reshape(ds.shape), 1.0)
            ratio = np.where(ok & (meas > 0), ms / np.where(meas > 0, meas, 1.0), 0.0)
            i, j = np.unravel_index(int(np.argmax(ratio)), ratio.shape)
            if ratio[i, j] > best:
                best = float(ratio[i, j])
                witness = (c[i].tolist() if spec.n > 1 else float(c[i]), float(ds[i, j]))
        else:
            raise GridError(f"unknown ball family {family!r}")
    return (best, witness) if return_witness else best


def fubini_constant(mu: DiscreteMeasure, spec: GridSpec):
    """``max_a t_a^n / |B(y_a, t_a)|``: the exact discrete bound for ``||E(dmu) dmu||``."""
    if mu.cells is not None:
        meas = spec.ball_measure(mu.t)
    else:
        meas = np.array([int(_ball_mask(spec, mu.y[a], mu.t[a]).sum())
                         for a in range(mu.size)]) * spec.cell_area
    if np.any(meas == 0):
        raise GridError("an atom's shadow contains no boundary sample")
    return float(np.max(mu.t ** mu.n / meas))


def check_balayage_lemma(mu: DiscreteMeasure, spec: GridSpec, slack: float = 0.05,
                         family: str = "adaptive"):
    """Carleson norm of ``E(dmu) dmu`` against the discrete and continuum constants."""
    bal = balayage_grid(mu, spec)
    E = extension_at_atoms(mu, spec, bal)
    norm, wit = carleson_norm_measure(mu, spec, weights=E * mu.mass, family=family,
                                      return_witness=True)
    kappa = fubini_constant(mu, spec)
    limit = 1.0 / UNIT_BALL_VOLUME[spec.n]
    passed = bool(norm <= kappa * (1 + 1e-12) and norm <= limit + slack)
    return {"norm": norm, "fubini_constant": kappa, "continuum_constant": limit,
            "slack": slack, "passed": passed, "witness_ball": wit}


# --------------------------------------------------------------------------
# factorization of measures
# --------------------------------------------------------------------------

@dataclass
class MeasureFactorization:
    boundary_factor: GridFunction          # E(|dmu|)^{-1} on grid cells
    boundary_factor_at_atoms: np.ndarray
    carleson_weights: np.ndarray           # E(|dmu|) |dmu| per atom
    reconstruction_error: float
    t1_inf_norm: float
    t1_ratio: float
    carleson_norm: float
    holder_ok: bool
    maximal_constant: float


def factorize_measure(mu: DiscreteMeasure, spec: GridSpec, p0: float = 0.5,
                      family: str = "adaptive"):
    """Split ``|dmu| = E(|dmu|)^{-1} * (E(|dmu|) |dmu|)``.

    Reports ``||E^{-1}||_{T^1_inf}`` against the total mass, the Carleson norm
    of the second factor, the exact power-mean bound
    ``E^{-1} <= P_0[A^{p0}]^{1/p0}`` on every cell, and the constant in
    ``N(E^{-1}) <= C M(A^{p0})^{1/p0}``.
    """
    if not 0 < p0 < 1:
        raise GridError("p0 must lie in (0, 1)")
    bal = balayage_grid(mu, spec)
    E_atoms = extension_at_atoms(mu, spec, bal)
    f1_atoms = 1.0 / E_atoms
    cw = E_atoms * mu.mass
    recon = f1_atoms * cw
    err = float(np.max(np.abs(recon - mu.mass) / mu.mass))

    E = extension_grid(mu, spec, bal)
    inv_E = np.where(np.isinf(E), 0.0, 1.0 / np.where(np.isinf(E), 1.0, E))
    G = GridFunction.from_level_major(spec, inv_E)
    Nf = nontangential_N(inv_E, spec=spec)
    t1 = boundary_lp(spec, Nf, 1.0)

    pm = np.power(ball_average(spec, np.power(bal, p0), spec.t), 1.0 / p0)
    holder_ok = bool(np.all(inv_E <= pm * (1 + 1e-12)))
    Mh = np.power(maximal_function(spec, np.power(bal, p0)), 1.0 / p0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(Nf > 0, Nf / Mh, 0.0)
    cnorm = carleson_norm_measure(mu, spec, weights=cw, family=family)
    return MeasureFactorization(G, f1_atoms, cw, err, t1, t1 / mu.totalMass, cnorm,
                                holder_ok, float(ratio.max()))


def carleson_inequality_ratio(f: GridFunction, mu: DiscreteMeasure, p: float,
                              family: str = "adaptive"):
    """``int |f|^p d|mu| / (||f||_{T^p_inf}^p * ||mu||_C)`` for a grid-cell measure."""
    if mu.cells is None:
        raise GridError("the Carleson inequality check needs atoms on grid cells")
    F = f.level_major()
    lhs = math.fsum((np.power(F[mu.cells], p) * mu.mass).tolist())
    nt = boundary_lp(f.spec, nontangential_N(F, spec=f.spec), p) ** p
    c = carleson_norm_measure(mu, f.spec, family=family)
    den = nt * c
    return 0.0 if lhs == 0 else lhs / den


def cell_measure(spec: GridSpec, seed: int, atoms: int, band=None):
    """Random atoms placed on grid cells (for checks that evaluate functions at atoms)."""
    rng = np.random.default_rng(seed)
    lo, hi = (0, spec.t_levels - 1) if band is None else band
    k = rng.integers(lo, hi + 1, atoms)
    ii = [rng.integers(0, spec.Ny, atoms) for _ in range(spec.n)]
    cells = (k, *ii)
    y = ii[0] / spec.Ny if spec.n == 1 else np.stack([i / spec.Ny for i in ii], axis=-1)
    m = np.exp(rng.standard_normal(atoms))
    return DiscreteMeasure(y, spec.t[k], m, spec.n, cells=cells)


# --------------------------------------------------------------------------
# text I/O
# --------------------------------------------------------------------------

def write_measure(mu: DiscreteMeasure, path):
    with open(path, "w") as fh:
        for a in range(mu.size):
            ys = [mu.y[a]] if mu.n == 1 else list(mu.y[a])
            fh.write(",".join(format(float(v), ".17g") for v in (*ys, mu.t[a], mu.mass[a])) + "\n")


def read_measure(path, n: int = 1):
    rows = []
    with open(path) as fh:
        for ln in fh:
            ln = ln.strip()
            if not ln or ln.startswith("#"):
                continue
            parts = [float(p) for p in ln.split(",")]
            if len(parts) != n + 2:
                raise GridError(f"{path}: expected {n + 2} fields, got {ln!r}")
            if not parts[-1] > 0:
                raise GridError(f"{path}: non-positive mass in {ln!r}")
            rows.append(parts)
    if not rows:
        raise GridError(f"{path}: no atoms")
    arr = np.array(rows)
    y = arr[:, 0] if n == 1 else arr[:, :n]
    return DiscreteMeasure(y, arr[:, n], arr[:, n + 1], n)
