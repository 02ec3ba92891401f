"""Discretized upper half-space: torus boundary times geometric heights.

Boundary samples sit at ``i / Ny`` on each axis; heights are
``t_k = t_min * rho**k``.  A cell ``(i, k)`` carries the midpoint-in-log
volume ``dy**n * t_k * log(rho)``.
"""

from dataclasses import dataclass, field
from functools import cached_property
import math

import numpy as np

from . import _kernels
from .geometry import WhitneyParams, max_aperture


class GridError(ValueError):
    """Invalid grid, grid function or measure."""


class SupportMarginError(GridError):
    """A function is non-zero where a Whitney box would leave the grid."""


@dataclass(frozen=True)
class GridSpec:
    n: int = 1
    Ny: int = 256
    t_levels: int = 64
    t_min: float = 2.0 ** -8
    t_max: float = 2.0 ** -3

    def __post_init__(self):
        if self.n not in (1, 2):
            raise GridError("boundary dimension n must be 1 or 2")
        if self.Ny < 2:
            raise GridError("Ny must be at least 2")
        if self.t_levels < 2:
            raise GridError("t_levels must be at least 2")
        if not (0 < self.t_min < self.t_max):
            raise GridError("need 0 < t_min < t_max")

    # -- geometry of the grid ---------------------------------------------

    @property
    def dy(self):
        return 1.0 / self.Ny

    @property
    def log_rho(self):
        return math.log(self.t_max / self.t_min) / (self.t_levels - 1)

    @cached_property
    def t(self):
        return self.t_min * np.exp(self.log_rho * np.arange(self.t_levels))

    @cached_property
    def dt(self):
        return self.t * self.log_rho

    @property
    def shape(self):
        return (self.Ny,) * self.n + (self.t_levels,)

    @property
    def boundary_shape(self):
        return (self.Ny,) * self.n

    @property
    def cell_area(self):
        """Boundary cell measure ``dy**n``."""
        return self.dy ** self.n

    @cached_property
    def y(self):
        """Boundary sample coordinates, shape ``boundary_shape`` (+ ``(n,)`` if n=2)."""
        g = np.arange(self.Ny) / self.Ny
        if self.n == 1:
            return g
        a, b = np.meshgrid(g, g, indexing="ij")
        return np.stack([a, b], axis=-1)

    def refine(self):
        """Halve both the boundary step and the log-height step."""
        return GridSpec(self.n, 2 * self.Ny, 2 * self.t_levels - 1, self.t_min, self.t_max)

    def check_torus_safe(self, w: WhitneyParams, aperture: float = 1.0):
        worst = self.t_max * max(max_aperture(w), aperture)
        if not worst < 0.5:
            raise GridError(
                f"torus safety violated: t_max * max aperture = {worst:.6g} >= 1/2")

    # -- level arithmetic for Whitney boxes -------------------------------

    def box_level_halfwidth(self, a2):
        """Largest L with ``rho**L < a2``, i.e. box levels are ``k-L .. k+L``."""
        ratio = math.log(a2) / self.log_rho
        L = max(int(math.ceil(ratio)) - 1, 0)
        while math.exp(self.log_rho * (L + 1)) < a2:
            L += 1
        while L > 0 and not math.exp(self.log_rho * L) < a2:
            L -= 1
        return L

    def margin_levels(self, a2):
        """Level range ``[lo, hi]`` on which box averages stay on the grid."""
        L = self.box_level_halfwidth(a2)
        return L, self.t_levels - 1 - L

    # -- boundary offsets --------------------------------------------------

    @cached_property
    def _offsets(self):
        half = self.Ny // 2
        r = np.arange(-half + 1, half) if self.Ny % 2 == 0 else np.arange(-half, half + 1)
        if self.n == 1:
            offs = r.reshape(-1, 1)
        else:
            a, b = np.meshgrid(r, r, indexing="ij")
            offs = np.stack([a.ravel(), b.ravel()], axis=-1)
        d = np.sqrt(np.sum((offs * self.dy) ** 2, axis=-1))
        order = np.lexsort(tuple(offs[:, j] for j in range(self.n - 1, -1, -1)) + (d,))
        return offs[order], d[order]

    def window(self, radii):
        """Offsets and per-entry counts for open boundary balls of given radii.

        Returns ``(offsets, counts)`` where the first ``counts[k]`` offsets
        are exactly those at distance ``< radii[k]``.
        """
        radii = np.atleast_1d(np.asarray(radii, dtype=float))
        if np.any(radii >= 0.5):
            raise GridError(f"torus safety violated: window radius {radii.max():.6g} >= 1/2")
        offs, d = self._offsets
        counts = np.searchsorted(d, radii, side="left")
        counts[radii <= 0] = 0
        return (offs[:, 0] if self.n == 1 else offs), counts

    def ball_measure(self, radii):
        """Grid measure of open balls: ``dy**n`` times the point count."""
        _, counts = self.window(radii)
        return counts * self.cell_area


# --------------------------------------------------------------------------
# grid functions
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GridFunction:
    spec: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.shape != self.spec.shape:
            raise GridError(f"values shape {v.shape} does not match grid {self.spec.shape}")
        if not np.iscomplexobj(v):
            v = v.astype(float, copy=False)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def abs(self):
        return np.abs(self.values)

    def level_major(self):
        """``|f|`` as an array of shape ``(K,) + boundary_shape``."""
        return np.moveaxis(self.abs, -1, 0)

    @classmethod
    def from_level_major(cls, spec, arr):
        return cls(spec, np.moveaxis(np.asarray(arr), 0, -1))

    def with_values(self, values):
        return GridFunction(self.spec, values)

    def support(self):
        return self.abs > 0

    def check_margin(self, a2):
        """Raise unless ``f`` vanishes where a box of ratio ``a2`` leaves the grid."""
        lo, hi = self.spec.margin_levels(a2)
        per_level = np.any(self.abs.reshape(-1, self.spec.t_levels) > 0, axis=0)
        bad = np.flatnonzero(per_level & ((np.arange(self.spec.t_levels) < lo)
                                          | (np.arange(self.spec.t_levels) > hi)))
        if bad.size:
            raise SupportMarginError(
                f"function is non-zero at level {bad[0]} (t={self.spec.t[bad[0]]:.6g}); "
                f"Whitney boxes with ratio {a2} need support in levels [{lo}, {hi}]")

    def shifted(self, shift):
        """Translate by an integer number of boundary cells on every axis."""
        axes = tuple(range(self.spec.n))
        shifts = (shift,) * self.spec.n if np.isscalar(shift) else tuple(shift)
        return GridFunction(self.spec, np.roll(self.values, shifts, axis=axes))


# --------------------------------------------------------------------------
# quadrature
# --------------------------------------------------------------------------

MEASURE_KINDS = ("dydt", "dydt/t", "dydt/t^{n+1}", "dydt*t^(-beta-1)")


@dataclass(frozen=True, eq=False)
class CellMeasure:
    spec: GridSpec
    kind: str
    beta: float = 0.0
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        s = self.spec
        if self.kind == "dydt":
            dens = np.ones(s.t_levels)
        elif self.kind == "dydt/t":
            dens = 1.0 / s.t
        elif self.kind == "dydt/t^{n+1}":
            dens = s.t ** (-(s.n + 1))
        elif self.kind == "dydt*t^(-beta-1)":
            dens = s.t ** (-self.beta - 1.0)
        else:
            raise GridError(f"unknown measure kind {self.kind!r}; expected one of {MEASURE_KINDS}")
        per_level = s.cell_area * s.dt * dens
        w = np.broadcast_to(per_level, s.shape).copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)


def cell_points(spec: GridSpec):
    """Boundary coordinates and heights of all cell centres, broadcast to the grid."""
    if spec.n == 1:
        y = np.broadcast_to(spec.y[:, None], spec.shape)
    else:
        y = np.broadcast_to(spec.y[:, :, None, :], spec.shape + (2,))
    t = np.broadcast_to(spec.t, spec.shape)
    return y, t


def _fsum_level_major(arr):
    # height-major order; fsum makes the result independent of that order anyway
    return math.fsum(np.moveaxis(np.asarray(arr), -1, 0).ravel().tolist())


def integrate_region(f: GridFunction, region, m: CellMeasure) -> float:
    """Sum of ``f * weight`` over cells whose centre satisfies ``region(y, t)``.

    ``region`` is vectorised: it receives cell-centre coordinates and heights
    broadcast to the grid and returns a boolean mask (``None`` means all).
    """
    if m.spec != f.spec:
        raise GridError("measure and function live on different grids")
    vals = np.asarray(f.values)
    if np.iscomplexobj(vals):
        raise GridError("integrate_region expects a real integrand; pass |f|")
    if region is None:
        mask = np.ones(f.spec.shape, dtype=bool)
    else:
        y, t = cell_points(f.spec)
        mask = np.broadcast_to(np.asarray(region(y, t), dtype=bool), f.spec.shape)
    return _fsum_level_major(np.where(mask, vals * m.weights, 0.0))


# --------------------------------------------------------------------------
# prefix tables
# --------------------------------------------------------------------------

class PrefixTable:
    """Per-level cumulative boundary sums of ``f * weight``.

    For n=1 ``query(k, i0, i1)`` sums indices ``i0..i1`` inclusive, wrapping
    through 0 when ``i0 > i1``.  For n=2 ``query_rect`` sums an axis-aligned
    (possibly wrapped) rectangle.
    """

    def __init__(self, f: GridFunction, m: CellMeasure):
        if m.spec != f.spec:
            raise GridError("measure and function live on different grids")
        self.spec = f.spec
        cells = np.moveaxis(np.abs(f.values) * m.weights, -1, 0)
        if self.spec.n == 1:
            self.table = np.cumsum(cells, axis=1)
        else:
            self.table = np.cumsum(np.cumsum(cells, axis=1), axis=2)
        self.table.setflags(write=False)

    def level_total(self, k):
        return self.table[k][(-1,) * self.spec.n]

    def _cum(self, k, i):
        return 0.0 if i < 0 else self.table[k, i]

    def query(self, k, i0, i1):
        if self.spec.n != 1:
            raise GridError("query is for n=1; use query_rect")
        N = self.spec.Ny
        i0 %= N
        i1 %= N
        if i0 <= i1:
            return self._cum(k, i1) - self._cum(k, i0 - 1)
        return self.query(k, i0, N - 1) + self.query(k, 0, i1)

    def _rect(self, k, a0, a1, b0, b1):
        T = self.table[k]

        def c(a, b):
            return 0.0 if a < 0 or b < 0 else T[a, b]

        return c(a1, b1) - c(a0 - 1, b1) - c(a1, b0 - 1) + c(a0 - 1, b0 - 1)

    def query_rect(self, k, a0, a1, b0, b1):
        N = self.spec.Ny
        a0, a1, b0, b1 = a0 % N, a1 % N, b0 % N, b1 % N
        arange = [(a0, a1)] if a0 <= a1 else [(a0, N - 1), (0, a1)]
        brange = [(b0, b1)] if b0 <= b1 else [(b0, N - 1), (0, b1)]
        return sum(self._rect(k, p, q, r, s) for p, q in arange for r, s in brange)

    def window_sums(self, radii):
        """n=1: sum over the open ball of radius ``radii[k]`` around every sample."""
        if self.spec.n != 1:
            raise GridError("window_sums via prefix table is n=1 only")
        _, counts = self.spec.window(radii)
        half = (counts - 1) // 2
        K, N = self.table.shape
        out = np.zeros((K, N))
        ext = np.concatenate([np.zeros((K, 1)), self.table], axis=1)
        total = self.table[:, -1]
        for k in range(K):
            if counts[k] == 0:
                continue
            m = half[k]
            i = np.arange(N)
            lo = i - m
            hi = i + m
            # cumulative sums with wrap: S(a..b) = P(b) - P(a-1) with P extended periodically
            def P(j):
                q, r = np.divmod(j + 1, N)
                return q * total[k] + ext[k, r]
            out[k] = P(hi) - P(lo - 1)
        return out


def build_prefix_sums(f: GridFunction, m: CellMeasure) -> PrefixTable:
    return PrefixTable(f, m)


# --------------------------------------------------------------------------
# level-major window helpers shared by the functionals
# --------------------------------------------------------------------------

def window_sum(spec: GridSpec, A, radii):
    offs, counts = spec.window(radii)
    return _kernels.window_sum(A, offs, counts)


def window_max(spec: GridSpec, A, radii):
    offs, counts = spec.window(radii)
    return _kernels.window_max(A, offs, counts)


def stack_levels(spec: GridSpec, A, reps):
    """Repeat a boundary array ``reps`` times along a new leading axis."""
    return np.broadcast_to(A, (reps,) + spec.boundary_shape)


# --------------------------------------------------------------------------
# corpus generators
# --------------------------------------------------------------------------

GENERATORS = ("smooth-bump-mix", "slab", "tent-indicator", "lognormal-noise")


@dataclass(frozen=True)
class CorpusConfig:
    """Continuous parameters shared by the corpus generators.

    ``band`` is the height range carrying the support; ``None`` picks the
    support margin of the Whitney ratio ``band_ratio`` (default: the base
    ``alpha2``), shrunk so that the functions are refinement-consistent.
    """

    slab: tuple = (2.0 ** -6, 2.0 ** -5)
    band: tuple | None = None
    band_ratio: float = 2.0
    bumps: int = 5
    noise_sigma: float = 0.75
    noise_cells: tuple = (32, 12)


def support_band(spec: GridSpec, cfg: CorpusConfig):
    """Continuous height band ``[t_min*ratio, t_max/ratio]`` (slightly padded).

    Being grid-independent, the band selects the same function on refined
    grids while staying inside the index margin of every refinement.
    """
    if cfg.band is not None:
        return cfg.band
    pad = 1.0 + 1e-9
    return spec.t_min * cfg.band_ratio * pad, spec.t_max / cfg.band_ratio / pad


def random_function(spec: GridSpec, generator: str, seed: int,
                    cfg: CorpusConfig | None = None) -> GridFunction:
    """Deterministic non-negative test function supported in the band.

    All generators are defined from continuous random parameters, so the
    same ``(generator, seed)`` on a refined grid samples the same function.
    """
    cfg = CorpusConfig() if cfg is None else cfg
    rng = np.random.default_rng([seed, GENERATORS.index(generator) if generator in GENERATORS else 99])
    y, t = cell_points(spec)
    lo, hi = support_band(spec, cfg)
    band = (t >= lo) & (t <= hi)
    logt = np.log(t)
    if generator == "slab":
        a, b = cfg.slab
        vals = ((t > a) & (t < b)).astype(float)
    elif generator == "tent-indicator":
        c = rng.random(spec.n) if spec.n > 1 else rng.random()
        R = hi * (1.0 + 2.0 * rng.random())
        R = min(R, 0.45)
        d = np.sqrt(np.sum(np.minimum(np.abs(y - c) % 1.0, 1 - np.abs(y - c) % 1.0) ** 2, axis=-1)) \
            if spec.n > 1 else np.minimum(np.abs(y - c) % 1.0, 1 - np.abs(y - c) % 1.0)
        vals = ((d + t < R) & band).astype(float)
    elif generator == "smooth-bump-mix":
        vals = np.full(spec.shape, 0.05)
        for _ in range(cfg.bumps):
            c = rng.random(spec.n)
            lc = math.log(lo) + (math.log(hi) - math.log(lo)) * rng.random()
            wy = 0.03 + 0.15 * rng.random()
            wl = 0.2 + 0.6 * rng.random()
            amp = 0.5 + 2.0 * rng.random()
            dy = np.abs(y - (c[0] if spec.n == 1 else c)) % 1.0
            dy = np.minimum(dy, 1.0 - dy)
            r2 = dy ** 2 if spec.n == 1 else np.sum(dy ** 2, axis=-1)
            vals = vals + amp * np.exp(-r2 / (2 * wy ** 2) - (logt - lc) ** 2 / (2 * wl ** 2))
        vals = np.where(band, vals, 0.0)
    elif generator == "lognormal-noise":
        nb, nl = cfg.noise_cells
        z = rng.standard_normal((nb,) * spec.n + (nl,))
        iy = np.floor(np.asarray(y) * nb).astype(int) % nb
        il = np.clip(np.floor((logt - math.log(lo)) / (math.log(hi) - math.log(lo)) * nl).astype(int),
                     0, nl - 1)
        if spec.n == 1:
            zz = z[iy, il]
        else:
            zz = z[iy[..., 0], iy[..., 1], il]
        vals = np.where(band, np.exp(cfg.noise_sigma * zz), 0.0)
    else:
        raise GridError(f"unknown generator {generator!r}; expected one of {GENERATORS}")
    return GridFunction(spec, vals)


def constant_on_band(spec: GridSpec, c: float, cfg: CorpusConfig | None = None) -> GridFunction:
    cfg = CorpusConfig() if cfg is None else cfg
    lo, hi = support_band(spec, cfg)
    t = np.broadcast_to(spec.t, spec.shape)
    return GridFunction(spec, np.where((t >= lo) & (t <= hi), float(c), 0.0))


# --------------------------------------------------------------------------
# text I/O
# --------------------------------------------------------------------------

def _fmt(v):
    if isinstance(v, complex) or np.iscomplexobj(v):
        v = complex(v)
        if v.imag == 0:
            return format(v.real, ".17g")
        return repr(v)
    return format(float(v), ".17g")


def write_grid_function(f: GridFunction, path, manifest: str | None = None):
    s = f.spec
    with open(path, "w") as fh:
        if manifest:
            fh.write(f"# {manifest}\n")
        fh.write(f"{s.n},{s.Ny},{s.t_levels},{format(s.t_min, '.17g')},{format(s.t_max, '.17g')}\n")
        vals = f.values
        for idx in np.ndindex(*s.shape):
            fh.write(",".join(str(i) for i in idx) + "," + _fmt(vals[idx]) + "\n")


def read_grid_function(path) -> GridFunction:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise GridError(f"{path}: empty grid file")
    try:
        n, Ny, K, t_min, t_max = lines[0].split(",")
        spec = GridSpec(int(n), int(Ny), int(K), float(t_min), float(t_max))
    except ValueError as exc:
        raise GridError(f"{path}: bad header {lines[0]!r}") from exc
    is_complex = any("j" in ln for ln in lines[1:])
    vals = np.zeros(spec.shape, dtype=complex if is_complex else float)
    seen = 0
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != spec.n + 2:
            raise GridError(f"{path}: bad cell line {ln!r}")
        idx = tuple(int(p) for p in parts[:-1])
        vals[idx] = complex(parts[-1]) if is_complex else float(parts[-1])
        seen += 1
    if seen != int(np.prod(spec.shape)):
        raise GridError(f"{path}: expected {int(np.prod(spec.shape))} cells, found {seen}")
    return GridFunction(spec, vals)


def read_manifest(path):
    with open(path) as fh:
        first = fh.readline()
    return first[1:].strip() if first.startswith("#") else None
