"""Run configuration: a flat ``key = value`` text file plus flag overrides."""

from dataclasses import dataclass, field, replace
import math

from ..functionals import NormSpec
from ..geometry import GeometryError, WhitneyParams
from ..grid import GridError, GridSpec

SUITES = ("geometry", "functionals", "coincidence", "factorization",
          "multiplication", "measures", "duality")

# principal tolerance of each suite (see README for what each one bounds)
DEFAULT_TOLERANCES = {
    "geometry": 1e-12,        # allowed fraction of violating trials
    "functionals": 0.03,      # slab anchor on the base grid (halved after refinement)
    "coincidence": 0.2,       # relative change of constants under refinement
    "factorization": 0.2,
    "multiplication": 0.2,
    "measures": 0.05,         # slack over the Fubini constant
    "duality": 0.2,
}

DEFAULT_SPECS = "2,2,2,0; inf,2,2,-1; 2,inf,2,-0.5; inf,inf,1,0; 1,3,none,-1"


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


def _exponent(tok, key, allow_none=False):
    tok = tok.strip().lower()
    if allow_none and tok == "none":
        return None
    if tok in ("inf", "infinity", "∞"):
        return math.inf
    try:
        v = float(tok)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse exponent {tok!r}") from None
    if not v > 0:
        raise ConfigError(f"{key}: exponents must be positive, got {tok!r}")
    return v


def parse_specs(text, whitney, key="specs"):
    out = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(",")
        if len(parts) != 4:
            raise ConfigError(f"{key}: each spec is p,q,r,beta; got {chunk!r}")
        p = _exponent(parts[0], key)
        q = _exponent(parts[1], key)
        r = _exponent(parts[2], key, allow_none=True)
        try:
            beta = float(parts[3])
        except ValueError:
            raise ConfigError(f"{key}: cannot parse beta in {chunk!r}") from None
        out.append(NormSpec(p, q, r, beta, whitney=whitney))
    if not out:
        raise ConfigError(f"{key}: at least one spec is required")
    return out


def _bool(v, key):
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {v!r}")


def _int(v, key, lo=1):
    try:
        i = int(str(v).strip())
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {v!r}") from None
    if i < lo:
        raise ConfigError(f"{key}: must be >= {lo}, got {i}")
    return i


def _float(v, key):
    try:
        return float(str(v).strip())
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {v!r}") from None


@dataclass(frozen=True)
class RunConfig:
    grid: GridSpec = field(default_factory=GridSpec)
    whitney: WhitneyParams = field(default_factory=lambda: WhitneyParams(0.25, 2.0))
    specs: tuple = ()
    suites: tuple = SUITES
    trials: int = 100_000
    seed: int = 1
    corpus: int = 50
    functions: int = 100
    measures: int = 100
    pairs: int = 100
    refine: bool = True
    timing: bool = False
    output: str = "report"
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))

    def __post_init__(self):
        if not self.suites:
            raise ConfigError("suites: at least one suite must be enabled")
        bad = [s for s in self.suites if s not in SUITES]
        if bad:
            raise ConfigError(f"suites: unknown suite {bad[0]!r}; choose from {', '.join(SUITES)}")
        for k, v in self.tolerances.items():
            if k not in SUITES:
                raise ConfigError(f"tol.{k}: unknown suite")
            if not v > 0:
                raise ConfigError(f"tol.{k}: tolerances must be positive, got {v}")
        if not self.specs:
            object.__setattr__(self, "specs", tuple(parse_specs(DEFAULT_SPECS, self.whitney)))
        try:
            for s in self.specs:
                self.grid.check_torus_safe(self.whitney, s.aperture)
        except GridError as e:
            raise ConfigError(f"t_max: {e}") from None

    def describe(self):
        """Flat key/value view, in a fixed order, for reports."""
        g = self.grid
        d = {"n": g.n, "Ny": g.Ny, "t_levels": g.t_levels, "t_min": g.t_min, "t_max": g.t_max,
             "alpha1": self.whitney.alpha1, "alpha2": self.whitney.alpha2,
             "specs": "; ".join(_spec_text(s) for s in self.specs),
             "suites": ",".join(self.suites), "trials": self.trials, "seed": self.seed,
             "corpus": self.corpus, "functions": self.functions, "measures": self.measures,
             "pairs": self.pairs, "refine": self.refine, "timing": self.timing}
        for k in SUITES:
            d[f"tol.{k}"] = self.tolerances.get(k, DEFAULT_TOLERANCES[k])
        return d

    def tol(self, suite):
        return self.tolerances.get(suite, DEFAULT_TOLERANCES[suite])


def _spec_text(s):
    f = lambda e: "inf" if e == math.inf else ("none" if e is None else format(e, "g"))
    return f"{f(s.p)},{f(s.q)},{f(s.r)},{s.beta:g}"


GRID_KEYS = ("n", "Ny", "t_levels", "t_min", "t_max")
KEYS = GRID_KEYS + ("alpha1", "alpha2", "specs", "suites", "trials", "seed", "corpus",
                    "functions", "measures", "pairs", "refine", "timing", "output")


def parse_config_text(text, source="<config>"):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key = value, got {raw.strip()!r}")
        k, v = (s.strip() for s in line.split("=", 1))
        if k not in KEYS and not k.startswith("tol."):
            raise ConfigError(f"{k}: unknown configuration key ({source}:{lineno})")
        out[k] = v
    return out


def load_config(path=None, overrides=None) -> RunConfig:
    """Build a :class:`RunConfig` from a file (optional) and override values."""
    values = {}
    if path is not None:
        try:
            with open(path) as fh:
                values.update(parse_config_text(fh.read(), str(path)))
        except OSError as e:
            raise ConfigError(f"config: cannot read {path}: {e.strerror}") from None
    for k, v in (overrides or {}).items():
        if v is None:
            continue
        if k not in KEYS and not k.startswith("tol."):
            raise ConfigError(f"{k}: unknown configuration key")
        values[k] = v
    return build_config(values)


def build_config(values) -> RunConfig:
    g = GridSpec()
    try:
        grid = GridSpec(
            n=_int(values.get("n", g.n), "n"),
            Ny=_int(values.get("Ny", g.Ny), "Ny", lo=2),
            t_levels=_int(values.get("t_levels", g.t_levels), "t_levels", lo=2),
            t_min=_float(values.get("t_min", g.t_min), "t_min"),
            t_max=_float(values.get("t_max", g.t_max), "t_max"),
        )
    except GridError as e:
        raise ConfigError(f"grid: {e}") from None
    try:
        w = WhitneyParams(_float(values.get("alpha1", 0.25), "alpha1"),
                          _float(values.get("alpha2", 2.0), "alpha2"))
    except GeometryError as e:
        raise ConfigError(f"alpha1/alpha2: {e}") from None
    try:
        specs = tuple(parse_specs(values.get("specs", DEFAULT_SPECS), w))
    except GridError as e:
        raise ConfigError(f"specs: {e}") from None
    suites = tuple(s.strip() for s in str(values.get("suites", ",".join(SUITES))).split(",") if s.strip())
    tols = dict(DEFAULT_TOLERANCES)
    for k, v in values.items():
        if k.startswith("tol."):
            tols[k[4:]] = _float(v, k)
    kw = dict(grid=grid, whitney=w, specs=specs, suites=suites, tolerances=tols)
    for k in ("trials", "corpus", "functions", "measures", "pairs"):
        if k in values:
            kw[k] = _int(values[k], k)
    if "seed" in values:
        kw["seed"] = _int(values["seed"], "seed", lo=0)
    for k in ("refine", "timing"):
        if k in values:
            kw[k] = _bool(values[k], k)
    if "output" in values:
        kw["output"] = str(values["output"])
    return RunConfig(**kw)


def with_overrides(cfg: RunConfig, **kw) -> RunConfig:
    return replace(cfg, **kw)
