"""Lower bounds for pointwise multiplier norms."""

from ..functionals import NormSpec, tent_norm
from ..grid import GridFunction, random_function

PROBE_GENERATORS = ("lognormal-noise", "smooth-bump-mix", "slab", "tent-indicator")


def estimate_multiplier_norm(w: GridFunction, s1: NormSpec, s0: NormSpec,
                             probes: int = 8, seed: int = 0) -> float:
    """``max ||v w||_{s0} / ||v||_{s1}`` over a deterministic probe corpus.

    Any probe gives a lower bound on the norm of ``v -> v w`` from ``s1`` to
    ``s0``; more probes only tighten it.
    """
    if probes < 1:
        raise ValueError("probes must be at least 1")
    best = 0.0
    for i in range(probes):
        v = random_function(w.spec, PROBE_GENERATORS[i % len(PROBE_GENERATORS)], seed * 1000 + i)
        nv = tent_norm(v, s1)
        if nv == 0:
            continue
        best = max(best, tent_norm(v.with_values(v.abs * w.abs), s0) / nv)
    return best
