"""Command line entry point: ``tentspace norm|factorize|verify|report``."""

import argparse
import math
import sys
from importlib import resources

from .factorization import FACTORIZERS, FactorizationError, factorize_general
from .functionals import NormSpec, tent_norm
from .geometry import GeometryError, WhitneyParams
from .grid import GridError, read_grid_function
from .harness import ConfigError, load_config, read_rows, render_summary, run_suite, write_report
from .harness.config import KEYS, parse_specs

FIXTURES = {"slab": "slab.txt"}


def _fixture_path(name):
    return resources.files("tentspace").joinpath("data", FIXTURES[name])


def _load(path):
    if path in FIXTURES:
        with resources.as_file(_fixture_path(path)) as p:
            return read_grid_function(p)
    return read_grid_function(path)


def _exponent(text):
    t = text.strip().lower()
    if t in ("inf", "infinity"):
        return math.inf
    if t == "none":
        return None
    return float(t)


def _spec_args(p):
    p.add_argument("--p", type=_exponent, default=2.0, help="outer exponent (inf allowed)")
    p.add_argument("--q", type=_exponent, default=2.0, help="functional exponent (inf allowed)")
    p.add_argument("--r", type=_exponent, default=None,
                   help="Whitney exponent; 'none' (default) selects the classical scale")
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--aperture", type=float, default=1.0)
    p.add_argument("--alpha1", type=float, default=0.25)
    p.add_argument("--alpha2", type=float, default=2.0)


def _spec_from(args):
    w = WhitneyParams(args.alpha1, args.alpha2)
    return NormSpec(args.p, args.q, args.r, args.beta, args.aperture, w)


def build_parser():
    ap = argparse.ArgumentParser(prog="tentspace", description="Weighted tent-space toolkit.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("norm", help="print the quasi-norm of a grid function")
    p.add_argument("grid_file", help="grid text file, or 'slab' for the bundled fixture")
    _spec_args(p)

    p = sub.add_parser("factorize", help="factor a grid function and write the factors")
    p.add_argument("grid_file")
    p.add_argument("--which", choices=sorted(FACTORIZERS) + ["general"], required=True)
    p.add_argument("--ptilde", type=float, default=None, help="F2 exponent (default p/2)")
    p.add_argument("--s1", help="general: first target as p,q,r,beta")
    p.add_argument("--s2", help="general: second target as p,q,r,beta")
    p.add_argument("--out", default=None, help="output stem (default: input stem + construction)")
    _spec_args(p)

    p = sub.add_parser("verify", help="run verification suites")
    p.add_argument("--config", default=None, help="flat key = value config file")
    for k in KEYS:
        p.add_argument(f"--{k}", dest=f"cfg_{k}", default=None, metavar=k.upper())
    p.add_argument("--tol", action="append", default=[], metavar="SUITE=VALUE",
                   help="per-suite tolerance override (repeatable)")

    p = sub.add_parser("report", help="summarise a CSV or JSON report")
    p.add_argument("report_file")
    return ap


def _cmd_norm(args):
    f = _load(args.grid_file)
    print(format(tent_norm(f, _spec_from(args)), ".10g"))
    return 0


def _cmd_factorize(args):
    u = _load(args.grid_file)
    s0 = _spec_from(args)
    if args.which == "general":
        if not (args.s1 and args.s2):
            raise FactorizationError("--which general needs --s1 and --s2")
        s1 = parse_specs(args.s1, s0.whitney, "--s1")[0]
        s2 = parse_specs(args.s2, s0.whitney, "--s2")[0]
        res = factorize_general(u, s0, s1, s2, args.ptilde)
    elif args.which == "F1":
        res = FACTORIZERS["F1"](u, s0)
    else:
        res = FACTORIZERS[args.which](u, s0, args.ptilde)
    stem = args.out
    if stem is None:
        base = args.grid_file.rsplit(".", 1)[0] if args.grid_file not in FIXTURES else args.grid_file
        stem = f"{base}.{args.which}"
    paths = res.write(stem)
    for path, s, n in zip(paths, res.target_specs, res.norms):
        print(f"{path}\t{s}\tnorm={n:.10g}")
    print(f"source_norm={res.source_norm:.10g}")
    print(f"constant={res.constant:.10g}")
    print(f"reconstruction_error={res.reconstruction_error:.3g}")
    for k, v in sorted(res.diagnostics.items()):
        print(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}")
    return 0


def _cmd_verify(args):
    overrides = {k: getattr(args, f"cfg_{k}") for k in KEYS}
    for item in args.tol:
        if "=" not in item:
            raise ConfigError(f"--tol: expected SUITE=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        overrides[f"tol.{k.strip()}"] = v
    cfg = load_config(args.config, overrides)
    report = run_suite(cfg)
    csv_path, json_path = write_report(report, cfg.output)
    rows = read_rows(json_path)
    print(render_summary(rows))
    print(f"reports: {csv_path} {json_path}")
    return report.exit_status


def _cmd_report(args):
    print(render_summary(read_rows(args.report_file)))
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    handler = {"norm": _cmd_norm, "factorize": _cmd_factorize,
               "verify": _cmd_verify, "report": _cmd_report}[args.command]
    try:
        return handler(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (GridError, GeometryError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
