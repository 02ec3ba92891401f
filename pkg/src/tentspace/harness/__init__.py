"""Suite orchestration and reporting."""

from concurrent.futures import ThreadPoolExecutor
import os

from .config import SUITES, ConfigError, RunConfig, load_config
from .multiplier import estimate_multiplier_norm
from .report import VerificationReport, read_rows, render_summary, write_report
from .suites import SUITE_FUNCS, Record

THREADS_ENV = "TENTSPACE_THREADS"


def _threads():
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"{THREADS_ENV}: expected an integer, got {raw!r}") from None


def run_suite(cfg: RunConfig, threads: int | None = None) -> VerificationReport:
    """Run every enabled suite; records come back in (suite, check) order."""
    threads = _threads() if threads is None else threads
    order = [s for s in SUITES if s in cfg.suites]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(lambda s: SUITE_FUNCS[s](cfg), order))
    else:
        results = [SUITE_FUNCS[s](cfg) for s in order]
    records = []
    for recs in results:
        records.extend(sorted(recs, key=lambda r: r.check))
    return VerificationReport(cfg.describe(), records)


__all__ = ["SUITES", "ConfigError", "Record", "RunConfig", "VerificationReport",
           "estimate_multiplier_norm", "load_config", "read_rows", "render_summary",
           "run_suite", "write_report"]
