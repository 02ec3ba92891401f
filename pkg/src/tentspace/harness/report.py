"""Verification reports: CSV, JSON and a plain-text summary table."""

import csv
import io
import json
import math
from dataclasses import dataclass

CSV_COLUMNS = ("suite", "check", "anchor", "status", "constant", "tolerance", "seconds")


@dataclass
class VerificationReport:
    config: dict
    records: list

    @property
    def failed(self):
        return [r for r in self.records if r.status != "pass"]

    @property
    def exit_status(self):
        return 1 if self.failed else 0


def _num(v):
    if v is None:
        return ""
    if isinstance(v, float) and not math.isfinite(v):
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    return format(v, ".12g")


def _jsonable(v):
    if isinstance(v, float):
        return v if math.isfinite(v) else _num(v)
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if hasattr(v, "item"):
        return _jsonable(v.item())
    if v is None or isinstance(v, (bool, int, str)):
        return v
    return str(v)


def to_csv(report: VerificationReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in report.records:
        w.writerow([r.suite, r.check, r.anchor, r.status, _num(r.constant), _num(r.tolerance),
                    "" if r.seconds is None else format(r.seconds, ".3f")])
    return buf.getvalue()


def to_json(report: VerificationReport) -> str:
    recs = []
    for r in report.records:
        d = {"suite": r.suite, "check": r.check, "anchor": r.anchor, "status": r.status,
             "constant": r.constant, "tolerance": r.tolerance, "detail": r.detail}
        if r.seconds is not None:
            d["seconds"] = round(r.seconds, 3)
        if r.witness is not None:
            d["witness"] = r.witness
        recs.append(d)
    doc = {"config": report.config, "records": recs,
           "summary": {"checks": len(report.records), "failed": len(report.failed),
                       "status": "pass" if not report.failed else "fail"}}
    return json.dumps(_jsonable(doc), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def write_report(report: VerificationReport, stem):
    """Write ``<stem>.csv`` and ``<stem>.json``; return both paths."""
    paths = (f"{stem}.csv", f"{stem}.json")
    with open(paths[0], "w", encoding="utf-8") as fh:
        fh.write(to_csv(report))
    with open(paths[1], "w", encoding="utf-8") as fh:
        fh.write(to_json(report))
    return paths


def read_rows(path):
    """Records of a CSV or JSON report as plain dicts."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        return json.loads(text)["records"]
    rows = list(csv.DictReader(io.StringIO(text)))
    if rows and set(CSV_COLUMNS) - set(rows[0]):
        raise ValueError(f"{path}: not a verification report")
    return rows


def render_summary(rows) -> str:
    """Per-suite pass/fail counts followed by every failing check."""
    suites = {}
    for r in rows:
        s = suites.setdefault(r["suite"], [0, 0])
        s[0 if r["status"] == "pass" else 1] += 1
    width = max([len("suite")] + [len(s) for s in suites])
    lines = [f"{'suite':<{width}}  pass  fail", f"{'-' * width}  ----  ----"]
    for name, (p, f) in suites.items():
        lines.append(f"{name:<{width}}  {p:>4}  {f:>4}")
    bad = [r for r in rows if r["status"] != "pass"]
    total = len(rows)
    lines.append("")
    lines.append(f"{total - len(bad)}/{total} checks passed")
    for r in bad:
        lines.append(f"FAIL {r['suite']}/{r['check']}: constant={r['constant']} "
                     f"tolerance={r['tolerance']}" + (f" witness={r['witness']}" if r.get("witness") else ""))
    return "\n".join(lines)
