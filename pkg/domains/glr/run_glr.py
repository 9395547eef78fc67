# domains/glr/run_glr.py
from __future__ import annotations
from typing import Optional

from registry import append_telemetry_jsonl
from search import ConjectureReport, run_search

from domains.glr.recipes import default_config


def main(
    d: int = 4,
    seed: int = 0,
    budget: Optional[int] = None,
    max_size: int = 6,
    exhaustive: bool = True,
    workers: Optional[int] = None,
    keep_records: bool = False,
    outdir: Optional[str] = None,
) -> ConjectureReport:
    """Sweep level matched pairs for the r-collection routing conjecture."""
    cfg = default_config(d, seed, budget, max_size, exhaustive, workers, keep_records)
    report = run_search(cfg)
    if outdir:
        rows = report.records or [dict(report.to_json(), failures=len(report.failures))]
        append_telemetry_jsonl(outdir, "glr", rows)
    return report


if __name__ == "__main__":
    print(main().to_json())
