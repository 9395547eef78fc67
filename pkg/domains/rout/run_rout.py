# domains/rout/run_rout.py
from __future__ import annotations
from typing import Optional

from registry import append_telemetry_jsonl
from search import ConjectureReport, run_search

from domains.rout.recipes import default_config


def main(
    d: int = 3,
    seed: int = 0,
    budget: Optional[int] = None,
    exhaustive: bool = True,
    workers: Optional[int] = None,
    keep_records: bool = False,
    outdir: Optional[str] = None,
) -> ConjectureReport:
    """Sweep subsets S for the r²-vertex-capacity routing conjecture."""
    cfg = default_config(d, seed, budget, exhaustive, workers, keep_records)
    report = run_search(cfg)
    if outdir:
        rows = report.records or [dict(report.to_json(), failures=len(report.failures))]
        append_telemetry_jsonl(outdir, "rout", rows)
    return report


if __name__ == "__main__":
    print(main().to_json())
