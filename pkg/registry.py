# registry.py
from __future__ import annotations
import csv, datetime, io, json, os
from typing import Any, Dict, Iterable, List, Mapping

from kernel import ConfigError, dumps_canonical

FORMATS = ("json", "csv", "text")


def append_telemetry_jsonl(outdir: str, conjecture: str, records: Iterable[Mapping[str, Any]]) -> str:
    """One line per record, stamped; telemetry is the only timestamped output."""
    os.makedirs(outdir, exist_ok=True)
    path = os.path.join(outdir, "sweep_telemetry.jsonl")
    meta = {
        "ts": datetime.datetime.now(datetime.timezone.utc).isoformat().replace("+00:00", "Z"),
        "conjecture": conjecture,
    }
    with open(path, "a", encoding="utf-8") as f:
        for r in records:
            row = dict(meta); row.update(r)
            f.write(dumps_canonical(row))
    return path


def _as_json(report: Any) -> Any:
    return report.to_json() if hasattr(report, "to_json") else report


def _flatten(obj: Any, prefix: str = "") -> List[List[str]]:
    if isinstance(obj, Mapping):
        if set(obj) == {"num", "den"}:
            return [[prefix, f"{obj['num']}/{obj['den']}" if obj["den"] != 1 else str(obj["num"])]]
        rows: List[List[str]] = []
        for k in sorted(obj, key=str):
            rows.extend(_flatten(obj[k], f"{prefix}.{k}" if prefix else str(k)))
        return rows
    if isinstance(obj, list):
        if obj and all(isinstance(x, (Mapping, list)) for x in obj):
            return [[prefix, json.dumps(obj, sort_keys=True, ensure_ascii=False)]]
        return [[prefix, " ".join(str(x) for x in obj)]]
    return [[prefix, "" if obj is None else str(obj)]]


def render_report(report: Any, fmt: str = "json") -> str:
    """json: canonical document; csv: the report's summary rows; text: one line per fact."""
    if fmt not in FORMATS:
        raise ConfigError(f"unknown format {fmt!r}; choose from {', '.join(FORMATS)}")
    if fmt == "json":
        return dumps_canonical(_as_json(report))
    if fmt == "csv":
        rows = report.csv_rows() if hasattr(report, "csv_rows") else [["key", "value"]] + _flatten(_as_json(report))
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(rows)
        return buf.getvalue()
    if hasattr(report, "text_lines"):
        lines = report.text_lines()
    else:
        lines = [f"{k}: {v}" for k, v in _flatten(_as_json(report))]
    return "\n".join(lines) + "\n"


def write_report(report: Any, path: str, fmt: str = "json") -> str:
    text = render_report(report, fmt)
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(text)
    return path


def load_report(path: str) -> Dict[str, Any]:
    try:
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read report {path}: {exc}") from exc
