"""Serialise reports as CSV, JSON or SVG bytes.

A report is a dict with ``scenario``, ``config`` (the fully resolved
parameters) and either ``rows`` (a list of flat dicts sharing the keys in
``columns``) or ``result`` (a nested dict).
"""

from __future__ import annotations

import csv
import io
import json
import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

CSV_FORMAT = ".15g"


def _scalar(x):
    """Plain Python scalar; non-finite floats become strings so JSON stays strict."""
    if hasattr(x, "item") and not isinstance(x, (list, tuple, dict)):
        x = x.item()
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, float):
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, complex):
        return {"re": _scalar(x.real), "im": _scalar(x.imag)}
    return x


def jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if hasattr(obj, "tolist") and getattr(obj, "ndim", 0) > 0:
        return jsonable(obj.tolist())
    return _scalar(obj)


def emit_json(report: dict) -> bytes:
    """Insertion-ordered JSON; floats use the shortest round-trip repr."""
    return (json.dumps(jsonable(report), indent=2, allow_nan=False) + "\n").encode("utf-8")


def _csv_cell(x) -> str:
    x = _scalar(x)
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float):
        return format(x, CSV_FORMAT)
    if x is None:
        return ""
    return str(x)


def flatten(d: dict, prefix: str = "") -> dict:
    """``{"a": {"b": 1}, "c": [2, 3]}`` -> ``{"a.b": 1, "c.0": 2, "c.1": 3}``."""
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(flatten(v, key + "."))
        elif isinstance(v, (list, tuple)):
            out.update(flatten({str(i): item for i, item in enumerate(v)}, key + "."))
        else:
            out[key] = v
    return out


def table(report: dict) -> tuple[list[str], list[dict]]:
    """Columns and rows; the resolved config is appended as ``config.*`` columns."""
    cfg = flatten(jsonable(report.get("config", {})), "config.")
    if "rows" in report:
        return list(report["columns"]) + list(cfg), [{**row, **cfg} for row in report["rows"]]
    row = flatten(jsonable(report["result"]))
    return list(row) + list(cfg), [{**row, **cfg}]


def emit_csv(report: dict) -> bytes:
    """Header row then data rows; LF line endings."""
    columns, rows = table(report)
    buf = io.StringIO(newline="")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_csv_cell(row.get(c)) for c in columns])
    return buf.getvalue().encode("utf-8")


def emit_svg(report: dict) -> bytes:
    """Line plot of ``report["plot"]["y"]`` against ``report["plot"]["x"]``, one curve per group."""
    spec = report.get("plot")
    if spec is None:
        raise ValueError(f"scenario {report.get('scenario')!r} has no plottable series")
    rows = report["rows"]
    x, y, group = spec["x"], spec["y"], spec.get("group")
    series: dict = {}
    for row in rows:
        series.setdefault(row[group] if group else None, []).append((row[x], row[y]))
    with plt.rc_context({"svg.hashsalt": "gravamp", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6, 4))
        for label, pts in series.items():
            pts.sort()
            ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=None if label is None else f"{group}={label}")
        if spec.get("logx"):
            ax.set_xscale("log")
        ax.set_xlabel(x)
        ax.set_ylabel(y)
        if group:
            ax.legend()
        buf = io.BytesIO()
        description = json.dumps(jsonable(report.get("config", {})))
        fig.savefig(buf, format="svg", metadata={"Date": None, "Description": description})
        plt.close(fig)
    return buf.getvalue()


EMITTERS = {"csv": emit_csv, "json": emit_json, "svg": emit_svg}
