"""Deterministic JSON/CSV reports and plot-data series."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
from typing import Iterable, Optional, Sequence

import numpy as np

from .config import ExperimentConfig


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def build_report(cfg: ExperimentConfig, result: dict) -> dict:
    # the output path is not part of the experiment, so reruns elsewhere hash the same
    conf = {k: v for k, v in cfg.to_dict().items() if k != "out"}
    body = {"config": _clean(conf), "result": _clean(result)}
    blob = json.dumps(body, sort_keys=True).encode()
    body["content_hash"] = hashlib.sha256(blob).hexdigest()
    return body


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def rows_to_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def write_text(text: str, path: Optional[str]) -> None:
    if path is None:
        print(text, end="")
        return
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def growth_csv(report: dict) -> str:
    return rows_to_csv(["R", "I", "stderr"],
                       [(p["R"], p["I"], p["stderr"]) for p in report["partials"]])


def emit_plotdata(report: dict, directory: str, prefix: str = "series") -> list:
    """Write every (R, I, stderr), (lambda, phi) and lower-bound series as its own CSV."""
    os.makedirs(directory, exist_ok=True)
    result = report.get("result", report)
    written = []

    def put(name, header, rows):
        path = os.path.join(directory, f"{prefix}_{name}.csv")
        write_text(rows_to_csv(header, rows), path)
        written.append(path)

    for i, scan in enumerate(_find(result, "partials")):
        put(f"growth{i}", ["R", "I", "stderr"], [(p["R"], p["I"], p["stderr"]) for p in scan["partials"]])
    for i, sl in enumerate(_find(result, "slice")):
        put(f"slice{i}", ["lambda1", "lambda2", "phi"], sl["slice"])
    for i, lb in enumerate(_find(result, "lower_bound")):
        rows = zip(lb["N"], lb["lower_bound"], lb.get("integral", [""] * len(lb["N"])))
        put(f"lowerbound{i}", ["N", "lower_bound", "integral"], rows)
    return written


def _find(obj, key):
    """Every dict (depth first, in order) holding ``key``."""
    out = []
    if isinstance(obj, dict):
        if key in obj:
            out.append(obj)
        for k in sorted(obj):
            if k != key:
                out.extend(_find(obj[k], key))
    elif isinstance(obj, list):
        for v in obj:
            out.extend(_find(v, key))
    return out
