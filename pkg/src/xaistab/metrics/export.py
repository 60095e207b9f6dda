"""Per-instance CSV export of metric values."""

from __future__ import annotations

import csv
import io
from pathlib import Path

CSV_COLUMNS = ("test", "instance_id", "metric", "mode", "epsilon", "n_samples", "value")


def per_instance_rows(test: str, metric: str, mode: str, spec, values):
    for i, v in enumerate(values):
        yield {
            "test": test,
            "instance_id": i,
            "metric": metric,
            "mode": mode,
            "epsilon": repr(float(spec.epsilon)),
            "n_samples": int(spec.n_samples),
            "value": repr(float(v)),
        }


def format_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def write_csv(path, rows) -> Path:
    path = Path(path)
    path.write_text(format_csv(rows))
    return path
