"""Text output helpers: shortest round-trip floats and commented headers."""
from __future__ import annotations

import csv
import json
import math
import numbers

from . import __version__

__all__ = ["fmt", "metadata_lines", "write_csv"]


def fmt(x) -> str:
    """Shortest decimal string that round-trips to the same float."""
    if isinstance(x, numbers.Integral):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def metadata_lines(metadata: dict | None, prefix: str = "# ") -> list[str]:
    """Comment lines carrying the package version and a run configuration."""
    lines = [f"{prefix}rdmgeo {__version__}"]
    if metadata:
        lines.append(prefix + "config: " + json.dumps(metadata, sort_keys=True, default=str))
    return lines


def write_csv(fh, columns, rows, metadata: dict | None = None):
    for line in metadata_lines(metadata):
        fh.write(line + "\n")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([v if isinstance(v, str) else fmt(v) for v in row])
