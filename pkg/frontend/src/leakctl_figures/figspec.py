"""Figure specification: what to plot, from which CSV files, to which image.

A spec is a small JSON document:

    {
      "kind": "curve",                       # curve | heatmap | trajectory | comparison
      "csv": {"data": "not_sweep_phase.csv",
              "fit": "not_fit_phase.csv"},   # "fit" only used by curve
      "x": "phase",                          # column names in the data CSV
      "y": "fidelity",                       # curve/comparison; heatmap value column
      "series": ["f_gtc", "f_rabi"],         # comparison only (default: all non-x)
      "labels": {"x": "...", "y": "...", "title": "..."},
      "out": "figure.png"                    # .png or .svg
    }

The fit CSV, when given, holds one row of raw-coordinate quadratic
coefficients under the header ``a,b,c``; the curve renderer overlays the
dashed parabola a*x^2 + b*x + c on top of the swept points.
"""

import csv
import json
import os
from dataclasses import dataclass, field

import numpy as np


class SpecError(Exception):
    """The figure spec or a referenced CSV is unusable."""


KINDS = ("curve", "heatmap", "trajectory", "comparison")

_ALLOWED_KEYS = {"kind", "csv", "x", "y", "series", "labels", "out"}
_ALLOWED_LABELS = {"x", "y", "title"}


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    csv: dict
    out: str
    x: str | None = None
    y: str | None = None
    series: tuple = ()
    labels: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SpecError(f"unknown figure kind {self.kind!r}; expected one of {KINDS}")
        if not isinstance(self.csv, dict) or "data" not in self.csv:
            raise SpecError("spec needs a csv mapping with at least a 'data' path")
        for key, path in self.csv.items():
            if not isinstance(path, str) or not path:
                raise SpecError(f"csv entry {key!r} must be a non-empty path string")
        ext = os.path.splitext(self.out)[1].lower()
        if ext not in (".png", ".svg"):
            raise SpecError(f"output path {self.out!r} must end in .png or .svg")
        bad = set(self.labels) - _ALLOWED_LABELS
        if bad:
            raise SpecError(f"unknown label keys: {sorted(bad)}")


def load_spec(path: str) -> FigureSpec:
    """Parse a spec JSON file, resolving relative CSV paths against it."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise SpecError(f"cannot read spec {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SpecError(f"spec {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SpecError("spec document must be a JSON object")
    unknown = set(doc) - _ALLOWED_KEYS
    if unknown:
        raise SpecError(f"unknown spec keys: {sorted(unknown)}")
    for req in ("kind", "csv", "out"):
        if req not in doc:
            raise SpecError(f"spec is missing required key {req!r}")
    base = os.path.dirname(os.path.abspath(path))

    def resolve(p):
        return p if os.path.isabs(p) else os.path.join(base, p)

    csv_map = doc["csv"]
    if isinstance(csv_map, str):
        csv_map = {"data": csv_map}
    if not isinstance(csv_map, dict):
        raise SpecError("'csv' must be a path or a mapping of names to paths")
    csv_map = {k: resolve(v) if isinstance(v, str) else v for k, v in csv_map.items()}
    out = resolve(doc["out"]) if isinstance(doc["out"], str) else doc["out"]
    if not isinstance(out, str):
        raise SpecError("'out' must be a path string")
    return FigureSpec(
        kind=doc["kind"],
        csv=csv_map,
        out=out,
        x=doc.get("x"),
        y=doc.get("y"),
        series=tuple(doc.get("series", ())),
        labels=dict(doc.get("labels", {})),
    )


def read_table(path: str, required=()):
    """Load a CSV into a dict of float columns, validating the header.

    Raises SpecError for a missing file, an empty table, or absent columns.
    """
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            rows = list(reader)
    except OSError as exc:
        raise SpecError(f"cannot read CSV {path}: {exc}") from exc
    if not rows:
        raise SpecError(f"CSV {path} is empty")
    header = [h.strip() for h in rows[0]]
    body = [r for r in rows[1:] if any(cell.strip() for cell in r)]
    if not body:
        raise SpecError(f"CSV {path} has no data rows")
    missing = [c for c in required if c not in header]
    if missing:
        raise SpecError(f"CSV {path} is missing columns {missing}; header is {header}")
    table = {}
    for j, name in enumerate(header):
        col = []
        for r in body:
            if len(r) != len(header):
                raise SpecError(f"CSV {path} has a ragged row: {r}")
            cell = r[j].strip()
            try:
                col.append(float(cell))
            except ValueError:
                # boolean flags from the sweep CSVs ("ok" column)
                low = cell.lower()
                if low in ("true", "false"):
                    col.append(1.0 if low == "true" else 0.0)
                else:
                    raise SpecError(
                        f"CSV {path} column {name!r} has non-numeric value {cell!r}"
                    ) from None
        table[name] = np.asarray(col, dtype=float)
    return table
