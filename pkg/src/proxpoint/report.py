"""Deterministic text reports and trace CSV output.

Every number is rendered with 12 significant digits so report bytes are
stable across runs and platforms for the same inputs.  Euclidean points
print as coordinate tuples, finite points as ``#id``.
"""
from __future__ import annotations


def fmt(value):
    """Format a number with 12 significant digits (stable across runs)."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    text = f"{float(value):.12g}"
    return "0" if text == "-0" else text


def fmt_point(space, point_id):
    """Render a point: coordinates on euclidean backends, #id on finite."""
    if space.kind == "euclidean":
        coords = space.coords([point_id])[0]
        return "(" + ", ".join(fmt(float(c)) for c in coords) + ")"
    return f"#{int(point_id)}"


def fmt_ids(ids):
    return "[" + ", ".join(str(int(i)) for i in ids) + "]"


class Report:
    """Accumulates ``key = value`` lines plus free-form detail lines."""

    def __init__(self):
        self._lines = []

    def line(self, text=""):
        self._lines.append(text)
        return self

    def field(self, key, value):
        if isinstance(value, str):
            rendered = value
        elif value is None:
            rendered = "none"
        else:
            rendered = fmt(value)
        self._lines.append(f"{key} = {rendered}")
        return self

    def text(self):
        return "\n".join(self._lines) + "\n"


TRACE_HEADER = "iter,step,residual,snap"


def write_trace_csv(path, trace):
    """Write iteration history as CSV with a fixed header."""
    rows = [TRACE_HEADER]
    for i, row in enumerate(trace):
        rows.append(f"{i},{fmt(row.step)},{fmt(row.residual)},{fmt(row.snap)}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(rows) + "\n")
