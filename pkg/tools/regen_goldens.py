#!/usr/bin/env python3
"""Regenerate the golden CLI reports and trace CSV under tests/goldens.

Run from anywhere after an intentional report-format change:

    python3 tools/regen_goldens.py
"""
import io
import os
import sys
from contextlib import redirect_stdout

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, os.path.join(ROOT, "tests"))

from _golden_matrix import CASES, TRACE_CASE, TRACE_GOLDEN, golden_name  # noqa: E402

from proxpoint.cli import main  # noqa: E402


def run(argv):
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = main(argv)
    return code, buf.getvalue()


def regenerate():
    golden_dir = os.path.join(ROOT, "tests", "goldens")
    os.makedirs(golden_dir, exist_ok=True)
    for command, fixture, expected in CASES:
        code, text = run([command, os.path.join(ROOT, "fixtures", fixture), "--no-timings"])
        if code != expected:
            raise SystemExit(f"{command} {fixture}: exit {code}, expected {expected}")
        with open(os.path.join(golden_dir, golden_name(command, fixture)), "w", encoding="utf-8") as fh:
            fh.write(text)
    command, fixture, expected = TRACE_CASE
    trace_path = os.path.join(golden_dir, TRACE_GOLDEN)
    code, _ = run([command, os.path.join(ROOT, "fixtures", fixture), "--no-timings", "--trace-csv", trace_path])
    if code != expected:
        raise SystemExit(f"trace run: exit {code}, expected {expected}")
    print(f"wrote {len(CASES)} reports + {TRACE_GOLDEN} to {golden_dir}")


if __name__ == "__main__":
    regenerate()
