import io
import os
from contextlib import redirect_stdout

import pytest

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
FIXTURES = os.path.join(ROOT, "fixtures")
GOLDENS = os.path.join(ROOT, "tests", "goldens")


def fixture_path(name):
    return os.path.join(FIXTURES, name)


def golden_path(name):
    return os.path.join(GOLDENS, name)


def run_cli(argv):
    """Run the CLI in-process; returns (exit code, stdout text)."""
    from proxpoint.cli import main

    buf = io.StringIO()
    with redirect_stdout(buf):
        code = main(argv)
    return code, buf.getvalue()


@pytest.fixture
def segments_doc():
    from proxpoint.scenario import load_scenario

    return load_scenario(fixture_path("segments.json"))
