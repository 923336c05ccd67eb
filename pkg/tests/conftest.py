import random

import pytest
from hypothesis import strategies as st

from mdagkit.checks import shipped_gallery
from mdagkit.generators import random_mdag
from mdagkit.graph import parse_mdag

GALLERY = shipped_gallery()


def load(name):
    return parse_mdag((GALLERY / f"{name}.mdag").read_text())


@pytest.fixture(scope="session")
def fig():
    """Gallery graphs by stem, e.g. ``fig["fig2i"]``."""
    return {p.stem: parse_mdag(p.read_text()) for p in sorted(GALLERY.glob("*.mdag"))}


@st.composite
def mdags(draw, min_n=2, max_n=5):
    n = draw(st.integers(min_n, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    p_edge = draw(st.sampled_from([0.2, 0.35, 0.5]))
    p_face = draw(st.sampled_from([0.0, 0.3, 0.6]))
    return random_mdag(n, random.Random(seed), p_edge=p_edge, p_face=p_face)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
