import numpy as np
import pytest
from hypothesis import strategies as st

from convprod.measures import LatticeMeasure


def naive_convolve(a: LatticeMeasure, b: LatticeMeasure) -> dict:
    out = {}
    for i, wa in zip(a.support, a.weights):
        for j, wb in zip(b.support, b.weights):
            out[int(i + j)] = out.get(int(i + j), 0.0) + wa * wb
    return out


def as_dict(mu: LatticeMeasure) -> dict:
    return {int(k): float(w) for k, w in zip(mu.support, mu.weights)}


def random_measure(rng, max_width=8, centered=False, lo=-5, hi=5):
    width = int(rng.integers(1, max_width + 1))
    w = rng.random(width) + 0.05
    w /= w.sum()
    offset = int(rng.integers(lo, hi + 1))
    mu = LatticeMeasure(offset, w)
    if centered:
        # mixing with the reflection centers the measure
        from convprod.measures import new_measure
        pts = {}
        for k, m in mu.points():
            pts[k] = pts.get(k, 0.0) + m / 2
            pts[-k] = pts.get(-k, 0.0) + m / 2
        mu = new_measure(pts.items())
    return mu


@st.composite
def measures(draw, max_width=8):
    width = draw(st.integers(1, max_width))
    raw = draw(st.lists(st.floats(0.01, 1.0), min_size=width, max_size=width))
    offset = draw(st.integers(-6, 6))
    w = np.array(raw)
    return LatticeMeasure(offset, w / w.sum())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE = []


@pytest.fixture
def criterion():
    """``criterion(num, name, ok, detail)`` logs one line and asserts ``ok``."""

    def record(num, name, ok, detail=""):
        ACCEPTANCE.append((num, name, bool(ok), detail))
        assert ok, f"criterion {num} ({name}) failed: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, name, ok, detail in sorted(ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {num:>2}. {name}: {detail}")
