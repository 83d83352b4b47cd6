import math

import pytest
from hypothesis import strategies as st

from leibniz3.jet import Jet

finite = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False, allow_infinity=False)


def jets(order: int, lo: float = -3.0, hi: float = 3.0):
    entry = st.floats(min_value=lo, max_value=hi, allow_nan=False, allow_infinity=False)
    return st.lists(entry, min_size=order + 1, max_size=order + 1).map(lambda v: Jet(tuple(v)))


def positive_jets(order: int):
    head = st.floats(min_value=0.5, max_value=3.0)
    tail = st.lists(finite, min_size=order, max_size=order)
    return st.tuples(head, tail).map(lambda p: Jet((p[0], *p[1])))


def taylor_oracle_mul(a, b):
    """Multiply through scaled Taylor coefficients with numpy, then unscale."""
    import numpy as np

    k = len(a) - 1
    ta = np.array([a[i] / math.factorial(i) for i in range(k + 1)])
    tb = np.array([b[i] / math.factorial(i) for i in range(k + 1)])
    prod = np.convolve(ta, tb)[: k + 1]
    return [float(prod[i] * math.factorial(i)) for i in range(k + 1)]


def assert_jet_close(got, want, rel=1e-12, abs_=1e-12):
    assert len(got) == len(want)
    for g, w in zip(got, want):
        assert g == pytest.approx(w, rel=rel, abs=abs_)


_ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line; the test still asserts on its own."""

    def record(label: str, ok: bool, detail: str = "") -> bool:
        _ACCEPTANCE.append((label, bool(ok), detail))
        print(f"{'PASS' if ok else 'FAIL'}  {label}  {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}  {detail}")
