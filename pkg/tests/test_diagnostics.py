import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import fig2_data, fig4_data
from invariant_swe.core import Grid1D, Grid2D, State1D, State2D
from invariant_swe.diagnostics import (
    conserved_1d,
    conserved_2d,
    csv_header,
    csv_row,
    record_series,
    relative_changes,
)


@given(st.integers(3, 40), st.floats(0.5, 20), st.integers(0, 1000))
def test_rest_state_1d(N, h0, seed):
    L = 2 * math.pi
    x = np.sort(np.random.default_rng(seed).uniform(0, L, N))
    if np.any(np.diff(x) <= 0):
        return
    r = conserved_1d(Grid1D(x, L), State1D(np.zeros(N), np.full(N, h0)))
    assert r.M == pytest.approx(h0 * L, rel=1e-13)
    assert r.P == 0.0
    assert r.H == pytest.approx(0.5 * h0 ** 2 * L, rel=1e-13)


def test_substitution_values():
    g = Grid1D.uniform(10, 2 * math.pi)
    r = conserved_1d(g, State1D(np.zeros(10), np.full(10, 10.0)))
    assert r.M == pytest.approx(20 * math.pi, rel=1e-14)
    assert r.H == pytest.approx(100 * math.pi, rel=1e-14)


def test_rest_state_2d_and_linearity():
    g = Grid2D.uniform(9, 9)
    c = np.ones(g.shape)
    r = conserved_2d(g, State2D(0 * c, 0 * c, 10 * c))
    assert r.M == pytest.approx(10 * 4 * math.pi ** 2, rel=1e-13)
    r2 = conserved_2d(g, State2D(0.7 * c, 0 * c, 10 * c))
    assert r2.P == pytest.approx(0.7 * r2.M, rel=1e-13)


def test_relative_changes_use_scale_for_vanishing_momentum():
    g, s = fig4_data(11)
    r0 = conserved_2d(g, s)
    assert abs(r0.P) < 1e-12 and r0.P_scale > 1
    ch = relative_changes(r0, r0)
    assert all(v == 0.0 for v in ch.values())
    g1, s1 = fig2_data()
    a = conserved_1d(g1, s1)
    b = conserved_1d(g1, State1D(s1.u, 1.01 * s1.h))
    assert relative_changes(b, a)["relM"] == pytest.approx(0.01, rel=1e-12)


def test_record_series_and_csv():
    g, s = fig2_data()
    recs, ch = record_series([(0.0, g, s), (0.5, g, State1D(s.u, 2 * s.h))])
    assert len(recs) == 2 and len(ch) == 1 and ch[0]["relM"] == pytest.approx(1.0)
    assert csv_header(False) == ["t", "M", "P", "H", "relM", "relP", "relH"]
    assert len(csv_row(recs[1], recs[0])) == len(csv_header(False))
    g2, s2 = fig4_data(5)
    r2 = conserved_2d(g2, s2)
    assert len(csv_row(r2, r2)) == len(csv_header(True))
    with pytest.raises(ValueError):
        record_series([])
