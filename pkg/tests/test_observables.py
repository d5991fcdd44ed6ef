import csv
import math
from dataclasses import astuple

import numpy as np
import pytest
from hypothesis import given, strategies as st

from openqbm.cl_evolve import (DensityMatrixGrid, GridSpec, Potential, evolve, make_cat,
                               make_gaussian)
from openqbm.observables import FIELDS, ObservableRecord, observe_rho, observe_wigner, write_series
from openqbm.wigner import wigner_transform

GRID = GridSpec(-8.0, 8.0, 129)
# fields computed the same way in both pictures
SHARED = ("trace", "purity", "linear_entropy", "mean_phi", "mean_pi", "var_phi", "var_pi", "cov")


def test_pure_gaussian_values():
    rec = observe_rho(make_gaussian(1.0, 0.5, 0.8, GRID))
    assert rec.trace == pytest.approx(1.0, abs=1e-13)
    assert rec.purity == pytest.approx(1.0, abs=1e-12)
    assert rec.linear_entropy == pytest.approx(0.0, abs=1e-12)
    assert rec.mean_phi == pytest.approx(1.0, abs=1e-12)
    assert rec.mean_pi == pytest.approx(-0.5, abs=1e-10)
    assert rec.var_phi == pytest.approx(0.64, abs=1e-10)
    assert rec.var_pi == pytest.approx(1 / (4 * 0.64), abs=1e-8)
    assert rec.cov == pytest.approx(0.0, abs=1e-10)


def test_maximally_mixed():
    n = GRID.n
    rho = DensityMatrixGrid(GRID.phi_min, GRID.phi_max, np.eye(n) / (n * GRID.dphi))
    rec = observe_rho(rho)
    assert rec.purity == pytest.approx(1.0 / n, rel=1e-12)


@given(c=st.floats(-1.5, 1.5), p=st.floats(-1.0, 1.0), sig=st.floats(0.7, 1.1))
def test_pictures_agree(c, p, sig):
    rho = make_gaussian(c, p, sig, GRID)
    a = observe_rho(rho)
    b = observe_wigner(wigner_transform(rho))
    for name in SHARED:
        assert getattr(a, name) == pytest.approx(getattr(b, name), abs=1e-8), name


def test_pictures_agree_for_evolved_cat():
    rho = evolve(make_cat(5.0, 0.6, GRID), Potential.harmonic(1.0), 0.05, 1.0, 0.2)[-1]
    a = observe_rho(rho)
    b = observe_wigner(wigner_transform(rho))
    for name in SHARED:
        assert getattr(a, name) == pytest.approx(getattr(b, name), abs=1e-8), name


def test_cat_entropy_timescale():
    # well separated lobes: purity ~ (1 + exp(-4 gamma T d^2 t)) / 2
    d, gamma, T = 5.0, 0.02, 1.0
    rho0 = make_cat(d, 0.6, GRID)
    times = np.linspace(0.0, 0.3, 31)
    out = evolve(rho0, Potential(), gamma, T, 0.3, sample_times=times)
    s = np.array([observe_rho(r).linear_entropy for r in out])
    assert np.all(np.diff(s) > 0)
    t_quarter = np.interp(0.25, s, times)
    expected = math.log(2) / (4 * gamma * T * d**2)
    assert 0.5 * expected < t_quarter < 2.0 * expected


def test_coherence_threshold():
    rho = make_cat(6.0, 0.5, GRID)
    assert observe_rho(rho).offdiag_coherence > 0.1
    assert observe_rho(rho, d_threshold=15.0).offdiag_coherence < 1e-15
    assert observe_rho(rho, d_threshold=20.0).offdiag_coherence == 0.0
    # exp(-d^2 / (8 sigma^2)) at d = 4, sigma = 0.3
    assert observe_rho(make_gaussian(0.0, 0.0, 0.3, GRID)).offdiag_coherence < 1e-8


def test_series_csv(tmp_path):
    recs = [observe_rho(make_gaussian(0.0, 0.0, 1.0, GRID)),
            observe_rho(make_cat(4.0, 0.6, GRID))]
    path = tmp_path / "series.csv"
    write_series(path, recs)
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == FIELDS
    assert FIELDS[:3] == ("t", "trace", "purity")
    back = ObservableRecord(*map(float, rows[2]))
    assert astuple(back) == astuple(recs[1])
