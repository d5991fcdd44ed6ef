import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from openqbm.cl_evolve import (DensityMatrixGrid, GridSpec, MasterTerms, Potential, energy,
                               evolve, initial_jolt, jolt_constant, liouvillian_apply,
                               make_cat, make_gaussian, stability_bounds, step)
from openqbm.errors import ConfigError, NumericalError, StabilityError

GRID = GridSpec(-8.0, 8.0, 97)
ONLY_DECOHERENCE = MasterTerms(kinetic=False, potential=False, dissipation=False)


def _purity(rho):
    return float(rho.dphi**2 * np.sum(np.abs(rho.data) ** 2))


class TestPotential:
    def test_values_and_derivatives(self):
        pot = Potential(mu2=2.0, lambda4=0.5)
        x = np.array([-1.0, 0.5, 2.0])
        assert np.allclose(pot(x), -x**2 + 0.125 * x**4)
        assert np.allclose(pot.d1(x), -2.0 * x + 0.5 * x**3)
        assert np.allclose(pot.d3(x), 3.0 * x)

    def test_renormalized_mass(self):
        pot = Potential(mu2=1.0, lambda4=1.0, mass_shift=0.3, renormalized=True)
        assert pot.mu2_eff == pytest.approx(0.7)
        assert Potential(mu2=1.0, lambda4=1.0, mass_shift=0.3).mu2_eff == 1.0

    def test_validation(self):
        with pytest.raises(ConfigError):
            Potential(lambda4=-1.0)
        with pytest.raises(ConfigError):
            Potential(mass_shift=-0.1)
        with pytest.warns(UserWarning, match="inverted"):
            Potential(mu2=1.0)


class TestStates:
    def test_gaussian_is_pure_and_normalized(self):
        rho = make_gaussian(1.0, 0.5, 0.8, GRID)
        assert rho.trace() == pytest.approx(1.0, abs=1e-14)
        assert _purity(rho) == pytest.approx(1.0, abs=1e-12)
        diag = np.real(np.diag(rho.data))
        expected = np.exp(-(GRID.phi - 1.0) ** 2 / (2 * 0.64)) / math.sqrt(2 * math.pi * 0.64)
        assert np.allclose(diag, expected, atol=1e-10)

    def test_cat_has_two_lobes(self):
        rho = make_cat(6.0, 0.5, GRID)
        diag = np.real(np.diag(rho.data))
        peaks = GRID.phi[np.argsort(diag)[-2:]]
        assert sorted(peaks) == pytest.approx([-3.0, 3.0], abs=GRID.dphi)

    def test_support_checked(self):
        with pytest.raises(ConfigError):
            make_gaussian(7.0, 0.0, 0.5, GRID)
        with pytest.raises(ConfigError):
            make_cat(12.0, 0.5, GRID)
        with pytest.raises(ConfigError):
            make_gaussian(0.0, 0.0, 0.0, GRID)

    def test_grid_validation(self):
        with pytest.raises(ConfigError):
            GridSpec(1.0, -1.0, 10)
        with pytest.raises(ConfigError):
            DensityMatrixGrid(0.0, 1.0, np.zeros((3, 4)))


class TestLiouvillian:
    def test_diagonal_terms_vanish(self, rng):
        # decoherence and friction are proportional to (x - y)
        rho = make_gaussian(0.5, 0.3, 1.0, GRID)
        terms = MasterTerms(kinetic=False, potential=False)
        d = liouvillian_apply(rho, Potential(), 0.3, 2.0, terms)
        assert np.max(np.abs(np.diag(d))) == 0.0

    def test_trace_preserved_by_generator(self):
        rho = make_gaussian(0.5, 0.3, 1.0, GRID)
        d = liouvillian_apply(rho, Potential(mu2=-1.0, lambda4=0.1), 0.3, 2.0)
        assert abs(np.trace(d)) * GRID.dphi < 1e-8

    def test_parameter_checks(self):
        rho = make_gaussian(0.0, 0.0, 1.0, GRID)
        with pytest.raises(ConfigError):
            liouvillian_apply(rho, Potential(), -0.1, 1.0)
        with pytest.raises(ConfigError):
            liouvillian_apply(rho, Potential(), 0.1, 0.0)


class TestStep:
    pot = Potential(mu2=-1.0, lambda4=0.1)

    def test_frozen_decoherence_is_exact(self):
        rho = make_cat(6.0, 0.5, GRID)
        gamma, T, t = 0.1, 1.0, 0.05
        out = evolve(rho, Potential(), gamma, T, t, dt=1e-3, terms=ONLY_DECOHERENCE)[-1]
        x = GRID.phi
        expected = rho.data * np.exp(-2 * gamma * T * np.subtract.outer(x, x) ** 2 * t)
        assert np.max(np.abs(out.data - expected)) < 1e-9 * np.max(np.abs(expected))

    def test_small_step_is_identity(self):
        rho = make_gaussian(0.5, 0.3, 1.0, GRID)
        out = step(rho, self.pot, 0.1, 1.0, 1e-9)
        assert np.max(np.abs(out.data - rho.data)) < 1e-6
        assert out.t == pytest.approx(1e-9)

    def test_trace_and_hermiticity(self):
        rho = make_gaussian(0.5, 0.3, 1.0, GRID)
        out = evolve(rho, self.pot, 0.1, 1.0, 0.3)[-1]
        assert out.trace() == pytest.approx(1.0, abs=1e-12)
        assert out.hermiticity_error() == 0.0

    def test_energy_conserved_without_bath(self):
        rho = make_gaussian(1.0, 0.0, 1.0, GRID)
        e0 = energy(rho, self.pot)
        bound = stability_bounds(GRID, 0.0, 0.0)["dt"]
        errs = [abs(energy(evolve(rho, self.pot, 0.0, 0.0, 0.5, dt=bound / k)[-1], self.pot) - e0)
                for k in (1, 2)]
        # a smooth packet has no weight in the stiff modes, so drift is at rounding
        assert max(errs) < 1e-10

    def test_stability_error_suggests_dt(self):
        rho = make_gaussian(0.0, 0.0, 1.0, GRID)
        bound = stability_bounds(GRID, 0.1, 1.0)["dt"]
        with pytest.raises(StabilityError) as err:
            step(rho, self.pot, 0.1, 1.0, 2 * bound)
        assert err.value.suggested_dt == pytest.approx(bound)
        with pytest.raises(StabilityError):
            evolve(rho, self.pot, 0.1, 1.0, 0.1, dt=2 * bound)

    def test_nan_raises(self):
        rho = make_gaussian(0.0, 0.0, 1.0, GRID)
        rho.data[3, 4] = np.nan
        with pytest.raises(NumericalError):
            step(rho, self.pot, 0.1, 1.0, 1e-4)

    def test_unknown_scheme(self):
        with pytest.raises(ConfigError):
            step(make_gaussian(0.0, 0.0, 1.0, GRID), self.pot, 0.0, 0.0, 1e-4, scheme="euler")

    def test_sample_times_hit_exactly(self):
        rho = make_gaussian(0.0, 0.0, 1.0, GRID)
        times = [0.0, 0.013, 0.05, 0.1]
        out = evolve(rho, self.pot, 0.1, 1.0, 0.1, dt=0.0015, sample_times=times)
        assert [s.t for s in out] == times

    def test_purity_decreases_under_decoherence(self):
        rho = make_cat(6.0, 0.5, GRID)
        out = evolve(rho, Potential(), 0.05, 1.0, 0.3,
                     sample_times=np.linspace(0, 0.3, 7))
        p = [_purity(s) for s in out]
        assert np.all(np.diff(p) < 0)


class TestJolt:
    def test_symmetric_state_has_no_jolt(self):
        rho = make_cat(4.0, 0.5, GRID)
        assert abs(jolt_constant(rho)) < 1e-15

    def test_displaced_gaussian_constant(self):
        # C = 2 c * sqrt(8 pi sigma^2) in the continuum; Richardson in dphi
        c, sig = 1.0, 0.7
        vals = []
        for n in (65, 129):
            g = GridSpec(-7.0, 9.0, n)
            vals.append(jolt_constant(make_gaussian(c, 0.0, sig, g)))
        exact = 2 * c * math.sqrt(8 * math.pi * sig**2)
        assert vals[1] == pytest.approx(exact, rel=1e-8)

    def test_jolt_keeps_trace(self):
        rho = make_gaussian(1.0, 0.0, 0.7, GRID)
        out = initial_jolt(rho, 0.1)
        assert out.trace() == pytest.approx(rho.trace(), abs=1e-14)
        assert out.hermiticity_error() < 1e-14

    def test_jolt_only_at_origin(self):
        rho = make_gaussian(1.0, 0.0, 0.7, GRID)
        rho.t = 0.5
        with pytest.raises(ConfigError):
            evolve(rho, Potential(), 0.1, 1.0, 0.6, jolt=True)


@given(center=st.floats(-2, 2), momentum=st.floats(-1, 1), gamma=st.floats(0, 0.5))
def test_rhs_preserves_hermiticity(center, momentum, gamma):
    rho = make_gaussian(center, momentum, 0.9, GRID)
    d = liouvillian_apply(rho, Potential(mu2=-1.0, lambda4=0.2), gamma, 1.5)
    assert np.max(np.abs(d - d.conj().T)) < 1e-10 * max(1.0, np.max(np.abs(d)))
