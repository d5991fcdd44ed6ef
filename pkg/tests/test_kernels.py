import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from openqbm.errors import ConfigError, InfraredDivergenceError
from openqbm.kernels import (Continuum, Discrete, discretize_continuum, dissipation_kernel,
                             etabar, etabar0, eval_spectral_density, kernel_set, mass_shift,
                             noise_kernel, ohmic_highT_kernel_set, ohmic_highT_reference,
                             smeared_spectral_density)

OHMIC = Continuum(k=1, gamma=0.1, lambda_cut=10.0)


def ohmic_etabar(gamma, lam, s):
    return gamma * lam / (2 * math.sqrt(math.pi)) * np.exp(-(lam * s) ** 2 / 4)


def ohmic_eta(gamma, lam, s):
    return -gamma * lam**3 * s / (4 * math.sqrt(math.pi)) * np.exp(-(lam * s) ** 2 / 4)


class TestSpectralDensity:
    def test_infrared_divergence_refused(self):
        with pytest.raises(InfraredDivergenceError):
            Continuum(k=0.0)
        with pytest.raises(InfraredDivergenceError):
            Continuum(k=-0.5)

    def test_bad_parameters(self):
        with pytest.raises(ConfigError):
            Continuum(gamma=-1.0)
        with pytest.raises(ConfigError):
            Continuum(lambda_cut=0.0)
        with pytest.raises(ConfigError):
            Discrete(((1.0, -2.0),))
        with pytest.raises(ConfigError):
            Discrete(())

    def test_negative_frequency(self):
        with pytest.raises(ValueError):
            eval_spectral_density(OHMIC, [-1.0, 1.0])

    def test_discrete_has_no_pointwise_value(self):
        with pytest.raises(ValueError):
            eval_spectral_density(Discrete(((1.0, 1.0),)), 1.0)

    def test_ohmic_shape(self):
        w = np.array([0.0, 1.0, 10.0])
        expected = 0.1 / math.pi * w * np.exp(-(w / 10.0) ** 2)
        assert np.allclose(eval_spectral_density(OHMIC, w), expected, rtol=1e-15)

    def test_smeared_discrete_integrates_to_weights(self):
        sd = Discrete(((1.0, 2.0), (0.5, 3.0)))
        w = np.linspace(0.0, 6.0, 6001)
        dens = smeared_spectral_density(sd, w, 0.05)
        total = np.trapezoid(dens, w) if hasattr(np, "trapezoid") else np.trapz(dens, w)
        assert total == pytest.approx(sd.weights.sum(), rel=1e-6)


class TestKernels:
    def test_etabar_closed_form(self):
        s = np.linspace(0.0, 0.8, 17)
        assert np.allclose(etabar(OHMIC, s), ohmic_etabar(0.1, 10.0, s), rtol=1e-10, atol=1e-14)

    def test_eta_closed_form(self):
        s = np.linspace(-0.8, 0.8, 33)
        assert np.allclose(dissipation_kernel(OHMIC, s), ohmic_eta(0.1, 10.0, s),
                           rtol=1e-10, atol=1e-13)

    def test_parity(self):
        s = np.linspace(0.05, 1.0, 7)
        assert np.allclose(noise_kernel(OHMIC, 2.0, -s), noise_kernel(OHMIC, 2.0, s))
        assert np.allclose(dissipation_kernel(OHMIC, -s), -dissipation_kernel(OHMIC, s))
        assert dissipation_kernel(OHMIC, 0.0) == 0.0

    def test_discrete_sums(self):
        sd = Discrete(((1.0, 2.0),))
        # weight m w^3 / 2 = 4
        assert noise_kernel(sd, 1.0, 0.0) == pytest.approx(4.0 / math.tanh(1.0), rel=1e-14)
        assert dissipation_kernel(sd, 0.3) == pytest.approx(-4.0 * math.sin(0.6), rel=1e-14)
        assert etabar(sd, 0.3) == pytest.approx(2.0 * math.cos(0.6), rel=1e-14)

    def test_mass_shift(self):
        assert mass_shift(OHMIC) == pytest.approx(2 * etabar0(OHMIC), rel=1e-15)
        assert etabar0(OHMIC) == pytest.approx(0.1 * 10.0 / (2 * math.sqrt(math.pi)), rel=1e-12)

    def test_low_temperature_noise_floor(self):
        # T -> 0: coth -> 1, so nu(0) -> int I = gamma Lambda^2 / (2 pi)
        nu0 = noise_kernel(OHMIC, 1e6, 0.0)
        assert nu0 == pytest.approx(0.1 * 100.0 / (2 * math.pi), rel=1e-10)

    def test_sub_ohmic_quadrature_converges(self):
        sd = Continuum(k=0.5, gamma=0.1, lambda_cut=5.0)
        # etabar(0) = (gamma/pi) w~^(1/2) Gamma(k/2) Lambda^k / 2
        exact = 0.1 / math.pi * math.gamma(0.25) * 5.0**0.5 / 2.0
        assert etabar0(sd) == pytest.approx(exact, rel=1e-10)

    def test_high_t_reference(self):
        nu, w = ohmic_highT_reference(0.1, 1000.0, 10.0, 0.0)
        assert nu == pytest.approx(0.1 * 1000.0 * 10.0 / math.sqrt(math.pi))
        assert w == 0.1
        with pytest.raises(ConfigError):
            ohmic_highT_reference(0.1, 0.0, 10.0, 0.0)

    def test_noise_kernel_rejects_bad_beta(self):
        with pytest.raises(ConfigError):
            noise_kernel(OHMIC, 0.0, 0.1)


class TestKernelSet:
    def test_sample_shapes_and_cache(self):
        ks = kernel_set(OHMIC, 0.5)
        nu, eta, eb = ks.sample(0.01, 10)
        assert nu.shape == eta.shape == eb.shape == (11,)
        assert ks.sample(0.01, 10)[0] is nu
        assert eb[0] == pytest.approx(ks.etabar0)

    def test_high_t_set_integrals(self):
        ks = ohmic_highT_kernel_set(0.2, 3.0, 50.0)
        s = np.linspace(0.0, 0.5, 20001)
        integral = 2 * np.sum(ks.nu(s)) * (s[1] - s[0]) - ks.nu(0.0) * (s[1] - s[0])
        assert integral == pytest.approx(2 * 0.2 * 3.0, rel=1e-6)
        # int_0^inf eta(s) s ds = -int_0^inf etabar = -gamma/2
        first = np.sum(ks.eta(s) * s) * (s[1] - s[0])
        assert first == pytest.approx(-0.1, rel=1e-6)

    def test_discretized_comb_matches_continuum(self):
        comb = discretize_continuum(OHMIC, 0.01)
        s = np.array([0.0, 0.1, 0.3])
        # the dropped w = 0 node costs half a cell of I(w)/w -> gamma/pi there
        missing = 0.5 * 0.01 * 0.1 / math.pi
        assert np.allclose(etabar(comb, s) + missing, etabar(OHMIC, s), rtol=1e-6)


@given(s=st.floats(0.0, 3.0), beta=st.floats(0.1, 10.0), omega=st.floats(0.2, 5.0))
def test_discrete_noise_bounded_by_peak(s, beta, omega):
    sd = Discrete(((1.0, omega), (2.0, 0.5 * omega)))
    assert abs(noise_kernel(sd, beta, s)) <= noise_kernel(sd, beta, 0.0) * (1 + 1e-12)


@given(s=st.floats(0.01, 0.5))
def test_etabar_derivative_is_eta(s):
    h = 1e-4
    fd = (etabar(OHMIC, s + h) - etabar(OHMIC, s - h)) / (2 * h)
    assert fd == pytest.approx(dissipation_kernel(OHMIC, s), rel=1e-6, abs=1e-10)
