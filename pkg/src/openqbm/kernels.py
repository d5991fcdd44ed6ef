"""Bath spectral densities and the noise/dissipation kernels they generate.

The bath is a set of harmonic oscillators characterised by the spectral
density ``I(omega)``. Two variants are supported:

* :class:`Continuum` -- ``I(w) = (gamma/pi) w (w/w_tilde)**(k-1) exp(-w**2/Lambda**2)``
* :class:`Discrete` -- ``I(w) = 1/2 sum_n m_n w_n**3 delta(w - w_n)``

From ``I`` follow the thermal noise kernel ``nu(s)``, the dissipation kernel
``eta(s)`` and its antiderivative ``etabar(s)``::

    nu(s)     =  int_0^inf dw I(w) coth(beta w / 2) cos(w s)
    eta(s)    = -int_0^inf dw I(w) sin(w s)
    etabar(s) =  int_0^inf dw I(w) / w cos(w s)

For the continuum family the integrals are done by panelled Gauss-Legendre
quadrature on ``[0, 6.1 Lambda]`` with panel doubling until two successive
estimates agree. The discrete variant is an exact finite sum.
"""
from dataclasses import dataclass, field
import math
from typing import Callable, Tuple, Union

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import ConfigError, InfraredDivergenceError, QuadratureError

__all__ = [
    "Continuum",
    "Discrete",
    "KernelSet",
    "eval_spectral_density",
    "smeared_spectral_density",
    "noise_kernel",
    "dissipation_kernel",
    "etabar",
    "etabar0",
    "mass_shift",
    "ohmic_highT_reference",
    "kernel_set",
    "ohmic_highT_kernel_set",
    "discretize_continuum",
]

#: Upper integration limit in units of the cutoff; exp(-6.1**2) < 1e-16.
CUTOFF_FACTOR = 6.1
#: Below this value of beta*omega the coth factor uses its Laurent expansion.
LAURENT_SWITCH = 1e-3
GL_ORDER = 32
DEFAULT_RTOL = 1e-12
MAX_PANELS = 1 << 16


@dataclass(frozen=True)
class Continuum:
    """Quasi-continuous spectral density with a Gaussian high-frequency cutoff."""

    k: float = 1.0
    gamma: float = 0.1
    lambda_cut: float = 10.0
    omega_tilde: float = 1.0

    def __post_init__(self):
        if not self.k > 0:
            raise InfraredDivergenceError(
                f"exponent k={self.k} must be > 0: etabar(0) = int I(w)/w dw diverges")
        if self.gamma < 0:
            raise ConfigError(f"coupling gamma={self.gamma} must be >= 0")
        if not self.lambda_cut > 0:
            raise ConfigError(f"cutoff lambda_cut={self.lambda_cut} must be > 0")
        if not self.omega_tilde > 0:
            raise ConfigError(f"omega_tilde={self.omega_tilde} must be > 0")

    def density(self, omega):
        omega = np.asarray(omega, dtype=float)
        return (self.gamma / np.pi) * omega * (omega / self.omega_tilde) ** (self.k - 1.0) \
            * np.exp(-(omega / self.lambda_cut) ** 2)


@dataclass(frozen=True)
class Discrete:
    """Finite set of bath oscillators given as ``(mass, frequency)`` pairs."""

    oscillators: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        osc = tuple((float(m), float(w)) for m, w in self.oscillators)
        if not osc:
            raise ConfigError("discrete bath needs at least one oscillator")
        for m, w in osc:
            if not (m > 0 and w > 0):
                raise ConfigError(f"oscillator (m={m}, omega={w}) must have m > 0, omega > 0")
        object.__setattr__(self, "oscillators", osc)

    @property
    def masses(self):
        return np.array([m for m, _ in self.oscillators])

    @property
    def frequencies(self):
        return np.array([w for _, w in self.oscillators])

    @property
    def weights(self):
        """Delta-comb weights ``m_n w_n**3 / 2``."""
        return 0.5 * self.masses * self.frequencies ** 3


SpectralDensity = Union[Continuum, Discrete]


def _check_omega(omega):
    omega = np.asarray(omega, dtype=float)
    if np.any(omega < 0):
        raise ValueError("spectral density is defined for omega >= 0 only")
    return omega


def eval_spectral_density(sd: SpectralDensity, omega):
    """Pointwise ``I(omega)``; only meaningful for the continuum variant."""
    omega = _check_omega(omega)
    if isinstance(sd, Discrete):
        raise ValueError(
            "a discrete bath is a delta comb without pointwise values; "
            "use smeared_spectral_density for plotting")
    return sd.density(omega)


def smeared_spectral_density(sd: SpectralDensity, omega, width: float):
    """Spectral density convolved with a normalized Gaussian of given width."""
    omega = _check_omega(omega)
    if not width > 0:
        raise ValueError("smearing width must be > 0")
    if isinstance(sd, Continuum):
        return sd.density(omega)
    d = omega[..., None] - sd.frequencies
    g = np.exp(-0.5 * (d / width) ** 2) / (width * math.sqrt(2 * math.pi))
    return np.sum(sd.weights * g, axis=-1)


def _coth_half(beta, omega):
    """``coth(beta*omega/2)`` with the two-term Laurent form near zero."""
    x = 0.5 * beta * omega
    out = np.empty_like(x)
    small = beta * omega < LAURENT_SWITCH
    out[small] = 1.0 / x[small] + x[small] / 3.0
    out[~small] = 1.0 / np.tanh(x[~small])
    return out


def _substitution_power(k):
    # omega = b * y**p smooths the omega**(k-1) endpoint behaviour
    if float(k).is_integer():
        return 1
    return max(1, math.ceil(4.0 / k))


def _gl_estimate(integrand, upper, s, panels, power):
    x, w = leggauss(GL_ORDER)
    edges = np.linspace(0.0, 1.0, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    y = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wy = (half[:, None] * w[None, :]).ravel()
    omega = upper * y ** power
    jac = upper * power * y ** (power - 1)
    vals = integrand(omega[:, None], s[None, :]) * (wy * jac)[:, None]
    return vals.sum(axis=0), np.abs(vals).sum(axis=0)


def _quad(integrand, sd, s, rtol):
    s = np.atleast_1d(np.asarray(s, dtype=float))
    upper = CUTOFF_FACTOR * sd.lambda_cut
    power = _substitution_power(sd.k)
    smax = float(np.max(np.abs(s))) if s.size else 0.0
    panels = max(4, math.ceil(upper * smax / math.pi) + 1)
    coarse, _ = _gl_estimate(integrand, upper, s, panels, power)
    while True:
        fine, scale = _gl_estimate(integrand, upper, s, 2 * panels, power)
        err = np.abs(fine - coarse)
        if np.all(err <= rtol * np.maximum(scale, np.abs(fine)) + 1e-300):
            return fine
        panels *= 2
        if panels > MAX_PANELS:
            raise QuadratureError(
                f"kernel quadrature did not converge with {panels} panels",
                residual=float(err.max()))
        coarse = fine


def _shape_like(s, values):
    return values.reshape(np.shape(s)) if np.ndim(s) else float(values[0])


def noise_kernel(sd: SpectralDensity, beta: float, s, rtol: float = DEFAULT_RTOL):
    """Thermal noise kernel ``nu(s)``, even in ``s``."""
    if not beta > 0:
        raise ConfigError("inverse temperature beta must be > 0")
    sarr = np.abs(np.atleast_1d(np.asarray(s, dtype=float)))
    if isinstance(sd, Discrete):
        wn = sd.frequencies
        coth = _coth_half(beta, wn)
        vals = np.cos(sarr[:, None] * wn) @ (sd.weights * coth)
        return _shape_like(s, vals)

    def f(omega, ss):
        return sd.density(omega) * _coth_half(beta, omega) * np.cos(omega * ss)

    return _shape_like(s, _quad(f, sd, sarr, rtol))


def dissipation_kernel(sd: SpectralDensity, s, rtol: float = DEFAULT_RTOL):
    """Dissipation kernel ``eta(s)``, odd in ``s``; temperature independent."""
    sarr = np.atleast_1d(np.asarray(s, dtype=float))
    if isinstance(sd, Discrete):
        vals = -np.sin(sarr[:, None] * sd.frequencies) @ sd.weights
        return _shape_like(s, vals)
    sign = np.sign(sarr)

    def f(omega, ss):
        return -sd.density(omega) * np.sin(omega * ss)

    return _shape_like(s, sign * _quad(f, sd, np.abs(sarr), rtol))


def etabar(sd: SpectralDensity, s, rtol: float = DEFAULT_RTOL):
    """Antiderivative ``etabar(s)`` of the dissipation kernel, even in ``s``."""
    sarr = np.abs(np.atleast_1d(np.asarray(s, dtype=float)))
    if isinstance(sd, Discrete):
        vals = np.cos(sarr[:, None] * sd.frequencies) @ (sd.weights / sd.frequencies)
        return _shape_like(s, vals)

    def f(omega, ss):
        return sd.density(omega) / omega * np.cos(omega * ss)

    return _shape_like(s, _quad(f, sd, sarr, rtol))


def etabar0(sd: SpectralDensity, rtol: float = DEFAULT_RTOL) -> float:
    """``etabar(0) = int_0^inf I(w)/w dw``."""
    return float(etabar(sd, 0.0, rtol))


def mass_shift(sd: SpectralDensity, rtol: float = DEFAULT_RTOL) -> float:
    """Shift ``2 etabar(0)`` subtracted from ``mu**2`` in the renormalized potential."""
    return 2.0 * etabar0(sd, rtol)


def ohmic_highT_reference(gamma: float, T: float, lambda_cut: float, s):
    """High-temperature Ohmic limit of the kernels.

    Returns the Gaussian-mollified noise kernel
    ``gamma T Lambda / sqrt(pi) * exp(-Lambda**2 s**2 / 4)`` (which tends to
    ``2 gamma T delta(s)``) together with the weight ``gamma`` of the
    ``delta'(s)`` dissipation kernel.
    """
    if gamma < 0 or not T > 0 or not lambda_cut > 0:
        raise ConfigError("need gamma >= 0, T > 0, lambda_cut > 0")
    s = np.asarray(s, dtype=float)
    nu_ref = gamma * T * lambda_cut / math.sqrt(math.pi) * np.exp(-(lambda_cut * s) ** 2 / 4.0)
    return nu_ref, gamma


def _ohmic_etabar_closed(gamma, lambda_cut):
    c = gamma * lambda_cut / (2.0 * math.sqrt(math.pi))

    def etabar_fn(s):
        s = np.asarray(s, dtype=float)
        return c * np.exp(-(lambda_cut * s) ** 2 / 4.0)

    def eta_fn(s):
        s = np.asarray(s, dtype=float)
        return -c * 0.5 * lambda_cut ** 2 * s * np.exp(-(lambda_cut * s) ** 2 / 4.0)

    return eta_fn, etabar_fn, c


@dataclass(frozen=True, eq=False)
class KernelSet:
    """Noise and dissipation kernels of one bath at one temperature.

    ``nu``, ``eta`` and ``etabar`` are vectorized callables of the time
    separation. :meth:`sample` caches values on uniform grids.
    """

    beta: float
    nu: Callable
    eta: Callable
    etabar: Callable
    etabar0: float
    provenance: str
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def sample(self, dt: float, m: int):
        """Kernel values at ``s = j*dt`` for ``j = 0..m`` as three arrays."""
        key = (float(dt), int(m))
        if key not in self._cache:
            s = dt * np.arange(m + 1)
            self._cache[key] = (np.asarray(self.nu(s), dtype=float),
                                np.asarray(self.eta(s), dtype=float),
                                np.asarray(self.etabar(s), dtype=float))
        return self._cache[key]


def kernel_set(sd: SpectralDensity, beta: float, rtol: float = DEFAULT_RTOL) -> KernelSet:
    """Kernels of ``sd`` at inverse temperature ``beta`` by quadrature/closed sums."""
    e0 = etabar0(sd, rtol)
    if not math.isfinite(e0):
        raise InfraredDivergenceError("etabar(0) is not finite")
    return KernelSet(
        beta=float(beta),
        nu=lambda s: noise_kernel(sd, beta, s, rtol),
        eta=lambda s: dissipation_kernel(sd, s, rtol),
        etabar=lambda s: etabar(sd, s, rtol),
        etabar0=e0,
        provenance=f"{sd!r}, beta={beta}, rtol={rtol}",
    )


def ohmic_highT_kernel_set(gamma: float, T: float, lambda_cut: float) -> KernelSet:
    """Ohmic (k=1) kernels with ``nu`` replaced by its high-temperature form.

    ``eta`` and ``etabar`` are the exact closed forms of the Gaussian-cutoff
    Ohmic bath, ``etabar(s) = gamma Lambda/(2 sqrt(pi)) exp(-Lambda**2 s**2/4)``.
    """
    eta_fn, etabar_fn, e0 = _ohmic_etabar_closed(gamma, lambda_cut)
    return KernelSet(
        beta=1.0 / T,
        nu=lambda s: ohmic_highT_reference(gamma, T, lambda_cut, s)[0],
        eta=eta_fn,
        etabar=etabar_fn,
        etabar0=e0,
        provenance=f"ohmic high-T reference gamma={gamma}, T={T}, lambda_cut={lambda_cut}",
    )


def discretize_continuum(sd: Continuum, d_omega: float,
                         omega_max: float = None) -> Discrete:
    """Comb ``w_n = n*d_omega`` with weights ``m_n w_n**3/2 = I(w_n) d_omega``.

    The ``w = 0`` node is dropped (``I(0) = 0``) and the last node gets the
    trapezoid half weight.
    """
    if omega_max is None:
        omega_max = CUTOFF_FACTOR * sd.lambda_cut
    n = int(round(omega_max / d_omega))
    wn = d_omega * np.arange(1, n + 1)
    weight = sd.density(wn) * d_omega
    weight[-1] *= 0.5
    keep = weight > 0
    masses = 2.0 * weight[keep] / wn[keep] ** 3
    return Discrete(tuple(zip(masses.tolist(), wn[keep].tolist())))

