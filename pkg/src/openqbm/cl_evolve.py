"""Density-matrix evolution under the Ohmic high-temperature master equation.

In the units hbar = k_B = 1 and unit field mass, the evolution law is::

    d rho/dt = (i/2)(d_x^2 - d_y^2) rho - i [V(x) - V(y)] rho
               - 2 gamma T (x - y)^2 rho - gamma (x - y)(d_x - d_y) rho

for ``rho = rho(x, y, t)``, plus an optional singular kick at ``t = 0``
(:func:`initial_jolt`). Derivatives are centered finite differences with
Dirichlet boundaries; time stepping is classical RK4 followed by trace
renormalization and Hermitian symmetrization.
"""
from dataclasses import dataclass, replace
import math
import warnings

import numpy as np

from . import _backend
from .errors import ConfigError, NumericalError, StabilityError

__all__ = [
    "GridSpec",
    "Potential",
    "DensityMatrixGrid",
    "MasterTerms",
    "liouvillian_apply",
    "stability_bounds",
    "step",
    "evolve",
    "jolt_constant",
    "initial_jolt",
    "make_gaussian",
    "make_cat",
    "energy",
]

#: Outer cells on each side that count as the boundary ring.
BOUNDARY_RING = 2
LEAKAGE_WARN = 1e-6


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid ``phi_min, ..., phi_max`` with ``n`` points."""

    phi_min: float
    phi_max: float
    n: int

    def __post_init__(self):
        if self.n < 3:
            raise ConfigError(f"grid needs at least 3 points, got n={self.n}")
        if not self.phi_max > self.phi_min:
            raise ConfigError("grid extent must satisfy phi_max > phi_min")

    @property
    def dphi(self):
        return (self.phi_max - self.phi_min) / (self.n - 1)

    @property
    def phi(self):
        return np.linspace(self.phi_min, self.phi_max, self.n)


@dataclass(frozen=True)
class Potential:
    """Quartic self-interaction ``V = -mu2/2 phi^2 + lambda4/4 phi^4``.

    With ``renormalized`` set, ``mu2`` is replaced by ``mu2 - mass_shift``
    where ``mass_shift = 2 etabar(0)`` comes from the bath.
    ``mu2 < 0`` gives a harmonic well of frequency ``sqrt(-mu2)``.
    """

    mu2: float = 0.0
    lambda4: float = 0.0
    mass_shift: float = 0.0
    renormalized: bool = False

    def __post_init__(self):
        if self.lambda4 < 0:
            raise ConfigError("quartic coupling lambda4 must be >= 0")
        if self.mass_shift < 0:
            raise ConfigError("mass_shift must be >= 0")
        if self.lambda4 == 0 and self.mu2_eff > 0:
            warnings.warn("lambda4 = 0 with mu2 > 0 is an inverted oscillator; "
                          "evolution is unbounded on large grids", stacklevel=3)

    @classmethod
    def harmonic(cls, omega0):
        return cls(mu2=-float(omega0) ** 2)

    @property
    def mu2_eff(self):
        return self.mu2 - self.mass_shift if self.renormalized else self.mu2

    def __call__(self, phi):
        phi = np.asarray(phi, dtype=float)
        return -0.5 * self.mu2_eff * phi**2 + 0.25 * self.lambda4 * phi**4

    def d1(self, phi):
        phi = np.asarray(phi, dtype=float)
        return -self.mu2_eff * phi + self.lambda4 * phi**3

    def d3(self, phi):
        return 6.0 * self.lambda4 * np.asarray(phi, dtype=float)


@dataclass
class DensityMatrixGrid:
    """Complex matrix ``rho(phi_i, phi_j)`` on a uniform grid at time ``t``."""

    phi_min: float
    phi_max: float
    data: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=complex)
        if self.data.ndim != 2 or self.data.shape[0] != self.data.shape[1]:
            raise ConfigError("density matrix must be square")

    @property
    def n(self):
        return self.data.shape[0]

    @property
    def grid(self):
        return GridSpec(self.phi_min, self.phi_max, self.n)

    @property
    def dphi(self):
        return (self.phi_max - self.phi_min) / (self.n - 1)

    @property
    def phi(self):
        return np.linspace(self.phi_min, self.phi_max, self.n)

    def trace(self):
        return float(self.dphi * np.real(np.trace(self.data)))

    def hermiticity_error(self):
        return float(np.max(np.abs(self.data - self.data.conj().T)))

    def copy(self):
        return replace(self, data=self.data.copy())


@dataclass(frozen=True)
class MasterTerms:
    """Switches for the four terms of the master equation."""

    kinetic: bool = True
    potential: bool = True
    decoherence: bool = True
    dissipation: bool = True


ALL_TERMS = MasterTerms()


def liouvillian_apply(rho: DensityMatrixGrid, pot: Potential, gamma: float,
                      T: float, terms: MasterTerms = ALL_TERMS) -> np.ndarray:
    """Time derivative of ``rho`` (an ``n x n`` complex array)."""
    if gamma < 0:
        raise ConfigError("gamma must be >= 0")
    if gamma > 0 and not T > 0:
        raise ConfigError("temperature must be > 0 when gamma > 0")
    phi = rho.phi
    return _backend.cl_rhs(rho.data, pot(phi), phi, rho.dphi, float(gamma), float(T),
                           terms.kinetic, terms.potential, terms.decoherence,
                           terms.dissipation)


def stability_bounds(grid: GridSpec, gamma: float, T: float, c_stab: float = 0.2,
                     terms: MasterTerms = ALL_TERMS) -> dict:
    """Explicit RK4 step limits: kinetic ``c_stab dphi^2`` and decoherence
    ``0.1 / (2 gamma T d_max^2)``. The key ``dt`` holds the minimum."""
    bounds = {}
    if terms.kinetic:
        bounds["kinetic"] = c_stab * grid.dphi**2
    if terms.decoherence and gamma * T > 0:
        d_max = grid.phi_max - grid.phi_min
        bounds["decoherence"] = 0.1 / (2.0 * gamma * T * d_max**2)
    bounds["dt"] = min(bounds.values()) if bounds else math.inf
    return bounds


def _hermitize(a):
    return 0.5 * (a + a.conj().T)


def step(rho: DensityMatrixGrid, pot: Potential, gamma: float, T: float, dt: float,
         scheme: str = "rk4", *, terms: MasterTerms = ALL_TERMS, c_stab: float = 0.2,
         normalize: bool = True, check_stability: bool = True) -> DensityMatrixGrid:
    """Advance ``rho`` by one RK4 step of length ``dt``."""
    if scheme != "rk4":
        raise ConfigError(f"unknown time integrator {scheme!r}")
    if check_stability:
        bound = stability_bounds(rho.grid, gamma, T, c_stab, terms)["dt"]
        if dt > bound * (1 + 1e-12):
            raise StabilityError(f"dt={dt:g} exceeds stability bound {bound:g}",
                                 suggested_dt=bound)
    phi, h = rho.phi, rho.dphi
    v = pot(phi)

    def f(y):
        return _backend.cl_rhs(y, v, phi, h, float(gamma), float(T), terms.kinetic,
                               terms.potential, terms.decoherence, terms.dissipation)

    y = rho.data
    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    new = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(new)):
        raise NumericalError(
            f"non-finite density matrix after step at t={rho.t:g}; "
            "reduce dt or enlarge the grid")
    new = _hermitize(new)
    if normalize:
        tr = h * np.real(np.trace(new))
        if not tr > 0:
            raise NumericalError(f"trace collapsed to {tr:g} at t={rho.t:g}")
        new = new / tr
    return DensityMatrixGrid(rho.phi_min, rho.phi_max, new, rho.t + dt)


def boundary_leakage(rho: DensityMatrixGrid, ring: int = BOUNDARY_RING) -> float:
    """Probability on the outer ``ring`` cells at either end of the grid.

    Positivity bounds every coherence in the ring by the diagonal there.
    """
    d = np.real(np.diag(rho.data))
    return float(rho.dphi * (np.abs(d[:ring]).sum() + np.abs(d[-ring:]).sum()))


def evolve(rho: DensityMatrixGrid, pot: Potential, gamma: float, T: float,
           t_final: float, dt: float = None, *, sample_times=None, jolt: bool = False,
           terms: MasterTerms = ALL_TERMS, c_stab: float = 0.2):
    """Integrate to ``t_final`` and return the states at ``sample_times``.

    ``sample_times`` defaults to ``[rho.t, t_final]``. The step is the largest
    value not above ``dt`` (or the stability bound) that lands exactly on
    every sample time.
    """
    bound = stability_bounds(rho.grid, gamma, T, c_stab, terms)["dt"]
    if dt is not None and dt > bound * (1 + 1e-12):
        raise StabilityError(f"dt={dt:g} exceeds stability bound {bound:g}",
                             suggested_dt=bound)
    dt_max = bound if dt is None else dt
    if sample_times is None:
        sample_times = [rho.t, t_final]
    times = sorted(float(t) for t in sample_times)
    state = rho.copy()
    if jolt:
        if state.t != 0.0:
            raise ConfigError("the initial jolt applies at t = 0 only")
        state = initial_jolt(state, gamma)
    out = []
    for target in times:
        span = target - state.t
        if span < -1e-12:
            raise ConfigError("sample times must not precede the initial time")
        nsteps = max(0, math.ceil(span / dt_max - 1e-9)) if span > 0 else 0
        if nsteps:
            h = span / nsteps
            for _ in range(nsteps):
                state = step(state, pot, gamma, T, h, terms=terms, c_stab=c_stab,
                             check_stability=False)
            state.t = target
        out.append(state.copy())
    leak = boundary_leakage(state)
    if leak > LEAKAGE_WARN:
        warnings.warn(f"boundary leakage {leak:.2e} exceeds {LEAKAGE_WARN:g}; "
                      "enlarge the grid", stacklevel=2)
    return out


def jolt_constant(rho: DensityMatrixGrid) -> float:
    """``C = dphi^2 sum_ij (phi_i + phi_j) rho_ij`` (real for Hermitian rho)."""
    phi = rho.phi
    c = rho.dphi**2 * np.sum((phi[:, None] + phi[None, :]) * rho.data)
    return float(np.real(c))


def initial_jolt(rho0: DensityMatrixGrid, gamma: float) -> DensityMatrixGrid:
    """Apply the singular ``t = 0`` kick ``-i gamma (phi_i - phi_j) C`` with full
    delta weight."""
    phi = rho0.phi
    c = jolt_constant(rho0)
    delta = -1j * gamma * (phi[:, None] - phi[None, :]) * c
    out = rho0.copy()
    out.data = out.data + delta
    err = out.hermiticity_error()
    if err > 1e-10 * max(1.0, np.max(np.abs(out.data))):
        raise NumericalError(f"jolt broke hermiticity ({err:.2e})")
    return out


def _pure_state(psi, grid: GridSpec):
    norm = grid.dphi * np.sum(np.abs(psi) ** 2)
    psi = psi / math.sqrt(norm)
    return DensityMatrixGrid(grid.phi_min, grid.phi_max, np.outer(psi, psi.conj()))


def _check_support(lo, hi, grid: GridSpec):
    if lo < grid.phi_min or hi > grid.phi_max:
        raise ConfigError(
            f"state support [{lo:g}, {hi:g}] (6 sigma) exceeds grid "
            f"[{grid.phi_min:g}, {grid.phi_max:g}]")


def make_gaussian(center: float, momentum: float, width: float,
                  grid: GridSpec) -> DensityMatrixGrid:
    """Pure Gaussian ``psi ~ exp(-(x-c)^2/(4 width^2) + i p x)``.

    ``width`` is the position standard deviation of ``|psi|^2``. The state is
    normalized on the grid so that its trace is exactly one.
    """
    if not width > 0:
        raise ConfigError("width must be > 0")
    _check_support(center - 6 * width, center + 6 * width, grid)
    x = grid.phi
    psi = np.exp(-((x - center) ** 2) / (4.0 * width**2) + 1j * momentum * x)
    return _pure_state(psi, grid)


def make_cat(separation: float, width: float, grid: GridSpec,
             center: float = 0.0) -> DensityMatrixGrid:
    """Symmetric superposition of two Gaussians at ``center +- separation/2``."""
    if not width > 0:
        raise ConfigError("width must be > 0")
    half = 0.5 * separation
    _check_support(center - half - 6 * width, center + half + 6 * width, grid)
    x = grid.phi
    psi = (np.exp(-((x - center - half) ** 2) / (4.0 * width**2))
           + np.exp(-((x - center + half) ** 2) / (4.0 * width**2)))
    return _pure_state(psi.astype(complex), grid)


def energy(rho: DensityMatrixGrid, pot: Potential) -> float:
    """``Tr(H rho)`` with the same second difference as the solver."""
    a = rho.data
    lap = np.zeros_like(a)
    lap[1:] += a[:-1]
    lap[:-1] += a[1:]
    lap -= 2.0 * a
    kin = -0.5 * np.real(np.trace(lap)) / rho.dphi
    pot_e = rho.dphi * np.real(np.sum(pot(rho.phi) * np.diag(a)))
    return float(kin + pot_e)
