"""Wigner-function picture: transform, transport equation and initial jolt.

The transform pairs each grid centre ``phi_i`` with the relative coordinate
``phi = 2 k dphi``::

    W(phi_i, Pi) = sum_k 2 dphi exp(+i Pi 2 k dphi) rho(phi_{i+k}, phi_{i-k})

so no interpolation of ``rho`` is needed and ``dPi = pi / (n_pi dphi)``. The
kernel ``exp(+i Pi phi)`` makes ``Pi`` equal to *minus* the kinetic momentum;
the transport equation below is written in that convention::

    dW/dt = Pi dW/dphi - V'(phi) dW/dPi + V'''(phi)/24 d^3W/dPi^3
            + c_gamma [ d(Pi W)/dPi + T d^2W/dPi^2 ]

``c_gamma = 2 gamma`` is what the term-by-term transform of the density-matrix
master equation produces ("transform-consistent"); ``4 gamma`` is offered as
the alternative ("as-printed").
"""
from dataclasses import dataclass, replace
import math
import warnings

import numpy as np
from scipy.integrate import solve_ivp

from . import _backend
from .cl_evolve import DensityMatrixGrid, GridSpec, Potential
from .errors import ConfigError, NumericalError, StabilityError

__all__ = [
    "WignerGrid",
    "TransportTerms",
    "default_n_pi",
    "pi_grid",
    "wigner_transform",
    "inverse_wigner",
    "c_gamma",
    "transport_bounds",
    "transport_step",
    "evolve_wigner",
    "wigner_jolt_constant",
    "apply_wigner_jolt",
    "moment_ode_oracle",
    "moment_ode_fixed_point",
]

CONVENTIONS = {"transform-consistent": 2.0, "as-printed": 4.0}
IMAG_TOL = 1e-10


def default_n_pi(n: int) -> int:
    """Smallest odd Pi-grid size that holds every anti-diagonal of an ``n`` grid."""
    return 2 * ((n - 1) // 2) + 1


def pi_grid(n_pi: int, dphi: float):
    """Centered momentum grid (``Pi = 0`` is node ``(n_pi - 1)//2``) and its step."""
    if n_pi < 3 or n_pi % 2 == 0:
        raise ConfigError(f"n_pi={n_pi} must be odd and >= 3 so that Pi = 0 is a node")
    dpi = math.pi / (n_pi * dphi)
    half = (n_pi - 1) // 2
    return dpi * (np.arange(n_pi) - half), dpi


@dataclass
class WignerGrid:
    """Real phase-space distribution on ``n_phi x n_pi`` nodes at time ``t``.

    ``n_pi_full`` is the size of the Pi grid conjugate to the relative
    coordinate, which fixes ``dPi``. The stored columns may be a centered
    window of that grid (see :meth:`window`); columns outside it are zero.
    """

    phi_min: float
    phi_max: float
    data: np.ndarray
    t: float = 0.0
    n_pi_full: int = None

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        if self.data.ndim != 2:
            raise ConfigError("Wigner data must be two dimensional")
        if self.n_pi_full is None:
            self.n_pi_full = self.n_pi
        pi_grid(self.n_pi, self.dphi)
        pi_grid(self.n_pi_full, self.dphi)
        if self.n_pi_full < self.n_pi:
            raise ConfigError("stored Pi window is larger than the full Pi grid")

    @property
    def n_phi(self):
        return self.data.shape[0]

    @property
    def n_pi(self):
        return self.data.shape[1]

    @property
    def dphi(self):
        return (self.phi_max - self.phi_min) / (self.n_phi - 1)

    @property
    def phi(self):
        return np.linspace(self.phi_min, self.phi_max, self.n_phi)

    @property
    def dpi(self):
        return pi_grid(self.n_pi_full, self.dphi)[1]

    @property
    def pi(self):
        return self.dpi * (np.arange(self.n_pi) - self.j0)

    def window(self, pi_max: float) -> "WignerGrid":
        """Keep only the columns with ``|Pi| <= pi_max``.

        Transport on the window treats the cut as a zero boundary, so it is
        exact up to whatever ``W`` carries beyond ``pi_max``.
        """
        half = min(int(pi_max / self.dpi + 1e-9), self.j0)
        if half < 1:
            raise ConfigError(f"Pi window {pi_max:g} is narrower than one cell")
        cols = slice(self.j0 - half, self.j0 + half + 1)
        return replace(self, data=self.data[:, cols].copy())

    def full(self) -> "WignerGrid":
        """Zero-pad a windowed grid back to ``n_pi_full`` columns."""
        if self.n_pi == self.n_pi_full:
            return self.copy()
        pad = (self.n_pi_full - self.n_pi) // 2
        return replace(self, data=np.pad(self.data, ((0, 0), (pad, pad))))

    @property
    def j0(self):
        """Index of the ``Pi = 0`` column."""
        return (self.n_pi - 1) // 2

    @property
    def grid(self):
        return GridSpec(self.phi_min, self.phi_max, self.n_phi)

    def norm(self):
        return float(self.dphi * self.dpi / (2 * math.pi) * self.data.sum())

    def copy(self):
        return replace(self, data=self.data.copy())


def _antidiagonal_index(n: int, n_pi: int):
    """Index arrays mapping (centre i, column m) to matrix entries.

    Returns ``(i, m, a, b)`` for every pair with ``a = i + k``, ``b = i - k``,
    ``k = m - half`` inside the grid.
    """
    half = (n_pi - 1) // 2
    if half < (n - 1) // 2:
        raise ConfigError(
            f"n_pi={n_pi} is too small for an n={n} grid; need >= {default_n_pi(n)}")
    i = np.arange(n)[:, None]
    k = np.arange(-half, half + 1)[None, :]
    ok = (i + k >= 0) & (i + k < n) & (i - k >= 0) & (i - k < n)
    ii, mm = np.nonzero(np.broadcast_to(ok, (n, n_pi)))
    kk = mm - half
    return ii, mm, ii + kk, ii - kk


def antidiagonals(data, n_pi: int):
    """``A[i, m] = rho[i + k, i - k]`` with ``k = m - (n_pi-1)/2``, zero off-grid."""
    n = data.shape[0]
    ii, mm, a, b = _antidiagonal_index(n, n_pi)
    out = np.zeros((n, n_pi), dtype=complex)
    out[ii, mm] = data[a, b]
    return out


def wigner_transform(rho: DensityMatrixGrid, n_pi: int = None,
                     pi_window: float = None) -> WignerGrid:
    """Discrete Wigner transform of a density matrix (see module docstring).

    ``n_pi`` larger than :func:`default_n_pi` zero-pads the relative
    coordinate, refining ``dPi``. ``pi_window`` returns only ``|Pi| <= pi_window``.
    """
    n = rho.n
    n_pi = default_n_pi(n) if n_pi is None else int(n_pi)
    pi_grid(n_pi, rho.dphi)
    a = antidiagonals(rho.data, n_pi)
    w = 2.0 * rho.dphi * n_pi * np.fft.fftshift(
        np.fft.ifft(np.fft.ifftshift(a, axes=1), axis=1), axes=1)
    scale = max(np.max(np.abs(w.real)), 1e-300)
    resid = np.max(np.abs(w.imag)) / scale
    if resid > IMAG_TOL:
        warnings.warn(f"Wigner transform has relative imaginary residue {resid:.2e}; "
                      "input is not Hermitian", stacklevel=2)
    out = WignerGrid(rho.phi_min, rho.phi_max, w.real.copy(), rho.t)
    return out if pi_window is None else out.window(pi_window)


def inverse_wigner(w: WignerGrid) -> DensityMatrixGrid:
    """Rebuild ``rho`` from ``W``.

    Entries with even index sum are recovered exactly. The transform never
    samples the odd-parity entries (centres between grid nodes); they are
    filled with the mean of their four even-parity neighbours.
    """
    w = w.full()
    n, n_pi = w.n_phi, w.n_pi
    a = np.fft.fftshift(np.fft.fft(np.fft.ifftshift(w.data, axes=1), axis=1), axes=1)
    a /= 2.0 * w.dphi * n_pi
    ii, mm, ra, rb = _antidiagonal_index(n, n_pi)
    rho = np.zeros((n, n), dtype=complex)
    rho[ra, rb] = a[ii, mm]
    even = (np.add.outer(np.arange(n), np.arange(n)) % 2) == 0
    total = np.zeros_like(rho)
    count = np.zeros((n, n))
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        src = np.zeros_like(rho)
        cnt = np.zeros((n, n))
        rs = slice(max(di, 0), n + min(di, 0))
        rd = slice(max(-di, 0), n + min(-di, 0))
        cs = slice(max(dj, 0), n + min(dj, 0))
        cd = slice(max(-dj, 0), n + min(-dj, 0))
        src[rd, cd] = rho[rs, cs]
        cnt[rd, cd] = 1.0
        total += src
        count += cnt
    rho = np.where(even, rho, total / np.maximum(count, 1.0))
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrixGrid(w.phi_min, w.phi_max, rho, w.t)


def c_gamma(gamma: float, convention: str = "transform-consistent") -> float:
    """Dissipative coefficient: ``2 gamma`` or ``4 gamma`` by convention name."""
    try:
        return CONVENTIONS[convention] * gamma
    except KeyError:
        raise ConfigError(f"unknown c_gamma convention {convention!r}; "
                          f"choose one of {sorted(CONVENTIONS)}") from None


@dataclass(frozen=True)
class TransportTerms:
    """Switches for the five terms of the transport equation."""

    liouville: bool = True
    force: bool = True
    quantum: bool = True
    dissipation: bool = True
    diffusion: bool = True


ALL_TERMS = TransportTerms()


def transport_bounds(w: WignerGrid, pot: Potential, c: float, T: float,
                     terms: TransportTerms = ALL_TERMS) -> dict:
    """Per-term explicit step limits; ``dt`` is their minimum."""
    phi, pi = w.phi, w.pi
    dphi, dpi = w.dphi, w.dpi
    pmax = np.max(np.abs(pi))
    b = {}
    if terms.liouville:
        b["liouville"] = 0.5 * dphi / pmax
    fmax = np.max(np.abs(pot.d1(phi)))
    if terms.force and fmax > 0:
        b["force"] = 0.5 * dpi / fmax
    qmax = np.max(np.abs(pot.d3(phi))) / 24.0 * 2.6 / dpi**3
    if terms.quantum and qmax > 0:
        b["quantum"] = 0.5 * 2.8 / qmax
    if terms.dissipation and c > 0:
        b["dissipation"] = 0.5 * dpi / (c * pmax)
    if terms.diffusion and c * T > 0:
        b["diffusion"] = 0.5 * 2.7 * dpi**2 / (4.0 * c * T)
    b["dt"] = min(b.values()) if b else math.inf
    return b


def _rhs_factory(w: WignerGrid, pot: Potential, c: float, T: float, terms):
    phi, pi = w.phi, w.pi
    dv, d3v = pot.d1(phi), pot.d3(phi)
    dphi, dpi = w.dphi, w.dpi

    def f(y):
        return _backend.transport_rhs(y, pi, dphi, dpi, dv, d3v, float(c), float(T),
                                      terms.liouville, terms.force, terms.quantum,
                                      terms.dissipation, terms.diffusion)
    return f


def transport_step(w: WignerGrid, pot: Potential, gamma: float, T: float,
                   c_gamma_convention: str = "transform-consistent", dt: float = None,
                   *, terms: TransportTerms = ALL_TERMS,
                   check_stability: bool = True) -> WignerGrid:
    """One RK4 step of the transport equation."""
    c = c_gamma(gamma, c_gamma_convention)
    bound = transport_bounds(w, pot, c, T, terms)["dt"]
    if dt is None:
        dt = bound
    if check_stability and dt > bound * (1 + 1e-12):
        raise StabilityError(f"dt={dt:g} violates the transport CFL bound {bound:g}",
                             suggested_dt=bound)
    f = _rhs_factory(w, pot, c, T, terms)
    return _rk4(w, f, dt)


def _rk4(w, f, dt):
    y = w.data
    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    new = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(new)):
        raise NumericalError(f"non-finite Wigner function after step at t={w.t:g}")
    return replace(w, data=new, t=w.t + dt)


def evolve_wigner(w: WignerGrid, pot: Potential, gamma: float, T: float, t_final: float,
                  c_gamma_convention: str = "transform-consistent", dt: float = None, *,
                  sample_times=None, jolt: bool = False,
                  terms: TransportTerms = ALL_TERMS):
    """Integrate the transport equation, returning states at ``sample_times``."""
    c = c_gamma(gamma, c_gamma_convention)
    bound = transport_bounds(w, pot, c, T, terms)["dt"]
    if dt is not None and dt > bound * (1 + 1e-12):
        raise StabilityError(f"dt={dt:g} violates the transport CFL bound {bound:g}",
                             suggested_dt=bound)
    dt_max = bound if dt is None else dt
    if sample_times is None:
        sample_times = [w.t, t_final]
    state = w.copy()
    if jolt:
        if state.t != 0.0:
            raise ConfigError("the initial jolt applies at t = 0 only")
        state = apply_wigner_jolt(state, gamma, wigner_jolt_constant(state))
    f = _rhs_factory(state, pot, c, T, terms)
    out = []
    for target in sorted(float(t) for t in sample_times):
        span = target - state.t
        if span < -1e-12:
            raise ConfigError("sample times must not precede the initial time")
        nsteps = max(0, math.ceil(span / dt_max - 1e-9)) if span > 0 else 0
        if nsteps:
            h = span / nsteps
            for _ in range(nsteps):
                state = _rk4(state, f, h)
            state.t = target
        out.append(state.copy())
    return out


def wigner_jolt_constant(w: WignerGrid) -> float:
    """``C = 2 int dphi' phi' W(phi', Pi=0)``; equals the density-matrix
    constant ``int int (x + y) rho(x, y)`` under the transform."""
    return float(2.0 * w.dphi * np.sum(w.phi * w.data[:, w.j0]))


def apply_wigner_jolt(w0: WignerGrid, gamma: float, C: float) -> WignerGrid:
    """``W(0+) = W(0-) - 2 pi gamma C delta'(Pi)`` on every ``phi`` row.

    ``delta'`` is the antisymmetric two-point stencil
    ``(1[j = j0-1] - 1[j = j0+1]) / (2 dPi^2)``.
    """
    if w0.n_pi % 2 == 0:
        raise ConfigError("Pi grid lacks a Pi = 0 node")
    out = w0.copy()
    kick = 2.0 * math.pi * gamma * C / (2.0 * w0.dpi**2)
    out.data[:, w0.j0 - 1] -= kick
    out.data[:, w0.j0 + 1] += kick
    return out


def _moment_matrix(mu2, c):
    # state: <phi>, <Pi>, var_phi, cov, var_pi ; Pi is minus the momentum
    return np.array([
        [0.0, -1.0, 0.0, 0.0, 0.0],
        [-mu2, -c, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, -2.0, 0.0],
        [0.0, 0.0, -mu2, -c, -1.0],
        [0.0, 0.0, 0.0, -2.0 * mu2, -2.0 * c],
    ])


def moment_ode_oracle(pot: Potential, gamma: float, T: float, c_gamma: float,
                      moments0, t):
    """First and second moments for a quadratic potential.

    ``moments0 = (mean_phi, mean_pi, var_phi, cov, var_pi)``. Returns an array
    of shape ``(len(t), 5)`` (or ``(5,)`` for scalar ``t``) integrated with
    an adaptive 8th-order Runge-Kutta method at tight tolerance.
    ``gamma`` is accepted for symmetry with the PDE solvers; the dynamics
    depend only on ``c_gamma``.
    """
    if pot.lambda4 != 0:
        raise ConfigError("moment hierarchy closes only for lambda4 = 0")
    m = _moment_matrix(pot.mu2_eff, c_gamma)
    src = np.array([0.0, 0.0, 0.0, 0.0, 2.0 * c_gamma * T])
    times = np.atleast_1d(np.asarray(t, dtype=float))
    if times.size and times.max() == 0.0:
        res = np.tile(np.asarray(moments0, dtype=float), (times.size, 1))
    else:
        sol = solve_ivp(lambda _t, y: m @ y + src, (0.0, float(times.max())),
                        np.asarray(moments0, dtype=float), method="DOP853",
                        t_eval=times, rtol=1e-12, atol=1e-14)
        if not sol.success:
            raise NumericalError(f"moment ODE integration failed: {sol.message}")
        res = sol.y.T
    return res if np.ndim(t) else res[0]


def moment_ode_fixed_point(pot: Potential, c_gamma: float, T: float):
    """Stationary moments: ``var_pi = T``, ``var_phi = T / omega0^2``, rest zero."""
    if pot.lambda4 != 0 or not pot.mu2_eff < 0:
        raise ConfigError("fixed point requires a harmonic well (lambda4 = 0, mu2 < 0)")
    m = _moment_matrix(pot.mu2_eff, c_gamma)
    src = np.array([0.0, 0.0, 0.0, 0.0, 2.0 * c_gamma * T])
    return np.linalg.solve(m, -src)
