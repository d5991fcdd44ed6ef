"""Influence functional on discretized paths and a brute-force path-sum oracle.

For a path pair ``q, q'`` on ``[0, t]`` the influence phase is::

    F = int_0^t ds int_0^s du xi(s) [nu(s-u) xi(u) + i eta(s-u) y(u)]
        (+ i etabar(0) int_0^t ds [q(s)^2 - q'(s)^2]   if include_renorm)

with ``xi = q - q'`` and ``y = q + q'``. The double integral is a nested
trapezoid rule on the path nodes: outer weights ``dt [1/2, 1, ..., 1, 1/2]``
and, for each outer node, the same rule on ``[0, s]`` so the diagonal cell
carries half weight.

Because paths are piecewise linear, ``F`` is a quadratic form in the node
values. :func:`influence_matrices` assembles that form on a refined time grid,
which is how the oracle resolves kernels narrower than a time slice.
"""
from dataclasses import dataclass
import math

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import _backend
from .cl_evolve import DensityMatrixGrid, Potential
from .errors import BudgetExceededError, ConfigError, NumericalError
from .kernels import KernelSet

__all__ = [
    "DiscretePath",
    "influence_functional",
    "influence_matrices",
    "projected_free_kernel",
    "straight_line_kernel",
    "oracle_cost",
    "sliced_propagator_oracle",
]

DEFAULT_BUDGET = 2e8
MAX_GRID = 32
MAX_SLICES = 3


@dataclass(frozen=True)
class DiscretePath:
    """Node values of a piecewise-linear path on a uniform time grid."""

    t_grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t_grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape or t.size < 2:
            raise ConfigError("path needs matching 1-d time and value arrays (>= 2 nodes)")
        d = np.diff(t)
        if not np.all(d > 0) or not np.allclose(d, d[0], rtol=1e-9, atol=0):
            raise ConfigError("path time grid must be uniform and strictly increasing")
        if not np.all(np.isfinite(v)):
            raise ConfigError("path values must be finite")
        object.__setattr__(self, "t_grid", t)
        object.__setattr__(self, "values", v)

    @classmethod
    def uniform(cls, t, values):
        values = np.asarray(values, dtype=float)
        return cls(np.linspace(0.0, t, values.size), values)

    @property
    def dt(self):
        return self.t_grid[1] - self.t_grid[0]

    def __call__(self, s):
        return np.interp(s, self.t_grid, self.values)

    def refined(self, factor: int) -> "DiscretePath":
        """Same straight-line path sampled ``factor`` times more finely."""
        m = (self.t_grid.size - 1) * factor
        t = np.linspace(self.t_grid[0], self.t_grid[-1], m + 1)
        return DiscretePath(t, self(t))


def _nested_trapezoid(m: int, dt: float):
    """Outer weights ``w[a]`` and triangle weights ``W[a, b]`` (``b <= a``)."""
    w = np.full(m + 1, dt)
    w[0] = w[-1] = 0.5 * dt
    tri = np.zeros((m + 1, m + 1))
    for a in range(1, m + 1):
        inner = np.full(a + 1, dt)
        inner[0] = inner[-1] = 0.5 * dt
        tri[a, :a + 1] = w[a] * inner
    return w, tri


def _toeplitz_lower(samples, m):
    idx = np.subtract.outer(np.arange(m + 1), np.arange(m + 1))
    return np.where(idx >= 0, samples[np.clip(idx, 0, m)], 0.0)


def influence_functional(q: DiscretePath, q_prime: DiscretePath, kernels: KernelSet,
                         include_renorm: bool = False, refine: int = 1) -> complex:
    """Influence phase ``F[q, q']`` (complex; ``Re F >= 0``)."""
    if q.t_grid.shape != q_prime.t_grid.shape or not np.allclose(q.t_grid, q_prime.t_grid):
        raise ConfigError("paths must share the same time grid")
    if refine > 1:
        q, q_prime = q.refined(refine), q_prime.refined(refine)
    m = q.t_grid.size - 1
    dt = q.dt
    nu, eta, _ = kernels.sample(dt, m)
    w, tri = _nested_trapezoid(m, dt)
    xi = q.values - q_prime.values
    y = q.values + q_prime.values
    f = xi @ (tri * _toeplitz_lower(nu, m)) @ xi \
        + 1j * (xi @ (tri * _toeplitz_lower(eta, m)) @ y)
    if include_renorm:
        f += 1j * kernels.etabar0 * np.sum(w * (q.values**2 - q_prime.values**2))
    return complex(f)


def influence_matrices(kernels: KernelSet, t: float, slices: int, refine: int = 1):
    """Quadratic-form matrices ``(A, B, R)`` of ``F`` over ``slices + 1`` nodes.

    ``F = xi.A.xi + i xi.B.y + i (q.R.q - q'.R.q')`` for straight-line paths
    through the nodes, with the kernels evaluated on a grid ``refine`` times
    finer than the slices. ``R`` is the renormalization term (times
    ``etabar(0)``).
    """
    mf = slices * refine
    dt = t / mf
    nu, eta, _ = kernels.sample(dt, mf)
    w, tri = _nested_trapezoid(mf, dt)
    # hat-function interpolation from coarse to fine nodes
    tc = np.arange(slices + 1) * refine
    p = np.zeros((mf + 1, slices + 1))
    for c in range(slices + 1):
        e = np.zeros(slices + 1)
        e[c] = 1.0
        p[:, c] = np.interp(np.arange(mf + 1), tc, e)
    a = p.T @ (tri * _toeplitz_lower(nu, mf)) @ p
    b = p.T @ (tri * _toeplitz_lower(eta, mf)) @ p
    r = kernels.etabar0 * (p.T @ (w[:, None] * p))
    return a, b, r


def projected_free_kernel(x, dt: float, nodes: int = None):
    """Free propagator ``<x_i| exp(-i p^2 dt/2) |x_j>`` restricted to the grid band.

    ``K_ij = h int_{-pi/h}^{pi/h} dk/(2 pi) exp(i k (x_i - x_j) - i k^2 dt/2)``,
    i.e. the straight-line kernel ``exp(i (x_i-x_j)^2/(2 dt)) / sqrt(2 pi i dt)``
    projected onto functions band-limited to the grid's Nyquist wavenumber.
    Reduces to the identity at ``dt = 0``.
    """
    x = np.asarray(x, dtype=float)
    h = x[1] - x[0]
    kmax = math.pi / h
    span = x[-1] - x[0]
    if nodes is None:
        phase = kmax * span + 0.5 * kmax**2 * dt
        nodes = int(64 + 4 * phase)
    k, wk = leggauss(nodes)
    k = kmax * k
    wk = kmax * wk
    d = np.subtract.outer(x, x)
    ker = np.exp(1j * d[..., None] * k - 0.5j * dt * k**2) @ wk
    return h * ker / (2 * math.pi)


def straight_line_kernel(x, dt: float):
    """Raw short-time kernel ``h exp(i (x_i-x_j)^2/(2 dt)) / sqrt(2 pi i dt)``.

    Only meaningful when ``dt`` is large enough for the grid to resolve the
    chirp, roughly ``dt > h (x_max - x_min) / pi``.
    """
    x = np.asarray(x, dtype=float)
    h = x[1] - x[0]
    d = np.subtract.outer(x, x)
    return h * np.exp(0.5j * d**2 / dt) / np.sqrt(2j * math.pi * dt)


def oracle_cost(n: int, slices: int) -> int:
    """Path-pair count: ``n^2`` endpoints times ``n^(2 slices)`` free nodes."""
    return n ** (2 * slices + 2)


def sliced_propagator_oracle(rho0: DensityMatrixGrid, pot: Potential, kernels: KernelSet,
                             slices: int, t: float, *, kinetic: str = "projected",
                             refine: int = 1, include_renorm: bool = False,
                             budget: float = DEFAULT_BUDGET,
                             max_grid: int = MAX_GRID) -> DensityMatrixGrid:
    """Propagate ``rho0`` by brute-force summation of the double path integral.

    Each of the ``slices`` segments contributes a free-particle factor and the
    midpoint potential phase ``exp(-i dt V((q_a + q_{a+1})/2))``; the pair is
    weighted by ``exp(-F)`` from :func:`influence_matrices`. The result is
    trace-normalized at the end.
    """
    n = rho0.n
    if not 1 <= slices <= MAX_SLICES:
        raise ConfigError(f"slices must be in 1..{MAX_SLICES}, got {slices}")
    if n > max_grid:
        raise ConfigError(f"oracle grid limited to {max_grid} points, got {n}")
    if not t > 0:
        raise ConfigError("oracle duration must be > 0")
    cost = oracle_cost(n, slices)
    if cost > budget:
        raise BudgetExceededError(
            f"path sum needs {cost:.3g} terms (n={n}, slices={slices}), "
            f"budget is {budget:.3g}", cost=cost, budget=budget)
    dt = t / slices
    x = rho0.phi
    if kinetic == "projected":
        kin = projected_free_kernel(x, dt)
    elif kinetic == "straight-line":
        kin = straight_line_kernel(x, dt)
    else:
        raise ConfigError(f"unknown kinetic factor {kinetic!r}")
    mid = 0.5 * np.add.outer(x, x)
    seg = kin * np.exp(-1j * dt * pot(mid))
    a, b, r = influence_matrices(kernels, t, slices, refine)
    if not include_renorm:
        r = np.zeros_like(r)
    raw = _backend.oracle_sum(seg, rho0.data, x, a, b, r, slices)
    tr = rho0.dphi * np.real(np.trace(raw))
    if not (np.isfinite(tr) and tr > 0):
        raise NumericalError(f"path sum produced an unusable trace {tr!r}")
    return DensityMatrixGrid(rho0.phi_min, rho0.phi_max, raw / tr, rho0.t + t)
