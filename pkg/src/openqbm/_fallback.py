"""Pure numpy implementations of the hot kernels.

Every function here has a twin in ``_core.pyx`` with the same signature and
the same floating-point semantics up to summation order. The package picks
one of the two at import time, see :mod:`openqbm._backend`.
"""
import itertools

import numpy as np


def _shift(a, offset, axis):
    """Return ``a`` shifted so that ``out[i] = a[i + offset]`` with zero fill."""
    out = np.zeros_like(a)
    n = a.shape[axis]
    if abs(offset) >= n:
        return out
    dst = [slice(None)] * a.ndim
    src = [slice(None)] * a.ndim
    if offset >= 0:
        dst[axis] = slice(0, n - offset)
        src[axis] = slice(offset, n)
    else:
        dst[axis] = slice(-offset, n)
        src[axis] = slice(0, n + offset)
    out[tuple(dst)] = a[tuple(src)]
    return out


def cl_rhs(rho, v, phi, dphi, gamma, temperature,
           kinetic=True, potential=True, decoherence=True, dissipation=True):
    """Right-hand side of the Ohmic high-temperature master equation.

    Dirichlet boundaries: ``rho`` is taken to vanish outside the grid.
    """
    out = np.zeros_like(rho)
    if kinetic:
        up0, dn0 = _shift(rho, 1, 0), _shift(rho, -1, 0)
        up1, dn1 = _shift(rho, 1, 1), _shift(rho, -1, 1)
        lap0 = up0 + dn0 - 2.0 * rho
        lap1 = up1 + dn1 - 2.0 * rho
        out += (0.5j / dphi**2) * (lap0 - lap1)
    sep = phi[:, None] - phi[None, :]
    if potential:
        out += -1j * (v[:, None] - v[None, :]) * rho
    if decoherence and gamma != 0.0:
        out += -2.0 * gamma * temperature * sep**2 * rho
    if dissipation and gamma != 0.0:
        if not kinetic:
            up0, dn0 = _shift(rho, 1, 0), _shift(rho, -1, 0)
            up1, dn1 = _shift(rho, 1, 1), _shift(rho, -1, 1)
        grad = ((up0 - dn0) - (up1 - dn1)) / (2.0 * dphi)
        out += -gamma * sep * grad
    return out


def transport_rhs(w, pi, dphi, dpi, dv, d3v, c_gamma, temperature,
                  liouville=True, force=True, quantum=True,
                  dissipation=True, diffusion=True):
    """Right-hand side of the phase-space transport equation.

    Sign convention follows the Wigner transform with kernel ``exp(+i Pi phi)``,
    under which ``Pi`` is minus the kinetic momentum.
    """
    out = np.zeros_like(w)
    if liouville:
        out += pi[None, :] * (_shift(w, 1, 0) - _shift(w, -1, 0)) / (2.0 * dphi)
    if force or quantum or dissipation or diffusion:
        p1, m1 = _shift(w, 1, 1), _shift(w, -1, 1)
    if force:
        out += -dv[:, None] * (p1 - m1) / (2.0 * dpi)
    if quantum:
        p2, m2 = _shift(w, 2, 1), _shift(w, -2, 1)
        d3 = (p2 - 2.0 * p1 + 2.0 * m1 - m2) / (2.0 * dpi**3)
        out += (d3v[:, None] / 24.0) * d3
    if dissipation and c_gamma != 0.0:
        flux = pi[None, :] * w
        out += c_gamma * (_shift(flux, 1, 1) - _shift(flux, -1, 1)) / (2.0 * dpi)
    if diffusion and c_gamma != 0.0:
        out += c_gamma * temperature * (p1 - 2.0 * w + m1) / dpi**2
    return out


def oracle_sum(seg, rho0, grid, fmat_nu, fmat_eta, fmat_renorm, slices):
    """Brute-force double path sum on the grid.

    ``seg[a, b]`` is the one-slice amplitude from node ``b`` to node ``a``
    (kinetic factor times the midpoint potential phase). The influence phase
    is the quadratic form ``xi.A.xi + i xi.B.y + i (q.R.q - q'.R.q')`` over the
    ``slices + 1`` path nodes, with ``xi = q - q'`` and ``y = q + q'``.
    Returns the un-normalized propagated matrix.
    """
    n = grid.shape[0]
    m = slices
    out = np.zeros((n, n), dtype=complex)
    # axes: q_0..q_{m-1}, q'_0..q'_{m-1}
    nfree = 2 * m
    shape1 = [1] * nfree

    def node(values, axis):
        s = list(shape1)
        s[axis] = n
        return values.reshape(s)

    for e, ep in itertools.product(range(n), range(n)):
        q = [node(grid, a) for a in range(m)] + [np.full(shape1, grid[e])]
        qp = [node(grid, m + a) for a in range(m)] + [np.full(shape1, grid[ep])]
        amp = rho0.reshape([n] + [1] * (m - 1) + [n] + [1] * (m - 1))
        amp = amp.astype(complex)
        idx = [np.arange(n).reshape([n if k == a else 1 for k in range(nfree)])
               for a in range(nfree)]
        for a in range(m):
            lo = idx[a]
            lop = idx[m + a]
            hi = idx[a + 1] if a + 1 < m else e
            hip = idx[m + a + 1] if a + 1 < m else ep
            amp = amp * seg[hi, lo] * np.conj(seg[hip, lop])
        xi = [q[a] - qp[a] for a in range(m + 1)]
        y = [q[a] + qp[a] for a in range(m + 1)]
        phase = np.zeros_like(amp)
        for a in range(m + 1):
            for b in range(m + 1):
                phase = phase + fmat_nu[a, b] * xi[a] * xi[b]
                phase = phase + 1j * fmat_eta[a, b] * xi[a] * y[b]
                if fmat_renorm[a, b] != 0.0:
                    phase = phase + 1j * fmat_renorm[a, b] * (
                        q[a] * q[b] - qp[a] * qp[b])
        out[e, ep] = np.sum(amp * np.exp(-phase))
    return out
