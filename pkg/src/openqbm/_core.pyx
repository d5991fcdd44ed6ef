# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Signatures mirror ``openqbm._fallback``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, cos, sin

cnp.import_array()


def cl_rhs(rho, v, phi, double dphi, double gamma, double temperature,
           bint kinetic=True, bint potential=True, bint decoherence=True,
           bint dissipation=True):
    r_arr = np.ascontiguousarray(rho, dtype=np.complex128)
    cdef Py_ssize_t n0 = r_arr.shape[0], n1 = r_arr.shape[1]
    # complex entries as interleaved (re, im) doubles
    cdef double[:, ::1] r = r_arr.view(np.float64)
    cdef double[::1] vv = np.ascontiguousarray(v, dtype=np.float64)
    cdef double[::1] x = np.ascontiguousarray(phi, dtype=np.float64)
    out_arr = np.empty((n0, n1), dtype=np.complex128)
    cdef double[:, ::1] out = out_arr.view(np.float64)
    cdef Py_ssize_t i, j, jr
    cdef double cr, ci, ar, ai, sep, s, dv, k
    cdef double u0r, u0i, d0r, d0i, u1r, u1i, d1r, d1i
    cdef double kin = 0.5 / (dphi * dphi)
    cdef double inv2h = 1.0 / (2.0 * dphi)
    cdef double dec = 2.0 * gamma * temperature
    cdef bint do_dec = decoherence and gamma != 0.0
    cdef bint do_dis = dissipation and gamma != 0.0
    cdef bint stencil = kinetic or do_dis
    with nogil:
        for i in range(n0):
            for j in range(n1):
                jr = 2 * j
                cr = r[i, jr]
                ci = r[i, jr + 1]
                ar = 0.0
                ai = 0.0
                sep = x[i] - x[j]
                if stencil:
                    u0r = u0i = d0r = d0i = u1r = u1i = d1r = d1i = 0.0
                    if i + 1 < n0:
                        u0r = r[i + 1, jr]
                        u0i = r[i + 1, jr + 1]
                    if i >= 1:
                        d0r = r[i - 1, jr]
                        d0i = r[i - 1, jr + 1]
                    if j + 1 < n1:
                        u1r = r[i, jr + 2]
                        u1i = r[i, jr + 3]
                    if j >= 1:
                        d1r = r[i, jr - 2]
                        d1i = r[i, jr - 1]
                    if kinetic:
                        # i kin [(up0 + dn0) - (up1 + dn1)]
                        ar = ar - kin * ((u0i + d0i) - (u1i + d1i))
                        ai = ai + kin * ((u0r + d0r) - (u1r + d1r))
                    if do_dis:
                        s = -gamma * sep * inv2h
                        ar = ar + s * ((u0r - d0r) - (u1r - d1r))
                        ai = ai + s * ((u0i - d0i) - (u1i - d1i))
                if potential:
                    dv = vv[i] - vv[j]
                    ar = ar + dv * ci
                    ai = ai - dv * cr
                if do_dec:
                    k = dec * sep * sep
                    ar = ar - k * cr
                    ai = ai - k * ci
                out[i, jr] = ar
                out[i, jr + 1] = ai
    return out_arr


def transport_rhs(w, pi, double dphi, double dpi, dv, d3v, double c_gamma,
                  double temperature, bint liouville=True, bint force=True,
                  bint quantum=True, bint dissipation=True, bint diffusion=True):
    cdef double[:, ::1] ww = np.ascontiguousarray(w, dtype=np.float64)
    cdef double[::1] p = np.ascontiguousarray(pi, dtype=np.float64)
    cdef double[::1] f1 = np.ascontiguousarray(dv, dtype=np.float64)
    cdef double[::1] f3 = np.ascontiguousarray(d3v, dtype=np.float64)
    cdef Py_ssize_t n0 = ww.shape[0], n1 = ww.shape[1]
    out_arr = np.empty((n0, n1), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double acc, c, p1, m1, p2, m2, pp, pm, up, dn
    cdef double inv2x = 1.0 / (2.0 * dphi)
    cdef double inv2p = 1.0 / (2.0 * dpi)
    cdef double inv2p3 = 1.0 / (2.0 * dpi * dpi * dpi)
    cdef double invp2 = 1.0 / (dpi * dpi)
    cdef double diff = c_gamma * temperature * invp2
    cdef bint do_dis = dissipation and c_gamma != 0.0
    cdef bint do_dif = diffusion and c_gamma != 0.0
    with nogil:
        for i in range(n0):
            for j in range(n1):
                c = ww[i, j]
                acc = 0.0
                p1 = ww[i, j + 1] if j + 1 < n1 else 0.0
                m1 = ww[i, j - 1] if j >= 1 else 0.0
                if liouville:
                    up = ww[i + 1, j] if i + 1 < n0 else 0.0
                    dn = ww[i - 1, j] if i >= 1 else 0.0
                    acc = acc + p[j] * (up - dn) * inv2x
                if force:
                    acc = acc - f1[i] * (p1 - m1) * inv2p
                if quantum:
                    p2 = ww[i, j + 2] if j + 2 < n1 else 0.0
                    m2 = ww[i, j - 2] if j >= 2 else 0.0
                    acc = acc + (f3[i] / 24.0) * (p2 - 2.0 * p1 + 2.0 * m1 - m2) * inv2p3
                if do_dis:
                    pp = p[j + 1] * p1 if j + 1 < n1 else 0.0
                    pm = p[j - 1] * m1 if j >= 1 else 0.0
                    acc = acc + c_gamma * (pp - pm) * inv2p
                if do_dif:
                    acc = acc + diff * (p1 - 2.0 * c + m1)
                out[i, j] = acc
    return out_arr


cdef inline double complex _cexp(double complex z) nogil:
    cdef double m = exp(z.real)
    return m * cos(z.imag) + 1j * m * sin(z.imag)


def oracle_sum(seg, rho0, grid, fmat_nu, fmat_eta, fmat_renorm, int slices):
    cdef double complex[:, ::1] g = np.ascontiguousarray(seg, dtype=np.complex128)
    cdef double complex[:, ::1] r0 = np.ascontiguousarray(rho0, dtype=np.complex128)
    cdef double[::1] x = np.ascontiguousarray(grid, dtype=np.float64)
    cdef double[:, ::1] A = np.ascontiguousarray(fmat_nu, dtype=np.float64)
    cdef double[:, ::1] B = np.ascontiguousarray(fmat_eta, dtype=np.float64)
    cdef double[:, ::1] R = np.ascontiguousarray(fmat_renorm, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0]
    cdef int m = slices
    cdef int nfree = 2 * m
    out_arr = np.zeros((n, n), dtype=np.complex128)
    cdef double complex[:, ::1] out = out_arr
    cdef Py_ssize_t[8] idx
    cdef double[4] q
    cdef double[4] qp
    cdef Py_ssize_t e, ep, total, flat, rem
    cdef int a, b, k
    cdef double re, im, xa
    cdef double complex amp, acc
    if m < 1 or m > 4:
        raise ValueError("slices must be between 1 and 4")
    total = 1
    for k in range(nfree):
        total *= n
    with nogil:
        for e in range(n):
            for ep in range(n):
                acc = 0.0
                q[m] = x[e]
                qp[m] = x[ep]
                for flat in range(total):
                    rem = flat
                    for k in range(nfree):
                        idx[k] = rem % n
                        rem = rem // n
                    for a in range(m):
                        q[a] = x[idx[a]]
                        qp[a] = x[idx[m + a]]
                    amp = r0[idx[0], idx[m]]
                    for a in range(m):
                        if a + 1 < m:
                            amp = amp * g[idx[a + 1], idx[a]] * g[idx[m + a + 1], idx[m + a]].conjugate()
                        else:
                            amp = amp * g[e, idx[a]] * g[ep, idx[m + a]].conjugate()
                    re = 0.0
                    im = 0.0
                    for a in range(m + 1):
                        xa = q[a] - qp[a]
                        for b in range(m + 1):
                            re = re + A[a, b] * xa * (q[b] - qp[b])
                            im = im + B[a, b] * xa * (q[b] + qp[b])
                            im = im + R[a, b] * (q[a] * q[b] - qp[a] * qp[b])
                    acc = acc + amp * _cexp(-re - 1j * im)
                out[e, ep] = acc
    return out_arr
