"""Scalar diagnostics from either picture.

Momentum moments refer to the Wigner variable ``Pi`` (minus the kinetic
momentum). On the density-matrix side they are computed from the same
discrete Fourier representation of the relative coordinate that the Wigner
transform uses, so both routes agree to round-off.
"""
import csv
from dataclasses import astuple, dataclass, fields
import math

import numpy as np

from .cl_evolve import DensityMatrixGrid, boundary_leakage
from .wigner import WignerGrid, antidiagonals, default_n_pi, inverse_wigner, pi_grid

__all__ = ["ObservableRecord", "FIELDS", "observe_rho", "observe_wigner",
           "write_series"]


@dataclass(frozen=True)
class ObservableRecord:
    t: float
    trace: float
    purity: float
    linear_entropy: float
    mean_phi: float
    mean_pi: float
    var_phi: float
    var_pi: float
    cov: float
    offdiag_coherence: float
    boundary_leakage: float


FIELDS = tuple(f.name for f in fields(ObservableRecord))


def _pi_weights(n_pi, dphi, power):
    """``(2 dphi dPi / 2 pi) sum_j Pi_j**power exp(i Pi_j phi_k)`` per column k."""
    pi, dpi = pi_grid(n_pi, dphi)
    half = (n_pi - 1) // 2
    k = np.arange(-half, half + 1)
    phase = np.exp(1j * np.outer(k, pi) * 2.0 * dphi)
    return (2.0 * dphi * dpi / (2 * math.pi)) * (phase @ pi**power)


def _coherence(data, phi, d_threshold):
    if d_threshold is None:
        d_threshold = 0.25 * (phi[-1] - phi[0])
    sep = np.abs(phi[:, None] - phi[None, :])
    mask = sep > d_threshold
    return float(np.max(np.abs(data[mask]))) if mask.any() else 0.0


def observe_rho(rho: DensityMatrixGrid, d_threshold: float = None,
                n_pi: int = None) -> ObservableRecord:
    """Diagnostics of a density matrix.

    ``d_threshold`` selects the coherences entering ``offdiag_coherence``
    (default: a quarter of the grid extent, i.e. half a cat separation that
    spans half the grid).
    """
    h, phi, a = rho.dphi, rho.phi, rho.data
    diag = np.real(np.diag(a))
    trace = h * diag.sum()
    purity = h**2 * float(np.sum(np.abs(a) ** 2))
    mean_phi = h * np.sum(phi * diag) / trace
    var_phi = h * np.sum(phi**2 * diag) / trace - mean_phi**2
    n_pi = default_n_pi(rho.n) if n_pi is None else n_pi
    ad = antidiagonals(a, n_pi)
    g1 = _pi_weights(n_pi, h, 1)
    g2 = _pi_weights(n_pi, h, 2)
    row1 = np.real(ad @ g1)
    m_pi = h * row1.sum() / trace
    m_pi2 = h * np.real(ad @ g2).sum() / trace
    m_phipi = h * np.sum(phi * row1) / trace
    return ObservableRecord(
        t=rho.t,
        trace=float(trace),
        purity=purity,
        linear_entropy=1.0 - purity,
        mean_phi=float(mean_phi),
        mean_pi=float(m_pi),
        var_phi=float(var_phi),
        var_pi=float(m_pi2 - m_pi**2),
        cov=float(m_phipi - mean_phi * m_pi),
        offdiag_coherence=_coherence(a, phi, d_threshold),
        boundary_leakage=boundary_leakage(rho),
    )


def observe_wigner(w: WignerGrid, d_threshold: float = None) -> ObservableRecord:
    """Diagnostics of a Wigner function; coherences come from the reconstructed
    density matrix."""
    meas = w.dphi * w.dpi / (2 * math.pi)
    phi, pi, data = w.phi, w.pi, w.data
    trace = meas * data.sum()
    purity = meas * float(np.sum(data**2))
    p_phi = data.sum(axis=1)
    p_pi = data.sum(axis=0)
    mean_phi = meas * np.sum(phi * p_phi) / trace
    mean_pi = meas * np.sum(pi * p_pi) / trace
    var_phi = meas * np.sum(phi**2 * p_phi) / trace - mean_phi**2
    var_pi = meas * np.sum(pi**2 * p_pi) / trace - mean_pi**2
    cov = meas * float(phi @ data @ pi) / trace - mean_phi * mean_pi
    ring = 2
    edge = np.abs(data[:ring]).sum() + np.abs(data[-ring:]).sum() \
        + np.abs(data[ring:-ring, :ring]).sum() + np.abs(data[ring:-ring, -ring:]).sum()
    rho = inverse_wigner(w)
    return ObservableRecord(
        t=w.t,
        trace=float(trace),
        purity=purity,
        linear_entropy=1.0 - purity,
        mean_phi=float(mean_phi),
        mean_pi=float(mean_pi),
        var_phi=float(var_phi),
        var_pi=float(var_pi),
        cov=float(cov),
        offdiag_coherence=_coherence(rho.data, rho.phi, d_threshold),
        boundary_leakage=float(meas * edge),
    )


def write_series(path, records):
    """CSV with a header row and one line per record, fields in declaration order."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(FIELDS)
        for rec in records:
            writer.writerow([repr(float(v)) for v in astuple(rec)])
