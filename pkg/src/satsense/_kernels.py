"""Scalar model kernels shared by the public API and the jitted optimizer.

Every function here uses only arithmetic and ``numpy`` ufuncs and is compiled
with ``numba.njit``, so one source serves scalars and broadcast arrays.
Targets are passed as integers: ``0`` for detuning, ``1`` for optical depth.
"""

import numpy as np
from numba import njit

DETUNING = 0
OPTICAL_DEPTH = 1


@njit(cache=True, nogil=True)
def photon_number(R, r):
    s = np.sinh(r)
    return R * R + s * s


@njit(cache=True, nogil=True)
def linewidth(nbar, n_sat):
    return np.sqrt(1.0 + nbar / n_sat)


@njit(cache=True, nogil=True)
def response(T, n_sat, delta, nbar):
    """Return ``(phi, xi, gamma_bar)`` for the normalized Lorentzian response."""
    gbar = linewidth(nbar, n_sat)
    denom = delta * delta + gbar * gbar
    return 0.5 * T * delta / denom, 0.5 * T / denom, gbar


@njit(cache=True, nogil=True)
def response_derivatives(T, n_sat, delta, nbar, target):
    """Return ``(dphi, dxi)`` with respect to detuning or optical depth."""
    gbar = linewidth(nbar, n_sat)
    g2 = gbar * gbar
    denom = delta * delta + g2
    if target == DETUNING:
        scale = 0.5 * T / (denom * denom)
        return scale * (g2 - delta * delta), -2.0 * scale * delta
    return 0.5 * delta / denom, 0.5 / denom


@njit(cache=True, nogil=True)
def input_mean(R, theta, angle):
    return 2.0 * R * np.cos(angle - theta)


@njit(cache=True, nogil=True)
def input_variance_excess(r, psi, angle):
    """``e^{-2r} cos^2(angle - psi) + e^{2r} sin^2(angle - psi) - 1``, exact zero at r = 0."""
    return np.expm1(-2.0 * r) + 2.0 * np.sinh(2.0 * r) * np.sin(angle - psi) ** 2


@njit(cache=True, nogil=True)
def output_stats(R, theta, r, psi, T, n_sat, delta):
    """Return ``(mu, v)`` of the transmitted X quadrature."""
    nbar = photon_number(R, r)
    phi, xi, _ = response(T, n_sat, delta, nbar)
    att = np.exp(-xi)
    loss = np.exp(-2.0 * xi)
    mu = input_mean(R, theta, phi) * att
    # 1 + (v_in - 1) e^{-2 xi} keeps coherent inputs at exactly 1
    v = 1.0 + input_variance_excess(r, psi, phi) * loss
    return mu, v


@njit(cache=True, nogil=True)
def output_derivatives(R, theta, r, psi, T, n_sat, delta, target):
    """Return ``(dmu, dv)`` of the output statistics with respect to ``target``.

    Probe parameters and the photon number are held fixed, so the power
    broadened linewidth does not move with either target.
    """
    nbar = photon_number(R, r)
    phi, xi, _ = response(T, n_sat, delta, nbar)
    dphi, dxi = response_derivatives(T, n_sat, delta, nbar, target)
    att = np.exp(-xi)
    loss = att * att
    a = phi - theta
    dmu = -2.0 * R * att * (np.sin(a) * dphi + np.cos(a) * dxi)
    excess = input_variance_excess(r, psi, phi)
    dvin = 2.0 * np.sinh(2.0 * r) * np.sin(2.0 * (phi - psi))
    dv = loss * (dvin * dphi - 2.0 * excess * dxi)
    return dmu, dv


@njit(cache=True, nogil=True)
def fisher_terms(R, theta, r, psi, T, n_sat, delta, target):
    """Return ``(mean_term, var_term)`` of the Gaussian Fisher information."""
    _, v = output_stats(R, theta, r, psi, T, n_sat, delta)
    dmu, dv = output_derivatives(R, theta, r, psi, T, n_sat, delta, target)
    return dmu * dmu / v, dv * dv / (2.0 * v * v)


@njit(cache=True, nogil=True)
def coherent_fisher(nbar, T, n_sat, delta, target):
    """Coherent-probe Fisher information with the displacement phase optimized out."""
    phi, xi, _ = response(T, n_sat, delta, nbar)
    dphi, dxi = response_derivatives(T, n_sat, delta, nbar, target)
    return 4.0 * nbar * np.exp(-2.0 * xi) * (dphi * dphi + dxi * dxi)
