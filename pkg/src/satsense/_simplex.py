"""Jitted bounded Nelder-Mead over the Fisher-information objective.

Search coordinates are ``(u, theta, r, psi, delta)`` for the Gaussian family
and ``(u, theta, delta)`` for coherent probes, with ``u = ln(1 + R^2)``.
Trial points are clipped to the box; phases use infinite bounds.
"""

import numpy as np
from numba import njit

from ._kernels import fisher_terms

GAUSSIAN = 0
COHERENT = 1


@njit(cache=True, nogil=True)
def unpack(x, family):
    R = np.sqrt(np.expm1(x[0]))
    if family == COHERENT:
        return R, x[1], 0.0, 0.0, x[2]
    return R, x[1], x[2], x[3], x[4]


@njit(cache=True, nogil=True)
def objective(x, family, target, T, n_sat):
    """Negative log Fisher information; ``inf`` where the information vanishes."""
    R, theta, r, psi, delta = unpack(x, family)
    a, b = fisher_terms(R, theta, r, psi, T, n_sat, delta, target)
    value = a + b
    if not value > 0.0:
        return np.inf
    return -np.log(value)


@njit(cache=True, nogil=True)
def _clip(x, lower, upper):
    for i in range(x.size):
        if x[i] < lower[i]:
            x[i] = lower[i]
        elif x[i] > upper[i]:
            x[i] = upper[i]
    return x


@njit(cache=True, nogil=True)
def nelder_mead(x0, step, lower, upper, family, target, T, n_sat, xtol, max_iter):
    """One simplex descent. Returns ``(x, f, iterations, converged)``.

    Converged means the simplex shrank below ``xtol`` (max-norm distance of
    every vertex from the best one) before ``max_iter`` iterations.
    """
    n = x0.size
    sim = np.empty((n + 1, n))
    fs = np.empty(n + 1)
    sim[0] = _clip(x0.copy(), lower, upper)
    for i in range(n):
        p = sim[0].copy()
        p[i] += step[i]
        if p[i] > upper[i]:
            p[i] = sim[0][i] - step[i]
        sim[i + 1] = _clip(p, lower, upper)
    for i in range(n + 1):
        fs[i] = objective(sim[i], family, target, T, n_sat)

    it = 0
    converged = False
    while it < max_iter:
        order = np.argsort(fs)
        sim = sim[order]
        fs = fs[order]
        diam = 0.0
        for i in range(1, n + 1):
            for j in range(n):
                d = abs(sim[i, j] - sim[0, j])
                if d > diam:
                    diam = d
        if diam < xtol:
            converged = True
            break
        it += 1
        centroid = np.zeros(n)
        for i in range(n):
            centroid += sim[i]
        centroid /= n
        worst = sim[n]
        xr = _clip(centroid + (centroid - worst), lower, upper)
        fr = objective(xr, family, target, T, n_sat)
        if fr < fs[0]:
            xe = _clip(centroid + 2.0 * (centroid - worst), lower, upper)
            fe = objective(xe, family, target, T, n_sat)
            if fe < fr:
                sim[n] = xe
                fs[n] = fe
            else:
                sim[n] = xr
                fs[n] = fr
            continue
        if fr < fs[n - 1]:
            sim[n] = xr
            fs[n] = fr
            continue
        if fr < fs[n]:
            xc = _clip(centroid + 0.5 * (xr - centroid), lower, upper)
        else:
            xc = _clip(centroid + 0.5 * (worst - centroid), lower, upper)
        fc = objective(xc, family, target, T, n_sat)
        if fc < min(fr, fs[n]):
            sim[n] = xc
            fs[n] = fc
            continue
        for i in range(1, n + 1):
            sim[i] = _clip(sim[0] + 0.5 * (sim[i] - sim[0]), lower, upper)
            fs[i] = objective(sim[i], family, target, T, n_sat)

    best = np.argmin(fs)
    return sim[best].copy(), fs[best], it, converged


@njit(cache=True, nogil=True)
def polish(x0, step, lower, upper, family, target, T, n_sat, xtol, max_iter, restarts):
    """Nelder-Mead with restarts from the incumbent until the value stops moving.

    Returns ``(x, f, total_iterations, converged)`` where ``converged`` refers
    to the last descent.
    """
    x, f, total, converged = nelder_mead(x0, step, lower, upper, family, target,
                                         T, n_sat, xtol, max_iter)
    for _ in range(restarts):
        x2, f2, it, conv2 = nelder_mead(x, step, lower, upper, family, target,
                                        T, n_sat, xtol, max_iter)
        total += it
        improved = f2 < f - 1e-13 * max(1.0, abs(f))
        if f2 <= f:
            x, f = x2, f2
        converged = conv2
        if not improved:
            break
    return x, f, total, converged
