"""Vectorized NumPy implementation of the line-grid stencil kernel.

Reference implementation for the compiled core in ``_core.pyx``; both must
produce bitwise-comparable results (same formulas, same branch choices).
"""

from __future__ import annotations

import numpy as np


def line_system(xs, u, kvals, eps, p, lam, Lam, sign_plus, beta, czero, radial):
    """Residual and policy-frozen Jacobian bands on a 1D coordinate line.

    The operator at interior node i is

        F_i = sum_ch -a(ch)*ch + beta_i * D1_upwind(u)_i - czero_i * u_i

    where the curvature channels ch are the nonuniform three-point second
    difference and, on radial (disk) lines, additionally the tangential
    Hessian eigenvalue D1_centered(u)_i / r_i.  The extremal coefficient per
    channel is a = lam when (ch > 0) matches the plus operator, Lam
    otherwise.  The residual is G_i = F_i - k_i * (u_i + eps)**(-p); the
    returned bands linearize G with policy, upwind direction and channel
    signs frozen (Howard step).  Boundary rows carry G = 0 and an identity
    row.

    Returns (resid, lower, diag, upper) with lower[i] = dG_i/du_{i-1},
    diag[i] = dG_i/du_i, upper[i] = dG_i/du_{i+1}.
    """
    xs = np.asarray(xs, dtype=float)
    u = np.asarray(u, dtype=float)
    kvals = np.asarray(kvals, dtype=float)
    beta = np.asarray(beta, dtype=float)
    czero = np.asarray(czero, dtype=float)
    n = xs.shape[0]

    resid = np.zeros(n)
    lower = np.zeros(n)
    diag = np.ones(n)
    upper = np.zeros(n)

    hl = xs[1:-1] - xs[:-2]
    hr = xs[2:] - xs[1:-1]
    um, uc, up_ = u[:-2], u[1:-1], u[2:]
    denom = hl * hr * (hl + hr)

    d2 = 2.0 * (hl * up_ - (hl + hr) * uc + hr * um) / denom
    a2 = np.where((d2 > 0.0) == sign_plus, lam, Lam)
    F = -a2 * d2
    L = -a2 * (2.0 / (hl * (hl + hr)))
    D = -a2 * (-2.0 / (hl * hr))
    U = -a2 * (2.0 / (hr * (hl + hr)))

    if radial:
        r = xs[1:-1]
        d1c = (hl * hl * up_ + (hr * hr - hl * hl) * uc - hr * hr * um) / denom
        tang = d1c / r
        at = np.where((tang > 0.0) == sign_plus, lam, Lam)
        F = F - at * tang
        L = L - at * (-hr / (hl * (hl + hr))) / r
        D = D - at * ((hr - hl) / (hl * hr)) / r
        U = U - at * (hl / (hr * (hl + hr))) / r

    b = beta[1:-1]
    pos = b > 0.0
    F = F + np.where(pos, b * (uc - um) / hl, b * (up_ - uc) / hr)
    D = D + np.where(pos, b / hl, -b / hr)
    L = L + np.where(pos, -b / hl, 0.0)
    U = U + np.where(pos, 0.0, b / hr)

    c = czero[1:-1]
    F = F - c * uc
    D = D - c

    if p != 0.0:
        w = uc + eps
        kw = kvals[1:-1] * np.power(w, -p)
        G = F - kw
        D = D + p * kvals[1:-1] * np.power(w, -p - 1.0)
    else:
        G = F - kvals[1:-1]

    resid[1:-1] = G
    lower[1:-1] = L
    diag[1:-1] = D
    upper[1:-1] = U

    if radial:
        h = xs[1] - xs[0]
        d2c = 2.0 * (u[1] - u[0]) / (h * h)
        a = lam if (d2c > 0.0) == sign_plus else Lam
        F0 = -2.0 * a * d2c - czero[0] * u[0]
        D0 = -2.0 * a * (-2.0 / (h * h)) - czero[0]
        U0 = -2.0 * a * (2.0 / (h * h))
        if p != 0.0:
            w0 = u[0] + eps
            resid[0] = F0 - kvals[0] * w0 ** (-p)
            D0 += p * kvals[0] * w0 ** (-p - 1.0)
        else:
            resid[0] = F0 - kvals[0]
        lower[0] = 0.0
        diag[0] = D0
        upper[0] = U0

    return resid, lower, diag, upper
