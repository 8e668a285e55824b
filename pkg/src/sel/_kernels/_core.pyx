# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled line-grid stencil kernel.

Single fused pass over the nodes: residual of the extremal operator plus
singular reaction term, and the tridiagonal bands of the policy-frozen
linearization.  Must match sel._kernels._numpy.line_system exactly.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport pow

cnp.import_array()


def line_system(object xs_o, object u_o, object kvals_o, double eps, double p,
                double lam, double Lam, bint sign_plus, object beta_o,
                object czero_o, bint radial):
    cdef const double[::1] xs = np.ascontiguousarray(xs_o, dtype=np.float64)
    cdef const double[::1] u = np.ascontiguousarray(u_o, dtype=np.float64)
    cdef const double[::1] kvals = np.ascontiguousarray(kvals_o, dtype=np.float64)
    cdef const double[::1] beta = np.ascontiguousarray(beta_o, dtype=np.float64)
    cdef const double[::1] czero = np.ascontiguousarray(czero_o, dtype=np.float64)
    cdef Py_ssize_t n = xs.shape[0]

    resid_np = np.zeros(n)
    lower_np = np.zeros(n)
    diag_np = np.ones(n)
    upper_np = np.zeros(n)
    cdef double[::1] resid = resid_np
    cdef double[::1] lower = lower_np
    cdef double[::1] diag = diag_np
    cdef double[::1] upper = upper_np

    cdef Py_ssize_t i
    cdef double hl, hr, denom, d2, a, F, L, D, U, d1c, tang, b, c, w, r, h

    for i in range(1, n - 1):
        hl = xs[i] - xs[i - 1]
        hr = xs[i + 1] - xs[i]
        denom = hl * hr * (hl + hr)

        d2 = 2.0 * (hl * u[i + 1] - (hl + hr) * u[i] + hr * u[i - 1]) / denom
        a = lam if ((d2 > 0.0) == sign_plus) else Lam
        F = -a * d2
        L = -a * (2.0 / (hl * (hl + hr)))
        D = -a * (-2.0 / (hl * hr))
        U = -a * (2.0 / (hr * (hl + hr)))

        if radial:
            r = xs[i]
            d1c = (hl * hl * u[i + 1] + (hr * hr - hl * hl) * u[i]
                   - hr * hr * u[i - 1]) / denom
            tang = d1c / r
            a = lam if ((tang > 0.0) == sign_plus) else Lam
            F = F - a * tang
            L = L - a * (-hr / (hl * (hl + hr))) / r
            D = D - a * ((hr - hl) / (hl * hr)) / r
            U = U - a * (hl / (hr * (hl + hr))) / r

        b = beta[i]
        if b > 0.0:
            F = F + b * (u[i] - u[i - 1]) / hl
            D = D + b / hl
            L = L - b / hl
        else:
            F = F + b * (u[i + 1] - u[i]) / hr
            D = D - b / hr
            U = U + b / hr

        c = czero[i]
        F = F - c * u[i]
        D = D - c

        if p != 0.0:
            w = u[i] + eps
            resid[i] = F - kvals[i] * pow(w, -p)
            D = D + p * kvals[i] * pow(w, -p - 1.0)
        else:
            resid[i] = F - kvals[i]

        lower[i] = L
        diag[i] = D
        upper[i] = U

    if radial:
        h = xs[1] - xs[0]
        d2 = 2.0 * (u[1] - u[0]) / (h * h)
        a = lam if ((d2 > 0.0) == sign_plus) else Lam
        F = -2.0 * a * d2 - czero[0] * u[0]
        D = -2.0 * a * (-2.0 / (h * h)) - czero[0]
        U = -2.0 * a * (2.0 / (h * h))
        if p != 0.0:
            w = u[0] + eps
            resid[0] = F - kvals[0] * pow(w, -p)
            D = D + p * kvals[0] * pow(w, -p - 1.0)
        else:
            resid[0] = F - kvals[0]
        lower[0] = 0.0
        diag[0] = D
        upper[0] = U

    return resid_np, lower_np, diag_np, upper_np
