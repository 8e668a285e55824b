"""Principal eigenpair of the extremal operator by inverse power iteration.

Each sweep solves the Dirichlet problem F(D2w, Dw, w, x) = phi_k (the
scalar solver with zero singular exponent, i.e. a policy-iteration linear
solve), normalizes w to sup-norm one, and estimates the eigenvalue as the
largest ratio phi_k / w over interior nodes.  The operator is not in
divergence form, so no inner-product Rayleigh quotient exists; the max
ratio is the natural surrogate and converges monotonically for these
positive problems.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IterationError, PreconditionError
from .geometry import RECTANGLE, Grid, GridFunction
from .operators import OperatorSpec, discretize
from .scalar_solver import solve_scalar_singular


@dataclass
class EigenPair:
    mu: float
    phi: GridFunction
    iterations: int
    residual_norm: float


def principal_eigenpair(spec: OperatorSpec, grid: Grid, tol: float = 1e-10,
                        max_iter: int = 200,
                        initial: GridFunction | None = None) -> EigenPair:
    """Positive principal eigenpair (mu, phi), phi > 0 interior, sup phi = 1."""
    if tol <= 0:
        raise PreconditionError("tol must be positive")
    mask = grid.interior_mask
    if not mask.any():
        raise PreconditionError("grid has no interior nodes")

    if initial is not None:
        phi = np.abs(initial.values.copy())
        phi[~mask] = 0.0
    else:
        phi = grid.delta.copy()
    phi /= phi.max()

    mu = np.inf
    last = None
    for it in range(1, max_iter + 1):
        sol = solve_scalar_singular(spec, grid, 0.0, k_nodes=phi,
                                    check_refinement=False, tol=min(tol, 1e-11))
        w = sol.u.values
        if np.any(w[mask] <= 0):
            raise IterationError("inverse iteration lost positivity",
                                 last_iterate=w)
        mu_new = float(np.max(phi[mask] / w[mask]))
        phi = w / w.max()
        if last is not None and abs(mu_new - last) < tol:
            mu = mu_new
            break
        last = mu_new
    else:
        raise IterationError(
            f"eigenpair not converged in {max_iter} iterations "
            f"(last mu = {last})",
            last_iterate=phi, diagnostics={"mu": last})

    pair = EigenPair(mu=mu, phi=GridFunction(grid, phi), iterations=it,
                     residual_norm=0.0)
    pair.residual_norm = eigen_residual(spec, grid, pair)
    return pair


def eigen_residual(spec: OperatorSpec, grid: Grid, pair: EigenPair) -> float:
    res = discretize(spec, grid, pair.phi).values - pair.mu * pair.phi.values
    return float(np.max(np.abs(res[grid.interior_mask])) / max(pair.mu, 1.0))


@dataclass
class EigenBounds:
    """Envelope constants C_low * delta <= phi <= C_high * delta and the
    smallest one-sided boundary difference quotient (Hopf constant)."""

    C_low: float
    C_high: float
    hopf_c: float


def verify_eigen_bounds(pair: EigenPair, grid: Grid | None = None) -> EigenBounds:
    grid = grid or pair.phi.grid
    mask = grid.interior_mask
    ratios = pair.phi.values[mask] / grid.delta[mask]
    c_low, c_high = float(ratios.min()), float(ratios.max())

    quotients = []
    if grid.kind == RECTANGLE:
        xs, ys = grid.axes
        nx, ny = grid.shape
        V = pair.phi.values.reshape(nx, ny)
        for j in range(1, ny - 1):
            quotients.append(V[1, j] / (xs[1] - xs[0]))
            quotients.append(V[nx - 2, j] / (xs[-1] - xs[-2]))
        for i in range(1, nx - 1):
            quotients.append(V[i, 1] / (ys[1] - ys[0]))
            quotients.append(V[i, ny - 2] / (ys[-1] - ys[-2]))
    else:
        xs = grid.line_coordinates
        v = pair.phi.values
        if grid.kind == "interval":
            quotients.append(v[1] / (xs[1] - xs[0]))
        quotients.append(v[-2] / (xs[-1] - xs[-2]))
    return EigenBounds(c_low, c_high, float(min(quotients)))


def eigen_summary(pair: EigenPair, bounds: EigenBounds) -> dict:
    return {"mu": pair.mu, "iterations": pair.iterations,
            "residual_norm": pair.residual_norm, "C_low": bounds.C_low,
            "C_high": bounds.C_high, "hopf_c": bounds.hopf_c}
