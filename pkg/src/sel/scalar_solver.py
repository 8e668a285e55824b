"""Singular scalar Dirichlet solves F(D2u, Du, u, x) = k(delta) * u**(-p).

Strategy: continuation in a regularization parameter eps, solving
F(...) = k * (u + eps)**(-p) for a geometric schedule eps0, eps0/4, ...
down to eps_min.  Each regularized problem is solved by damped Newton
steps; for extremal (Pucci) operators the Newton matrix freezes the
maximizing coefficient per node per iteration, which is Howard's policy
iteration.  Residuals are measured in the weighted sup norm
|G_i| / (1 + k_i) so that the singular boundary weight does not dominate
the stopping test.

A solve can also be asked to confirm itself under refinement: a shadow
solve at half resolution must agree in the sup norm.  Regimes with no
continuum solution (non-integrable boundary weight) surface as a failed
shadow check together with a boundary envelope constant min(delta/u)
that decreases without lower bound as the mesh is refined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.integrate
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from . import _kernels
from .errors import (ContractViolation, GridMismatchError, PositivityBreachError,
                     PreconditionError, SolverError, UnsupportedRegimeError)
from .geometry import DISK, RECTANGLE, Grid, GridFunction, build_grid, same_grid
from .operators import OperatorSpec, discretize, line_coefficients

WEIGHT_FORMS = ("power", "power_log", "loglog_free")


@dataclass(frozen=True)
class WeightSpec:
    """Boundary weight k(delta).

    power:       delta**(-q_w)
    power_log:   delta**(-q_w) * log(A_w/delta)**(-a_w)
    loglog_free: delta**(-1) * log(A_w/delta)**(-1)   (q_w, a_w implied)
    """

    form: str = "power"
    q_w: float = 0.0
    a_w: float = 0.0
    A_w: float = math.inf

    def __post_init__(self):
        if self.form not in WEIGHT_FORMS:
            raise ContractViolation(f"unknown weight form {self.form!r}")

    @property
    def effective_q(self) -> float:
        return 1.0 if self.form == "loglog_free" else self.q_w

    @property
    def effective_a(self) -> float:
        if self.form == "power":
            return 0.0
        if self.form == "loglog_free":
            return 1.0
        return self.a_w

    def needs_log_scale(self) -> bool:
        return self.form in ("power_log", "loglog_free")

    def validate_against(self, diameter: float) -> None:
        if self.needs_log_scale() and not self.A_w > diameter:
            raise PreconditionError(
                f"log-scale constant A_w = {self.A_w} must exceed diam = {diameter}")

    def evaluate(self, delta: np.ndarray) -> np.ndarray:
        delta = np.asarray(delta, dtype=float)
        if np.any(delta <= 0):
            raise ContractViolation("weight is evaluated at interior nodes only")
        q, a = self.effective_q, self.effective_a
        out = delta ** (-q)
        if a != 0.0:
            out = out * np.log(self.A_w / delta) ** (-a)
        return out


def integral_criterion(weight: WeightSpec, crosscheck: bool = False) -> str:
    """Classify the boundary mass integral of t * k(t) near t = 0.

    For the supported family t**(1-q) * log(A/t)**(-a) the mass is infinite
    iff q > 2, or q = 2 and a <= 1; otherwise finite.  With crosscheck=True
    the verdict is confirmed by adaptive quadrature on shrinking lower
    limits.
    """
    q, a = weight.effective_q, weight.effective_a
    infinite = q > 2.0 or (q == 2.0 and a <= 1.0)
    verdict = "infinite" if infinite else "finite"
    if crosscheck and _quadrature_verdict(q, a) != verdict:
        raise ContractViolation(
            f"quadrature cross-check disagrees with closed form for (q={q}, a={a})")
    return verdict


def _quadrature_verdict(q: float, a: float) -> str:
    """Adaptive-quadrature classification of int t**(1-q) log(A/t)**(-a) dt.

    Substituting t = A e**(-w) maps the boundary t -> 0 to w -> inf and the
    integrand to e**((q-2) w) w**(-a), where the quadrature's divergence
    detection is reliable even at the q = 2 boundary.
    """
    import warnings

    def g(w):
        return np.exp((q - 2.0) * w) * w ** (-a)

    with warnings.catch_warnings():
        warnings.simplefilter("error")
        try:
            val, err = scipy.integrate.quad(g, math.log(2.0), np.inf, limit=300)
        except Warning:
            return "infinite"
    return "finite" if err < 1e-6 * max(abs(val), 1.0) else "infinite"


@dataclass
class SolveResult:
    u: GridFunction
    iterations: int
    final_residual: float
    epsilon_path: list
    converged: bool
    diagnostics: dict = field(default_factory=dict)


def _initial_iterate(grid: Grid, p_exp: float, weight: WeightSpec | None) -> np.ndarray:
    """Positive starting iterate shaped like the predicted boundary envelope."""
    delta = grid.delta
    max_delta = float(delta.max())
    q = weight.effective_q if weight is not None else 0.0
    A = weight.A_w if (weight is not None and math.isfinite(weight.A_w)) \
        else math.e * grid.domain.diameter
    with np.errstate(divide="ignore", invalid="ignore"):
        if p_exp + q < 1.0:
            shape = delta.copy()
        elif p_exp + q == 1.0:
            shape = np.where(delta > 0,
                             delta * np.log(A / np.maximum(delta, 1e-300))
                             ** (1.0 / (1.0 + p_exp)), 0.0)
        else:
            power = max((2.0 - q) / (1.0 + p_exp), 0.05)
            shape = delta ** power
    shape = np.where(grid.interior_mask, shape, 0.0)
    amp = 0.25 * grid.domain.diameter / max(shape.max(), 1e-300)
    return amp * shape


def _line_jacobian_solve(lower, diag, upper, rhs):
    n = rhs.shape[0]
    ab = np.zeros((3, n))
    ab[0, 1:] = upper[:-1]
    ab[1, :] = diag
    ab[2, :-1] = lower[1:]
    return scipy.linalg.solve_banded((1, 1), ab, rhs)


def _line_system(spec, grid, u, kfull, eps, p_exp, beta, czero):
    return _kernels.line_system(grid.line_coordinates, u, kfull, eps, p_exp,
                                spec.lam, spec.Lam, spec.sign_plus, beta, czero,
                                grid.kind == DISK)


def _rect_residual_and_matrix(spec, grid, u, kfull, eps, p_exp):
    if spec.lam != spec.Lam:
        raise UnsupportedRegimeError(
            "rectangle solves support lam == Lam only (extremal 2D stencil is "
            "evaluation-only)")
    xs, ys = grid.axes
    nx, ny = grid.shape
    lam = spec.lam
    vec = spec.drift_at(grid.nodes)
    czero = spec.zeroth_at(grid.nodes)
    V = u.reshape(nx, ny)

    rows, cols, vals = [], [], []
    resid = np.zeros(nx * ny)

    def idx(i, j):
        return i * ny + j

    for i in range(nx):
        for j in range(ny):
            m = idx(i, j)
            if i in (0, nx - 1) or j in (0, ny - 1):
                rows.append(m); cols.append(m); vals.append(1.0)
                continue
            hlx, hrx = xs[i] - xs[i - 1], xs[i + 1] - xs[i]
            hly, hry = ys[j] - ys[j - 1], ys[j + 1] - ys[j]
            cW = -lam * 2.0 / (hlx * (hlx + hrx))
            cE = -lam * 2.0 / (hrx * (hlx + hrx))
            cS = -lam * 2.0 / (hly * (hly + hry))
            cN = -lam * 2.0 / (hry * (hly + hry))
            cC = lam * 2.0 / (hlx * hrx) + lam * 2.0 / (hly * hry)
            bx, by = vec[m, 0], vec[m, 1]
            F = (cW * V[i - 1, j] + cE * V[i + 1, j] + cS * V[i, j - 1]
                 + cN * V[i, j + 1] + cC * V[i, j])
            if bx > 0:
                F += bx * (V[i, j] - V[i - 1, j]) / hlx
                cC += bx / hlx; cW -= bx / hlx
            else:
                F += bx * (V[i + 1, j] - V[i, j]) / hrx
                cC -= bx / hrx; cE += bx / hrx
            if by > 0:
                F += by * (V[i, j] - V[i, j - 1]) / hly
                cC += by / hly; cS -= by / hly
            else:
                F += by * (V[i, j + 1] - V[i, j]) / hry
                cC -= by / hry; cN += by / hry
            F -= czero[m] * V[i, j]
            cC -= czero[m]
            if p_exp != 0.0:
                w = V[i, j] + eps
                resid[m] = F - kfull[m] * w ** (-p_exp)
                cC += p_exp * kfull[m] * w ** (-p_exp - 1.0)
            else:
                resid[m] = F - kfull[m]
            for c, v in ((idx(i - 1, j), cW), (idx(i + 1, j), cE),
                         (idx(i, j - 1), cS), (idx(i, j + 1), cN), (m, cC)):
                rows.append(m); cols.append(c); vals.append(v)
    J = scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(nx * ny, nx * ny))
    return resid, J


def _scaled_norm(resid, scale, mask):
    return float(np.max(np.abs(resid[mask]) / scale[mask])) if mask.any() else 0.0


def _newton_stage(spec, grid, u, kfull, eps, p_exp, tol, max_newton=80):
    """Damped Newton (policy iteration for extremal operators) at fixed eps."""
    mask = grid.interior_mask
    scale = 1.0 + np.abs(kfull)
    is_line = grid.kind != RECTANGLE
    if is_line:
        beta, czero = line_coefficients(spec, grid)

    def residual_and_solve(ucur):
        if is_line:
            resid, lo, di, up = _line_system(spec, grid, ucur, kfull, eps, p_exp,
                                             beta, czero)
            step = _line_jacobian_solve(lo, di, up, -resid)
        else:
            resid, J = _rect_residual_and_matrix(spec, grid, ucur, kfull, eps, p_exp)
            step = scipy.sparse.linalg.spsolve(J, -resid)
        return resid, step

    resid, step = residual_and_solve(u)
    res = _scaled_norm(resid, scale, mask)
    it = 0
    while res > tol and it < max_newton:
        t = 1.0
        if p_exp != 0.0:
            neg = step < 0
            if np.any(neg & mask):
                room = (u + 0.5 * eps)[neg & mask] / (-step[neg & mask])
                t = min(1.0, 0.99 * float(room.min()))
        while t >= 2.0 ** -20:
            trial = u + t * step
            if is_line:
                tr_res, lo, di, up = _line_system(spec, grid, trial, kfull, eps,
                                                  p_exp, beta, czero)
            else:
                tr_res, J = _rect_residual_and_matrix(spec, grid, trial, kfull,
                                                      eps, p_exp)
            new = _scaled_norm(tr_res, scale, mask)
            if new <= (1.0 - 1e-4 * t) * res or new < tol:
                u = trial
                res = new
                if is_line:
                    step = _line_jacobian_solve(lo, di, up, -tr_res)
                else:
                    step = scipy.sparse.linalg.spsolve(J, -tr_res)
                break
            t *= 0.5
        else:
            raise SolverError(f"Newton damping floor reached (residual {res:.3e})",
                              last_iterate=u, diagnostics={"eps": eps, "residual": res})
        it += 1
    if res > tol:
        raise SolverError(f"Newton did not converge at eps={eps:g} "
                          f"(residual {res:.3e} after {it} steps)",
                          last_iterate=u, diagnostics={"eps": eps, "residual": res})
    return u, it, res


def _boundary_envelope(grid: Grid, u: np.ndarray) -> float:
    """min(delta / u) over the boundary layer: the constant C with u <= delta/C."""
    w = 2.0 * grid.boundary_cell_width()
    mask = grid.interior_mask & (grid.delta >= w) & (grid.delta <= 0.1 * grid.delta.max())
    if not mask.any():
        mask = grid.interior_mask
    with np.errstate(divide="ignore"):
        ratios = grid.delta[mask] / np.maximum(u[mask], 1e-300)
    return float(ratios.min())


def solve_scalar_singular(spec: OperatorSpec, grid: Grid, p_exp: float,
                          weight: WeightSpec | None = None, tol: float = 1e-10,
                          max_iter: int = 40, k_nodes: np.ndarray | None = None,
                          initial: GridFunction | None = None,
                          eps0: float = 1.0, eps_ratio: float = 0.25,
                          eps_min: float = 1e-10,
                          check_refinement: bool | None = None,
                          force: bool = False,
                          record_stages: bool = False) -> SolveResult:
    """Solve F(D2u, Du, u, x) = k * u**(-p), u = 0 on the boundary.

    Exactly one of ``weight`` (a delta-based family) or ``k_nodes`` (a frozen
    nodal field, used by the system iteration) must be given.  Raises
    SolverError / PositivityBreachError on hard failures; a soft failure of
    the refinement confirmation returns converged=False with the evidence in
    diagnostics.
    """
    if p_exp < 0:
        raise ContractViolation("p_exp must be nonnegative")
    if (weight is None) == (k_nodes is None):
        raise ContractViolation("give exactly one of weight or k_nodes")

    if weight is not None:
        weight.validate_against(grid.domain.diameter)
        if integral_criterion(weight) == "infinite" and not force:
            raise UnsupportedRegimeError(
                "no positive solution exists: the boundary mass integral of "
                "t*k(t) diverges (weight exponent q >= 2 without sufficient "
                "log damping); pass force=True to reproduce the breach")
        kfull = np.zeros(grid.n_nodes)
        kfull[grid.interior_mask] = weight.evaluate(grid.delta[grid.interior_mask])
    else:
        kfull = np.asarray(k_nodes, dtype=float)
        if kfull.shape != (grid.n_nodes,):
            raise GridMismatchError("k_nodes must have one value per node")

    if initial is not None:
        same_grid(initial, GridFunction(grid))
        u = initial.values.copy()
        u[~grid.interior_mask] = 0.0
    else:
        u = _initial_iterate(grid, p_exp, weight)

    if p_exp == 0.0:
        schedule = [0.0]
    else:
        schedule = [eps0]
        while schedule[-1] > eps_min:
            schedule.append(max(schedule[-1] * eps_ratio, eps_min))

    total_iters = 0
    stages = []
    res = math.inf
    for eps in schedule:
        u, its, res = _newton_stage(spec, grid, u, kfull, eps, p_exp, tol,
                                    max_newton=max_iter * 2)
        total_iters += its
        if record_stages:
            stages.append((eps, u.copy()))

    interior_min = float(u[grid.interior_mask].min())
    if interior_min <= 0.0:
        raise PositivityBreachError(
            f"iterate touched zero at an interior node (min = {interior_min:.3e}): "
            "non-existence regime or insufficient boundary grading",
            last_iterate=u)

    diagnostics = {"interior_min": interior_min,
                   "boundary_envelope": _boundary_envelope(grid, u)}
    if record_stages:
        diagnostics["stage_solutions"] = stages

    converged = True
    if check_refinement is None:
        check_refinement = weight is not None
    if check_refinement and weight is not None:
        converged = _refinement_confirms(spec, grid, p_exp, weight, u, tol,
                                         max_iter, eps0, eps_ratio, eps_min,
                                         diagnostics)

    result = SolveResult(u=GridFunction(grid, u), iterations=total_iters,
                         final_residual=res, epsilon_path=schedule,
                         converged=converged, diagnostics=diagnostics)
    return result


def _refinement_confirms(spec, grid, p_exp, weight, u_fine, tol, max_iter,
                         eps0, eps_ratio, eps_min, diagnostics) -> bool:
    """Shadow solve at half resolution; Cauchy agreement confirms convergence."""
    n_coarse = max(8, (grid.shape[0] - 1) // 2 + 1)
    coarse = build_grid(grid.domain, n_coarse, grid.grading, grid.strength)
    try:
        shadow = solve_scalar_singular(spec, coarse, p_exp, weight, tol=tol,
                                       max_iter=max_iter, eps0=eps0,
                                       eps_ratio=eps_ratio, eps_min=eps_min,
                                       check_refinement=False, force=True)
    except SolverError as exc:
        diagnostics["shadow_failure"] = str(exc)
        return False
    xs_f = grid.line_coordinates if grid.kind != RECTANGLE else None
    if xs_f is None:
        return True
    xs_c = coarse.line_coordinates
    interp = np.interp(xs_c, xs_f, u_fine)
    gap = float(np.max(np.abs(interp - shadow.u.values)))
    sup = max(float(np.max(np.abs(u_fine))), 1e-300)
    gap_rel = gap / sup
    env_f = diagnostics["boundary_envelope"]
    env_c = _boundary_envelope(coarse, shadow.u.values)
    ratio = env_f / max(env_c, 1e-300)
    diagnostics.update({"cauchy_gap": gap_rel, "envelope_ratio": ratio,
                        "coarse_envelope": env_c})
    divergent = (gap_rel > 0.04 and (ratio < 0.95 or ratio > 1.05)) or gap_rel > 0.2
    if divergent:
        diagnostics["divergence"] = (
            f"no refinement-stable solution: sup-gap {gap_rel:.3f} between n="
            f"{grid.shape[0]} and n={n_coarse}, boundary envelope constant "
            f"min(delta/u) moved by factor {ratio:.3f}")
    return not divergent


@dataclass
class ComparisonResult:
    ok: bool
    first_violation: int | None = None
    violation_coords: tuple | None = None
    max_violation: float = 0.0
    warning: str | None = None

    def __bool__(self):
        return self.ok


def comparison_check(spec: OperatorSpec, grid: Grid, u_sub: GridFunction,
                     u_super: GridFunction, p_exp: float = 0.0,
                     weight: WeightSpec | None = None,
                     margins_verified: bool = False) -> ComparisonResult:
    """Discrete comparison: true iff u_sub <= u_super at every node."""
    same_grid(u_sub, u_super)
    slack = 1e-12 * max(1.0, u_super.sup_norm())
    diff = u_sub.values - u_super.values
    bad = np.flatnonzero(diff > slack)
    warning = None if margins_verified else \
        "sub/supersolution margins not verified by barrier_margin"
    if bad.size == 0:
        return ComparisonResult(True, warning=warning)
    i = int(bad[np.argmax(diff[bad])])
    return ComparisonResult(False, first_violation=i,
                            violation_coords=tuple(grid.nodes[i]),
                            max_violation=float(diff.max()), warning=warning)


_LOWER_BOUND_KINDS = ("linear", "linear_logpow", "loglog")


def lower_bound_check(u: GridFunction, grid: Grid, kind: str = "linear",
                      theta: float = 0.0, A: float | None = None) -> float | None:
    """Largest c with u >= c * model(delta) over interior nodes; None if c <= 0.

    Models: linear -> delta; linear_logpow -> delta * log(A/delta)**theta;
    loglog -> delta * log(log(A/delta)).
    """
    if kind not in _LOWER_BOUND_KINDS:
        raise ContractViolation(f"unknown lower-bound kind {kind!r}")
    delta = grid.delta[grid.interior_mask]
    vals = u.values[grid.interior_mask]
    if A is None:
        A = math.e ** 2 * grid.domain.diameter
    if kind == "linear":
        model = delta
    elif kind == "linear_logpow":
        model = delta * np.log(A / delta) ** theta
    else:
        model = delta * np.log(np.log(A / delta))
    c = float(np.min(vals / model))
    return c if c > 0 else None
