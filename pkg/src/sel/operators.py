"""Pucci extremal operators and the structured uniformly elliptic family.

The extremal operators over symmetric matrices with spectrum in [lam, Lam]
admit the spectral form

    P+(M) = -lam * sum(positive eigenvalues) - Lam * sum(negative eigenvalues)
    P-(M) = -Lam * sum(positive eigenvalues) - lam * sum(negative eigenvalues)

The concrete operator family evaluated here is

    F(M, g, v, x) = P(M) + b(x) . g - c(x) * v,

with sup |b| <= Gamma and 0 <= c(x) <= gamma.  The family is positively
1-homogeneous in (M, g, v) jointly and satisfies the extremal sandwich

    P-(M-N) - Gamma|g-h| - gamma*max(v-w, 0)
        <= F(M,g,v,x) - F(N,h,w,x)
        <= P+(M-N) + Gamma|g-h| + gamma*max(w-v, 0).

Discretization: nonuniform three-point second differences (exact on
quadratics), drift upwinded against its sign, and on 2D tensor grids the
spectral formula applied to the discrete Hessian assembled from axis and
diagonal second differences.  The 2D path is not provably monotone for all
lam/Lam ratios; quantitative runs stay on the interval and on the radially
reduced disk.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from . import _kernels
from .errors import ContractViolation, GridMismatchError
from .geometry import DISK, INTERVAL, RECTANGLE, Grid, GridFunction, same_grid

CoefField = Union[float, tuple, Callable[[np.ndarray], np.ndarray]]

_SYM_TOL = 1e-12


def _eigenvalues_sym(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim == 0:
        return M.reshape(1)
    if M.ndim == 1 and M.size == 1:
        return M
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ContractViolation(f"expected a square matrix, got shape {M.shape}")
    gap = float(np.max(np.abs(M - M.T)))
    if gap > _SYM_TOL * (1.0 + float(np.max(np.abs(M)))):
        raise ContractViolation(f"matrix not symmetric (max asymmetry {gap:.3e})")
    if M.shape == (1, 1):
        return M.reshape(1)
    if M.shape == (2, 2):
        mean = 0.5 * (M[0, 0] + M[1, 1])
        rad = float(np.hypot(0.5 * (M[0, 0] - M[1, 1]), 0.5 * (M[0, 1] + M[1, 0])))
        return np.array([mean - rad, mean + rad])
    return np.linalg.eigvalsh(M)


def _check_ellipticity(lam: float, Lam: float) -> None:
    if not (0.0 < lam <= Lam):
        raise ContractViolation(f"need 0 < lam <= Lam, got ({lam}, {Lam})")


def pucci_plus(M, lam: float, Lam: float) -> float:
    """Maximal extremal operator sup over [lam, Lam] of -Tr(A M)."""
    _check_ellipticity(lam, Lam)
    e = _eigenvalues_sym(M)
    return float(-lam * e[e > 0].sum() - Lam * e[e < 0].sum())


def pucci_minus(M, lam: float, Lam: float) -> float:
    """Minimal extremal operator inf over [lam, Lam] of -Tr(A M)."""
    _check_ellipticity(lam, Lam)
    e = _eigenvalues_sym(M)
    return float(-Lam * e[e > 0].sum() - lam * e[e < 0].sum())


@dataclass(frozen=True)
class OperatorSpec:
    """Structured operator family: ellipticity, drift and zeroth bounds.

    drift is a constant (scalar or per-axis tuple) or a callable mapping an
    (N, d) node array to (N, d) vectors; zeroth likewise maps nodes to a
    nonnegative array bounded by gamma.
    """

    lam: float
    Lam: float
    pucci_sign: str = "plus"
    Gamma: float = 0.0
    gamma: float = 0.0
    drift: CoefField = 0.0
    zeroth: CoefField = 0.0

    def __post_init__(self):
        _check_ellipticity(self.lam, self.Lam)
        if self.pucci_sign not in ("plus", "minus"):
            raise ContractViolation(f"pucci_sign must be plus|minus, got {self.pucci_sign!r}")
        if self.Gamma < 0 or self.gamma < 0:
            raise ContractViolation("Gamma and gamma must be nonnegative")

    @property
    def sign_plus(self) -> bool:
        return self.pucci_sign == "plus"

    def pucci(self, M) -> float:
        if self.sign_plus:
            return pucci_plus(M, self.lam, self.Lam)
        return pucci_minus(M, self.lam, self.Lam)

    def drift_at(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        n, d = points.shape
        if callable(self.drift):
            vec = np.asarray(self.drift(points), dtype=float).reshape(n, d)
        elif isinstance(self.drift, tuple):
            vec = np.broadcast_to(np.asarray(self.drift, dtype=float), (n, d)).copy()
        else:
            vec = np.zeros((n, d))
            vec[:, 0] = float(self.drift)
        sup = float(np.max(np.linalg.norm(vec, axis=1))) if n else 0.0
        if sup > self.Gamma + 1e-12:
            raise ContractViolation(f"sup|drift| = {sup:.3e} exceeds Gamma = {self.Gamma}")
        return vec

    def zeroth_at(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        n = points.shape[0]
        if callable(self.zeroth):
            c = np.asarray(self.zeroth(points), dtype=float).reshape(n)
        else:
            c = np.full(n, float(self.zeroth))
        if np.any(c < -1e-12) or np.any(c > self.gamma + 1e-12):
            raise ContractViolation("zeroth coefficient must satisfy 0 <= c <= gamma")
        return c


def negative_laplacian() -> OperatorSpec:
    """F reduces to -Laplace(u): lam = Lam = 1, no drift or zeroth term."""
    return OperatorSpec(lam=1.0, Lam=1.0)


def pucci_operator(lam: float, Lam: float, sign: str = "plus") -> OperatorSpec:
    return OperatorSpec(lam=lam, Lam=Lam, pucci_sign=sign)


@dataclass(frozen=True)
class HessianData:
    """Pointwise arguments (M, gradient, value, location) of the operator."""

    matrix: np.ndarray
    gradient: np.ndarray
    value: float
    location: np.ndarray = field(default_factory=lambda: np.zeros(1))


def evaluate_F(spec: OperatorSpec, h: HessianData) -> float:
    """Pointwise operator value P(M) + b(x).g - c(x)*v."""
    loc = np.atleast_2d(np.asarray(h.location, dtype=float))
    b = spec.drift_at(loc)[0]
    c = spec.zeroth_at(loc)[0]
    g = np.atleast_1d(np.asarray(h.gradient, dtype=float))
    return spec.pucci(h.matrix) + float(b[: g.size] @ g) - c * float(h.value)


def h4_gaps(spec: OperatorSpec, h1: HessianData, h2: HessianData) -> tuple[float, float]:
    """Slack of the extremal sandwich for the pair (h1, h2).

    Returns (lower_gap, upper_gap); both are nonnegative when the sandwich
    holds.  The zeroth-order slack uses the swap-symmetric reading: the
    difference may decrease at rate gamma, never increase.
    """
    dF = evaluate_F(spec, h1) - evaluate_F(spec, h2)
    dM = np.asarray(h1.matrix, dtype=float) - np.asarray(h2.matrix, dtype=float)
    dg = float(np.linalg.norm(np.atleast_1d(h1.gradient) - np.atleast_1d(h2.gradient)))
    dv = h1.value - h2.value
    low = (pucci_minus(dM, spec.lam, spec.Lam) - spec.Gamma * dg
           - spec.gamma * max(dv, 0.0))
    upp = (pucci_plus(dM, spec.lam, spec.Lam) + spec.Gamma * dg
           + spec.gamma * max(-dv, 0.0))
    return dF - low, upp - dF


def line_coefficients(spec: OperatorSpec, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Drift component along the coordinate line and zeroth field, per node."""
    beta = spec.drift_at(grid.nodes)[:, 0]
    czero = spec.zeroth_at(grid.nodes)
    return beta, czero


def _discretize_line(spec: OperatorSpec, grid: Grid, values: np.ndarray) -> np.ndarray:
    beta, czero = line_coefficients(spec, grid)
    zeros = np.zeros(grid.n_nodes)
    resid, _, _, _ = _kernels.line_system(
        grid.line_coordinates, values, zeros, 0.0, 0.0,
        spec.lam, spec.Lam, spec.sign_plus, beta, czero, grid.kind == DISK)
    return resid


def _discretize_rectangle(spec: OperatorSpec, grid: Grid, values: np.ndarray) -> np.ndarray:
    xs, ys = grid.axes
    nx, ny = grid.shape
    V = values.reshape(nx, ny)
    hlx = (xs[1:-1] - xs[:-2])[:, None]
    hrx = (xs[2:] - xs[1:-1])[:, None]
    hly = (ys[1:-1] - ys[:-2])[None, :]
    hry = (ys[2:] - ys[1:-1])[None, :]

    C, W, E = V[1:-1, 1:-1], V[:-2, 1:-1], V[2:, 1:-1]
    S, N = V[1:-1, :-2], V[1:-1, 2:]
    d2x = 2.0 * (hlx * E - (hlx + hrx) * C + hrx * W) / (hlx * hrx * (hlx + hrx))
    d2y = 2.0 * (hly * N - (hly + hry) * C + hry * S) / (hly * hry * (hly + hry))
    dxy = (V[2:, 2:] + V[:-2, :-2] - V[2:, :-2] - V[:-2, 2:]) / (
        (xs[2:] - xs[:-2])[:, None] * (ys[2:] - ys[:-2])[None, :])

    mean = 0.5 * (d2x + d2y)
    rad = np.sqrt(0.25 * (d2x - d2y) ** 2 + dxy ** 2)
    e1, e2 = mean - rad, mean + rad
    lam, Lam = (spec.lam, spec.Lam) if spec.sign_plus else (spec.Lam, spec.lam)
    P = (-lam * (np.maximum(e1, 0) + np.maximum(e2, 0))
         - Lam * (np.minimum(e1, 0) + np.minimum(e2, 0)))

    vec = spec.drift_at(grid.nodes)
    bx = vec[:, 0].reshape(nx, ny)[1:-1, 1:-1]
    by = vec[:, 1].reshape(nx, ny)[1:-1, 1:-1]
    dxu = np.where(bx > 0, (C - W) / hlx, (E - C) / hrx)
    dyu = np.where(by > 0, (C - S) / hly, (N - C) / hry)

    c = spec.zeroth_at(grid.nodes).reshape(nx, ny)[1:-1, 1:-1]
    F = np.zeros((nx, ny))
    F[1:-1, 1:-1] = P + bx * dxu + by * dyu - c * C
    return F.ravel()


def discretize(spec: OperatorSpec, grid: Grid, u: GridFunction) -> GridFunction:
    """Residual field F(D2u, Du, u, x) at interior nodes (0 on the boundary)."""
    if u.grid is not grid:
        same_grid(u, GridFunction(grid))
    if grid.boundary_cell_width() <= 0:
        raise GridMismatchError("grid has a zero-width boundary cell")
    if grid.kind == RECTANGLE:
        vals = _discretize_rectangle(spec, grid, u.values)
    else:
        vals = _discretize_line(spec, grid, u.values)
    return GridFunction(grid, vals)


@dataclass
class SubadditivityReport:
    """Pointwise margin F1(u) + F2(v) - F(u+v) and its minimum."""

    margin: GridFunction
    min_margin: float
    sub_margin_u: float | None = None
    sub_margin_v: float | None = None


def check_subsolution_sum(u: GridFunction, v: GridFunction,
                          f: GridFunction | None, g: GridFunction | None,
                          specs) -> SubadditivityReport:
    """Discrete check that subsolutions add.

    specs is (F, F1, F2).  The margin is F1(D2u,..) + F2(D2v,..) applied to
    the discrete fields minus F applied to u + v, nodewise on the interior;
    a nonnegative margin certifies the superposition inequality there.
    When f and g are given, the individual subsolution margins
    min(f - F1(u)) and min(g - F2(v)) are reported as well.
    """
    same_grid(u, v)
    spec_sum, spec1, spec2 = specs
    grid = u.grid
    w = GridFunction(grid, u.values + v.values)
    lhs = discretize(spec_sum, grid, w).values
    rhs = discretize(spec1, grid, u).values + discretize(spec2, grid, v).values
    margin = np.where(grid.interior_mask, rhs - lhs, 0.0)
    report = SubadditivityReport(
        margin=GridFunction(grid, margin),
        min_margin=float(margin[grid.interior_mask].min()),
    )
    if f is not None:
        same_grid(u, f)
        du = f.values - discretize(spec1, grid, u).values
        report.sub_margin_u = float(du[grid.interior_mask].min())
    if g is not None:
        same_grid(v, g)
        dv = g.values - discretize(spec2, grid, v).values
        report.sub_margin_v = float(dv[grid.interior_mask].min())
    return report
