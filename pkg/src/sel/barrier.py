"""Barrier constructions: the singular ODE H'' = -t**(-alpha) H**(-beta)
on (0, b] with H(0) = 0 and H, H' > 0, and the logarithmic barriers built
from the principal eigenfunction.

The ODE is solved by shooting: H(b) = 1 is fixed, the terminal slope
sigma = H'(b) is bisected so that the backward trajectory reaches t -> 0
with H -> 0.  Integration stops at a crossover tc = tc_factor * b; below
tc the solution is extended by its leading asymptote (linear through the
origin), which keeps the singular forcing t**(-alpha) out of the
integrator.  The ODE exponents are named alpha_ode / beta_ode throughout
to keep them apart from the regime exponents of the classifier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import PchipInterpolator

from .errors import (ContractViolation, PreconditionError, RangeError,
                     ShootingError, SingularityError)
from .geometry import Grid, GridFunction, same_grid
from .operators import OperatorSpec, discretize

_H_FLOOR = 1e-12


@dataclass
class BarrierProps:
    concave_ok: bool = False
    linear_bounds_ok: bool | None = None
    log_rate_ok: bool | None = None
    hp_bound_ok: bool = False
    constants: dict = field(default_factory=dict)


@dataclass
class BarrierSolution:
    """Tabulated H, H' on geometric samples ts in (0, b]."""

    alpha_ode: float
    beta_ode: float
    b: float
    ts: np.ndarray
    H: np.ndarray
    Hp: np.ndarray
    props: BarrierProps = field(default_factory=BarrierProps)
    meta: dict = field(default_factory=dict)

    def interpolator(self):
        """Monotone cubic interpolant of H, linear through 0 below ts[0]."""
        pch = PchipInterpolator(np.log(self.ts), self.H, extrapolate=False)
        t0, h0 = self.ts[0], self.H[0]

        def H_of(t):
            t = np.asarray(t, dtype=float)
            out = np.zeros_like(t)
            small = (t > 0) & (t < t0)
            out[small] = h0 * t[small] / t0
            inside = t >= t0
            out[inside] = pch(np.log(t[inside]))
            return out

        return H_of


def _integrate(alpha, beta, b, sigma, t_end, t_eval=None, h_b=1.0):
    def rhs(t, y):
        h = y[0] if y[0] > _H_FLOOR else _H_FLOOR
        return [y[1], -t ** (-alpha) * h ** (-beta)]

    def hit_floor(t, y):
        return y[0] - _H_FLOOR

    hit_floor.terminal = True
    hit_floor.direction = -1
    sol = solve_ivp(rhs, (b, t_end), [h_b, sigma], method="DOP853",
                    rtol=1e-10, atol=1e-14, events=hit_floor,
                    t_eval=t_eval, dense_output=False)
    hit = sol.t_events[0].size > 0
    return sol, hit


def solve_barrier_ode(alpha_ode: float, beta_ode: float, b: float = 0.5,
                      n: int = 2000, tc_factor: float = 1e-6,
                      h_at_b: float = 1.0) -> BarrierSolution:
    """Shooting solve of the barrier ODE; samples are geometric on [tc, b].

    The terminal value H(b) = h_at_b is fixed and the slope is bisected.
    For alpha_ode + beta_ode > 1 the vanishing solutions cluster around the
    exact power profile c * t**rho, rho = (2-alpha)/(1+beta), so the default
    normalization can be unreachable; the raised error then names the
    reachable scale.
    """
    if not 0.0 < alpha_ode < 2.0:
        raise PreconditionError(f"need 0 < alpha_ode < 2, got {alpha_ode}")
    if beta_ode < 0.0:
        raise PreconditionError(f"need beta_ode >= 0, got {beta_ode}")
    if not 0.0 < b < 1.0:
        raise PreconditionError(f"need 0 < b < 1, got {b}")
    tc = tc_factor * b
    t_deep = 1e-3 * tc

    def shoot(sigma):
        # Sign of the linear extrapolation of H to t = 0, measured three
        # decades below the reported samples so that the slope error cannot
        # pollute them: positive means the slope undershoots (H(0+) > 0),
        # a floor hit or negative extrapolation means it overshoots.
        sol, hit = _integrate(alpha_ode, beta_ode, b, sigma, t_deep,
                              h_b=h_at_b)
        if hit:
            return -float(sol.t_events[0][0])
        return float(sol.y[0, -1] - sol.t[-1] * sol.y[1, -1])

    lo = 0.0
    if shoot(lo) < 0:
        hint = ""
        if alpha_ode + beta_ode > 1.0:
            rho = (2.0 - alpha_ode) / (1.0 + beta_ode)
            scale = (1.0 / (rho * (1.0 - rho))) ** (1.0 / (1.0 + beta_ode)) * b ** rho
            hint = (f"; vanishing solutions sit near the power profile with "
                    f"H(b) ~ {scale:.4g}, pass h_at_b below that value")
        raise ShootingError(
            f"bracket failure: trajectory hits zero even with H'(b) = 0 "
            f"(alpha={alpha_ode}, beta={beta_ode}){hint}")
    hi = 1.0
    for _ in range(80):
        if shoot(hi) < 0:
            break
        hi *= 2.0
    else:
        raise ShootingError("bracket failure: no overshooting terminal slope found")

    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if shoot(mid) < 0:
            hi = mid
        else:
            lo = mid

    ts = np.geomspace(tc, b, n)
    sol, hit = _integrate(alpha_ode, beta_ode, b, lo, t_deep, t_eval=ts[::-1],
                          h_b=h_at_b)
    if hit or np.any(sol.y[0] <= 0):
        raise SingularityError("returned trajectory touched zero; reduce tc_factor")
    H = sol.y[0][::-1].copy()
    Hp = sol.y[1][::-1].copy()
    if np.any(Hp <= 0):
        raise SingularityError("H' lost positivity on the sample range")

    ratio = H[0] / (ts[0] * Hp[0])
    if ratio > 50.0:
        raise ShootingError(
            f"extrapolated H(0+) does not vanish (H/(t H') = {ratio:.2f} at tc)")

    out = BarrierSolution(alpha_ode, beta_ode, b, ts, H, Hp,
                          meta={"sigma": lo, "tc": tc,
                                "H0_extrapolated": max(H[0] - ts[0] * Hp[0], 0.0),
                                "concavity_ratio_at_tc": ratio})
    out.props = verify_barrier_properties(out)
    return out


def _smallest_decade(ts):
    return ts <= ts[0] * 10.0


def _slope(x, y):
    x = x - x.mean()
    return float((x @ (y - y.mean())) / (x @ x))


def fit_log_exponent(ts, H, offset_correction: bool = True) -> float:
    """Exponent theta in H ~ t * (-log t)**theta over the given samples.

    Regresses log(H/t) on [1, log L, 1/L] with L = -log t; the 1/L column
    absorbs the unknown additive offset in the logarithm scale, removing the
    leading finite-depth bias of the plain two-column fit.
    """
    L = -np.log(ts)
    y = np.log(H / ts)
    cols = [np.ones_like(L), np.log(L)]
    if offset_correction:
        cols.append(1.0 / L)
    X = np.column_stack(cols)
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    return float(coef[1])


def verify_barrier_properties(sol: BarrierSolution) -> BarrierProps:
    """Sample-by-sample checks of the concavity, linear-envelope, log-rate
    and gradient-bound properties, with their witnessing constants."""
    ts, H, Hp = sol.ts, sol.H, sol.Hp
    props = BarrierProps()
    con_margin = H - ts * Hp
    props.concave_ok = bool(np.all(con_margin > 0) and np.all(np.diff(Hp) <= 0))
    props.constants["con_min_margin"] = float(con_margin.min())

    small = _smallest_decade(ts)
    asum = sol.alpha_ode + sol.beta_ode
    if asum < 1.0:
        ratio = H / ts
        props.constants["c1"] = float(ratio.min())
        props.constants["c2"] = float(ratio.max())
        slope = _slope(np.log(ts[small]), np.log(ratio[small]))
        props.constants["lip_slope"] = slope
        props.linear_bounds_ok = bool(abs(slope) <= 0.05)

    if abs(sol.beta_ode - (1.0 - sol.alpha_ode)) <= 1e-9:
        theta = fit_log_exponent(ts[small], H[small])
        target = 1.0 / (2.0 - sol.alpha_ode)
        props.constants["theta_fit"] = theta
        props.constants["theta_target"] = target
        props.log_rate_ok = bool(abs(theta - target) <= 0.05 * target)

    R = Hp * ts ** sol.alpha_ode * H ** sol.beta_ode
    C1 = float(R.max())
    props.constants["C1"] = C1
    props.hp_bound_ok = bool(np.argmax(R) > 0.5 * len(R) or R[0] <= 0.5 * C1)
    return props


def composite_barrier(m: float, c: float, sol: BarrierSolution,
                      phi: GridFunction) -> GridFunction:
    """Nodewise m * H(c * phi(x)) by monotone interpolation of the samples."""
    if m <= 0 or c <= 0:
        raise ContractViolation("m and c must be positive")
    top = c * float(phi.values.max())
    if top > sol.b:
        raise RangeError(
            f"composition leaves the ODE domain: c*max(phi) = {top:.3g} > b = {sol.b}")
    H_of = sol.interpolator()
    return GridFunction(phi.grid, m * H_of(phi.values * c))


_LOG_KINDS = ("phi_logpow", "logpow_only", "phi_loglog")


def log_barrier(kind: str, phi: GridFunction, A_or_B: float,
                exponent_b: float) -> GridFunction:
    """Logarithmic barrier families built on the eigenfunction phi.

    phi_logpow:  phi * log(A/phi)**b        (vanishes on the boundary)
    logpow_only: log(B/phi)**b              (boundary trace 0 for b < 0)
    phi_loglog:  phi * log(log(A/phi))      (vanishes on the boundary)
    """
    if kind not in _LOG_KINDS:
        raise ContractViolation(f"unknown log barrier kind {kind!r}")
    grid = phi.grid
    mask = grid.interior_mask
    vals = phi.values
    pmax = float(vals[mask].max())
    A = float(A_or_B)

    if kind == "phi_logpow":
        if A <= math.e * pmax:
            raise PreconditionError(
                f"log(A/phi) > 1 fails: need A > e*max(phi) = {math.e * pmax:.6g}")
        out = np.zeros_like(vals)
        out[mask] = vals[mask] * np.log(A / vals[mask]) ** exponent_b
        return GridFunction(grid, out)

    if kind == "logpow_only":
        need = pmax * math.exp(2.0 * (1.0 - exponent_b))
        if A < need:
            raise PreconditionError(
                f"log(B/phi) >= 2(1-b) fails: need B >= {need:.6g}")
        if exponent_b > 0:
            raise PreconditionError(
                "logpow_only has an infinite boundary trace for b > 0")
        out = np.full_like(vals, 0.0 if exponent_b < 0 else 1.0)
        out[mask] = np.log(A / vals[mask]) ** exponent_b
        return GridFunction(grid, out)

    if A <= 6.0 * grid.domain.diameter:
        raise PreconditionError(
            f"A > 6*diam fails: need A > {6.0 * grid.domain.diameter:.6g}")
    if A <= math.e * pmax:
        raise PreconditionError(
            f"log(A/phi) > 1 fails: need A > e*max(phi) = {math.e * pmax:.6g}")
    out = np.zeros_like(vals)
    out[mask] = vals[mask] * np.log(np.log(A / vals[mask]))
    return GridFunction(grid, out)


def barrier_margin(spec: OperatorSpec, grid: Grid, w: GridFunction,
                   rhs: GridFunction, side: str) -> GridFunction:
    """Discrete sub/supersolution margin.

    side="sub": rhs - F_h(w); side="super": F_h(w) - rhs.  A nonnegative
    margin at every interior node certifies the discrete inequality.
    """
    if side not in ("sub", "super"):
        raise ContractViolation(f"side must be sub|super, got {side!r}")
    same_grid(w, rhs)
    disc = discretize(spec, grid, w).values
    margin = rhs.values - disc if side == "sub" else disc - rhs.values
    return GridFunction(grid, np.where(grid.interior_mask, margin, 0.0))
