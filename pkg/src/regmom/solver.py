"""1-D finite-volume integrator for the regularized moment system.

One time step is a Lie splitting of three substeps:

  (a) hyperbolic transport.  In a frame with fixed (u, theta) the moment
      system is conservative with per-coefficient flux

          F_alpha = theta f_{alpha-e_1} + u_1 f_alpha + (alpha_1+1) f_{alpha+e_1},

      the coefficient ladder of multiplication by xi_1.  At each interface
      both neighbor states are re-expanded in the shared arithmetic-mean
      frame, a local Lax-Friedrichs flux is formed with wavespeed bound
      |u_1| + c_{M+1} sqrt(theta) (c_{M+1} the largest Hermite root), and the
      flux vector is re-expanded into each neighbor's frame for the update.
      Re-expansion preserves the conserved moments, so mass, momentum and
      energy telescope exactly across interfaces.  After the update the cell
      frame is moved to match the new conserved moments.

  (b) top-order regularization.  The closure value for the order-(M+1)
      coefficients enters only through (alpha_1+1) d f_{alpha+e_1} / dx on
      the top retained order; with the linear closure this is a diffusion
      with coefficient (alpha_1+1) tau theta per coefficient.  The stiff
      diffusive core is integrated either explicitly (with the dt bound
      below) or by backward Euler ("implicit"); mode "auto" picks implicit
      whenever diffusion, not advection, would limit the explicit step.  The
      extra terms of the nonlinear closure are never stiff and are always
      explicit.

  (c) BGK relaxation, exact in the local frame: every coefficient of order
      >= 2 decays by exp(-dt/tau) in total; conserved moments are untouched.
      The decay is applied as two half-steps bracketing the transport
      (a symmetrized placement): a trailing full decay biases the stress and
      heat flux low by dt/(2 tau) relative, which buries the O(tau^2)
      transport-limit deviation the acceptance checks measure, while the
      bracketed form leaves only an O((dt/tau)^2) bias.

The explicit time step is dt = CFL * min(dx / max wavespeed,
dx^2 / (2 max (M+1) tau theta)); the implicit mode drops the second bound.
Breakdown (non-positive density or temperature after recovery) raises, with
the offending cell and time; no limiter masks it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .hermite import hermite_roots
from .indices import MomentLayout, pad_zero
from .closure import TopOrderClosure
from .scenarios import Scenario, TauModel
from .state import (UnphysicalStateError, conserved_from_coeffs, enforce_constraints,
                    macro_from_conserved, project_coeffs, sigma11_q1)


class SolverBreakdown(RuntimeError):
    """Unphysical cell state; carries the cell index and time of failure."""

    def __init__(self, message: str, cell: int, time: float):
        super().__init__(f"{message} (cell {cell}, t = {time:.6g})")
        self.cell = cell
        self.time = time


@dataclass
class SolverConfig:
    """Numerical parameters of a run."""

    order: int
    dim: int
    n_cells: int
    x_lo: float
    x_hi: float
    kn: float
    tau_model: TauModel
    cfl: float = 0.95
    closure: str = "linear"        # or "nonlinear"
    boundary: str = "farfield"     # or "periodic"
    diffusion: str = "auto"        # "explicit" | "implicit" | "auto"
    t_stop: float | None = None
    steady_tol: float | None = None
    steady_interval: float = 1.0
    t_max: float = 400.0
    ghost_left: tuple | None = None    # (rho, u vec, theta)
    ghost_right: tuple | None = None

    def __post_init__(self):
        if self.order < 3:
            raise ValueError(f"moment order must be >= 3, got {self.order}")
        if not 0.0 < self.cfl <= 1.0:
            raise ValueError(f"CFL must lie in (0, 1], got {self.cfl}")
        if self.closure not in ("linear", "nonlinear"):
            raise ValueError(f"unknown closure {self.closure!r}")
        if self.diffusion not in ("auto", "explicit", "implicit"):
            raise ValueError(f"unknown diffusion mode {self.diffusion!r}")
        if self.boundary not in ("farfield", "periodic"):
            raise ValueError(f"unknown boundary {self.boundary!r}")
        if self.boundary == "farfield" and (self.ghost_left is None or self.ghost_right is None):
            raise ValueError("far-field boundary needs ghost states")

    @classmethod
    def from_scenario(cls, scenario: Scenario, order: int, n_cells: int | None = None,
                      **overrides) -> "SolverConfig":
        kw = dict(
            order=order, dim=scenario.dim,
            n_cells=scenario.default_cells if n_cells is None else n_cells,
            x_lo=scenario.x_lo, x_hi=scenario.x_hi, kn=scenario.kn,
            tau_model=scenario.tau_model, boundary=scenario.boundary,
            t_stop=scenario.t_stop, steady_tol=scenario.steady_tol,
            t_max=scenario.t_max,
        )
        if scenario.far_fields is not None:
            kw["ghost_left"], kw["ghost_right"] = scenario.far_fields
        kw.update(overrides)
        return cls(**kw)


@dataclass
class SimState:
    """Per-cell frames and coefficients on a uniform mesh, plus diagnostics."""

    layout: MomentLayout
    x: np.ndarray
    dx: float
    rho: np.ndarray      # (n,)
    u: np.ndarray        # (n, D)
    theta: np.ndarray    # (n,)
    coeffs: np.ndarray   # (n, K), local-frame expansion coefficients
    t: float = 0.0
    steps: int = 0
    last_dt: float = 0.0
    dt_min: float = math.inf
    dt_max: float = 0.0
    max_speed: float = 0.0
    residual: float = math.inf
    boundary_account: np.ndarray = field(default_factory=lambda: np.zeros(1))

    def conserved_totals(self) -> np.ndarray:
        """(mass, momentum_1..D, energy) integrated over the domain."""
        D = self.u.shape[1]
        tot = np.empty(D + 2)
        tot[0] = self.rho.sum() * self.dx
        tot[1:1 + D] = (self.rho[:, None] * self.u).sum(axis=0) * self.dx
        tot[-1] = (0.5 * self.rho * (self.u ** 2).sum(axis=1)
                   + 0.5 * D * self.rho * self.theta).sum() * self.dx
        return tot


def make_state(scenario: Scenario, cfg: SolverConfig) -> SimState:
    """Equilibrium initial state: cell-centered macro fields, Maxwellian coefficients."""
    layout = MomentLayout(cfg.order, cfg.dim)
    n = cfg.n_cells
    dx = (cfg.x_hi - cfg.x_lo) / n
    x = cfg.x_lo + (np.arange(n) + 0.5) * dx
    rho = np.asarray(scenario.rho0(x), dtype=float)
    u = np.asarray(scenario.u0(x), dtype=float).reshape(n, cfg.dim)
    theta = np.asarray(scenario.theta0(x), dtype=float)
    coeffs = np.zeros((n, layout.size))
    coeffs[:, 0] = rho
    state = SimState(layout=layout, x=x, dx=dx, rho=rho, u=u, theta=theta,
                     coeffs=coeffs)
    state.boundary_account = np.zeros(cfg.dim + 2)
    return state


def flux_coefficients(layout: MomentLayout, coeffs: np.ndarray, u1, theta,
                      top_values: np.ndarray | None = None) -> np.ndarray:
    """Coefficient flux in a fixed frame (u1, theta).

    Multiplication by xi_1 maps coefficients to
    theta f_{alpha-e_1} + u_1 f_alpha + (alpha_1+1) f_{alpha+e_1}; the
    order-(M+1) coefficients default to zero (Grad truncation) unless
    ``top_values`` supplies them for the top retained order, aligned with the
    |alpha| = M slice.
    """
    D = layout.dim
    e1 = tuple(1 if j == 0 else 0 for j in range(D))
    me1 = tuple(-c for c in e1)
    fp = pad_zero(coeffs)
    a1p1 = (layout.components[:, 0] + 1).astype(float)
    u1 = np.asarray(u1, dtype=float)
    theta = np.asarray(theta, dtype=float)
    F = (theta[..., None] * fp[..., layout.shift_table(me1)[:-1]]
         + u1[..., None] * coeffs
         + a1p1 * fp[..., layout.shift_table(e1)[:-1]])
    if top_values is not None:
        sl = layout.grade(layout.order)
        F[..., sl] += (layout.components[sl, 0] + 1) * top_values
    return F


def _extend(cfg: SolverConfig, layout: MomentLayout, rho, u, theta, coeffs):
    """State arrays with one ghost cell on each side."""
    if cfg.boundary == "periodic":
        sel_l, sel_r = -1, 0
        rho_e = np.concatenate([rho[[sel_l]], rho, rho[[sel_r]]])
        u_e = np.concatenate([u[[sel_l]], u, u[[sel_r]]], axis=0)
        th_e = np.concatenate([theta[[sel_l]], theta, theta[[sel_r]]])
        co_e = np.concatenate([coeffs[[sel_l]], coeffs, coeffs[[sel_r]]], axis=0)
        return rho_e, u_e, th_e, co_e
    gl, gr = cfg.ghost_left, cfg.ghost_right
    K = layout.size
    co_l = np.zeros((1, K))
    co_l[0, 0] = gl[0]
    co_r = np.zeros((1, K))
    co_r[0, 0] = gr[0]
    rho_e = np.concatenate([[gl[0]], rho, [gr[0]]])
    u_e = np.concatenate([np.asarray(gl[1], dtype=float)[None, :], u,
                          np.asarray(gr[1], dtype=float)[None, :]], axis=0)
    th_e = np.concatenate([[gl[2]], theta, [gr[2]]])
    co_e = np.concatenate([co_l, coeffs, co_r], axis=0)
    return rho_e, u_e, th_e, co_e


def _solve_banded_tridiag(lower, diag, upper, rhs):
    from scipy.linalg import solve_banded
    n = diag.shape[0]
    ab = np.zeros((3, n))
    ab[0, 1:] = upper[:-1]
    ab[1] = diag
    ab[2, :-1] = lower[1:]
    return solve_banded((1, 1), ab, rhs)


def _solve_cyclic_tridiag(lower, diag, upper, corner_tr, corner_bl, rhs):
    """Sherman-Morrison reduction of a cyclic tridiagonal system."""
    n = diag.shape[0]
    gamma = -diag[0]
    d = diag.copy()
    d[0] -= gamma
    d[-1] -= corner_tr * corner_bl / gamma
    y = _solve_banded_tridiag(lower, d, upper, rhs)
    uvec = np.zeros(n)
    uvec[0] = gamma
    uvec[-1] = corner_bl
    z = _solve_banded_tridiag(lower, d, upper, uvec)
    vy = y[0] + corner_tr / gamma * y[-1]
    vz = z[0] + corner_tr / gamma * z[-1]
    return y - np.outer(z, np.atleast_1d(vy / (1.0 + vz))).reshape(y.shape)


def _regularize(cfg: SolverConfig, layout: MomentLayout, top: TopOrderClosure,
                dx: float, dt: float, explicit: bool,
                rho, u, theta, tau, coeffs) -> None:
    """Substep (b): apply the top-order closure as a flux on |alpha| = M."""
    rho_e, u_e, th_e, co_e = _extend(cfg, layout, rho, u, theta, coeffs)
    dfdx = (co_e[1:] - co_e[:-1]) / dx                      # (n+1, K) face gradients
    dfdx_p = pad_zero(dfdx)
    rho_f = 0.5 * (rho_e[:-1] + rho_e[1:])
    th_f = 0.5 * (th_e[:-1] + th_e[1:])
    tau_f = cfg.tau_model.tau(cfg.kn, rho_f, th_f)

    c_lin = top.linear(th_f, tau_f, dfdx_p)                 # (n+1, n_top)
    if cfg.closure == "nonlinear":
        p_e = rho_e * th_e
        p_x = (p_e[1:] - p_e[:-1]) / dx
        co_f = 0.5 * (co_e[:-1] + co_e[1:])
        sig_cells, q1_cells = _sigma_d1_q1(layout, co_e)
        sig_f = 0.5 * (sig_cells[:-1] + sig_cells[1:])
        q1_f = 0.5 * (q1_cells[:-1] + q1_cells[1:])
        c_full = top.nonlinear(rho_f, th_f, tau_f, p_x, pad_zero(co_f), dfdx_p,
                               sig_f, q1_f)
    else:
        c_full = c_lin

    sl = layout.grade(layout.order)
    if explicit:
        coeffs[:, sl] -= dt / dx * top.transport_factor * (c_full[1:] - c_full[:-1])
        return

    # Backward Euler on the diffusive core; the nonlinear remainder (if any)
    # is non-stiff and goes in explicitly first.
    if cfg.closure == "nonlinear":
        rest = c_full - c_lin
        coeffs[:, sl] -= dt / dx * top.transport_factor * (rest[1:] - rest[:-1])
    kappa_f = tau_f * th_f                                   # (n+1,)
    n = coeffs.shape[0]
    for a1 in np.unique(top.a1):
        cols = top.ords[top.a1 == a1]
        g = dt * (a1 + 1) / dx**2
        lower = -g * kappa_f[:-1]
        upper = -g * kappa_f[1:]
        diag = 1.0 + g * (kappa_f[:-1] + kappa_f[1:])
        rhs = coeffs[:, cols]
        if cfg.boundary == "periodic":
            # ghost faces coincide: corner couplings close the ring
            sol = _solve_cyclic_tridiag(lower, diag, upper, lower[0], upper[-1], rhs)
        else:
            # far-field ghosts hold equilibrium: Dirichlet zero on |alpha| = M
            sol = _solve_banded_tridiag(lower, diag, upper, rhs)
        coeffs[:, cols] = sol


def _sigma_d1_q1(layout: MomentLayout, coeffs: np.ndarray):
    """(sigma_{d1})_d and q_1 per row of a coefficient array."""
    D = layout.dim
    sig = np.empty(coeffs.shape[:-1] + (D,))
    for d in range(D):
        a = tuple((j == d) + (j == 0) for j in range(D))
        sig[..., d] = (2.0 if d == 0 else 1.0) * coeffs[..., layout.ordinal(a)]
    _, q1 = sigma11_q1(layout, coeffs)
    return sig, q1


def step(state: SimState, cfg: SolverConfig, dt_limit: float | None = None) -> float:
    """Advance the state by one time step in place; returns dt taken."""
    lay = state.layout
    D = lay.dim
    n = state.rho.shape[0]
    dx = state.dx

    c_top = hermite_roots(cfg.order + 1)[-1]
    lam = np.abs(state.u[:, 0]) + c_top * np.sqrt(state.theta)
    tau = np.asarray(cfg.tau_model.tau(cfg.kn, state.rho, state.theta), dtype=float)
    dt_adv = dx / lam.max()
    kappa_max = (cfg.order + 1) * float((tau * state.theta).max())
    dt_diff = 0.5 * dx**2 / kappa_max
    explicit = cfg.diffusion == "explicit" or (cfg.diffusion == "auto" and dt_diff >= dt_adv)
    dt = cfg.cfl * (min(dt_adv, dt_diff) if explicit else dt_adv)
    if dt_limit is not None:
        dt = min(dt, dt_limit)
    state.max_speed = float(lam.max())

    # --- (c) leading half of the relaxation --------------------------------
    cols = lay.orders >= 2
    state.coeffs[:, cols] *= np.exp(-0.5 * dt / tau)[:, None]

    # --- (a) hyperbolic transport in shared interface frames -------------
    rho_e, u_e, th_e, co_e = _extend(cfg, lay, state.rho, state.u, state.theta,
                                     state.coeffs)
    u_f = 0.5 * (u_e[:-1] + u_e[1:])            # (n+1, D)
    th_f = 0.5 * (th_e[:-1] + th_e[1:])
    gl = project_coeffs(lay, co_e[:-1], u_f - u_e[:-1], th_f - th_e[:-1])
    gr = project_coeffs(lay, co_e[1:], u_f - u_e[1:], th_f - th_e[1:])
    fl = flux_coefficients(lay, gl, u_f[:, 0], th_f)
    fr = flux_coefficients(lay, gr, u_f[:, 0], th_f)
    # substep (a) transports with the frozen interface-frame flux, a linear
    # system whose extreme characteristic speed is exactly this bound
    lam_f = np.abs(u_f[:, 0]) + c_top * np.sqrt(th_f)
    phi = 0.5 * (fl + fr) - 0.5 * lam_f[:, None] * (gr - gl)

    # conserved fluxes through the domain boundaries, for the books
    bm, bp, be = conserved_from_coeffs(lay, phi[[0, -1]], u_f[[0, -1]], th_f[[0, -1]])
    bflux = np.concatenate([bm[:, None], bp, be[:, None]], axis=1)  # (2, D+2)
    state.boundary_account += dt * (bflux[0] - bflux[1])

    phi_r = project_coeffs(lay, phi[1:], state.u - u_f[1:], state.theta - th_f[1:])
    phi_l = project_coeffs(lay, phi[:-1], state.u - u_f[:-1], state.theta - th_f[:-1])
    state.coeffs -= dt / dx * (phi_r - phi_l)

    # --- conserved recovery and frame move --------------------------------
    rho_new, mom, energy = conserved_from_coeffs(lay, state.coeffs, state.u,
                                                 state.theta)
    internal = energy - 0.5 * (mom * mom).sum(axis=1) / rho_new
    bad = (rho_new <= 0.0) | (internal <= 0.0)
    if bad.any():
        cell = int(np.argmax(bad))
        raise SolverBreakdown("negative density or temperature after transport",
                              cell, state.t)
    u_new, th_new = macro_from_conserved(rho_new, mom, energy, dim=D)
    state.coeffs = project_coeffs(lay, state.coeffs, u_new - state.u,
                                  th_new - state.theta)
    enforce_constraints(lay, state.coeffs, rho_new)
    state.rho, state.u, state.theta = rho_new, u_new, th_new

    # --- (b) top-order regularization -------------------------------------
    tau = np.asarray(cfg.tau_model.tau(cfg.kn, state.rho, state.theta), dtype=float)
    top = _top_closure(lay)
    _regularize(cfg, lay, top, dx, dt, explicit, state.rho, state.u, state.theta,
                tau, state.coeffs)

    # --- (c) trailing half of the relaxation --------------------------------
    state.coeffs[:, cols] *= np.exp(-0.5 * dt / tau)[:, None]

    state.t += dt
    state.steps += 1
    state.last_dt = dt
    state.dt_min = min(state.dt_min, dt)
    state.dt_max = max(state.dt_max, dt)
    return dt


_TOP_CACHE: dict[tuple[int, int], TopOrderClosure] = {}


def _top_closure(layout: MomentLayout) -> TopOrderClosure:
    key = (layout.order, layout.dim)
    top = _TOP_CACHE.get(key)
    if top is None or top.layout is not layout:
        top = TopOrderClosure(layout)
        _TOP_CACHE[key] = top
    return top


def run(state: SimState, cfg: SolverConfig) -> SimState:
    """Integrate to t_stop, or to a steady density profile, whichever applies.

    The steady criterion is the L1 density change per unit time between
    checkpoints spaced ``steady_interval`` apart, compared against
    ``steady_tol``; ``t_max`` caps steady-state searches.
    """
    eps = 1e-12
    t_end = cfg.t_stop if cfg.t_stop is not None else cfg.t_max
    check_t = state.t + cfg.steady_interval
    prev_rho = state.rho.copy()
    prev_t = state.t
    while state.t < t_end - eps:
        limit = t_end - state.t
        if cfg.steady_tol is not None:
            limit = min(limit, check_t - state.t)
        step(state, cfg, dt_limit=limit)
        if cfg.steady_tol is not None and state.t >= check_t - eps:
            span = state.t - prev_t
            state.residual = float(np.abs(state.rho - prev_rho).sum() * state.dx / span)
            if state.residual < cfg.steady_tol:
                break
            prev_rho = state.rho.copy()
            prev_t = state.t
            check_t = state.t + cfg.steady_interval
    return state
