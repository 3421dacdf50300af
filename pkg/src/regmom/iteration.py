"""Relaxation-order analysis of the moment hierarchy on steady 1D fields.

Starting from a local equilibrium, the moment equations are applied as a
fixed-point sweep: every coefficient with |alpha| >= 2 is replaced by -tau
times the transport terms evaluated on the previous sweep, while density,
velocity and temperature stay fixed.  On steady manufactured fields the time
derivatives of the coefficients vanish, and du/dt, dtheta/dt follow from the
conservation laws with the current sweep's pressure tensor and heat flux.

Each sweep reveals one more power of tau: the order-of-magnitude law says
f_alpha = O(tau^ceil(|alpha|/3)) once enough sweeps have run, with support
growing three orders per sweep (f_alpha == 0 exactly for |alpha| >= 1 + 3n).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .indices import MomentLayout, pad_zero


def fd4(values: np.ndarray, dx: float) -> np.ndarray:
    """4th-order central difference along axis 0 of a periodic grid field."""
    f1 = np.roll(values, -1, axis=0)
    fm1 = np.roll(values, 1, axis=0)
    f2 = np.roll(values, -2, axis=0)
    fm2 = np.roll(values, 2, axis=0)
    return (8.0 * (f1 - fm1) - (f2 - fm2)) / (12.0 * dx)


@dataclass
class ManufacturedField:
    """Steady analytic (rho, u, theta) on a periodic interval, with derivatives."""

    dim: int
    rho: Callable[[np.ndarray], np.ndarray]
    rho_x: Callable[[np.ndarray], np.ndarray]
    u: Sequence[Callable[[np.ndarray], np.ndarray]]
    u_x: Sequence[Callable[[np.ndarray], np.ndarray]]
    theta: Callable[[np.ndarray], np.ndarray]
    theta_x: Callable[[np.ndarray], np.ndarray]
    period: float = 2.0 * math.pi

    def sample(self, n: int) -> "FieldSample":
        x = np.arange(n) * (self.period / n)
        u = np.stack([np.broadcast_to(f(x), x.shape) for f in self.u], axis=1)
        ux = np.stack([np.broadcast_to(f(x), x.shape) for f in self.u_x], axis=1)
        sample = FieldSample(
            x=x, dx=self.period / n, dim=self.dim,
            rho=np.asarray(self.rho(x), dtype=float),
            rho_x=np.broadcast_to(np.asarray(self.rho_x(x), dtype=float), x.shape),
            u=u.astype(float), u_x=ux.astype(float),
            theta=np.asarray(self.theta(x), dtype=float),
            theta_x=np.broadcast_to(np.asarray(self.theta_x(x), dtype=float), x.shape),
        )
        if np.any(sample.rho <= 0.0) or np.any(sample.theta <= 0.0):
            raise ValueError("manufactured field must keep rho > 0 and theta > 0")
        return sample


@dataclass
class FieldSample:
    x: np.ndarray
    dx: float
    dim: int
    rho: np.ndarray
    rho_x: np.ndarray
    u: np.ndarray      # (n, D)
    u_x: np.ndarray    # (n, D)
    theta: np.ndarray
    theta_x: np.ndarray


@dataclass
class IterationState:
    """Sweep counter plus all coefficients on the grid, shape (n, K)."""

    layout: MomentLayout
    coeffs: np.ndarray
    n: int


def maxwellian_iteration_state(sample: FieldSample, max_order: int = 10) -> IterationState:
    layout = MomentLayout(max_order, sample.dim)
    coeffs = np.zeros((sample.x.size, layout.size))
    coeffs[:, 0] = sample.rho
    return IterationState(layout=layout, coeffs=coeffs, n=0)


def _sigma_q_lon(layout: MomentLayout, coeffs: np.ndarray):
    """sigma_{i1} (n, D) and q_1 of a coefficient grid field."""
    D = layout.dim
    sig = np.empty(coeffs.shape[:-1] + (D,))
    for i in range(D):
        a = tuple((j == i) + (j == 0) for j in range(D))
        sig[..., i] = (2.0 if i == 0 else 1.0) * coeffs[..., layout.ordinal(a)]
    q1 = 2.0 * coeffs[..., layout.ordinal(tuple(3 * (j == 0) for j in range(D)))]
    for d in range(D):
        a = tuple(2 * (j == d) + (j == 0) for j in range(D))
        q1 = q1 + coeffs[..., layout.ordinal(a)]
    return sig, q1


def time_derivative_fields(state: IterationState, sample: FieldSample):
    """du/dt and dtheta/dt from the conservation laws on the current sweep.

    The material derivatives are closed with the sweep's own pressure tensor
    and heat flux (spatial variation along x_1 only).  Freezing these fields
    makes the sweep map linear in the coefficients.
    """
    lay = state.layout
    D = lay.dim
    rho, theta = sample.rho, sample.theta
    u1 = sample.u[:, 0]
    sig, _ = _sigma_q_lon(lay, state.coeffs)
    fx = fd4(state.coeffs, sample.dx)
    sig_x, q1_x = _sigma_q_lon(lay, fx)
    p_x = sample.rho_x * theta + rho * sample.theta_x
    dudt = np.empty_like(sample.u)
    for i in range(D):
        dudt[:, i] = -u1 * sample.u_x[:, i] - ((i == 0) * p_x + sig_x[:, i]) / rho
    p_i1 = sig.copy()
    p_i1[:, 0] += rho * theta
    dthdt = -u1 * sample.theta_x - (2.0 / (D * rho)) * (
        q1_x + (p_i1 * sample.u_x).sum(axis=1))
    return dudt, dthdt


def iterate_once(state: IterationState, sample: FieldSample, tau: float,
                 materials=None) -> IterationState:
    """One sweep of the fixed-point map f_alpha <- -tau G_alpha(previous).

    ``materials`` overrides the (du/dt, dtheta/dt) fields; by default they
    come from the current sweep via ``time_derivative_fields``.
    """
    lay = state.layout
    D = lay.dim
    f = state.coeffs
    fp = pad_zero(f)
    fx = fd4(f, sample.dx)
    fxp = pad_zero(fx)

    rho, theta = sample.rho, sample.theta
    u1 = sample.u[:, 0]
    a1p1 = (lay.components[:, 0] + 1).astype(float)
    dudt, dthdt = (time_derivative_fields(state, sample)
                   if materials is None else materials)

    def tab(delta):
        return lay.shift_table(tuple(delta))[:-1]

    e1 = lambda j: int(j == 0)
    G = theta[:, None] * fxp[:, tab([-e1(j) for j in range(D)])]
    G += u1[:, None] * fx
    G += a1p1 * fxp[:, tab([+e1(j) for j in range(D)])]
    G += 0.5 * dthdt[:, None] * sum(fp[:, tab([-2 * (j == d) for j in range(D)])]
                                    for d in range(D))
    for d in range(D):
        G += dudt[:, d, None] * fp[:, tab([-(j == d) for j in range(D)])]
        G += sample.u_x[:, d, None] * (
            theta[:, None] * fp[:, tab([-(j == d) - e1(j) for j in range(D)])]
            + u1[:, None] * fp[:, tab([-(j == d) for j in range(D)])]
            + a1p1 * fp[:, tab([-(j == d) + e1(j) for j in range(D)])])
        G += 0.5 * sample.theta_x[:, None] * (
            theta[:, None] * fp[:, tab([-2 * (j == d) - e1(j) for j in range(D)])]
            + u1[:, None] * fp[:, tab([-2 * (j == d) for j in range(D)])]
            + a1p1 * fp[:, tab([-2 * (j == d) + e1(j) for j in range(D)])])

    new = -tau * G
    # f_0 and f_{e_j} never appear on the left of the iteration.
    new[:, lay.orders < 2] = f[:, lay.orders < 2]
    return IterationState(layout=lay, coeffs=new, n=state.n + 1)


def run_iteration(sample: FieldSample, tau: float, sweeps: int,
                  max_order: int = 10) -> IterationState:
    state = maxwellian_iteration_state(sample, max_order)
    for _ in range(sweeps):
        state = iterate_once(state, sample, tau)
    return state


def predicted_exponent(alpha: tuple[int, ...]) -> int | None:
    """Leading power of tau carried by f_alpha, None for conserved indices.

    ceil(|alpha|/3) for |alpha| >= 4; for orders 2 and 3 the sweep-one closed
    forms give power 1, except the fully mixed third-order index e_i+e_j+e_k
    (distinct axes), which only appears at power 2.
    """
    order = sum(alpha)
    if order < 2:
        return None
    if order == 3 and max(alpha) == 1:
        return 2
    if order <= 3:
        return 1
    return math.ceil(order / 3)


@dataclass
class MagnitudeRow:
    alpha: tuple[int, ...]
    order: int
    predicted: int
    measured: float
    degenerate: bool


def magnitude_table(field: ManufacturedField, taus: Sequence[float],
                    sweeps: int = 3, max_order: int = 10, grid_n: int = 64,
                    report_order: int | None = None) -> list[MagnitudeRow]:
    """Least-squares tau-exponents of every moment against the predicted law.

    The moment norm is max |f_alpha| over the grid after ``sweeps`` sweeps.
    Moments that vanish identically on the field (exact zeros; cancellations
    or symmetries) are flagged degenerate and carry measured = nan.
    """
    taus = np.asarray(sorted(taus), dtype=float)
    sample = field.sample(grid_n)
    norms = []
    for tau in taus:
        state = run_iteration(sample, float(tau), sweeps, max_order)
        norms.append(np.abs(state.coeffs).max(axis=0))
    norms = np.array(norms)  # (ntau, K)
    layout = MomentLayout(max_order, field.dim)
    top = layout.order if report_order is None else report_order
    rows = []
    for k, alpha in enumerate(layout.indices):
        pred = predicted_exponent(alpha)
        if pred is None or sum(alpha) > top:
            continue
        col = norms[:, k]
        if np.all(col == 0.0):
            rows.append(MagnitudeRow(alpha, sum(alpha), pred, math.nan, True))
            continue
        slope = np.polyfit(np.log(taus), np.log(col), 1)[0]
        rows.append(MagnitudeRow(alpha, sum(alpha), pred, float(slope), False))
    return rows


def magnitude_exponent(alpha: tuple[int, ...], field: ManufacturedField,
                       taus: Sequence[float], sweeps: int | None = None,
                       max_order: int = 10, grid_n: int = 64):
    """(measured exponent, degenerate flag) for a single index."""
    alpha = tuple(alpha)
    if sweeps is None:
        sweeps = max(1, math.ceil(sum(alpha) / 3))
    rows = magnitude_table(field, taus, sweeps=sweeps, max_order=max_order,
                           grid_n=grid_n)
    for row in rows:
        if row.alpha == alpha:
            return row.measured, row.degenerate
    raise ValueError(f"{alpha} has no relaxation-order prediction")


@dataclass
class NSFReport:
    sigma_dev: float   # max relative deviation of sigma_{i1} from the limit law
    q_dev: float       # same for q_1
    scale: float


def nsf_check(field: ManufacturedField, tau: float, sweeps: int = 2,
              max_order: int = 6, grid_n: int = 64) -> NSFReport:
    """Compare sweep-``sweeps`` stress/heat flux with the first-order laws.

    After one sweep the match is exact; further sweeps add O(tau^2), so the
    deviation must shrink by ~4 under tau halving.
    """
    sample = field.sample(grid_n)
    state = run_iteration(sample, tau, sweeps, max_order)
    sig, q1 = _sigma_q_lon(state.layout, state.coeffs)
    D = field.dim
    mu = tau * sample.rho * sample.theta
    sig_ref = np.empty_like(sig)
    for i in range(D):
        dev = 0.5 * ((i == 0) * sample.u_x[:, i] + sample.u_x[:, i])
        if i == 0:
            dev -= sample.u_x[:, 0] / D
        sig_ref[:, i] = -2.0 * mu * dev
    q_ref = -0.5 * (D + 2) * mu * sample.theta_x
    # tau-free scale, so the deviation keeps both of its tau powers
    scale = float((sample.rho * sample.theta).max())
    return NSFReport(
        sigma_dev=float(np.abs(sig - sig_ref).max() / scale),
        q_dev=float(np.abs(q1 - q_ref).max() / scale),
        scale=scale,
    )


def _sin(a, w, p):
    return lambda x: a * np.sin(w * x + p)


def _dsin(a, w, p):
    return lambda x: a * w * np.cos(w * x + p)


def field_preset(name: str) -> ManufacturedField:
    """Named manufactured fields for studies and the CLI."""
    if name == "generic-3d":
        return ManufacturedField(
            dim=3,
            rho=lambda x: 1.0 + 0.2 * np.sin(x) + 0.05 * np.cos(2 * x),
            rho_x=lambda x: 0.2 * np.cos(x) - 0.1 * np.sin(2 * x),
            u=(_sin(0.2, 1, 0.3), _sin(0.15, 1, 1.1), _sin(0.1, 2, 2.4)),
            u_x=(_dsin(0.2, 1, 0.3), _dsin(0.15, 1, 1.1), _dsin(0.1, 2, 2.4)),
            theta=lambda x: 1.0 + 0.15 * np.cos(x + 0.7) + 0.05 * np.sin(2 * x + 0.1),
            theta_x=lambda x: -0.15 * np.sin(x + 0.7) + 0.1 * np.cos(2 * x + 0.1),
        )
    if name == "gentle-1d":
        return ManufacturedField(
            dim=1,
            rho=lambda x: 1.0 + 0.1 * np.sin(x),
            rho_x=lambda x: 0.1 * np.cos(x),
            u=(_sin(0.1, 1, 0.5),),
            u_x=(_dsin(0.1, 1, 0.5),),
            theta=lambda x: 1.0 + 0.1 * np.cos(x),
            theta_x=lambda x: -0.1 * np.sin(x),
        )
    if name == "isothermal-3d":
        zero = lambda x: np.zeros_like(x)
        return ManufacturedField(
            dim=3,
            rho=lambda x: 1.0 + 0.2 * np.sin(x),
            rho_x=lambda x: 0.2 * np.cos(x),
            u=(_sin(0.2, 1, 0.0), _sin(0.1, 1, 0.9), zero),
            u_x=(_dsin(0.2, 1, 0.0), _dsin(0.1, 1, 0.9), zero),
            theta=lambda x: np.ones_like(x),
            theta_x=zero,
        )
    raise ValueError(f"unknown field preset {name!r}")


FIELD_PRESETS = ("generic-3d", "gentle-1d", "isothermal-3d")
