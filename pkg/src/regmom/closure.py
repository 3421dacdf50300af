"""Closures for the top-order moment coefficients, and first-order limits.

The truncated moment system retains f_alpha for |alpha| <= M; its transport
term needs f_beta at |beta| = M + 1.  Two closures are provided:

  * nonlinear: the gradient-and-flux expression obtained by keeping only the
    leading-magnitude terms of the once-iterated moment equation,

        f_beta = tau [ (1/rho) sum_j dp/dx_j f_{beta-e_j}
                       - sum_j theta d f_{beta-e_j}/dx_j ]
                 + (1/rho) sum_j sum_d [ sigma_dj f_{beta-e_d-e_j} / 2
                 + q_j (theta f_{beta-2e_d-e_j}
                        + (beta_j+1) f_{beta-2e_d+e_j}) / ((D+2) theta) ],

  * linear: its linearization about a velocity-free equilibrium,

        f_beta = - tau theta sum_j d f_{beta-e_j} / dx_j.

Coefficients with a negative index component are zero; spatial gradients are
supplied by the caller (the solver uses finite differences), which keeps both
closures pointwise.  Space is one-dimensional throughout (j = 1).

The stress subscript in the nonlinear expression is sigma_dj: the pair (d, j)
runs over the double sum, which is the only reading under which the
trace-free part of the velocity gradient recombines into the stress.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .indices import MomentLayout
from .state import MacroState, stress_heat


@dataclass
class GradientData:
    """x-derivatives of the local state (1D space).

    u_x[d] is du_d/dx; coeffs_x holds df_alpha/dx for every retained alpha in
    layout order.
    """

    rho_x: float
    u_x: np.ndarray
    theta_x: float
    coeffs_x: np.ndarray


def _get(layout: MomentLayout, values: np.ndarray, alpha) -> float:
    if any(c < 0 for c in alpha):
        return 0.0
    if not layout.contains(alpha):
        return 0.0
    return float(values[layout.ordinal(tuple(alpha))])


def closure_nonlinear(layout: MomentLayout, alpha, macro: MacroState,
                      coeffs: np.ndarray, grads: GradientData, tau: float) -> float:
    """Nonlinear closure value for one index alpha with |alpha| = M + 1."""
    alpha = tuple(alpha)
    D = layout.dim
    rho, theta = macro.rho, macro.theta
    sh = stress_heat(layout, coeffs, macro)
    p_x = grads.rho_x * theta + rho * grads.theta_x

    am1 = tuple(a - (d == 0) for d, a in enumerate(alpha))  # alpha - e_1
    val = tau * (p_x / rho * _get(layout, coeffs, am1)
                 - theta * _get(layout, grads.coeffs_x, am1))
    a1p1 = alpha[0] + 1
    for d in range(D):
        amd1 = tuple(a - (j == d) - (j == 0) for j, a in enumerate(alpha))
        am2d1 = tuple(a - 2 * (j == d) - (j == 0) for j, a in enumerate(alpha))
        am2dp1 = tuple(a - 2 * (j == d) + (j == 0) for j, a in enumerate(alpha))
        val += (0.5 * sh.sigma[d, 0] * _get(layout, coeffs, amd1)
                + sh.q[0] * (theta * _get(layout, coeffs, am2d1)
                             + a1p1 * _get(layout, coeffs, am2dp1))
                / ((D + 2) * theta)) / rho
    return val


def closure_linear(layout: MomentLayout, alpha, theta: float, tau: float,
                   coeffs_x: np.ndarray) -> float:
    """Linearized closure value: -tau theta d f_{alpha-e_1} / dx."""
    am1 = tuple(a - (d == 0) for d, a in enumerate(tuple(alpha)))
    return -tau * theta * _get(layout, coeffs_x, am1)


def nsf_limits(macro: MacroState, u_x: np.ndarray, theta_x: float, tau: float):
    """Leading-order stress and heat flux of the once-iterated system.

    q_k     = -((D+2)/2) tau rho theta dtheta/dx_k,
    sigma_ij = -2 tau rho theta du_<i/dx_j>   (trace-free symmetrized gradient),

    with fields varying along x_1 only.  Both laws carry the same transport
    coefficient tau rho theta, hence Prandtl number 1.
    """
    D = macro.dim
    u_x = np.asarray(u_x, dtype=float)
    grad = np.zeros((D, D))
    grad[:, 0] = u_x
    sym = 0.5 * (grad + grad.T)
    dev = sym - np.trace(sym) / D * np.eye(D)
    mu = tau * macro.rho * macro.theta
    sigma = -2.0 * mu * dev
    q = np.zeros(D)
    q[0] = -0.5 * (D + 2) * mu * theta_x
    return sigma, q


class TopOrderClosure:
    """Vectorized closure evaluation for the solver, one value per (cell/face, alpha).

    Enumerates the retained indices alpha with |alpha| = M; the closed index
    is beta = alpha + e_1 (indices beta with beta_1 = 0 never enter the 1D
    transport term).  Gather tables use the layout sentinel, so callers pass
    coefficient arrays padded with one zero column.
    """

    def __init__(self, layout: MomentLayout):
        self.layout = layout
        D = layout.dim
        K = layout.size
        sl = layout.grade(layout.order)
        self.ords = np.arange(sl.start, sl.stop, dtype=np.intp)
        alphas = [layout.unrank(k) for k in self.ords]
        self.a1 = np.array([a[0] for a in alphas], dtype=np.intp)
        self.transport_factor = (self.a1 + 1).astype(float)  # (alpha_1+1) in the flux
        self.beta1_plus1 = (self.a1 + 2).astype(float)       # (beta_1+1) in the closure

        def table(deltas):
            out = np.full((D, len(alphas)), K, dtype=np.intp)
            for d in range(D):
                for t, a in enumerate(alphas):
                    b = tuple(x + deltas(d, j) for j, x in enumerate(a))
                    if all(c >= 0 for c in b) and layout.contains(b):
                        out[d, t] = layout.ordinal(b)
            return out

        # beta - e_d - e_1 = alpha - e_d; beta - 2e_d - e_1 = alpha - 2e_d;
        # beta - 2e_d + e_1 = alpha + 2e_1 - 2e_d.
        self.t_sig = table(lambda d, j: -(j == d))
        self.t_qm = table(lambda d, j: -2 * (j == d))
        self.t_qp = table(lambda d, j: 2 * (j == 0) - 2 * (j == d))

    def linear(self, theta, tau, dfdx_pad):
        """-tau theta df_alpha/dx for each top alpha; dfdx_pad (..., K+1)."""
        return -(tau * theta)[..., None] * dfdx_pad[..., self.ords]

    def nonlinear(self, rho, theta, tau, p_x, coeffs_pad, dfdx_pad, sigma_d1, q1):
        """Full nonlinear closure; sigma_d1 (..., D) and q1 are local moments."""
        D = self.layout.dim
        val = tau[..., None] * (p_x[..., None] / rho[..., None] * coeffs_pad[..., self.ords]
                                - theta[..., None] * dfdx_pad[..., self.ords])
        qfac = q1[..., None] / ((D + 2) * theta[..., None] * rho[..., None])
        for d in range(D):
            val += 0.5 * sigma_d1[..., d, None] * coeffs_pad[..., self.t_sig[d]] / rho[..., None]
            val += qfac * (theta[..., None] * coeffs_pad[..., self.t_qm[d]]
                           + self.beta1_plus1 * coeffs_pad[..., self.t_qp[d]])
        return val
