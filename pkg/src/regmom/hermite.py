"""Probabilists' Hermite polynomials and Gauss quadrature for the unit Gaussian.

He_n is defined against the weight exp(-x^2/2):

    He_0(x) = 1,  He_1(x) = x,  He_{n+1}(x) = x He_n(x) - n He_{n-1}(x),

with He_n := 0 for n < 0.  The scaled basis function used by the moment
expansion is, per velocity dimension,

    (2 pi)^{-1/2} theta^{-(a+1)/2} He_a(v) exp(-v^2/2),

taken as a product over dimensions.  Evaluation is by the three-term
recursion, which is stable for the moderate degrees (<= ~20) needed here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import hermite_e


def he_eval(n: int, x):
    """He_n(x) by recursion; returns 0 for n < 0. Accepts scalars or arrays."""
    if n < 0:
        return np.zeros_like(np.asarray(x, dtype=float)) if np.ndim(x) else 0.0
    prev = np.ones_like(np.asarray(x, dtype=float)) if np.ndim(x) else 1.0
    if n == 0:
        return prev
    cur = np.asarray(x, dtype=float) if np.ndim(x) else float(x)
    for k in range(1, n):
        prev, cur = cur, x * cur - k * prev
    return cur


def he_table(nmax: int, x: np.ndarray) -> np.ndarray:
    """He_0..He_nmax at the points x, shape (nmax+1, len(x))."""
    x = np.asarray(x, dtype=float)
    out = np.empty((nmax + 1,) + x.shape)
    out[0] = 1.0
    if nmax >= 1:
        out[1] = x
    for k in range(1, nmax):
        out[k + 1] = x * out[k] - k * out[k - 1]
    return out


def he_derivative(n: int, x):
    """He_n'(x) = n He_{n-1}(x)."""
    if n <= 0:
        return np.zeros_like(np.asarray(x, dtype=float)) if np.ndim(x) else 0.0
    return n * he_eval(n - 1, x)


@lru_cache(maxsize=None)
def hermite_roots(n: int) -> np.ndarray:
    """Roots of He_n, ascending."""
    x, _ = hermite_e.hermegauss(n)
    x.setflags(write=False)
    return x


def max_characteristic_speed(order: int, u1: float, theta: float) -> float:
    """|u1| + c sqrt(theta) with c the largest root of He_{order+1}.

    This bounds the characteristic velocities of the order-M Hermite moment
    system linearized about the expansion frame (u, theta).
    """
    c = hermite_roots(order + 1)[-1]
    return abs(u1) + c * math.sqrt(theta)


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss rule for integrals against exp(-x^2/2)/sqrt(2 pi) on R.

    With n nodes the rule is exact for polynomials up to degree 2n - 1.
    Weights are normalized: integrate(1) == 1.
    """

    nodes: np.ndarray
    weights: np.ndarray

    @classmethod
    def gauss(cls, n: int = 40) -> "QuadratureRule":
        x, w = hermite_e.hermegauss(n)
        return cls(nodes=x, weights=w / math.sqrt(2.0 * math.pi))

    def integrate(self, values: np.ndarray) -> float:
        """Sum of values(nodes) * weights along the last axis."""
        return np.asarray(values) @ self.weights


def basis_weight(theta: float, alpha: tuple[int, ...], v) -> float:
    """Scaled Hermite basis value at the scaled velocity v in R^D.

    prod_d (2 pi)^{-1/2} theta^{-(alpha_d+1)/2} He_{alpha_d}(v_d) exp(-v_d^2/2);
    zero when any component of alpha is negative.
    """
    if theta <= 0.0:
        raise ValueError(f"theta must be positive, got {theta}")
    alpha = tuple(alpha)
    if any(a < 0 for a in alpha):
        return 0.0
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if v.shape[-1] != len(alpha):
        raise ValueError(f"velocity has {v.shape[-1]} components, alpha has {len(alpha)}")
    out = 1.0
    for a, vd in zip(alpha, v):
        out *= (theta ** (-(a + 1) / 2.0) * he_eval(a, vd)
                * math.exp(-0.5 * vd * vd) / math.sqrt(2.0 * math.pi))
    return float(out)
