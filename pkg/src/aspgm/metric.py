"""Variable-metric geometry built from L-BFGS curvature pairs.

A geometry is a symmetric positive definite matrix ``B`` that is never formed.
``B`` approximates the inverse Hessian and is applied with the two-loop
recursion; ``B^{-1}`` is applied with the compact representation.  The working
inner product is ``<x, y>_B = <x, B^{-1} y>``, so the gradient in this geometry
is ``B @ grad`` and ``<g_B, u>_B`` reduces to the Euclidean ``<grad, u>``.
"""
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg

from .errors import IllConditionedMemory

CURVATURE_TOL = 1e-12
_MAX_COND = 1e14


@dataclass(frozen=True)
class CurvaturePair:
    s: np.ndarray
    y: np.ndarray


@dataclass(frozen=True, eq=False)
class Geometry:
    """Immutable L-BFGS geometry.

    ``S`` and ``Y`` have shape ``(t, d)`` with the newest pair last.  An
    empty memory (``t == 0``) is the Euclidean geometry.
    """

    S: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    Y: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))

    @property
    def t(self):
        return self.S.shape[0]

    @property
    def is_identity(self):
        return self.t == 0

    @cached_property
    def _sy(self):
        return np.einsum("ij,ij->i", self.S, self.Y)

    @cached_property
    def gamma(self):
        """Initial scaling ``s_t^T y_t / y_t^T y_t`` of the inverse Hessian."""
        if self.is_identity:
            return 1.0
        y = self.Y[-1]
        return float(self._sy[-1] / (y @ y))

    @cached_property
    def _compact(self):
        S, Y = self.S.T, self.Y.T
        theta = 1.0 / self.gamma
        SY = S.T @ Y
        low = np.tril(SY, -1)
        M = np.block([[theta * (S.T @ S), low], [low.T, -np.diag(np.diag(SY))]])
        if not np.all(np.isfinite(M)):
            raise IllConditionedMemory("non-finite compact middle matrix")
        cond = np.linalg.cond(M)
        if not np.isfinite(cond) or cond > _MAX_COND:
            raise IllConditionedMemory(f"compact middle matrix has condition {cond:.3g}")
        return theta, scipy.linalg.lu_factor(M)

    def apply_B(self, v):
        """Multiply by the inverse-Hessian approximation (two-loop recursion)."""
        if self.is_identity:
            return np.array(v, dtype=float, copy=True)
        q = np.array(v, dtype=float, copy=True)
        t = self.t
        rho = 1.0 / self._sy
        alpha = np.empty(t)
        for i in range(t - 1, -1, -1):
            alpha[i] = rho[i] * (self.S[i] @ q)
            q -= alpha[i] * self.Y[i]
        r = self.gamma * q
        for i in range(t):
            beta = rho[i] * (self.Y[i] @ r)
            r += (alpha[i] - beta) * self.S[i]
        return r

    def apply_B_inv(self, v):
        """Multiply by the Hessian approximation (compact representation)."""
        if self.is_identity:
            return np.array(v, dtype=float, copy=True)
        theta, lu = self._compact
        v = np.asarray(v, dtype=float)
        rhs = np.concatenate([theta * (self.S @ v), self.Y @ v])
        w = scipy.linalg.lu_solve(lu, rhs)
        t = self.t
        return theta * v - theta * (w[:t] @ self.S) - w[t:] @ self.Y

    def check(self):
        """Raise ``IllConditionedMemory`` now rather than on first use."""
        if not self.is_identity:
            self._compact
        return self


IDENTITY = Geometry()


def build_geometry(pairs, t):
    """Keep the newest ``t`` pairs passing the curvature filter.

    A pair is kept when ``s^T y > 1e-12 * |s| |y|``.  With no admissible pair
    the Euclidean geometry is returned.
    """
    kept = []
    for p in pairs:
        s = np.asarray(p.s, dtype=float)
        y = np.asarray(p.y, dtype=float)
        sy = s @ y
        if np.isfinite(sy) and sy > CURVATURE_TOL * np.linalg.norm(s) * np.linalg.norm(y):
            kept.append((s, y))
    kept = kept[-t:] if t > 0 else []
    if not kept:
        return IDENTITY
    S = np.array([s for s, _ in kept])
    Y = np.array([y for _, y in kept])
    return Geometry(S, Y)


def apply_B(geometry, v):
    return geometry.apply_B(v)


def apply_B_inv(geometry, v):
    return geometry.apply_B_inv(v)


def inner(x, y, geometry=IDENTITY):
    """``<x, y>_B = <x, B^{-1} y>``."""
    return float(np.asarray(x) @ geometry.apply_B_inv(y))


def norm2(x, geometry=IDENTITY):
    return inner(x, x, geometry)


def bregman_gap(a, b):
    """``f(b) - f(a) - <grad f(a), x_b - x_a>`` for two oracle samples."""
    return b.f - a.f - float(a.g_raw @ (b.x - a.x))


def local_L(a, b):
    """Smallest ``L`` for which the cocoercivity inequality holds between samples.

    Equals ``0.5 |g_a - g_b|_B^2 / (f_b - f_a - <g_a, x_b - x_a>_B)``.  Equal
    gradients give 0.  A non-positive gap with distinct gradients admits no
    finite constant and returns ``inf``.
    """
    num = 0.5 * float((a.g_raw - b.g_raw) @ (a.g - b.g))
    den = bregman_gap(a, b)
    if num <= 0.0:
        return 0.0
    if den <= 0.0:
        return np.inf
    return num / den


def local_mu(a, b, geometry=IDENTITY):
    """Largest ``mu`` for which strong convexity holds along the segment.

    Coincident points return ``inf`` (no information).
    """
    dx = b.x - a.x
    den = 0.5 * inner(dx, dx, geometry)
    num = bregman_gap(a, b)
    if den <= 0.0:
        return np.inf
    return num / den
