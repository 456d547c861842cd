"""Inductive certificates for the optimized gradient method and its
backtracking variant.

Each iteration produces a weight ``tau_n``, a new iterate ``x_n`` and a dual
point ``z_{n+1}``.  The dual update uses the gradient at the new iterate, so a
step is split in two: :func:`ogm_update` / :func:`obl_update` return a
:class:`Step` holding ``x_n``, and ``Step.dual(g_n)`` finishes it once the
oracle has been queried at ``x_n``.

The certificate quantity

    U_n = tau_n (f* - f_n + |g_n|^2 / (2 L_n)) + L_n/2 |x0 - x*|^2
          - L_n/2 |z_{n+1} - x*|^2 + Delta_n

is nonnegative along a valid run (the gradient term is dropped on the final
step) and yields ``f_n - f* <= (L_n/2 |x0 - x*|^2 + Delta_n) / tau_n``.
"""
import math
from dataclasses import dataclass

import numpy as np

from .metric import IDENTITY, inner
from .oracle import OracleSample  # noqa: F401  (re-exported for convenience)


def ogm_tau(tau_hat, final_step=False):
    if final_step:
        return tau_hat + 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * tau_hat))
    return tau_hat + 1.0 + math.sqrt(1.0 + 2.0 * tau_hat)


def obl_tau(tau_hat, final_step=False):
    if final_step:
        return tau_hat + math.sqrt(tau_hat)
    return tau_hat + 0.5 * (1.0 + math.sqrt(1.0 + 8.0 * tau_hat))


@dataclass
class Step:
    """Primal half of an update; ``dual`` produces ``z_{n+1}``."""

    tau: float
    x: np.ndarray
    z_base: np.ndarray
    alpha: float
    L: float
    Delta: float = 0.0

    def dual(self, g_new):
        return self.z_base - (self.alpha / self.L) * g_new


def _combine(tau_hat, tau_n, x, g, z, L):
    if tau_n <= 0.0:
        raise ValueError("tau_n must be positive")
    alpha = tau_n - tau_hat
    x_n = (tau_hat / tau_n) * (x - g / L) + (alpha / tau_n) * z
    return x_n, alpha


def ogm_update(tau_hat, x, g, z, L, final_step=False):
    """OGM update from ``(tau_hat, x, g, z)``; ``g`` is the gradient at ``x``."""
    if L <= 0.0:
        raise ValueError("L must be positive")
    tau_n = ogm_tau(tau_hat, final_step)
    x_n, alpha = _combine(tau_hat, tau_n, x, g, z, L)
    return Step(tau=tau_n, x=x_n, z_base=np.asarray(z, dtype=float), alpha=alpha, L=L)


def obl_update(tau_hat, x, g, z, L, Delta_hat=0.0, delta_hat=0.0, final_step=False):
    """OBL update; the returned step carries ``Delta_n = Delta_hat + delta_hat``."""
    if L <= 0.0:
        raise ValueError("L must be positive")
    tau_n = obl_tau(tau_hat, final_step)
    x_n, alpha = _combine(tau_hat, tau_n, x, g, z, L)
    return Step(tau=tau_n, x=x_n, z_base=np.asarray(z, dtype=float), alpha=alpha, L=L,
                Delta=Delta_hat + delta_hat)


def backtrack_delta(L_prev, L_new, tau_prev, gnorm2_prev):
    """Slack added when the smoothness estimate grows from ``L_prev`` to ``L_new``."""
    return L_new * tau_prev * (1.0 / L_prev**2 - 1.0 / L_new**2) * 0.5 * gnorm2_prev


def W(si, sj):
    """``f_i - f_j - <g_j, x_i - x_j>_B`` for two oracle samples."""
    return si.f - sj.f - float(sj.g_raw @ (si.x - sj.x))


def Q(si, sj, L):
    """``W_{i,j} - |g_i - g_j|_B^2 / (2L)``; nonnegative under L-smoothness."""
    dg2 = float((si.g_raw - sj.g_raw) @ (si.g - sj.g))
    return W(si, sj) - dg2 / (2.0 * L)


def W_star(xstar, fstar, sj):
    """``f* - f_j - <g_j, x* - x_j>_B``; nonpositive for convex ``f``."""
    return fstar - sj.f - float(sj.g_raw @ (xstar - sj.x))


@dataclass
class Certificate:
    """State ``(tau_n, z_{n+1}, L_n, Delta_n)`` attached to an iterate."""

    tau: float
    z: np.ndarray
    L: float
    Delta: float = 0.0


def eval_U(cert, x0, xstar, fstar, sample, geometry=IDENTITY, final_step=False):
    """Evaluate the certificate quantity ``U_n`` at a probe ``(x*, f*)``."""
    val = cert.tau * (fstar - sample.f)
    if not final_step:
        val += cert.tau * sample.gnorm2 / (2.0 * cert.L)
    d0 = x0 - xstar
    dz = cert.z - xstar
    val += 0.5 * cert.L * (inner(d0, d0, geometry) - inner(dz, dz, geometry))
    return val + cert.Delta


def bound(cert, dist2, final_step=True, gnorm2=0.0):
    """Upper bound on ``f_n - f*`` implied by ``U_n >= 0``.

    ``dist2`` is ``|x0 - x*|_B^2``.  For a non-final step the bound applies to
    ``f_n - |g_n|^2/(2 L_n) - f*`` and the caller passes ``gnorm2`` to get the
    bound on ``f_n - f*`` itself.
    """
    b = (0.5 * cert.L * dist2 + cert.Delta) / cert.tau
    if not final_step:
        b += gnorm2 / (2.0 * cert.L)
    return b
