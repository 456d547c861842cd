import numpy as np
import pytest
import scipy.optimize

from aspgm.metric import CurvaturePair
from aspgm.oracle import make_sample


def half_square(x):
    x = np.asarray(x, dtype=float)
    return 0.5 * float(x @ x), x.copy()


def sample_at(fun, x, geometry=None):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    f, g = fun(x)
    return make_sample(x, f, np.asarray(g, dtype=float), geometry)


class Quadratic:
    """``f(x) = 0.5 x'Hx + b'x`` with its minimizer."""

    def __init__(self, H, b):
        self.H = np.asarray(H, dtype=float)
        self.b = np.asarray(b, dtype=float)
        self.xstar = np.linalg.solve(self.H, -self.b)
        self.fstar = float(0.5 * self.xstar @ self.H @ self.xstar + self.b @ self.xstar)
        ev = np.linalg.eigvalsh(self.H)
        self.L = float(ev[-1])
        self.mu = float(ev[0])

    def __call__(self, x):
        Hx = self.H @ x
        return float(0.5 * x @ Hx + self.b @ x), Hx + self.b


def random_spd(rng, d, kappa=100.0):
    Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    ev = np.geomspace(1.0, kappa, d)
    return (Q * ev) @ Q.T


def random_quadratic(rng, d, kappa=100.0, scale=1.0):
    return Quadratic(scale * random_spd(rng, d, kappa), rng.standard_normal(d))


def random_pairs(rng, d, t, kappa=50.0):
    """Curvature pairs from an SPD matrix (always pass the curvature filter)."""
    H = random_spd(rng, d, kappa)
    out = []
    for _ in range(t):
        s = rng.standard_normal(d)
        out.append(CurvaturePair(s, H @ s))
    return out, H


def dense_bfgs(pairs):
    """Dense inverse-Hessian (B) and Hessian (B^{-1}) matrices from the BFGS recursion."""
    S = [np.asarray(p.s, dtype=float) for p in pairs]
    Y = [np.asarray(p.y, dtype=float) for p in pairs]
    d = S[0].shape[0]
    gamma = float(S[-1] @ Y[-1] / (Y[-1] @ Y[-1]))
    B = gamma * np.eye(d)
    Hm = np.eye(d) / gamma
    I = np.eye(d)
    for s, y in zip(S, Y):
        r = 1.0 / (s @ y)
        B = (I - r * np.outer(s, y)) @ B @ (I - r * np.outer(y, s)) + r * np.outer(s, s)
        Hs = Hm @ s
        Hm = Hm - np.outer(Hs, Hs) / (s @ Hs) + r * np.outer(y, y)
    return B, Hm


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def simplex_grid(n, steps):
    """All points of the simplex in R^n with coordinates in multiples of 1/steps."""
    if n == 1:
        return np.ones((1, 1))
    out = []

    def rec(prefix, left, k):
        if k == 1:
            out.append(prefix + [left])
            return
        for i in range(left + 1):
            rec(prefix + [i], left - i, k - 1)

    rec([], steps, n)
    return np.array(out, dtype=float) / steps


def ray_values(c, l, Q, delta, W):
    """Objective at the farthest feasible point along each row direction of ``W``."""
    A = 0.5 * np.einsum("ij,jk,ik->i", W, Q, W)
    B = W @ l
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(A > 0.0, (B + np.sqrt(np.maximum(B * B + 4.0 * A * delta, 0.0))) / (2.0 * A),
                     np.where(B >= 0.0, np.inf, -delta / np.where(B < 0.0, B, -1.0)))
    t = np.maximum(t, 0.0)
    return t * (W @ c)


def brute_force_max(c, l, Q, delta, steps=None, top=20):
    """Maximize ``c.u`` s.t. ``l.u + delta - u.Q.u/2 >= 0``, ``u >= 0`` by direction search.

    Every direction of a dense simplex grid is followed to the boundary
    exactly.  The best ``top`` directions are refined by shrinking random
    local grids, then by an SLSQP polish whose direction is again followed to
    the boundary, so every reported value is attained by a feasible point.
    Near-singular ``Q`` gives thin, sharply peaked optima that a grid alone
    misses.
    """
    n = len(c)
    if steps is None:
        steps = {1: 1, 2: 2000, 3: 120, 4: 40, 5: 20, 6: 14}.get(n, 10)
    W = simplex_grid(n, steps)
    vals = ray_values(c, l, Q, delta, W)
    rng = np.random.default_rng(0)
    best, best_w = -np.inf, None
    cons = [dict(type="ineq", fun=lambda x: l @ x + delta - 0.5 * x @ Q @ x,
                 jac=lambda x: l - Q @ x)]
    for i in np.argsort(-vals)[:top]:
        w, v = W[i], vals[i]
        h = 1.0 / steps
        for _ in range(8):
            cand = np.maximum(w + h * rng.uniform(-1.0, 1.0, size=(500, n)), 0.0)
            s = cand.sum(axis=1)
            cand = cand[s > 0] / s[s > 0, None]
            cv = ray_values(c, l, Q, delta, cand)
            j = int(np.argmax(cv))
            if cv[j] > v:
                w, v = cand[j], cv[j]
            h /= 3.0
        if not np.isfinite(v):
            return np.inf, w
        if v > 0.0:
            res = scipy.optimize.minimize(lambda x: -(c @ x) / v, w * (v / (w @ c)),
                                          jac=lambda x: -c / v, method="SLSQP",
                                          bounds=[(0.0, None)] * n, constraints=cons,
                                          options=dict(ftol=1e-16, maxiter=500))
            x = np.maximum(res.x, 0.0)
            if x.sum() > 0.0:
                wx = x / x.sum()
                vx = ray_values(c, l, Q, delta, wx[None, :])[0]
                if vx > v:
                    w, v = wx, vx
        if v > best:
            best, best_w = v, w
    return float(best), best_w


def capture_subproblems(fun, x0, L0, k, max_calls, geometry=None):
    """SubproblemData and solutions seen along one bundle-method run."""
    from aspgm import bspgm
    from aspgm.metric import IDENTITY

    seen = []
    bspgm.run(fun, x0, L0, k, max_calls=max_calls,
              geometry=IDENTITY if geometry is None else geometry,
              callback=lambda det: seen.append(det))
    return seen
