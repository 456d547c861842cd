"""Small dense kernels behind the induction subproblem.

Written in the numba-compatible subset of numpy; see :mod:`aspgm._jit`.
Each kernel is self-contained so the compiled version can be cached on disk.
The ``*_py`` originals stay importable so the kernel benchmark can time both
paths in one process.
"""
import math

import numpy as np

from ._jit import maybe_njit

OK = 0
STAGE_LIMIT = 1
BLOWUP = 2
NUMERICAL = 3


def ipm_maximize_py(c, l, Q, delta, u0, max_iter, tol, blowup):
    """Maximize ``c.u`` subject to ``u >= 0`` and ``l.u + delta - u.Q.u/2 >= 0``.

    Mehrotra predictor-corrector primal-dual interior point method.  ``u0``
    must be strictly feasible; every iterate stays strictly feasible.  Each
    Newton system is ``lam Q + diag(z/u) + (lam/s) gg gg^T``; the rank-one
    part is applied with Sherman-Morrison.  Returns ``(u, status, iterations)``
    where ``u`` is the feasible iterate with the largest objective seen: near a
    singular ``Q`` the Newton directions lose accuracy close to the boundary and
    later iterates can drift away from an optimum already reached.
    A linear solve that still fails propagates ``LinAlgError``.
    """
    n = u0.shape[0]
    u = u0.copy()
    sl = np.dot(l, u) + delta - 0.5 * np.dot(u, np.dot(Q, u))
    z = 1.0 / u
    lam = 1.0 / sl
    du = np.zeros(n)
    dz = np.zeros(n)
    dl = 0.0
    best = u.copy()
    best_obj = np.dot(c, u)
    for it in range(max_iter):
        Qu = np.dot(Q, u)
        sl = np.dot(l, u) + delta - 0.5 * np.dot(u, Qu)
        gg = Qu - l
        rd = -c + lam * gg - z
        mu = (np.dot(u, z) + lam * sl) / (n + 1.0)
        obj = np.dot(c, u)
        if obj > blowup:
            return u, BLOWUP, it
        if sl >= 0.0 and obj > best_obj:
            best[:] = u
            best_obj = obj
        if sl <= 0.0 or mu < 1e-15 or (mu < tol * max(1.0, obj) and np.max(np.abs(rd)) < 1e-6):
            return best, OK, it
        M = lam * Q
        # tiny proximal term keeps M invertible when duplicated columns of Q
        # are both interior at the optimum (z/u -> 0 on a null direction)
        reg = 1e-13 * lam * np.max(np.abs(np.diag(Q)))
        for i in range(n):
            M[i, i] += z[i] / u[i] + reg
        w = gg * math.sqrt(lam / sl)
        sig_mu = 0.0
        cu = np.zeros(n)
        cl = 0.0
        # pass 0: affine predictor; pass 1: centered corrector
        for corr in range(2):
            rc1 = u * z - sig_mu + cu
            rc2 = lam * sl - sig_mu + cl
            B = np.empty((n, 2))
            B[:, 0] = -rd - rc1 / u + gg * (rc2 / sl)
            B[:, 1] = w
            Y = np.linalg.solve(M, B)
            du = Y[:, 0] - Y[:, 1] * (np.dot(w, Y[:, 0]) / (1.0 + np.dot(w, Y[:, 1])))
            dz = -(rc1 + z * du) / u
            dl = (-rc2 + lam * np.dot(gg, du)) / sl
            a = 1.0
            for i in range(n):
                if du[i] < 0.0:
                    a = min(a, -u[i] / du[i])
                if dz[i] < 0.0:
                    a = min(a, -z[i] / dz[i])
            if dl < 0.0:
                a = min(a, -lam / dl)
            if corr == 1:
                a = min(1.0, 0.99 * a)
            ok = False
            for bt in range(60):
                ua = u + a * du
                if np.dot(l, ua) + delta - 0.5 * np.dot(ua, np.dot(Q, ua)) > 0.01 * sl:
                    ok = True
                    break
                a *= 0.5
            if corr == 0:
                ua = u + a * du
                sa = np.dot(l, ua) + delta - 0.5 * np.dot(ua, np.dot(Q, ua))
                mua = (np.dot(ua, z + a * dz) + (lam + a * dl) * sa) / (n + 1.0)
                sig_mu = (mua / mu) ** 3 * mu
                cu = du * dz
                cl = -dl * np.dot(gg, du)
        if not ok:
            return best, NUMERICAL, it
        u = u + a * du
        z = z + a * dz
        lam = lam + a * dl
    sl = np.dot(l, u) + delta - 0.5 * np.dot(u, np.dot(Q, u))
    if sl >= 0.0 and np.dot(c, u) > best_obj:
        best[:] = u
    return best, STAGE_LIMIT, max_iter


def project_simplex_py(v):
    """Euclidean projection onto ``{d >= 0, sum(d) = 1}``."""
    n = v.shape[0]
    srt = np.sort(v)[::-1]
    css = 0.0
    theta = 0.0
    for i in range(n):
        css += srt[i]
        cand = (css - 1.0) / (i + 1.0)
        if srt[i] - cand > 0.0:
            theta = cand
    out = v - theta
    for i in range(n):
        if out[i] < 0.0:
            out[i] = 0.0
    return out


def simplex_quad_min_py(Q, iters, thresh):
    """Accelerated projected gradient for ``min d.Q.d`` over the simplex.

    ``Q`` is a Gram matrix ``M^T M``.  For any ``d`` on the simplex,
    ``min_i (Q d)_i / sqrt(d.Q.d)`` is a lower bound on ``min |M d|`` (the
    min-norm-point duality), so the search stops early once that bound
    exceeds ``thresh``.  Returns ``(d, d.Q.d, proved)`` where ``proved``
    means the bound certified ``min |M d| > thresh``.
    """
    n = Q.shape[0]
    lmax = np.linalg.eigvalsh(Q)[-1]
    d = np.full(n, 1.0 / n)
    if lmax <= 0.0:
        return d, 0.0, False
    step = 1.0 / (2.0 * lmax)
    y = d.copy()
    tk = 1.0
    for k in range(iters):
        Qd = np.dot(Q, d)
        q = np.dot(d, Qd)
        if q > 0.0 and np.min(Qd) > thresh * math.sqrt(q):
            return d, q, True
        v = y - step * 2.0 * np.dot(Q, y)
        # inline simplex projection
        srt = np.sort(v)[::-1]
        css = 0.0
        theta = 0.0
        for i in range(n):
            css += srt[i]
            cand = (css - 1.0) / (i + 1.0)
            if srt[i] - cand > 0.0:
                theta = cand
        dn = v - theta
        for i in range(n):
            if dn[i] < 0.0:
                dn[i] = 0.0
        tn = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * tk * tk))
        y = dn + ((tk - 1.0) / tn) * (dn - d)
        d = dn
        tk = tn
    return d, np.dot(d, np.dot(Q, d)), False


ipm_maximize = maybe_njit(ipm_maximize_py)
project_simplex = maybe_njit(project_simplex_py)
simplex_quad_min = maybe_njit(simplex_quad_min_py)
