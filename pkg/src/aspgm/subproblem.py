"""The small convex program that picks the next certificate.

Given a memory of past iterates, the method looks for nonnegative weights
``rho`` (on earlier certificates) and ``gamma`` (on gradient inequalities)
that maximize the combined weight ``<rho, tau> + sum(gamma)`` while keeping
the aggregated slack

    eps(rho, gamma) = <rho, a> + <gamma, b> + delta - L/2 |Z rho - G gamma|_B^2

nonnegative.  Everything is expressed through Gram matrices of the stored
vectors, so the program has ``2k`` variables regardless of the dimension.

Memory layout: for every entry we keep ``x_i``, the raw gradient and
``z_{i+1} - x0`` (three vectors) plus the pairwise inner products in the
current geometry.  Inner products involving gradients reduce to Euclidean
ones; the ``z``-``z`` block needs one application of ``B^{-1}`` per new entry.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import EmptyBundle
from .metric import IDENTITY

OPTIMAL = "Optimal"
FALLBACK = "Fallback"
UNBOUNDED = "Unbounded"

# Interior point settings.
IPM_MAX_ITER = 200
IPM_TOL = 1e-11
BLOWUP = 1e12
# Unbounded-direction search.
RAY_ITERS = 200
RAY_TOL = 1e-10
SLACK_TOL = 1e-10


@dataclass
class HistoryEntry:
    x: np.ndarray
    f: float
    g_raw: np.ndarray
    tau: float
    dz: np.ndarray  # z_{i+1} - x0
    L: float
    Delta: float
    index: int = 0
    kind: str = "serious"
    # cached scalars in the current geometry
    zz: float = 0.0      # |z_{i+1} - x0|_B^2
    gnorm2: float = 0.0  # |g_i|_B^2
    gdx: float = 0.0     # <g_i, x_i - x0>_B


class Memory:
    """Bounded store of history entries with incrementally maintained Gram blocks.

    ``ZZ[i, j] = <dz_i, dz_j>_B``, ``GG[i, j] = <g_i, g_j>_B`` and
    ``ZG[i, j] = <dz_i, g_j>_B``.
    """

    def __init__(self, x0, k, geometry=IDENTITY):
        if k < 1:
            raise ValueError("memory size must be at least 1")
        self.x0 = np.asarray(x0, dtype=float)
        self.k = k
        self.geometry = geometry
        self.entries = []
        self.ZZ = np.zeros((0, 0))
        self.GG = np.zeros((0, 0))
        self.ZG = np.zeros((0, 0))

    def __len__(self):
        return len(self.entries)

    def _grow(self, M, row, col, diag):
        n = M.shape[0]
        out = np.empty((n + 1, n + 1))
        out[:n, :n] = M
        out[n, :n] = row
        out[:n, n] = col
        out[n, n] = diag
        return out

    def add(self, sample, tau, z, L, Delta, index=0, kind="serious"):
        """Append an entry built from an oracle sample and its certificate.

        Applies the eviction rule and returns the list index that was
        evicted (or ``None``).
        """
        x0 = self.x0
        dz = np.asarray(z, dtype=float) - x0
        g_raw = sample.g_raw
        g_B = sample.g
        w = dz if self.geometry.is_identity else self.geometry.apply_B_inv(dz)
        old = self.entries
        if old:
            DZ = np.array([e.dz for e in old])
            Graw = np.array([e.g_raw for e in old])
            zz_row = DZ @ w
            gg_row = Graw @ g_B
            zg_new_old = Graw @ dz       # <dz_new, g_j>
            zg_old_new = DZ @ g_raw      # <dz_j, g_new>
        else:
            zz_row = gg_row = zg_new_old = zg_old_new = np.zeros(0)
        entry = HistoryEntry(
            x=sample.x, f=sample.f, g_raw=g_raw, tau=tau, dz=dz, L=L, Delta=Delta,
            index=index, kind=kind, zz=float(dz @ w), gnorm2=sample.gnorm2,
            gdx=float(g_raw @ (sample.x - x0)),
        )
        self.ZZ = self._grow(self.ZZ, zz_row, zz_row, entry.zz)
        self.GG = self._grow(self.GG, gg_row, gg_row, entry.gnorm2)
        self.ZG = self._grow(self.ZG, zg_new_old, zg_old_new, float(dz @ g_raw))
        self.entries.append(entry)
        if len(self.entries) > self.k:
            drop = eviction_index([e.tau for e in self.entries])
            self._remove(drop)
            return drop
        return None

    def _remove(self, i):
        del self.entries[i]
        keep = np.arange(self.ZZ.shape[0]) != i
        self.ZZ = self.ZZ[np.ix_(keep, keep)]
        self.GG = self.GG[np.ix_(keep, keep)]
        self.ZG = self.ZG[np.ix_(keep, keep)]

    def recompute(self):
        """Gram blocks recomputed from scratch (used to audit the caches)."""
        geo = self.geometry
        DZ = np.array([e.dz for e in self.entries])
        Graw = np.array([e.g_raw for e in self.entries])
        GB = np.array([geo.apply_B(g) for g in Graw])
        W = np.array([geo.apply_B_inv(v) for v in DZ])
        return DZ @ W.T, Graw @ GB.T, DZ @ Graw.T


def eviction_index(taus):
    """Oldest entry, unless it is the only one with ``tau > 0``.

    When the oldest entry is the unique positive-weight entry and every newer
    entry is a null step, the second-oldest is dropped instead so the last
    serious certificate survives.
    """
    if len(taus) >= 2 and taus[0] > 0 and all(t <= 0 for t in taus[1:]):
        return 1
    return 0


def update_memory(memory, sample, tau, z, L, Delta, index=0, kind="serious"):
    return memory.add(sample, tau, z, L, Delta, index=index, kind=kind)


def select_indices(memory, L_n):
    """Return ``(m, s)``: the best entry by ``f_i - |g_i|^2/(2 L_n)`` and the
    most recent positive-weight entry, both restricted to ``tau_i > 0``.
    Ties for ``m`` go to the smallest index."""
    J = [i for i, e in enumerate(memory.entries) if e.tau > 0]
    if not J:
        raise EmptyBundle("no entry with positive tau")
    v = np.array([memory.entries[i].f - memory.entries[i].gnorm2 / (2.0 * L_n) for i in J])
    m = J[int(np.argmin(v))]
    return m, J[-1]


@dataclass
class SubproblemData:
    L: float
    m: int
    s: int
    J: np.ndarray
    tau: np.ndarray
    Delta: np.ndarray
    Ls: np.ndarray
    a: np.ndarray
    b: np.ndarray
    delta: float
    ZtZ: np.ndarray
    ZtG: np.ndarray
    GtG: np.ndarray
    v: np.ndarray = field(default=None)

    @property
    def k_eff(self):
        return self.tau.shape[0]

    def slack(self, rho, gamma):
        """``eps(rho, gamma)``."""
        quad = rho @ self.ZtZ @ rho - 2.0 * rho @ self.ZtG @ gamma + gamma @ self.GtG @ gamma
        return float(rho @ self.a + gamma @ self.b + self.delta - 0.5 * self.L * quad)

    def objective(self, rho, gamma):
        return float(rho @ self.tau + gamma.sum())

    def fallback(self):
        rho = np.zeros(self.k_eff)
        rho[self.s] = self.L / self.Ls[self.s]
        return rho, np.zeros(self.k_eff)

    def stacked(self):
        """``(c, l, Q)`` over the free variables ``u = (rho_J, gamma)`` so that
        ``eps = l.u + delta - u.Q.u / 2``."""
        J = self.J
        k = self.k_eff
        Q = np.empty((len(J) + k, len(J) + k))
        Q[: len(J), : len(J)] = self.ZtZ[np.ix_(J, J)]
        Q[: len(J), len(J):] = -self.ZtG[J, :]
        Q[len(J):, : len(J)] = -self.ZtG[J, :].T
        Q[len(J):, len(J):] = self.GtG
        Q = self.L * 0.5 * (Q + Q.T)
        c = np.concatenate([self.tau[J], np.ones(k)])
        l = np.concatenate([self.a[J], self.b])
        return c, l, Q

    def split(self, u):
        rho = np.zeros(self.k_eff)
        rho[self.J] = u[: len(self.J)]
        return rho, np.array(u[len(self.J):], dtype=float)


def assemble(memory, L_n, m=None, s=None):
    """Build the subproblem for the current memory and smoothness estimate."""
    if m is None or s is None:
        m, s = select_indices(memory, L_n)
    E = memory.entries
    tau = np.array([e.tau for e in E])
    f = np.array([e.f for e in E])
    Ls = np.array([e.L for e in E])
    Delta = np.array([e.Delta for e in E])
    gn2 = np.array([e.gnorm2 for e in E])
    gdx = np.array([e.gdx for e in E])
    zz = np.array([e.zz for e in E])
    v = f - gn2 / (2.0 * L_n)
    v_m = v[m]
    a = tau * (f - gn2 / (2.0 * Ls) - v_m) + 0.5 * Ls * zz
    b = f - gdx - v_m
    es = E[s]
    delta = L_n * es.tau * (1.0 / es.L**2 - 1.0 / L_n**2) * 0.5 * es.gnorm2
    if L_n == es.L:
        delta = 0.0
    r = Ls / L_n
    ZtZ = memory.ZZ * np.outer(r, r)
    ZtG = memory.ZG * r[:, None] / L_n
    GtG = memory.GG / L_n**2
    J = np.flatnonzero(tau > 0)
    return SubproblemData(L=L_n, m=m, s=s, J=J, tau=tau, Delta=Delta, Ls=Ls, a=a, b=b,
                          delta=float(delta), ZtZ=ZtZ, ZtG=ZtG, GtG=GtG, v=v)


@dataclass
class SubproblemSolution:
    rho: np.ndarray
    gamma: np.ndarray
    tau_prime: float
    Delta_prime: float
    status: str
    newton_steps: int = 0


def _finish(data, rho, gamma, status, steps=0):
    return SubproblemSolution(rho=rho, gamma=gamma, tau_prime=data.objective(rho, gamma),
                              Delta_prime=float(rho @ data.Delta), status=status,
                              newton_steps=steps)


def fallback_solution(data):
    rho, gamma = data.fallback()
    return _finish(data, rho, gamma, FALLBACK)


def _scaled_problem(data):
    """Variables rescaled so the fallback is a unit vector with objective 1."""
    c, l, Q = data.stacked()
    tau_fb = data.L / data.Ls[data.s] * data.tau[data.s]
    D = tau_fb / c
    ls = l * D
    Qs = Q * np.outer(D, D)
    scale = max(abs(data.delta), np.max(np.abs(ls)), np.max(np.abs(Qs)), 1e-300)
    j_s = int(np.searchsorted(data.J, data.s))
    return D, ls / scale, Qs / scale, data.delta / scale, j_s


def _ray_objective(l, Q, delta, d):
    """Largest ``c`` with ``eps(c d) >= 0`` (``inf`` along an exact ray)."""
    A = 0.5 * d @ Q @ d
    B = l @ d
    if A <= 0.0:
        return np.inf if B >= 0.0 else -delta / B
    return (B + math.sqrt(max(B * B + 4.0 * A * delta, 0.0))) / (2.0 * A)


def _face_polish(Q, d):
    """Exact minimizer of ``d.Q.d`` on the simplex face supporting ``d``."""
    S = np.flatnonzero(d > 1e-10)
    nS = len(S)
    K = np.zeros((nS + 1, nS + 1))
    K[:nS, :nS] = 2.0 * Q[np.ix_(S, S)]
    K[:nS, nS] = 1.0
    K[nS, :nS] = 1.0
    rhs = np.zeros(nS + 1)
    rhs[nS] = 1.0
    sol = np.linalg.lstsq(K, rhs, rcond=None)[0][:nS]
    if np.all(sol >= 0.0):
        out = np.zeros_like(d)
        out[S] = sol
        return out
    return d


def detect_unbounded(data, scaled=None):
    """Search for a recession direction of the feasible set along which the
    objective grows.  Returns the direction in ``(rho, gamma)`` coordinates
    or ``None``.

    A direction qualifies when the objective along it exceeds ``BLOWUP``
    times the fallback value, which includes exact rays.
    """
    if scaled is None:
        scaled = _scaled_problem(data)
    D, l, Q, delta, _ = scaled
    diag = np.diag(Q).copy()
    n = len(diag)
    dmax = max(np.max(diag), 0.0)
    zero = diag <= 1e-24 * max(dmax, 1e-300)
    for i in np.flatnonzero(zero):
        e = np.zeros(n)
        e[i] = 1.0
        if _ray_objective(l, Q, delta, e) > BLOWUP:
            return data.split(e * D)
    live = np.flatnonzero(~zero)
    if len(live) < 2:
        return None
    N = 1.0 / np.sqrt(diag[live])
    Qn = Q[np.ix_(live, live)] * np.outer(N, N)
    tol = RAY_TOL * (1.0 + n)
    d, val, proved = _kernels.simplex_quad_min(np.ascontiguousarray(Qn), RAY_ITERS, math.sqrt(tol))
    if proved:
        return None
    d = _face_polish(Qn, d)
    val = d @ Qn @ d
    if val > tol:
        return None
    full = np.zeros(n)
    full[live] = d * N
    if _ray_objective(l, Q, delta, full) * full.sum() > BLOWUP:
        return data.split(full * D)
    return None


def _interior_start(l, Q, delta, j_s, n):
    base = np.zeros(n)
    base[j_s] = 0.5
    for eta in 10.0 ** -np.arange(3, 13):
        for cand in (base + eta, np.full(n, eta)):
            if l @ cand + delta - 0.5 * cand @ Q @ cand > 0.0:
                return cand
    return None


def _polish(l, Q, delta, u):
    """Push ``u`` radially to the boundary ``eps = 0`` while staying feasible."""
    c = _ray_objective(l, Q, delta, u)
    if not np.isfinite(c) or c < 1.0:
        c = 1.0
    out = c * u
    # a huge ray scale can overflow; a non-finite slack simply counts as infeasible
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(60):
            if l @ out + delta - 0.5 * out @ Q @ out >= 0.0:
                return out
            c *= 1.0 - 4.0**k * 1e-16
            out = c * u
    return u


def solve(data, check_unbounded=True):
    """Solve the subproblem.

    Returns an ``Unbounded`` solution when a growing recession direction
    exists (``rho``/``gamma`` then hold that direction), an ``Optimal`` one
    from the interior point method, or the fallback when the solver cannot improve
    on it.
    """
    scaled = _scaled_problem(data)
    D, l, Q, delta, j_s = scaled
    if check_unbounded:
        ray = detect_unbounded(data, scaled)
        if ray is not None:
            return SubproblemSolution(rho=ray[0], gamma=ray[1], tau_prime=np.inf,
                                      Delta_prime=np.nan, status=UNBOUNDED)
    n = len(l)
    u0 = _interior_start(l, Q, delta, j_s, n)
    if u0 is None:
        return fallback_solution(data)
    try:
        u, status, steps = _kernels.ipm_maximize(
            np.ones(n), np.ascontiguousarray(l), np.ascontiguousarray(Q), float(delta), u0,
            IPM_MAX_ITER, IPM_TOL, BLOWUP)
    except np.linalg.LinAlgError:
        return fallback_solution(data)
    if status == _kernels.BLOWUP:
        rho, gamma = data.split(u / u.sum() * D)
        return SubproblemSolution(rho=rho, gamma=gamma, tau_prime=np.inf, Delta_prime=np.nan,
                                  status=UNBOUNDED)
    u = _polish(l, Q, delta, np.maximum(u, 0.0))
    if u.sum() <= 1.0 or not np.all(np.isfinite(u)):
        return fallback_solution(data)
    rho, gamma = data.split(u * D)
    sol = _finish(data, rho, gamma, OPTIMAL, steps)
    # u is feasible in scaled arithmetic; unscaled, the linear and quadratic
    # parts of eps cancel, so the rounding allowance is relative to both
    lin = rho @ data.a + gamma @ data.b + data.delta
    eps = data.slack(rho, gamma)
    if eps < -SLACK_TOL * (1.0 + abs(lin) + abs(lin - eps)):
        return fallback_solution(data)
    return sol
