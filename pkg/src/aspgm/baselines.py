"""Reference methods sharing the oracle accounting of the main solvers.

Every evaluation of ``(f, grad)`` counts as one oracle call, including trial
points rejected by a backtracking test or a linesearch.  Traces only record
accepted iterates, each with the call count at the time it was accepted.
"""
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .induction import backtrack_delta, obl_update, ogm_tau
from .metric import CurvaturePair, build_geometry
from .oracle import CountingOracle
from .trace import RunTrace, Status, TraceRecord

LBFGS_MEMORY = 10
ARMIJO_C1 = 1e-4
ARMIJO_SHRINK = 0.5
MAX_BACKTRACKS = 60


@dataclass
class BaselineResult:
    x: np.ndarray
    f: float
    status: Status
    trace: RunTrace
    L: float = None
    tau: float = None
    Delta: float = None
    rejections: int = 0
    extra: dict = field(default_factory=dict)


def _oracle(fun):
    return fun if isinstance(fun, CountingOracle) else CountingOracle(fun)


def _record(trace, oracle, n, f, g, L=np.nan, tau=0.0, Delta=0.0, kind="serious"):
    trace.append(TraceRecord(n, kind, L, tau, Delta, f, float(np.linalg.norm(g)), oracle.calls,
                             oracle.elapsed()))


def run_ogm(fun, x0, L, N, *, grad_tol=0.0, trace=None):
    """Optimized gradient method with known smoothness ``L`` and ``N`` steps.

    Uses ``N + 1`` oracle calls; step ``N`` takes the final-step branch so
    that ``f_N - f* <= L |x0 - x*|^2 / (2 tau_N)``.
    """
    oracle = _oracle(fun)
    x = np.asarray(x0, dtype=float)
    trace = RunTrace() if trace is None else trace
    f, g = oracle(x)
    tau = 2.0
    z = x - (2.0 / L) * g
    _record(trace, oracle, 0, f, g, L, tau)
    status = Status.BUDGET
    if np.linalg.norm(g) <= grad_tol:
        status = Status.GRAD_TOL
        N = 0
    for n in range(1, N + 1):
        tau_n = ogm_tau(tau, final_step=(n == N))
        alpha = tau_n - tau
        x = (tau / tau_n) * (x - g / L) + (alpha / tau_n) * z
        f, g = oracle(x)
        z = z - (alpha / L) * g
        tau = tau_n
        _record(trace, oracle, n, f, g, L, tau, kind="final" if n == N else "serious")
        if np.linalg.norm(g) <= grad_tol:
            status = Status.GRAD_TOL
            break
    trace.status = status
    return BaselineResult(x=x, f=f, status=status, trace=trace, L=L, tau=tau, Delta=0.0)


def run_obl(fun, x0, L0, budget, *, grad_tol=0.0, trace=None):
    """Backtracking OBL: reject a trial when ``Q_{n-1,n}(L_n) < 0`` and double ``L_n``.

    The rejected evaluation is counted.  On retry the carried error term is
    rescaled to the new estimate and ``delta_n`` is recomputed.  The trial
    that would use the last call takes the final-step branch.
    """
    oracle = _oracle(fun)
    end = oracle.calls + budget
    x = np.asarray(x0, dtype=float)
    trace = RunTrace() if trace is None else trace
    if budget <= 0:
        trace.status = Status.BUDGET
        return BaselineResult(x=x, f=np.nan, status=Status.BUDGET, trace=trace, L=L0)
    f, g = oracle(x)
    L_prev = L0
    tau, z, Delta = 1.0, x - g / L0, 0.0
    _record(trace, oracle, 0, f, g, L0, tau, Delta)
    status = Status.GRAD_TOL if np.linalg.norm(g) <= grad_tol else None
    rejections = 0
    n = 0
    while status is None:
        n += 1
        L = L_prev
        accepted = False
        while oracle.calls < end:
            final = oracle.calls + 1 >= end
            delta = backtrack_delta(L_prev, L, tau, float(g @ g)) if L != L_prev else 0.0
            step = obl_update(tau, x, g, z, L, (L / L_prev) * Delta, delta, final_step=final)
            fn, gn = oracle(step.x)
            dg = gn - g
            q = f - fn - float(gn @ (x - step.x)) - float(dg @ dg) / (2.0 * L)
            if q >= 0.0:
                accepted = True
                break
            rejections += 1
            L *= 2.0
        if not accepted:
            status = Status.BUDGET
            break
        x, f, g = step.x, fn, gn
        z = step.dual(gn)
        tau, Delta, L_prev = step.tau, step.Delta, L
        _record(trace, oracle, n, f, g, L, tau, Delta, kind="final" if final else "serious")
        if final:
            status = Status.BUDGET
        elif np.linalg.norm(g) <= grad_tol:
            status = Status.GRAD_TOL
    trace.status = status
    return BaselineResult(x=x, f=f, status=status, trace=trace, L=L_prev, tau=tau, Delta=Delta,
                          rejections=rejections)


def run_gd(fun, x0, L0, budget, *, grad_tol=0.0, trace=None):
    """Gradient descent with step ``1/L``; ``L`` doubles until
    ``f(x - g/L) <= f(x) - |g|^2 / (2L)``."""
    oracle = _oracle(fun)
    end = oracle.calls + budget
    x = np.asarray(x0, dtype=float)
    trace = RunTrace() if trace is None else trace
    if budget <= 0:
        trace.status = Status.BUDGET
        return BaselineResult(x=x, f=np.nan, status=Status.BUDGET, trace=trace, L=L0)
    f, g = oracle(x)
    L = L0
    _record(trace, oracle, 0, f, g, L)
    status = Status.GRAD_TOL if np.linalg.norm(g) <= grad_tol else None
    rejections = 0
    n = 0
    while status is None:
        n += 1
        g2 = float(g @ g)
        accepted = False
        while oracle.calls < end:
            xn = x - g / L
            fn, gn = oracle(xn)
            if fn <= f - 0.5 * g2 / L:
                accepted = True
                break
            rejections += 1
            L *= 2.0
        if not accepted:
            status = Status.BUDGET
            break
        x, f, g = xn, fn, gn
        _record(trace, oracle, n, f, g, L)
        if np.linalg.norm(g) <= grad_tol:
            status = Status.GRAD_TOL
    trace.status = status
    return BaselineResult(x=x, f=f, status=status, trace=trace, L=L, rejections=rejections)


def run_lbfgs_bl(fun, x0, L0=1.0, budget=1000, *, t=LBFGS_MEMORY, c1=ARMIJO_C1,
                 shrink=ARMIJO_SHRINK, grad_tol=0.0, trace=None):
    """L-BFGS with Armijo backtracking from a unit trial step.

    The first direction is ``-g / L0``.  Pairs failing the curvature filter
    are not stored.  A direction that is not a descent direction restarts
    the memory.
    """
    oracle = _oracle(fun)
    end = oracle.calls + budget
    x = np.asarray(x0, dtype=float)
    trace = RunTrace() if trace is None else trace
    if budget <= 0:
        trace.status = Status.BUDGET
        return BaselineResult(x=x, f=np.nan, status=Status.BUDGET, trace=trace)
    f, g = oracle(x)
    _record(trace, oracle, 0, f, g)
    pairs = deque(maxlen=t)
    status = Status.GRAD_TOL if np.linalg.norm(g) <= grad_tol else None
    rejections = 0
    n = 0
    while status is None:
        n += 1
        geo = build_geometry(list(pairs), t)
        d = -geo.apply_B(g) if not geo.is_identity else -g / L0
        slope = float(g @ d)
        if not slope < 0.0:
            pairs.clear()
            d = -g / L0
            slope = -float(g @ g) / L0
        a = 1.0
        accepted = False
        for _ in range(MAX_BACKTRACKS):
            if oracle.calls >= end:
                break
            xn = x + a * d
            fn, gn = oracle(xn)
            if fn <= f + c1 * a * slope:
                accepted = True
                break
            rejections += 1
            a *= shrink
        if not accepted:
            status = Status.BUDGET if oracle.calls >= end else Status.FAILED
            break
        pairs.append(CurvaturePair(xn - x, gn - g))
        x, f, g = xn, fn, gn
        _record(trace, oracle, n, f, g)
        if np.linalg.norm(g) <= grad_tol:
            status = Status.GRAD_TOL
    trace.status = status
    return BaselineResult(x=x, f=f, status=status, trace=trace, rejections=rejections)
