"""Bundle-style subgame perfect gradient method (fixed geometry).

Each iteration aggregates the stored certificates and gradient inequalities
through :mod:`aspgm.subproblem`, takes one accelerated step from the best
stored point, and evaluates the oracle once.  If the new point violates the
cocoercivity test against its anchor, the smoothness estimate grows and the
entry is kept as a null step with zero weight.
"""
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import subproblem as sp
from .induction import obl_tau
from .metric import IDENTITY, CurvaturePair, local_L
from .oracle import CountingOracle, OracleSample, make_sample, resample
from .trace import RunTrace, Status, TraceRecord

_EPS = np.finfo(float).eps


@dataclass
class IterationInfo:
    """What a stop hook sees after every iteration."""

    n: int
    kind: str
    sample_m: OracleSample
    sample_n: OracleSample
    tau: float
    L: float
    L_next: float
    Delta: float
    f0: float
    geometry: object


@dataclass
class StepDetail:
    """Full per-iteration state, passed to ``callback`` for auditing.

    ``tau_n``, ``z_next`` and ``Delta_n`` are the values before the null-step
    override, so the certificate identity can be checked on every iteration.
    """

    n: int
    data: sp.SubproblemData
    solution: sp.SubproblemSolution
    x0: np.ndarray
    sample_m: OracleSample
    entries: list
    z_prime: np.ndarray
    tau_prime: float
    Delta_prime: float
    x_n: np.ndarray
    sample_n: OracleSample
    tau_n: float
    z_next: np.ndarray
    Delta_n: float
    L: float
    kind: str
    final: bool


@dataclass
class BspgmResult:
    x: np.ndarray
    sample: OracleSample
    status: Status
    trace: RunTrace
    memory: sp.Memory
    pairs: list
    L: float
    iterations: int
    tau: float = 0.0
    Delta: float = 0.0
    z: np.ndarray = None
    final_taken: bool = False
    extra: dict = field(default_factory=dict)


def is_null(sm, sn, L):
    """Cocoercivity test between anchor ``sm`` and the new sample ``sn``.

    The Bregman gap is a difference of function values and carries rounding
    error of order ``eps * (|f_m| + |f_n| + |<g_m, dx>|)``; that amount is
    granted before declaring a violation.
    """
    lin = float(sm.g_raw @ (sn.x - sm.x))
    gap = sn.f - sm.f - lin
    noise = 8.0 * _EPS * (abs(sn.f) + abs(sm.f) + abs(lin))
    half_dg2 = 0.5 * float((sm.g_raw - sn.g_raw) @ (sm.g - sn.g))
    return half_dg2 > L * (gap + noise)


def run(fun, x0, L0, k=7, *, max_calls=1000, grad_tol=0.0, geometry=IDENTITY, start=None,
        stop_hook=None, callback=None, track_pairs=0, final_retries=3, epoch=0, trace=None):
    """Run the method from ``x0`` with initial smoothness estimate ``L0``.

    ``fun`` is either a :class:`CountingOracle` or a callable returning
    ``(f, grad)``.  ``max_calls`` bounds the oracle calls made by this run
    (the evaluation at ``x0`` counts unless ``start`` supplies it).  The
    iteration that will use the last allowed call takes the final-step
    branch, as does the serious step following a ``stop_hook`` request.
    """
    oracle = fun if isinstance(fun, CountingOracle) else CountingOracle(fun)
    end = oracle.calls + max_calls
    x0 = np.asarray(x0, dtype=float)
    trace = RunTrace() if trace is None else trace
    identity = geometry.is_identity
    applyB = (lambda v: v) if identity else geometry.apply_B

    s0 = resample(start, geometry) if start is not None else oracle.sample(x0, geometry)
    mem = sp.Memory(x0, k, geometry)
    z1 = x0 - s0.g / L0
    mem.add(s0, 1.0, z1, L0, 0.0, index=0, kind="serious")
    trace.append(TraceRecord(0, "serious", L0, 1.0, 0.0, s0.f, math.sqrt(s0.gnorm2),
                             oracle.calls, oracle.elapsed(), epoch))
    pairs = deque(maxlen=max(track_pairs, 0))
    prev = s0
    last = s0
    last_cert = (1.0, z1, 0.0)
    L = L0
    n = 0
    status = None
    final_pending = False
    final_attempts = 0
    final_taken = False
    if math.sqrt(s0.gnorm2) <= grad_tol:
        status = Status.GRAD_TOL

    while status is None:
        if oracle.calls >= end:
            status = Status.BUDGET
            break
        n += 1
        final = final_pending or oracle.calls + 1 >= end
        m, s = sp.select_indices(mem, L)
        data = sp.assemble(mem, L, m, s)
        sol = sp.solve(data)
        em = mem.entries[m]
        sm = make_sample(em.x, em.f, em.g_raw, geometry)
        if sol.status == sp.UNBOUNDED:
            x_out = em.x - sm.g / L
            if oracle.calls < end:
                su = oracle.sample(x_out, geometry)
                trace.append(TraceRecord(n, "serious", L, np.inf, 0.0, su.f, math.sqrt(su.gnorm2),
                                         oracle.calls, oracle.elapsed(), epoch))
                if su.f <= last.f:
                    last = su
            status = Status.UNBOUNDED
            break
        rho, gamma = sol.rho, sol.gamma
        E = mem.entries
        r = np.array([e.L for e in E]) / L
        dzp = (rho * r) @ np.array([e.dz for e in E])
        if np.any(gamma != 0.0):
            dzp = dzp - applyB(gamma @ np.array([e.g_raw for e in E])) / L
        z_prime = x0 + dzp
        tau_p = sol.tau_prime
        tau_n = obl_tau(tau_p, final)
        alpha = tau_n - tau_p
        x_n = (tau_p / tau_n) * (em.x - sm.g / L) + (alpha / tau_n) * z_prime
        sn = oracle.sample(x_n, geometry)
        z_next = z_prime - (alpha / L) * sn.g
        Delta_n = sol.Delta_prime + data.delta
        null = is_null(sm, sn, L)
        kind = "null" if null else ("final" if final else "serious")
        if callback is not None:
            callback(StepDetail(n=n, data=data, solution=sol, x0=x0, sample_m=sm,
                                entries=list(E), z_prime=z_prime, tau_prime=tau_p,
                                Delta_prime=sol.Delta_prime, x_n=x_n, sample_n=sn, tau_n=tau_n,
                                z_next=z_next, Delta_n=Delta_n, L=L, kind=kind, final=final))
        if null:
            Lt = local_L(sm, sn)
            L_next = max(Lt, 2.0 * L) if np.isfinite(Lt) else 2.0 * L
            mem.add(sn, 0.0, x0, L, 0.0, index=n, kind=kind)
            rec_tau, rec_Delta = 0.0, 0.0
        else:
            L_next = L
            mem.add(sn, tau_n, z_next, L, Delta_n, index=n, kind=kind)
            last = sn
            last_cert = (tau_n, z_next, Delta_n)
            rec_tau, rec_Delta = tau_n, Delta_n
        if track_pairs > 0:
            pairs.append(CurvaturePair(sn.x - prev.x, sn.g_raw - prev.g_raw))
        prev = sn
        trace.append(TraceRecord(n, kind, L, rec_tau, rec_Delta, sn.f, math.sqrt(sn.gnorm2),
                                 oracle.calls, oracle.elapsed(), epoch))
        if stop_hook is not None:
            info = IterationInfo(n=n, kind=kind, sample_m=sm, sample_n=sn, tau=rec_tau, L=L,
                                 L_next=L_next, Delta=rec_Delta, f0=s0.f, geometry=geometry)
            want = stop_hook(info)
        else:
            want = False
        L = L_next
        if kind == "final":
            final_taken = True
            status = Status.STOP_HOOK if final_pending else Status.BUDGET
            break
        if not null and math.sqrt(sn.gnorm2) <= grad_tol:
            status = Status.GRAD_TOL
            break
        if final_pending:
            final_attempts += 1
            if final_attempts > final_retries:
                status = Status.STOP_HOOK
                break
        elif want and not null:
            final_pending = True

    trace.status = status
    return BspgmResult(x=last.x, sample=last, status=status, trace=trace, memory=mem,
                       pairs=list(pairs), L=L, iterations=n, tau=last_cert[0], z=last_cert[1],
                       Delta=last_cert[2], final_taken=final_taken)
