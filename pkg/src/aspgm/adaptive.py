"""Adaptive restarts with variable-metric preconditioning.

The outer loop runs the bundle method in epochs.  Every epoch starts at the
previous output, seeds its smoothness estimate from one random probe, keeps a
running estimate of the strong convexity constant, and asks the inner loop to
finish (with a final-branch step) once the certificate guarantees the gap has
at least halved.  Between epochs the geometry is rebuilt from the last ``t``
iterate/gradient differences.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from . import bspgm
from .errors import IllConditionedMemory
from .metric import IDENTITY, build_geometry, local_L, local_mu
from .oracle import CountingOracle, resample
from .trace import RunTrace, Status

MIN_EPOCH_ITERS = 20
MAX_EPOCH_ITERS = 100
L0_PROBE_SCALE = 1e-4
L0_MAX_REDRAWS = 5


@dataclass
class EpochState:
    epoch: int
    geometry: object
    x0: np.ndarray
    f0: float
    L0: float = 1.0
    mu: float = np.inf
    iters: int = 0


@dataclass
class EpochSummary:
    """Outcome of one epoch; ``restart_at`` is the iteration whose check fired."""

    epoch: int
    L0: float
    f0: float
    f_out: float
    mu: float
    iterations: int
    status: Status
    final_taken: bool
    restart_at: int = -1
    restart_tau: float = np.nan
    restart_L: float = np.nan
    restart_Delta: float = np.nan


@dataclass
class AspgmResult:
    x: np.ndarray
    sample: object
    status: Status
    trace: RunTrace
    epochs: list = field(default_factory=list)
    geometry: object = IDENTITY


def estimate_epoch_L0(oracle, sample0, geometry, rng, max_calls=None):
    """Local smoothness between ``x0`` and a random nearby point.

    Redraws when the estimate is zero or not finite; after the redraws (or
    when the call allowance runs out) returns 1.  Every probe is one oracle
    call.  Returns ``(L0, calls_used)``.
    """
    limit = L0_MAX_REDRAWS + 1 if max_calls is None else min(L0_MAX_REDRAWS + 1, max_calls)
    x0 = sample0.x
    for used in range(limit):
        y = x0 + L0_PROBE_SCALE * rng.standard_normal(x0.shape[0])
        sy = oracle.sample(y, geometry)
        L = local_L(sample0, sy)
        if np.isfinite(L) and L > 0.0:
            return float(L), used + 1
    return 1.0, limit


def update_mu(state, sample_m, sample_n):
    """Running minimum of the local strong convexity estimate.

    Coincident points (``inf``) carry no information.  Non-positive values
    can only come from rounding on a convex function and are skipped too.
    """
    m = local_mu(sample_m, sample_n, state.geometry)
    if np.isfinite(m) and m > 0.0 and m < state.mu:
        state.mu = float(m)
    return state


def restart_check(state, tau, L, Delta, f_n, iters, min_iters=MIN_EPOCH_ITERS,
                  max_iters=MAX_EPOCH_ITERS):
    """Whether the epoch may stop after its next serious step."""
    if iters >= max_iters:
        return True
    if iters < min_iters:
        return False
    dec = state.f0 - f_n
    if not dec > 0.0:
        return False
    mu = state.mu
    if not np.isfinite(mu) or mu <= 0.0:
        return False
    return tau >= 2.0 * L / mu + L * Delta / dec


def rebuild_preconditioner(pairs, t, previous=IDENTITY):
    """Geometry from the newest ``t`` curvature pairs.

    With fewer than ``t`` pairs the previous geometry is kept.  If the
    compact factorization is ill conditioned the oldest pair is dropped and
    the build retried.
    """
    if t <= 0:
        return IDENTITY
    if len(pairs) < t:
        return previous
    kept = list(pairs[-t:])
    while kept:
        geo = build_geometry(kept, t)
        try:
            return geo.check()
        except IllConditionedMemory:
            kept = kept[1:]
    return IDENTITY


def run(fun, x0, k=5, t=5, budget=1000, *, grad_tol=0.0, seed=0, min_epoch_iters=MIN_EPOCH_ITERS,
        max_epoch_iters=MAX_EPOCH_ITERS, callback=None, trace=None, _mu_init=None):
    """Minimize with restarted, preconditioned epochs of the bundle method.

    ``budget`` counts every oracle call, including the evaluation at ``x0``
    and the smoothness probes that seed each epoch.
    """
    oracle = fun if isinstance(fun, CountingOracle) else CountingOracle(fun)
    x0 = np.asarray(x0, dtype=float)
    trace = RunTrace() if trace is None else trace
    rng = np.random.default_rng(seed)
    end = oracle.calls + budget
    if budget <= 0:
        trace.status = Status.BUDGET
        return AspgmResult(x=x0.copy(), sample=None, status=Status.BUDGET, trace=trace)

    current = oracle.sample(x0, IDENTITY)
    geometry = IDENTITY
    epochs = []
    status = None
    if math.sqrt(current.gnorm2) <= grad_tol:
        status = Status.GRAD_TOL
    epoch = 0
    while status is None:
        if oracle.calls >= end:
            status = Status.BUDGET
            break
        epoch += 1
        start = resample(current, geometry)
        L0, _ = estimate_epoch_L0(oracle, start, geometry, rng, max_calls=end - oracle.calls)
        if oracle.calls >= end:
            status = Status.BUDGET
            break
        state = EpochState(epoch=epoch, geometry=geometry, x0=start.x, f0=start.f, L0=L0)
        if _mu_init is not None:
            state.mu = float(_mu_init)
        fired = {}

        def hook(info, state=state, fired=fired):
            update_mu(state, info.sample_m, info.sample_n)
            state.iters = info.n
            if info.kind != "serious" or fired:
                return False
            want = restart_check(state, info.tau, info.L, info.Delta, info.sample_n.f, info.n,
                                 min_epoch_iters, max_epoch_iters)
            if want:
                fired.update(n=info.n, tau=info.tau, L=info.L, Delta=info.Delta)
            return want

        res = bspgm.run(oracle, start.x, L0, k, max_calls=end - oracle.calls, grad_tol=grad_tol,
                        geometry=geometry, start=start, stop_hook=hook, callback=callback,
                        track_pairs=t, epoch=epoch, trace=trace)
        epochs.append(EpochSummary(epoch=epoch, L0=L0, f0=start.f, f_out=res.sample.f, mu=state.mu,
                                   iterations=res.iterations, status=res.status,
                                   final_taken=res.final_taken, restart_at=fired.get("n", -1),
                                   restart_tau=fired.get("tau", np.nan),
                                   restart_L=fired.get("L", np.nan),
                                   restart_Delta=fired.get("Delta", np.nan)))
        current = res.sample
        if res.status != Status.STOP_HOOK:
            status = res.status
            break
        geometry = rebuild_preconditioner(res.pairs, t, geometry)

    trace.status = status
    return AspgmResult(x=current.x, sample=current, status=status, trace=trace, epochs=epochs,
                       geometry=geometry)
