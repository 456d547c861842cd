"""Suite execution: one cell per (problem, algorithm), first-crossing records.

Performance is the relative gap ``(f(x_n) - f*) / (f(x0) - f*)`` over the
iterates a method reports in its trace.  Oracle calls count every
``(f, grad)`` evaluation, including rejected trial points and smoothness
probes.  A run stops early once the smallest requested threshold is met.
"""
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from ..errors import NonFiniteOracle
from ..problems import SpectrumSpec, gen_synthetic, hard_instance, reference_optimum
from ..trace import RunTrace
from .algorithms import run_algorithm

TARGET_REACHED = "TargetReached"


@dataclass
class BenchRecord:
    """Result of one (problem, algorithm, threshold) cell.

    ``oracle_calls`` and ``wall_time_s`` are measured up to the first reported
    iterate whose relative gap is at most ``target_acc``; both are ``inf``
    when the target was never reached.  ``status`` is the run's terminal
    status joined with the quality flag of the reference optimum.
    """

    problem_id: str
    algorithm_id: str
    seed: int
    d: int
    target_acc: float
    oracle_calls: float
    wall_time_s: float
    final_gap: float
    status: str


class _TargetReached(Exception):
    pass


class StopTrace(RunTrace):
    """Trace that aborts the run once the relative gap reaches ``target``."""

    def __init__(self, f0, fstar, target):
        super().__init__()
        self.f0 = f0
        self.fstar = fstar
        self.target = target

    def gap(self, f):
        return relative_gap(f, self.f0, self.fstar)

    def append(self, rec):
        super().append(rec)
        if self.gap(rec.f) <= self.target:
            raise _TargetReached


def relative_gap(f, f0, fstar):
    den = f0 - fstar
    if not den > 0.0:
        return 0.0 if f <= fstar else np.inf
    return (f - fstar) / den


def build_problem(desc):
    kind, name, d, kappa, spectrum, seed = desc
    if kind == "synthetic":
        return gen_synthetic(name, d, SpectrumSpec(spectrum, kappa), seed)
    return hard_instance(name, d)


def cached_reference(inst, cache_dir=None, budget=2000):
    """``reference_optimum`` memoized on disk by problem id."""
    path = None
    if cache_dir is not None:
        os.makedirs(cache_dir, exist_ok=True)
        path = os.path.join(cache_dir, f"{inst.id}.json")
        if os.path.exists(path):
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
            return float(data["fstar"]), data["flag"]
    fstar, flag = reference_optimum(inst, budget)
    if path is not None:
        tmp = path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump({"problem_id": inst.id, "fstar": fstar, "flag": flag}, fh)
        os.replace(tmp, path)
    return fstar, flag


def first_crossings(trace, f0, fstar, thresholds):
    """``{threshold: (oracle_calls, wall_time)}`` at the first crossing."""
    out = {}
    gaps = [relative_gap(r.f, f0, fstar) for r in trace.records]
    for thr in thresholds:
        hit = next((i for i, g in enumerate(gaps) if g <= thr), None)
        if hit is None:
            out[thr] = (math.inf, math.inf)
        else:
            r = trace.records[hit]
            out[thr] = (float(r.oracle_calls), float(r.wall_time))
    return out


def run_cell(inst, alg_id, thresholds, budget, fstar, flag, seed=0, timing=True):
    """Run one algorithm on one instance and return one record per threshold."""
    f0 = float(inst(inst.x0)[0])
    trace = StopTrace(f0, fstar, min(thresholds))
    try:
        outcome = run_algorithm(alg_id, inst, budget, seed, trace)
        status, f_out = outcome.status, outcome.f_out
    except _TargetReached:
        status, f_out = TARGET_REACHED, trace.records[-1].f
    except NonFiniteOracle:
        status = "NonFinite"
        f_out = min((r.f for r in trace.records), default=np.nan)
    hits = first_crossings(trace, f0, fstar, thresholds)
    gap = relative_gap(f_out, f0, fstar) if np.isfinite(f_out) else np.nan
    pseed = inst.meta.get("seed", 0)
    recs = []
    for thr in thresholds:
        calls, wall = hits[thr]
        recs.append(BenchRecord(problem_id=inst.id, algorithm_id=alg_id, seed=pseed, d=inst.d,
                                target_acc=thr, oracle_calls=calls,
                                wall_time_s=wall if timing else math.nan, final_gap=gap,
                                status=f"{status}|{flag}"))
    return recs


def run_problem(desc, algorithms, thresholds, budget, seed=0, cache_dir=None, timing=True,
                ref_budget=2000):
    inst = build_problem(desc)
    fstar, flag = cached_reference(inst, cache_dir, ref_budget)
    recs = []
    for alg in algorithms:
        recs.extend(run_cell(inst, alg, thresholds, budget, fstar, flag, seed, timing))
    return recs


def _run_problem_star(args):
    return run_problem(*args)


def run_suite(config, jobs=1, seed=0, cache_dir=None, timing=True, progress=None):
    """All cells of a suite, in the suite's problem order then algorithm order."""
    tasks = [(desc, config.algorithms, config.thresholds, config.budget, seed, cache_dir, timing,
              config.ref_budget) for desc in config.problems()]
    records = []
    if jobs <= 1:
        for i, task in enumerate(tasks):
            records.extend(run_problem(*task))
            if progress is not None:
                progress(i + 1, len(tasks))
        return records
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        for i, recs in enumerate(pool.map(_run_problem_star, tasks)):
            records.extend(recs)
            if progress is not None:
                progress(i + 1, len(tasks))
    return records


def record_dict(rec):
    return asdict(rec)
