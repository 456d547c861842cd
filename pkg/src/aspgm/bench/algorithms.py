"""Algorithm ids used by the harness and how each one is run.

Ids: ``aspgm-<k>-<t>``, ``bspgm-<k>``, ``obl``, ``ogm``, ``gd``, ``lbfgs-bl``.
Methods that need an initial smoothness estimate get the same random-probe
estimate the restarted method uses for its epochs; the probe is charged to
the method's oracle count.
"""
import re
from dataclasses import dataclass

import numpy as np

from .. import adaptive, baselines, bspgm
from ..metric import IDENTITY
from ..oracle import CountingOracle
from ..trace import Status

UNSUPPORTED = "Unsupported"


@dataclass(frozen=True)
class AlgorithmSpec:
    id: str
    name: str
    k: int = 0
    t: int = 0


def parse_algorithm(alg_id):
    m = re.fullmatch(r"aspgm-(\d+)-(\d+)", alg_id)
    if m:
        k, t = int(m.group(1)), int(m.group(2))
        if k < 1:
            raise ValueError(f"{alg_id}: memory k must be at least 1")
        return AlgorithmSpec(alg_id, "aspgm", k, t)
    m = re.fullmatch(r"bspgm-(\d+)", alg_id)
    if m:
        k = int(m.group(1))
        if k < 1:
            raise ValueError(f"{alg_id}: memory k must be at least 1")
        return AlgorithmSpec(alg_id, "bspgm", k)
    if alg_id in ("obl", "ogm", "gd", "lbfgs-bl"):
        return AlgorithmSpec(alg_id, alg_id)
    raise ValueError(f"unknown algorithm id {alg_id!r}")


@dataclass
class RunOutcome:
    status: str
    f_out: float


def run_algorithm(alg_id, inst, budget, seed, trace):
    """Run one method on ``inst`` with a total oracle budget.

    Records go to ``trace`` (which may stop the run by raising).  Returns a
    :class:`RunOutcome`; ``f_out`` is the objective at the reported solution.
    """
    spec = parse_algorithm(alg_id)
    oracle = CountingOracle(inst)
    x0 = inst.x0
    if spec.name == "aspgm":
        res = adaptive.run(oracle, x0, spec.k, spec.t, budget, seed=seed, trace=trace)
        return RunOutcome(str(res.status), res.sample.f if res.sample is not None else np.nan)
    if spec.name == "ogm":
        if inst.L is None:
            return RunOutcome(UNSUPPORTED, np.nan)
        res = baselines.run_ogm(oracle, x0, inst.L, budget - 1, trace=trace)
        return RunOutcome(str(res.status), res.f)

    s0 = oracle.sample(x0, IDENTITY)
    L0, probes = adaptive.estimate_epoch_L0(oracle, s0, IDENTITY, np.random.default_rng(seed))
    if spec.name == "bspgm":
        res = bspgm.run(oracle, x0, L0, spec.k, max_calls=budget - oracle.calls, start=s0,
                        trace=trace)
        return RunOutcome(str(res.status), res.sample.f)
    # the baselines evaluate x0 themselves, so only the probes are charged up front
    oracle = CountingOracle(inst)
    oracle.calls = probes
    rest = budget - probes
    if spec.name == "obl":
        res = baselines.run_obl(oracle, x0, L0, rest, trace=trace)
    elif spec.name == "gd":
        res = baselines.run_gd(oracle, x0, L0, rest, trace=trace)
    else:
        res = baselines.run_lbfgs_bl(oracle, x0, L0, rest, trace=trace)
    return RunOutcome(str(res.status), res.f)
