"""Performance profiles over oracle-call counts."""
import math
from collections import defaultdict

import numpy as np

THETAS = tuple(10.0 ** (k / 10.0) for k in range(21))


def performance_profile(records, target_acc, thetas=THETAS):
    """Fraction of problems each algorithm solves within ``theta`` times the best.

    Only records at ``target_acc`` are used.  A problem counts for an
    algorithm at ``theta`` when its oracle calls are finite and at most
    ``theta`` times the smallest count any algorithm achieved on it.
    Returns ``(thetas, {algorithm_id: fractions})``.
    """
    calls = defaultdict(dict)
    algs = []
    for r in records:
        if not math.isclose(r.target_acc, target_acc, rel_tol=1e-12):
            continue
        calls[r.problem_id][r.algorithm_id] = r.oracle_calls
        if r.algorithm_id not in algs:
            algs.append(r.algorithm_id)
    problems = sorted(calls)
    out = {}
    for alg in algs:
        fr = []
        for th in thetas:
            solved = 0
            for p in problems:
                row = calls[p]
                best = min(row.values())
                c = row.get(alg, math.inf)
                if math.isfinite(c) and c <= th * best:
                    solved += 1
            fr.append(solved / len(problems) if problems else 0.0)
        out[alg] = np.array(fr)
    return np.array(thetas), out


def profile_rows(thetas, table):
    """Long-format rows ``(theta, algorithm_id, fraction)``."""
    return [(float(th), alg, float(fr[i])) for alg, fr in table.items()
            for i, th in enumerate(thetas)]
