"""One test per acceptance criterion; each prints a single PASS/FAIL line."""
import math
import time

import numpy as np
import pytest

from aspgm import adaptive, bspgm
from aspgm import problems as P
from aspgm import subproblem as sp
from aspgm.bench.cli import main as bench_main
from aspgm.bench.config import default_suite
from aspgm.bench.runner import run_suite
from aspgm.induction import Q, W_star, obl_tau
from aspgm.metric import build_geometry

from conftest import (brute_force_max, capture_subproblems, dense_bfgs, random_pairs,
                      random_quadratic)


def report(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\n[acceptance {n}] {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


def test_01_tau_constant(capsys):
    t0 = time.perf_counter()
    worst = 0.0
    for N in (1, 2, 5, 10, 100, 1000):
        tau = 1.0
        for _ in range(N - 1):
            tau = obl_tau(tau)
        tau = obl_tau(tau, final_step=True)
        expect = (N * (N + 1) + math.sqrt(2.0 * N * (N + 1))) / 2.0
        worst = max(worst, abs(tau - expect) / expect)
    dt = time.perf_counter() - t0
    report(capsys, 1, worst <= 1e-12 and dt < 1.0,
           f"max rel err {worst:.2e} (tol 1e-12), {dt:.3f}s")


def test_02_certificate_bound(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(200)
    insts = []
    for i in range(20):
        d = int(rng.integers(5, 201))
        spec = P.SpectrumSpec(("uniform", "bimodal")[i % 2], 10 ** rng.uniform(1, 4))
        inst = P.gen_synthetic("ls", d, spec, i)
        xs, fs = inst.known_optimum()
        insts.append((inst, inst.x0 + rng.standard_normal(d), xs, fs, inst.L))
    for _ in range(20):
        d = int(rng.integers(5, 201))
        q = random_quadratic(rng, d, kappa=10 ** rng.uniform(1, 4))
        insts.append((q, rng.standard_normal(d), q.xstar, q.fstar, q.L))
    worst, steps, finals = np.inf, 0, 0
    for fun, x0, xs, fs, L in insts:
        D2 = float(np.sum((x0 - xs) ** 2))
        for k in (1, 3, 7):
            res = bspgm.run(fun, x0, L / 2 ** int(rng.integers(0, 5)), k, max_calls=60)
            for r in res.trace.records[1:]:
                if r.kind == "null":
                    continue
                b = (0.5 * r.L * D2 + r.Delta) / r.tau
                lhs = r.f - fs - (0.0 if r.kind == "final" else r.gnorm**2 / (2.0 * r.L))
                worst = min(worst, (b - lhs) / (1.0 + abs(fs) + abs(r.f) + b))
                steps += 1
                finals += r.kind == "final"
    dt = time.perf_counter() - t0
    report(capsys, 2, worst >= -1e-8 and finals == 120 and dt < 120.0,
           f"min relative slack {worst:.2e} (tol -1e-8) over {steps} steps, "
           f"{finals} final, {dt:.1f}s")


def test_03_induction_identity(capsys):
    worst, checked = 0.0, 0
    for i in range(10):
        rng = np.random.default_rng(300 + i)
        d = int(rng.integers(1, 6))
        q = random_quadratic(rng, d, kappa=30.0)
        L0 = q.L / 2 ** int(rng.integers(0, 6))
        for det in capture_subproblems(q, rng.standard_normal(d), L0, 3, 40):
            L, x0, sm, sn = det.L, det.x0, det.sample_m, det.sample_n
            for _ in range(3):
                xs = rng.standard_normal(d)
                fs = float(rng.standard_normal())
                d0 = float(np.sum((x0 - xs) ** 2))
                U_prime = (det.tau_prime * (fs - sm.f + sm.gnorm2 / (2.0 * L))
                           + 0.5 * L * (d0 - np.sum((det.z_prime - xs) ** 2)) + det.Delta_n)
                grad = 0.0 if det.final else sn.gnorm2 / (2.0 * L)
                zn2 = float(np.sum((det.z_next - xs) ** 2))
                U_n = det.tau_n * (fs - sn.f + grad) + 0.5 * L * (d0 - zn2) + det.Delta_n
                rhs = (U_prime + det.tau_prime * Q(sm, sn, L)
                       + (det.tau_n - det.tau_prime) * W_star(xs, fs, sn))
                scale = (1.0 + abs(U_n) + det.tau_n * (abs(fs) + abs(sn.f) + abs(sm.f))
                         + L * (d0 + zn2))
                worst = max(worst, abs(U_n - rhs) / scale)
                checked += 1
    report(capsys, 3, worst <= 1e-9 and checked > 0,
           f"max residual {worst:.2e} (tol 1e-9 scale) at {checked} probes")


def test_04_subproblem_optimality(capsys):
    t0 = time.perf_counter()
    rng = np.random.default_rng(400)
    worst, n, below_fallback, skipped = 0.0, 0, 0, 0
    while n < 200:
        d = int(rng.integers(2, 9))
        k = int(rng.integers(1, 4))
        q = random_quadratic(rng, d, kappa=10 ** rng.uniform(0, 3))
        x0 = rng.standard_normal(d)
        g0 = q(x0)[0] - q.fstar
        for det in capture_subproblems(q, x0, q.L / 2 ** int(rng.integers(0, 4)), k, 12):
            if n >= 200:
                break
            # memory at rounding-level gaps carries no information
            if min(e.f for e in det.entries) - q.fstar <= 1e-9 * g0:
                break
            data, sol = det.data, det.solution
            D = sp._scaled_problem(data)[0]
            if D.max() / D.min() > 1e8:
                skipped += 1
                continue
            c, l, Qm = data.stacked()
            best, _ = brute_force_max(c, l, Qm, data.delta)
            tau_s = data.L / data.Ls[data.s] * data.tau[data.s]
            if sol.tau_prime < tau_s * (1.0 - 1e-12):
                below_fallback += 1
            if np.isinf(best) or sol.status == sp.UNBOUNDED:
                err = 0.0 if np.isinf(best) and np.isinf(sol.tau_prime) else np.inf
            else:
                err = abs(sol.tau_prime - best) / (1.0 + best)
            worst = max(worst, err)
            n += 1
    dt = time.perf_counter() - t0
    report(capsys, 4, worst <= 1e-6 and below_fallback == 0 and dt < 120.0,
           f"max rel gap to brute force {worst:.2e} (tol 1e-6) on {n} subproblems, "
           f"{below_fallback} below fallback, {skipped} skipped, {dt:.1f}s")


def test_05_null_step_accounting(capsys):
    bad = []
    for j in range(11):
        for s in range(3):
            rng = np.random.default_rng(500 + 10 * j + s)
            q = random_quadratic(rng, 20, kappa=100.0)
            res = bspgm.run(q, rng.standard_normal(20), q.L / 2**j, 5, max_calls=150)
            nulls = sum(r.kind == "null" for r in res.trace.records)
            if nulls > j + 1 or (j == 0 and nulls > 0):
                bad.append((j, s, nulls))
    report(capsys, 5, not bad, f"33 runs, j = 0..10, violations {bad}")


def test_06_preconditioner_equivalence(capsys):
    rng = np.random.default_rng(600)
    worst_B = worst_H = worst_sec = worst_inv = 0.0
    for _ in range(100):
        d = int(rng.integers(2, 31))
        t = int(rng.integers(1, 6))
        pairs, _ = random_pairs(rng, d, t)
        geo = build_geometry(pairs, t)
        B, H = dense_bfgs(pairs)
        for _ in range(3):
            v = rng.standard_normal(d)
            worst_B = max(worst_B, np.linalg.norm(geo.apply_B(v) - B @ v) / np.linalg.norm(B @ v))
            worst_H = max(worst_H,
                          np.linalg.norm(geo.apply_B_inv(v) - H @ v) / np.linalg.norm(H @ v))
            worst_inv = max(worst_inv,
                            np.linalg.norm(geo.apply_B_inv(geo.apply_B(v)) - v) / np.linalg.norm(v))
        s, y = pairs[-1].s, pairs[-1].y
        worst_sec = max(worst_sec, np.linalg.norm(geo.apply_B(y) - s) / np.linalg.norm(s),
                        np.linalg.norm(geo.apply_B_inv(s) - y) / np.linalg.norm(y))
    worst = max(worst_B, worst_H, worst_sec, worst_inv)
    report(capsys, 6, worst <= 1e-10,
           f"B {worst_B:.1e}, B^-1 {worst_H:.1e}, secant {worst_sec:.1e}, "
           f"inverse {worst_inv:.1e} (tol 1e-10)")


def test_07_restart_contraction(capsys):
    checked, worst = 0, -np.inf
    for kappa in (10.0, 1e3):
        for s in range(3):
            rng = np.random.default_rng(700 + s)
            q = random_quadratic(rng, 100, kappa=kappa)
            res = adaptive.run(q, rng.standard_normal(100), 5, 0, 3000, seed=s, _mu_init=q.mu)
            scale = 1.0 + abs(q.fstar)
            for ep in res.epochs:
                if ep.restart_at < 0:
                    continue
                recs = [r for r in res.trace.records if r.epoch == ep.epoch]
                at = next(r for r in recs if r.iter == ep.restart_at)
                nxt = [r for r in recs if r.iter == ep.restart_at + 1]
                # premises: the condition holds with the true mu, the next step is
                # serious and Delta does not grow
                if not nxt or nxt[0].kind == "null" or nxt[0].Delta > at.Delta:
                    continue
                dec = ep.f0 - at.f
                if not (dec > 0.0 and at.tau >= 2.0 * at.L / q.mu + at.L * at.Delta / dec):
                    continue
                g0 = ep.f0 - q.fstar
                if g0 <= 1e-10 * scale:
                    continue
                worst = max(worst, (nxt[0].f - q.fstar - 0.5 * g0) / scale)
                checked += 1
    report(capsys, 7, checked >= 10 and worst <= 1e-10,
           f"{checked} epochs meeting the premises, max excess over half gap {worst:.2e} "
           f"(tol 1e-10 scale)")


@pytest.mark.slow
def test_08_suite_trend(capsys, tmp_path):
    t0 = time.perf_counter()
    cfg = default_suite()
    cfg.algorithms = ["aspgm-5-5", "bspgm-7", "obl"]
    cfg.thresholds = [1e-7]
    recs = run_suite(cfg, cache_dir=str(tmp_path / "ref"), timing=False)
    calls = {}
    for r in recs:
        calls.setdefault(r.algorithm_id, {})[r.problem_id] = r.oracle_calls
    probs = sorted(calls["obl"])
    med = {a: float(np.median([calls[a][p] for p in probs])) for a in calls}
    beats = np.mean([calls["bspgm-7"][p] < calls["obl"][p] for p in probs])
    dt = time.perf_counter() - t0
    ok = med["aspgm-5-5"] < med["obl"] and beats >= 0.6 and dt < 1800.0
    report(capsys, 8, ok,
           f"{len(probs)} instances; median calls aspgm-5-5 {med['aspgm-5-5']:g}, "
           f"bspgm-7 {med['bspgm-7']:g}, obl {med['obl']:g}; bspgm-7 beats obl on "
           f"{beats:.0%}; {dt:.0f}s")


def test_09_gradient_checks(capsys):
    rng = np.random.default_rng(900)
    worst = {}
    for fam in P.FAMILIES:
        for spec in ("uniform", "bimodal"):
            inst = P.gen_synthetic(fam, 30, P.SpectrumSpec(spec, 1e3), 0)
            for _ in range(10):
                x = rng.standard_normal(30)
                f, g = inst(x)
                h = 1e-6 * (1.0 + np.linalg.norm(x))
                u = rng.standard_normal(30)
                u /= np.linalg.norm(u)
                fd = (inst(x + h * u)[0] - inst(x - h * u)[0]) / (2.0 * h)
                err = abs(fd - g @ u) / max(1.0, abs(g @ u), abs(fd))
                worst[fam] = max(worst.get(fam, 0.0), err)
    top = max(worst.values())
    report(capsys, 9, top <= 1e-5,
           "max FD rel err " + ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + " (tol 1e-5)")


SMALL_SUITE = """\
families = ls, logistic, cubicreg
dims = 20
kappas = 1e2
spectra = uniform, bimodal
seeds = 0, 1
algorithms = aspgm-5-5, aspgm-1-1, bspgm-7, obl, ogm, gd, lbfgs-bl
thresholds = 1e-4, 1e-7
budget = 300
"""


def test_10_determinism(capsys, tmp_path):
    suite = tmp_path / "small.suite"
    suite.write_text(SMALL_SUITE, encoding="utf-8")
    outs = []
    for i in range(2):
        out = tmp_path / f"run{i}.csv"
        assert bench_main(["run", "--suite", str(suite), "--out", str(out), "--no-timing",
                           "--quiet", "--seed", "3"]) == 0
        outs.append(out.read_bytes())
    n = outs[0].count(b"\n") - 1
    report(capsys, 10, outs[0] == outs[1] and n == 12 * 7 * 2,
           f"two runs, {n} records, byte-identical: {outs[0] == outs[1]}")
