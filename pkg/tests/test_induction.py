import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aspgm.induction import (Certificate, Q, W, W_star, backtrack_delta, bound, eval_U, obl_tau,
                             obl_update, ogm_tau, ogm_update)

from conftest import half_square, random_quadratic, sample_at


def test_ogm_examples():
    assert ogm_tau(2.0) == pytest.approx(3.0 + math.sqrt(5.0), rel=1e-15)
    assert ogm_tau(2.0, final_step=True) == pytest.approx(4.0, rel=1e-15)
    step = ogm_update(2.0, np.zeros(1), np.zeros(1), np.array([7.0]), 1.0)
    assert step.x[0] == pytest.approx((1.0 - 2.0 / step.tau) * 7.0)
    assert step.dual(np.zeros(1))[0] == 7.0


def test_obl_examples():
    taus = [1.0]
    for _ in range(3):
        taus.append(obl_tau(taus[-1]))
    assert taus == pytest.approx([1.0, 3.0, 6.0, 10.0], rel=1e-15)
    assert obl_tau(1.0, final_step=True) == pytest.approx(2.0)
    step = obl_update(1.0, np.zeros(1), np.zeros(1), np.zeros(1), 1.0, Delta_hat=0.5,
                      delta_hat=0.25)
    assert step.Delta == 0.75


def test_tau_growth():
    tau = 1.0
    for n in range(1, 2001):
        tau = obl_tau(tau)
        assert tau >= 0.5 * n * n
        assert tau == pytest.approx((n + 1) * (n + 2) / 2, rel=1e-12)


def test_update_validation():
    with pytest.raises(ValueError):
        ogm_update(1.0, np.zeros(1), np.zeros(1), np.zeros(1), 0.0)
    with pytest.raises(ValueError):
        obl_update(1.0, np.zeros(1), np.zeros(1), np.zeros(1), -1.0)


def test_backtrack_delta_example():
    # L_s=1, L_n=2, tau_s=3, |g_s|^2=4 -> 2*3*(1-1/4)*2 = 9
    assert backtrack_delta(1.0, 2.0, 3.0, 4.0) == pytest.approx(9.0)
    assert backtrack_delta(2.0, 2.0, 3.0, 4.0) == 0.0


def test_W_Q_examples():
    si, sj = sample_at(half_square, [1.0]), sample_at(half_square, [0.0])
    assert W(si, sj) == 0.5
    assert W(si, si) == 0.0
    assert Q(si, sj, 1.0) == 0.0
    assert Q(si, sj, 2.0) == 0.25
    assert Q(si, si, 1.0) == 0.0


def test_W_nonnegative_on_convex_quadratics():
    rng = np.random.default_rng(3)
    q = random_quadratic(rng, 6)
    for _ in range(100):
        a, b = sample_at(q, rng.standard_normal(6)), sample_at(q, rng.standard_normal(6))
        assert W(a, b) >= -1e-12 * (1.0 + abs(a.f) + abs(b.f))


def test_eval_U_vacuous_and_base_case():
    rng = np.random.default_rng(4)
    q = random_quadratic(rng, 5)
    x0 = rng.standard_normal(5)
    s0 = sample_at(q, x0)
    c = Certificate(tau=0.0, z=x0.copy(), L=q.L)
    assert eval_U(c, x0, q.xstar, q.fstar, s0) == 0.0
    L0 = 2.0 * q.L
    base = Certificate(tau=1.0, z=x0 - s0.g / L0, L=L0)
    xs, fs = rng.standard_normal(5), float(rng.standard_normal())
    assert eval_U(base, x0, xs, fs, s0) == pytest.approx(W_star(xs, fs, s0), abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), d=st.integers(1, 5))
def test_ogm_H_identity(seed, d):
    """H_n = H_{n-1} + tau_{n-1} Q_{n-1,n} + (tau_n - tau_{n-1}) Q_{*,n} at random probes."""
    rng = np.random.default_rng(seed)
    q = random_quadratic(rng, d, kappa=10.0)
    L = q.L * float(rng.uniform(1.0, 3.0))
    x0 = rng.standard_normal(d)
    probes = [(rng.standard_normal(d), float(rng.standard_normal())) for _ in range(3)]
    prev = sample_at(q, x0)
    tau = 2.0
    z = x0 - 2.0 * prev.g / L
    for _ in range(8):
        step = ogm_update(tau, prev.x, prev.g, z, L)
        sn = sample_at(q, step.x)
        zn = step.dual(sn.g)
        for xs, fs in probes:
            H_prev = eval_U(Certificate(tau, z, L), x0, xs, fs, prev)
            H_new = eval_U(Certificate(step.tau, zn, L), x0, xs, fs, sn)
            Qs = W_star(xs, fs, sn) - sn.gnorm2 / (2.0 * L)
            rhs = H_prev + tau * Q(prev, sn, L) + (step.tau - tau) * Qs
            scale = 1.0 + step.tau * (abs(sn.f) + abs(fs) + sn.gnorm2 / L) + L * (
                np.sum((x0 - xs) ** 2) + np.sum((zn - xs) ** 2))
            assert abs(H_new - rhs) <= 1e-9 * scale
        prev, tau, z = sn, step.tau, zn


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), d=st.integers(1, 5))
def test_obl_U_identity(seed, d):
    """U_n = U_{n-1} + tau_{n-1} Q_{n-1,n} + (tau_n - tau_{n-1}) W_{*,n} with fixed L."""
    rng = np.random.default_rng(seed)
    q = random_quadratic(rng, d, kappa=10.0)
    L = q.L * float(rng.uniform(1.0, 3.0))
    x0 = rng.standard_normal(d)
    xs, fs = rng.standard_normal(d), float(rng.standard_normal())
    prev = sample_at(q, x0)
    tau = 1.0
    z = x0 - prev.g / L
    for _ in range(8):
        step = obl_update(tau, prev.x, prev.g, z, L)
        sn = sample_at(q, step.x)
        zn = step.dual(sn.g)
        U_prev = eval_U(Certificate(tau, z, L), x0, xs, fs, prev)
        U_new = eval_U(Certificate(step.tau, zn, L), x0, xs, fs, sn)
        rhs = U_prev + tau * Q(prev, sn, L) + (step.tau - tau) * W_star(xs, fs, sn)
        scale = 1.0 + step.tau * (abs(sn.f) + abs(fs) + sn.gnorm2 / L) + L * (
            np.sum((x0 - xs) ** 2) + np.sum((zn - xs) ** 2))
        assert abs(U_new - rhs) <= 1e-9 * scale
        prev, tau, z = sn, step.tau, zn


def test_bound_forms():
    c = Certificate(tau=4.0, z=np.zeros(1), L=2.0, Delta=1.0)
    assert bound(c, 3.0) == pytest.approx((0.5 * 2.0 * 3.0 + 1.0) / 4.0)
    assert bound(c, 3.0, final_step=False, gnorm2=8.0) == pytest.approx(1.0 + 2.0)
