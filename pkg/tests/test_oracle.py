import math

import mpmath
import numpy as np
import pytest

from bdwell.chain import ChainSpec, make_model, random_spec
from bdwell.exact import hitting_moments, mean_hit_down
from bdwell.laws import BudgetExceededError, hitting_law
from bdwell.oracle import (
    DenseKernel,
    mmatrix_solve,
    oracle_last_exit_law,
    oracle_law,
    oracle_mean,
    oracle_second_moment,
    taboo_kernel,
    thomas_solve,
)


def test_geometric_law():
    s = ChainSpec.from_tables(0, 1, [0.5], [0.5])
    law = oracle_law(s, 0, [1], t_max=40)
    t = np.arange(1, 41)
    np.testing.assert_allclose(law.pmf[1:], 0.5**t, rtol=1e-14)
    assert law.pmf[0] == 0
    assert law.tail_mass == pytest.approx(0.5**40)


def test_start_in_target():
    law = oracle_law(make_model("ehrenfest", {}, 3), 2, [2, -1], t_max=5)
    assert law.pmf[0] == 1.0 and law.tail_mass == 0.0
    assert oracle_mean(make_model("ehrenfest", {}, 3), 2, [2]) == 0.0


def test_frozen_ehrenfest():
    s = make_model("ehrenfest", {}, 3)
    assert oracle_mean(s, 3, 0) == pytest.approx(23 / 5, rel=1e-14)
    assert oracle_second_moment(s, 3, 0) == pytest.approx(673 / 25, rel=1e-14)
    assert oracle_mean(s, 0, [-3, 3]) == pytest.approx(37, rel=1e-14)
    assert oracle_second_moment(s, 0, [-3, 3]) == pytest.approx(2593, rel=1e-14)


def test_law_against_forward_propagation():
    s = make_model("ehrenfest", {}, 6)
    a = oracle_law(s, 0, [6], t_max=200000)
    b = hitting_law(s, 0, [6], t_max=200000)
    assert np.max(np.abs(a.pmf - b.pmf)) <= 1e-15
    assert a.tail_mass == pytest.approx(b.tail_mass, rel=1e-6, abs=1e-300)
    assert a.mean() == pytest.approx(oracle_mean(s, 0, 6), rel=1e-12)


def test_law_moments_match_closed_form():
    s = make_model("simple_rw", {"p_plus": 0.3, "q_plus": 0.5, "b": 0}, 6)
    law = oracle_law(s, 6, [0])
    hm = hitting_moments(s, 6, 0)
    assert law.tail_mass < 1e-15
    assert law.mean() == pytest.approx(hm.mean, rel=1e-12)
    assert law.moment(2) == pytest.approx(hm.second_moment, rel=1e-11)


def test_default_horizon_resolves_mass():
    law = oracle_law(make_model("ehrenfest", {}, 4), 4, [0])
    assert law.pmf.sum() + law.tail_mass == pytest.approx(1.0, abs=1e-13)


def test_budgets():
    with pytest.raises(BudgetExceededError):
        oracle_law(make_model("ehrenfest", {}, 3), 0, [3], t_max=10**9)
    with pytest.raises(BudgetExceededError):
        oracle_mean(make_model("simple_rw", {"b": 0}, 80), 0, 80)


def test_taboo_kernel_shape_and_validation():
    s = make_model("ehrenfest", {}, 3)
    K = taboo_kernel(s, -3, 2, [3])
    assert K.size == 6
    assert K.exit[-1] == pytest.approx(s.p_at(2))
    with pytest.raises(ValueError):
        DenseKernel(np.arange(2), np.array([[0.5, 0.7], [0.1, 0.1]]), np.zeros(2))
    with pytest.raises(ValueError):
        DenseKernel(np.arange(3), np.array([[0, 0, 0.1], [0, 0, 0], [0, 0, 0]]), np.zeros(3))


def test_mmatrix_matches_thomas_on_benign_system(rng):
    n = 12
    down = np.r_[0.0, rng.uniform(0.1, 0.4, n - 1)]
    up = np.r_[rng.uniform(0.1, 0.4, n - 1), 0.0]
    ex = rng.uniform(0.05, 0.2, n)
    rhs = rng.uniform(0, 1, n)
    x1 = mmatrix_solve(down, up, ex, rhs)
    x2 = thomas_solve(-down, down + up + ex, -up, rhs)
    np.testing.assert_allclose(x1, x2, rtol=1e-12)


def test_mean_in_deep_well_against_mpmath():
    # strong drift makes the naive elimination lose ~8 digits here
    spec = random_spec(np.random.default_rng(3), 0, 30, min_rate=0.0)
    spec = make_model("simple_rw", {"p_plus": 0.05, "q_plus": 0.6, "b": 0}, 30)
    mpmath.mp.dps = 50
    n = spec.n_states - 1
    A = mpmath.zeros(n, n)
    for i in range(n):
        x = i + 1
        A[i, i] = mpmath.mpf(spec.p_at(x)) + mpmath.mpf(spec.q_at(x))
        if i > 0:
            A[i, i - 1] = -mpmath.mpf(spec.q_at(x))
        if i < n - 1:
            A[i, i + 1] = -mpmath.mpf(spec.p_at(x))
    sol = mpmath.lu_solve(A, mpmath.matrix([1] * n))
    ref = float(sol[n - 1])
    assert oracle_mean(spec, 30, 0) == pytest.approx(ref, rel=1e-13)
    assert mean_hit_down(spec, None, 30, 0) == pytest.approx(ref, rel=1e-13)


def test_last_exit_adjacent():
    law = oracle_last_exit_law(make_model("ehrenfest", {}, 3), 1, 0)
    assert law.pmf[1] == 1.0 and law.pmf.sum() == 1.0


def test_last_exit_frozen_geometric():
    # from 0 the final excursion is 0 -> 1, k holds at 1, then 1 -> 2
    s = ChainSpec.from_tables(0, 2, [0.5, 0.25], [0.25, 0.5])
    law = oracle_last_exit_law(s, 0, 2, k_max=60)
    s_ = np.arange(2, 61)
    assert law.pmf[0] == law.pmf[1] == 0.0
    np.testing.assert_allclose(law.pmf[2:], 0.5 ** (s_ - 1), rtol=1e-13)
    back = oracle_last_exit_law(s, 2, 0, k_max=60)
    np.testing.assert_allclose(back.pmf, law.pmf, atol=1e-15)


def test_last_exit_reversal_asymmetric(rng):
    spec = random_spec(rng, -5, 7, min_rate=0.05)
    fw = oracle_last_exit_law(spec, -5, 7, k_max=500)
    bw = oracle_last_exit_law(spec, 7, -5, k_max=500)
    assert np.max(np.abs(fw.pmf - bw.pmf)) <= 1e-10 * fw.pmf.max()
    # the full hitting time is very different
    assert oracle_mean(spec, -5, 7) != pytest.approx(oracle_mean(spec, 7, -5), rel=0.01)


def test_last_exit_mass_resolves():
    law = oracle_last_exit_law(make_model("ehrenfest", {}, 4), 4, 0)
    assert law.pmf.sum() == pytest.approx(1.0, abs=1e-13)
    assert law.pmf[:4].sum() == 0.0
