import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bdwell.chain import ChainSpec, half_well_versions, invariant_measure, make_family, make_model, random_spec
from bdwell.exact import (
    comparison_checks,
    commute_identity,
    drift_report,
    energy_profile,
    hitting_moments,
    log_mean_hit,
    mean_hit,
    mean_hit_down,
    mean_hit_two_sided,
    mean_hit_up,
    sd_condition_sweep,
    second_moment_down,
    second_moment_up,
    step_second_moment,
    step_variance,
    step_variances,
    two_sided_moments,
)

EHR3 = make_model("ehrenfest", {}, 3)
RW5 = make_model("simple_rw", {"p_plus": 0.2, "q_plus": 0.4, "b": 0}, 5)


def close(x, frac, rtol=1e-13):
    return x == pytest.approx(float(frac), rel=rtol)


# frozen values computed in exact rational arithmetic
@pytest.mark.parametrize("spec,j,n,m1,m2", [
    (EHR3, 3, 0, F(23, 5), F(673, 25)),
    (EHR3, -3, 0, F(23, 5), F(673, 25)),
    (EHR3, 0, 3, F(393, 5), F(302321, 25)),
    (RW5, 5, 0, F(645, 32), F(285705, 512)),
    (RW5, 0, 5, F(285), F(157065)),
    (make_model("ehrenfest", {}, 2), 1, 0, F(5, 3), F(41, 9)),
    (ChainSpec.from_tables(0, 1, [0.5], [0.5]), 0, 1, F(2), F(6)),
])
def test_frozen_moments(spec, j, n, m1, m2):
    hm = hitting_moments(spec, j, n)
    assert close(hm.mean, m1)
    assert close(hm.second_moment, m2)


def test_frozen_two_sided():
    m1, m2 = two_sided_moments(EHR3, 0, -3, 3)
    assert close(m1, F(37)) and close(m2, F(2593))
    assert close(mean_hit_two_sided(EHR3, None, 0, -3, 3), F(37))


def test_two_state_variance_and_commute():
    s = ChainSpec.from_tables(0, 1, [0.5], [0.5])
    assert hitting_moments(s, 0, 1).variance == pytest.approx(2.0)
    assert commute_identity(s, None, 0, 1) == pytest.approx(4.0)


def test_ehrenfest_step_variance_frozen():
    assert close(step_variance(make_model("ehrenfest", {}, 2), None, 1), F(16, 9))


def test_geometric_one_step():
    for p in (0.5, 0.1, 0.01):
        s = ChainSpec.from_tables(0, 1, [p], [0.5])
        hm = hitting_moments(s, 0, 1)
        assert hm.mean == pytest.approx(1 / p, rel=1e-14)
        assert hm.variance == pytest.approx((1 - p) / p**2, rel=1e-13)


def test_same_state_is_zero():
    assert mean_hit(EHR3, None, 2, 2) == 0.0
    assert hitting_moments(EHR3, 2, 2).second_moment == 0.0


def test_wrong_direction_rejected():
    with pytest.raises(ValueError):
        mean_hit_down(EHR3, None, 0, 2)
    with pytest.raises(ValueError):
        mean_hit_up(EHR3, None, 2, 0)


def test_commute_identity_example():
    spec = make_model("simple_rw", {"p_plus": 0.3, "q_plus": 0.5, "b": 0}, 12)
    pi = invariant_measure(spec)
    for j, n in [(0, 12), (3, 7), (11, 12)]:
        lhs = mean_hit_up(spec, pi, j, n) + mean_hit_down(spec, pi, n, j)
        assert lhs == pytest.approx(commute_identity(spec, pi, j, n), rel=1e-12)


def test_two_sided_both_forms_agree_asymmetric(rng):
    spec = random_spec(rng, -6, 9, min_rate=0.05)
    pi = invariant_measure(spec)
    for j in range(-5, 9):
        m1 = mean_hit_two_sided(spec, pi, j, -6, 9)
        assert m1 == pytest.approx(two_sided_moments(spec, j, -6, 9)[0], rel=1e-11)


def test_up_mean_ratio_simple_rw():
    # E[T_{0->a+1}] / E[T_{0->a}] approaches q/p = 2
    fam = make_family("simple_rw", {"p_plus": 0.2, "q_plus": 0.4, "b": 0})
    r = math.exp(log_mean_hit(fam(31), None, 0, 31) - log_mean_hit(fam(30), None, 0, 30))
    assert r == pytest.approx(2.0, rel=1e-8)


def test_log_mean_in_deep_well():
    spec = make_model("simple_rw", {"p_plus": 0.2, "q_plus": 0.4, "b": 0}, 3000)
    lm = log_mean_hit(spec, None, 0, 3000)
    assert lm > 700 * 1.0  # exp would overflow
    assert lm == pytest.approx(3000 * math.log(2) + math.log(1 / 0.2 * 2), rel=1e-3)


def test_variance_is_sum_of_step_variances():
    spec = make_model("varying_rw", {"d_power": 0.5}, 40)
    pi = invariant_measure(spec)
    m1 = mean_hit_down(spec, pi, spec.a, 0)
    var = second_moment_down(spec, pi, spec.a, 0) - m1**2
    sv = step_variances(spec, pi)
    assert var == pytest.approx(math.fsum(sv[-spec.b + 1:]), rel=1e-10)
    assert np.all(sv[1:] >= 0)


def test_step_second_moment_variants_differ():
    spec = make_model("ehrenfest", {}, 4)
    pi = invariant_measure(spec)
    t = step_second_moment(spec, pi, 2, "tail")
    p = step_second_moment(spec, pi, 2, "printed")
    assert t != pytest.approx(p, rel=1e-3)
    with pytest.raises(ValueError):
        step_second_moment(spec, pi, 2, "other")


def test_second_moment_bound_holds():
    spec = make_model("simple_rw", {"p_plus": 0.2, "q_plus": 0.4, "p_minus": 0.25, "q_minus": 0.1}, 15)
    pi = invariant_measure(spec)
    E, Eb = mean_hit_up(spec, pi, 0, 15), mean_hit_up(spec, pi, -15, 0)
    assert second_moment_up(spec, pi, 0, 15) <= 2 * E**2 + 2 * Eb * E - E


def test_drift_report_simple_rw_half_well():
    rep = drift_report(make_model("simple_rw", {"p_plus": 0.2, "q_plus": 0.4, "b": 0}, 40))
    # pi([x,a]) / pi(x) -> 1 / (1 - p/q) = 2 in the far interior
    assert rep.K_a == pytest.approx(2.0, rel=1e-6)
    assert rep.vacuous == ["left"] and rep.K_b is None
    assert rep.K_a == pytest.approx(rep.K_a_hitting, rel=1e-10) or rep.K_a_hitting <= rep.K_a


def test_drift_report_ehrenfest():
    spec = make_model("ehrenfest", {}, 30)
    rep = drift_report(spec)
    pi = invariant_measure(spec)
    assert rep.inv_pi0 == pytest.approx(1 / pi.pi[30], rel=1e-14)
    assert rep.K_a_argmax == 0 and rep.K_a <= rep.inv_pi0
    assert rep.K_a == pytest.approx(rep.K_a_hitting, rel=1e-10)
    assert rep.K_b == pytest.approx(rep.K_a, rel=1e-12)
    assert rep.Q_bound_inverse_holds


def test_ehrenfest_inv_pi0_growth():
    rep = drift_report(make_model("ehrenfest", {}, 10000))
    assert rep.inv_pi0 / math.sqrt(10000) == pytest.approx(math.sqrt(math.pi), abs=1e-3)


def test_flat_bottom_K_bound():
    d, p, q = 4, 0.2, 0.4
    rep = drift_report(make_model("varying_rw", {"p_plus": p, "q_plus": q, "d_plus": d, "d_minus": -2}, 30))
    assert rep.K_a <= d + q / (q - p) + 1e-12
    assert rep.K_b <= 2 + q / (q - p) + 1e-12


def test_sd_sweep_rows():
    rows = sd_condition_sweep(make_family("simple_rw", {"p_plus": 0.2, "q_plus": 0.4, "b": 0}), [8, 16, 32])
    assert [r["a"] for r in rows] == [8, 16, 32]
    assert all(r["K_b"] is None for r in rows)
    sd = [r["sd_ratio_right"] for r in rows]
    assert sd[0] > sd[1] > sd[2]


def test_comparison_checks_pass_on_asymmetric_well():
    spec = make_model("simple_rw", {"p_plus": 0.25, "q_plus": 0.35, "p_minus": 0.45, "q_minus": 0.3,
                                    "b_ratio": 0.5}, 16)
    checks = comparison_checks(spec)
    assert checks and all(c.passed for c in checks), [c.line() for c in checks if not c.passed]


def test_energy_profile_reproduces_measure():
    spec = make_model("simple_rw", {"p_plus": 0.15, "q_plus": 0.45, "p_minus": 0.3, "q_minus": 0.1}, 20)
    pi = invariant_measure(spec)
    E = energy_profile(spec)
    assert E.at(0) == 0.0
    np.testing.assert_allclose(E.pi_ratio(), pi.pi / pi.pi[20], rtol=1e-11)
    slack = E.slope_bound(drift_report(spec, pi), pi)
    assert slack["right"] >= -1e-12 and slack["left"] >= -1e-12


@st.composite
def wells(draw):
    n = draw(st.integers(2, 20))
    b = -draw(st.integers(0, n - 1))
    return random_spec(np.random.default_rng(draw(st.integers(0, 2**32 - 1))), b, b + n, min_rate=0.02)


@settings(max_examples=50, deadline=None)
@given(wells())
def test_moment_properties(spec):
    pi = invariant_measure(spec)
    b, a = spec.b, spec.a
    hm = hitting_moments(spec, a, b, pi)
    assert hm.variance >= -1e-9 * hm.mean**2
    # monotone in the target
    assert mean_hit_down(spec, pi, a, b) >= mean_hit_down(spec, pi, a, b + 1)
    assert mean_hit_up(spec, pi, b, a) + mean_hit_down(spec, pi, a, b) == pytest.approx(
        commute_identity(spec, pi, b, a), rel=1e-10)
