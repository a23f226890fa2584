"""Verdicts built from exact laws, exact moments and Monte Carlo samples:
cut-off profiles, normalized-variance sweeps, Exp(1) goodness of fit,
two-time-scale ratios and the last-exit reversal test.

All trend verdicts are finite-sample statements about the table they were
computed from; nothing here asserts a limit.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import stats

from .chain import ChainFamily, ChainSpec, invariant_measure
from .exact import (
    HittingMoments,
    hitting_moments,
    mean_hit_down,
    mean_hit_two_sided,
    mean_hit_up,
    second_moment_down,
    second_moment_up,
    step_variances,
    two_sided_moments,
    _down_steps,
    _up_steps,
)
from .laws import ExactLaw
from .mc import LAST_EXIT, SampleSet

__all__ = [
    "CutoffProfile",
    "EscapeTest",
    "TwoScaleReport",
    "ReversalVerdict",
    "TrendVerdict",
    "cutoff_profile",
    "variance_criterion_sweep",
    "escape_test",
    "ks_exp_distance",
    "two_scale_report",
    "reversal_test",
    "loglog_slope",
    "trend_verdict",
]


@dataclass(frozen=True)
class CutoffProfile:
    c_grid: np.ndarray
    prob: np.ndarray
    source: str

    def rows(self):
        return [(float(c), float(p)) for c, p in zip(self.c_grid, self.prob)]

    def at(self, c: float) -> float:
        i = int(np.flatnonzero(np.isclose(self.c_grid, c))[0])
        return float(self.prob[i])


def cutoff_profile(law: ExactLaw | SampleSet, mean: float, c_grid) -> CutoffProfile:
    """``P(U > c * mean)`` for each ``c`` in the (sorted) grid.

    For an exact law the survival function is interpolated linearly between
    integer steps; for samples it is the empirical survival.
    """
    if mean <= 0:
        raise ValueError("mean must be positive")
    c = np.asarray(c_grid, dtype=float)
    if np.any(np.diff(c) < 0):
        raise ValueError("c_grid must be sorted")
    s = c * mean
    if isinstance(law, ExactLaw):
        S = law.survival()
        t0 = np.floor(s).astype(np.int64)
        frac = s - t0
        lo = np.where(t0 <= law.t_max, S[np.minimum(t0, law.t_max)], law.tail_mass)
        hi = np.where(t0 + 1 <= law.t_max, S[np.minimum(t0 + 1, law.t_max)], law.tail_mass)
        prob = (1 - frac) * lo + frac * hi
        # survival is non-increasing; kill rounding noise that could break that
        prob = np.minimum.accumulate(np.clip(prob, 0.0, 1.0))
        return CutoffProfile(c, prob, "exact-law")
    v = np.sort(np.asarray(law.values, dtype=float))
    if v.size == 0:
        raise ValueError("empty sample set")
    prob = 1.0 - np.searchsorted(v, s, side="right") / v.size
    return CutoffProfile(c, prob, "empirical")


# -- variance criterion ----------------------------------------------------------

def loglog_slope(x, y) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    return float(np.polyfit(lx, ly, 1)[0])


@dataclass(frozen=True)
class TrendVerdict:
    decreasing: bool
    final_below: bool
    slope: float
    threshold: float

    @property
    def vanishing(self) -> bool:
        return self.decreasing and self.final_below

    def to_dict(self):
        return {**asdict(self), "vanishing": self.vanishing}


def trend_verdict(a_list, values, threshold: float, window: int = 3) -> TrendVerdict:
    """Evidence that ``values`` tend to 0: strict decrease over the last
    ``window`` points and a final value below ``threshold``."""
    v = np.asarray(values, float)
    tail = v[-window:]
    dec = bool(np.all(np.diff(tail) < 0)) if len(tail) >= 2 else False
    slope = loglog_slope(a_list, v) if np.all(v > 0) and len(v) >= 2 else float("nan")
    return TrendVerdict(dec, bool(v[-1] < threshold), slope, float(threshold))


def _normvar_right(spec, pi):
    n = 0 if spec.b <= 0 <= spec.a else spec.b
    m1 = mean_hit_down(spec, pi, spec.a, n)
    m2 = second_moment_down(spec, pi, spec.a, n)
    sv = step_variances(spec, pi)
    var_steps = math.fsum(sv[n - spec.b + 1:].tolist())
    return m1, m2 / m1**2 - 1.0, var_steps / m1**2


def _normvar_left(spec, pi):
    if spec.b == 0:
        return None, None
    m1 = mean_hit_up(spec, pi, spec.b, 0)
    m2 = second_moment_up(spec, pi, spec.b, 0)
    return m1, m2 / m1**2 - 1.0


def variance_criterion_sweep(family: ChainFamily, a_list, threshold: float = 0.05) -> dict:
    """``Var(T_{a->0} / E[T_{a->0}])`` (and the left mirror) for each ``a``.

    The right-side value is computed twice: from the second-moment formula and
    as a sum of independent one-step variances; both columns are returned.
    """
    rows = []
    for a in a_list:
        spec = family(int(a))
        pi = invariant_measure(spec)
        m1, nv, nv_steps = _normvar_right(spec, pi)
        ml, nvl = _normvar_left(spec, pi)
        rows.append({"a": int(a), "mean_right": m1, "norm_var_right": nv,
                     "norm_var_right_steps": nv_steps, "mean_left": ml, "norm_var_left": nvl})
    a_arr = [r["a"] for r in rows]
    right = trend_verdict(a_arr, [r["norm_var_right"] for r in rows], threshold)
    out = {"rows": rows, "right": right}
    if all(r["norm_var_left"] is not None for r in rows):
        out["left"] = trend_verdict(a_arr, [r["norm_var_left"] for r in rows], threshold)
    return out


# -- escape / exponential law ----------------------------------------------------

@dataclass(frozen=True)
class EscapeTest:
    ks_distance: float
    n: int | None
    threshold: float
    normalization: str
    mean: float

    @property
    def passed(self) -> bool:
        return self.ks_distance <= self.threshold

    def to_dict(self):
        return {**asdict(self), "passed": self.passed}


def ks_exp_distance(law: ExactLaw, mean: float) -> float:
    """``sup_s |P(T / mean <= s) - (1 - e^{-s})|`` for an integer-valued law.

    The sup is attained at an atom, from the left or the right.
    """
    F = law.cdf()
    t = law.support.astype(float)
    G = -np.expm1(-t / mean)
    F_left = np.concatenate([[0.0], F[:-1]])
    # beyond t_max the law is unknown; callers keep tail_mass negligible
    return max(float(np.max(np.abs(F - G))), float(np.max(np.abs(F_left - G))))


def escape_test(data: SampleSet | ExactLaw | np.ndarray, mean: float | None = None,
                threshold: float | None = None) -> EscapeTest:
    """KS distance between the law of ``V / mean`` and Exp(1).

    ``mean`` should be the exact expectation; without it the sample mean is
    used and the result is flagged ``normalization="sample"``. The default
    threshold is the 1% critical value ``1.63 / sqrt(n)`` for samples and 0.05
    for exact laws.
    """
    if isinstance(data, ExactLaw):
        if mean is None:
            mean, norm = data.mean(), "law"
        else:
            norm = "exact"
        d = ks_exp_distance(data, mean)
        return EscapeTest(d, None, 0.05 if threshold is None else threshold, norm, float(mean))
    v = np.asarray(data.values if isinstance(data, SampleSet) else data, dtype=float)
    if v.size == 0:
        raise ValueError("empty sample set")
    if mean is None:
        mean, norm = float(v.mean()), "sample"
    else:
        norm = "exact"
    if mean <= 0:
        raise ValueError("mean must be positive")
    d = float(stats.kstest(v / mean, "expon").statistic)
    thr = 1.63 / math.sqrt(v.size) if threshold is None else threshold
    return EscapeTest(d, int(v.size), float(thr), norm, float(mean))


# -- two time scales ---------------------------------------------------------------

@dataclass(frozen=True)
class TwoScaleReport:
    H: tuple
    ratio_sup: float
    sup_source: int
    denominator: float
    m2_ratio: float
    m2_bound: float | None

    def to_dict(self):
        return asdict(self)


def two_scale_report(spec: ChainSpec, H=("a",)) -> TwoScaleReport:
    """``sup_x E[T_{x->0}] / E[T_{0->H}]`` and ``E[S^2]`` for ``S = T_{0->H} / E[T_{0->H}]``.

    ``H`` names the exit set: ``("a",)``, ``("b",)`` or ``("a", "b")``.
    ``m2_bound`` is the second-moment bound ``2 + 2 E[T_{b->0}] / E[T_{0->a}]``
    (mirrored for ``H = ("b",)``); it is ``None`` for the two-sided exit.
    """
    H = tuple(sorted(set(H)))
    pi = invariant_measure(spec)
    i0 = spec.idx(0)
    d = _down_steps(spec, pi)
    u = _up_steps(spec, pi)
    to0 = np.zeros(spec.n_states)
    to0[i0 + 1:] = np.cumsum(d[i0 + 1:])
    to0[:i0] = np.cumsum(u[:i0][::-1])[::-1]
    k = int(np.argmax(to0))
    sup = float(to0[k])
    bound = None
    if H == ("a",):
        hm = hitting_moments(spec, 0, spec.a, pi)
        bound = 2.0 + 2.0 * (mean_hit_up(spec, pi, spec.b, 0) if spec.b < 0 else 0.0) / hm.mean
    elif H == ("b",):
        if spec.b == 0:
            raise ValueError("H = {b} needs b < 0")
        hm = hitting_moments(spec, 0, spec.b, pi)
        bound = 2.0 + 2.0 * mean_hit_down(spec, pi, spec.a, 0) / hm.mean
    elif H == ("a", "b"):
        if spec.b == 0:
            raise ValueError("H = {a, b} needs b < 0")
        m1 = mean_hit_two_sided(spec, pi, 0, spec.b, spec.a)
        _, m2 = two_sided_moments(spec, 0, spec.b, spec.a)
        hm = HittingMoments(m1, m2)
    else:
        raise ValueError(f"H must be ('a',), ('b',) or ('a', 'b'), got {H}")
    return TwoScaleReport(H, sup / hm.mean, int(spec.states[k]), hm.mean,
                          hm.second_moment / hm.mean**2, bound)


# -- reversal ------------------------------------------------------------------------

@dataclass(frozen=True)
class ReversalVerdict:
    statistic: float
    pvalue: float
    alpha: float
    mean_diff_se: float
    n_xy: int
    n_yx: int

    @property
    def rejected(self) -> bool:
        return self.pvalue < self.alpha

    def to_dict(self):
        return {**asdict(self), "rejected": self.rejected}


def _component(s: SampleSet, which: str) -> np.ndarray:
    if which == "T_tilde":
        if s.kind != LAST_EXIT:
            raise ValueError(f"T_tilde requested from a {s.kind!r} sample set")
        return s.t_tilde
    if which == "T":
        return s.values
    raise ValueError(f"unknown component {which!r}")


def reversal_test(samples_xy: SampleSet, samples_yx: SampleSet, alpha: float = 0.01,
                  components=("T_tilde", "T_tilde")) -> ReversalVerdict:
    """Two-sample KS test of ``T~_{x->y}`` against ``T~_{y->x}``.

    ``components`` selects which arrays are compared; ``("T_tilde", "T")`` gives
    the negative control against a full hitting time.
    """
    u = _component(samples_xy, components[0]).astype(float)
    v = _component(samples_yx, components[1]).astype(float)
    if u.size == 0 or v.size == 0:
        raise ValueError("empty sample set")
    res = stats.ks_2samp(u, v)
    se = math.sqrt(u.var(ddof=1) / u.size + v.var(ddof=1) / v.size) if min(u.size, v.size) > 1 else 0.0
    diff = (u.mean() - v.mean()) / se if se > 0 else 0.0
    return ReversalVerdict(float(res.statistic), float(res.pvalue), float(alpha), float(diff),
                           int(u.size), int(v.size))
