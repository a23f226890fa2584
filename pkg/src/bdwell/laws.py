"""Exact hitting-time laws as truncated probability mass functions."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._recur import propagate_absorption
from .chain import ChainSpec, check_spec

__all__ = ["ExactLaw", "BudgetExceededError", "hitting_law", "live_interval"]

STEP_BUDGET = 10**8


class BudgetExceededError(RuntimeError):
    """A requested horizon or sample effort exceeds the configured budget."""


@dataclass(frozen=True, eq=False)
class ExactLaw:
    """Law of a nonnegative integer time, truncated at ``t_max``.

    ``pmf[t] = P(T = t)`` for ``t = 0..t_max`` and ``tail_mass = P(T > t_max)``.
    """

    pmf: np.ndarray
    tail_mass: float
    label: str = ""

    @property
    def t_max(self) -> int:
        return self.pmf.shape[0] - 1

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.pmf.shape[0])

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.pmf)

    def survival(self) -> np.ndarray:
        """``P(T > t)`` for each ``t`` in the support; accumulated from the tail."""
        return np.cumsum(self.pmf[::-1])[::-1] - self.pmf + self.tail_mass

    def mean(self) -> float:
        """Mean of the truncated part (a lower bound when ``tail_mass > 0``)."""
        return float(np.dot(self.support, self.pmf))

    def moment(self, k: int) -> float:
        return float(np.dot(self.support.astype(float) ** k, self.pmf))

    def to_rows(self):
        return [(int(t), float(m)) for t, m in enumerate(self.pmf)]


def live_interval(spec: ChainSpec, j: int, targets) -> tuple[int, int, bool, bool]:
    """States visited before absorption: ``(lo, hi, absorbs_below, absorbs_above)``."""
    ts = sorted({int(t) for t in (targets if np.iterable(targets) else [targets])})
    for t in ts:
        spec.idx(t)
    spec.idx(j)
    below = [t for t in ts if t < j]
    above = [t for t in ts if t > j]
    lo = below[-1] + 1 if below else spec.b
    hi = above[0] - 1 if above else spec.a
    return lo, hi, bool(below), bool(above)


def hitting_law(spec: ChainSpec, j: int, targets, t_max: int, budget: int = STEP_BUDGET) -> ExactLaw:
    """Exact law of ``T_{j -> targets}`` by forward propagation of the
    tridiagonal kernel, O(t_max * states)."""
    check_spec(spec)
    ts = targets if np.iterable(targets) else [targets]
    t_max = int(t_max)
    if t_max < 0:
        raise ValueError("t_max must be nonnegative")
    if j in set(int(t) for t in ts):
        pmf = np.zeros(t_max + 1)
        pmf[0] = 1.0
        return ExactLaw(pmf, 0.0, label=f"T_{j}->{list(ts)}")
    lo, hi, ab_lo, ab_hi = live_interval(spec, j, ts)
    if not (ab_lo or ab_hi):
        raise ValueError("no reachable target")
    if t_max * (hi - lo + 1) > budget:
        raise BudgetExceededError(f"t_max * states = {t_max * (hi - lo + 1)} exceeds {budget}")
    pmf, alive = propagate_absorption(
        spec.p, spec.q, spec.r, lo - spec.b, hi - spec.b, j - spec.b, ab_lo, ab_hi, t_max
    )
    return ExactLaw(pmf, float(max(alive, 0.0)), label=f"T_{j}->{list(ts)}")
