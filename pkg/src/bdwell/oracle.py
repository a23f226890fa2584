"""Brute-force ground truth for small chains.

Nothing here uses the invariant measure or the closed forms: moments come from
first-step linear systems (Thomas sweep), laws from powers of the dense
substochastic kernel.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import ChainSpec, check_spec
from .laws import BudgetExceededError, ExactLaw

__all__ = [
    "DenseKernel",
    "MAX_STATES",
    "T_BUDGET",
    "taboo_kernel",
    "thomas_solve",
    "mmatrix_solve",
    "oracle_mean",
    "oracle_second_moment",
    "oracle_law",
    "oracle_last_exit_law",
    "stationary_by_power_iteration",
]

MAX_STATES = 65
T_BUDGET = 10**8
_BLOCK = 4096


@dataclass(frozen=True, eq=False)
class DenseKernel:
    """Transition matrix restricted to ``states``; mass leaving them is killed.

    ``exit`` holds, per state, the one-step probability of landing in the target set.
    """

    states: np.ndarray
    matrix: np.ndarray
    exit: np.ndarray

    def __post_init__(self):
        M = self.matrix
        if np.any(M < 0) or np.any(M.sum(axis=1) > 1 + 1e-12):
            raise ValueError("kernel must be substochastic")
        if np.any(np.abs(np.triu(M, 2)) > 0) or np.any(np.abs(np.tril(M, -2)) > 0):
            raise ValueError("kernel must be tridiagonal")

    @property
    def size(self) -> int:
        return len(self.states)


def _component(spec, j, targets):
    ts = set(int(t) for t in targets)
    lo = j
    while lo - 1 >= spec.b and lo - 1 not in ts:
        lo -= 1
    hi = j
    while hi + 1 <= spec.a and hi + 1 not in ts:
        hi += 1
    return lo, hi, ts


def taboo_kernel(spec: ChainSpec, lo: int, hi: int, targets) -> DenseKernel:
    """Kernel on ``[lo, hi]``; moves to a state in ``targets`` count as exits."""
    P = spec.transition_matrix()
    ts = set(int(t) for t in targets)
    i0, i1 = lo - spec.b, hi - spec.b
    Q = P[i0:i1 + 1, i0:i1 + 1].copy()
    exit_ = np.zeros(i1 - i0 + 1)
    for t in ts:
        k = t - spec.b
        if i0 - 1 == k:
            exit_[0] += P[i0, k]
        if i1 + 1 == k:
            exit_[-1] += P[i1, k]
    return DenseKernel(np.arange(lo, hi + 1), Q, exit_)


def thomas_solve(sub, diag, sup, rhs) -> np.ndarray:
    """Solve a tridiagonal system by forward elimination and back substitution.

    ``sub[i]`` multiplies ``x[i-1]`` and ``sup[i]`` multiplies ``x[i+1]`` in row ``i``.
    """
    n = len(diag)
    c = np.zeros(n)
    d = np.zeros(n)
    denom = diag[0]
    c[0] = sup[0] / denom if n > 1 else 0.0
    d[0] = rhs[0] / denom
    for i in range(1, n):
        denom = diag[i] - sub[i] * c[i - 1]
        if denom == 0:
            raise ArithmeticError("singular tridiagonal system")
        c[i] = sup[i] / denom if i < n - 1 else 0.0
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / denom
    x = np.zeros(n)
    x[-1] = d[-1]
    for i in range(n - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return x


def mmatrix_solve(down, up, excess, rhs) -> np.ndarray:
    """Solve ``(I - Q) x = rhs`` for a tridiagonal substochastic ``Q`` without subtraction.

    Row ``i`` reads ``(down[i] + up[i] + excess[i]) x[i] - down[i] x[i-1] - up[i] x[i+1]``,
    where ``excess`` is the mass leaving the block. Elimination tracks the excess
    of each reduced row instead of the pivot (as in the GTH algorithm), so the
    relative accuracy survives even when the pivots nearly cancel. ``rhs >= 0``.
    """
    n = len(excess)
    piv = np.zeros(n)
    d = np.zeros(n)
    e = excess[0]
    piv[0] = up[0] + e
    d[0] = rhs[0] / piv[0]
    for i in range(1, n):
        w = down[i] / piv[i - 1]
        e = excess[i] + w * e
        piv[i] = up[i] + e
        if piv[i] == 0:
            raise ArithmeticError("singular system: no exit from the block")
        d[i] = (rhs[i] + down[i] * d[i - 1]) / piv[i]
    x = np.zeros(n)
    x[-1] = d[-1]
    for i in range(n - 2, -1, -1):
        x[i] = d[i] + up[i] / piv[i] * x[i + 1]
    return x


def _rates(K: DenseKernel):
    Q = K.matrix
    down = np.zeros(K.size)
    up = np.zeros(K.size)
    down[1:] = np.diag(Q, -1)
    up[:-1] = np.diag(Q, 1)
    return down, up


def _prepare(spec, j, targets):
    check_spec(spec)
    ts = list(targets) if np.iterable(targets) else [targets]
    spec.idx(j)
    for t in ts:
        spec.idx(int(t))
    if j in set(int(t) for t in ts):
        return None
    lo, hi, ts = _component(spec, j, ts)
    if hi - lo + 1 > MAX_STATES:
        raise BudgetExceededError(f"oracle limited to {MAX_STATES} live states, got {hi - lo + 1}")
    return taboo_kernel(spec, lo, hi, ts), j - lo


def oracle_mean(spec: ChainSpec, j: int, targets) -> float:
    """E[T_{j -> targets}] from ``(I - Q) m = 1`` on the live component of ``j``."""
    prep = _prepare(spec, j, targets)
    if prep is None:
        return 0.0
    K, k = prep
    if np.all(K.exit == 0):
        raise ArithmeticError("target unreachable")
    down, up = _rates(K)
    return float(mmatrix_solve(down, up, K.exit, np.ones(K.size))[k])


def oracle_second_moment(spec: ChainSpec, j: int, targets) -> float:
    """E[T^2] from ``(I - Q) m2 = 2 m1 - 1`` (first-step analysis, holds included)."""
    prep = _prepare(spec, j, targets)
    if prep is None:
        return 0.0
    K, k = prep
    down, up = _rates(K)
    m1 = mmatrix_solve(down, up, K.exit, np.ones(K.size))
    m2 = mmatrix_solve(down, up, K.exit, 2.0 * m1 - 1.0)
    return float(m2[k])


def _blocked_first_passage(Q, exit_, u0, n_steps):
    """``f[s] = u0 Q^s exit`` for ``s = 0..n_steps-1`` and the row ``u0 Q^n_steps``."""
    n = Q.shape[0]
    B = min(_BLOCK, max(n_steps, 1))
    G = np.empty((n, B))
    g = exit_.copy()
    for s in range(B):
        G[:, s] = g
        g = Q @ g
    QB = np.linalg.matrix_power(Q, B)
    f = np.empty(n_steps)
    u = u0.copy()
    t = 0
    while t < n_steps:
        m = min(B, n_steps - t)
        f[t:t + m] = u @ G[:, :m]
        if m == B:
            u = u @ QB
        else:
            u = u @ np.linalg.matrix_power(Q, m)
        t += m
    return f, u


def oracle_law(spec: ChainSpec, j: int, targets, t_max: int | None = None) -> ExactLaw:
    """Exact law of ``T_{j -> targets}`` on ``0..t_max`` by kernel powers.

    ``t_max`` defaults to 50 times the mean, capped at :data:`T_BUDGET`.
    """
    ts = list(targets) if np.iterable(targets) else [targets]
    prep = _prepare(spec, j, ts)
    if t_max is None:
        mean = oracle_mean(spec, j, ts)
        t_max = min(int(np.ceil(50 * mean)) + 1 if mean > 0 else 1, T_BUDGET)
    t_max = int(t_max)
    if t_max > T_BUDGET:
        raise BudgetExceededError(f"t_max = {t_max} exceeds {T_BUDGET}")
    pmf = np.zeros(t_max + 1)
    if prep is None:
        pmf[0] = 1.0
        return ExactLaw(pmf, 0.0, label=f"oracle T_{j}->{ts}")
    K, k = prep
    u0 = np.zeros(K.size)
    u0[k] = 1.0
    f, u = _blocked_first_passage(K.matrix, K.exit, u0, t_max)
    pmf[1:] = f
    return ExactLaw(pmf, float(u.sum()), label=f"oracle T_{j}->{ts}")


def oracle_last_exit_law(spec: ChainSpec, x: int, y: int, k_max: int | None = None,
                         rtol: float = 1e-16) -> ExactLaw:
    """Law of the final excursion ``T~_{x -> y}`` (steps after the last visit to x).

    ``pmf[s]`` is the probability that a path leaving ``x`` reaches ``y`` at step
    ``s`` without touching ``x`` or ``y`` in between, normalized by the escape
    probability. Without ``k_max`` the horizon grows until the unresolved mass
    drops below ``rtol``, up to :data:`T_BUDGET`.
    """
    check_spec(spec)
    if x == y:
        raise ValueError("last-exit law needs x != y")
    spec.idx(x), spec.idx(y)
    P = spec.transition_matrix()
    ix, iy = x - spec.b, y - spec.b
    if abs(x - y) == 1:
        horizon = 1 if k_max is None else int(k_max)
        pmf = np.zeros(horizon + 1)
        pmf[1] = 1.0
        return ExactLaw(pmf, 0.0, label=f"last-exit {x}->{y}")
    lo, hi = min(x, y) + 1, max(x, y) - 1
    if hi - lo + 1 > MAX_STATES:
        raise BudgetExceededError(f"oracle limited to {MAX_STATES} interior states")
    i0, i1 = lo - spec.b, hi - spec.b
    Q = P[i0:i1 + 1, i0:i1 + 1]
    n = Q.shape[0]
    to_y = np.zeros(n)
    first = np.zeros(n)
    if y > x:
        to_y[-1] = P[iy - 1, iy]
        first[0] = P[ix, ix + 1]
    else:
        to_y[0] = P[iy + 1, iy]
        first[-1] = P[ix, ix - 1]
    # escape probability: leave x toward y, then hit y before x
    down = np.zeros(n)
    up = np.zeros(n)
    down[1:] = np.diag(Q, -1)
    up[:-1] = np.diag(Q, 1)
    killed = np.zeros(n)
    killed[0] = P[i0, i0 - 1]
    killed[-1] += P[i1, i1 + 1]
    h = mmatrix_solve(down, up, killed, to_y)
    escape = float(first @ h)

    if k_max is not None:
        k_max = int(k_max)
        if k_max > T_BUDGET:
            raise BudgetExceededError(f"k_max = {k_max} exceeds {T_BUDGET}")
        f, u = _blocked_first_passage(Q, to_y, first, max(k_max - 1, 0))
        remaining = float(u @ h)
    else:
        chunks = []
        u = first
        total = 0
        while True:
            f_c, u = _blocked_first_passage(Q, to_y, u, _BLOCK)
            chunks.append(f_c)
            total += _BLOCK
            remaining = float(u @ h)
            if remaining <= rtol * escape or total >= T_BUDGET:
                break
        f = np.concatenate(chunks)
        k_max = total + 1
    pmf = np.zeros(k_max + 1)
    pmf[2:] = f[: k_max - 1] / escape
    return ExactLaw(pmf, max(remaining / escape, 0.0), label=f"last-exit {x}->{y}")


def stationary_by_power_iteration(spec: ChainSpec, tol: float = 1e-15, max_iter: int = 10**7) -> np.ndarray:
    """Fixed point of ``mu -> mu P`` using the lazy kernel ``(I + P) / 2`` (aperiodic)."""
    P = 0.5 * (np.eye(spec.n_states) + spec.transition_matrix())
    mu = np.full(spec.n_states, 1.0 / spec.n_states)
    P64 = np.linalg.matrix_power(P, 64)
    for _ in range(max_iter):
        nxt = mu @ P64
        nxt /= nxt.sum()
        if np.abs(nxt - mu).sum() < tol:
            return nxt
        mu = nxt
    return mu
