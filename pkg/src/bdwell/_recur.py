"""Compiled linear recurrences shared by the exact formulas and the law propagator."""
import numpy as np
from numba import njit


@njit(cache=True)
def suffix_over_pi(w, p, q, lo, hi):
    """``out[k] = sum_{l=k}^{hi} w[l] pi(l) / pi(k)`` for ``lo <= k <= hi``.

    Uses ``pi(k+1) / pi(k) = p[k] / q[k+1]``; entries outside ``[lo, hi]`` are 0.
    """
    out = np.zeros(w.shape[0])
    acc = w[hi]
    out[hi] = acc
    for k in range(hi - 1, lo - 1, -1):
        acc = w[k] + (p[k] / q[k + 1]) * acc
        out[k] = acc
    return out


@njit(cache=True)
def prefix_over_pi(w, p, q, lo, hi):
    """``out[k] = sum_{l=lo}^{k} w[l] pi(l) / pi(k)`` for ``lo <= k <= hi``."""
    out = np.zeros(w.shape[0])
    acc = w[lo]
    out[lo] = acc
    for k in range(lo + 1, hi + 1):
        acc = w[k] + (q[k] / p[k - 1]) * acc
        out[k] = acc
    return out


@njit(cache=True)
def propagate_absorption(p, q, r, lo, hi, start, absorb_lo, absorb_hi, t_max):
    """Absorption-time pmf of the chain started at ``start`` on live states ``[lo, hi]``.

    Exits below ``lo`` (when ``absorb_lo``) or above ``hi`` (when ``absorb_hi``)
    are absorbed. Returns (pmf of length t_max + 1, surviving mass).
    """
    n = hi - lo + 1
    v = np.zeros(n)
    w = np.zeros(n)
    v[start - lo] = 1.0
    pmf = np.zeros(t_max + 1)
    for t in range(1, t_max + 1):
        out = 0.0
        if absorb_lo:
            out += v[0] * q[lo]
        if absorb_hi:
            out += v[n - 1] * p[hi]
        for i in range(n):
            k = lo + i
            s = v[i] * r[k]
            if i > 0:
                s += v[i - 1] * p[k - 1]
            if i < n - 1:
                s += v[i + 1] * q[k + 1]
            w[i] = s
        for i in range(n):
            v[i] = w[i]
        pmf[t] = out
    alive = 0.0
    for i in range(n):
        alive += v[i]
    return pmf, alive


@njit(cache=True)
def mmatrix_sweep(down, up, excess, rhs):
    """Subtraction-free tridiagonal solve of ``(I - Q) x = rhs``.

    Row ``i`` has off-diagonals ``-down[i]``, ``-up[i]`` and diagonal
    ``down[i] + up[i] + excess[i]``; the reduced-row excess is propagated
    instead of the pivot so nothing cancels.
    """
    n = excess.shape[0]
    piv = np.zeros(n)
    d = np.zeros(n)
    e = excess[0]
    piv[0] = up[0] + e
    d[0] = rhs[0] / piv[0]
    for i in range(1, n):
        e = excess[i] + down[i] / piv[i - 1] * e
        piv[i] = up[i] + e
        d[i] = (rhs[i] + down[i] * d[i - 1]) / piv[i]
    x = np.zeros(n)
    x[n - 1] = d[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = d[i] + up[i] / piv[i] * x[i + 1]
    return x
