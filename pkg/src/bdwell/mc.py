"""Reproducible Monte Carlo sampling of hitting and last-exit times.

Samples are produced in fixed-size blocks. Block ``k`` of a request draws its
uniforms from its own generator seeded by ``SeedSequence(seed, spawn_key=(*stream, k))``,
so the output depends only on (seed, stream, request) and never on how blocks
are distributed over workers.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .chain import ChainFamily, ChainSpec, check_spec
from .laws import BudgetExceededError

__all__ = [
    "RngPolicy",
    "SampleSet",
    "CensoredError",
    "STEP_CAP",
    "BLOCK_SIZE",
    "sample_hit",
    "sample_two_sided",
    "sample_last_exit",
    "sample_sweep",
    "resolve_state",
]

STEP_CAP = 10**9
BLOCK_SIZE = 1024
_CHUNK = 1 << 20

HIT, TWO_SIDED, LAST_EXIT = "hit", "two_sided_hit", "last_exit"


class CensoredError(BudgetExceededError):
    """Some trajectory reached the per-sample step cap."""


@dataclass(frozen=True)
class RngPolicy:
    """Master seed plus a stream key; equal policies give bit-identical samples."""

    master_seed: int = 0
    stream_id: tuple = (0,)

    def __post_init__(self):
        sid = self.stream_id
        sid = tuple(int(s) for s in sid) if np.iterable(sid) else (int(sid),)
        object.__setattr__(self, "stream_id", sid)
        object.__setattr__(self, "master_seed", int(self.master_seed))

    def child(self, *key) -> "RngPolicy":
        return RngPolicy(self.master_seed, self.stream_id + tuple(int(k) for k in key))

    def block_generator(self, block: int) -> np.random.Generator:
        ss = np.random.SeedSequence(self.master_seed, spawn_key=self.stream_id + (int(block),))
        return np.random.Generator(np.random.SFC64(ss))


@dataclass
class SampleSet:
    """Monte Carlo samples of one query.

    ``values`` are the hitting times T. For ``kind == "last_exit"`` the arrays
    ``tau`` (last visit to the start before T) and ``t_tilde = values - tau``
    are filled as well.
    """

    kind: str
    values: np.ndarray
    tau: np.ndarray | None = None
    censored: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def t_tilde(self) -> np.ndarray | None:
        return None if self.tau is None else self.values - self.tau

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    @property
    def n_censored(self) -> int:
        return 0 if self.censored is None else int(self.censored.sum())

    def mean(self) -> float:
        return float(self.values.mean())

    def stderr(self) -> float:
        return float(self.values.std(ddof=1) / np.sqrt(self.n)) if self.n > 1 else float("nan")

    def rows(self):
        if self.kind == LAST_EXIT:
            tt = self.t_tilde
            return [(i, int(v), int(t), int(s)) for i, (v, t, s) in enumerate(zip(self.values, self.tau, tt))]
        return [(i, int(v)) for i, v in enumerate(self.values)]

    @property
    def columns(self) -> tuple[str, ...]:
        return ("index", "T", "tau", "T_tilde") if self.kind == LAST_EXIT else ("index", "T")


def resolve_state(spec: ChainSpec, token) -> int:
    """Map ``'a'``, ``'b'``, or an integer literal to a state of ``spec``."""
    if isinstance(token, str):
        t = token.strip()
        if t == "a":
            return spec.a
        if t == "b":
            return spec.b
        token = int(t)
    x = int(token)
    spec.idx(x)
    return x


# -- kernels -------------------------------------------------------------------

@njit(nogil=True, cache=True)
def _walk(lo_thr, hi_thr, is_target, start, watch, cap, skip_holds, hold, out_T, out_tau,
          out_cens, state, u):
    """Advance the block's trajectories using the uniforms in ``u``.

    ``state = [sample, x, t, tau]`` is carried across calls so a trajectory can
    straddle chunk boundaries. Returns the number of uniforms consumed; the
    caller refills ``u`` until ``state[0]`` reaches the block size.
    """
    n = out_T.shape[0]
    k = 0
    m = u.shape[0]
    i, x, t, tau = state[0], state[1], state[2], state[3]
    while i < n:
        if is_target[x]:
            out_T[i] = t
            out_tau[i] = tau
            i += 1
            x, t, tau = start, 0, 0
            continue
        if t >= cap:
            out_T[i] = t
            out_tau[i] = tau
            out_cens[i] = True
            i += 1
            x, t, tau = start, 0, 0
            continue
        if skip_holds:
            if k + 2 > m:
                break
            h = hold[x]
            if h > 0.0:
                g = np.floor(np.log(u[k]) / np.log(h))
                if g > cap - t - 1:
                    g = cap - t - 1
                t += np.int64(g)
            k += 1
            v = u[k]
            k += 1
            t += 1
            # conditional on moving: down with prob q / (p + q)
            if v * (1.0 - h) < lo_thr[x]:
                x -= 1
            else:
                x += 1
        else:
            if k >= m:
                break
            v = u[k]
            k += 1
            t += 1
            x += np.int64(v >= hi_thr[x]) - np.int64(v < lo_thr[x])
        if x == watch and not is_target[x]:
            tau = t
    state[0], state[1], state[2], state[3] = i, x, t, tau
    return k


def _run_block(spec, is_target, start, watch, count, cap, skip_holds, gen):
    lo_thr = spec.q.copy()
    hi_thr = 1.0 - spec.p
    hold = np.clip(spec.r, 0.0, 1.0)
    out_T = np.zeros(count, dtype=np.int64)
    out_tau = np.zeros(count, dtype=np.int64)
    out_cens = np.zeros(count, dtype=np.bool_)
    state = np.array([0, start, 0, 0], dtype=np.int64)
    # uniforms are consumed strictly in stream order; leftovers carry over
    size = 4096
    u = gen.random(size)
    while True:
        used = _walk(lo_thr, hi_thr, is_target, start, watch, cap, skip_holds, hold,
                     out_T, out_tau, out_cens, state, u)
        if state[0] >= count:
            break
        size = min(2 * size, _CHUNK)
        u = np.concatenate([u[used:], gen.random(size)])
    return out_T, out_tau, out_cens


def _sample(spec, start, targets, kind, count, rng, workers, cap, allow_censored, skip_holds, watch):
    check_spec(spec)
    count = int(count)
    if count < 1:
        raise ValueError("count must be >= 1")
    if cap > STEP_CAP:
        raise BudgetExceededError(f"step cap {cap} exceeds {STEP_CAP}")
    rng = rng if isinstance(rng, RngPolicy) else RngPolicy(int(rng) if rng is not None else 0)
    is_target = np.zeros(spec.n_states, dtype=np.bool_)
    for t in targets:
        is_target[t - spec.b] = True
    s0 = start - spec.b
    w0 = watch - spec.b if watch is not None else -1
    n_blocks = -(-count // BLOCK_SIZE)
    sizes = [min(BLOCK_SIZE, count - k * BLOCK_SIZE) for k in range(n_blocks)]

    def job(k):
        return _run_block(spec, is_target, s0, w0, sizes[k], int(cap), bool(skip_holds),
                          rng.block_generator(k))

    workers = max(1, int(workers))
    if workers == 1:
        parts = [job(k) for k in range(n_blocks)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(job, range(n_blocks)))
    T = np.concatenate([p[0] for p in parts])
    tau = np.concatenate([p[1] for p in parts])
    cens = np.concatenate([p[2] for p in parts])
    meta = {
        "spec_digest": spec.digest(),
        "seed": rng.master_seed,
        "stream": list(rng.stream_id),
        "count": count,
        "start": int(start),
        "targets": [int(t) for t in targets],
        "step_cap": int(cap),
        "skip_holds": bool(skip_holds),
        "n_censored": int(cens.sum()),
    }
    if cens.any() and not allow_censored:
        raise CensoredError(f"{int(cens.sum())} of {count} trajectories hit the step cap {cap}")
    return SampleSet(kind, T, tau if kind == LAST_EXIT else None, cens, meta)


def sample_hit(spec: ChainSpec, x, y, count: int, rng: RngPolicy | int | None = None, *,
               workers: int = 1, cap: int = STEP_CAP, allow_censored: bool = False,
               skip_holds: bool = False) -> SampleSet:
    """``count`` independent copies of ``T_{x -> y}``.

    ``y`` may also be a pair ``(m, n)`` for the two-sided exit time.
    ``skip_holds`` replaces runs of holding steps by one geometric draw.
    """
    x = resolve_state(spec, x)
    if np.iterable(y) and not isinstance(y, str):
        return sample_two_sided(spec, x, y, count, rng, workers=workers, cap=cap,
                                allow_censored=allow_censored, skip_holds=skip_holds)
    y = resolve_state(spec, y)
    return _sample(spec, x, [y], HIT, count, rng, workers, cap, allow_censored, skip_holds, None)


def sample_two_sided(spec: ChainSpec, x, targets, count: int, rng=None, *, workers: int = 1,
                     cap: int = STEP_CAP, allow_censored: bool = False, skip_holds: bool = False) -> SampleSet:
    x = resolve_state(spec, x)
    m, n = sorted(resolve_state(spec, t) for t in targets)
    if not (m < x < n or x in (m, n)):
        raise ValueError(f"two-sided target needs m <= x <= n, got {m}, {x}, {n}")
    return _sample(spec, x, [m, n], TWO_SIDED, count, rng, workers, cap, allow_censored, skip_holds, None)


def sample_last_exit(spec: ChainSpec, x, y, count: int, rng=None, *, workers: int = 1,
                     cap: int = STEP_CAP, allow_censored: bool = False) -> SampleSet:
    """Pairs ``(tau, T~)`` with ``tau`` the last visit to ``x`` before ``T_{x->y}``.

    ``tau = 0`` when the walk never returns to ``x``; ``T~ = T - tau >= 1``.
    """
    x, y = resolve_state(spec, x), resolve_state(spec, y)
    if x == y:
        raise ValueError("last-exit sampling needs x != y")
    return _sample(spec, x, [y], LAST_EXIT, count, rng, workers, cap, allow_censored, False, x)


def sample_sweep(family: ChainFamily, a_list, query, count: int, rng: RngPolicy | int | None = None,
                 **kw) -> dict[int, SampleSet]:
    """Per-``a`` samples of ``query = (kind, source, target)``.

    Each ``a`` gets the substream ``rng.child(a)``, so adding or removing sweep
    points leaves the others unchanged.
    """
    rng = rng if isinstance(rng, RngPolicy) else RngPolicy(int(rng) if rng is not None else 0)
    kind, src, dst = query
    fn = {HIT: sample_hit, TWO_SIDED: sample_two_sided, LAST_EXIT: sample_last_exit}[kind]
    out = {}
    for a in a_list:
        spec = family(int(a))
        out[int(a)] = fn(spec, src, dst, count, rng.child(int(a)), **kw)
    return out
