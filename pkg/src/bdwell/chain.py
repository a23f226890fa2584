"""Birth-and-death chains on an integer interval, their invariant measures,
and a small zoo of model families.

States are the integers ``b, b+1, ..., a`` with ``b <= 0 <= a`` (``a = 0`` only
occurs for left half wells). Rates are stored
as dense arrays indexed by ``x - b``; ``p[a - b]`` and ``q[0]`` are always zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import logsumexp

__all__ = [
    "ChainSpec",
    "ChainFamily",
    "InvariantMeasure",
    "InvalidChainError",
    "validate_spec",
    "check_spec",
    "invariant_measure",
    "make_model",
    "make_family",
    "half_well_versions",
    "mirror",
    "random_spec",
    "MODELS",
]

_RATE_SLACK = 1e-12


class InvalidChainError(ValueError):
    """Raised when a chain violates the birth-and-death invariants."""


def _frozen(arr) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class ChainSpec:
    """Nearest-neighbour chain on ``[b, a]``.

    Parameters
    ----------
    b, a : int
        Left and right endpoints, ``b <= 0 < a``.
    p, q : array_like, shape (a - b + 1,)
        Up and down probabilities indexed from ``b``. The entries ``p[-1]``
        (at ``a``) and ``q[0]`` (at ``b``) must be zero.
    """

    b: int
    a: int
    p: np.ndarray
    q: np.ndarray
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        b, a = int(self.b), int(self.a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "a", a)
        n = a - b + 1
        if n < 2:
            raise InvalidChainError(f"need a - b >= 1, got b={b}, a={a}")
        p, q = _frozen(self.p), _frozen(self.q)
        if p.shape != (n,) or q.shape != (n,):
            raise InvalidChainError(
                f"rate arrays must have length a - b + 1 = {n}, got {p.shape} and {q.shape}"
            )
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "params", dict(self.params))

    @classmethod
    def from_tables(cls, b, a, p, q, **kw) -> "ChainSpec":
        """Build from ``p`` over ``[b, a-1]`` and ``q`` over ``[b+1, a]``;
        arrays of the full length ``a - b + 1`` are accepted as-is."""
        n = int(a) - int(b) + 1
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        if p.shape == (n - 1,):
            p = np.append(p, 0.0)
        if q.shape == (n - 1,):
            q = np.insert(q, 0, 0.0)
        return cls(b, a, p, q, **kw)

    @property
    def n_states(self) -> int:
        return self.a - self.b + 1

    @property
    def states(self) -> np.ndarray:
        return np.arange(self.b, self.a + 1)

    @property
    def r(self) -> np.ndarray:
        # rounding in p + q can leave -1e-17 here; validation rejects real excess
        return np.maximum(1.0 - self.p - self.q, 0.0)

    def idx(self, x: int) -> int:
        if not self.b <= x <= self.a:
            raise ValueError(f"state {x} outside [{self.b}, {self.a}]")
        return x - self.b

    def p_at(self, x: int) -> float:
        return float(self.p[self.idx(x)])

    def q_at(self, x: int) -> float:
        return float(self.q[self.idx(x)])

    @property
    def is_half_well(self) -> bool:
        return self.b == 0

    def transition_matrix(self) -> np.ndarray:
        n = self.n_states
        P = np.zeros((n, n))
        i = np.arange(n)
        P[i, i] = self.r
        P[i[:-1], i[:-1] + 1] = self.p[:-1]
        P[i[1:], i[1:] - 1] = self.q[1:]
        return P

    def digest(self) -> str:
        """Stable content hash, used to tag samples and reports."""
        import hashlib

        h = hashlib.sha256()
        h.update(np.array([self.b, self.a], dtype=np.int64).tobytes())
        h.update(np.ascontiguousarray(self.p).tobytes())
        h.update(np.ascontiguousarray(self.q).tobytes())
        return h.hexdigest()[:16]

    def to_dict(self) -> dict:
        return {
            "b": self.b,
            "a": self.a,
            "p": self.p[:-1].tolist(),
            "q": self.q[1:].tolist(),
            "name": self.name,
        }

    def __repr__(self):
        return f"ChainSpec(name={self.name!r}, b={self.b}, a={self.a})"


def validate_spec(spec: ChainSpec) -> list[str]:
    """Return every invariant violation of ``spec``; empty means valid."""
    out = []
    if spec.a < 0:
        out.append(f"a = {spec.a} must be >= 0")
    if spec.b > 0:
        out.append(f"b = {spec.b} must be <= 0")
    p, q = spec.p, spec.q
    for i, x in enumerate(spec.states):
        px, qx = p[i], q[i]
        if not (np.isfinite(px) and np.isfinite(qx)):
            out.append(f"non-finite rate at x={x}")
            continue
        if x < spec.a:
            if px <= 0:
                out.append(f"p_{x} = {px:g} breaks irreducibility")
            elif px > 1:
                out.append(f"p_{x} = {px:g} exceeds 1")
        elif px != 0:
            out.append(f"p_{x} = {px:g} must be 0 at the right endpoint")
        if x > spec.b:
            if qx <= 0:
                out.append(f"q_{x} = {qx:g} breaks irreducibility")
            elif qx > 1:
                out.append(f"q_{x} = {qx:g} exceeds 1")
        elif qx != 0:
            out.append(f"q_{x} = {qx:g} must be 0 at the left endpoint")
        if px + qx > 1 + _RATE_SLACK:
            out.append(f"p_{x} + q_{x} = {px + qx:g} exceeds 1 at x={x}")
    return out


def check_spec(spec: ChainSpec) -> ChainSpec:
    """Raise :class:`InvalidChainError` unless ``spec`` is valid."""
    problems = validate_spec(spec)
    if problems:
        raise InvalidChainError("; ".join(problems))
    return spec


def _neumaier_cumsum(values: np.ndarray) -> np.ndarray:
    out = np.empty_like(values)
    s = 0.0
    c = 0.0
    for i, v in enumerate(values):
        t = s + v
        if abs(s) >= abs(v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
        out[i] = s + c
    return out


@dataclass(frozen=True, eq=False)
class InvariantMeasure:
    """Reversible measure of a chain, with cumulative masses.

    All arrays are indexed by ``x - b``. ``suffix[i]`` is the mass of
    ``[x, a]`` and ``prefix[i]`` the mass of ``[b, x]``; ``log_*`` hold the
    natural logarithms, which stay finite where the masses underflow.
    """

    b: int
    a: int
    logpi: np.ndarray
    pi: np.ndarray
    suffix: np.ndarray
    prefix: np.ndarray
    log_suffix: np.ndarray
    log_prefix: np.ndarray

    def at(self, x: int) -> float:
        return float(self.pi[x - self.b])

    def mass(self, lo: int, hi: int) -> float:
        """Mass of the closed interval ``[lo, hi]``."""
        lo, hi = max(lo, self.b), min(hi, self.a)
        if lo > hi:
            return 0.0
        if hi == self.a:
            return float(self.suffix[lo - self.b])
        if lo == self.b:
            return float(self.prefix[hi - self.b])
        # pick the side that does not subtract two large numbers
        if self.suffix[lo - self.b] <= self.prefix[hi - self.b]:
            return float(self.suffix[lo - self.b] - self.suffix[hi + 1 - self.b])
        return float(self.prefix[hi - self.b] - self.prefix[lo - 1 - self.b])


def invariant_measure(spec: ChainSpec) -> InvariantMeasure:
    """Invariant measure built in log space from the detailed-balance ratios.

    ``log pi(x) - log pi(x-1) = log p_{x-1} - log q_x``, anchored at ``x = 0``
    (or at ``b`` if 0 is outside the interval) and normalized by log-sum-exp.
    """
    check_spec(spec)
    with np.errstate(divide="ignore"):
        steps = np.log(spec.p[:-1]) - np.log(spec.q[1:])
    if not np.all(np.isfinite(steps)):
        raise InvalidChainError("non-finite log ratio in invariant measure")
    logpi = np.concatenate([[0.0], np.cumsum(steps)])
    anchor = -spec.b if spec.b <= 0 <= spec.a else 0
    logpi -= logpi[anchor]
    logpi -= logsumexp(logpi)
    pi = np.exp(logpi)
    suffix = _neumaier_cumsum(pi[::-1])[::-1]
    prefix = _neumaier_cumsum(pi)
    log_suffix = np.logaddexp.accumulate(logpi[::-1])[::-1]
    log_prefix = np.logaddexp.accumulate(logpi)
    return InvariantMeasure(
        spec.b, spec.a,
        _frozen(logpi), _frozen(pi), _frozen(suffix), _frozen(prefix),
        _frozen(log_suffix), _frozen(log_prefix),
    )


# -- model zoo ---------------------------------------------------------------

def _rates_sign(b, a, p_plus, q_plus, p_minus, q_minus, p0=None, q0=None):
    x = np.arange(b, a + 1)
    p = np.where(x > 0, p_plus, p_minus).astype(float)
    q = np.where(x > 0, q_plus, q_minus).astype(float)
    p[x == 0] = p_plus if p0 is None else p0
    q[x == 0] = q_minus if q0 is None else q0
    p[-1] = 0.0
    q[0] = 0.0
    return p, q


def _simple_rw(a, b, p_plus=0.2, q_plus=0.4, p_minus=None, q_minus=None, p0=None, q0=None):
    p_minus = q_plus if p_minus is None else p_minus
    q_minus = p_plus if q_minus is None else q_minus
    for nm, v in [("p_plus", p_plus), ("q_plus", q_plus), ("p_minus", p_minus), ("q_minus", q_minus)]:
        if not 0 < v <= 1:
            raise ValueError(f"{nm} = {v} must lie in (0, 1]")
    p, q = _rates_sign(b, a, p_plus, q_plus, p_minus, q_minus, p0, q0)
    return p, q


def _varying_rw(a, b, p_plus=0.2, q_plus=0.4, p_minus=None, q_minus=None,
                d_plus=0, d_minus=0, d_power=None, d_scale=1.0,
                p_of: Callable | None = None, q_of: Callable | None = None):
    """Sign-dependent rates outside a flat bottom ``[d_minus, d_plus]`` where
    ``p_{x-1} = q_x = 1/2`` for each edge. With ``d_power`` the extents scale as ``d_scale * a**d_power``.
    ``p_of(x, a)`` / ``q_of(x, a)`` override the rates pointwise."""
    p, q = _simple_rw(a, b, p_plus, q_plus, p_minus, q_minus)
    if d_power is not None:
        d_plus = int(math.floor(d_scale * a ** d_power))
        d_minus = -int(math.floor(d_scale * abs(b) ** d_power)) if b < 0 else 0
    d_plus = min(int(d_plus), a - 1)
    d_minus = max(int(d_minus), b + 1) if b < 0 else 0
    x = np.arange(b, a + 1)
    if d_plus > 0 or d_minus < 0:
        # every edge inside [d_minus, d_plus] is balanced; the endpoints already drift inward
        p[(x >= d_minus) & (x < d_plus)] = 0.5
        q[(x > d_minus) & (x <= d_plus)] = 0.5
    if p_of is not None:
        p = np.array([p_of(int(v), a) for v in x], dtype=float)
    if q_of is not None:
        q = np.array([q_of(int(v), a) for v in x], dtype=float)
    p[-1] = 0.0
    q[0] = 0.0
    return p, q


def _ehrenfest(a, b):
    if b != -a:
        raise ValueError("the Ehrenfest chain lives on [-a, a]")
    x = np.arange(-a, a + 1, dtype=float)
    return (a - x) / (2 * a), (a + x) / (2 * a)


_BUILDERS = {
    "simple_rw": _simple_rw,
    "varying_rw": _varying_rw,
    "ehrenfest": _ehrenfest,
}
MODELS = tuple(_BUILDERS) + ("half_well",)


def _resolve_b(name, params, a):
    if name == "ehrenfest":
        return -a
    if "b" in params and params["b"] is not None:
        return int(params["b"])
    return -int(round(params.get("b_ratio", 1.0) * a))


def make_model(name: str, params: dict | None = None, a: int = 1) -> ChainSpec:
    """Instantiate a zoo model at size ``a``.

    ``params`` may carry ``b`` (fixed left endpoint) or ``b_ratio`` (``b = -round(b_ratio * a)``,
    default 1). ``half_well`` takes ``base`` (a zoo name), ``side`` ('right' or 'left')
    and the base model's own parameters.
    """
    params = dict(params or {})
    a = int(a)
    if a < 1:
        raise ValueError(f"a = {a} must be >= 1")
    if name == "half_well":
        base = params.pop("base", "simple_rw")
        side = params.pop("side", "right")
        if base in ("half_well",) or base not in _BUILDERS:
            raise ValueError(f"unknown base model {base!r}")
        if side not in ("right", "left"):
            raise ValueError(f"side must be 'right' or 'left', got {side!r}")
        if base != "ehrenfest":
            params.setdefault("b", -a)
        full = make_model(base, params, a)
        left, right = half_well_versions(full)
        out = right if side == "right" else left
        return ChainSpec(out.b, out.a, out.p, out.q, name="half_well",
                         params={"base": base, "side": side, **params})
    if name not in _BUILDERS:
        raise ValueError(f"unknown model {name!r}; choose from {', '.join(MODELS)}")
    b = _resolve_b(name, params, a)
    kw = {k: v for k, v in params.items() if k not in ("b", "b_ratio")}
    p, q = _BUILDERS[name](a, b, **kw)
    spec = ChainSpec(b, a, p, q, name=name, params=params)
    problems = validate_spec(spec)
    if problems:
        raise ValueError(f"{name} with {params} at a={a}: " + "; ".join(problems))
    return spec


@dataclass(frozen=True)
class ChainFamily:
    """A model indexed by the well size ``a``."""

    name: str
    params: dict = field(default_factory=dict)
    generator: Callable[[int], ChainSpec] | None = None

    def __call__(self, a: int) -> ChainSpec:
        if self.generator is not None:
            return self.generator(a)
        return make_model(self.name, self.params, a)


def make_family(name: str, params: dict | None = None) -> ChainFamily:
    fam = ChainFamily(name, dict(params or {}))
    fam(2)  # fail early on bad names/parameters
    return fam


def half_well_versions(spec: ChainSpec) -> tuple[ChainSpec, ChainSpec]:
    """Left chain on ``[b, 0]`` and right chain on ``[0, a]``.

    The rate that crosses 0 is folded into the holding probability at 0;
    all other rates are copied.
    """
    if spec.b >= 0:
        raise InvalidChainError("half-well split needs b < 0 < a")
    i0 = -spec.b
    rp = spec.p[i0:].copy()
    rq = spec.q[i0:].copy()
    rq[0] = 0.0
    lp = spec.p[: i0 + 1].copy()
    lq = spec.q[: i0 + 1].copy()
    lp[-1] = 0.0
    left = ChainSpec(spec.b, 0, lp, lq, name=f"{spec.name}:left")
    right = ChainSpec(0, spec.a, rp, rq, name=f"{spec.name}:right")
    return left, right


def random_spec(rng: np.random.Generator, b: int, a: int, min_rate: float = 0.0) -> ChainSpec:
    """Random valid chain: i.i.d. uniform (q, r, p) triples renormalized per state.

    ``min_rate`` floors p and q before renormalizing (to keep wells from getting
    arbitrarily deep in tests that need finite run times).
    """
    n = a - b + 1
    w = rng.uniform(size=(n, 3))
    w[:, [0, 2]] = np.maximum(w[:, [0, 2]], min_rate)
    w[0, 0] = 0.0
    w[-1, 2] = 0.0
    w /= w.sum(axis=1, keepdims=True)
    return ChainSpec(b, a, w[:, 2], w[:, 0], name="random")


def mirror(spec: ChainSpec) -> ChainSpec:
    """Reflect ``x -> -x``; maps a chain on ``[b, a]`` to one on ``[-a, -b]``.

    Only valid as a :class:`ChainSpec` when ``b < 0``.
    """
    return ChainSpec(-spec.a, -spec.b, spec.q[::-1].copy(), spec.p[::-1].copy(),
                     name=f"{spec.name}:mirror")
