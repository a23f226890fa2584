"""Self-check suite: closed forms against the brute-force oracle, plus the
identities and inequalities that must hold on every chain.

Each entry is an :class:`~bdwell.exact.Check`; the suite passes when every
check does. ``perturb`` feeds the closed forms a chain with one rate nudged,
so the suite can demonstrate that it actually detects a wrong input.
"""
from __future__ import annotations

import math

import numpy as np

from .chain import ChainSpec, invariant_measure, make_model, random_spec
from .exact import (
    Check,
    commute_identity,
    comparison_checks,
    drift_report,
    mean_hit,
    mean_hit_down,
    mean_hit_two_sided,
    mean_hit_up,
    second_moment_down,
    second_moment_up,
    step_second_moment,
    step_variances,
)
from .oracle import oracle_last_exit_law, oracle_mean, oracle_second_moment

__all__ = [
    "random_suite_specs",
    "oracle_checks",
    "identity_checks",
    "reversal_checks",
    "step_variant_report",
    "run_suite",
    "zoo_specs",
    "nudge",
]

MOMENT_TOL = 1e-9
IDENTITY_TOL = 1e-10


def random_suite_specs(seed: int, count: int, span=(2, 30)) -> list[ChainSpec]:
    """Seeded random chains with ``a - b`` drawn from ``span`` and 0 inside."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(span[0], span[1] + 1))
        b = -int(rng.integers(0, n))
        a = b + n
        out.append(random_spec(rng, b, a))
    return out


def nudge(spec: ChainSpec, x: int, factor: float = 1.01) -> ChainSpec:
    """Copy of ``spec`` with ``p_x`` scaled by ``factor`` (kept a valid chain)."""
    p = spec.p.copy()
    i = spec.idx(x)
    p[i] = min(p[i] * factor, 1.0 - spec.q[i])
    return ChainSpec(spec.b, spec.a, p, spec.q.copy(), name=f"{spec.name}:nudged")


def oracle_checks(spec: ChainSpec, where: str, formula_spec: ChainSpec | None = None,
                  tol: float = MOMENT_TOL) -> list[Check]:
    """Means, second moments, two-sided mean and one-step second moments vs the oracle."""
    fs = spec if formula_spec is None else formula_spec
    pi = invariant_measure(fs)
    b, a = spec.b, spec.a
    out = []
    for j, n in [(a, b), (b, a), (a, 0), (0, a), (b, 0), (0, b)]:
        if j == n:
            continue
        tag = f"{where} {j}->{n}"
        out.append(Check("mean", mean_hit(fs, pi, j, n), oracle_mean(spec, j, n), tol, where=tag))
        f2 = second_moment_down(fs, pi, j, n) if n < j else second_moment_up(fs, pi, j, n)
        out.append(Check("second_moment", f2, oracle_second_moment(spec, j, n), tol, where=tag))
    if a - b >= 2:
        j = (a + b) // 2 if (a + b) // 2 not in (a, b) else b + 1
        out.append(Check("two_sided_mean", mean_hit_two_sided(fs, pi, j, b, a, check=False),
                         oracle_mean(spec, j, [b, a]), tol, where=f"{where} {j}->{{{b},{a}}}"))
    for x in (b + 1, a):
        out.append(Check("step_second_moment", step_second_moment(fs, pi, x),
                         oracle_second_moment(spec, x, x - 1), tol, where=f"{where} x={x}"))
    return out


def identity_checks(spec: ChainSpec, where: str) -> list[Check]:
    """Identities that involve no oracle; all at the identity tolerance."""
    pi = invariant_measure(spec)
    b, a = spec.b, spec.a
    out = []
    pairs = [(b, a), (b, 0), (0, a)] + [(x, x + 1) for x in (b, a - 1)]
    for j, n in pairs:
        if j >= n:
            continue
        lhs = mean_hit_up(spec, pi, j, n) + mean_hit_down(spec, pi, n, j)
        out.append(Check("commute", lhs, commute_identity(spec, pi, j, n), IDENTITY_TOL,
                         where=f"{where} {j}<->{n}"))
    if a - b >= 2:
        for j in sorted({b + 1, (a + b) // 2, a - 1}):
            if not b < j < a:
                continue
            # both closed forms; the function raises if they disagree, so compare explicitly
            E = {(u, v): mean_hit(spec, pi, u, v) for u in (b, j, a) for v in (b, j, a) if u != v}
            den = E[(b, a)] + E[(a, b)]
            f1 = (E[(a, b)] * E[(j, a)] - E[(b, a)] * E[(a, j)]) / den
            f2 = (E[(b, a)] * E[(j, b)] - E[(a, b)] * E[(b, j)]) / den
            out.append(Check("two_sided_forms", f1, f2, IDENTITY_TOL, where=f"{where} j={j}"))
    if a > 0 and b <= 0:
        n = 0
        m1 = mean_hit_down(spec, pi, a, n)
        var = second_moment_down(spec, pi, a, n) - m1**2
        sv = step_variances(spec, pi)
        out.append(Check("variance_split", var, math.fsum(sv[n - b + 1:].tolist()), MOMENT_TOL,
                         where=f"{where} {a}->{n}"))
        rep = drift_report(spec, pi)
        if rep.K_a is not None and rep.K_a > 1:
            xs = np.arange(0, a + 1)
            lhs = pi.suffix[xs - b]
            rhs = np.exp(-rep.alpha_a * xs)
            k = int(np.argmax(lhs / rhs))
            out.append(Check("tail_bound", float(lhs[k]), float(rhs[k]) + 1e-12, 0.0, kind="le",
                             where=f"{where} x={int(xs[k])}"))
        if b < 0:
            # on a half well the face q_x E[T_{x->x-1}] does not exist at x = 0
            out.append(Check("K_a_two_faces", rep.K_a, rep.K_a_hitting, IDENTITY_TOL, where=where))
        # second-moment bound with j = 0, n = a
        if a > 0:
            E = mean_hit_up(spec, pi, 0, a)
            Eb = mean_hit_up(spec, pi, b, 0) if b < 0 else 0.0
            m2 = second_moment_up(spec, pi, 0, a)
            out.append(Check("second_moment_bound", m2, 2 * E**2 + 2 * Eb * E - E, 1e-12, kind="le",
                             where=f"{where} 0->{a}"))
    resid = np.abs(pi.pi[1:] * spec.q[1:] - pi.pi[:-1] * spec.p[:-1]) / (pi.pi[1:] * spec.q[1:])
    out.append(Check("detailed_balance", float(resid.max()), 1e-12, 0.0, kind="le", where=where))
    return out


def reversal_checks(spec: ChainSpec, x: int, y: int, where: str, k_max: int = 500,
                    tol: float = 1e-10) -> list[Check]:
    """Last-exit law from x to y against the one from y to x, pointwise."""
    fw = oracle_last_exit_law(spec, x, y, k_max)
    bw = oracle_last_exit_law(spec, y, x, k_max)
    diff = np.abs(fw.pmf - bw.pmf)
    k = int(np.argmax(diff))
    scale = max(float(fw.pmf.max()), 1e-300)
    return [Check("last_exit_reversal", float(diff[k] / scale), tol, 0.0, kind="le",
                  where=f"{where} {x}<->{y} k={k}")]


def step_variant_report(seed: int = 0, count: int = 20) -> dict:
    """Both readings of the one-step second moment against the oracle.

    Returns per-variant worst relative error and the list of variants that
    agree to :data:`MOMENT_TOL` on every tested (chain, x).
    """
    worst = {"tail": 0.0, "printed": 0.0}
    for i, spec in enumerate(random_suite_specs(seed, count, (2, 20))):
        pi = invariant_measure(spec)
        for x in range(spec.b + 1, spec.a + 1):
            o = oracle_second_moment(spec, x, x - 1)
            for v in worst:
                f = step_second_moment(spec, pi, x, v)
                worst[v] = max(worst[v], abs(f - o) / abs(o))
    matching = [v for v, e in worst.items() if e <= MOMENT_TOL]
    return {"worst_rel_err": worst, "matching": matching, "tolerance": MOMENT_TOL,
            "chains": count, "seed": seed}


def zoo_specs(a_max: int = 20) -> list[ChainSpec]:
    """A handful of zoo members used by the identity part of the suite."""
    a = min(a_max, 20)
    return [
        make_model("ehrenfest", {}, min(a, 6)),
        make_model("simple_rw", {"p_plus": 0.2, "q_plus": 0.4}, a),
        make_model("simple_rw", {"p_plus": 0.2, "q_plus": 0.4, "b": 0}, a),
        make_model("simple_rw", {"p_plus": 0.25, "q_plus": 0.35, "p_minus": 0.45, "q_minus": 0.3,
                                 "b_ratio": 0.5}, a),
        make_model("varying_rw", {"p_plus": 0.2, "q_plus": 0.4, "d_plus": 3, "d_minus": -2}, a),
        make_model("half_well", {"base": "ehrenfest", "side": "left"}, min(a, 6)),
    ]


def run_suite(seed: int = 0, n_random: int = 30, a_max: int = 20, perturb: int | None = None) -> list[Check]:
    """Every check at ``a - b <= a_max``.

    With ``perturb = x`` the closed forms of the first random chain see ``p_x``
    scaled by 1.01 (``x`` clipped into range) while the oracle keeps the true chain.
    """
    checks: list[Check] = []
    specs = random_suite_specs(seed, n_random, (2, a_max))
    for i, spec in enumerate(specs):
        fs = None
        if perturb is not None and i == 0:
            x = int(np.clip(perturb, spec.b, spec.a - 1))
            fs = nudge(spec, x)
        checks += oracle_checks(spec, f"random#{i}", fs)
        checks += identity_checks(spec, f"random#{i}")
    for spec in zoo_specs(a_max):
        tag = f"{spec.name}(b={spec.b},a={spec.a})"
        checks += identity_checks(spec, tag)
        if spec.b < 0 < spec.a:
            checks += [Check(c.name, c.lhs, c.rhs, c.tol, c.kind, f"{tag} {c.where}".strip())
                       for c in comparison_checks(spec)]
    checks += reversal_checks(make_model("ehrenfest", {}, 4), 4, 0, "ehrenfest a=4")
    i, s = next((i, s) for i, s in enumerate(specs) if s.a - s.b >= 2)
    checks += reversal_checks(s, s.b, s.a, f"random#{i}")
    return checks
