"""Command-line front end: ``bdwell {analyze,simulate,sweep,verify}``.

Every run writes ``resolved_config.json`` next to its outputs with all defaults
filled in; feeding that file back through ``--config`` reproduces the run
byte for byte. Exit codes: 0 ok, 1 usage error, 2 check failure, 3 budget exceeded.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .chain import InvalidChainError, invariant_measure, make_family, make_model
from .diagnostics import (
    cutoff_profile,
    escape_test,
    reversal_test,
    trend_verdict,
    variance_criterion_sweep,
)
from .exact import SWEEP_COLUMNS, drift_report, energy_profile, hitting_moments, sd_condition_sweep
from .files import load_model, write_csv, write_json
from .laws import BudgetExceededError, hitting_law
from .mc import LAST_EXIT, RngPolicy, resolve_state, sample_hit, sample_last_exit
from .oracle import MAX_STATES, oracle_last_exit_law
from .verify import run_suite, step_variant_report

EXIT_OK, EXIT_USAGE, EXIT_CHECK, EXIT_BUDGET = 0, 1, 2, 3
OUT_ENV = "BDWELL_OUT"
DEFAULT_C_GRID = [round(0.05 * k, 2) for k in range(0, 41)]
# cut-off profiles are only computed exactly up to this many live states
PROFILE_MAX_STATES = 64

# option name -> default; None means "not set" (model options) or computed later
DEFAULTS = {
    "model": None, "spec": None, "a": None, "b": None, "p": None, "q": None, "param": [],
    "seed": 0, "out": None,
    "hit": [], "last_exit": [], "n": 10000, "skip_holds": False, "allow_censored": False,
    "cap": 10**9, "alpha": 0.01, "escape_threshold": None,
    "c_grid": None, "t_max_factor": 50.0,
    "a_list": None, "threshold": 0.05,
    "n_random": 30, "a_max": 20, "perturb": None, "eq": None,
}
# options that never change outputs and so stay out of the config echo
NOT_ECHOED = ("workers", "config", "out")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _model_args(p):
    g = p.add_argument_group("model")
    g.add_argument("--model", help="zoo model: simple_rw, varying_rw, ehrenfest, half_well")
    g.add_argument("--spec", help="JSON model file (zoo name + params, or explicit p/q tables)")
    g.add_argument("--a", type=int, help="right endpoint")
    g.add_argument("--b", type=int, help="left endpoint (default -a)")
    g.add_argument("--p", type=float, help="p_plus, the up-rate right of 0")
    g.add_argument("--q", type=float, help="q_plus, the down-rate right of 0")
    g.add_argument("--param", action="append", metavar="KEY=VALUE",
                   help="extra model parameter (repeatable), e.g. --param d_plus=4")


def _common(p):
    p.add_argument("--config", help="JSON file of option values; explicit flags win")
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./bdwell_out)")
    p.add_argument("--seed", type=int, help="master seed (default 0)")
    p.add_argument("--workers", type=int, default=1, help="worker threads; never changes results")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="bdwell", description="Hitting-time calculus for birth-and-death chains.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    an = sub.add_parser("analyze", help="exact drift report, moments and cut-off profiles")
    _model_args(an), _common(an)
    an.add_argument("--hit", action="append", metavar="SRC:DST",
                    help="hitting query, e.g. a:0, 0:a or 0:b,a (two-sided); repeatable")
    an.add_argument("--c-grid", help="comma-separated c values for the profile")
    an.add_argument("--t-max-factor", type=float, help="law horizon as a multiple of the mean (50)")

    si = sub.add_parser("simulate", help="Monte Carlo samples plus verdicts")
    _model_args(si), _common(si)
    si.add_argument("--hit", action="append", metavar="SRC:DST")
    si.add_argument("--last-exit", action="append", metavar="SRC:DST",
                    help="last-exit decomposition of T_{SRC->DST}; repeatable")
    si.add_argument("--n", type=int, help="samples per query (10000)")
    si.add_argument("--skip-holds", action="store_true", default=None,
                    help="replace holding runs by geometric draws")
    si.add_argument("--allow-censored", action="store_true", default=None)
    si.add_argument("--cap", type=int, help="per-trajectory step cap (1e9)")
    si.add_argument("--alpha", type=float, help="test level (0.01)")
    si.add_argument("--escape-threshold", type=float, help="KS acceptance bound (default 1.63/sqrt(n))")

    sw = sub.add_parser("sweep", help="strong-drift and variance tables over a")
    _model_args(sw), _common(sw)
    sw.add_argument("--a-list", help="e.g. 64,128,256 or 2^6..2^14 or 6..14")
    sw.add_argument("--threshold", type=float, help="final-value bound for vanishing trends (0.05)")

    ve = sub.add_parser("verify", help="closed forms against the oracle, identities, bounds")
    _common(ve)
    ve.add_argument("--n-random", type=int, help="random chains in the suite (30)")
    ve.add_argument("--a-max", type=int, help="largest a - b (20)")
    ve.add_argument("--perturb", type=int, metavar="X",
                    help="test hook: closed forms see p_X scaled by 1.01 on the first random chain")
    ve.add_argument("--eq", choices=["all", "step-variance", "rl74"],
                    help="only the one-step second-moment variant test; rl74 is an accepted alias")
    return ap


# -- config resolution -----------------------------------------------------------------

def resolve_config(args: argparse.Namespace) -> dict:
    """Defaults < ``--config`` file < explicit flags; everything materialized."""
    cfg = {k: (list(v) if isinstance(v, list) else v) for k, v in DEFAULTS.items()}
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        unknown = set(doc) - set(DEFAULTS) - {"command", "resolved_model", "spec_digest"}
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        if doc.get("command", args.command) != args.command:
            raise UsageError(f"config is for {doc['command']!r}, not {args.command!r}")
        cfg.update({k: v for k, v in doc.items() if k in DEFAULTS})
    for k, v in vars(args).items():
        if k in DEFAULTS and v is not None:
            cfg[k] = v
    cfg["command"] = args.command
    cfg["param"] = sorted(cfg.get("param") or [])
    return cfg


def _parse_value(s: str):
    for cast in (int, float):
        try:
            return cast(s)
        except ValueError:
            pass
    if s.lower() in ("true", "false"):
        return s.lower() == "true"
    return s


def _model_params(cfg) -> dict:
    params = {}
    for item in cfg["param"]:
        if "=" not in item:
            raise UsageError(f"--param expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        params[k.strip()] = _parse_value(v.strip())
    if cfg["p"] is not None:
        params["p_plus"] = cfg["p"]
    if cfg["q"] is not None:
        params["q_plus"] = cfg["q"]
    if cfg["b"] is not None:
        params["b"] = cfg["b"]
    return params


def build_spec(cfg, a=None):
    if cfg["spec"]:
        if cfg["model"]:
            raise UsageError("give either --model or --spec, not both")
        spec = load_model(cfg["spec"])
        if a is not None and a != spec.a:
            raise UsageError("a model file fixes a; sweeps need --model")
        return spec
    if not cfg["model"]:
        raise UsageError("a model is required: --model NAME or --spec FILE")
    a = cfg["a"] if a is None else a
    if a is None:
        raise UsageError("--a is required with --model")
    return make_model(cfg["model"], _model_params(cfg), a)


def _family(cfg):
    if not cfg["model"]:
        raise UsageError("sweeps need --model")
    return make_family(cfg["model"], _model_params(cfg))


def parse_query(spec, token: str):
    """``'SRC:DST'`` -> (source, target) with target an int or an (m, n) pair."""
    if ":" not in token:
        raise UsageError(f"query {token!r} must look like SRC:DST")
    src, dst = token.split(":", 1)
    try:
        x = resolve_state(spec, src)
        if "," in dst:
            m, n = sorted(resolve_state(spec, t) for t in dst.split(","))
            return x, (m, n)
        return x, resolve_state(spec, dst)
    except ValueError as exc:
        raise UsageError(f"query {token!r}: {exc}") from None


def parse_a_list(text) -> list[int]:
    if isinstance(text, list):
        return [int(v) for v in text]
    text = str(text).replace(" ", "")
    out = []
    for part in text.split(","):
        if ".." in part:
            lo, hi = part.split("..")
            if lo.startswith("2^") and hi.startswith("2^"):
                out += [2**k for k in range(int(lo[2:]), int(hi[2:]) + 1)]
            else:
                out += list(range(int(lo), int(hi) + 1))
        elif part.startswith("2^"):
            out.append(2 ** int(part[2:]))
        elif part:
            out.append(int(part))
    if not out:
        raise UsageError("empty --a-list")
    return out


def _out_dir(args) -> Path:
    d = args.out or os.environ.get(OUT_ENV) or "bdwell_out"
    return Path(d)


def _echo(out: Path, cfg, spec=None):
    doc = {k: v for k, v in cfg.items() if k not in NOT_ECHOED}
    if spec is not None:
        doc["spec_digest"] = spec.digest()
    write_json(out / "resolved_config.json", doc)


def _default_hits(spec):
    q = ["a:0"] if spec.a > 0 else []
    if spec.b < 0:
        q.append("b:0")
    if spec.a > 0:
        q.append("0:a")
    return q


def _qname(x, target):
    return f"{x}->{{{target[0]},{target[1]}}}" if isinstance(target, tuple) else f"{x}->{target}"


# -- commands ---------------------------------------------------------------------------

def cmd_analyze(cfg, out: Path) -> int:
    spec = build_spec(cfg)
    if not cfg["hit"]:
        cfg["hit"] = _default_hits(spec)
    if cfg["c_grid"] is None:
        cfg["c_grid"] = DEFAULT_C_GRID
    elif isinstance(cfg["c_grid"], str):
        cfg["c_grid"] = [float(v) for v in cfg["c_grid"].split(",")]
    _echo(out, cfg, spec)
    pi = invariant_measure(spec)
    report = {"spec": spec.to_dict(), "digest": spec.digest()}
    if spec.b <= 0 <= spec.a:
        rep = drift_report(spec, pi)
        report["drift"] = rep.to_dict()
        H = energy_profile(spec)
        report["energy_slack"] = H.slope_bound(rep, pi)
        report["per_x"] = {"x": spec.states.tolist(), "pi": pi.pi, "logpi": pi.logpi,
                           "suffix": pi.suffix, "prefix": pi.prefix, "H": H.H}
    moments, profiles, notes = [], [], {}
    for token in cfg["hit"]:
        x, target = parse_query(spec, token)
        name = _qname(x, target)
        hm = hitting_moments(spec, x, target, pi)
        moments.append((name, hm.mean, hm.second_moment, hm.variance, hm.normalized_variance))
        if hm.mean == 0:
            continue
        if spec.n_states > PROFILE_MAX_STATES + 1:
            notes[name] = f"no exact law: {spec.n_states} states > {PROFILE_MAX_STATES + 1}"
            continue
        t_max = int(np.ceil(cfg["t_max_factor"] * hm.mean))
        try:
            law = hitting_law(spec, x, list(target) if isinstance(target, tuple) else [target], t_max)
        except BudgetExceededError as exc:
            notes[name] = f"no exact law: {exc}"
            continue
        prof = cutoff_profile(law, hm.mean, cfg["c_grid"])
        profiles += [(name, c, pr) for c, pr in prof.rows()]
        notes[name] = f"exact law to t_max={t_max}, tail mass {law.tail_mass:.3e}"
    report["profile_notes"] = notes
    write_json(out / "drift_report.json", report)
    write_csv(out / "moments.csv", ("query", "mean", "second_moment", "variance", "normalized_variance"), moments)
    write_csv(out / "profile.csv", ("query", "c", "prob"), profiles)
    print(f"analyze: wrote {out}/drift_report.json, moments.csv, profile.csv")
    return EXIT_OK


def _law_ks(samples: np.ndarray, law) -> float:
    v = np.sort(samples)
    F = law.cdf()
    ks = np.arange(len(F))
    emp = np.searchsorted(v, ks, side="right") / v.size
    emp_left = np.searchsorted(v, ks, side="left") / v.size
    F_left = np.concatenate([[0.0], F[:-1]])
    return float(max(np.max(np.abs(emp - F)), np.max(np.abs(emp_left - F_left))))


def cmd_simulate(cfg, out: Path, workers: int) -> int:
    spec = build_spec(cfg)
    if not cfg["hit"] and not cfg["last_exit"]:
        raise UsageError("simulate needs at least one --hit or --last-exit query")
    _echo(out, cfg, spec)
    pi = invariant_measure(spec)
    base = RngPolicy(cfg["seed"])
    kw = dict(workers=workers, cap=cfg["cap"], allow_censored=cfg["allow_censored"])
    rows, meta, verdicts = [], {}, {"hit": {}, "last_exit": {}, "reversal": {}}
    last = {}
    for qi, token in enumerate(cfg["hit"]):
        x, target = parse_query(spec, token)
        name = _qname(x, target)
        s = sample_hit(spec, x, target, cfg["n"], base.child(0, qi), skip_holds=cfg["skip_holds"], **kw)
        meta[name] = s.meta
        rows += [(name, s.kind, i, int(v), "", "") for i, v in enumerate(s.values)]
        hm = hitting_moments(spec, x, target, pi)
        v = {"sample_mean": s.mean(), "stderr": s.stderr(), "exact_mean": hm.mean,
             "z": (s.mean() - hm.mean) / s.stderr() if s.stderr() > 0 else 0.0}
        if hm.mean > 0:
            v["escape_test"] = escape_test(s, hm.mean, cfg["escape_threshold"]).to_dict()
            prof = cutoff_profile(s, hm.mean, [0.8, 1.0, 1.2])
            v["profile"] = {str(c): p for c, p in prof.rows()}
        verdicts["hit"][name] = v
    for qi, token in enumerate(cfg["last_exit"]):
        x, y = parse_query(spec, token)
        if isinstance(y, tuple):
            raise UsageError("--last-exit takes a single target")
        name = f"{x}->{y}"
        s = sample_last_exit(spec, x, y, cfg["n"], base.child(1, qi), **kw)
        meta[name + " (last exit)"] = s.meta
        rows += [(name, s.kind, i, int(t), int(a), int(b)) for i, (t, a, b) in
                 enumerate(zip(s.values, s.tau, s.t_tilde))]
        v = {"mean_T": s.mean(), "mean_tau": float(s.tau.mean()), "mean_T_tilde": float(s.t_tilde.mean())}
        if abs(x - y) - 1 <= MAX_STATES:
            law = oracle_last_exit_law(spec, x, y)
            d = _law_ks(s.t_tilde, law)
            bound = 3 * np.sqrt(np.log(2 / cfg["alpha"]) / (2 * s.n))
            v["oracle_ks"] = {"distance": d, "bound": float(bound), "passed": bool(d <= bound)}
        verdicts["last_exit"][name] = v
        last[(x, y)] = s
    for (x, y), s in sorted(last.items()):
        if (y, x) in last and x < y:
            r = reversal_test(s, last[(y, x)], cfg["alpha"])
            neg = reversal_test(last[(y, x)], s, cfg["alpha"], components=("T_tilde", "T"))
            verdicts["reversal"][f"{x}<->{y}"] = {"test": r.to_dict(), "control_vs_full_T": neg.to_dict()}
    write_csv(out / "samples.csv", ("query", "kind", "index", "T", "tau", "T_tilde"), rows)
    write_json(out / "samples.json", meta)
    write_json(out / "verdicts.json", verdicts)
    print(f"simulate: wrote {out}/samples.csv, samples.json, verdicts.json")
    return EXIT_OK


def cmd_sweep(cfg, out: Path) -> int:
    if cfg["a_list"] is None:
        raise UsageError("sweep needs --a-list")
    cfg["a_list"] = parse_a_list(cfg["a_list"])
    fam = _family(cfg)
    _echo(out, cfg)
    rows = sd_condition_sweep(fam, cfg["a_list"])
    var = variance_criterion_sweep(fam, cfg["a_list"], cfg["threshold"])
    extra = ("mean_right", "norm_var_right", "norm_var_left")
    table = [[r[c] for c in SWEEP_COLUMNS] + [v[c] for c in extra] for r, v in zip(rows, var["rows"])]
    write_csv(out / "sweep.csv", SWEEP_COLUMNS + extra, table)
    a = cfg["a_list"]
    thr = cfg["threshold"]
    trend = {"sd_right": trend_verdict(a, [r["sd_ratio_right"] for r in rows], thr).to_dict(),
             "norm_var_right": var["right"].to_dict()}
    has_left = all(r["sd_ratio_left"] is not None for r in rows)
    if has_left:
        trend["sd_left"] = trend_verdict(a, [r["sd_ratio_left"] for r in rows], thr).to_dict()
        trend["norm_var_left"] = var["left"].to_dict()
        trend["cross_left"] = trend_verdict(a, [r["cross_left"] for r in rows], thr).to_dict()
        trend["cross_right"] = trend_verdict(a, [r["cross_right"] for r in rows], thr).to_dict()
    sd = trend["sd_right"]["vanishing"] and (not has_left or trend["sd_left"]["vanishing"])
    trend["verdict"] = "SD" if sd else "no-SD"
    write_json(out / "trend.json", trend)
    print(f"sweep: verdict {trend['verdict']}; wrote {out}/sweep.csv, trend.json")
    return EXIT_OK


def cmd_verify(cfg, out: Path) -> int:
    _echo(out, cfg)
    if cfg["eq"] in ("step-variance", "rl74"):
        rep = step_variant_report(cfg["seed"])
        for v, e in rep["worst_rel_err"].items():
            status = "MATCHES" if v in rep["matching"] else "differs"
            print(f"one-step second moment, variant {v!r}: worst rel. error {e:.3e} vs oracle -> {status}")
        write_json(out / "verify.json", {"step_variance": rep})
        return EXIT_OK if len(rep["matching"]) == 1 else EXIT_CHECK
    checks = run_suite(cfg["seed"], cfg["n_random"], cfg["a_max"], cfg["perturb"])
    failed = [c for c in checks if not c.passed]
    for c in failed:
        print(c.line())
    doc = {"n_checks": len(checks), "n_failed": len(failed),
           "failed": [{"name": c.name, "where": c.where, "lhs": c.lhs, "rhs": c.rhs,
                       "rel_err": c.rel_err} for c in failed]}
    if cfg["eq"] == "all":
        doc["step_variance"] = step_variant_report(cfg["seed"])
    write_json(out / "verify.json", doc)
    print(f"verify: {len(checks) - len(failed)}/{len(checks)} checks passed")
    return EXIT_OK if not failed else EXIT_CHECK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        out = _out_dir(args)
        if args.command == "analyze":
            return cmd_analyze(cfg, out)
        if args.command == "simulate":
            return cmd_simulate(cfg, out, args.workers)
        if args.command == "sweep":
            return cmd_sweep(cfg, out)
        return cmd_verify(cfg, out)
    except BudgetExceededError as exc:
        print(f"bdwell: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (UsageError, InvalidChainError, ValueError) as exc:
        print(f"bdwell: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
