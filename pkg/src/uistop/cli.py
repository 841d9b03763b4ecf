"""Command-line front end.

    uistop solve --config scenario.toml [--oracle]
    uistop simulate --config scenario.toml --paths 100000 --seed 7
    uistop estimate wages.csv [--sigma 0.02]
    uistop decide wages.csv --config scenario.toml
    uistop sensitivity --config scenario.toml [--limits | --isoline LEVEL ...]
    uistop utility --config scenario.toml --kappa 100 --variant hit_prob_raw
    uistop schedule --preset french --calibration tail --r 0.0004

Numbers are printed with 7 significant digits.  Domain errors exit with
status 2 and a one-line message on stderr.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
import warnings
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .config import Scenario, load
from .errors import DomainError, TruncationWarning
from .estimation import SequentialDecision, estimate, test_drift
from .hitting import ThresholdPolicy, hit_probability, maximize_enpv, mean_hitting_time
from .model import DETERMINISTIC, deterministic_threshold, solve
from .montecarlo import SimConfig, check_truncation, hit_stats, mean_and_se, simulate_threshold
from .schedule import (
    BenefitSchedule,
    beta_closed_form,
    beta_from_schedule,
    lambda1_mean_matching,
    lambda1_tail,
)
from .sensitivity import B_STAR, VALUE, derivatives, isolines, lambda_star, limits
from .utility import (
    HIT_PROB_POWERED,
    HIT_PROB_RAW,
    MEAN_TIME_POWERED,
    VARIANTS,
    UtilityConfig,
    consumption_gamma,
    kappa_dag,
    max_premium,
    mean_time_objective,
    modified_value,
    raw_objective,
    utility_threshold,
)

WEEKS_PER_YEAR = 365 / 7


def annualize(weekly_rate: float) -> float:
    """Annual growth implied by a weekly continuous rate: exp(365/7 * rate) - 1."""
    return math.expm1(WEEKS_PER_YEAR * weekly_rate)


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.7g}"


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (bool, np.bool_, str)) or value is None:
        return bool(value) if isinstance(value, np.bool_) else value
    if isinstance(value, (int, np.integer)):
        return int(value)
    v = float(value)
    if not math.isfinite(v):
        return fmt(v)
    return float(fmt(v))


class _Output:
    """Collects output and writes it to stdout or a file at the end."""

    def __init__(self, path: str | None):
        self.path = path
        self.buf = io.StringIO()

    def csv(self, header: Sequence[str], rows: Iterable[Sequence]) -> None:
        w = csv.writer(self.buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])

    def json(self, obj) -> None:
        self.buf.write(json.dumps(_jsonable(obj), indent=2) + "\n")

    def flush(self) -> None:
        text = self.buf.getvalue()
        if self.path:
            with open(self.path, "w", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)


def _scenario(args) -> Scenario:
    return load(args.config)


def _out(args, scenario: Scenario | None = None) -> _Output:
    path = args.out
    if path is None and scenario is not None:
        path = scenario.output_path
    return _Output(path)


def _format(args, scenario: Scenario | None = None) -> str:
    if getattr(args, "format", None):
        return args.format
    return scenario.output_format if scenario is not None else "csv"


def _params(args, scenario: Scenario):
    p = scenario.params
    if getattr(args, "x", None) is not None:
        p = p.replace(x=args.x)
    return p


def _emit_pairs(out: _Output, fmt_name: str, pairs: list[tuple[str, object]]) -> None:
    if fmt_name == "json":
        out.json(dict(pairs))
    else:
        out.csv(["quantity", "value"], pairs)


def cmd_solve(args) -> int:
    sc = _scenario(args)
    p = _params(args, sc)
    sol = solve(p)
    d = sol.derived
    pairs: list[tuple[str, object]] = [
        ("regime", sol.regime),
        ("r_tilde", d.r_tilde),
        ("beta1", d.beta1),
        ("q_star", d.q_star),
        ("b_star", sol.b_star),
        ("x", p.x),
        ("value", sol.value(p.x)),
        ("gain", d.beta1 * p.x - p.premium),
        ("stop_now", sol.stop_now(p.x)),
    ]
    if sol.regime == DETERMINISTIC:
        pairs.append(("t_star", deterministic_threshold(p).t_star))
    else:
        policy = ThresholdPolicy(sol.b_star, p, d)
        pairs += [
            ("hit_probability", hit_probability(policy)),
            ("mean_hit_time", mean_hitting_time(policy)),
        ]
        if args.oracle:
            b_min = min(p.x, sol.b_star) * 0.5
            grid = maximize_enpv(p, d, b_min, max(2.0 * sol.b_star, p.x) * 1.5, args.grid_n)
            pairs += [("b_hat_grid", grid.b_hat), ("grid_step", grid.step), ("grid_value", grid.value)]
    pairs += [("r_annual", annualize(p.r)), ("mu_annual", annualize(p.mu))]
    out = _out(args, sc)
    _emit_pairs(out, _format(args, sc), pairs)
    out.flush()
    return 0


def cmd_simulate(args) -> int:
    sc = _scenario(args)
    p = _params(args, sc)
    base = sc.sim or SimConfig()
    overrides = {
        "n_paths": args.paths, "seed": args.seed, "dt": args.dt, "horizon": args.horizon,
        "monitoring": args.monitoring, "workers": args.workers,
    }
    cfg = dataclasses.replace(base, **{k: v for k, v in overrides.items() if v is not None})
    sol = solve(p)
    thresholds = args.b if args.b else [sol.b_star * f for f in (args.b_fraction or [1.0])]

    out = _out(args, sc)
    if args.per_path:
        rows = []
        for b in thresholds:
            res = simulate_threshold(p, b, cfg)
            rows += [(i, b, t, v) for i, (t, v) in enumerate(zip(res.hit_time, res.payoff))]
        out.csv(["path", "b", "hit_time", "payoff"], rows)
    else:
        rows = []
        for b in thresholds:
            check_truncation(p, b, cfg.resolved_horizon(p))
            res = simulate_threshold(p, b, cfg)
            mean, se = mean_and_se(res.payoff)
            hs = hit_stats(res)
            rows.append((b, mean, se, hs.hit_fraction, hs.mean_hit_time))
        out.csv(["b", "estimate", "std_error", "hit_fraction", "mean_hit_time"], rows)
    out.flush()
    return 0


def _read_wages(path: str) -> tuple[np.ndarray, np.ndarray]:
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not {"week", "wage"} <= set(reader.fieldnames):
                raise DomainError(f"{path}: expected a CSV with columns week,wage")
            rows = [(float(r["week"]), float(r["wage"])) for r in reader]
    except OSError as exc:
        raise DomainError(f"cannot read {path}: {exc.strerror}") from None
    except ValueError as exc:
        raise DomainError(f"{path}: {exc}") from None
    if not rows:
        raise DomainError(f"{path}: no observations")
    arr = np.array(rows)
    return arr[:, 0], arr[:, 1]


def cmd_estimate(args) -> int:
    weeks, wages = _read_wages(args.input)
    rep = estimate(weeks, wages)
    test = test_drift(weeks, wages, args.alpha, args.sigma)
    doc = rep.as_dict()
    doc["test"] = {
        "variant": test.variant, "alpha": args.alpha, "reject": test.reject,
        "statistic": test.statistic, "threshold": test.threshold,
    }
    out = _Output(args.out)
    out.json(doc)
    out.flush()
    return 0


def cmd_decide(args) -> int:
    sc = _scenario(args)
    b_star = solve(sc.params).b_star
    weeks, wages = _read_wages(args.input)
    state = SequentialDecision(b_star, args.alpha, args.sigma)
    rows = []
    for w, x in zip(weeks, wages):
        d = state.observe(w, x)
        rows.append((w, x, d.action))
        if state.decision is not None:
            break
    out = _out(args, sc)
    out.csv(["week", "wage", "action"], rows)
    out.flush()
    return 0


def cmd_sensitivity(args) -> int:
    sc = _scenario(args)
    p = _params(args, sc)
    out = _out(args, sc)
    if args.isoline is not None:
        rows = []
        for level in args.isoline:
            pts = isolines(p, level, args.target, tuple(args.lambda0_range), tuple(args.mu_range), args.n)
            rows += [(level, lam, mu) for lam, mu in pts]
        out.csv(["level", "lambda0", "mu"], rows)
    elif args.limits:
        rows = [(e.parameter, e.edge, e.quantity, e.limit, e.monotone) for e in limits(p)]
        out.csv(["parameter", "edge", "quantity", "limit", "monotone"], rows)
    elif args.lambda_star:
        out.csv(["quantity", "value"], [("lambda_star", lambda_star(p))])
    else:
        rep = derivatives(p, rel_step=args.rel_step)
        out.csv(["quantity", "parameter", "derivative", "increment"], rep.table())
    out.flush()
    return 0


def cmd_utility(args) -> int:
    sc = _scenario(args)
    p = _params(args, sc)
    sol = solve(p)
    d = sol.derived
    cfg = UtilityConfig(args.kappa, args.variant)
    b_dag = utility_threshold(p, d, cfg)
    if cfg.variant in (HIT_PROB_POWERED, MEAN_TIME_POWERED):
        u_dag = modified_value(p, d, cfg.kappa)
    elif cfg.variant == HIT_PROB_RAW:
        u_dag = float(raw_objective(p, d, cfg.kappa, b_dag))
    else:
        u_dag = float(mean_time_objective(p, d, cfg.kappa, b_dag))
    gamma = 0.0
    if args.consumption:
        lambda1 = args.lambda1 if args.lambda1 is not None else sc.lambda1
        if lambda1 is None:
            raise DomainError("--consumption needs lambda1 (flag or config key)")
        gamma = consumption_gamma(args.consumption, p.r, p.lambda0, lambda1)
    doc = {
        "b_dag": b_dag,
        "u_dag": u_dag,
        "kappa_dag": kappa_dag(p, d),
        "p_max": max_premium(p, p.x, gamma),
        "gamma": gamma,
        "variant": cfg.variant,
        "kappa": cfg.kappa,
    }
    out = _out(args, sc)
    out.json(doc)
    out.flush()
    return 0


def cmd_schedule(args) -> int:
    if args.config:
        sc = _scenario(args)
        if sc.schedule is None:
            raise DomainError("the config has no [schedule] table")
        sched, r = sc.schedule, sc.params.r
        lambda1 = args.lambda1 if args.lambda1 is not None else sc.lambda1
    else:
        if args.preset == "french":
            sched = BenefitSchedule.french()
        elif args.h0 is not None and args.delta is not None:
            sched = BenefitSchedule.piecewise(args.h0, args.s0 if args.s0 is not None else math.inf, args.delta)
        else:
            raise DomainError("give --preset french, --h0/--delta (with optional --s0), or --config")
        r = args.r
        lambda1 = args.lambda1
    if lambda1 is None:
        if args.calibration == "mean":
            lambda1 = lambda1_mean_matching()
        elif args.calibration == "tail":
            lambda1 = lambda1_tail()
        else:
            raise DomainError("give --lambda1 or --calibration mean|tail")
    pairs: list[tuple[str, object]] = [("lambda1", lambda1), ("r", r)]
    if sched.kind == "piecewise-exponential":
        pairs += [("h0", sched.h0), ("s0", sched.s0), ("delta", sched.delta),
                  ("beta_closed_form", beta_closed_form(sched.h0, sched.s0, sched.delta, lambda1, r))]
    pairs.append(("beta_quadrature", beta_from_schedule(sched, lambda1, r)))
    out = _Output(args.out)
    out.csv(["quantity", "value"], pairs)
    out.flush()
    return 0


def _range(text: str) -> list[float]:
    return [float(v) for v in text.split(",")]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uistop", description="Optimal timing of unemployment insurance entry.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def common(sp, config=True):
        if config:
            sp.add_argument("--config", required=True, help="scenario TOML file")
        sp.add_argument("--out", help="write output here instead of stdout")

    sp = sub.add_parser("solve", help="optimal threshold and value function")
    common(sp)
    sp.add_argument("--x", type=float, help="override the current wage")
    sp.add_argument("--oracle", action="store_true", help="also run the grid-search maximiser")
    sp.add_argument("--grid-n", type=int, default=50_000)
    sp.add_argument("--format", choices=("csv", "json"))
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("simulate", help="Monte Carlo check of threshold strategies")
    common(sp)
    sp.add_argument("--x", type=float)
    sp.add_argument("--b", type=float, action="append", help="threshold (repeatable); default b*")
    sp.add_argument("--b-fraction", type=float, action="append", help="threshold as a multiple of b*")
    sp.add_argument("--paths", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--dt", type=float)
    sp.add_argument("--horizon", type=float)
    sp.add_argument("--monitoring", choices=("grid", "bridge"))
    sp.add_argument("--workers", type=int)
    sp.add_argument("--per-path", action="store_true", help="one row per simulated path")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("estimate", help="drift/volatility estimates from a week,wage CSV")
    common(sp, config=False)
    sp.add_argument("input", help="CSV with columns week,wage")
    sp.add_argument("--alpha", type=float, default=0.05)
    sp.add_argument("--sigma", type=float, help="known volatility (normal test); default t-test")
    sp.set_defaults(func=cmd_estimate)

    sp = sub.add_parser("decide", help="weekly buy/wait decisions along a wage CSV")
    common(sp)
    sp.add_argument("input", help="CSV with columns week,wage")
    sp.add_argument("--alpha", type=float, default=0.05)
    sp.add_argument("--sigma", type=float)
    sp.set_defaults(func=cmd_decide)

    sp = sub.add_parser("sensitivity", help="derivatives, limits, lambda* and isolines")
    common(sp)
    sp.add_argument("--x", type=float)
    sp.add_argument("--rel-step", type=float, default=0.01, help="relative change for the increment column")
    mode = sp.add_mutually_exclusive_group()
    mode.add_argument("--limits", action="store_true")
    mode.add_argument("--lambda-star", action="store_true")
    mode.add_argument("--isoline", type=float, action="append", metavar="LEVEL")
    sp.add_argument("--target", choices=(B_STAR, VALUE), default=B_STAR)
    sp.add_argument("--lambda0-range", type=_range, default=[0.001, 0.05], metavar="LO,HI")
    sp.add_argument("--mu-range", type=_range, default=[-0.002, 0.002], metavar="LO,HI")
    sp.add_argument("--n", type=int, default=400)
    sp.set_defaults(func=cmd_sensitivity)

    sp = sub.add_parser("utility", help="utility-modified thresholds and the premium cap")
    common(sp)
    sp.add_argument("--x", type=float)
    sp.add_argument("--kappa", type=float, default=0.0)
    sp.add_argument("--variant", choices=VARIANTS, default=HIT_PROB_POWERED)
    sp.add_argument("--consumption", type=float, default=0.0, help="weekly consumption c during the spell")
    sp.add_argument("--lambda1", type=float)
    sp.set_defaults(func=cmd_utility)

    sp = sub.add_parser("schedule", help="beta for a benefit schedule")
    sp.add_argument("--config")
    sp.add_argument("--out")
    sp.add_argument("--preset", choices=("french",))
    sp.add_argument("--h0", type=float)
    sp.add_argument("--s0", type=float)
    sp.add_argument("--delta", type=float)
    sp.add_argument("--lambda1", type=float)
    sp.add_argument("--calibration", choices=("mean", "tail"))
    sp.add_argument("--r", type=float, default=0.0)
    sp.set_defaults(func=cmd_schedule)
    return parser


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"warning: {message}", file=sys.stderr)


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always", TruncationWarning)
            warnings.showwarning = _show_warning
            return args.func(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
