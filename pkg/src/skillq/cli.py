"""Command-line front end.

Subcommands cover the single-level analyses, the four-level reservation
model, the policy grid search, the simulator and multi-interval
schedules.  All tables are CSV on standard output (or ``--out``), all
values print with six significant digits, and proportions switch to
percentages with ``--percent``.  The time unit is whatever the rate
unit implies; the bundled example configs are per-minute.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 usage error.  Errors are a single machine-parsable line on stderr:
``skillq: error: <category>: <message>``.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from pathlib import Path

import numpy as np

from . import simulator
from .config import Config, load
from .errors import ConfigError, DomainError, NumericalError, SkillqError
from .multi_level import (
    EMPTY_STATE,
    MultiMeasureSpec,
    State,
    TransientModel,
    abandonment_proportion,
)
from .policy_search import best, evaluate_all
from .single_level import (
    MeasureKind,
    expected_measure,
    project_schedule,
    tagged_wait,
    transition_probabilities,
)

_MEASURES = ("abandonments", "losses", "cost", "waiting", "services")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); the contract wants 4
        raise _UsageError(message)


def _fmt(value: float) -> str:
    return format(float(value), ".6g")


def _parse_state7(text: str) -> State:
    parts = text.split(",")
    if len(parts) != 7:
        raise _UsageError(f"--initial expects 7 comma-separated integers, got {text!r}")
    try:
        return State(*(int(p) for p in parts))
    except ValueError:
        raise _UsageError(f"--initial expects integers, got {text!r}") from None


def _threads(args) -> int:
    if getattr(args, "threads", None) is not None:
        return max(1, args.threads)
    env = os.environ.get("SKILLQ_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"SKILLQ_THREADS must be an integer, got {env!r}") from None
    return 1


def _scale(args) -> float:
    return 100.0 if getattr(args, "percent", False) else 1.0


def _single_measure_spec(cfg: Config, measure: str):
    """Map a CLI measure name onto (MeasureKind, parameter overrides)."""
    params = cfg.require("single")
    if measure == "abandonments":
        return dataclasses.replace(params, gamma=1.0, beta=0.0), MeasureKind.COST
    if measure == "losses":
        return dataclasses.replace(params, gamma=0.0, beta=1.0), MeasureKind.COST
    if measure == "cost":
        return params, MeasureKind.COST
    if measure == "waiting":
        return params, MeasureKind.WAITING
    return params, MeasureKind.SERVICES


def _cmd_analyze_single(args) -> str:
    cfg = load(args.config)
    params, kind = _single_measure_spec(cfg, args.measure)
    value = expected_measure(params, kind, args.initial, args.t, cfg.euler)
    return _fmt(value) + "\n"


def _cmd_probs(args) -> str:
    cfg = load(args.config)
    if args.multi:
        params = cfg.require("multi")
        n = cfg.require("reservation")
        initial = _parse_state7(args.initial) if args.initial else EMPTY_STATE
        model = TransientModel(params, n)
        probs = model.distribution(initial, args.t, cfg.euler)
    else:
        params = cfg.require("single")
        initial = int(args.initial) if args.initial else 0
        probs = transition_probabilities(params, initial, args.t, cfg.euler)
    lines = ["j,probability"]
    lines += [f"{j},{_fmt(p)}" for j, p in enumerate(probs)]
    return "\n".join(lines) + "\n"


def _cmd_tagged_wait(args) -> str:
    cfg = load(args.config)
    return _fmt(tagged_wait(cfg.require("single"), args.ahead)) + "\n"


def _cmd_analyze_multi(args) -> str:
    cfg = load(args.config)
    params = cfg.require("multi")
    n = cfg.require("reservation")
    initial = _parse_state7(args.initial) if args.initial else EMPTY_STATE
    model = TransientModel(params, n)
    t, euler = args.t, cfg.euler
    scale = _scale(args)
    cost = model.expected_measure(MultiMeasureSpec.abandonment_cost(params), initial, t, euler)
    rows = [
        ("cost", cost),
        ("abandonments", model.expected_measure(MultiMeasureSpec.abandonments(), initial, t, euler)),
        ("blocked", model.expected_measure(MultiMeasureSpec.blocked(), initial, t, euler)),
        ("waiting_time", model.expected_measure(MultiMeasureSpec.waiting(), initial, t, euler)),
        ("services", model.expected_measure(MultiMeasureSpec.services(), initial, t, euler)),
    ]
    if params.total_arrival_rate > 0 and t > 0:
        rows.append(
            ("proportion", scale * abandonment_proportion(params, n, initial, t, euler, model=model))
        )
        rows.append(
            ("proportion_raw", scale * abandonment_proportion(params, n, initial, t, euler, weighted=False, model=model))
        )
    lines = ["metric,value"] + [f"{name},{_fmt(v)}" for name, v in rows]
    return "\n".join(lines) + "\n"


def _cmd_optimize(args) -> str:
    cfg = load(args.config)
    params = cfg.require("multi")
    initial = _parse_state7(args.initial) if args.initial else EMPTY_STATE
    table = evaluate_all(
        params,
        initial,
        args.t,
        cfg.euler,
        weighted=not args.raw_proportion,
        threads=_threads(args),
    )
    scale = _scale(args)
    lines = ["n2,n3,n4,proportion"]
    lines += [f"{r.n.n2},{r.n.n3},{r.n.n4},{_fmt(scale * r.value)}" for r in table]
    return "\n".join(lines) + "\n"


def _cmd_simulate(args) -> str:
    cfg = load(args.config)
    params = cfg.require("multi")
    sim_settings = cfg.sim
    if sim_settings is None:
        raise ConfigError("this command needs a 'sim' section in the config file")
    if sim_settings.policy == "reservation":
        policy = simulator.Reservation(cfg.require("reservation"))
    elif sim_settings.policy == "global_fcfs":
        policy = simulator.GlobalFCFS()
    else:
        policy = simulator.DelayedTransfer(sim_settings.y)
    initial = _parse_state7(args.initial) if args.initial else EMPTY_STATE
    config = simulator.SimConfig(
        params=params,
        policy=policy,
        horizon=args.t,
        replications=args.reps if args.reps is not None else sim_settings.replications,
        seed=args.seed if args.seed is not None else sim_settings.seed,
        initial=initial,
    )
    result = simulator.simulate_many(config, threads=_threads(args))
    scale = _scale(args)
    rows: list[tuple[str, float, float]] = [("replications", result.replications, 0.0)]
    for i in range(4):
        rows.append((f"abandonments_level{i + 1}", result.abandoned_mean[i], result.abandoned_hw[i]))
    rows.append(("abandonments_total", result.abandoned_total_mean, result.abandoned_total_hw))
    for i in range(4):
        rows.append((f"blocked_level{i + 1}", result.blocked_mean[i], result.blocked_hw[i]))
    rows.append(("blocked_total", result.blocked_total_mean, result.blocked_total_hw))
    for i in range(4):
        rows.append((f"cost_level{i + 1}", result.cost_mean[i], result.cost_hw[i]))
    rows.append(("cost_total", result.cost_total_mean, result.cost_total_hw))
    rows.append(("services_total", result.services_total_mean, result.services_total_hw))
    for i in range(4):
        rows.append(
            (
                f"proportion_level{i + 1}",
                scale * result.proportion_mean[i],
                scale * result.proportion_hw[i],
            )
        )
    rows.append(("proportion", scale * result.proportion_total_mean, scale * result.proportion_total_hw))
    rows.append(
        ("proportion_raw", scale * result.proportion_raw_total_mean, scale * result.proportion_raw_total_hw)
    )
    lines = ["metric,value,ci_halfwidth"]
    lines += [f"{name},{_fmt(v)},{_fmt(hw)}" for name, v, hw in rows]
    return "\n".join(lines) + "\n"


def _cmd_schedule(args) -> str:
    cfg = load(args.config)
    schedule = cfg.require("schedule")
    params0 = schedule.segments[0].params
    _, kind = _single_measure_spec(
        Config(single=params0), args.measure
    )
    # measure name also selects the cost weights on the first segment's
    # pattern; each segment keeps its own configured rates.
    if args.measure in ("abandonments", "losses"):
        override = {"abandonments": dict(gamma=1.0, beta=0.0), "losses": dict(gamma=0.0, beta=1.0)}[args.measure]
        segments = tuple(
            dataclasses.replace(seg, params=dataclasses.replace(seg.params, **override))
            for seg in schedule.segments
        )
        schedule = dataclasses.replace(schedule, segments=segments)
    initial = np.zeros(schedule.ell + 1)
    if not 0 <= args.initial <= schedule.ell:
        raise DomainError(f"initial state {args.initial} outside 0..{schedule.ell}")
    initial[args.initial] = 1.0
    total, final = project_schedule(schedule, initial, kind, cfg.euler)
    lines = ["quantity,value", f"total,{_fmt(total)}"]
    lines += [f"p_final_{j},{_fmt(p)}" for j, p in enumerate(final)]
    return "\n".join(lines) + "\n"


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="skillq",
        description=(
            "Transient call-centre analysis: expected abandonments, losses, waiting time, "
            "services and state distributions for the single-level and four-level "
            "skills-based-routing models; reservation-vector optimisation; simulation. "
            "Times and rates share one unit (the bundled examples use minutes)."
        ),
    )
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def common(p, *, threads=False, percent=False, initial7=False):
        p.add_argument("--config", required=True, help="config file path or bundled name (example1.json...)")
        p.add_argument("--out", help="write output to this file instead of stdout")
        if threads:
            p.add_argument("--threads", type=int, help="parallelism cap (default: SKILLQ_THREADS or 1)")
        if percent:
            p.add_argument("--percent", action="store_true", help="print proportions as percentages")
        if initial7:
            p.add_argument("--initial", help="initial state a,a1,b,b1,c,c1,d (default: empty)")

    p = sub.add_parser("analyze-single", help="one cumulative measure of the single-level model")
    common(p)
    p.add_argument("--measure", required=True, choices=_MEASURES)
    p.add_argument("--initial", type=int, default=0, help="initial number in system (default 0)")
    p.add_argument("--t", type=float, required=True, help="horizon")
    p.set_defaults(handler=_cmd_analyze_single)

    p = sub.add_parser("probs", help="time-dependent state distribution")
    common(p)
    p.add_argument("--multi", action="store_true", help="four-level model instead of single-level")
    p.add_argument("--initial", help="initial state: an integer, or a,a1,b,b1,c,c1,d with --multi")
    p.add_argument("--t", type=float, required=True)
    p.set_defaults(handler=_cmd_probs)

    p = sub.add_parser("tagged-wait", help="expected wait with a given number of callers ahead")
    common(p)
    p.add_argument("--ahead", type=int, required=True, help="callers ahead of the tagged one")
    p.set_defaults(handler=_cmd_tagged_wait)

    p = sub.add_parser("analyze-multi", help="four-level transient measures under the configured reservation")
    common(p, percent=True, initial7=True)
    p.add_argument("--t", type=float, required=True)
    p.set_defaults(handler=_cmd_analyze_multi)

    p = sub.add_parser("optimize", help="abandonment proportion for every reservation vector")
    common(p, threads=True, percent=True, initial7=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument(
        "--raw-proportion",
        action="store_true",
        help="divide plain abandonment counts instead of the gamma-weighted cost",
    )
    p.set_defaults(handler=_cmd_optimize)

    p = sub.add_parser("simulate", help="simulate the configured policy")
    common(p, threads=True, percent=True, initial7=True)
    p.add_argument("--t", type=float, required=True, help="horizon")
    p.add_argument("--reps", type=int, help="replications (default from config)")
    p.add_argument("--seed", type=int, help="seed (default from config)")
    p.set_defaults(handler=_cmd_simulate)

    p = sub.add_parser("schedule", help="accumulate a measure across the configured schedule")
    common(p)
    p.add_argument("--measure", choices=_MEASURES, default="abandonments")
    p.add_argument("--initial", type=int, default=0, help="initial number in system (default 0)")
    p.set_defaults(handler=_cmd_schedule)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"skillq: error: usage: {exc}", file=sys.stderr)
        return 4
    except SystemExit as exc:  # --help
        return 0 if exc.code in (0, None) else 4
    try:
        output = args.handler(args)
    except _UsageError as exc:
        print(f"skillq: error: usage: {exc}", file=sys.stderr)
        return 4
    except ConfigError as exc:
        print(f"skillq: error: config: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"skillq: error: numerical: {exc}", file=sys.stderr)
        return 3
    except DomainError as exc:
        print(f"skillq: error: config: {exc}", file=sys.stderr)
        return 2
    except SkillqError as exc:
        print(f"skillq: error: config: {exc}", file=sys.stderr)
        return 2
    if args.out:
        Path(args.out).write_text(output)
    else:
        sys.stdout.write(output)
    return 0


if __name__ == "__main__":
    sys.exit(main())
