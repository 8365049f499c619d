"""Command-line entry point: validate, check, run, trace, explain.

Exit codes: 0 clean verdict, 1 verdict failure, 2 usage or parse error.
Every command builds one report dict; ``--format structured`` prints it as
JSON and the default text format renders the same dict line by line.
"""

from __future__ import annotations

import argparse
import json
import sys

from .contexts import Ambiguous, Context, is_active
from .errors import DslSyntaxError, SocialPracticeError, ValidationError
from .model import without_strategy
from .monitor import Monitor, check_trace
from .simulator import Simulator
from .tracefile import parse_trace, write_trace
from .usefulness import NOT_USEFUL, UNKNOWN, USEFUL, check_useful
from .validation import check_practice, check_scenario

OK, FAIL, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# Rendering
# --------------------------------------------------------------------------


def render_text(value, indent: int = 0) -> str:
    """Indented rendering of a report dict that keeps every field."""
    pad = "  " * indent
    lines = []
    if isinstance(value, dict):
        for k, v in value.items():
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{k}:")
                lines.append(render_text(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {_scalar(v)}")
    elif isinstance(value, list):
        for item in value:
            if isinstance(item, dict) and item:
                first, *rest = render_text(item, indent + 1).split("\n")
                lines.append(f"{pad}- {first.strip()}")
                lines += rest
            elif isinstance(item, list) and item:
                lines.append(f"{pad}- {' '.join(_scalar(x) for x in item)}")
            else:
                lines.append(f"{pad}- {_scalar(item)}")
    else:
        lines.append(pad + _scalar(value))
    return "\n".join(lines)


def _scalar(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "yes" if v else "no"
    if v == [] or v == {}:
        return "none"
    return str(v)


def emit(report: dict, fmt: str, out=None) -> None:
    out = out or sys.stdout
    if fmt == "structured":
        out.write(json.dumps(report, indent=2, sort_keys=False) + "\n")
    else:
        out.write(render_text(report) + "\n")


# --------------------------------------------------------------------------
# Loading
# --------------------------------------------------------------------------


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise UsageError(f"{path}: {e.strerror}") from None


def _trace(path: str) -> list:
    try:
        return parse_trace(_read(path))
    except DslSyntaxError as e:
        e.diagnostics = _located(path, e.diagnostics)
        raise


def _located(path, diags) -> list:
    return [dict(d.to_dict(), file=path) for d in diags]


def load(args, need_scenario=True):
    """Parse and validate inputs; raises ValidationError with file-tagged diagnostics."""
    practice, diags = _checked(args.practice, lambda t: check_practice(t))
    scenario = None
    if getattr(args, "scenario", None):
        scenario, more = _checked(args.scenario, lambda t: check_scenario(t, practice))
        diags += more
    elif need_scenario:
        raise UsageError("a scenario file is required")
    return practice, scenario, diags


def _checked(path, fn):
    try:
        model, diags = fn(_read(path))
    except DslSyntaxError as e:
        e.diagnostics = _located(path, e.diagnostics)
        raise
    diags = _located(path, diags)
    errors = [d for d in diags if d["severity"] == "error"]
    if errors:
        raise ValidationError(errors)
    return model, diags


def _order(args):
    if not getattr(args, "salience_order", None):
        return None
    return [c.strip() for c in args.salience_order.split(",") if c.strip()]


def _format_diag(d: dict) -> str:
    where = d.get("file", "")
    if d.get("line") is not None:
        where += f":{d['line']}:{d['column']}"
    return f"{where}: {d['severity']}: {d['message']}"


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------


def cmd_validate(args) -> tuple[dict, int]:
    _, _, diags = load(args, need_scenario=False)
    return {"command": "validate", "valid": True, "diagnostics": diags}, OK


def cmd_check(args) -> tuple[dict, int]:
    practice, scenario, diags = load(args)
    if args.without_strategy is not None:
        if not 0 <= args.without_strategy < len(practice.strategies):
            raise UsageError(f"no strategy #{args.without_strategy}")
        practice = without_strategy(practice, args.without_strategy)
    witness = _trace(args.witness) if args.witness else None
    require = [s.strip() for s in args.require.split(",")] if args.require else ()
    rep = check_useful(practice, scenario, args.bound, star_unroll=args.star_unroll,
                       require=require, witness=witness, salience_order=_order(args))
    report = {"command": "check", **rep.to_dict(), "diagnostics": diags}
    if rep.verdict == UNKNOWN:
        report["message"] = (f"no conforming witness within {args.bound} events; "
                             "raise --bound to search further")
    elif rep.verdict == NOT_USEFUL and rep.uncovered:
        report["message"] = "cross-agent handoffs not covered by any strategy"
    elif rep.verdict == NOT_USEFUL:
        report["message"] = rep.reason
    else:
        report["message"] = "practice is useful"
    return report, OK if rep.verdict == USEFUL else FAIL


def cmd_run(args) -> tuple[dict, int]:
    practice, scenario, diags = load(args)
    sim = Simulator(practice, scenario, seed=args.seed, salience_order=_order(args))
    result = sim.run(args.ticks)
    report = {"command": "run", **result.to_dict()}
    report["diagnostics"] = diags + report["diagnostics"]
    if args.out:
        write_trace(args.out, result.trace)
        report["trace_file"] = args.out
    clean = not result.violations and not result.misses
    return report, OK if clean else FAIL


def cmd_trace(args) -> tuple[dict, int]:
    practice, scenario, diags = load(args)
    events = _trace(args.tracefile)
    rep = check_trace(practice, scenario, events, salience_order=_order(args))
    report = {
        "command": "trace",
        "accepted": rep.acceptance.accepted,
        "landmarks": [[name, idx] for name, idx in rep.acceptance.landmarks],
        "trace": [str(e) for e in rep.trace],
        "violations": [v.to_dict() for v in rep.violations],
        "expectation_misses": [m.to_dict() for m in rep.misses],
        "pending_expectations": [x.describe(practice) for x in rep.pending],
        "ledger": [e.to_dict() for e in rep.ledger],
        "diagnostics": diags,
    }
    ok = rep.acceptance.accepted and not rep.violations and not rep.misses
    return report, OK if ok else FAIL


def explain_state(practice, scenario, events, at: int, salience_order=None) -> dict:
    """Contexts, expectations, obligations and goals at the start of tick ``at``."""
    m = Monitor(practice, scenario, salience_order=salience_order)
    for e in sorted((e for e in events if not e.derived), key=lambda e: e.tick):
        if e.tick >= at:
            break
        m.observe(e)
    m.begin_tick(max(at, m.tick))
    agents = []
    ambiguous = False
    for agent in m.agents:
        env = m.env(m.agent_facts(agent))
        active = [c.id for c in m.registry if is_active(c, agent, None, env)]
        s = m.salient(agent)
        if isinstance(s, Ambiguous):
            ambiguous = True
            salient = {"ambiguous": [c.id for c in s.candidates]}
        elif isinstance(s, Context):
            salient = s.id
        else:
            salient = None
        agents.append({"agent": agent, "active_contexts": active, "salient": salient})
    return {
        "command": "explain",
        "tick": at,
        "practice_active": m.active,
        "agents": agents,
        "expectations": [x.describe(practice) for x in m.expectations],
        "obligations": [o.describe(practice) for o in m.obligations],
        "goals": [str(g) for g in m.goals()],
        "ambiguous": ambiguous,
    }


def cmd_explain(args) -> tuple[dict, int]:
    practice, scenario, diags = load(args)
    events = _trace(args.tracefile)
    report = explain_state(practice, scenario, events, args.at, _order(args))
    report["diagnostics"] = diags
    return report, FAIL if report["ambiguous"] else OK


# --------------------------------------------------------------------------
# Argument parsing
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="socprac", description="Social practice engine.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, scenario=True):
        p.add_argument("practice", help="practice file (.sp)")
        if scenario:
            p.add_argument("scenario", help="scenario file (.scn)")
        else:
            p.add_argument("scenario", nargs="?", help="optional scenario file (.scn)")
        p.add_argument("--format", choices=("text", "structured"), default="text")
        p.add_argument("--salience-order", help="comma-separated context ids, most salient first")

    p = sub.add_parser("validate", help="parse and validate files")
    common(p, scenario=False)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("check", help="decide usefulness by bounded search")
    common(p)
    p.add_argument("--bound", type=int, default=12)
    p.add_argument("--star-unroll", type=int, default=2)
    p.add_argument("--require", help="comma-separated step names the witness must pass")
    p.add_argument("--witness", help="check this trace file instead of searching")
    p.add_argument("--without-strategy", type=int, metavar="INDEX",
                   help="drop strategy INDEX (0-based) before checking")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("run", help="simulate the agents of a scenario")
    common(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ticks", type=int, default=100)
    p.add_argument("--out", help="write the trace to this file")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("trace", help="monitor a trace file")
    common(p)
    p.add_argument("tracefile")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("explain", help="show expectations and contexts at a tick")
    common(p)
    p.add_argument("tracefile")
    p.add_argument("--at", type=int, required=True, metavar="TICK")
    p.set_defaults(func=cmd_explain)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return USAGE if e.code else OK
    fmt = args.format
    try:
        for name in ("bound", "ticks", "star_unroll"):
            if getattr(args, name, 0) is not None and getattr(args, name, 0) < 0:
                raise UsageError(f"--{name.replace('_', '-')} must be non-negative")
        report, code = args.func(args)
    except (DslSyntaxError, ValidationError) as e:
        diags = [d if isinstance(d, dict) else d.to_dict() for d in e.diagnostics]
        if fmt == "structured":
            emit({"command": args.command, "valid": False, "diagnostics": diags}, fmt)
        else:
            for d in diags:
                print(_format_diag(d), file=sys.stderr)
        return USAGE
    except UsageError as e:
        print(f"socprac: error: {e}", file=sys.stderr)
        return USAGE
    except SocialPracticeError as e:
        print(f"socprac: error: {e}", file=sys.stderr)
        return USAGE
    emit(report, fmt)
    return code


if __name__ == "__main__":
    sys.exit(main())
