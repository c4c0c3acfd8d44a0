"""
kopcheck CLI - Argument parsing and dispatch.

Responsibilities:
- Argument parsing (usage errors exit with INPUT_ERROR)
- Loading and writing system documents
- Printing human-readable results to stdout, errors to stderr
- Writing the structured report when --report is given
- Exit codes

Forbidden:
- No evaluation logic beyond argument resolution
- No printing from lower modules
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Callable, NoReturn

from kopcheck.context import DEFAULT_RUN_BUDGET, DEFAULT_SEED, RunContext
from kopcheck.contracts import BudgetExceeded, ExitStatus, InputError, build_error
from kopcheck.document import load_system, save_system
from kopcheck.kernel import Action, AgentId, Point, System
from kopcheck.logic.evaluator import Evaluator
from kopcheck.logic.formula import Formula, Not, format_formula
from kopcheck.logic.parser import parse_formula
from kopcheck.properties.predicates import (
    ActionAssignment,
    conscious_witness,
    local_witness,
    make_assignment,
    necessary_condition_witness,
    ordered_witness,
    perfect_recall_witness,
    recall_witness,
    simultaneous_witness,
    stable_witness,
)
from kopcheck.properties.theorems import (
    VerificationReport,
    check_ckop,
    check_kop,
    check_nkop,
    predicate_report,
)
from kopcheck.report import build_report, write_report


logger = logging.getLogger(__name__)

PREDICATES = (
    "necessary",
    "conscious",
    "local",
    "stable",
    "recalls",
    "simultaneous",
    "ordered",
    "perfect-recall",
)
THEOREMS = ("kop", "ckop", "nkop")


class KopArgumentParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with INPUT_ERROR."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(ExitStatus.INPUT_ERROR, f"{self.prog}: error: {message}\n")


class CommandFailure(Exception):
    """Carries an error together with the system it occurred on, if any."""

    def __init__(self, error: Exception, system: System | None):
        super().__init__(str(error))
        self.error = error
        self.system = system


# =============================================================================
# Parser
# =============================================================================


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    group = common.add_argument_group("global options")
    group.add_argument(
        "--report",
        metavar="FILE",
        type=Path,
        help="Also write a structured JSON report to FILE.",
    )
    group.add_argument(
        "--seed",
        metavar="N",
        type=int,
        default=DEFAULT_SEED,
        help=f"Seed for generated systems (default: {DEFAULT_SEED}).",
    )
    group.add_argument(
        "--budget",
        metavar="N",
        type=int,
        default=DEFAULT_RUN_BUDGET,
        help=f"Maximum number of runs to enumerate (default: {DEFAULT_RUN_BUDGET}).",
    )
    group.add_argument(
        "--extension",
        action="store_true",
        help="List every point where the formula holds.",
    )
    group.add_argument(
        "--verbose",
        action="store_true",
        help="Log progress to stderr.",
    )
    return common


def create_parser() -> argparse.ArgumentParser:
    """Create the argument parser."""
    common = _common_options()
    parser = KopArgumentParser(
        prog="kopcheck",
        description="Epistemic model checker for finite multi-agent systems.",
    )
    subparsers = parser.add_subparsers(dest="command")

    # eval
    p = subparsers.add_parser(
        "eval",
        parents=[common],
        help="Evaluate a formula at a point, or check its validity.",
        description=(
            "Evaluate FORMULA at POINT and print T or F.\n\n"
            "Without POINT, checks validity over every point of the system.\n"
            "POINT is RUN:TIME or (RUN,TIME); RUN is a run name or index."
        ),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("system", metavar="SYSTEM", type=Path, help="System document.")
    p.add_argument("formula", metavar="FORMULA", help="Formula text.")
    p.add_argument("point", metavar="POINT", nargs="?", help="Point to evaluate at.")
    p.add_argument(
        "--earliest",
        metavar="RUN",
        help="Print the earliest time at which FORMULA holds in RUN.",
    )

    # check
    p = subparsers.add_parser(
        "check",
        parents=[common],
        help="Decide a semantic predicate.",
        description=(
            "Decide a predicate and print the first falsifying point on failure.\n\n"
            "  necessary PSI AGENT ACTION\n"
            "  conscious AGENT ACTION\n"
            "  local AGENT FORMULA\n"
            "  stable FORMULA\n"
            "  recalls AGENT FORMULA\n"
            "  simultaneous ACTION@AGENT ACTION@AGENT ...\n"
            "  ordered ACTION@AGENT ACTION@AGENT ...\n"
            "  perfect-recall AGENT"
        ),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("system", metavar="SYSTEM", type=Path, help="System document.")
    p.add_argument("predicate", choices=PREDICATES, help="Predicate to decide.")
    p.add_argument("args", metavar="ARG", nargs="*", help="Predicate arguments.")

    # verify
    p = subparsers.add_parser(
        "verify",
        parents=[common],
        help="Verify a knowledge-of-preconditions theorem.",
        description=(
            "Check the hypotheses of a theorem, then its conclusion.\n\n"
            "  kop   --agent I [--action A] --psi PSI\n"
            "  ckop  --group I,J,... [--actions A@I,...] [--agent I] --psi PSI\n"
            "  nkop  --sequence A1@I1,A2@I2,... --psi PSI\n\n"
            "Omitted actions are inferred when the agent performs exactly one."
        ),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("system", metavar="SYSTEM", type=Path, help="System document.")
    p.add_argument("theorem", choices=THEOREMS, help="Theorem to verify.")
    p.add_argument("--agent", metavar="AGENT", help="Acting agent (name or index).")
    p.add_argument("--action", metavar="ACTION", help="Action label.")
    p.add_argument("--psi", metavar="FORMULA", required=True, help="Precondition.")
    p.add_argument("--group", metavar="AGENTS", help="Comma-separated agent group.")
    p.add_argument("--actions", metavar="PAIRS", help="Comma-separated ACTION@AGENT pairs.")
    p.add_argument("--sequence", metavar="PAIRS", help="Ordered ACTION@AGENT pairs.")

    # scenario
    p = subparsers.add_parser(
        "scenario",
        help="Generate a built-in scenario and write its system document.",
    )
    _add_scenario_parsers(p.add_subparsers(dest="scenario"), common)

    return parser


def _add_scenario_parsers(scenarios: Any, common: argparse.ArgumentParser) -> None:
    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        p = scenarios.add_parser(name, parents=[common], help=help_text, description=help_text)
        p.add_argument("--out", metavar="FILE", type=Path, required=True, help="Output document.")
        return p

    p = add("lamp", "A lamp and its switch.")
    p.add_argument(
        "--no-burnout",
        action="store_true",
        help="Leave out the run where the bulb is burnt out.",
    )

    p = add("message", "Alice sends Bob a message.")
    p.add_argument("--reliable", action="store_true", help="Messages are never lost.")
    p.add_argument("--horizon", type=int, default=3, help="Last time T (default: 3).")

    p = add("atm", "A cash machine consults the bank over a failing link.")
    p.add_argument("--balances", default="0,10,100", help="Possible balances (default: 0,10,100).")
    p.add_argument("--amount", type=int, default=20, help="Withdrawal amount (default: 20).")
    p.add_argument("--horizon", type=int, default=3, help="Last time T (default: 3).")

    p = add("ctm", "Computing the maximum over a tree.")
    p.add_argument("--mode", choices=("bottom-up", "clocked"), default="clocked")
    p.add_argument("--domain", default="0,50,75,100,150", help="Possible initial values.")
    p.add_argument("--designated", default="75,100,50,0", help="Initial values of the run of interest.")
    p.add_argument("--topology", help="Tree edges such as 1-2,2-3:2 (default: path).")
    p.add_argument("--horizon", type=int, default=5, help="Last time T (default: 5).")

    p = add("firing-squad", "Agents fire simultaneously after a go message.")
    p.add_argument("--n", type=int, default=2, help="Number of agents (default: 2).")
    p.add_argument("--window", default="0,never", help="Go arrival times (default: 0,never).")
    p.add_argument("--topology", help="Edges such as 1-2,2-3 (default: complete graph).")
    p.add_argument("--recipients", default="1", help="Agents the go may reach (default: 1).")
    p.add_argument("--strategy", choices=("common", "eager"), default="common")
    p.add_argument("--horizon", type=int, help="Last time T (default: derived).")

    p = add("chain", "A relay chain performing ordered actions.")
    p.add_argument("--k", type=int, default=3, help="Chain length (default: 3).")
    p.add_argument("--window", default="0,1,never", help="Trigger times (default: 0,1,never).")
    p.add_argument("--delay", type=int, default=1, help="Relay delay (default: 1).")
    p.add_argument("--horizon", type=int, help="Last time T (default: derived).")
    p.add_argument("--no-recall", action="store_true", help="Agents forget having acted.")

    p = add("random", "A seeded random system (see --seed).")
    p.add_argument(
        "--mode",
        choices=("plain", "inject", "simultaneous", "ordered"),
        default="plain",
    )
    p.add_argument("--agents", type=int, help="Number of agents (2..4).")
    p.add_argument("--runs", type=int, help="Number of runs (1..8).")
    p.add_argument("--horizon", type=int, help="Last time T (1..5).")
    p.add_argument("--alphabet", type=int, help="Local alphabet size (2..4).")


# =============================================================================
# Argument resolution
# =============================================================================


def _ints(text: str, what: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise InputError(f"{what} must be comma-separated integers, got {text!r}") from None


def _point(sys: System, token: str) -> Point:
    token = token.strip()
    if token.startswith("(") and token.endswith(")"):
        run, _, time = token[1:-1].rpartition(",")
        token = f"{run.strip()}:{time.strip()}"
    return sys.resolve_point(token)


def _formula(sys: System, text: str) -> Formula:
    return parse_formula(text, sys.agent_names)


def _pairs(sys: System, items: list[str]) -> ActionAssignment:
    pairs = []
    for item in items:
        label, sep, agent = item.strip().rpartition("@")
        if not sep or not label:
            raise InputError(f"expected ACTION@AGENT, got {item!r}")
        pairs.append((sys.resolve_agent(agent), Action(label)))
    return make_assignment(pairs)


def _split(text: str) -> list[str]:
    return [part for part in (p.strip() for p in text.split(",")) if part]


def _group(sys: System, text: str) -> frozenset[AgentId]:
    group = frozenset(sys.resolve_agent(token) for token in _split(text))
    if not group:
        raise InputError("agent group must be non-empty")
    return group


def _only_action(sys: System, agent: AgentId) -> Action:
    actions = sys.actions_of(agent)
    if len(actions) != 1:
        raise InputError(
            f"agent {sys.agent_name(agent)} performs {len(actions)} distinct actions "
            f"{[a.label for a in actions]}; name the action explicitly"
        )
    return actions[0]


def _warn_boundary(sys: System) -> None:
    latest = sys.max_event_time()
    if latest is not None and latest >= sys.horizon - 1:
        logger.warning(
            "action recorded at time=%d close to horizon T=%d; does is false at T, "
            "consider a larger horizon",
            latest,
            sys.horizon,
        )


def _load(path: Path) -> System:
    system = load_system(path)
    _warn_boundary(system)
    return system


# =============================================================================
# Commands
# =============================================================================


def cmd_eval(args: argparse.Namespace, ctx: RunContext) -> tuple[ExitStatus, dict, System]:
    """Evaluate a formula at a point, over all points, or find its earliest time."""
    system = _load(args.system)
    try:
        f = _formula(system, args.formula)
        ev = Evaluator(system)
        ev.check_formula(f)
        result: dict[str, Any] = {"formula": format_formula(f, system.agent_names)}

        if args.earliest is not None:
            run = system.resolve_run(args.earliest)
            t = ev.earliest(run, f)
            print(str(t) if t is not None else "never")
            result.update(mode="earliest", run=run, value=t)
            status = ExitStatus.HOLDS if t is not None else ExitStatus.FAILS
        elif args.point is not None:
            p = _point(system, args.point)
            value = ev.eval(p, f)
            print("T" if value else "F")
            result.update(mode="point", point=p.to_dict(), value=value)
            status = ExitStatus.HOLDS if value else ExitStatus.FAILS
        else:
            witness = ev.first_point_where(Not(f))
            value = witness is None
            print("T" if value else "F")
            if witness is not None:
                print(f"falsified at {system.point_label(witness)}")
            result.update(
                mode="valid",
                value=value,
                witness=witness.to_dict() if witness is not None else None,
            )
            status = ExitStatus.HOLDS if value else ExitStatus.FAILS

        if ctx.extension:
            points = ev.points_where(f)
            for p in points:
                print(system.point_label(p))
            result["extension"] = [p.to_dict() for p in points]
    except InputError as e:
        raise CommandFailure(e, system) from e
    return status, result, system


def _predicate_witness(system: System, name: str, args: list[str]) -> tuple[str, Point | None]:
    arity = {
        "necessary": 3,
        "conscious": 2,
        "local": 2,
        "stable": 1,
        "recalls": 2,
        "perfect-recall": 1,
    }
    if name in arity and len(args) != arity[name]:
        raise InputError(f"check {name} expects {arity[name]} argument(s), got {len(args)}")
    ev = Evaluator(system)

    if name == "necessary":
        psi, i, a = _formula(system, args[0]), system.resolve_agent(args[1]), Action(args[2])
        label = f"necessary({format_formula(psi, system.agent_names)}, {system.agent_name(i)}, {a})"
        return label, necessary_condition_witness(system, psi, i, a, ev)
    if name == "conscious":
        i, a = system.resolve_agent(args[0]), Action(args[1])
        return f"conscious({system.agent_name(i)}, {a})", conscious_witness(system, i, a, ev)
    if name in ("local", "recalls"):
        i, f = system.resolve_agent(args[0]), _formula(system, args[1])
        witness_of: Callable = local_witness if name == "local" else recall_witness
        label = f"{name}({system.agent_name(i)}, {format_formula(f, system.agent_names)})"
        return label, witness_of(system, i, f, ev)
    if name == "stable":
        f = _formula(system, args[0])
        return f"stable({format_formula(f, system.agent_names)})", stable_witness(system, f, ev)
    if name == "perfect-recall":
        i = system.resolve_agent(args[0])
        return f"perfect-recall({system.agent_name(i)})", perfect_recall_witness(system, i)

    if len(args) < 2:
        raise InputError(f"check {name} expects at least two ACTION@AGENT pairs")
    assignment = _pairs(system, args)
    label = f"{name}({', '.join(args)})"
    if name == "simultaneous":
        return label, simultaneous_witness(system, assignment, ev)
    return label, ordered_witness(system, assignment, ev)


def cmd_check(args: argparse.Namespace, ctx: RunContext) -> tuple[ExitStatus, dict, System]:
    """Decide a semantic predicate."""
    system = _load(args.system)
    try:
        label, witness = _predicate_witness(system, args.predicate, args.args)
    except InputError as e:
        raise CommandFailure(e, system) from e
    report = predicate_report(label, witness)
    print(report.render(system))
    return report.exit_status(), report.to_dict(), system


def _verify(system: System, args: argparse.Namespace) -> VerificationReport:
    psi = _formula(system, args.psi)
    if args.theorem == "kop":
        if args.agent is None:
            raise InputError("verify kop needs --agent")
        i = system.resolve_agent(args.agent)
        a = Action(args.action) if args.action else _only_action(system, i)
        return check_kop(system, i, a, psi)

    if args.theorem == "ckop":
        if args.group is None:
            raise InputError("verify ckop needs --group")
        group = _group(system, args.group)
        if args.actions:
            assignment = _pairs(system, _split(args.actions))
        else:
            assignment = make_assignment([(j, _only_action(system, j)) for j in sorted(group)])
        i = system.resolve_agent(args.agent) if args.agent else min(group)
        return check_ckop(system, group, assignment, i, psi)

    if args.sequence is None:
        raise InputError("verify nkop needs --sequence")
    return check_nkop(system, _pairs(system, _split(args.sequence)), psi)


def cmd_verify(args: argparse.Namespace, ctx: RunContext) -> tuple[ExitStatus, dict, System]:
    """Verify a theorem and render its report."""
    system = _load(args.system)
    try:
        report = _verify(system, args)
    except InputError as e:
        raise CommandFailure(e, system) from e
    print(report.render(system))
    return report.exit_status(), report.to_dict(), system


def _build_scenario(args: argparse.Namespace, ctx: RunContext) -> tuple[System, str | None]:
    from kopcheck.protocols.base import NetworkTopology
    from kopcheck.protocols.chain import scenario_ordered_chain
    from kopcheck.protocols.ctm import CtmMode, scenario_ctm
    from kopcheck.protocols.firing_squad import parse_window, scenario_firing_squad
    from kopcheck.protocols.mini import scenario_atm, scenario_lamp, scenario_message
    from kopcheck.protocols.random_systems import random_system

    name = args.scenario
    if name == "lamp":
        return scenario_lamp(can_burn_out=not args.no_burnout), None
    if name == "message":
        return scenario_message(args.reliable, horizon=args.horizon), None
    if name == "atm":
        balances = _ints(args.balances, "balances")
        return scenario_atm(balances, args.horizon, args.amount, ctx.budget), None
    if name == "ctm":
        designated = _ints(args.designated, "designated values")
        topology = (
            NetworkTopology.parse(len(designated), args.topology) if args.topology else None
        )
        system, run = scenario_ctm(
            topology,
            _ints(args.domain, "domain"),
            designated,
            CtmMode(args.mode),
            args.horizon,
            ctx.budget,
        )
        return system, system.runs[run].name
    if name == "firing-squad":
        topology = NetworkTopology.parse(args.n, args.topology) if args.topology else None
        system = scenario_firing_squad(
            n=args.n,
            window=parse_window(args.window),
            topology=topology,
            recipients=_ints(args.recipients, "recipients"),
            horizon=args.horizon,
            strategy=args.strategy,
            budget=ctx.budget,
        )
        return system, None
    if name == "chain":
        system = scenario_ordered_chain(
            k=args.k,
            window=parse_window(args.window),
            delay=args.delay,
            horizon=args.horizon,
            recall=not args.no_recall,
            budget=ctx.budget,
        )
        return system, None
    generated = random_system(
        ctx.seed,
        args.mode,
        agents=args.agents,
        runs=args.runs,
        horizon=args.horizon,
        alphabet=args.alphabet,
    )
    return generated.system, None


def cmd_scenario(args: argparse.Namespace, ctx: RunContext) -> tuple[ExitStatus, dict, System]:
    """Generate a scenario and write its document."""
    system, designated = _build_scenario(args, ctx)
    _warn_boundary(system)
    save_system(system, args.out)
    print(f"{args.scenario}: {system.run_count} runs, {system.point_count} points")
    result: dict[str, Any] = {
        "scenario": args.scenario,
        "runs": system.run_count,
        "points": system.point_count,
    }
    if designated is not None:
        print(f"designated run: {designated}")
        result["designated_run"] = designated
    return ExitStatus.HOLDS, result, system


COMMANDS = {
    "eval": cmd_eval,
    "check": cmd_check,
    "verify": cmd_verify,
    "scenario": cmd_scenario,
}


# =============================================================================
# Entry point
# =============================================================================


def run(argv: list[str] | None = None) -> int:
    """Parse argv, run one command and return its exit code."""
    parser = create_parser()
    args = parser.parse_args(argv)

    if args.command is None or (args.command == "scenario" and args.scenario is None):
        parser.print_help()
        return ExitStatus.HOLDS

    ctx = RunContext(
        budget=args.budget,
        seed=args.seed,
        report_path=args.report,
        extension=args.extension,
        verbose=args.verbose,
    )
    logging.basicConfig(
        level=logging.DEBUG if ctx.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    logger.debug("command=%s context=%s", args.command, ctx.to_dict())
    if ctx.budget < 1:
        return _fail(args.command, ctx, InputError(f"budget must be >= 1, got {ctx.budget}"), None)

    try:
        status, result, system = COMMANDS[args.command](args, ctx)
    except CommandFailure as e:
        return _fail(args.command, ctx, e.error, e.system)
    except (InputError, BudgetExceeded) as e:
        return _fail(args.command, ctx, e, None)

    if ctx.report_path is not None:
        write_report(build_report(args.command, ctx, status, result, system), ctx.report_path)
    return status


def _fail(command: str, ctx: RunContext, error: Exception, system: System | None) -> int:
    if isinstance(error, BudgetExceeded):
        status = ExitStatus.BUDGET_EXCEEDED
        detail = {"budget": error.budget, "bound": error.bound, "time": error.time}
        code = "BUDGET_EXCEEDED"
    else:
        status = ExitStatus.INPUT_ERROR
        detail = dict(getattr(error, "detail", {}) or {})
        if getattr(error, "line", None) is not None:
            detail["line"] = error.line
        code = "INPUT_ERROR"
    print(f"Error: {error}", file=sys.stderr)
    if ctx.report_path is not None:
        report = build_report(
            command, ctx, status, system=system, error=build_error(code, str(error), detail)
        )
        write_report(report, ctx.report_path)
    return status


def main() -> None:
    """Main entry point."""
    sys.exit(run())
