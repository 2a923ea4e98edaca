"""Command-line entry point.

Exit codes: 0 success, 1 validation failure, 2 runtime or backend error,
3 usage error. Machine-readable output (JSON, CSV) goes to stdout and
diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Sequence

from agilesim import canonical as cj
from agilesim.agent_config import load_agent_definition, validate_agent_definition
from agilesim.backends import Backend, HttpBackend, ReplayBackend, ScriptedBackend, record
from agilesim.errors import AgilesimError, ConfigError
from agilesim.experiment import (
    MatrixEntry,
    default_backend_factory,
    load_matrix,
    run_matrix,
    emit_results_csv,
    write_results,
)
from agilesim.metrics import SentimentLexicon, compute_metrics
from agilesim.orchestrator import SimulationRun, read_snapshot, run_simulation
from agilesim.reporting import ReportOptions, emit_html, emit_text, parse_text, write_run_artifacts
from agilesim.scenario import load_scenario
from agilesim.selection import SeededRandom, selection_from_json
from agilesim.simconfig import SimulationConfig
from agilesim.tools import default_registry
from agilesim.transcript import Clock, FixedClock, SystemClock, memory_from_json, transcript_from_json

logger = logging.getLogger("agilesim")

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _existing_file(flag: str, value: str | None) -> Path:
    if value is None:
        raise UsageError(f"{flag} is required")
    path = Path(value)
    if not path.is_file():
        raise UsageError(f"{flag}: file not found: {value}")
    return path


def _epoch(value: str) -> datetime:
    try:
        return datetime.fromtimestamp(float(value), tz=timezone.utc)
    except ValueError:
        pass
    try:
        ts = datetime.fromisoformat(value.replace("Z", "+00:00"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an epoch or ISO-8601 instant: {value}") from None
    return ts if ts.tzinfo else ts.replace(tzinfo=timezone.utc)


def _clock_factory(args: argparse.Namespace) -> Callable[[], Clock]:
    if args.fixed_clock is None:
        return SystemClock
    epoch = args.fixed_clock
    return lambda: FixedClock(epoch)


def _add_backend_flags(p: argparse.ArgumentParser, default: str | None) -> None:
    p.add_argument("--backend", choices=("scripted", "replay", "http"), default=default)
    p.add_argument("--script", help="dialogue script for the scripted backend")
    p.add_argument("--fixtures", help="fixture directory (replay / record)")
    p.add_argument("--endpoint", help="base URL of an OpenAI-compatible API")
    p.add_argument("--token-env", help="environment variable holding the bearer token")
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.add_argument("--fixed-clock", type=_epoch, metavar="EPOCH", help="deterministic timestamps")


def _add_sim_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--agent", action="append", help="agent definition file (repeat, in roster order)")
    p.add_argument("--scenario", help="scenario file")
    p.add_argument("--sim-id", type=int, default=1)
    p.add_argument("--name", default="")
    p.add_argument("--model", help="model type (default: first agent's model)")
    p.add_argument("--iterations", type=int, default=10)
    p.add_argument("--temperature", type=float, help="default: first agent's temperature")
    p.add_argument("--selection", default="alternate", help="alternate | random | directed:A,B,...")
    p.add_argument("--seed", type=int, default=0, help="seed for random selection")
    p.add_argument("--memory", default="full", help="full | last:K")
    p.add_argument("--elaborate", action="store_true", help="enable topic elaboration")
    p.add_argument("--max-tool-calls", type=int, default=3)
    p.add_argument("--lexicon", help="sentiment lexicon JSON")
    p.add_argument("--tool-corpus", help="stub search corpus JSON")
    p.add_argument("--notes", default="")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="agilesim", description="Deterministic multi-agent dialogue simulations.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="check agent, scenario and experiment files")
    p.add_argument("files", nargs="+")

    p = sub.add_parser("run", help="run one simulation")
    _add_sim_flags(p)
    _add_backend_flags(p, "scripted")

    p = sub.add_parser("record", help="run against a live endpoint and write fixtures")
    _add_sim_flags(p)
    _add_backend_flags(p, "http")

    p = sub.add_parser("batch", help="run an experiment matrix")
    p.add_argument("matrix")
    _add_backend_flags(p, None)
    p.add_argument("--workers", type=int)

    p = sub.add_parser("metrics", help="recompute metrics from a chat.txt")
    p.add_argument("chat")
    p.add_argument("--scenario", required=True)
    p.add_argument("--lexicon")

    p = sub.add_parser("report", help="regenerate chat.html / chat.txt for a stored run")
    p.add_argument("run_dir")
    p.add_argument("--out", help="write here instead of the run directory")
    p.add_argument("--truncate", type=int, default=600)
    return parser


# --- validate -----------------------------------------------------------------


def _violation(file: str, code: str, path: str, message: str) -> str:
    return json.dumps({"file": file, "code": code, "path": path, "message": message}, ensure_ascii=False)


def _validate_file(path: Path) -> list[str]:
    name = str(path)
    try:
        if name.endswith(".agent.json"):
            defn = load_agent_definition(path)
            return [_violation(name, v.code, v.path, v.message) for v in validate_agent_definition(defn)]
        if name.endswith(".scenario.json"):
            load_scenario(path)
            return []
        if name.endswith(".experiment.json"):
            matrix = load_matrix(path)
            out = []
            for entry in matrix.entries:
                out += [
                    _violation(name, "ConfigProblem", f"sim {entry.config.sim_id}", p)
                    for p in entry.config.problems()
                ]
                if not entry.scenario_path.is_file():
                    out.append(_violation(name, "MissingFile", f"sim {entry.config.sim_id}", str(entry.scenario_path)))
            for ref, agent_path in matrix.agent_paths.items():
                if not agent_path.is_file():
                    out.append(_violation(name, "MissingFile", f"agents.{ref}", str(agent_path)))
                    continue
                out += _validate_file(agent_path)
            return out
    except AgilesimError as exc:
        return [_violation(name, type(exc).__name__, getattr(exc, "path", ""), str(exc))]
    raise UsageError(f"unknown file kind (expected .agent/.scenario/.experiment.json): {name}")


def cmd_validate(args: argparse.Namespace) -> int:
    problems = []
    for f in args.files:
        problems += _validate_file(_existing_file("files", f))
    for line in problems:
        print(line)
    return EXIT_INVALID if problems else EXIT_OK


# --- run / record -------------------------------------------------------------


def _single_backend(args: argparse.Namespace) -> Backend:
    if args.backend == "scripted":
        return ScriptedBackend.from_file(_existing_file("--script", args.script))
    if args.backend == "replay":
        if not args.fixtures:
            raise UsageError("--fixtures is required for --backend replay")
        return ReplayBackend(args.fixtures)
    if not args.endpoint:
        raise UsageError("--endpoint is required for --backend http")
    return HttpBackend(args.endpoint, args.token_env)


def _simulate(args: argparse.Namespace, backend: Backend) -> int:
    if not args.agent:
        raise UsageError("--agent is required (repeat once per agent)")
    agent_paths = [_existing_file("--agent", a) for a in args.agent]
    scenario_path = _existing_file("--scenario", args.scenario)
    agents = [load_agent_definition(p) for p in agent_paths]
    scenario = load_scenario(scenario_path)
    selection = (
        SeededRandom(args.seed) if args.selection == "random" else selection_from_json(args.selection)
    )
    config = SimulationConfig(
        sim_id=args.sim_id,
        simulation_name=args.name,
        model_type=args.model or agents[0].llm.model_name,
        iterations=args.iterations,
        temperature=agents[0].llm.temperature if args.temperature is None else args.temperature,
        agents_involved=tuple(a.agent_name for a in agents),
        selection=selection,
        memory=memory_from_json(args.memory, "--memory"),
        elaboration_enabled=args.elaborate,
        max_tool_calls=args.max_tool_calls,
        notes=args.notes,
    )
    out = Path(args.out)
    run = run_simulation(
        config,
        agents,
        backend,
        scenario,
        registry=default_registry(args.tool_corpus),
        clock=_clock_factory(args)(),
        lexicon=SentimentLexicon.load(args.lexicon) if args.lexicon else None,
        snapshot_path=out / str(config.sim_id) / "config.snapshot.json",
    )
    write_run_artifacts(run, out)
    print(
        json.dumps(
            {
                "sim_id": config.sim_id,
                "status": run.status,
                "messages": len(run.transcript),
                "metrics": run.metrics.to_dict() if run.metrics else None,
            },
            sort_keys=True,
        )
    )
    return EXIT_OK if run.ok else EXIT_RUNTIME


def cmd_run(args: argparse.Namespace) -> int:
    return _simulate(args, _single_backend(args))


def cmd_record(args: argparse.Namespace) -> int:
    if not args.endpoint:
        raise UsageError("--endpoint is required for record")
    if not args.fixtures:
        raise UsageError("--fixtures is required for record")
    return _simulate(args, record(HttpBackend(args.endpoint, args.token_env), args.fixtures))


# --- batch --------------------------------------------------------------------


def cmd_batch(args: argparse.Namespace) -> int:
    matrix = load_matrix(_existing_file("matrix", args.matrix))
    factory: Callable[[MatrixEntry], Backend] = default_backend_factory
    if args.backend == "replay":
        if not args.fixtures:
            raise UsageError("--fixtures is required for --backend replay")
        shared = ReplayBackend(args.fixtures)
        factory = lambda entry: shared  # noqa: E731
    elif args.backend == "http":
        if not args.endpoint:
            raise UsageError("--endpoint is required for --backend http")
        shared_http = HttpBackend(args.endpoint, args.token_env)
        factory = lambda entry: shared_http  # noqa: E731
    elif args.backend == "scripted":
        if args.script:
            factory = lambda entry: ScriptedBackend.from_file(args.script)  # noqa: E731
        else:
            missing = [e.config.sim_id for e in matrix.entries if e.backend.get("kind") != "scripted" or "script" not in e.backend]
            if missing:
                raise UsageError(f"--backend scripted: no script for sims {missing}; pass --script")
    table = run_matrix(
        matrix,
        backend_factory=factory,
        out_dir=args.out,
        clock_factory=_clock_factory(args),
        workers=args.workers,
    )
    write_results(table, args.out)
    sys.stdout.write(emit_results_csv(table))
    failed = [r for r in table if r.status != "ok"]
    for r in failed:
        print(f"sim {r.sim_id}: {r.status} {r.error}", file=sys.stderr)
    return EXIT_RUNTIME if failed else EXIT_OK


# --- metrics / report ---------------------------------------------------------


def cmd_metrics(args: argparse.Namespace) -> int:
    chat = _existing_file("chat", args.chat)
    scenario = load_scenario(_existing_file("--scenario", args.scenario))
    lexicon = SentimentLexicon.load(args.lexicon) if args.lexicon else None
    transcript = parse_text(chat.read_text(encoding="utf-8"))
    report = compute_metrics(transcript, scenario, lexicon)
    print(json.dumps({"messages": len(transcript), "metrics": report.to_dict()}, sort_keys=True))
    return EXIT_OK


def load_stored_run(run_dir: str | Path) -> SimulationRun:
    run_dir = Path(run_dir)
    snapshot = _existing_file("run_dir", str(run_dir / "config.snapshot.json")).read_text(encoding="utf-8")
    contents = read_snapshot(snapshot)
    if (run_dir / "transcript.json").is_file():
        transcript = transcript_from_json((run_dir / "transcript.json").read_bytes())
    else:
        transcript = parse_text(_existing_file("run_dir", str(run_dir / "chat.txt")).read_text(encoding="utf-8"))
    status = "ok"
    if (run_dir / "metrics.json").is_file():
        status = cj.load_file(run_dir / "metrics.json").get("status", "ok")
    return SimulationRun(config=contents.config, snapshot=snapshot, transcript=transcript, status=status)


def cmd_report(args: argparse.Namespace) -> int:
    run = load_stored_run(args.run_dir)
    out = Path(args.out) if args.out else Path(args.run_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        options = ReportOptions(truncate_chars=args.truncate)
    except ValueError as exc:
        raise UsageError(f"--truncate: {exc}") from None
    (out / "chat.html").write_text(emit_html(run, options), encoding="utf-8")
    (out / "chat.txt").write_text(emit_text(run), encoding="utf-8")
    print(json.dumps({"written": [str(out / "chat.html"), str(out / "chat.txt")]}))
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "run": cmd_run,
    "record": cmd_record,
    "batch": cmd_batch,
    "metrics": cmd_metrics,
    "report": cmd_report,
}


def dispatch(args: argparse.Namespace) -> int:
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"agilesim {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"agilesim {args.command}: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except AgilesimError as exc:
        print(f"agilesim {args.command}: {exc.code}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"agilesim {args.command}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    return dispatch(args)


if __name__ == "__main__":
    sys.exit(main())
