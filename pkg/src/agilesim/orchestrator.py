"""Run one simulation turn by turn and collect its artifacts."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Any, Sequence

from agilesim import canonical as cj
from agilesim.agent_config import (
    AgentDefinition,
    agent_digest,
    agent_from_dict,
    canonicalize,
    validate_agent_definition,
)
from agilesim.backends import Backend, ChatRequest, ChatResponse
from agilesim.errors import AgilesimError, ConfigError, EmptyTranscript
from agilesim.metrics import STOPWORDS, MetricsReport, SentimentLexicon, compute_metrics
from agilesim.prompt_engine import ChatRole, RenderedMessage, build_prompt
from agilesim.scenario import Scenario, canonical_scenario, scenario_from_dict
from agilesim.selection import Directed, SeededRandom, select_next_speaker
from agilesim.simconfig import SimulationConfig, config_from_dict
from agilesim.tools import ToolRegistry, default_registry, invoke_tool, parse_tool_directive, tool_message
from agilesim.transcript import (
    Clock,
    Message,
    SystemClock,
    ToolCall,
    apply_memory_policy,
    format_ts,
)

logger = logging.getLogger(__name__)

__all__ = [
    "ELABORATION_REQUEST",
    "ExecutionEvent",
    "Level",
    "RunAborted",
    "Simulation",
    "SimulationRun",
    "apply_memory_policy",
    "build_snapshot",
    "run_simulation",
    "select_next_speaker",
]

SNAPSHOT_FORMAT = "agilesim.snapshot/1"
INSTRUCTION = "instruction"
ELABORATION_REQUEST = "Please elaborate on the topic above in more detail."


class Level(str, Enum):
    INFO = "INFO"
    WARNING = "WARNING"
    ERROR = "ERROR"


@dataclass(frozen=True)
class ExecutionEvent:
    timestamp: datetime
    level: Level
    code: str
    detail: str = ""

    def line(self) -> str:
        return f"{format_ts(self.timestamp)} {self.level.value} {self.code} {self.detail}".rstrip()


@dataclass
class SimulationRun:
    config: SimulationConfig
    snapshot: str
    transcript: list[Message] = field(default_factory=list)
    execution_log: list[ExecutionEvent] = field(default_factory=list)
    metrics: MetricsReport | None = None
    status: str = "ok"
    wall_ms: int = 0

    @property
    def ok(self) -> bool:
        return self.status == "ok"


class RunAborted(AgilesimError):
    code = "run.aborted"

    def __init__(self, cause: AgilesimError):
        self.cause = cause
        self.code = cause.code
        super().__init__(f"{cause.code}: {cause}")


def build_snapshot(
    config: SimulationConfig,
    agents: Sequence[AgentDefinition],
    scenario: Scenario,
    backend: Backend,
) -> str:
    """Canonical JSON that fully describes a run's inputs; contains no secrets."""
    scenario_text = canonical_scenario(scenario)
    # definitions are spliced in pre-encoded; compose() gives canonical_json's bytes
    doc = {
        "format": SNAPSHOT_FORMAT,
        "config": config.to_dict(),
        "agents": [
            {"ref": ref, "digest": agent_digest(a), "definition": cj.Fragment(canonicalize(a))}
            for ref, a in zip(config.agents_involved, agents)
        ],
        "scenario": {"digest": cj.digest(scenario_text), "definition": cj.Fragment(scenario_text)},
        "backend": backend.describe(),
        "seeds": {
            "selection": config.selection.seed if isinstance(config.selection, SeededRandom) else None
        },
    }
    return cj.compose(doc)


@dataclass(frozen=True)
class SnapshotContents:
    config: SimulationConfig
    agents: tuple[AgentDefinition, ...]
    scenario: Scenario
    backend: dict[str, Any]


def read_snapshot(text: str | bytes) -> SnapshotContents:
    doc = cj.expect_object(cj.loads(text, "snapshot"), "")
    if doc.get("format") != SNAPSHOT_FORMAT:
        raise ConfigError(f"not a {SNAPSHOT_FORMAT} document")
    agents = tuple(
        agent_from_dict(cj.get(a, "definition", f"agents[{i}]"))
        for i, a in enumerate(cj.expect_list(cj.get(doc, "agents", ""), "agents"))
    )
    scenario = scenario_from_dict(cj.get(cj.get(doc, "scenario", ""), "definition", "scenario"))
    return SnapshotContents(
        config=config_from_dict(cj.get(doc, "config", ""), path="config"),
        agents=agents,
        scenario=scenario,
        backend=cj.expect_object(cj.get(doc, "backend", ""), "backend"),
    )


class Simulation:
    """Mutable state of one run. Call :meth:`step` until :attr:`done`."""

    def __init__(
        self,
        config: SimulationConfig,
        agents: Sequence[AgentDefinition],
        backend: Backend,
        scenario: Scenario,
        *,
        registry: ToolRegistry | None = None,
        clock: Clock | None = None,
    ):
        config.check()
        if len(agents) != len(config.agents_involved):
            raise ConfigError(
                f"sim {config.sim_id}: {len(config.agents_involved)} agents involved, "
                f"{len(agents)} definitions given"
            )
        names = [a.agent_name for a in agents]
        if len(set(names)) != len(names):
            raise ConfigError(f"sim {config.sim_id}: agent names must be unique, got {names}")
        for a in agents:
            violations = validate_agent_definition(a)
            if violations:
                raise ConfigError(f"agent {a.agent_name!r} invalid: {violations[0]}")
        self.config = config
        self.agents = list(agents)
        self.roster = names
        self.backend = backend
        self.scenario = scenario
        self.registry = registry or default_registry()
        self.clock = clock or SystemClock()
        self.transcript: list[Message] = []
        self.events: list[ExecutionEvent] = []
        self.aborted: RunAborted | None = None
        self.snapshot = build_snapshot(config, agents, scenario, backend)

        selection = config.selection
        if isinstance(selection, Directed):
            # rule entries may be agents_involved refs; map them to agent names
            by_ref = dict(zip(config.agents_involved, names))
            selection = Directed(tuple(by_ref.get(r, r) for r in selection.rule))
        self.selection = selection
        self.bindings = {**scenario.seed_inputs, **config.seed_inputs}

    @property
    def done(self) -> bool:
        return self.aborted is not None or len(self.transcript) >= self.config.iterations

    def log(self, level: Level, code: str, detail: str = "") -> ExecutionEvent:
        event = ExecutionEvent(self.clock.now(), level, code, detail)
        self.events.append(event)
        logger.log(
            {Level.INFO: logging.INFO, Level.WARNING: logging.WARNING, Level.ERROR: logging.ERROR}[level],
            "[%s] %s %s",
            self.config.name,
            code,
            detail,
        )
        return event

    def _instruction(self) -> str:
        if self.transcript:
            text = self.transcript[-1].content
        else:
            text = self.scenario.kickoff_instruction
        if self.config.elaboration_enabled:
            text = f"{text} {ELABORATION_REQUEST}"
        return text

    def _call(self, agent: AgentDefinition, messages: list[RenderedMessage]) -> ChatResponse:
        sampling = replace(
            agent.llm, model_name=self.config.model_type, temperature=self.config.temperature
        )
        request = ChatRequest(self.config.model_type, tuple(messages), sampling, agent.agent_name)
        response = self.backend.complete(request)
        for warning in response.warnings:
            self.log(Level.WARNING, "backend.warning", warning)
        return response

    def step(self) -> Message:
        if self.done:
            raise RuntimeError("simulation already finished")
        index = len(self.transcript)
        started = self.clock.now()
        try:
            speaker = select_next_speaker(self.selection, index, self.roster, self.transcript)
            agent = self.agents[speaker]
            declared = agent.prompt.input_variables
            bindings = {k: v for k, v in self.bindings.items() if k in declared}
            if INSTRUCTION in declared:
                bindings[INSTRUCTION] = self._instruction()
            messages = build_prompt(agent, bindings, self.transcript, self.config.memory)
            response = self._call(agent, messages)
            trace: list[ToolCall] = []
            while agent.uses_tools:
                directive = parse_tool_directive(response.text)
                if directive is None:
                    break
                if len(trace) >= self.config.max_tool_calls:
                    self.log(
                        Level.WARNING,
                        "tool.loop_limit",
                        f"index={index} agent={agent.agent_name} limit={self.config.max_tool_calls}",
                    )
                    break
                result = invoke_tool(self.registry, agent.tools, directive)
                trace.append(ToolCall(directive, result))
                self.log(
                    Level.INFO,
                    "tool.call",
                    f"index={index} agent={agent.agent_name} tool={directive.tool_name} ok={result.ok}",
                )
                messages += [
                    RenderedMessage(ChatRole.ASSISTANT, response.text),
                    RenderedMessage(ChatRole.USER, tool_message(directive.tool_name, result)),
                ]
                response = self._call(agent, messages)
        except AgilesimError as exc:
            self.aborted = RunAborted(exc)
            self.log(Level.ERROR, exc.code, f"index={index} {exc}")
            raise self.aborted from exc
        finished = self.clock.now()
        message = Message(index, agent.agent_name, response.text, finished, tuple(trace))
        self.transcript.append(message)
        ms = int((finished - started).total_seconds() * 1000)
        self.log(Level.INFO, "turn.duration", f"index={index} agent={agent.agent_name} ms={ms}")
        return message


def run_simulation(
    config: SimulationConfig,
    agents: Sequence[AgentDefinition],
    backend: Backend,
    scenario: Scenario,
    *,
    registry: ToolRegistry | None = None,
    clock: Clock | None = None,
    lexicon: SentimentLexicon | None = None,
    stopwords: frozenset[str] = STOPWORDS,
    snapshot_path: str | Path | None = None,
) -> SimulationRun:
    """Run to ``config.iterations`` messages or the first error.

    The snapshot is written (when ``snapshot_path`` is given) before the first
    turn so that aborted runs stay reproducible.
    """
    sim = Simulation(config, agents, backend, scenario, registry=registry, clock=clock)
    started = sim.clock.now()
    if snapshot_path is not None:
        path = Path(snapshot_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(sim.snapshot, encoding="utf-8")
    sim.log(
        Level.INFO,
        "run.start",
        f"sim_id={config.sim_id} name={config.name} iterations={config.iterations} "
        f"snapshot={cj.digest(sim.snapshot)[:16]}",
    )
    while not sim.done:
        try:
            sim.step()
        except RunAborted:
            break
    run = SimulationRun(config=config, snapshot=sim.snapshot, transcript=sim.transcript)
    if sim.aborted is None:
        sim.log(Level.INFO, "run.complete", f"messages={len(sim.transcript)}")
    else:
        run.status = "aborted"
    try:
        run.metrics = compute_metrics(sim.transcript, scenario, lexicon, stopwords)
    except EmptyTranscript:
        run.metrics = None
    run.execution_log = sim.events
    run.wall_ms = int((sim.clock.now() - started).total_seconds() * 1000)
    return run
