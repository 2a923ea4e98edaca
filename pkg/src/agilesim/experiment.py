"""Experiment matrices (``*.experiment.json``): load, run, aggregate.

Matrix file::

    {
      "defaults": {
        "agents": {"Product Management": "agents/pm.agent.json", ...},
        "scenario": "scenarios/pi_planning.scenario.json",
        "backend": {"kind": "scripted", "script": "dialogues/sim1.script.json"},
        "lexicon": null,
        ...any simulation key (selection, memory, max_tool_calls, ...)
      },
      "simulations": [
        {"sim_id": 1, "model_type": "gpt-3.5-turbo", "iterations": 10,
         "temperature": 0.7, "agents_involved": ["Product Management", "System Architect"],
         "notes": "Baseline simulation", "scenario": "...", "script": "..."}
      ]
    }

Relative paths resolve against the matrix file's directory.
"""

from __future__ import annotations

import csv
import io
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

from agilesim import canonical as cj
from agilesim.agent_config import AgentDefinition, load_agent_definition
from agilesim.backends import Backend, HttpBackend, ReplayBackend, ScriptedBackend
from agilesim.errors import AgilesimError, BadEnumValue, ConfigError, DuplicateSimId, MissingAgentRef
from agilesim.metrics import STOPWORDS, MetricsReport, SentimentLexicon, load_stopwords
from agilesim.orchestrator import SimulationRun, run_simulation
from agilesim.reporting import ReportOptions, write_run_artifacts
from agilesim.scenario import Scenario, load_scenario
from agilesim.simconfig import SimulationConfig, config_from_dict
from agilesim.tools import ToolRegistry, default_registry
from agilesim.transcript import Clock, SystemClock

logger = logging.getLogger(__name__)

CSV_HEADER = (
    "sim_id",
    "model_type",
    "unique_content_pct",
    "diversity_score",
    "completion_score",
    "sentiment_stability",
    "context_retention",
    "status",
    "wall_ms",
)
MAX_DEFAULT_WORKERS = 4

# keys of "defaults" / simulation entries that are not SimulationConfig fields
_ENTRY_ONLY = ("agents", "scenario", "backend", "lexicon", "stopwords", "script", "tool_corpus")


@dataclass(frozen=True)
class MatrixEntry:
    config: SimulationConfig
    scenario_path: Path
    backend: Mapping[str, Any]


@dataclass(frozen=True)
class ExperimentMatrix:
    entries: tuple[MatrixEntry, ...]
    agent_paths: Mapping[str, Path] = field(default_factory=dict)
    lexicon_path: Path | None = None
    stopwords_path: Path | None = None
    tool_corpus_path: Path | None = None
    source: Path | None = None

    @property
    def configs(self) -> list[SimulationConfig]:
        return [e.config for e in self.entries]

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class ResultRow:
    sim_id: int
    model_type: str
    metrics: MetricsReport | None
    status: str
    wall_ms: int
    error: str = ""


ResultsTable = list[ResultRow]


def _resolve(base: Path, value: Any, path: str) -> Path:
    p = Path(cj.expect_str(value, path))
    return p if p.is_absolute() else base / p


def _backend_spec(raw: Any, base: Path, path: str) -> dict[str, Any]:
    spec = dict(cj.expect_object(raw, path))
    kind = cj.expect_str(cj.get(spec, "kind", path), cj.join(path, "kind"))
    if kind == "scripted":
        if "script" in spec:
            spec["script"] = _resolve(base, spec["script"], cj.join(path, "script"))
    elif kind == "replay":
        spec["fixture_dir"] = _resolve(base, cj.get(spec, "fixture_dir", path), cj.join(path, "fixture_dir"))
    elif kind == "http":
        cj.expect_str(cj.get(spec, "endpoint", path), cj.join(path, "endpoint"))
    else:
        raise BadEnumValue(cj.join(path, "kind"), kind, ("scripted", "replay", "http"))
    return spec


def matrix_from_dict(obj: Any, base_dir: str | Path = ".", source: Path | None = None) -> ExperimentMatrix:
    base = Path(base_dir)
    obj = cj.expect_object(obj, "")
    defaults = dict(cj.expect_object(obj.get("defaults", {}), "defaults"))
    agents = {
        ref: _resolve(base, p, f"defaults.agents.{ref}")
        for ref, p in cj.expect_object(defaults.get("agents", {}), "defaults.agents").items()
    }
    config_defaults = {k: v for k, v in defaults.items() if k not in _ENTRY_ONLY}

    def opt_path(key: str) -> Path | None:
        v = defaults.get(key)
        return None if v is None else _resolve(base, v, f"defaults.{key}")

    entries = []
    seen: set[int] = set()
    for i, raw in enumerate(cj.expect_list(cj.get(obj, "simulations", ""), "simulations")):
        path = f"simulations[{i}]"
        raw = cj.expect_object(raw, path)
        config = config_from_dict(
            {k: v for k, v in raw.items() if k not in _ENTRY_ONLY}, config_defaults, path
        )
        if config.sim_id in seen:
            raise DuplicateSimId(config.sim_id)
        seen.add(config.sim_id)
        if config.sim_id < 1:
            raise ConfigError(f"{path}.sim_id must be positive")
        for ref in config.agents_involved:
            if ref not in agents:
                raise MissingAgentRef(ref, config.sim_id)
        scenario = raw.get("scenario", defaults.get("scenario"))
        if scenario is None:
            raise ConfigError(f"{path}: no scenario given and no default scenario")
        backend = dict(cj.expect_object(raw.get("backend", defaults.get("backend", {"kind": "scripted"})), path))
        if "script" in raw:
            backend = {"kind": "scripted", "script": raw["script"]}
        entries.append(
            MatrixEntry(
                config=config,
                scenario_path=_resolve(base, scenario, cj.join(path, "scenario")),
                backend=_backend_spec(backend, base, cj.join(path, "backend")),
            )
        )
    return ExperimentMatrix(
        entries=tuple(entries),
        agent_paths=agents,
        lexicon_path=opt_path("lexicon"),
        stopwords_path=opt_path("stopwords"),
        tool_corpus_path=opt_path("tool_corpus"),
        source=source,
    )


def load_matrix(path: str | Path) -> ExperimentMatrix:
    path = Path(path)
    return matrix_from_dict(cj.load_file(path), path.parent, path)


def default_backend_factory(entry: MatrixEntry) -> Backend:
    spec = entry.backend
    kind = spec["kind"]
    if kind == "scripted":
        if "script" not in spec:
            raise ConfigError(f"sim {entry.config.sim_id}: scripted backend without a script")
        return ScriptedBackend.from_file(spec["script"])
    if kind == "replay":
        return ReplayBackend(spec["fixture_dir"])
    return HttpBackend(spec["endpoint"], spec.get("token_env"))


def load_agents(matrix: ExperimentMatrix) -> dict[str, AgentDefinition]:
    return {ref: load_agent_definition(p) for ref, p in matrix.agent_paths.items()}


def run_matrix(
    matrix: ExperimentMatrix,
    agents: Mapping[str, AgentDefinition] | None = None,
    backend_factory: Callable[[MatrixEntry], Backend] = default_backend_factory,
    *,
    out_dir: str | Path | None = None,
    clock_factory: Callable[[], Clock] = SystemClock,
    workers: int | None = None,
    registry: ToolRegistry | None = None,
    report_options: ReportOptions = ReportOptions(),
    scenarios: Mapping[Path, Scenario] | None = None,
) -> ResultsTable:
    """Run every entry; one failed run never stops the batch.

    Rows come back in matrix order whatever the completion order. Each run gets
    its own backend (from ``backend_factory``) and its own clock. Agents and
    scenarios not passed in are loaded from the matrix's paths.
    """
    if agents is None:
        agents = load_agents(matrix)
    lexicon = SentimentLexicon.load(matrix.lexicon_path) if matrix.lexicon_path else SentimentLexicon.default()
    stopwords = load_stopwords(matrix.stopwords_path) if matrix.stopwords_path else STOPWORDS
    if registry is None:
        registry = default_registry(matrix.tool_corpus_path)
    scenarios = dict(scenarios or {})
    for entry in matrix.entries:
        if entry.scenario_path not in scenarios:
            scenarios[entry.scenario_path] = load_scenario(entry.scenario_path)

    def one(entry: MatrixEntry) -> ResultRow:
        cfg = entry.config
        try:
            missing = [r for r in cfg.agents_involved if r not in agents]
            if missing:
                raise MissingAgentRef(missing[0], cfg.sim_id)
            run = run_simulation(
                cfg,
                [agents[r] for r in cfg.agents_involved],
                backend_factory(entry),
                scenarios[entry.scenario_path],
                registry=registry,
                clock=clock_factory(),
                lexicon=lexicon,
                stopwords=stopwords,
                snapshot_path=None if out_dir is None else Path(out_dir) / str(cfg.sim_id) / "config.snapshot.json",
            )
        except AgilesimError as exc:
            logger.error("sim %s failed before running: %s", cfg.sim_id, exc)
            return ResultRow(cfg.sim_id, cfg.model_type, None, "error", 0, str(exc))
        if out_dir is not None:
            write_run_artifacts(run, out_dir, report_options)
        return _row(run)

    n = len(matrix.entries)
    if n == 0:
        return []
    workers = workers or min(n, MAX_DEFAULT_WORKERS)
    if workers <= 1:
        return [one(e) for e in matrix.entries]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, matrix.entries))


def _row(run: SimulationRun) -> ResultRow:
    error = ""
    if not run.ok and run.execution_log:
        error = run.execution_log[-1].code
    return ResultRow(
        run.config.sim_id,
        run.config.model_type,
        run.metrics if run.ok else None,
        run.status,
        run.wall_ms,
        error,
    )


def emit_results_csv(table: Sequence[ResultRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)  # RFC 4180: CRLF line ends, minimal quoting
    writer.writerow(CSV_HEADER)
    for row in table:
        if row.metrics is None:
            metrics = [""] * 5
        else:
            metrics = [f"{v:.2f}" for v in row.metrics.as_tuple()]
        writer.writerow([row.sim_id, row.model_type, *metrics, row.status, row.wall_ms])
    return buf.getvalue()


def summarize(table: Sequence[ResultRow]) -> dict[str, Any]:
    """Per-metric means over successful rows (radar chart inputs)."""
    ok = [r.metrics for r in table if r.status == "ok" and r.metrics is not None]
    means = None
    if ok:
        means = {
            f: round(sum(getattr(m, f) for m in ok) / len(ok), 2) for f in MetricsReport.FIELDS
        }
    return {
        "runs": len(table),
        "ok": len(ok),
        "statuses": {str(r.sim_id): r.status for r in table},
        "means": means,
    }


def write_results(table: Sequence[ResultRow], out_dir: str | Path) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "results.csv"
    summary_path = out / "summary.json"
    # newline="" keeps the csv module's CRLF intact
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(emit_results_csv(table))
    summary_path.write_text(cj.canonical_json(summarize(table)), encoding="utf-8")
    return csv_path, summary_path
