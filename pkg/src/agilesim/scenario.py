"""Scenario files (``*.scenario.json``): a phase, kickoff inputs and objectives."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Mapping

from agilesim import canonical as cj
from agilesim.errors import ConfigError
from agilesim.transcript import Transcript


class Phase(str, Enum):
    PREP_PI_PLANNING = "PrepPIPlanning"
    PI_PLANNING = "PIPlanning"
    ITERATION_EXECUTION = "IterationExecution"
    INSPECT_AND_ADAPT = "InspectAndAdapt"
    IP_ITERATION = "IPIteration"
    PI_SYSTEM_DEMO = "PISystemDemo"


@dataclass(frozen=True)
class ObjectiveSpec:
    id: str
    description: str
    match_patterns: tuple[str, ...]

    def met_by(self, content: str) -> bool:
        text = content.lower()
        return any(p.lower() in text for p in self.match_patterns)


@dataclass(frozen=True)
class Scenario:
    name: str
    phase: Phase
    kickoff_instruction: str
    objectives: tuple[ObjectiveSpec, ...]
    seed_inputs: Mapping[str, str] = field(default_factory=dict)


def scenario_from_dict(obj: Any) -> Scenario:
    obj = cj.expect_object(obj, "")
    name = cj.expect_str(cj.get(obj, "name", ""), "name")
    phase = cj.expect_enum(cj.get(obj, "phase", ""), Phase, "phase")
    seed_inputs = cj.expect_str_map(cj.get(obj, "seed_inputs", "", {}), "seed_inputs")
    kickoff = cj.expect_str(cj.get(obj, "kickoff_instruction", ""), "kickoff_instruction")
    raw_objectives = cj.expect_list(cj.get(obj, "objectives", ""), "objectives")
    objectives = []
    for i, raw in enumerate(raw_objectives):
        path = f"objectives[{i}]"
        o = cj.expect_object(raw, path)
        patterns = cj.expect_str_list(cj.get(o, "match_patterns", path), cj.join(path, "match_patterns"))
        if not patterns or not all(patterns):
            raise ConfigError(f"{path}.match_patterns must be nonempty strings")
        objectives.append(
            ObjectiveSpec(
                id=cj.expect_str(cj.get(o, "id", path), cj.join(path, "id")),
                description=cj.expect_str(o.get("description", ""), cj.join(path, "description")),
                match_patterns=tuple(patterns),
            )
        )
    if not objectives:
        raise ConfigError("scenario needs at least one objective")
    return Scenario(name, phase, kickoff, tuple(objectives), seed_inputs)


def scenario_to_dict(scenario: Scenario) -> dict[str, Any]:
    return {
        "name": scenario.name,
        "phase": scenario.phase.value,
        "seed_inputs": dict(scenario.seed_inputs),
        "kickoff_instruction": scenario.kickoff_instruction,
        "objectives": [
            {"id": o.id, "description": o.description, "match_patterns": list(o.match_patterns)}
            for o in scenario.objectives
        ],
    }


def parse_scenario(text: str | bytes, source: str | None = None) -> Scenario:
    return scenario_from_dict(cj.loads(text, source))


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    return parse_scenario(path.read_bytes(), str(path))


def evaluate_objectives(scenario: Scenario, transcript: Transcript) -> float:
    """Fraction of objectives with at least one pattern in some message (case-insensitive)."""
    if not scenario.objectives:
        return 0.0
    met = sum(1 for o in scenario.objectives if any(o.met_by(m.content) for m in transcript))
    return met / len(scenario.objectives)


def canonical_scenario(scenario: Scenario) -> str:
    return cj.cached_canonical(scenario, scenario_to_dict)
