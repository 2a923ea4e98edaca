"""Per-run simulation parameters."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping

from agilesim import canonical as cj
from agilesim.agent_config import TEMPERATURE_RANGE
from agilesim.errors import ConfigError
from agilesim.selection import Alternate, Directed, SpeakerSelection, selection_from_json
from agilesim.tools import DEFAULT_MAX_TOOL_CALLS
from agilesim.transcript import FullMemory, MemoryPolicy, memory_from_json


@dataclass(frozen=True)
class SimulationConfig:
    sim_id: int
    model_type: str
    iterations: int
    temperature: float
    agents_involved: tuple[str, ...]
    simulation_name: str = ""
    selection: SpeakerSelection = Alternate()
    memory: MemoryPolicy = FullMemory()
    elaboration_enabled: bool = False
    seed_inputs: Mapping[str, str] = field(default_factory=dict)
    max_tool_calls: int = DEFAULT_MAX_TOOL_CALLS
    notes: str = ""

    @property
    def name(self) -> str:
        return self.simulation_name or f"sim-{self.sim_id}"

    def problems(self) -> list[str]:
        out = []
        if self.sim_id < 1:
            out.append(f"sim_id must be positive, got {self.sim_id}")
        if self.iterations < 1:
            out.append(f"iterations must be >= 1, got {self.iterations}")
        lo, hi = TEMPERATURE_RANGE
        if not lo <= self.temperature <= hi:
            out.append(f"temperature {self.temperature} not in [{lo}, {hi}]")
        if not self.model_type.strip():
            out.append("model_type is empty")
        if not self.agents_involved:
            out.append("agents_involved is empty")
        if len(set(self.agents_involved)) != len(self.agents_involved):
            out.append("agents_involved has duplicates")
        if isinstance(self.selection, Alternate) and len(self.agents_involved) < 2:
            out.append("alternate selection needs at least 2 agents")
        if isinstance(self.selection, Directed):
            if not self.selection.rule:
                out.append("directed rule is empty")
            stray = [r for r in self.selection.rule if r not in self.agents_involved]
            if stray:
                out.append(f"directed rule names agents not involved: {stray}")
        if self.max_tool_calls < 0:
            out.append("max_tool_calls must be >= 0")
        return out

    def check(self) -> "SimulationConfig":
        problems = self.problems()
        if problems:
            raise ConfigError(f"sim {self.sim_id}: " + "; ".join(problems))
        return self

    def to_dict(self) -> dict[str, Any]:
        return {
            "sim_id": self.sim_id,
            "simulation_name": self.simulation_name,
            "model_type": self.model_type,
            "iterations": self.iterations,
            "temperature": float(self.temperature),
            "agents_involved": list(self.agents_involved),
            "selection": self.selection.to_dict(),
            "memory": self.memory.to_dict(),
            "elaboration_enabled": self.elaboration_enabled,
            "seed_inputs": dict(self.seed_inputs),
            "max_tool_calls": self.max_tool_calls,
            "notes": self.notes,
        }


def config_from_dict(obj: Any, defaults: Mapping[str, Any] | None = None, path: str = "") -> SimulationConfig:
    """Build a config from a matrix entry, falling back to ``defaults`` per key."""
    obj = cj.expect_object(obj, path)
    merged = {**(defaults or {}), **obj}

    def opt(key: str, default: Any) -> Any:
        return merged.get(key, default)

    def req(key: str) -> Any:
        return cj.get(merged, key, path)

    seed_inputs = {
        **cj.expect_str_map((defaults or {}).get("seed_inputs", {}), cj.join(path, "seed_inputs")),
        **cj.expect_str_map(obj.get("seed_inputs", {}), cj.join(path, "seed_inputs")),
    }
    return SimulationConfig(
        sim_id=cj.expect_int(req("sim_id"), cj.join(path, "sim_id")),
        simulation_name=cj.expect_str(opt("simulation_name", ""), cj.join(path, "simulation_name")),
        model_type=cj.expect_str(req("model_type"), cj.join(path, "model_type")),
        iterations=cj.expect_int(req("iterations"), cj.join(path, "iterations")),
        temperature=cj.expect_number(req("temperature"), cj.join(path, "temperature")),
        agents_involved=tuple(
            cj.expect_str_list(req("agents_involved"), cj.join(path, "agents_involved"))
        ),
        selection=selection_from_json(opt("selection", "alternate"), cj.join(path, "selection")),
        memory=memory_from_json(opt("memory", "full"), cj.join(path, "memory")),
        elaboration_enabled=cj.expect_bool(
            opt("elaboration_enabled", False), cj.join(path, "elaboration_enabled")
        ),
        seed_inputs=seed_inputs,
        max_tool_calls=cj.expect_int(
            opt("max_tool_calls", DEFAULT_MAX_TOOL_CALLS), cj.join(path, "max_tool_calls")
        ),
        notes=cj.expect_str(opt("notes", ""), cj.join(path, "notes")),
    )
