"""Acceptance criteria 1-8, one test each.

Each test carries ``@pytest.mark.acceptance(n, title)``; conftest prints a
PASS/FAIL line per criterion at the end of the session. Runtime limits are
asserted inside the tests, timed around the work they bound.
"""

from __future__ import annotations

import csv
import gc
import io
import itertools
import json
import random
import socket
import time

import pytest

from agilesim.agent_config import (
    ToolGrants,
    canonicalize,
    load_agent_definition,
    parse_agent_definition,
    validate_agent_definition,
)
from agilesim.backends import HttpBackend, ReplayBackend, ScriptedBackend, record
from agilesim.errors import ToolNotGranted
from agilesim.experiment import load_matrix, run_matrix, write_results
from agilesim.metrics import STOPWORDS, SentimentLexicon, compute_metrics
from agilesim.orchestrator import Level, read_snapshot, run_simulation
from agilesim.scenario import load_scenario, parse_scenario
from agilesim.selection import SeededRandom, speaker_sequence
from agilesim.simconfig import SimulationConfig
from agilesim.stub_server import StubServer
from agilesim.tools import ToolCallDirective, default_registry, invoke_tool
from agilesim.transcript import FixedClock, transcript_to_json

import oracles
from conftest import DATA, msgs

TABLE6 = DATA / "table6.experiment.json"
PM_PATH = DATA / "agents" / "pm.agent.json"
PM_NAME = "Product Management Agent—Alex"
ARCH_NAME = "System Architect—John"


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def _agents():
    return {
        "Product Management": load_agent_definition(PM_PATH),
        "System Architect": load_agent_definition(DATA / "agents" / "architect.agent.json"),
        "Dev Team": load_agent_definition(DATA / "agents" / "devteam.agent.json"),
    }


def _entry(sim_id: int):
    return next(e for e in load_matrix(TABLE6).entries if e.config.sim_id == sim_id)


def _run_entry(sim_id: int):
    entry = _entry(sim_id)
    agents = _agents()
    cfg = entry.config
    return run_simulation(
        cfg,
        [agents[r] for r in cfg.agents_involved],
        ScriptedBackend.from_file(entry.backend["script"]),
        load_scenario(entry.scenario_path),
        registry=default_registry(DATA / "search_corpus.json"),
        clock=FixedClock(0),
    )


# --- 1 ----------------------------------------------------------------------------


@pytest.mark.acceptance(1, "schema fidelity: Box-1 agent parses, validates, round-trips")
def test_criterion_1_schema_fidelity():
    with Timer() as t:
        raw = PM_PATH.read_bytes()
        defn = parse_agent_definition(raw)
        assert validate_agent_definition(defn) == []
        assert defn.agent_name == PM_NAME
        assert defn.llm.model_name == "gpt-3.5-turbo" and defn.llm.temperature == 0.0
        assert defn.tools.allowed_external_tools == ("TavilySearchResults",)
        canon = canonicalize(defn)
        again = parse_agent_definition(canon.encode("utf-8"))
        assert again == defn
        # canonicalize . parse . canonicalize is a fixpoint, byte for byte
        assert canonicalize(again).encode("utf-8") == canon.encode("utf-8")
        # key order in the source document does not matter
        shuffled = json.dumps(dict(reversed(list(json.loads(raw).items()))), ensure_ascii=False)
        assert canonicalize(parse_agent_definition(shuffled)) == canon
    assert t.elapsed < 1.0


# --- 2 ----------------------------------------------------------------------------

SEED42_GOLDEN = [1, 2, 0, 1, 0, 1, 2, 0, 2, 0]


@pytest.mark.acceptance(2, "turn-taking: Table-6 sim 1 alternates; SeededRandom(42) golden")
def test_criterion_2_turn_taking():
    with Timer() as t:
        run = _run_entry(1)
        assert run.ok and run.config.iterations == 10
        assert [m.agent_name for m in run.transcript] == [PM_NAME, ARCH_NAME] * 5
        assert speaker_sequence(SeededRandom(42), ["a", "b", "c"], 10) == SEED42_GOLDEN
        long = speaker_sequence(SeededRandom(42), ["a", "b", "c"], 2000)
        assert long[:10] == SEED42_GOLDEN
        assert all(x != y for x, y in zip(long, long[1:]))
        assert long == oracles.seeded_speakers(42, 3, 2000)
    assert t.elapsed < 1.0


# --- 3 ----------------------------------------------------------------------------

# six messages over an eight-token vocabulary: two token-equal positives,
# negatives, a stopword-only message and a mixed one
POOL = ["good plan", "Good. PLAN!", "bad delay", "the risk", "we great", "the we"]
SUBSET_TOKENS = ["good", "bad", "plan", "risk", "the", "we"]
OBJECTIVES = [["plan"], ["risk", "delay"], ["great"], ["good."]]
WIDE_VOCAB = [
    "good", "great", "ready", "done", "bad", "risk", "delay", "blocked", "issue", "plan", "sprint",
    "demo", "road", "map", "the", "and", "we", "it", "of", "to", "naïve", "Ünïcode", "v2", "snake_case",
    "PI", "objectives", "x1", "42", "über", "日本",
]
SEPARATORS = [" ", ", ", ". ", "! ", "\n", " - ", "? ", "; ", "...", "_"]


def _scenario(objectives):
    objs = [{"id": f"o{i}", "match_patterns": p} for i, p in enumerate(objectives)]
    return parse_scenario(json.dumps({"name": "s", "phase": "PIPlanning", "kickoff_instruction": "k", "objectives": objs}))


def _exhaustive_corpus():
    for n in range(1, 7):
        for seq in itertools.product(POOL, repeat=n):
            yield list(seq)
    subsets = [
        " ".join(w for w, keep in zip(SUBSET_TOKENS, mask) if keep) for mask in itertools.product([0, 1], repeat=6)
    ]
    for a, b in itertools.product(subsets, repeat=2):
        if a or b:  # two empty messages have no tokens at all
            yield [a, b]


def _random_corpus(count: int, seed: int = 20240101):
    rnd = random.Random(seed)
    for _ in range(count):
        texts = []
        for _ in range(rnd.randint(7, 16)):
            words = [rnd.choice(WIDE_VOCAB) + rnd.choice(SEPARATORS) for _ in range(rnd.randint(0, 12))]
            texts.append("".join(words))
        if not any(oracles.tokens(t) for t in texts):
            texts.append("plan")
        patterns = [[rnd.choice(WIDE_VOCAB).lower() for _ in range(rnd.randint(1, 3))] for _ in range(rnd.randint(1, 5))]
        yield texts, patterns


def _check(texts, objectives, scenario, lexicon):
    got = compute_metrics(msgs(*texts), scenario, lexicon).as_tuple()
    want = (
        oracles.unique_pct(texts),
        oracles.diversity(texts),
        oracles.completion(texts, objectives),
        oracles.stability(texts, lexicon.positive, lexicon.negative),
        oracles.retention(texts, STOPWORDS),
    )
    assert all(abs(g - w) <= 1e-9 for g, w in zip(got, want)), (texts, got, want)


@pytest.mark.acceptance(3, "metric oracle equivalence: exhaustive corpus + 1000 random cases")
def test_criterion_3_metric_oracles():
    lexicon = SentimentLexicon.default()
    with Timer() as t:
        scenario = _scenario(OBJECTIVES)
        exhaustive = 0
        for texts in _exhaustive_corpus():
            _check(texts, OBJECTIVES, scenario, lexicon)
            exhaustive += 1
        randomized = 0
        for texts, patterns in _random_corpus(1000):
            _check(texts, patterns, _scenario(patterns), lexicon)
            randomized += 1
    # 6 + 6^2 + ... + 6^6 sequences, plus 64 * 64 - 1 subset pairs
    assert exhaustive == 55_986 + 4_095 >= 10_000
    assert randomized == 1000
    assert t.elapsed < 60.0


# --- 4 ----------------------------------------------------------------------------


@pytest.mark.acceptance(4, "Table 7 value patterns reproduced exactly at 2 decimals")
def test_criterion_4_value_patterns():
    lexicon = SentimentLexicon.default()
    scenario = _scenario([["roadmap"], ["risk"], ["budget"], ["staffing"]])

    def report(*texts):
        return compute_metrics(msgs(*texts), scenario, lexicon).formatted()

    assert report(*["we agree on the roadmap"] * 9)["unique_content_pct"] == "11.11"
    # classes p, p, n, neutral
    assert report("good", "great", "bad", "roadmap")["sentiment_stability"] == "33.33"
    assert report("good", "bad", "good", "bad", "good")["sentiment_stability"] == "0.00"
    for uniform in (["good"] * 4, ["bad", "risk"], ["roadmap", "plan", "budget"]):
        assert report(*uniform)["sentiment_stability"] == "100.00"
    assert report("the roadmap is set", "one risk remains")["completion_score"] == "50.00"


# --- 5 ----------------------------------------------------------------------------

EXACT_HEADER = (
    "sim_id,model_type,unique_content_pct,diversity_score,completion_score,"
    "sentiment_stability,context_retention,status,wall_ms"
)


@pytest.mark.acceptance(5, "deterministic Table-6 batch: 6 ok rows, byte-identical artifacts")
def test_criterion_5_batch(tmp_path):
    with Timer() as t:
        outputs = []
        for label in ("first", "second"):
            out = tmp_path / label
            table = run_matrix(load_matrix(TABLE6), out_dir=out, clock_factory=lambda: FixedClock(1_700_000_000))
            write_results(table, out)
            outputs.append(out)
    first, second = outputs
    rows = list(csv.reader(io.StringIO((first / "results.csv").read_text(encoding="utf-8"))))
    assert ",".join(rows[0]) == EXACT_HEADER
    assert [r[0] for r in rows[1:]] == ["1", "2", "3", "4", "5", "6"]
    assert [r[7] for r in rows[1:]] == ["ok"] * 6
    compared = ["results.csv"]
    for sim in range(1, 7):
        for name in ("chat.html", "chat.txt", "config.snapshot.json", "execution.log"):
            compared.append(f"{sim}/{name}")
    for rel in compared:
        assert (first / rel).read_bytes() == (second / rel).read_bytes(), rel
    assert t.elapsed < 10.0


# --- 6 ----------------------------------------------------------------------------


@pytest.mark.acceptance(6, "record against the stub server, replay offline byte-identically")
def test_criterion_6_record_replay(tmp_path, monkeypatch):
    agents = _agents()
    entry = _entry(1)
    cfg = entry.config
    roster = [agents[r] for r in cfg.agents_involved]
    scenario = load_scenario(entry.scenario_path)
    with Timer() as t:
        with StubServer() as stub:
            recorded = run_simulation(cfg, roster, record(HttpBackend(stub.endpoint), tmp_path), scenario, clock=FixedClock(0))
        assert recorded.ok and len(recorded.transcript) == cfg.iterations

        def no_network(*args, **kwargs):
            raise OSError("network disabled during replay")

        monkeypatch.setattr(socket.socket, "connect", no_network)
        monkeypatch.setattr(socket.socket, "connect_ex", no_network)
        monkeypatch.setattr(socket, "create_connection", no_network)
        snap = read_snapshot(recorded.snapshot)
        replayed = run_simulation(
            snap.config, snap.agents, ReplayBackend(snap.backend["fixture_dir"]), snap.scenario, clock=FixedClock(0)
        )
    assert replayed.ok
    assert transcript_to_json(replayed.transcript).encode() == transcript_to_json(recorded.transcript).encode()
    assert replayed.snapshot.encode() == recorded.snapshot.encode()
    assert t.elapsed < 5.0


# --- 7 ----------------------------------------------------------------------------


@pytest.mark.acceptance(7, "tool loop: one trace entry, grant enforcement, loop bound warning")
def test_criterion_7_tool_loop():
    with Timer() as t:
        run = _run_entry(2)
        assert run.ok
        traced = [m for m in run.transcript if m.tool_trace]
        assert len(traced) == 1 and len(traced[0].tool_trace) == 1
        assert traced[0].tool_trace[0].directive.tool_name in ("search", "TavilySearchResults")

        registry = default_registry()
        with pytest.raises(ToolNotGranted):
            invoke_tool(registry, ToolGrants((), ()), ToolCallDirective("search", {"q": "x"}))
        with pytest.raises(ToolNotGranted):
            invoke_tool(registry, ToolGrants(("calc",), ()), ToolCallDirective("TavilySearchResults", {}))

        # a model that never stops asking for the tool
        spam = ['<<tool:search {"q": "again"}>>'] * 20
        agents = _agents()
        cfg = SimulationConfig(1, "m", 1, 0.7, ("Product Management", "System Architect"), max_tool_calls=3)
        looped = run_simulation(
            cfg,
            [agents["Product Management"], agents["System Architect"]],
            ScriptedBackend({PM_NAME: spam}),
            load_scenario(_entry(1).scenario_path),
            clock=FixedClock(0),
        )
        assert looped.ok
        [msg] = looped.transcript
        assert len(msg.tool_trace) == 3
        assert [(e.level, e.code) for e in looped.execution_log if e.level is not Level.INFO] == [
            (Level.WARNING, "tool.loop_limit")
        ]
    assert t.elapsed < 1.0


# --- 8 ----------------------------------------------------------------------------


@pytest.mark.acceptance(8, "invariant suite: every property passes with >= 1000 cases")
def test_criterion_8_property_suite():
    import test_properties as tp

    properties = {name: fn for name, fn in vars(tp).items() if name.startswith("test_") and hasattr(fn, "hypothesis")}
    assert len(properties) >= 20
    tp.COUNTS.clear()
    # long-lived objects from earlier tests would otherwise be rescanned by
    # every cyclic collection during the run
    gc.collect()
    gc.freeze()
    try:
        with Timer() as t:
            for fn in properties.values():
                fn()
    finally:
        gc.unfreeze()
    short = {name: tp.COUNTS[name] for name in properties if tp.COUNTS[name] < 1000}
    assert not short, short
    assert t.elapsed < 120.0, t.elapsed
