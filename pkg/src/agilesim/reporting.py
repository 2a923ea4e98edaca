"""Run artifacts: HTML and text chat logs, execution log, config snapshot.

Layout of one run directory::

    out/<sim_id>/chat.html
    out/<sim_id>/chat.txt
    out/<sim_id>/execution.log
    out/<sim_id>/config.snapshot.json
    out/<sim_id>/metrics.json
    out/<sim_id>/transcript.json      (lossless, used to regenerate reports)
"""

from __future__ import annotations

import hashlib
import html
import json
import re
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path

from agilesim import canonical as cj
from agilesim.orchestrator import SimulationRun
from agilesim.transcript import Message, format_ts, parse_ts, transcript_to_json

DEFAULT_PALETTE = (
    "#1f77b4",
    "#d62728",
    "#2ca02c",
    "#9467bd",
    "#ff7f0e",
    "#17becf",
    "#8c564b",
    "#e377c2",
)
TRUNCATION_MARKER = "…"


@dataclass(frozen=True)
class ReportOptions:
    truncate_chars: int = 600
    palette: tuple[str, ...] = DEFAULT_PALETTE
    include_tool_traces: bool = True

    def __post_init__(self) -> None:
        if self.truncate_chars < 40:
            raise ValueError("truncate_chars must be at least 40")
        if len(self.palette) < 8:
            raise ValueError("palette needs at least 8 colours")


def stable_hash(name: str) -> int:
    return int.from_bytes(hashlib.sha256(name.encode("utf-8")).digest()[:8], "big")


def agent_color(name: str, palette: tuple[str, ...] = DEFAULT_PALETTE) -> str:
    return palette[stable_hash(name) % len(palette)]


def _initials(name: str) -> str:
    words = re.findall(r"[^\W_]+", name)
    return "".join(w[0] for w in words[:2]).upper() or "?"


def _snapshot_digest(run: SimulationRun) -> str:
    return cj.digest(run.snapshot)


_CSS = """
body{font-family:system-ui,sans-serif;max-width:60rem;margin:2rem auto;color:#222}
header{border-bottom:1px solid #ccc;margin-bottom:1rem}
.msg{display:flex;gap:.75rem;margin:.75rem 0;padding:.5rem;border-left:4px solid var(--c);background:#fafafa}
.badge{flex:none;width:2.2rem;height:2.2rem;border-radius:50%;background:var(--c);color:#fff;
display:flex;align-items:center;justify-content:center;font-weight:bold;font-size:.85rem}
.meta{font-size:.8rem;color:#666}
.name{color:var(--c);font-weight:bold}
.content{white-space:pre-wrap;margin:.25rem 0}
.trace{font-size:.85rem;background:#eef;padding:.25rem .5rem}
.trunc{color:#a00;font-weight:bold}
""".strip()


def _message_block(msg: Message, options: ReportOptions) -> str:
    color = agent_color(msg.agent_name, options.palette)
    esc = html.escape
    parts = [
        f'<div class="msg" data-index="{msg.index}" style="--c:{color}">',
        f'<div class="badge" aria-hidden="true">{esc(_initials(msg.agent_name))}</div>',
        "<div>",
        f'<div class="meta"><span class="name">{esc(msg.agent_name)}</span> '
        f"#{msg.index} &middot; <time>{format_ts(msg.timestamp)}</time></div>",
    ]
    if len(msg.content) > options.truncate_chars:
        shown = msg.content[: options.truncate_chars]
        parts.append(
            f'<div class="content">{esc(shown)}<span class="trunc">{TRUNCATION_MARKER}</span></div>'
        )
        parts.append(
            f'<details><summary>Full message</summary><div class="content">{esc(msg.content)}</div></details>'
        )
    else:
        parts.append(f'<div class="content">{esc(msg.content)}</div>')
    if options.include_tool_traces and msg.tool_trace:
        parts.append('<div class="trace"><ul>')
        for call in msg.tool_trace:
            args = json.dumps(dict(call.directive.args), sort_keys=True, ensure_ascii=False)
            status = "ok" if call.result.ok else "error"
            parts.append(
                f"<li><code>{esc(call.directive.tool_name)} {esc(args)}</code> ({status}): "
                f"{esc(call.result.content)}</li>"
            )
        parts.append("</ul></div>")
    parts.append("</div></div>")
    return "\n".join(parts)


def emit_html(run: SimulationRun, options: ReportOptions = ReportOptions()) -> str:
    cfg = run.config
    esc = html.escape
    head = [
        "<!DOCTYPE html>",
        '<html lang="en">',
        "<head>",
        '<meta charset="utf-8">',
        f"<title>{esc(cfg.name)} (sim {cfg.sim_id})</title>",
        f"<style>\n{_CSS}\n</style>",
        "</head>",
        "<body>",
        "<header>",
        f"<h1>{esc(cfg.name)}</h1>",
        f'<p class="meta">sim_id {cfg.sim_id} &middot; model {esc(cfg.model_type)} &middot; '
        f"temperature {cfg.temperature} &middot; {len(run.transcript)} messages &middot; "
        f"status {esc(run.status)} &middot; config {_snapshot_digest(run)[:16]}</p>",
        "</header>",
        "<main>",
    ]
    blocks = [_message_block(m, options) for m in run.transcript]
    tail = ["</main>", "</body>", "</html>", ""]
    return "\n".join(head + blocks + tail)


_HEADER = re.compile(r"^\[(\d+)\] (.+) @ (\d{4}-\d\d-\d\dT\d\d:\d\d:\d\d\.\d{3}Z):$")


def emit_text(run: SimulationRun) -> str:
    lines = [
        f"# simulation: {run.config.name} (sim_id={run.config.sim_id})",
        f"# config-digest: sha256:{_snapshot_digest(run)}",
        "",
    ]
    for msg in run.transcript:
        lines.append(f"[{msg.index}] {msg.agent_name} @ {format_ts(msg.timestamp)}:")
        lines.append(msg.content)
        lines.append("")
    return "\n".join(lines)


def parse_text(text: str) -> list[Message]:
    """Read a chat.txt back into messages (tool traces are not stored there)."""
    lines = text.split("\n")
    messages: list[Message] = []
    current: tuple[int, str, datetime] | None = None
    body: list[str] = []

    def flush() -> None:
        if current is not None:
            # emit_text writes one blank separator line after each message
            content = "\n".join(body[:-1] if body and body[-1] == "" else body)
            messages.append(Message(current[0], current[1], content, current[2]))

    for line in lines:
        m = _HEADER.match(line)
        if m and int(m.group(1)) == len(messages) + (current is not None):
            flush()
            current = (int(m.group(1)), m.group(2), parse_ts(m.group(3)))
            body = []
        elif current is not None:
            body.append(line)
    flush()
    return messages


def emit_execution_log(run: SimulationRun) -> str:
    return "".join(e.line() + "\n" for e in run.execution_log)


def emit_config_snapshot(run: SimulationRun) -> str:
    return run.snapshot


def emit_metrics_json(run: SimulationRun) -> str:
    doc = {
        "sim_id": run.config.sim_id,
        "status": run.status,
        "metrics": run.metrics.to_dict() if run.metrics else None,
    }
    return cj.canonical_json(doc)


def write_run_artifacts(
    run: SimulationRun, out_dir: str | Path, options: ReportOptions = ReportOptions()
) -> Path:
    run_dir = Path(out_dir) / str(run.config.sim_id)
    run_dir.mkdir(parents=True, exist_ok=True)
    files = {
        "chat.html": emit_html(run, options),
        "chat.txt": emit_text(run),
        "execution.log": emit_execution_log(run),
        "config.snapshot.json": emit_config_snapshot(run),
        "metrics.json": emit_metrics_json(run),
        "transcript.json": transcript_to_json(run.transcript),
    }
    for name, content in files.items():
        (run_dir / name).write_text(content, encoding="utf-8")
    return run_dir
