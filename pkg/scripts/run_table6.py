"""Run the bundled six-simulation matrix on the scripted backend.

    python3 scripts/run_table6.py --out runs/table6 [--fixed-clock 2024-01-01T00:00:00Z]

Writes one directory per simulation (chat.html, chat.txt, execution.log,
config.snapshot.json, metrics.json, transcript.json) plus results.csv and
summary.json, then prints the CSV. With ``--fixed-clock`` every artifact is
byte-identical from one invocation to the next.
"""

from __future__ import annotations

import argparse
import sys
from datetime import datetime
from pathlib import Path

from agilesim import data_path
from agilesim.experiment import emit_results_csv, load_matrix, run_matrix, write_results
from agilesim.transcript import FixedClock, SystemClock


def _epoch(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        return datetime.fromisoformat(text.replace("Z", "+00:00")).timestamp()


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--matrix", type=Path, default=data_path("table6.experiment.json"))
    parser.add_argument("--out", type=Path, default=Path("runs/table6"))
    parser.add_argument("--fixed-clock", metavar="EPOCH_OR_ISO", help="deterministic clock start")
    parser.add_argument("--workers", type=int, default=None)
    args = parser.parse_args(argv)

    if args.fixed_clock:
        start = _epoch(args.fixed_clock)
        clock_factory = lambda: FixedClock(start)  # noqa: E731
    else:
        clock_factory = SystemClock

    table = run_matrix(load_matrix(args.matrix), out_dir=args.out, clock_factory=clock_factory, workers=args.workers)
    write_results(table, args.out)
    sys.stdout.write(emit_results_csv(table).replace("\r\n", "\n"))
    return 0 if all(row.status == "ok" for row in table) else 2


if __name__ == "__main__":
    sys.exit(main())
