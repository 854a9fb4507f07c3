#!/usr/bin/env python3
"""Run the 2x2 feature-ablation matrix on the fixture benchmark.

Refreshes the shipped test split against the recorded endpoint store,
then evaluates the gold-echo oracle backend once per {linguistic context}
x {entity info} cell and prints the four reports. Useful as a smoke run
and as a template for real backend sweeps.
"""

import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def kgqa(*argv) -> None:
    cmd = [sys.executable, "-m", "kgqa.cli", *argv]
    result = subprocess.run(cmd, cwd=ROOT)
    if result.returncode != 0:
        sys.exit(result.returncode)


def main() -> None:
    config = ROOT / "fixtures" / "config.eval.json"
    dataset = ROOT / "fixtures" / "qald9plus-test.json"
    out_dir = Path(tempfile.mkdtemp(prefix="ablation-"))
    updated = out_dir / "updated.json"
    kgqa("--config", str(config), "refresh-answers", str(dataset),
         "--out", str(updated))
    kgqa("--config", str(config), "evaluate", str(updated), "--lang", "en",
         "--matrix", "ling,ent", "--out", str(out_dir / "report"))
    print(f"\nreports under {out_dir}:")
    for path in sorted(out_dir.glob("report.*.txt")):
        print(f"--- {path.name}")
        print(path.read_text())


if __name__ == "__main__":
    main()
