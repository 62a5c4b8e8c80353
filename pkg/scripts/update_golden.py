"""Regenerate the golden CLI outputs in tests/golden from cases.json."""

import json
import subprocess
import sys
from pathlib import Path

GOLDEN = Path(__file__).resolve().parents[1] / "tests" / "golden"


def main():
    cases = json.loads((GOLDEN / "cases.json").read_text())
    for name, argv in cases.items():
        proc = subprocess.run([sys.executable, "-m", "slanthelix", *argv], capture_output=True, text=True)
        if proc.returncode not in (0, 1):
            sys.exit(f"{name}: exit {proc.returncode}\n{proc.stderr}")
        report = json.loads(proc.stdout)
        report.pop("metadata", None)
        (GOLDEN / f"{name}.json").write_text(json.dumps(report, sort_keys=True, indent=2) + "\n")
        print(f"{name}: exit {proc.returncode}")


if __name__ == "__main__":
    main()
