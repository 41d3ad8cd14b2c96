#!/usr/bin/env python3
"""Run the acceptance suite and echo the one-line-per-criterion report.

Equivalent to `pytest tests/test_acceptance.py -s`; this wrapper also prints
the persisted report file afterwards.
"""
import os
import subprocess
import sys

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def main() -> int:
    rc = subprocess.call(
        [sys.executable, "-m", "pytest", "tests/test_acceptance.py", "-v", "-s"], cwd=ROOT
    )
    report = os.path.join(ROOT, "acceptance_report.txt")
    if os.path.exists(report):
        print("\n==== acceptance report ====")
        print(open(report).read(), end="")
    return rc


if __name__ == "__main__":
    sys.exit(main())
