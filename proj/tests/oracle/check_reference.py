"""Regenerates the statistics reference values and compares them with the committed file."""

import argparse
import json
import math
import sys
import tempfile
from pathlib import Path

import stats_reference


def close(a, b, tol):
    return math.isclose(a, b, rel_tol=tol, abs_tol=tol)


def compare(old, new, tol=1e-9):
    if isinstance(old, dict):
        return old.keys() == new.keys() and all(compare(old[k], new[k], tol) for k in old)
    if isinstance(old, list):
        return len(old) == len(new) and all(compare(a, b, tol) for a, b in zip(old, new))
    if isinstance(old, float) or isinstance(new, float):
        return close(float(old), float(new), tol)
    return old == new


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--reference", type=Path, required=True)
    args = ap.parse_args()
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp) / "fixtures.json"
        sys.argv = ["stats_reference", "--out", str(out)]
        stats_reference.main()
        fresh = json.loads(out.read_text())
    committed = json.loads(args.reference.read_text())
    if not compare(committed, fresh):
        print("committed reference values differ from a fresh oracle run")
        return 1
    print("reference values reproduced")
    return 0


if __name__ == "__main__":
    sys.exit(main())
