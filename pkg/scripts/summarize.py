"""Average benchmark outputs over repetitions.

Reads a gauss-bench CSV (grouped by n_atoms) or a wasp JSON (grouped by
kind, K and m) and prints mean and standard error of every error column.
"""

import argparse
import csv
import json
from collections import defaultdict
from pathlib import Path

import numpy as np


def load(path: Path):
    if path.suffix == ".json":
        rows = json.loads(path.read_text())
        return rows, ("kind", "K", "m"), ("w2_to_oracle", "mean_err", "cov_err")
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return rows, ("n_atoms",), ("w2_mc", "mean_err", "bures_cov_err")


def sort_key(group):
    out = []
    for v in group:
        try:
            out.append((0, float(v), ""))
        except (TypeError, ValueError):
            out.append((1, 0.0, str(v)))
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("results", type=Path)
    args = ap.parse_args()
    rows, keys, cols = load(args.results)
    groups = defaultdict(list)
    for r in rows:
        groups[tuple(r[k] for k in keys)].append(r)
    print(",".join(keys + tuple(f"{c}_{s}" for c in cols for s in ("mean", "se"))))
    for key in sorted(groups, key=sort_key):
        out = [str(v) for v in key]
        for c in cols:
            vals = np.array([float(r[c]) for r in groups[key] if r[c] not in (None, "")])
            if vals.size == 0:
                out += ["", ""]
                continue
            se = vals.std(ddof=1) / np.sqrt(vals.size) if vals.size > 1 else 0.0
            out += [f"{vals.mean():.6g}", f"{se:.3g}"]
        print(",".join(out))


if __name__ == "__main__":
    main()
