"""Batch command-line driver.

Every option can also come from a flat ``key = value`` file passed with
``--config``; command-line flags win over the file, the file wins over
the defaults shown by ``--help``. Results go to ``--out``, logs to stderr.

Exit codes: 0 success, 1 invalid input or configuration, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import experiments
from .barycenter import SolverOptions, initialize, solve
from .gaussian import ConvergenceError
from .imaging import load_dataset
from .io import (InputError, read_config, read_labels_csv, read_matrix_csv, read_measure_csv,
                 write_json, write_measure_csv, write_rows_csv)
from .measures import MeasureError, make_family
from .ot_exact import OTSolverError, solve_ot

log = logging.getLogger("freesupport")

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2


def int_list(text) -> list[int]:
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    return [int(v) for v in str(text).replace(" ", "").split(",") if v]


def float_list(text) -> list[float]:
    return [float(v) for v in str(text).replace(" ", "").split(",") if v]


SOLVER = {
    "seed": (int, 0, "master random seed"),
    "n_atoms": (int, 10, "barycenter support size m"),
    "step_size": (float, 0.5, "particle-flow step size in (0, 0.5]"),
    "tolerance": (float, 1e-6, "relative objective change that stops the solver"),
    "max_iter": (int, 200, "iteration cap of the barycenter solver"),
    "threads": (int, 1, "worker threads for independent tasks"),
}

COMMANDS = {
    "ot": {
        "help": "exact OT between two point-cloud CSVs",
        "params": {"plan": (str, None, "optional CSV path for the plan as i,j,mass triplets")},
        "positional": ["source", "target"],
    },
    "barycenter": {
        "help": "free-support barycenter of point-cloud CSVs",
        "params": {
            **SOLVER,
            "family_weights": (str, None, "comma-separated mixing weights (default uniform)"),
            "init_support": (str, None, "CSV with a starting support (switches to user_supplied init)"),
        },
        "positional": ["measures"],
    },
    "gauss-bench": {
        "help": "Gaussian barycenter benchmark over a grid of support sizes",
        "params": {
            **SOLVER,
            "repeats": (int, 100, "number of repetitions"),
            "atom_grid": (str, ",".join(str(v) for v in range(10, 201, 10)), "comma-separated support sizes"),
            "sample_size": (int, 100, "draws per component"),
            "mc_sample": (int, 100, "oracle draws per Monte Carlo repeat"),
            "mc_repeats": (int, 100, "Monte Carlo repeats for the semi-discrete W2"),
        },
    },
    "wasp": {
        "help": "Wasserstein posterior aggregation for conjugate linear regression",
        "params": {
            **SOLVER,
            "n": (int, 2000, "number of observations"),
            "K_list": (str, "2,5,10", "comma-separated subset counts"),
            "m_list": (str, "10,25,50,100,200", "comma-separated barycenter support sizes"),
            "repeats": (int, 10, "number of repetitions"),
            "draws": (int, 200, "posterior draws per subset"),
            "mc_sample": (int, 100, "oracle draws per Monte Carlo repeat"),
            "mc_repeats": (int, 100, "Monte Carlo repeats for the semi-discrete W2"),
        },
    },
    "classify": {
        "help": "nearest-barycenter classification of image datasets",
        "params": {
            **SOLVER,
            "train_dir": (str, None, "training directory (image CSVs + labels.csv)"),
            "test_dir": (str, None, "test directory (image CSVs + labels.csv)"),
            "m_list": (str, "10,20,40,80", "comma-separated barycenter support sizes"),
        },
    },
    "dvq": {
        "help": "distributed vector quantization clustering",
        "params": {
            **SOLVER,
            "data": (str, None, "CSV of points with a header row (default: synthetic blobs)"),
            "labels": (str, None, "optional CSV of reference labels with a header row"),
            "k_list": (str, "3", "comma-separated numbers of clusters"),
            "S_list": (str, "2,5", "comma-separated numbers of subsets"),
            "fraction": (float, 0.1, "summary size as a fraction of each subset"),
            "blob_n": (int, 3000, "synthetic blobs: number of points"),
            "blob_d": (int, 10, "synthetic blobs: dimension"),
            "blob_centers": (int, 3, "synthetic blobs: number of blobs"),
        },
    },
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="freesupport", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, entry in COMMANDS.items():
        p = sub.add_parser(name, help=entry["help"], description=entry["help"])
        for pos in entry.get("positional", []):
            if pos == "measures":
                p.add_argument(pos, nargs="*", help="point-cloud CSV files")
            else:
                p.add_argument(pos, help=f"{pos} point-cloud CSV")
        p.add_argument("--config", help="key=value file with option values")
        p.add_argument("--out", help="output path (file or directory)")
        p.add_argument("--dry-run", action="store_true", help="validate inputs and exit")
        for key, (_, default, text) in entry["params"].items():
            flag = "--" + key.replace("_", "-")
            p.add_argument(flag, dest=key, default=None, help=f"{text} (default: {default})")
    return parser


def resolve(args: argparse.Namespace) -> dict:
    """Merge defaults, the config file and command-line flags into typed values."""
    entry = COMMANDS[args.command]
    file_values = read_config(args.config) if args.config else {}
    unknown = set(file_values) - set(entry["params"]) - {"out", "measures", "source", "target"}
    if unknown:
        raise InputError(f"{args.config}: unknown keys {sorted(unknown)}")
    cfg = {}
    for key, (kind, default, _) in entry["params"].items():
        raw = getattr(args, key)
        if raw is None:
            raw = file_values.get(key, default)
        try:
            cfg[key] = None if raw is None else kind(raw)
        except ValueError:
            raise InputError(f"option {key}: cannot parse {raw!r}") from None
    cfg["out"] = args.out or file_values.get("out")
    for pos in entry.get("positional", []):
        value = getattr(args, pos)
        if pos == "measures" and not value and "measures" in file_values:
            value = file_values["measures"].replace(",", " ").split()
        cfg[pos] = value
    return cfg


def solver_options(cfg: dict, **extra) -> SolverOptions:
    return SolverOptions(step_size=cfg["step_size"], tolerance=cfg["tolerance"],
                         max_iterations=cfg["max_iter"], support_size=cfg["n_atoms"],
                         rng_seed=cfg["seed"], **extra)


def _require_file(path, what):
    if path is None:
        raise InputError(f"missing {what}")
    if not Path(path).exists():
        raise InputError(f"{what} not found: {path}")
    return Path(path)


def _executor(cfg):
    threads = cfg.get("threads") or 1
    if threads < 1:
        raise InputError("threads must be >= 1")
    return ThreadPoolExecutor(threads) if threads > 1 else None


def cmd_ot(cfg: dict, dry_run: bool = False) -> dict:
    source = read_measure_csv(_require_file(cfg["source"], "source CSV"))
    target = read_measure_csv(_require_file(cfg["target"], "target CSV"))
    if source.dim != target.dim:
        raise InputError(f"dimension mismatch: {source.dim} vs {target.dim}")
    if dry_run:
        return {"valid": True}
    plan = solve_ot(source, target)
    result = {"cost": plan.cost, "w2": float(np.sqrt(max(plan.cost, 0.0))), "plan_path": cfg.get("plan")}
    if cfg.get("plan"):
        rows, cols = np.nonzero(plan.matrix)
        write_rows_csv(cfg["plan"], [{"i": int(i), "j": int(j), "mass": repr(float(plan.matrix[i, j]))}
                                     for i, j in zip(rows, cols)])
    if cfg.get("out"):
        write_json(cfg["out"], result)
    return result


def cmd_barycenter(cfg: dict, dry_run: bool = False) -> dict:
    paths = cfg["measures"] or []
    if not paths:
        raise InputError("barycenter needs at least one measure CSV")
    measures = [read_measure_csv(_require_file(p, "measure CSV")) for p in paths]
    weights = float_list(cfg["family_weights"]) if cfg.get("family_weights") else None
    try:
        family = make_family(measures, weights)
    except MeasureError as exc:
        raise InputError(str(exc)) from None
    extra = {}
    if cfg.get("init_support"):
        init = read_measure_csv(_require_file(cfg["init_support"], "init support CSV"))
        extra = {"init_mode": "user_supplied", "init_support": init.support, "weights": init.weights}
    opts = solver_options(cfg, **extra)
    state = initialize(family, opts)
    if dry_run:
        return {"valid": True}
    with_exec = _executor(cfg)
    try:
        state = solve(family, opts, state, executor=with_exec)
    finally:
        if with_exec is not None:
            with_exec.shutdown()
    out = Path(cfg["out"] or ".")
    out.mkdir(parents=True, exist_ok=True)
    write_measure_csv(out / "barycenter.csv", state.measure)
    trace = {"objective": list(state.objective_trace), "iterations": state.iteration,
             "converged": state.converged}
    write_json(out / "trace.json", trace)
    return {"barycenter": str(out / "barycenter.csv"), "trace": str(out / "trace.json"),
            "objective": state.objective, "iterations": state.iteration}


def cmd_gauss_bench(cfg: dict, dry_run: bool = False) -> dict:
    grid = int_list(cfg["atom_grid"])
    if not grid or min(grid) < 1:
        raise InputError("atom_grid must hold positive sizes")
    if cfg["repeats"] < 1:
        raise InputError("repeats must be >= 1")
    opts = solver_options(cfg)
    if dry_run:
        return {"valid": True}
    ex = _executor(cfg)
    try:
        rows = experiments.run_gauss_bench(cfg["repeats"], grid, cfg["seed"], cfg["sample_size"],
                                           cfg["mc_sample"], cfg["mc_repeats"], opts, ex)
    finally:
        if ex is not None:
            ex.shutdown()
    out = cfg["out"] or "gauss_bench.csv"
    write_rows_csv(out, rows)
    return {"results": out, "rows": len(rows)}


def cmd_wasp(cfg: dict, dry_run: bool = False) -> dict:
    K_list, m_list = int_list(cfg["K_list"]), int_list(cfg["m_list"])
    if not K_list or min(K_list) < 1 or max(K_list) > cfg["n"]:
        raise InputError("K_list entries must lie in [1, n]")
    if not m_list or min(m_list) < 1:
        raise InputError("m_list must hold positive sizes")
    opts = solver_options(cfg)
    if dry_run:
        return {"valid": True}
    ex = _executor(cfg)
    try:
        rows = experiments.run_wasp(cfg["n"], K_list, m_list, cfg["repeats"], cfg["seed"], cfg["draws"],
                                    cfg["mc_sample"], cfg["mc_repeats"], opts, ex)
    finally:
        if ex is not None:
            ex.shutdown()
    out = cfg["out"] or "wasp.json"
    write_json(out, rows)
    return {"results": out, "records": len(rows)}


def cmd_classify(cfg: dict, dry_run: bool = False) -> dict:
    train = load_dataset(_require_file(cfg["train_dir"], "train_dir"))
    test = load_dataset(_require_file(cfg["test_dir"], "test_dir"))
    if not train or not test:
        raise InputError("train and test sets must be nonempty")
    m_list = int_list(cfg["m_list"])
    opts = solver_options(cfg)
    if dry_run:
        return {"valid": True}
    rows = experiments.run_classify([(img, lab) for _, img, lab in train],
                                    [(img, lab) for _, img, lab in test], m_list, cfg["seed"], opts)
    out = cfg["out"] or "classify.csv"
    write_rows_csv(out, rows)
    return {"results": out, "rows": rows}


def cmd_dvq(cfg: dict, dry_run: bool = False) -> dict:
    if cfg.get("data"):
        points = read_matrix_csv(_require_file(cfg["data"], "data CSV"))
        truth = read_labels_csv(_require_file(cfg["labels"], "labels CSV")) if cfg.get("labels") else None
    else:
        points, truth = experiments.gaussian_blobs(cfg["blob_n"], cfg["blob_d"], cfg["blob_centers"],
                                                   seed=cfg["seed"])
    if truth is not None and len(truth) != points.shape[0]:
        raise InputError(f"{len(truth)} labels for {points.shape[0]} points")
    k_list, S_list = int_list(cfg["k_list"]), int_list(cfg["S_list"])
    if not k_list or min(k_list) < 1 or not S_list or min(S_list) < 1:
        raise InputError("k_list and S_list must hold positive integers")
    if max(S_list) > points.shape[0]:
        raise InputError("more subsets than points")
    opts = solver_options(cfg)
    if dry_run:
        return {"valid": True}
    rows = experiments.run_dvq(points, truth, k_list, S_list, cfg["seed"], cfg["fraction"], opts)
    out = cfg["out"] or "dvq.csv"
    write_rows_csv(out, rows)
    return {"results": out, "rows": rows}


HANDLERS = {
    "ot": cmd_ot,
    "barycenter": cmd_barycenter,
    "gauss-bench": cmd_gauss_bench,
    "wasp": cmd_wasp,
    "classify": cmd_classify,
    "dvq": cmd_dvq,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve(args)
        result = HANDLERS[args.command](cfg, dry_run=args.dry_run)
    except (OTSolverError, FloatingPointError, ConvergenceError, np.linalg.LinAlgError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC
    except (InputError, MeasureError, FileNotFoundError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_INVALID
    print(json.dumps(result, default=str))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
