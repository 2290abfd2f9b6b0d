"""Command-line front end.

Every command writes plain CSV series (for plotting) and, where the data is
nested, a JSON document next to it. Divergent estimates are written as the
string ``inf``; missing ones as an empty CSV cell or JSON ``null``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Sequence

from .estimators import ESTIMATORS, EstimateRow, iter_estimates
from .heuristics import HeuristicConfig
from .listwalk import ListWalkConfig, detect_lists
from .paygo import paygo_table
from .simulator import ItemDistribution, ListWalkerSpec, WorkerModel, simulate, streaker_impact_study
from .stream import read_stream

DEFAULT_M = "10,20,50,100,200"


class CliError(Exception):
    pass


def fmt(value) -> str:
    """CSV cell for a number: ``repr`` for floats, ``inf`` for divergence."""
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)


def jsonable(value):
    if isinstance(value, float) and math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if isinstance(value, dict):
        return {k: jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    return value


def dump_json(payload) -> str:
    return json.dumps(jsonable(payload), indent=2, allow_nan=False) + "\n"


def csv_text(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows([fmt(v) for v in row] for row in rows)
    return buf.getvalue()


def int_list(text: str) -> list[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def name_list(text: str) -> list[str]:
    names = [part.strip() for part in text.split(",") if part.strip()]
    unknown = [n for n in names if n not in ESTIMATORS]
    if unknown or not names:
        raise argparse.ArgumentTypeError(f"unknown estimators: {', '.join(unknown) or text!r}")
    return names


def _write(out_dir: Path, name: str, text: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    path.write_text(text, encoding="utf-8")
    return path


def _load(args):
    if args.input is None:
        raise CliError("--input is required")
    if not Path(args.input).is_file():
        raise CliError(f"input file not found: {args.input}")
    return read_stream(args.input)


def _need_seed(args, what: str) -> int:
    if args.seed is None:
        raise CliError(f"--seed is required for {what}")
    return args.seed


def _heuristic(args) -> HeuristicConfig | None:
    if args.heuristic == "none":
        return None
    seed = _need_seed(args, f"--heuristic {args.heuristic}")
    return HeuristicConfig(args.heuristic, args.t, args.r, seed, args.repetitions)


def _distribution(args) -> ItemDistribution:
    if args.dist == "uniform":
        return ItemDistribution.uniform(args.n_items)
    if args.dist == "zipf":
        return ItemDistribution.zipf(args.n_items, args.zipf_s)
    if args.dist == "selfsimilar":
        return ItemDistribution.self_similar(args.n_items, args.h)
    return ItemDistribution.gray(args.n_items, args.h)


def _estimate_rows(rows: Sequence[EstimateRow], names: Sequence[str]):
    header = ["hits", "unique", "f1_ratio", "gamma", *names]
    body = [[r.hits, r.unique, r.f1_ratio, r.gamma, *(r.estimates[n] for n in names)] for r in rows]
    return header, body


# commands ---------------------------------------------------------------


def cmd_simulate(args) -> None:
    seed = _need_seed(args, "simulate")
    model = WorkerModel(
        num_workers=args.workers,
        hits=args.hits,
        counts=args.worker_counts,
        without_replacement=not args.with_replacement,
        interleaving=args.interleaving,
    )
    lists = None
    if args.list_walkers:
        lists = ListWalkerSpec(args.list_walkers, args.list_length, args.list_order, args.list_offset)
    out = simulate(_distribution(args), model, lists, seed)
    csv_path, truth_path = out.write(args.output, args.stem)
    print(f"wrote {csv_path} and {truth_path}", file=sys.stderr)


def cmd_estimate(args) -> None:
    stream = _load(args)
    names = args.estimators
    heuristic = _heuristic(args)
    rows = list(iter_estimates(stream, args.step, names, heuristic))
    header, body = _estimate_rows(rows, names)
    out = Path(args.output)
    _write(out, "estimates.csv", csv_text(header, body))
    payload = {
        "n": len(stream),
        "step": args.step,
        "estimators": list(names),
        "heuristic": asdict(heuristic) if heuristic else None,
        "rows": [dict(zip(header, row)) for row in body],
    }
    _write(out, "estimates.json", dump_json(payload))


def cmd_replay(args) -> None:
    stream = _load(args)
    names = args.estimators
    writer = csv.writer(sys.stdout, lineterminator="\n")
    header, _ = _estimate_rows([], names)
    writer.writerow(header)
    sys.stdout.flush()
    for row in iter_estimates(stream, args.step, names, _heuristic(args)):
        _, body = _estimate_rows([row], names)
        writer.writerow([fmt(v) for v in body[0]])
        sys.stdout.flush()


def cmd_paygo(args) -> None:
    stream = _load(args)
    seed = _need_seed(args, "paygo")
    preds = paygo_table(stream, args.m, args.permutations, seed, _heuristic(args), args.extension)
    rows = [[p.method, p.m, p.expected_new_uniques] for p in preds]
    out = Path(args.output)
    _write(out, "paygo.csv", csv_text(["method", "m", "expected_new_uniques"], rows))
    payload = {
        "n": len(stream),
        "permutations": args.permutations,
        "seed": seed,
        "extension": args.extension,
        "predictions": [asdict(p) for p in preds],
    }
    _write(out, "paygo.json", dump_json(payload))


def cmd_detect_lists(args) -> None:
    stream = _load(args)
    cfg = ListWalkConfig(args.s_min, args.beta, args.h, args.threshold)
    report = detect_lists(stream, cfg, args.step)
    out = Path(args.output)
    _write(out, "lists.json", dump_json(report.to_dict()))
    _write(out, "affected_series.csv", csv_text(["hits", "affected"], report.affected_series))


def cmd_streaker_study(args) -> None:
    seed = _need_seed(args, "streaker-study")
    rows = streaker_impact_study(_distribution(args), args.workers, args.hits, seed, args.runs)
    header = ["mode", "num_workers", "runs", "mean_estimate", "mean_error", "low_confidence_runs"]
    body = [[getattr(r, h) for h in header] for r in rows]
    out = Path(args.output)
    _write(out, "study.csv", csv_text(header, body))
    _write(out, "study.json", dump_json({"seed": seed, "rows": [asdict(r) for r in rows]}))


# parser -----------------------------------------------------------------


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _add_input(p, output=True):
    p.add_argument("--input", help="answer stream CSV (hit_index,worker_id,answer)")
    if output:
        p.add_argument("--output", required=True, help="output directory")


def _add_estimation(p):
    p.add_argument("--step", type=_positive, default=50)
    p.add_argument("--estimators", type=name_list, default=["uniform", "chao84", "chao92"])
    _add_heuristic(p)


def _add_heuristic(p):
    p.add_argument("--heuristic", choices=["none", "cluster", "f1"], default="none")
    p.add_argument("--t", type=_positive, default=10, help="top workers used for the quota")
    p.add_argument("--r", type=float, default=0.40, help="max fraction removed per worker")
    p.add_argument("--repetitions", type=_positive, default=1)


def _add_dist(p):
    p.add_argument("--dist", choices=["uniform", "zipf", "selfsimilar", "gray"], default="uniform")
    p.add_argument("--n-items", type=_positive, default=100)
    p.add_argument("--zipf-s", type=float, default=1.0)
    p.add_argument("--h", type=float, default=0.2, help="self-similar parameter")
    p.add_argument("--hits", type=_positive, default=400)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="openworld", description="Open-world completeness estimation")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="seed for stochastic commands")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help: str) -> argparse.ArgumentParser:
        return sub.add_parser(name, help=help, parents=[common])

    p = add("simulate", "generate a synthetic stream and its ground truth")
    p.add_argument("--output", required=True)
    p.add_argument("--stem", default="stream")
    _add_dist(p)
    p.add_argument("--workers", type=_positive, default=1)
    p.add_argument("--worker-counts", choices=["fixed", "power_law"], default="fixed")
    p.add_argument("--with-replacement", action="store_true")
    p.add_argument("--interleaving", choices=["random", "round_robin"], default="random")
    p.add_argument("--list-walkers", type=int, default=0)
    p.add_argument("--list-length", type=_positive, default=10)
    p.add_argument("--list-order", choices=["alphabetical", "popularity", "shuffled"], default="alphabetical")
    p.add_argument("--list-offset", type=int, default=0)
    p.set_defaults(func=cmd_simulate)

    p = add("estimate", "running cardinality estimates")
    _add_input(p)
    _add_estimation(p)
    p.set_defaults(func=cmd_estimate)

    p = add("replay", "stream estimate rows to stdout")
    _add_input(p, output=False)
    _add_estimation(p)
    p.set_defaults(func=cmd_replay)

    p = add("paygo", "predicted new uniques for more HITs")
    _add_input(p)
    p.add_argument("--m", type=int_list, default=int_list(DEFAULT_M))
    p.add_argument("--permutations", type=_positive, default=100)
    p.add_argument("--extension", choices=["linear", "cubic"], default="linear")
    _add_heuristic(p)
    p.set_defaults(func=cmd_paygo)

    p = add("detect-lists", "find shared answer sequences")
    _add_input(p)
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--h", type=float, default=0.2)
    p.add_argument("--threshold", type=float, default=0.01)
    p.add_argument("--s-min", type=int, default=5)
    p.add_argument("--step", type=_positive, default=50)
    p.set_defaults(func=cmd_detect_lists)

    p = add("streaker-study", "Chao92 error as answers spread over more workers")
    p.add_argument("--output", required=True)
    _add_dist(p)
    p.add_argument("--workers", type=int_list, default=[2, 3, 5, 10, 15, 20])
    p.add_argument("--runs", type=_positive, default=20)
    p.set_defaults(n_items=200, hits=300)
    p.set_defaults(func=cmd_streaker_study)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if hasattr(args, "m") and any(m < 0 for m in args.m):
        parser.error("--m values must be >= 0")
    try:
        args.func(args)
    except BrokenPipeError:
        # reader went away (e.g. piped into head); not an error
        sys.stdout = open(os.devnull, "w")
        return 0
    except (CliError, ValueError, OSError) as exc:
        print(f"openworld {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
