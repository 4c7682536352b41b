"""``optseg`` command line: queries, benchmarks, data generation and input
validation."""

from __future__ import annotations

import argparse
import csv
import itertools
import logging
import os
import sys
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import formats
from .aug import aug_query
from .ite import ite_query
from .oracle import oracle_query
from .preprocess import cached_preprocess, preprocess
from .result import QueryResult
from .scoring import DistributionModel, ScoringFunction
from .synthgen import LENGTH_CLASSES, GenConfig, generate, grid_network

log = logging.getLogger("optseg")

ALGOS = ("aug", "ite", "oracle")
CSV_FIELDS = ["algo", "delta", "beta", "n_routes", "n_facilities", "length_class", "wall_ms",
              "score", "n_segments", "total", "splits", "prune1", "prune2", "status", "parallel"]


@dataclass(frozen=True)
class QueryConfig:
    network: str
    facilities: str
    routes: str
    delta: float
    beta: int = 4
    algo: str = "ite"
    scoring: str = "all"
    model: str = "equal"
    metrics_out: str | None = None
    length_class: str = ""
    prune_duplicates: bool = True

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("delta must be non-negative")
        if self.beta < 2:
            raise ValueError("beta must be at least 2")
        if self.algo not in ALGOS:
            raise ValueError(f"unknown algorithm {self.algo!r}")
        ScoringFunction.parse(self.scoring)
        DistributionModel(self.model)


@dataclass
class Dataset:
    net: object
    routes: list
    facilities: list
    paths: tuple[str, ...]
    indexes: dict = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock)

    def index(self, delta: float, cache_dir: str | None = None):
        with self.lock:
            if delta not in self.indexes:
                if cache_dir:
                    self.indexes[delta] = cached_preprocess(self.net, self.routes, self.facilities,
                                                            delta, self.paths, cache_dir)
                else:
                    self.indexes[delta] = preprocess(self.net, self.routes, self.facilities, delta)
            return self.indexes[delta]


def load_dataset(network: str, facilities: str, routes: str) -> Dataset:
    net = formats.read_network(network)
    facs = formats.read_facilities(facilities, net)
    rts = formats.read_routes(routes, net)
    return Dataset(net, rts, facs, (network, facilities, routes))


def execute(cfg: QueryConfig, data: Dataset, cache_dir: str | None = None) -> tuple[QueryResult, float]:
    """Run one query; returns the result and the query time in ms
    (parsing and preprocessing excluded)."""
    fn = ScoringFunction.parse(cfg.scoring)
    model = DistributionModel(cfg.model)
    index = data.index(cfg.delta, cache_dir)
    t0 = time.perf_counter()
    if cfg.algo == "aug":
        res = aug_query(data.net, data.routes, data.facilities, cfg.delta, fn, model, index=index)
    elif cfg.algo == "ite":
        res = ite_query(data.net, data.routes, data.facilities, cfg.delta, cfg.beta, fn, model,
                        index=index, prune_duplicates=cfg.prune_duplicates)
    else:
        res = oracle_query(data.net, data.routes, data.facilities, cfg.delta, fn, model)
    return res, (time.perf_counter() - t0) * 1000.0


def _g(x: float) -> str:
    return f"{x:.9g}"


def bench_row(cfg: QueryConfig, data: Dataset, res: QueryResult | None, wall_ms: float,
              status: str, parallel: bool) -> dict:
    m = res.metrics if res is not None else {}
    return {
        "algo": cfg.algo, "delta": _g(cfg.delta), "beta": cfg.beta,
        "n_routes": len(data.routes), "n_facilities": len(data.facilities),
        "length_class": cfg.length_class, "wall_ms": _g(wall_ms),
        "score": _g(res.score) if res is not None else "",
        "n_segments": len(res.segments) if res is not None else "",
        "total": m.get("total", 0), "splits": m.get("splits", 0),
        "prune1": m.get("prune1", 0), "prune2": m.get("prune2", 0),
        "status": status, "parallel": int(parallel),
    }


class CsvSink:
    """Appends rows to a CSV file, one writer at a time."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.lock = threading.Lock()
        if not self.path.exists() or self.path.stat().st_size == 0:
            with open(self.path, "w", newline="") as fh:
                csv.DictWriter(fh, CSV_FIELDS).writeheader()

    def write(self, row: dict) -> None:
        with self.lock, open(self.path, "a", newline="") as fh:
            csv.DictWriter(fh, CSV_FIELDS).writerow(row)


def run_query(cfg: QueryConfig, out=None, cache_dir: str | None = None) -> QueryResult:
    data = load_dataset(cfg.network, cfg.facilities, cfg.routes)
    res, ms = execute(cfg, data, cache_dir)
    text = formats.format_result(res)
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)
    if cfg.metrics_out:
        CsvSink(cfg.metrics_out).write(bench_row(cfg, data, res, ms, "ok", False))
    return res


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("OPTSEG_THREADS", "1")))
    except ValueError:
        return 1


def run_benchmark(matrix: list[QueryConfig], repetitions: int, out: str | Path,
                  data: Dataset | None = None, cache_dir: str | None = None) -> list[dict]:
    """One CSV row per (config, repetition). A failing trial is recorded
    with its error and the run carries on."""
    if repetitions < 1:
        raise ValueError("repetitions must be positive")
    sink = CsvSink(out)
    datasets: dict[tuple, Dataset] = {}
    threads = thread_count()
    rows: list[dict] = []

    def dataset_for(cfg: QueryConfig) -> Dataset:
        if data is not None:
            return data
        key = (cfg.network, cfg.facilities, cfg.routes)
        if key not in datasets:
            datasets[key] = load_dataset(*key)
        return datasets[key]

    def trial(cfg: QueryConfig) -> dict:
        ds = dataset_for(cfg)
        try:
            res, ms = execute(cfg, ds, cache_dir)
            row = bench_row(cfg, ds, res, ms, "ok", threads > 1)
        except Exception as exc:      # recorded, never fatal
            log.warning("trial %s failed: %s", cfg, exc)
            row = bench_row(cfg, ds, None, 0.0, f"error: {exc}", threads > 1)
        sink.write(row)
        return row

    jobs = [cfg for cfg in matrix for _ in range(repetitions)]
    for cfg in matrix:
        dataset_for(cfg)      # parse up front, on one thread
    if threads == 1:
        rows = [trial(cfg) for cfg in jobs]
    else:
        with ThreadPoolExecutor(threads) as pool:
            rows = list(pool.map(trial, jobs))
    return rows


# -- argument parsing ----------------------------------------------------------

def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x]


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x]


def _add_data_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--network", required=True)
    p.add_argument("--facilities", required=True)
    p.add_argument("--routes", required=True)


def _add_score_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", default="equal", choices=[m.value for m in DistributionModel])
    p.add_argument("--scoring", default="all", help="all or cap:<x>")
    p.add_argument("--cache-dir", help="keep preprocessed indexes here")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="optseg", description="Optimal segment queries on road networks.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)

    q = sub.add_parser("query", help="answer one query")
    _add_data_args(q)
    _add_score_args(q)
    q.add_argument("--delta", type=float, required=True)
    q.add_argument("--beta", type=int, default=4)
    q.add_argument("--algo", default="ite", choices=ALGOS)
    q.add_argument("--out", help="result file (default: stdout)")
    q.add_argument("--metrics", help="append a metrics row to this CSV file")
    q.add_argument("--no-duplicate-pruning", action="store_true", help="disable duplicate-optimum pruning")

    b = sub.add_parser("bench", help="run a parameter sweep and write CSV rows")
    _add_data_args(b)
    _add_score_args(b)
    b.add_argument("--algos", default="aug,ite")
    b.add_argument("--deltas", type=_floats, default=[0.02])
    b.add_argument("--betas", type=_ints, default=[4])
    b.add_argument("--repetitions", type=int, default=1)
    b.add_argument("--length-class", default="")
    b.add_argument("--out", required=True)

    g = sub.add_parser("gen", help="generate a synthetic dataset")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--routes", type=int, default=100)
    g.add_argument("--points", default="480:520", help="min:max fixes per route")
    g.add_argument("--step", type=float, help="map units per fix")
    g.add_argument("--length-class", choices=sorted(LENGTH_CLASSES), default="medium")
    g.add_argument("--facilities", type=int, default=100)
    g.add_argument("--usage-max", type=int, default=20)
    where = g.add_mutually_exclusive_group(required=True)
    where.add_argument("--network", help="existing network file")
    where.add_argument("--grid", help="generate an RxC grid network")
    g.add_argument("--spacing", type=float, default=0.1)
    g.add_argument("--jitter", type=float, default=0.2)
    g.add_argument("--out", required=True, help="output directory")

    v = sub.add_parser("validate", help="parse and check input files")
    v.add_argument("--network", required=True)
    v.add_argument("--facilities")
    v.add_argument("--routes")
    v.add_argument("--delta", type=float, help="also preprocess and report idle facilities")
    return ap


def _cmd_query(a) -> int:
    cfg = QueryConfig(a.network, a.facilities, a.routes, a.delta, a.beta, a.algo, a.scoring,
                      a.model, a.metrics, prune_duplicates=not a.no_duplicate_pruning)
    run_query(cfg, a.out, a.cache_dir)
    return 0


def _cmd_bench(a) -> int:
    algos = [x for x in a.algos.split(",") if x]
    matrix = [QueryConfig(a.network, a.facilities, a.routes, d, beta, algo, a.scoring, a.model,
                          length_class=a.length_class)
              for algo, d, beta in itertools.product(algos, a.deltas, a.betas)]
    rows = run_benchmark(matrix, a.repetitions, a.out, cache_dir=a.cache_dir)
    failed = sum(r["status"] != "ok" for r in rows)
    print(f"{len(rows)} trials written to {a.out}" + (f", {failed} failed" if failed else ""))
    return 0


def _cmd_gen(a) -> int:
    lo, _, hi = a.points.partition(":")
    step = a.step if a.step is not None else LENGTH_CLASSES[a.length_class]
    cfg = GenConfig(seed=a.seed, n_routes=a.routes, points_min=int(lo), points_max=int(hi or lo),
                    step_length=step, n_facilities=a.facilities, usage_max=a.usage_max)
    out = Path(a.out)
    out.mkdir(parents=True, exist_ok=True)
    if a.grid:
        r, _, c = a.grid.lower().partition("x")
        net = grid_network(int(r), int(c), a.spacing, a.jitter, a.seed)
    else:
        net = formats.read_network(a.network)
    formats.write_network(net, out / "network.txt")
    routes, facilities = generate(net, cfg)
    formats.write_routes(routes, out / "routes.txt")
    formats.write_facilities(facilities, out / "facilities.txt")
    print(f"wrote {len(net.edges)} edges, {len(routes)} routes, {len(facilities)} facilities to {out}")
    return 0


def _cmd_validate(a) -> int:
    net = formats.read_network(a.network)
    print(f"network: {len(net.vertices)} vertices, {len(net.edges)} edges")
    facs = formats.read_facilities(a.facilities, net) if a.facilities else []
    routes = formats.read_routes(a.routes, net) if a.routes else []
    if a.facilities:
        print(f"facilities: {len(facs)}")
    if a.routes:
        print(f"routes: {len(routes)}")
    if a.delta is not None:
        idle = preprocess(net, routes, facs, a.delta).idle_facilities()
        print(f"facilities attracting no route at delta={a.delta:g}: {len(idle)}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"query": _cmd_query, "bench": _cmd_bench, "gen": _cmd_gen,
               "validate": _cmd_validate}[args.cmd]
    try:
        return handler(args)
    except (ValueError, OSError) as exc:
        print(f"optseg: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
