"""Monte Carlo sweep orchestration, aggregation, and CSV serialization.

A sweep walks a grid of user counts, draws `trials` seeded channels per
count, evaluates every configured scheme on the same channel (paired
comparison), and records one row per (scheme, k, trial). Aggregation and
scaling fits consume those rows; the CSV writers pin the exact on-disk
schema, with floats at 12 significant digits so repeated runs are
byte-identical.
"""

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import baselines
from .alignment import (
    DENSE_K_LIMIT,
    METRICS,
    build_graph,
    build_graph_streamed,
    greedy_color,
    make_schedule,
    max_independent_set_size,
    phase_alignment_rates,
    phase_alignment_rates_streamed,
)
from .channel import effective_gains, sample_channel
from .seeding import derive_seed, make_generator
from .ssa import ASCENT_K_LIMIT, optimize_ssa

SCHEMES = ("phase_align", "tdma_peak", "tdma_bursty", "tin", "ssa_ascent")

ROW_COLUMNS = ("scheme", "k", "trial", "seed", "threshold_c", "metric",
               "sum_rate_nats", "colors_used", "max_ind_set", "ind_set_exact",
               "runtime_ms")
AGGREGATE_COLUMNS = ("scheme", "k", "mean_sum_rate", "std_err", "p05", "p95", "n")
BOUND_COLUMNS = ("bound_name", "k", "s", "trials", "empirical", "analytic",
                 "passed", "std_error")

DEFAULT_K_LIST = tuple(2**e for e in range(6, 14))
DEFAULT_TRIALS = 100
DEFAULT_THRESHOLD_C = 0.4
PAPER_K_LIST = (2**14, 2**15)
PAPER_TRIALS = 10


COLOR_ORDERS = ("default", "random")


@dataclass(frozen=True)
class ExperimentConfig:
    k_list: tuple
    trials: int
    master_seed: int
    threshold_constant: float
    schemes: tuple
    metric: str = "sinr"
    ssa_restarts: int = 32
    color_order: str = "default"

    def __post_init__(self):
        ks = tuple(int(k) for k in self.k_list)
        if len(ks) == 0:
            raise ValueError("k_list must be non-empty")
        if any(b <= a for a, b in zip(ks, ks[1:])):
            raise ValueError("k_list must be strictly increasing")
        if any(k < 1 for k in ks):
            raise ValueError("user counts must be positive")
        object.__setattr__(self, "k_list", ks)
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        schemes = tuple(self.schemes)
        if len(schemes) == 0:
            raise ValueError("schemes must be non-empty")
        for s in schemes:
            if s not in SCHEMES:
                raise ValueError(f"unknown scheme '{s}' (choose from {SCHEMES})")
        if len(set(schemes)) != len(schemes):
            raise ValueError("schemes must be distinct")
        object.__setattr__(self, "schemes", schemes)
        if self.metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}")
        if "ssa_ascent" in schemes and max(ks) > ASCENT_K_LIMIT:
            raise ValueError(f"ssa_ascent requires every K <= {ASCENT_K_LIMIT}")
        if self.ssa_restarts < 1:
            raise ValueError("ssa_restarts must be >= 1")
        if not (self.threshold_constant > 0 and math.isfinite(self.threshold_constant)):
            raise ValueError("threshold constant must be positive and finite")
        if self.color_order not in COLOR_ORDERS:
            raise ValueError(f"color_order must be one of {COLOR_ORDERS}")


@dataclass(frozen=True)
class TrialRow:
    scheme: str
    k: int
    trial: int
    seed: int
    threshold_c: float
    metric: str
    sum_rate_nats: float
    colors_used: int = None
    max_ind_set: int = None
    ind_set_exact: bool = None
    runtime_ms: float = None


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    rows: tuple

    def aggregates(self):
        return aggregate(self.rows)


def _phase_align_row(k, seed, cfg):
    order = None
    if cfg.color_order == "random":
        # seeded two-coordinate derivation, disjoint from channel and
        # restart streams
        order = make_generator(derive_seed(seed, 2, 0)).permutation(k)
    if k > DENSE_K_LIMIT:
        graph = build_graph_streamed(k, seed, cfg.threshold_constant)
        coloring = greedy_color(graph, order)
        schedule = make_schedule(coloring)
        report = phase_alignment_rates_streamed(k, seed, schedule, cfg.metric)
    else:
        gains = effective_gains(sample_channel(k, seed))
        graph = build_graph(gains, cfg.threshold_constant)
        coloring = greedy_color(graph, order)
        schedule = make_schedule(coloring)
        report = phase_alignment_rates(gains, schedule, cfg.metric)
    mis, exact = max_independent_set_size(graph, coloring=coloring)
    return report.sum_rate, coloring.num_colors, mis, exact


def _evaluate_scheme(scheme, k, seed, cfg):
    """(sum_rate, colors_used, max_ind_set, ind_set_exact) for one trial."""
    if scheme == "phase_align":
        return _phase_align_row(k, seed, cfg)
    if scheme == "tdma_peak":
        return baselines.tdma_peak(k).sum_rate, None, None, None
    if scheme == "tdma_bursty":
        return baselines.tdma_bursty(k).sum_rate, None, None, None
    if scheme == "tin":
        return baselines.tin_all_on(k).sum_rate, None, None, None
    if scheme == "ssa_ascent":
        sol = optimize_ssa(sample_channel(k, seed), mode="ascent",
                           restarts=cfg.ssa_restarts, seed=seed)
        return sol.value, None, None, None
    raise ValueError(f"unknown scheme '{scheme}'")


def _run_trial(cfg, k, trial):
    """All scheme rows for one (k, trial) cell; failures become NaN rows."""
    seed = derive_seed(cfg.master_seed, k, trial)
    rows = []
    for scheme in cfg.schemes:
        t0 = time.perf_counter()
        try:
            sum_rate, colors, mis, exact = _evaluate_scheme(scheme, k, seed, cfg)
        except Exception:
            sum_rate, colors, mis, exact = float("nan"), None, None, None
        ms = (time.perf_counter() - t0) * 1e3
        rows.append(TrialRow(scheme=scheme, k=k, trial=trial, seed=seed,
                             threshold_c=cfg.threshold_constant, metric=cfg.metric,
                             sum_rate_nats=sum_rate, colors_used=colors,
                             max_ind_set=mis, ind_set_exact=exact, runtime_ms=ms))
    return rows


def run_sweep(config: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    """Evaluate every configured scheme on every (k, trial) channel.

    Deterministic for a given config, including row order, regardless of
    threads: work items are keyed by (k, trial) and merged in grid order.
    """
    cells = [(k, t) for k in config.k_list for t in range(config.trials)]
    if threads > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            futures = {cell: pool.submit(_run_trial, config, *cell) for cell in cells}
            per_cell = {cell: f.result() for cell, f in futures.items()}
    else:
        per_cell = {cell: _run_trial(config, *cell) for cell in cells}
    rows = []
    for cell in cells:
        rows.extend(per_cell[cell])
    return ExperimentResult(config=config, rows=tuple(rows))


@dataclass(frozen=True)
class AggregateRow:
    scheme: str
    k: int
    mean_sum_rate: float
    std_err: float
    p05: float
    p95: float
    n: int


def aggregate(rows) -> tuple:
    """Per-(scheme, k) statistics over finite sum rates, sorted by scheme
    then k so the output order is a pure function of the rows."""
    if isinstance(rows, ExperimentResult):
        rows = rows.rows
    groups = {}
    for row in rows:
        groups.setdefault((row.scheme, row.k), []).append(row.sum_rate_nats)
    out = []
    for scheme, k in sorted(groups):
        vals = np.asarray([v for v in groups[(scheme, k)] if math.isfinite(v)])
        if vals.size == 0:
            continue
        se = float(vals.std(ddof=1) / math.sqrt(vals.size)) if vals.size > 1 else 0.0
        out.append(AggregateRow(
            scheme=scheme, k=k, mean_sum_rate=float(vals.mean()), std_err=se,
            p05=float(np.percentile(vals, 5)), p95=float(np.percentile(vals, 95)),
            n=int(vals.size)))
    return tuple(out)


ENVELOPES = ("lnK_over_lnlnK", "lnK", "const")


def envelope_value(name: str, k) -> float:
    if name == "lnK_over_lnlnK":
        return math.log(k) / math.log(math.log(k))
    if name == "lnK":
        return math.log(k)
    if name == "const":
        return 1.0
    raise ValueError(f"envelope must be one of {ENVELOPES}")


def scaling_fit(result, scheme: str, envelope: str):
    """Ratio of mean sum rate to envelope(K) per K, plus the least-squares
    slope of mean against envelope. Needs >= 3 distinct K for the scheme."""
    rows = result.rows if isinstance(result, ExperimentResult) else tuple(result)
    means = [(a.k, a.mean_sum_rate) for a in aggregate(rows) if a.scheme == scheme]
    if len(means) < 3:
        raise ValueError(f"need >= 3 distinct K values for scheme '{scheme}'")
    env = np.asarray([envelope_value(envelope, k) for k, _ in means])
    y = np.asarray([m for _, m in means])
    ratio_series = tuple((k, float(m / envelope_value(envelope, k))) for k, m in means)
    if np.ptp(env) == 0.0:
        slope = 0.0  # constant envelope: no growth direction to regress on
    else:
        slope = float(np.polyfit(env, y, 1)[0])
    return ratio_series, slope


# ------------------------------------------------------------------- CSV


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def write_rows(path, rows, include_timings: bool = False):
    """Trial rows in the pinned column order; runtime_ms stays blank unless
    include_timings is set (timings differ run to run and would break
    byte-identical output)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ROW_COLUMNS)
        for row in rows:
            writer.writerow([
                row.scheme, row.k, row.trial, row.seed,
                _fmt(float(row.threshold_c)), row.metric,
                _fmt(float(row.sum_rate_nats)),
                _fmt(row.colors_used), _fmt(row.max_ind_set),
                _fmt(row.ind_set_exact),
                _fmt(float(row.runtime_ms)) if include_timings and row.runtime_ms is not None else "",
            ])


def write_aggregates(path, aggs):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(AGGREGATE_COLUMNS)
        for a in aggs:
            writer.writerow([a.scheme, a.k, _fmt(a.mean_sum_rate), _fmt(a.std_err),
                             _fmt(a.p05), _fmt(a.p95), a.n])


def write_bound_results(path, results):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(BOUND_COLUMNS)
        for r in results:
            writer.writerow([r.bound_name, r.k, r.s, r.trials, _fmt(r.empirical),
                             _fmt(r.analytic), _fmt(r.passed), _fmt(r.std_error)])


class CSVFormatError(ValueError):
    """Malformed CSV content; the message names the offending line."""


def _parse(cast, text, line_no, column, optional=False):
    if text == "":
        if optional:
            return None
        raise CSVFormatError(f"line {line_no}: empty value in column '{column}'")
    try:
        if cast is bool:
            if text not in ("true", "false"):
                raise ValueError
            return text == "true"
        return cast(text)
    except ValueError:
        raise CSVFormatError(
            f"line {line_no}: cannot parse '{text}' in column '{column}'") from None


def read_rows(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CSVFormatError("line 1: empty file, expected header") from None
        if tuple(header) != ROW_COLUMNS:
            raise CSVFormatError(f"line 1: bad header {header!r}")
        rows = []
        for i, rec in enumerate(reader, start=2):
            if len(rec) != len(ROW_COLUMNS):
                raise CSVFormatError(f"line {i}: expected {len(ROW_COLUMNS)} fields, got {len(rec)}")
            rows.append(TrialRow(
                scheme=rec[0],
                k=_parse(int, rec[1], i, "k"),
                trial=_parse(int, rec[2], i, "trial"),
                seed=_parse(int, rec[3], i, "seed"),
                threshold_c=_parse(float, rec[4], i, "threshold_c"),
                metric=rec[5],
                sum_rate_nats=_parse(float, rec[6], i, "sum_rate_nats"),
                colors_used=_parse(int, rec[7], i, "colors_used", optional=True),
                max_ind_set=_parse(int, rec[8], i, "max_ind_set", optional=True),
                ind_set_exact=_parse(bool, rec[9], i, "ind_set_exact", optional=True),
                runtime_ms=_parse(float, rec[10], i, "runtime_ms", optional=True),
            ))
    return tuple(rows)


def read_aggregates(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CSVFormatError("line 1: empty file, expected header") from None
        if tuple(header) != AGGREGATE_COLUMNS:
            raise CSVFormatError(f"line 1: bad header {header!r}")
        aggs = []
        for i, rec in enumerate(reader, start=2):
            if len(rec) != len(AGGREGATE_COLUMNS):
                raise CSVFormatError(
                    f"line {i}: expected {len(AGGREGATE_COLUMNS)} fields, got {len(rec)}")
            aggs.append(AggregateRow(
                scheme=rec[0],
                k=_parse(int, rec[1], i, "k"),
                mean_sum_rate=_parse(float, rec[2], i, "mean_sum_rate"),
                std_err=_parse(float, rec[3], i, "std_err"),
                p05=_parse(float, rec[4], i, "p05"),
                p95=_parse(float, rec[5], i, "p95"),
                n=_parse(int, rec[6], i, "n"),
            ))
    if len(aggs) == 0:
        raise CSVFormatError("line 2: no data rows")
    return tuple(aggs)
