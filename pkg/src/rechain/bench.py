"""Benchmark harness: static phase sweeps and dynamic per-change measurements.

A static run generates a series of demand phases from synthetic traffic and
reconfigures through them, producing one record per reconfiguration with the
rewiring ratio NumRearr / (NumConn(t) + NumConn(t+1)).  A dynamic run streams
atomic demand changes and reports mean wall time and rearrangements per
change.  All connection and rearrangement totals use the full symmetric-matrix
sums, so a single physical connection counts twice in both the numerator and
the denominator of every ratio.

Runs are deterministic for a fixed (config, seed) apart from wall-clock
columns.  Timing wraps the scheduler calls only, never demand generation.
"""

from __future__ import annotations

import csv
import itertools
import json
import os
import time
from dataclasses import dataclass, field, fields

from .model import (
    NetworkShape,
    capacities_from_weights,
    satisfies_demand,
    validate_scheme,
)
from .scheduler import (
    ScheduleFailure,
    apply_demand_change,
    random_scheme_for_demand,
    reconfigure_static,
)
from .search import SearchConfig
from .state import SchedulerState
from .traffic import (
    DYNAMIC_WINDOW_S,
    STATIC_STEP_S,
    STATIC_WINDOW_S,
    TraceParams,
    aggregate_traffic,
    demand_changes_dynamic,
    demand_from_traffic_static,
    synthetic_trace,
)

STATIC_CSV_COLUMNS = [
    "t",
    "num_conn_t",
    "num_conn_t1",
    "num_rearr",
    "rr",
    "wall_ns",
    "max_chain_len",
    "mean_chain_len",
]

DYNAMIC_CSV_COLUMNS = [
    "load",
    "ops",
    "adds",
    "removes",
    "failures",
    "rearr_per_op",
    "ns_per_op",
]


@dataclass
class BenchConfig:
    """Scenario description shared by the static and dynamic benches."""

    m: int = 32
    n: int = 32
    c: int = 8  # uniform per-link capacity; ignored when weights are given
    wT: list[int] | None = None
    wL: list[int] | None = None
    loads: list[float] = field(default_factory=lambda: [0.2, 0.4, 0.6, 0.8, 1.0])
    mode: str = "continuous"  # or "discontinuous"
    variant: str = "plain"  # or "refined"
    num_chains: int = 8  # used by the refined variant
    model: str = "shifting-permutation"
    # steady hot flows plus flickering background keep demand churning at the
    # weight ladder's edge, the regime dynamic scheduling is built for
    dynamic_model: str = "hotspot"
    hot_pairs: int | None = None  # default: one hot pair per rack
    hot_fraction: float = 0.85
    seed: int = 1
    phases: int = 6
    window_s: int = STATIC_WINDOW_S
    step_s: int = STATIC_STEP_S
    dynamic_window_s: int = DYNAMIC_WINDOW_S
    rate: int | None = None  # trace events per second; default scales with m
    volume_sigma: float = 0.0  # volume burstiness of the dynamic workload
    max_comp: int | None = None  # None = search default
    max_depth: int | None = None
    warmup_ops: int | None = None  # dynamic: changes applied before measuring
    measure_ops: int = 20000

    def __post_init__(self) -> None:
        if self.mode not in ("continuous", "discontinuous"):
            raise ValueError(f"unknown task mode {self.mode!r}")
        if self.variant not in ("plain", "refined"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if not self.loads or any(not 0.0 < l <= 1.0 for l in self.loads):
            raise ValueError("loads must lie in (0, 1]")
        if self.phases < 2:
            raise ValueError("static runs need at least two demand phases")
        if self.num_chains < 1:
            raise ValueError("num_chains must be >= 1")

    @classmethod
    def from_json(cls, obj: dict) -> "BenchConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**obj)

    def shape(self) -> NetworkShape:
        if self.wT is not None and self.wL is not None:
            return NetworkShape(
                m=len(self.wL), n=len(self.wT), capacity=capacities_from_weights(self.wT, self.wL)
            )
        return NetworkShape(m=self.m, n=self.n, capacity=[[self.c] * self.m for _ in range(self.n)])

    def search_config(self) -> SearchConfig:
        kwargs = {"num_chains": self.num_chains if self.variant == "refined" else 1}
        if self.max_comp is not None:
            kwargs["max_comp"] = self.max_comp
        if self.max_depth is not None:
            kwargs["max_depth"] = self.max_depth
        return SearchConfig(**kwargs)

    def event_rate(self) -> int:
        return self.rate if self.rate is not None else max(self.m // 4, 4)


@dataclass
class PhaseRecord:
    """One reconfiguration between consecutive demand phases."""

    load: float
    t: int
    num_conn_t: int
    num_conn_t1: int
    num_rearr: int
    rr: float
    wall_ns: int
    chain_hist: dict[int, int]
    residual_pairs: int = 0

    @property
    def max_chain_len(self) -> int:
        return max(self.chain_hist, default=0)

    @property
    def mean_chain_len(self) -> float:
        total = sum(self.chain_hist.values())
        if total == 0:
            return 0.0
        return sum(l * c for l, c in self.chain_hist.items()) / total

    def csv_row(self) -> list:
        return [
            self.t,
            self.num_conn_t,
            self.num_conn_t1,
            self.num_rearr,
            f"{self.rr:.6f}",
            self.wall_ns,
            self.max_chain_len,
            f"{self.mean_chain_len:.4f}",
        ]

    def to_json(self) -> dict:
        return {
            "load": self.load,
            "t": self.t,
            "num_conn_t": self.num_conn_t,
            "num_conn_t1": self.num_conn_t1,
            "num_rearr": self.num_rearr,
            "rr": self.rr,
            "wall_ns": self.wall_ns,
            "max_chain_len": self.max_chain_len,
            "mean_chain_len": self.mean_chain_len,
            "chain_hist": {str(k): v for k, v in sorted(self.chain_hist.items())},
            "residual_pairs": self.residual_pairs,
        }


def _chain_histogram(result) -> dict[int, int]:
    hist: dict[int, int] = {}
    for length in result.chain_lengths():
        hist[length] = hist.get(length, 0) + 1
    return hist


@dataclass
class StaticCellResult:
    """One (config, load) cell: its reconfiguration records plus the chain
    lengths of the initial build from the empty scheme (continuous mode)."""

    load: float
    records: list[PhaseRecord]
    initial_chain_hist: dict[int, int] = field(default_factory=dict)

    def full_chain_hist(self) -> dict[int, int]:
        """Chain lengths over every scheduling of the run, initial build included."""
        hist = dict(self.initial_chain_hist)
        for rec in self.records:
            for length, count in rec.chain_hist.items():
                hist[length] = hist.get(length, 0) + count
        return hist


def generate_phase_demands(config: BenchConfig, load: float, cell_seed: int) -> list:
    """Demand matrices for every phase, aggregated from one synthetic trace."""
    shape = config.shape()
    duration = (config.phases - 1) * config.step_s + config.window_s
    params = TraceParams(
        racks=shape.m,
        duration_s=duration,
        rate=config.event_rate(),
        shift_period_s=config.step_s,
    )
    events = list(synthetic_trace(config.model, params, seed=cell_seed))
    demands = []
    for t in range(config.phases):
        t0 = t * config.step_s
        traffic = aggregate_traffic(events, shape.m, t0, t0 + config.window_s)
        demands.append(demand_from_traffic_static(traffic, shape, load))
    return demands


def run_static_cell(config: BenchConfig, load: float) -> StaticCellResult:
    """All reconfigurations of one (config, load) cell, in phase order.

    The reconfiguration between demand phases t and t+1 is record t; the
    initial build from the empty scheme is not a record (its rewiring ratio is
    trivially 1) but its chain lengths are kept for run-level histograms.
    """
    shape = config.shape()
    cell_seed = config.seed * 100003 + int(round(load * 1000))
    demands = generate_phase_demands(config, load, cell_seed)
    search_cfg = config.search_config()
    records: list[PhaseRecord] = []
    init_hist: dict[int, int] = {}

    if config.mode == "continuous":
        state = SchedulerState(shape, seed=cell_seed)
        init_hist = _chain_histogram(reconfigure_static(state, demands[0], search_cfg))
        for t in range(config.phases - 1):
            t0 = time.perf_counter_ns()
            result = reconfigure_static(state, demands[t + 1], search_cfg)
            wall = time.perf_counter_ns() - t0
            records.append(_phase_record(load, t, result, wall, shape, demands[t + 1]))
    else:
        for t in range(config.phases - 1):
            scheme = random_scheme_for_demand(shape, demands[t], seed=cell_seed + t)
            state = SchedulerState(shape, demand=demands[t], scheme=scheme, seed=cell_seed + t)
            t0 = time.perf_counter_ns()
            result = reconfigure_static(state, demands[t + 1], search_cfg)
            wall = time.perf_counter_ns() - t0
            records.append(_phase_record(load, t, result, wall, shape, demands[t + 1]))
    return StaticCellResult(load=load, records=records, initial_chain_hist=init_hist)


def _phase_record(load: float, t: int, result, wall: int, shape: NetworkShape, demand) -> PhaseRecord:
    if validate_scheme(shape, result.new_scheme):
        raise RuntimeError("bench produced an invalid scheme")
    if result.complete and not satisfies_demand(result.new_scheme, demand):
        raise RuntimeError("bench scheme does not satisfy its demand")
    return PhaseRecord(
        load=load,
        t=t,
        num_conn_t=result.num_conn_before,
        num_conn_t1=result.num_conn_after,
        num_rearr=result.num_rearr,
        rr=result.rewiring_ratio,
        wall_ns=wall,
        chain_hist=_chain_histogram(result),
        residual_pairs=len(result.residuals),
    )


def run_static_bench(config: BenchConfig, out_dir: str | None = None, fmt: str = "csv",
                     figures: bool = True) -> list[PhaseRecord]:
    """Run every load cell and optionally write CSV/JSON plus figures."""
    cells = []
    all_records: list[PhaseRecord] = []
    for load in config.loads:
        cell = run_static_cell(config, load)
        all_records.extend(cell.records)
        cells.append(
            {
                "load": load,
                "records": [r.to_json() for r in cell.records],
                "chain_hist": {str(k): v for k, v in sorted(cell.full_chain_hist().items())},
                "initial_chain_hist": {
                    str(k): v for k, v in sorted(cell.initial_chain_hist.items())
                },
            }
        )
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        if fmt in ("csv", "both"):
            for load, recs in _group_by_load(all_records):
                path = os.path.join(out_dir, f"static_bench_l{load:.2f}.csv")
                with open(path, "w", newline="") as fh:
                    writer = csv.writer(fh)
                    writer.writerow(STATIC_CSV_COLUMNS)
                    for rec in recs:
                        writer.writerow(rec.csv_row())
        if fmt in ("json", "both"):
            _write_json(os.path.join(out_dir, "static_bench.json"), config, {"cells": cells})
        if figures:
            from .figures import render_static_figures

            render_static_figures(cells, os.path.join(out_dir, "static_bench"))
    return all_records


def _group_by_load(records: list[PhaseRecord]):
    by_load: dict[float, list[PhaseRecord]] = {}
    for rec in records:
        by_load.setdefault(rec.load, []).append(rec)
    return sorted(by_load.items())


@dataclass
class DynamicSummary:
    """Aggregate per-change costs of one dynamic cell."""

    load: float
    ops: int
    adds: int
    removes: int
    failures: int
    total_mods: int
    total_wall_ns: int
    warmup_ops: int

    @property
    def rearr_per_op(self) -> float:
        # symmetric double count: one physical modification contributes 2
        return 2 * self.total_mods / self.ops if self.ops else 0.0

    @property
    def ns_per_op(self) -> float:
        return self.total_wall_ns / self.ops if self.ops else 0.0

    def csv_row(self) -> list:
        return [
            f"{self.load:.2f}",
            self.ops,
            self.adds,
            self.removes,
            self.failures,
            f"{self.rearr_per_op:.6f}",
            f"{self.ns_per_op:.1f}",
        ]

    def to_json(self) -> dict:
        return {
            "load": self.load,
            "ops": self.ops,
            "adds": self.adds,
            "removes": self.removes,
            "failures": self.failures,
            "rearr_per_op": self.rearr_per_op,
            "ns_per_op": self.ns_per_op,
            "warmup_ops": self.warmup_ops,
        }


def run_dynamic_cell(config: BenchConfig, load: float) -> DynamicSummary:
    """Stream demand changes at one load and measure the scheduler per change.

    The demand is warm-started from one full traffic window at the target load
    before the stream begins, so measurements reflect the steady churn rather
    than the initial build-out; a further ``warmup_ops`` changes are applied
    untimed to let the churn settle.
    """
    shape = config.shape()
    cell_seed = config.seed * 100003 + int(round(load * 1000))
    state = SchedulerState(shape, seed=cell_seed)
    search_cfg = config.search_config()
    window_s = config.dynamic_window_s
    warmup = config.warmup_ops if config.warmup_ops is not None else 12000

    params = TraceParams(
        racks=shape.m,
        duration_s=10**9,  # effectively endless; consumption is op-bounded
        rate=config.event_rate(),
        volume_sigma=config.volume_sigma,
        hot_pairs=config.hot_pairs if config.hot_pairs is not None else shape.m,
        hot_fraction=config.hot_fraction,
        shift_period_s=max(window_s // 4, 1),
    )
    events = synthetic_trace(config.dynamic_model, params, seed=cell_seed)

    warm_events = []
    for ev in events:
        warm_events.append(ev)
        if ev.t >= window_s:
            break
    traffic = aggregate_traffic(warm_events, shape.m, 0, window_s)
    reconfigure_static(state, demand_from_traffic_static(traffic, shape, load), search_cfg)

    changes = demand_changes_dynamic(
        itertools.chain(warm_events, events),
        window_s,
        state,
        max_load=load,
        warmup_seconds=window_s,
    )

    ops = adds = removes = failures = total_mods = 0
    wall = 0
    for idx, change in enumerate(changes):
        if idx < warmup:
            try:
                apply_demand_change(state, change, search_cfg)
            except ScheduleFailure:
                pass
            continue
        t0 = time.perf_counter_ns()
        try:
            mods = apply_demand_change(state, change, search_cfg)
        except ScheduleFailure:
            failures += 1
            mods = []
        wall += time.perf_counter_ns() - t0
        ops += 1
        total_mods += len(mods)
        if change.kind == "add":
            adds += 1
        else:
            removes += 1
        if ops >= config.measure_ops:
            break
    return DynamicSummary(
        load=load,
        ops=ops,
        adds=adds,
        removes=removes,
        failures=failures,
        total_mods=total_mods,
        total_wall_ns=wall,
        warmup_ops=warmup,
    )


def run_dynamic_bench(config: BenchConfig, out_dir: str | None = None, fmt: str = "csv",
                      figures: bool = True) -> list[DynamicSummary]:
    summaries = [run_dynamic_cell(config, load) for load in config.loads]
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        if fmt in ("csv", "both"):
            path = os.path.join(out_dir, "dynamic_bench.csv")
            with open(path, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(DYNAMIC_CSV_COLUMNS)
                for s in summaries:
                    writer.writerow(s.csv_row())
        if fmt in ("json", "both"):
            _write_json(
                os.path.join(out_dir, "dynamic_bench.json"),
                config,
                {"summaries": [s.to_json() for s in summaries]},
            )
        if figures:
            from .figures import render_dynamic_figures

            render_dynamic_figures(
                [s.to_json() for s in summaries], os.path.join(out_dir, "dynamic_bench")
            )
    return summaries


def _write_json(path: str, config: BenchConfig, payload: dict) -> None:
    body = {
        "config": {f.name: getattr(config, f.name) for f in fields(BenchConfig)},
        "counting": "connection and rearrangement totals sum the full symmetric "
                    "matrices; one physical connection counts twice",
    }
    body.update(payload)
    with open(path, "w") as fh:
        json.dump(body, fh, indent=2, sort_keys=True)
        fh.write("\n")
