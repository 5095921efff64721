"""Demand generation from traffic: static prioritized matrices and dynamic change streams.

Connections are prioritized by a weight ladder: the r-th connection between a
pair carries weight (max of the two directed traffic volumes + 1) / r, so
heavier pairs earn more connections and every extra connection of a pair is
worth strictly less than the previous one.  The static generator adds the
highest-weight candidate while the demand stays feasible and under the target
load; the dynamic generator reacts to each traffic arrival, evicting strictly
lower-weight demand when it blocks a heavier addition.

Synthetic trace models and a CSV reader stand in for recorded datacenter
traces.
"""

from __future__ import annotations

import csv
import heapq
import logging
import random
from collections import deque
from dataclasses import dataclass

from .model import ClosError, Matrix, NetworkShape, zero_matrix
from .scheduler import DemandChange
from .state import SchedulerState

log = logging.getLogger(__name__)

TRACE_MODELS = ("uniform", "gravity", "hotspot", "shifting-permutation")

# aggregation defaults, in seconds
STATIC_WINDOW_S = 3600
STATIC_STEP_S = 600
DYNAMIC_WINDOW_S = 600


class TraceFormatError(ClosError):
    """A trace file row that cannot be parsed or violates ordering rules."""


@dataclass(frozen=True)
class TraceEvent:
    """One recorded transfer: ``volume`` bytes from rack ``src`` to rack ``dst``."""

    t: float
    src: int
    dst: int
    volume: float


@dataclass
class TraceParams:
    racks: int
    duration_s: int
    rate: int = 8  # events per second
    mean_volume: float = 1000.0
    volume_sigma: float = 0.0  # lognormal spread; > 0 gives bursty volumes
    hot_pairs: int = 1
    hot_fraction: float = 0.5
    shift_period_s: int = 600

    def __post_init__(self) -> None:
        if self.racks < 2:
            raise ValueError("need at least two racks")
        if self.duration_s <= 0 or self.rate <= 0:
            raise ValueError("duration and rate must be positive")

    def draw_volume(self, rng: random.Random) -> float:
        if self.volume_sigma <= 0:
            return self.mean_volume
        return self.mean_volume * rng.lognormvariate(0.0, self.volume_sigma)


def pair_weight(traffic: Matrix, j: int, k: int, rank: int) -> float:
    """Weight of the rank-th connection between j and k (rank starts at 1)."""
    return (max(traffic[j][k], traffic[k][j]) + 1) / rank


def demand_from_traffic_static(
    traffic: Matrix, shape: NetworkShape, target_load: float
) -> Matrix:
    """Build a demand matrix from aggregated traffic, up to a target load.

    Candidates are taken highest-weight first (ties by pair index then rank);
    a candidate is dropped for good once either endpoint row is at capacity,
    and generation stops when one more connection would push the load past the
    target.  The result may sit below the target when feasibility binds first.
    """
    if not 0.0 < target_load <= 1.0:
        raise ValueError("target load must be in (0, 1]")
    m = shape.m
    if len(traffic) != m:
        raise ValueError("traffic matrix size does not match the network")
    demand = zero_matrix(m, m)
    row_sum = [0] * m
    row_cap = [shape.low_switch_capacity(j) for j in range(m)]
    total_cap = shape.total_capacity()
    budget = target_load * total_cap + 1e-9

    heap: list[tuple[float, int, int, int]] = []
    for j in range(m):
        for k in range(j + 1, m):
            heapq.heappush(heap, (-pair_weight(traffic, j, k, 1), j, k, 1))

    total = 0
    while heap:
        if total + 2 > budget:
            break  # every further candidate costs the same two units
        neg_w, j, k, rank = heapq.heappop(heap)
        if row_sum[j] + 1 > row_cap[j] or row_sum[k] + 1 > row_cap[k]:
            continue  # rows only fill up, so this pair is done
        demand[j][k] += 1
        demand[k][j] += 1
        row_sum[j] += 1
        row_sum[k] += 1
        total += 2
        heapq.heappush(heap, (-pair_weight(traffic, j, k, rank + 1), j, k, rank + 1))
    return demand


class _DemandMirror:
    """The dynamic generator's view of the demand it has emitted so far."""

    def __init__(self, state: SchedulerState, max_load: float | None):
        self.m = state.m
        self.demand = [row[:] for row in state.demand]
        self.row_sum = [sum(row) for row in self.demand]
        self.row_cap = [state.shape.low_switch_capacity(j) for j in range(self.m)]
        self.total = sum(self.row_sum)
        self.budget = (
            max_load * state.shape.total_capacity() + 1e-9 if max_load is not None else None
        )

    def add(self, j: int, k: int) -> None:
        self.demand[j][k] += 1
        self.demand[k][j] += 1
        self.row_sum[j] += 1
        self.row_sum[k] += 1
        self.total += 2

    def remove(self, j: int, k: int) -> None:
        self.demand[j][k] -= 1
        self.demand[k][j] -= 1
        self.row_sum[j] -= 1
        self.row_sum[k] -= 1
        self.total -= 2


def _lowest_weight_pair(
    traffic: Matrix, mirror: _DemandMirror, rows: list[int] | None
) -> tuple[float, int, int] | None:
    """Lowest last-rank weight among demanded pairs, optionally row-restricted."""
    best: tuple[float, int, int] | None = None
    m = mirror.m
    if rows is None:
        scan = ((j, k) for j in range(m) for k in range(j + 1, m))
    else:
        scan = (
            (min(r, other), max(r, other))
            for r in rows
            for other in range(m)
            if other != r
        )
    seen = set()
    for j, k in scan:
        if (j, k) in seen or mirror.demand[j][k] <= 0:
            continue
        seen.add((j, k))
        w = pair_weight(traffic, j, k, mirror.demand[j][k])
        cand = (w, j, k)
        if best is None or cand < best:
            best = cand
    return best


def _plan_addition(
    traffic: Matrix, mirror: _DemandMirror, j: int, k: int, weight: float
) -> list[tuple[int, int]] | None:
    """Evictions (possibly none) that make one more (j, k) connection fit.

    Victims are taken lowest-weight first from whichever constraint binds,
    and only when strictly lighter than the incoming connection; returns None
    when the addition cannot be justified.
    """
    victims: list[tuple[int, int]] = []
    removed: list[tuple[int, int]] = []

    def binding_rows() -> list[int] | None:
        over = [r for r in (j, k) if mirror.row_sum[r] + 1 > mirror.row_cap[r]]
        if over:
            return over
        if mirror.budget is not None and mirror.total + 2 > mirror.budget:
            return None  # global budget binds; any victim helps
        return []

    while True:
        rows = binding_rows()
        if rows == []:
            for vj, vk in removed:  # leave the mirror untouched on success
                mirror.add(vj, vk)
            return victims
        pick = _lowest_weight_pair(traffic, mirror, rows)
        if pick is None or pick[0] >= weight:
            for vj, vk in removed:
                mirror.add(vj, vk)
            return None
        _, vj, vk = pick
        mirror.remove(vj, vk)
        removed.append((vj, vk))
        victims.append((vj, vk))


def demand_changes_dynamic(
    events,
    window_seconds: float,
    state: SchedulerState,
    max_load: float | None = None,
    warmup_seconds: float = 0.0,
    stats: dict | None = None,
):
    """Turn a traffic event stream into a stream of atomic demand changes.

    Traffic volumes are aggregated over a sliding window.  On each arrival for
    a pair, connections are added to the demand while each next one can be
    justified, preceded by removals of strictly lower-weight demand where the
    addition would otherwise be infeasible (row capacity) or exceed the load
    budget.  Every emitted prefix keeps the demand feasible.  Malformed events
    are skipped and counted in ``stats["skipped"]``.

    Events within ``warmup_seconds`` of the first timestamp only populate the
    traffic window; without this (or a pre-seeded demand in ``state``) the
    first arrivals see an empty weight ladder and hoard unjustified ranks.
    """
    if window_seconds <= 0:
        raise ValueError("window must be positive")
    m = state.m
    traffic = zero_matrix(m, m)
    window: deque[TraceEvent] = deque()
    mirror = _DemandMirror(state, max_load)
    if stats is not None:
        stats.setdefault("skipped", 0)
    last_t = float("-inf")
    emit_from: float | None = None

    for ev in events:
        if (
            not (0 <= ev.src < m)
            or not (0 <= ev.dst < m)
            or ev.src == ev.dst
            or ev.volume < 0
            or ev.t < last_t
        ):
            if stats is not None:
                stats["skipped"] += 1
            log.warning("skipping malformed trace event %r", ev)
            continue
        last_t = ev.t
        if emit_from is None:
            emit_from = ev.t + warmup_seconds
        while window and window[0].t <= ev.t - window_seconds:
            old = window.popleft()
            traffic[old.src][old.dst] -= old.volume
        window.append(ev)
        traffic[ev.src][ev.dst] += ev.volume
        if ev.t < emit_from:
            continue

        j, k = min(ev.src, ev.dst), max(ev.src, ev.dst)
        while True:
            weight = pair_weight(traffic, j, k, mirror.demand[j][k] + 1)
            plan = _plan_addition(traffic, mirror, j, k, weight)
            if plan is None:
                break
            for vj, vk in plan:
                mirror.remove(vj, vk)
                yield DemandChange("remove", vj, vk)
            mirror.add(j, k)
            yield DemandChange("add", j, k)


# ---------------------------------------------------------------------------
# Synthetic traces and CSV ingestion
# ---------------------------------------------------------------------------

def synthetic_trace(model: str, params: TraceParams, seed: int | None = 0):
    """Deterministic synthetic event stream for the given model and seed."""
    if model not in TRACE_MODELS:
        raise ValueError(f"unknown trace model {model!r}; choose from {TRACE_MODELS}")
    rng = random.Random(seed)
    racks = params.racks
    if model == "uniform":
        pairs = [(a, b) for a in range(racks) for b in range(racks) if a != b]
        idx = 0
        for s in range(params.duration_s):
            for _ in range(params.rate):
                src, dst = pairs[idx % len(pairs)]
                idx += 1
                yield TraceEvent(float(s), src, dst, params.mean_volume)
        return

    if model == "gravity":
        weights = [rng.lognormvariate(0.0, 0.75) for _ in range(racks)]
        choices = [(a, b) for a in range(racks) for b in range(racks) if a != b]
        cum = []
        acc = 0.0
        for a, b in choices:
            acc += weights[a] * weights[b]
            cum.append(acc)
        for s in range(params.duration_s):
            for _ in range(params.rate):
                x = rng.random() * acc
                lo, hi = 0, len(cum) - 1
                while lo < hi:
                    mid = (lo + hi) // 2
                    if cum[mid] < x:
                        lo = mid + 1
                    else:
                        hi = mid
                src, dst = choices[lo]
                yield TraceEvent(float(s), src, dst, params.draw_volume(rng))
        return

    if model == "hotspot":
        # steady hot flows on a fixed rotation, noisy uniform background
        all_pairs = [(a, b) for a in range(racks) for b in range(racks) if a != b]
        hot = rng.sample(all_pairs, min(params.hot_pairs, len(all_pairs)))
        hot_per_s = round(params.rate * params.hot_fraction)
        hot_idx = 0
        for s in range(params.duration_s):
            for e in range(params.rate):
                if e < hot_per_s:
                    src, dst = hot[hot_idx % len(hot)]
                    hot_idx += 1
                else:
                    src, dst = all_pairs[rng.randrange(len(all_pairs))]
                yield TraceEvent(float(s), src, dst, params.draw_volume(rng))
        return

    # shifting-permutation: every rack talks to its image; the map re-rolls
    # each shift period, so demand churns on a fixed timescale
    perm = _derangement(rng, racks)
    for s in range(params.duration_s):
        if s > 0 and s % params.shift_period_s == 0:
            perm = _derangement(rng, racks)
        for e in range(params.rate):
            src = (s * params.rate + e) % racks
            yield TraceEvent(float(s), src, perm[src], params.mean_volume)


def _derangement(rng: random.Random, n: int) -> list[int]:
    perm = list(range(n))
    while True:
        rng.shuffle(perm)
        if all(perm[i] != i for i in range(n)):
            return perm


def aggregate_traffic(events, racks: int, t_start: float, t_end: float) -> Matrix:
    """Sum event volumes with t_start <= t < t_end into a traffic matrix."""
    traffic = zero_matrix(racks, racks)
    for ev in events:
        if t_start <= ev.t < t_end:
            traffic[ev.src][ev.dst] += ev.volume
    return traffic


def write_trace_csv(events, path: str) -> int:
    """Write events as ``t,src,dst,volume`` rows; returns the row count."""
    count = 0
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "src", "dst", "volume"])
        for ev in events:
            writer.writerow([f"{ev.t:g}", ev.src, ev.dst, f"{ev.volume:g}"])
            count += 1
    return count


def load_trace_csv(path: str):
    """Parse a ``t,src,dst,volume`` CSV into events, enforcing ordering rules."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        last_t = float("-inf")
        for ln, row in enumerate(reader, start=1):
            if not row or (ln == 1 and row[0].strip().lower() == "t"):
                continue
            if len(row) != 4:
                raise TraceFormatError(f"line {ln}: expected 4 fields, got {len(row)}")
            try:
                t = float(row[0])
                src = int(row[1])
                dst = int(row[2])
                volume = float(row[3])
            except ValueError as exc:
                raise TraceFormatError(f"line {ln}: {exc}") from exc
            if src == dst:
                raise TraceFormatError(f"line {ln}: src and dst must differ")
            if volume < 0:
                raise TraceFormatError(f"line {ln}: negative volume")
            if t < last_t:
                raise TraceFormatError(f"line {ln}: timestamps must be non-decreasing")
            last_t = t
            yield TraceEvent(t, src, dst, volume)
