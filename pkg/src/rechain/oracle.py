"""Exhaustive verification oracles for tiny instances.

These deliberately avoid the incremental state and the production search: all
usage, redundancy and availability facts are recomputed from raw matrices on
every step, so the oracles can certify the fast path rather than mirror its
bookkeeping.  Hard caps keep the enumeration at desk scale.

``oracle_min_chain_length`` enumerates every chain the production search could
legally build -- same level structure, same availability rules, all branch
choices explored -- and returns the minimal length.  ``oracle_min_rearrangements``
enumerates all schemes satisfying a new demand and returns the minimal
rearrangement count, serving as the optimality yardstick for whole-phase
reconfiguration.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .model import ClosError, Matrix, NetworkShape, Tensor, copy_scheme


class OracleLimitExceeded(ClosError):
    """The instance (or its search space) is beyond the oracle's hard caps."""


@dataclass(frozen=True)
class OracleLimits:
    max_m: int = 4
    max_n: int = 2
    max_capacity: int = 2
    max_states: int = 5_000_000

    def check_instance(self, shape: NetworkShape) -> None:
        if shape.m > self.max_m or shape.n > self.max_n:
            raise OracleLimitExceeded(
                f"instance {shape.m}x{shape.n} exceeds caps {self.max_m}x{self.max_n}"
            )
        if any(c > self.max_capacity for row in shape.capacity for c in row):
            raise OracleLimitExceeded(f"capacity above cap {self.max_capacity}")


def _link_used(X: Tensor, i: int, j: int) -> int:
    return sum(X[i][j])


def _pair_count(X: Tensor, j: int, k: int) -> int:
    return sum(sl[j][k] for sl in X)


def _redundant(X: Tensor, D: Matrix, j: int, k: int) -> bool:
    return _pair_count(X, j, k) > D[j][k]


class _ChainOracle:
    def __init__(self, shape: NetworkShape, D: Matrix, X: Tensor, limits: OracleLimits,
                 j0: int, k0: int):
        self.C = shape.capacity
        self.n = shape.n
        self.m = shape.m
        self.D = D
        self.X = copy_scheme(X)
        self.limits = limits
        self.states = 0
        self.failed: set[tuple] = set()
        # the target pair always nets +1, so its connections are never harvested
        self.root_partner = {j0: k0, k0: j0}

    def _harvest_options(self, i: int, j: int, exclude: int | None) -> list[int | None] | None:
        """How link (i, j) can host one more connection, before placing it.

        Returns [None] when the link has a spare slot, a list of removable
        redundant partners when it is full but freeable, or None when unavailable.
        """
        if _link_used(self.X, i, j) < self.C[i][j]:
            return [None]
        banned = (exclude, self.root_partner.get(j))
        options = [
            k
            for k in range(self.m)
            if k not in banned and self.X[i][j][k] > 0 and _redundant(self.X, self.D, j, k)
        ]
        return options or None

    def _leaf_placeable(self, j: int, k: int) -> bool:
        """Can (j, k) be placed directly through some top switch, harvests allowed?"""
        for i in range(self.n):
            if (
                self._harvest_options(i, j, exclude=None) is not None
                and self._harvest_options(i, k, exclude=None) is not None
            ):
                return True
        return False

    def _key(self, j: int, k: int, depth: int) -> tuple:
        flat = tuple(tuple(tuple(row) for row in sl) for sl in self.X)
        return (min(j, k), max(j, k), depth, flat)

    def exists(self, j: int, k: int, depth: int) -> bool:
        self.states += 1
        if self.states > self.limits.max_states:
            raise OracleLimitExceeded("state cap hit during chain enumeration")
        if depth == 0:
            return self._leaf_placeable(j, k)
        key = self._key(j, k, depth)
        if key in self.failed:
            return False
        X = self.X
        for i in range(self.n):
            for a, b in ((j, k), (k, j)):
                options = self._harvest_options(i, a, exclude=b)
                if options is None:
                    continue
                for h in options:
                    if h is not None:
                        X[i][a][h] -= 1
                        X[i][h][a] -= 1
                    for l in range(self.m):
                        if l == a or X[i][b][l] <= 0:
                            continue
                        X[i][b][l] -= 1
                        X[i][l][b] -= 1
                        X[i][j][k] += 1
                        X[i][k][j] += 1
                        ok = self.exists(b, l, depth - 1)
                        X[i][j][k] -= 1
                        X[i][k][j] -= 1
                        X[i][b][l] += 1
                        X[i][l][b] += 1
                        if ok:
                            if h is not None:
                                X[i][a][h] += 1
                                X[i][h][a] += 1
                            return True
                    if h is not None:
                        X[i][a][h] += 1
                        X[i][h][a] += 1
        self.failed.add(key)
        return False


def oracle_min_chain_length(
    shape: NetworkShape,
    demand: Matrix,
    scheme: Tensor,
    j0: int,
    k0: int,
    limits: OracleLimits | None = None,
    max_depth: int | None = None,
) -> int | None:
    """Minimal replacement-chain length placing one (j0, k0) connection, or None.

    Enumerates every legal chain up to the depth ceiling; None means no chain
    of any admissible length exists (in particular when an endpoint has no
    available link at all).
    """
    lim = limits or OracleLimits()
    lim.check_instance(shape)
    if j0 == k0:
        raise ValueError("target pair must join distinct low switches")
    max_cap = max((c for row in shape.capacity for c in row), default=0)
    ceiling = max_depth if max_depth is not None else shape.m * max_cap // 2
    oracle = _ChainOracle(shape, demand, scheme, lim, j0, k0)
    # failure memo keys include remaining depth, so it stays valid across iterations
    for depth in range(ceiling + 1):
        if oracle.exists(j0, k0, depth):
            return depth
    return None


def oracle_min_rearrangements(
    shape: NetworkShape,
    scheme: Tensor,
    new_demand: Matrix,
    limits: OracleLimits | None = None,
) -> int | None:
    """Minimal rearrangement count over all schemes satisfying ``new_demand``.

    Branch-and-bound over per-pair switch assignments; None when no feasible
    scheme exists.  Counts follow the symmetric double-sum convention, so one
    physical add or remove costs 2.
    """
    lim = limits or OracleLimits()
    lim.check_instance(shape)
    m, n, C = shape.m, shape.n, shape.capacity
    pairs = [(j, k) for j in range(m) for k in range(j + 1, m)]

    x_counts = {(j, k): [scheme[i][j][k] for i in range(n)] for j, k in pairs}
    # admissible bound: pairs below demand must gain at least the shortfall
    tail_bound = [0] * (len(pairs) + 1)
    for idx in range(len(pairs) - 1, -1, -1):
        j, k = pairs[idx]
        short = max(0, new_demand[j][k] - sum(x_counts[(j, k)]))
        tail_bound[idx] = tail_bound[idx + 1] + 2 * short

    cap_left = [row[:] for row in C]
    best: list[int | None] = [None]
    states = [0]

    def descend(idx: int, cost: int) -> None:
        states[0] += 1
        if states[0] > lim.max_states:
            raise OracleLimitExceeded("state cap hit during scheme enumeration")
        if best[0] is not None and cost + tail_bound[idx] >= best[0]:
            return
        if idx == len(pairs):
            best[0] = cost
            return
        j, k = pairs[idx]
        xs = x_counts[(j, k)]
        ranges = [range(min(cap_left[i][j], cap_left[i][k]) + 1) for i in range(n)]
        options = []
        for ys in itertools.product(*ranges):
            if sum(ys) < new_demand[j][k]:
                continue
            delta = 2 * sum(abs(y - x) for y, x in zip(ys, xs))
            options.append((delta, ys))
        options.sort(key=lambda t: t[0])
        for delta, ys in options:
            if best[0] is not None and cost + delta + tail_bound[idx + 1] >= best[0]:
                break
            for i in range(n):
                cap_left[i][j] -= ys[i]
                cap_left[i][k] -= ys[i]
            descend(idx + 1, cost + delta)
            for i in range(n):
                cap_left[i][j] += ys[i]
                cap_left[i][k] += ys[i]

    descend(0, 0)
    return best[0]
