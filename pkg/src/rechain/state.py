"""Incrementally maintained scheduler state with bit-vector availability indices.

The state tracks, alongside the scheme itself:

* ``count_lt[j][i]``  -- connections occupying link (T_i, L_j);
* ``bitset_lt[j]``    -- bit i set iff link (T_i, L_j) has spare capacity
                         (explicitly available);
* ``count_ll[j][k]``  -- established connections between L_j and L_k
                         (the live edge-count matrix);
* ``bitset_ll[j]``    -- bit k set iff the (j, k) connections exceed demand
                         (redundant);
* ``bitset_llt[j][k]`` -- bit i set iff some (j, k) connection passes through T_i.

Bit vectors are Python integers treated as machine-word arrays: OR/AND work
word-wise and set bits are iterated lowest-first.  All mutating operations
update every index in place at constant amortized cost; ``rebuild_from_scratch``
recomputes the whole state definitionally and serves as the consistency oracle.

A single writer must own the state during mutation; read-only queries may run
concurrently only while no writer is active.
"""

from __future__ import annotations

import random

from .model import (
    CapacityOverflow,
    ConnectionMissing,
    DimensionMismatch,
    Matrix,
    NetworkShape,
    Tensor,
    check_demand_matrix,
    copy_matrix,
    copy_scheme,
    demand_from_json,
    demand_to_json,
    make_demand,
    make_scheme,
    scheme_from_json,
    scheme_to_json,
    shape_from_json,
    shape_to_json,
    validate_scheme,
)


def iter_bits(bits: int):
    """Yield the indices of set bits, lowest first."""
    while bits:
        low = bits & -bits
        yield low.bit_length() - 1
        bits ^= low


class SchedulerState:
    """Mutable scheduling state for one network: scheme, demand and indices."""

    def __init__(
        self,
        shape: NetworkShape,
        demand: Matrix | None = None,
        scheme: Tensor | None = None,
        seed: int | None = 0,
    ) -> None:
        self.shape = shape
        self.m = shape.m
        self.n = shape.n
        self.capacity = shape.capacity
        self.demand: Matrix = copy_matrix(demand) if demand is not None else make_demand(shape.m)
        check_demand_matrix(self.demand)
        if len(self.demand) != shape.m:
            raise DimensionMismatch("demand and shape disagree on m")
        self.scheme: Tensor = copy_scheme(scheme) if scheme is not None else make_scheme(shape.n, shape.m)
        bad = validate_scheme(shape, self.scheme)
        if bad:
            raise ValueError(f"scheme is invalid: {bad[0]}")
        self.rng = random.Random(seed)
        self.or_pass_count = 0  # word-wise OR passes done by selectable_top_switches
        self._index_from_scratch()

    # -- construction ------------------------------------------------------

    def _index_from_scratch(self) -> None:
        m, n = self.m, self.n
        cap = self.capacity
        X = self.scheme
        self.count_lt = [[0] * n for _ in range(m)]
        self.count_ll = [[0] * m for _ in range(m)]
        self.bitset_lt = [0] * m
        self.bitset_ll = [0] * m
        self.bitset_llt = [[0] * m for _ in range(m)]
        for j in range(m):
            for i in range(n):
                used = sum(X[i][j])
                self.count_lt[j][i] = used
                if used < cap[i][j]:
                    self.bitset_lt[j] |= 1 << i
        for j in range(m):
            for k in range(m):
                if j == k:
                    continue
                total = 0
                mask = 0
                for i in range(n):
                    c = X[i][j][k]
                    if c:
                        total += c
                        mask |= 1 << i
                self.count_ll[j][k] = total
                self.bitset_llt[j][k] = mask
                if total > self.demand[j][k]:
                    self.bitset_ll[j] |= 1 << k

    def clone(self) -> "SchedulerState":
        """Independent copy (fresh RNG stream seeded from this one)."""
        return SchedulerState(
            self.shape, self.demand, self.scheme, seed=self.rng.randrange(2**63)
        )

    # -- mutating operations -----------------------------------------------

    def add_connection(self, i: int, j: int, k: int) -> None:
        """Establish one (i, j, k) connection; both links must have spare capacity."""
        if j == k:
            raise ValueError("cannot connect a low switch to itself")
        if self.count_lt[j][i] >= self.capacity[i][j] or self.count_lt[k][i] >= self.capacity[i][k]:
            raise CapacityOverflow(f"no free slot for connection ({i},{j},{k})")
        self._add(i, j, k)

    def remove_connection(self, i: int, j: int, k: int) -> None:
        """Tear down one (i, j, k) connection; it must be established."""
        if self.scheme[i][j][k] <= 0:
            raise ConnectionMissing(f"connection ({i},{j},{k}) is not established")
        self._remove(i, j, k)

    def _add(self, i: int, j: int, k: int) -> None:
        # Unchecked update used by the chain search, whose tentative adds may
        # transiently exceed a link capacity before the balancing removals.
        # The index update rules stay exact in that regime.
        clt = self.count_lt
        clt[j][i] += 1
        if clt[j][i] == self.capacity[i][j]:
            self.bitset_lt[j] &= ~(1 << i)
        clt[k][i] += 1
        if clt[k][i] == self.capacity[i][k]:
            self.bitset_lt[k] &= ~(1 << i)
        if self.count_ll[j][k] == self.demand[j][k]:
            self.bitset_ll[j] |= 1 << k
            self.bitset_ll[k] |= 1 << j
        self.count_ll[j][k] += 1
        self.count_ll[k][j] += 1
        X = self.scheme[i]
        if X[j][k] == 0:
            self.bitset_llt[j][k] |= 1 << i
            self.bitset_llt[k][j] |= 1 << i
        X[j][k] += 1
        X[k][j] += 1

    def _remove(self, i: int, j: int, k: int) -> None:
        clt = self.count_lt
        if clt[j][i] == self.capacity[i][j]:
            self.bitset_lt[j] |= 1 << i
        clt[j][i] -= 1
        if clt[k][i] == self.capacity[i][k]:
            self.bitset_lt[k] |= 1 << i
        clt[k][i] -= 1
        self.count_ll[j][k] -= 1
        self.count_ll[k][j] -= 1
        if self.count_ll[j][k] == self.demand[j][k]:
            self.bitset_ll[j] &= ~(1 << k)
            self.bitset_ll[k] &= ~(1 << j)
        X = self.scheme[i]
        X[j][k] -= 1
        X[k][j] -= 1
        if X[j][k] == 0:
            self.bitset_llt[j][k] &= ~(1 << i)
            self.bitset_llt[k][j] &= ~(1 << i)

    def set_demand(self, j: int, k: int, value: int) -> None:
        """Set the demanded connection count for a pair, refreshing redundancy bits."""
        if j == k:
            raise ValueError("demand diagonal is fixed at zero")
        if value < 0:
            raise ValueError("demand must be non-negative")
        self.demand[j][k] = value
        self.demand[k][j] = value
        if self.count_ll[j][k] > value:
            self.bitset_ll[j] |= 1 << k
            self.bitset_ll[k] |= 1 << j
        else:
            self.bitset_ll[j] &= ~(1 << k)
            self.bitset_ll[k] &= ~(1 << j)

    # -- queries -------------------------------------------------------------

    def selectable_top_switches(self, j: int) -> int:
        """Bit vector of top switches with an available link to L_j.

        A link counts as available when it has spare capacity, or when it is
        fully used but carries a connection of a redundant pair that could be
        removed.  Cost: one OR pass per redundant partner of j, plus one.
        """
        bits = self.bitset_lt[j]
        self.or_pass_count += 1
        llt = self.bitset_llt[j]
        for k in iter_bits(self.bitset_ll[j]):
            bits |= llt[k]
            self.or_pass_count += 1
        return bits

    def find_redundant_connection(self, i: int, j: int, exclude: int | None = None) -> int:
        """Availability of link (T_i, L_j), resolved to a removable connection.

        Returns ``self.m`` when the link has spare capacity, ``-1`` when it is
        fully used and nothing on it is redundant, and otherwise a partner
        index k -- chosen uniformly at random among the redundant pairs routed
        through T_i -- whose (i, j, k) connection can be removed to free a slot.
        ``exclude`` removes one partner from consideration.
        """
        if self.count_lt[j][i] < self.capacity[i][j]:
            return self.m
        bit = 1 << i
        llt = self.bitset_llt[j]
        candidates = [k for k in iter_bits(self.bitset_ll[j]) if llt[k] & bit and k != exclude]
        if not candidates:
            return -1
        if len(candidates) == 1:
            return candidates[0]
        return self.rng.choice(candidates)

    def redundant_partners(self, i: int, j: int, exclude: int | None = None) -> list[int]:
        """All partners k whose redundant (i, j, k) connection could free link (i, j)."""
        bit = 1 << i
        llt = self.bitset_llt[j]
        return [k for k in iter_bits(self.bitset_ll[j]) if llt[k] & bit and k != exclude]

    def link_available(self, i: int, j: int) -> bool:
        return self.count_lt[j][i] < self.capacity[i][j] or bool(self.redundant_partners(i, j))

    def edge_count(self, j: int, k: int) -> int:
        return self.count_ll[j][k]

    # -- comparison / serialization -------------------------------------------

    def state_fields(self) -> tuple:
        return (
            self.scheme,
            self.demand,
            self.count_lt,
            self.count_ll,
            self.bitset_lt,
            self.bitset_ll,
            self.bitset_llt,
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SchedulerState):
            return NotImplemented
        return self.shape == other.shape and self.state_fields() == other.state_fields()

    def snapshot(self) -> dict:
        """JSON-serializable snapshot of (shape, demand, scheme); indices are rebuilt on import."""
        return {
            "shape": shape_to_json(self.shape),
            "demand": demand_to_json(self.demand),
            "scheme": scheme_to_json(self.scheme),
        }

    @classmethod
    def from_snapshot(cls, obj: dict, seed: int | None = 0) -> "SchedulerState":
        return cls(
            shape_from_json(obj["shape"]),
            demand=demand_from_json(obj["demand"]),
            scheme=scheme_from_json(obj["scheme"]),
            seed=seed,
        )


def rebuild_from_scratch(shape: NetworkShape, demand: Matrix, scheme: Tensor) -> SchedulerState:
    """Recompute a full state definitionally from raw inputs (consistency oracle)."""
    return SchedulerState(shape, demand=demand, scheme=scheme)
