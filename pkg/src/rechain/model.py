"""Core value types and pure matrix operations for two-level bidirectional Clos networks.

A network has m low-level switches and n top-level switches; the link between
top switch i and low switch j carries at most C[i][j] unit-rate connections.
A connection (i, j, k) joins low switches j and k through top switch i and
occupies one slot on each of its two links.  A routing scheme X counts
established connections per (top switch, pair); a demand matrix D counts
required connections per pair.  Both are symmetric with zero diagonal.

Connection and rearrangement totals sum over the full symmetric matrices, so
one physical connection contributes 2 to every count reported here.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass
from functools import cached_property

MAX_SWITCHES = 1024  # sanity bound; realistic fabrics are in the hundreds

Matrix = list[list[int]]
Tensor = list[list[list[int]]]


class ClosError(Exception):
    """Base class for errors raised by this package."""


class DimensionMismatch(ClosError):
    """Inputs whose shapes do not agree (structural, not a rule violation)."""


class CapacityOverflow(ClosError):
    """An add would exceed the capacity of a link."""


class ConnectionMissing(ClosError):
    """A remove names a connection that is not established."""


class InfeasibleDemand(ClosError):
    """A demand matrix that no scheme can satisfy on the given shape."""


def zero_matrix(rows: int, cols: int) -> Matrix:
    return [[0] * cols for _ in range(rows)]


@dataclass(frozen=True)
class NetworkShape:
    """Switch counts and per-link capacities of a bidirectional Clos network."""

    m: int
    n: int
    capacity: Matrix  # n x m, capacity[i][j] = slots on link (T_i, L_j)

    def __post_init__(self) -> None:
        if self.m < 2 or self.n < 1:
            raise ValueError(f"need m >= 2 and n >= 1, got m={self.m}, n={self.n}")
        if self.m > MAX_SWITCHES or self.n > MAX_SWITCHES:
            raise ValueError(f"switch counts capped at {MAX_SWITCHES}")
        if len(self.capacity) != self.n or any(len(row) != self.m for row in self.capacity):
            raise DimensionMismatch("capacity matrix must be n x m")
        for row in self.capacity:
            for c in row:
                if c < 0:
                    raise ValueError("capacities must be non-negative")

    def total_capacity(self) -> int:
        return sum(sum(row) for row in self.capacity)

    @cached_property
    def max_capacity(self) -> int:
        return max((c for row in self.capacity for c in row), default=0)

    def low_switch_capacity(self, j: int) -> int:
        """Total slots available to low switch j across all top switches."""
        return sum(self.capacity[i][j] for i in range(self.n))


@dataclass(frozen=True)
class ProportionalWeights:
    """Integer weights that factor capacities as C[i][j] = 2 * wT[i] * wL[j]."""

    wT: list[int]
    wL: list[int]

    def __post_init__(self) -> None:
        if not self.wT or not self.wL:
            raise ValueError("weight vectors must be non-empty")
        if any(w <= 0 for w in self.wT) or any(w <= 0 for w in self.wL):
            raise ValueError("weights must be positive")

    def shape(self) -> NetworkShape:
        return NetworkShape(
            m=len(self.wL),
            n=len(self.wT),
            capacity=capacities_from_weights(self.wT, self.wL),
        )

    def depth_ceiling(self) -> int:
        """Search depth that is always sufficient on a proportional network."""
        return sum(self.wL) - 1


def capacities_from_weights(wT: list[int], wL: list[int]) -> Matrix:
    """Capacity matrix of a proportional network: C[i][j] = 2 * wT[i] * wL[j]."""
    return [[2 * wt * wl for wl in wL] for wt in wT]


def make_demand(m: int) -> Matrix:
    return zero_matrix(m, m)


def make_scheme(n: int, m: int) -> Tensor:
    return [zero_matrix(m, m) for _ in range(n)]


def check_demand_matrix(D: Matrix) -> None:
    """Raise if D is not square, symmetric, zero-diagonal and non-negative."""
    m = len(D)
    if any(len(row) != m for row in D):
        raise DimensionMismatch("demand matrix must be square")
    for j in range(m):
        if D[j][j] != 0:
            raise ValueError(f"demand diagonal must be zero, got D[{j}][{j}]={D[j][j]}")
        for k in range(m):
            if D[j][k] < 0:
                raise ValueError("demand entries must be non-negative")
            if D[j][k] != D[k][j]:
                raise ValueError(f"demand must be symmetric, differs at ({j},{k})")


@dataclass(frozen=True)
class AtomicModification:
    """A single scheme edit: add or remove one connection (i, j, k)."""

    kind: str  # "add" | "remove"
    i: int
    j: int
    k: int

    def __post_init__(self) -> None:
        if self.kind not in ("add", "remove"):
            raise ValueError(f"unknown modification kind {self.kind!r}")
        if self.j == self.k:
            raise ValueError("a connection must join two distinct low switches")

    def inverse(self) -> "AtomicModification":
        kind = "remove" if self.kind == "add" else "add"
        return AtomicModification(kind, self.i, self.j, self.k)

    def to_json(self) -> dict:
        return {"kind": self.kind, "i": self.i, "j": self.j, "k": self.k}


@dataclass
class Violation:
    """One broken scheme rule, reported by validate_scheme."""

    kind: str  # "capacity" | "symmetry" | "diagonal"
    i: int | None
    j: int
    k: int | None
    detail: str

    def __str__(self) -> str:
        return f"{self.kind} at (i={self.i}, j={self.j}, k={self.k}): {self.detail}"


def validate_scheme(shape: NetworkShape, X: Tensor) -> list[Violation]:
    """Check a scheme against link capacities and the symmetry/diagonal rules.

    Returns one record per violated rule; an empty list means the scheme is
    feasible.  A scheme whose dimensions do not match the shape raises
    DimensionMismatch instead.
    """
    if len(X) != shape.n:
        raise DimensionMismatch(f"scheme has {len(X)} slices, shape has n={shape.n}")
    for sl in X:
        if len(sl) != shape.m or any(len(row) != shape.m for row in sl):
            raise DimensionMismatch("scheme slices must be m x m")

    out: list[Violation] = []
    for i in range(shape.n):
        sl = X[i]
        for j in range(shape.m):
            if sl[j][j] != 0:
                out.append(Violation("diagonal", i, j, j, f"X[{i}][{j}][{j}]={sl[j][j]} != 0"))
            for k in range(j + 1, shape.m):
                if sl[j][k] != sl[k][j]:
                    out.append(
                        Violation("symmetry", i, j, k, f"{sl[j][k]} != {sl[k][j]}")
                    )
            used = sum(sl[j])
            if used > shape.capacity[i][j]:
                out.append(
                    Violation(
                        "capacity", i, j, None,
                        f"link ({i},{j}) carries {used} > capacity {shape.capacity[i][j]}",
                    )
                )
    return out


def satisfies_demand(X: Tensor, D: Matrix) -> bool:
    """True iff the scheme establishes at least the demanded count for every pair."""
    m = len(D)
    if any(len(sl) != m for sl in X):
        raise DimensionMismatch("scheme and demand disagree on m")
    for j in range(m):
        for k in range(m):
            if sum(sl[j][k] for sl in X) < D[j][k]:
                return False
    return True


def edge_counts(X: Tensor) -> Matrix:
    """Per-pair connection counts E(X)[j][k] = sum over top switches of X[i][j][k]."""
    if not X:
        raise DimensionMismatch("scheme has no slices")
    m = len(X[0])
    E = zero_matrix(m, m)
    for sl in X:
        for j in range(m):
            row = sl[j]
            erow = E[j]
            for k in range(m):
                erow[k] += row[k]
    return E


def num_rearrangements(X: Tensor, Y: Tensor) -> int:
    """Total absolute difference between two schemes over the full symmetric tensors.

    Each physically added or removed connection contributes 2.
    """
    if len(X) != len(Y) or (X and len(X[0]) != len(Y[0])):
        raise DimensionMismatch("schemes must have identical dimensions")
    total = 0
    for sx, sy in zip(X, Y):
        for rx, ry in zip(sx, sy):
            for a, b in zip(rx, ry):
                total += abs(a - b)
    return total


def num_connections(D: Matrix) -> int:
    """Full symmetric sum of a demand matrix (each pair counted twice)."""
    return sum(sum(row) for row in D)


def network_load(capacity: Matrix, D: Matrix) -> float:
    """Total demand over total capacity, in [0, 1] for feasible demands."""
    cap = sum(sum(row) for row in capacity)
    if cap == 0:
        raise ValueError("network has zero total capacity")
    return num_connections(D) / cap


def demand_feasible(shape: NetworkShape, D: Matrix) -> bool:
    """Row-sum feasibility: every low switch can carry its demanded connections."""
    m = len(D)
    if m != shape.m:
        raise DimensionMismatch("demand and shape disagree on m")
    for j in range(m):
        if sum(D[j]) > shape.low_switch_capacity(j):
            return False
    return True


def apply_modification(X: Tensor, mod: AtomicModification) -> None:
    """Apply one add/remove to a raw scheme tensor, keeping it symmetric."""
    d = 1 if mod.kind == "add" else -1
    X[mod.i][mod.j][mod.k] += d
    X[mod.i][mod.k][mod.j] += d


def copy_scheme(X: Tensor) -> Tensor:
    return copy.deepcopy(X)


def copy_matrix(M: Matrix) -> Matrix:
    return [row[:] for row in M]


# ---------------------------------------------------------------------------
# JSON forms (row-major nested arrays with explicit switch counts)
# ---------------------------------------------------------------------------

def shape_to_json(shape: NetworkShape) -> dict:
    return {"m": shape.m, "n": shape.n, "capacity": [row[:] for row in shape.capacity]}


def shape_from_json(obj: dict) -> NetworkShape:
    return NetworkShape(m=int(obj["m"]), n=int(obj["n"]),
                        capacity=[[int(c) for c in row] for row in obj["capacity"]])


def demand_to_json(D: Matrix) -> dict:
    return {"m": len(D), "demand": [row[:] for row in D]}


def demand_from_json(obj: dict) -> Matrix:
    D = [[int(c) for c in row] for row in obj["demand"]]
    if len(D) != int(obj["m"]):
        raise DimensionMismatch("demand rows disagree with declared m")
    check_demand_matrix(D)
    return D


def scheme_to_json(X: Tensor) -> dict:
    return {"n": len(X), "m": len(X[0]) if X else 0,
            "scheme": [[row[:] for row in sl] for sl in X]}


def scheme_from_json(obj: dict) -> Tensor:
    X = [[[int(c) for c in row] for row in sl] for sl in obj["scheme"]]
    if len(X) != int(obj["n"]) or (X and len(X[0]) != int(obj["m"])):
        raise DimensionMismatch("scheme dimensions disagree with declared n/m")
    return X
