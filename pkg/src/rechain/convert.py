"""Conversion between bidirectional and symmetric (three-stage) Clos forms.

``bidi_to_symmetric`` splits every low switch into an input and an output
switch by 2-coloring a slot graph: each link contributes one vertex per
capacity slot, consecutive slots are tied pairwise (type-1 edges), and every
established connection ties one slot of each of its two links (type-2 edges).
Each vertex touches exactly one type-1 edge and at most one type-2 edge, so
components are paths or even cycles and a proper 2-coloring always exists.
Black slots become up-link capacity, white slots down-link capacity, and each
connection is directed from its black side to its white side.

``convert_demand`` orients a symmetric demand matrix into a directed one whose
row and column sums stay within half of the originals (rounded either way):
even parts are split in half and the odd remainder graph is decomposed into
trails, first between odd-degree vertices and then along closed trails, each
oriented in traversal direction.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .model import (
    Matrix,
    NetworkShape,
    Tensor,
    check_demand_matrix,
    make_scheme,
    validate_scheme,
    zero_matrix,
)


@dataclass
class BipartiteColoring:
    """Per-slot colors and the slot pairing of every established connection."""

    colors: list[list[list[bool]]]  # colors[i][j][t]: True = black = up-link slot
    connection_edges: list[tuple[int, int, int, int, int]]  # (i, j, slot_j, k, slot_k)
    component: list[list[list[int]]] = field(default_factory=list)
    endpoint_ok: bool | None = None  # set when an endpoint hint was requested

    def free_slots(self, i: int, j: int) -> list[int]:
        used = set()
        for ci, cj, sj, ck, sk in self.connection_edges:
            if ci == i and cj == j:
                used.add(sj)
            if ci == i and ck == j:
                used.add(sk)
        return [t for t in range(len(self.colors[i][j])) if t not in used]


@dataclass
class SymmetricConversion:
    """A bidirectional instance re-expressed as a three-stage symmetric one."""

    sym_capacity: Matrix  # n x m, per side (up and down are equal)
    directed_scheme: Tensor  # directed_scheme[i][j][k]: connections U_j -> V_k via T_i
    coloring: BipartiteColoring

    def back_to_bidirectional(self) -> Tensor:
        n = len(self.directed_scheme)
        m = len(self.directed_scheme[0])
        X = make_scheme(n, m)
        for i in range(n):
            for j in range(m):
                for k in range(m):
                    if j != k:
                        X[i][j][k] = self.directed_scheme[i][j][k] + self.directed_scheme[i][k][j]
        return X


def bidi_to_symmetric(
    shape: NetworkShape,
    scheme: Tensor,
    endpoints: tuple[int, int] | None = None,
) -> SymmetricConversion:
    """Split a bidirectional instance into a symmetric one with halved capacities.

    Requires every link capacity to be even.  When ``endpoints`` = (j0, k0) is
    given, a post-pass flips component colors so that, when possible, some link
    of j0 keeps a free up slot and some link of k0 a free down slot; the result
    is recorded in ``coloring.endpoint_ok``.
    """
    for row in shape.capacity:
        for c in row:
            if c % 2 != 0:
                raise ValueError("conversion requires even link capacities")
    bad = validate_scheme(shape, scheme)
    if bad:
        raise ValueError(f"scheme is invalid: {bad[0]}")

    n, m, C = shape.n, shape.m, shape.capacity

    # allocate one slot per connection endpoint, in deterministic order
    ptr = [[0] * m for _ in range(n)]
    edges: list[tuple[int, int, int, int, int]] = []
    for i in range(n):
        for j in range(m):
            for k in range(j + 1, m):
                for _ in range(scheme[i][j][k]):
                    sj, sk = ptr[i][j], ptr[i][k]
                    ptr[i][j] += 1
                    ptr[i][k] += 1
                    edges.append((i, j, sj, k, sk))

    # neighbor of each vertex along its (at most one) type-2 edge
    conn_partner: dict[tuple[int, int, int], tuple[int, int, int]] = {}
    for i, j, sj, k, sk in edges:
        conn_partner[(i, j, sj)] = (i, k, sk)
        conn_partner[(i, k, sk)] = (i, j, sj)

    colors = [[[False] * C[i][j] for j in range(m)] for i in range(n)]
    comp = [[[-1] * C[i][j] for j in range(m)] for i in range(n)]
    comp_count = 0
    for i in range(n):
        for j in range(m):
            for t in range(C[i][j]):
                if comp[i][j][t] != -1:
                    continue
                # walk the path/cycle, alternating colors along both edge types
                stack = [((i, j, t), True)]
                comp[i][j][t] = comp_count
                colors[i][j][t] = True
                while stack:
                    (vi, vj, vt), col = stack.pop()
                    nxts = [(vi, vj, vt ^ 1)]  # type-1 partner shares the slot pair
                    p = conn_partner.get((vi, vj, vt))
                    if p is not None:
                        nxts.append(p)
                    for wi, wj, wt in nxts:
                        if comp[wi][wj][wt] == -1:
                            comp[wi][wj][wt] = comp_count
                            colors[wi][wj][wt] = not col
                            stack.append(((wi, wj, wt), not col))
                comp_count += 1

    coloring = BipartiteColoring(colors=colors, connection_edges=edges, component=comp)
    if endpoints is not None:
        coloring.endpoint_ok = _ensure_endpoint_sides(shape, coloring, *endpoints)

    directed = make_scheme(n, m)
    for i, j, sj, k, sk in edges:
        if colors[i][j][sj]:
            directed[i][j][k] += 1
        else:
            directed[i][k][j] += 1

    half = [[C[i][j] // 2 for j in range(m)] for i in range(n)]
    return SymmetricConversion(sym_capacity=half, directed_scheme=directed, coloring=coloring)


def _ensure_endpoint_sides(
    shape: NetworkShape, coloring: BipartiteColoring, j0: int, k0: int
) -> bool:
    """Flip whole components so j0 keeps a free black slot and k0 a free white one."""
    n = shape.n

    def candidates(low: int) -> list[tuple[int, int]]:
        out = []
        for i in range(n):
            for t in coloring.free_slots(i, low):
                out.append((coloring.component[i][low][t], 1 if coloring.colors[i][low][t] else 0))
        return out

    def flip(comp_id: int) -> None:
        for i in range(n):
            for j in range(shape.m):
                row = coloring.component[i][j]
                crow = coloring.colors[i][j]
                for t in range(len(row)):
                    if row[t] == comp_id:
                        crow[t] = not crow[t]

    for cu, col_u in candidates(j0):
        for cv, col_v in candidates(k0):
            if cu == cv:
                if col_u == col_v:
                    continue  # flipping moves both slots to the same side
                if col_u == 0:
                    flip(cu)
                return True
            if col_u == 0:
                flip(cu)
            if col_v == 1:
                flip(cv)
            return True
    return False


@dataclass
class ConversionViolation:
    kind: str  # "pair-sum" | "row-bound" | "col-bound"
    index: tuple
    detail: str

    def __str__(self) -> str:
        return f"{self.kind} at {self.index}: {self.detail}"


def convert_demand(demand: Matrix, seed: int | None = 0) -> Matrix:
    """Orient a symmetric demand into a directed one with balanced halves.

    The output Dp satisfies Dp[j][k] + Dp[k][j] = D[j][k] with every row and
    column sum between floor and ceil of half the corresponding sum of D.
    Trail tie-breaking is randomized but seeded for reproducibility.
    """
    check_demand_matrix(demand)
    m = len(demand)
    rng = random.Random(seed)

    adj: list[set[int]] = [set() for _ in range(m)]
    for j in range(m):
        for k in range(j + 1, m):
            if demand[j][k] % 2 == 1:
                adj[j].add(k)
                adj[k].add(j)

    oriented = zero_matrix(m, m)

    def walk_from(start: int, stop_at_odd: bool) -> None:
        cur = start
        while adj[cur]:
            nxt = rng.choice(sorted(adj[cur]))
            adj[cur].discard(nxt)
            adj[nxt].discard(cur)
            oriented[cur][nxt] = 1
            cur = nxt
            # the arrival edge is already removed; an even remaining degree
            # means the vertex had odd degree when reached
            if stop_at_odd and len(adj[cur]) % 2 == 0:
                return

    # pair off odd-degree vertices first, then peel closed trails
    while True:
        odd = [v for v in range(m) if len(adj[v]) % 2 == 1]
        if not odd:
            break
        walk_from(odd[0], stop_at_odd=True)
    while True:
        nonzero = [v for v in range(m) if adj[v]]
        if not nonzero:
            break
        walk_from(nonzero[0], stop_at_odd=False)

    return [
        [demand[j][k] // 2 + oriented[j][k] for k in range(m)]
        for j in range(m)
    ]


def verify_conversion(demand: Matrix, directed: Matrix) -> list[ConversionViolation]:
    """Check a directed demand against the pair-sum and half-sum bound rules."""
    m = len(demand)
    if len(directed) != m or any(len(row) != m for row in directed):
        raise ValueError("directed demand must match the original's dimensions")
    out: list[ConversionViolation] = []
    for j in range(m):
        for k in range(m):
            if directed[j][k] + directed[k][j] != demand[j][k]:
                out.append(
                    ConversionViolation(
                        "pair-sum", (j, k),
                        f"{directed[j][k]} + {directed[k][j]} != {demand[j][k]}",
                    )
                )
    for j in range(m):
        total = sum(demand[j])
        row = sum(directed[j])
        if not (total // 2 <= row <= (total + 1) // 2):
            out.append(
                ConversionViolation(
                    "row-bound", (j,),
                    f"row sum {row} outside [{total // 2}, {(total + 1) // 2}]",
                )
            )
    for k in range(m):
        total = sum(demand[j][k] for j in range(m))
        col = sum(directed[j][k] for j in range(m))
        if not (total // 2 <= col <= (total + 1) // 2):
            out.append(
                ConversionViolation(
                    "col-bound", (k,),
                    f"column sum {col} outside [{total // 2}, {(total + 1) // 2}]",
                )
            )
    return out
