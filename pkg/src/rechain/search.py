"""Replacement-chain construction.

A replacement chain of length l realizes one extra connection for a target
pair by shifting l existing connections between top switches:

    Remove(i_0, p_1), Add(i_0, p_0),
    Remove(i_1, p_2), Add(i_1, p_1),
    ...
    Add(i_l, p_l)

where p_0 is the target pair and consecutive pairs share exactly one low
switch.  Whenever a level places a connection over a fully-used link that is
only implicitly available, a redundant connection on that link is removed at
the same time (a "harvest").

``schedule_connection`` finds a shortest chain by iterative deepening DFS over
this structure, filtering candidate top switches through the state's bit
vectors and optionally limiting per-node branching so each deepening iteration
costs roughly a fixed computation budget.  ``two_switch_bfs`` searches the
restricted family of chains that alternate between two fixed top switches,
which admits a breadth-first search with linearly many link visits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .model import AtomicModification, NetworkShape
from .state import SchedulerState, iter_bits

EXPLICIT = "explicit"


def breadth_limit(max_comp: int, d: int) -> int:
    """Per-node branching limit floor(max_comp ** (1/d)), at least 1."""
    if max_comp < 1:
        raise ValueError("max_comp must be >= 1")
    if d < 1:
        raise ValueError("depth must be >= 1")
    b = max(int(round(max_comp ** (1.0 / d))), 1)
    while b > 1 and b**d > max_comp:
        b -= 1
    while (b + 1) ** d <= max_comp:
        b += 1
    return b


def default_depth_ceiling(shape: NetworkShape) -> int:
    """Safe chain-length ceiling when no tighter bound is configured.

    On proportional networks the sum of low-switch weights minus one suffices;
    callers holding weights should pass that through SearchConfig.max_depth.
    """
    return shape.m * shape.max_capacity // 2


@dataclass
class SearchConfig:
    """Knobs for chain search.

    max_depth:  chain-length ceiling (None = derive from the shape).
    max_comp:   per-iteration computation budget driving the breadth limit
                (None = unbounded breadth).
    num_chains: candidate chains sampled by the refined variant (1 = plain).
    seed:       consumed by drivers to reseed the state RNG once per run.
    """

    max_depth: int | None = None
    max_comp: int | None = 10**6
    num_chains: int = 1
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        if self.max_comp is not None and self.max_comp < 1:
            raise ValueError("max_comp must be >= 1")
        if self.num_chains < 1:
            raise ValueError("num_chains must be >= 1")


@dataclass(frozen=True)
class ChainLevel:
    """One level of a chain: the pair added through ``top`` plus its harvests."""

    top: int
    pair: tuple[int, int]
    harvests: tuple[AtomicModification, ...] = ()


@dataclass
class ReplacementChain:
    """An applied chain, stored level by level (level 0 adds the target pair)."""

    levels: list[ChainLevel]

    @property
    def length(self) -> int:
        return len(self.levels) - 1

    @property
    def mods(self) -> list[AtomicModification]:
        """The core alternating Remove/Add sequence, in replay order."""
        out: list[AtomicModification] = []
        for t, lv in enumerate(self.levels):
            if t + 1 < len(self.levels):
                nj, nk = self.levels[t + 1].pair
                out.append(AtomicModification("remove", lv.top, nj, nk))
            out.append(AtomicModification("add", lv.top, lv.pair[0], lv.pair[1]))
        return out

    @property
    def extra_removals(self) -> list[AtomicModification]:
        """Harvested redundant connections, in replay order."""
        return [h for lv in self.levels for h in lv.harvests]

    def ordered_mods(self) -> list[AtomicModification]:
        """Full modification sequence; replaying it step by step stays feasible."""
        out: list[AtomicModification] = []
        for t, lv in enumerate(self.levels):
            out.extend(lv.harvests)
            if t + 1 < len(self.levels):
                nj, nk = self.levels[t + 1].pair
                out.append(AtomicModification("remove", lv.top, nj, nk))
            out.append(AtomicModification("add", lv.top, lv.pair[0], lv.pair[1]))
        return out

    def net_deltas(self) -> dict[tuple[int, int, int], int]:
        """Net change per (top, low, low) entry, keyed with low indices sorted."""
        deltas: dict[tuple[int, int, int], int] = {}
        for mod in self.ordered_mods():
            key = (mod.i, min(mod.j, mod.k), max(mod.j, mod.k))
            deltas[key] = deltas.get(key, 0) + (1 if mod.kind == "add" else -1)
        return {k: v for k, v in deltas.items() if v != 0}

    def canonical(self) -> tuple:
        return tuple((m.kind, m.i, m.j, m.k) for m in self.ordered_mods())


@dataclass
class SearchStats:
    """Per-call search accounting for the bench harness."""

    nodes_per_iteration: list[int] = field(default_factory=list)
    chain_length: int | None = None
    extra_sample_nodes: int = 0

    @property
    def iterations(self) -> int:
        return len(self.nodes_per_iteration)

    @property
    def total_nodes(self) -> int:
        return sum(self.nodes_per_iteration) + self.extra_sample_nodes


@dataclass
class SearchResult:
    chain: ReplacementChain | None
    stats: SearchStats

    @property
    def found(self) -> bool:
        return self.chain is not None


def _random_set_bit(bits: int, rng) -> int:
    cnt = bits.bit_count()
    if cnt > 1:
        for _ in range(rng.randrange(cnt)):
            bits &= bits - 1
    return (bits & -bits).bit_length() - 1


def _selectable_excluding(st: SchedulerState, j: int, banned_partner: int | None) -> int:
    """Available-switch bits for j, not counting redundancy of one banned pair."""
    bits = st.bitset_lt[j]
    llt = st.bitset_llt[j]
    for k in iter_bits(st.bitset_ll[j]):
        if k != banned_partner:
            bits |= llt[k]
    return bits


class _ChainSearch:
    """One depth-limited DFS family over a live state.

    Levels of the successful path are pushed leaf-first onto ``trail``; on
    success the state already holds the applied chain.  Connections of the
    target pair are never harvested, so the target count always nets +1.
    """

    def __init__(self, state: SchedulerState, max_comp: int | None) -> None:
        self.state = state
        self.rng = state.rng
        self.max_comp = max_comp
        self.breadth: float = math.inf
        self.nodes = 0
        self.trail: list[ChainLevel] = []
        self.root_partner: dict[int, int] = {}

    def run_iteration(self, j0: int, k0: int, depth: int) -> bool:
        self.nodes = 0
        self.trail = []
        self.root_partner = {j0: k0, k0: j0}
        if self.max_comp is None or depth == 0:
            self.breadth = math.inf
        else:
            self.breadth = breadth_limit(self.max_comp, depth)
        return self._dls(j0, k0, depth)

    def chain(self) -> ReplacementChain:
        return ReplacementChain(levels=list(reversed(self.trail)))

    # -- internals ---------------------------------------------------------

    def _harvest_candidates(self, i: int, a: int, exclude: int | None) -> list[int]:
        st = self.state
        banned = (exclude, self.root_partner.get(a))
        bit = 1 << i
        llt = st.bitset_llt[a]
        return [k for k in iter_bits(st.bitset_ll[a]) if llt[k] & bit and k not in banned]

    def _availability(self, i: int, j: int, exclude: int):
        """Pre-placement availability of link (i, j): EXPLICIT, harvest list, or None."""
        st = self.state
        if st.count_lt[j][i] < st.capacity[i][j]:
            return EXPLICIT
        return self._harvest_candidates(i, j, exclude) or None

    def _leaf_harvest(self, i: int, j: int) -> AtomicModification | None:
        """Free link (i, j) for a direct placement, if it is fully used."""
        st = self.state
        if st.count_lt[j][i] < st.capacity[i][j]:
            return None
        options = self._harvest_candidates(i, j, None)
        if not options:
            return None
        h = options[0] if len(options) == 1 else self.rng.choice(options)
        st._remove(i, j, h)
        return AtomicModification("remove", i, j, h)

    def _selectable_for(self, j: int) -> int:
        """Switches with a usable link to j, ignoring target-pair redundancy."""
        return _selectable_excluding(self.state, j, self.root_partner.get(j))

    def _dls(self, j: int, k: int, depth: int) -> bool:
        st = self.state
        self.nodes += 1
        if depth == 0:
            bits = self._selectable_for(j) & self._selectable_for(k)
            if not bits:
                return False
            i = _random_set_bit(bits, self.rng)
            harvests: list[AtomicModification] = []
            mod = self._leaf_harvest(i, j)
            if mod is not None:
                harvests.append(mod)
            # the j-side harvest may have freed (i, k) too, so re-resolve
            mod = self._leaf_harvest(i, k)
            if mod is not None:
                harvests.append(mod)
            st._add(i, j, k)
            self.trail.append(ChainLevel(i, (j, k), tuple(harvests)))
            return True

        budget = [self.breadth]
        bits = self._selectable_for(j) | self._selectable_for(k)
        order = list(iter_bits(bits))
        self.rng.shuffle(order)
        for i in order:
            if budget[0] <= 0:
                break
            budget[0] -= 1
            avail_j = self._availability(i, j, exclude=k)
            avail_k = self._availability(i, k, exclude=j)
            st._add(i, j, k)  # tentative; balanced below or by the subroutine
            if self._subroutine(i, j, k, avail_j, depth, budget) or self._subroutine(
                i, k, j, avail_k, depth, budget
            ):
                return True
            st._remove(i, j, k)
        return False

    def _subroutine(self, i: int, a: int, b: int, avail, depth: int, budget: list) -> bool:
        """Try to legalize the tentative add of (a, b) through i, keeping the a side.

        ``avail`` is the pre-add availability of link (i, a); the b side gets
        freed by replacing one of its connections and re-placing that pair one
        level deeper.
        """
        if avail is None:
            return False
        st = self.state
        if avail is EXPLICIT:
            harvest_options: list[int | None] = [None]
        else:
            harvest_options = list(avail)
            self.rng.shuffle(harvest_options)
        row = st.scheme[i][b]
        for idx, h in enumerate(harvest_options):
            if idx > 0:
                if budget[0] <= 0:
                    break
                budget[0] -= 1
            harvest_mod = None
            if h is not None:
                st._remove(i, a, h)
                harvest_mod = AtomicModification("remove", i, a, h)
            partners = [l for l in range(st.m) if l != a and row[l] > 0]
            self.rng.shuffle(partners)
            for l in partners:
                if budget[0] <= 0:
                    break
                budget[0] -= 1
                st._remove(i, b, l)
                if self._dls(b, l, depth - 1):
                    self.trail.append(
                        ChainLevel(i, (a, b), (harvest_mod,) if harvest_mod else ())
                    )
                    return True
                st._add(i, b, l)
            if h is not None:
                st._add(i, a, h)
            if budget[0] <= 0:
                break
        return False


def schedule_connection(
    state: SchedulerState, j0: int, k0: int, config: SearchConfig | None = None
) -> SearchResult:
    """Add one connection between L_j0 and L_k0 via a shortest replacement chain.

    Deepening iterations try chain lengths 0, 1, ... up to the ceiling; the
    first success is applied to the state and returned.  On failure the state
    is left untouched.
    """
    if j0 == k0:
        raise ValueError("target pair must join distinct low switches")
    cfg = config or SearchConfig()
    ceiling = cfg.max_depth if cfg.max_depth is not None else default_depth_ceiling(state.shape)
    search = _ChainSearch(state, cfg.max_comp)
    stats = SearchStats()
    for depth in range(ceiling + 1):
        found = search.run_iteration(j0, k0, depth)
        stats.nodes_per_iteration.append(search.nodes)
        if found:
            chain = search.chain()
            stats.chain_length = chain.length
            return SearchResult(chain, stats)
    return SearchResult(None, stats)


def apply_chain(state: SchedulerState, chain: ReplacementChain) -> None:
    """Replay a chain's modifications onto a state."""
    for mod in chain.ordered_mods():
        if mod.kind == "add":
            state._add(mod.i, mod.j, mod.k)
        else:
            state._remove(mod.i, mod.j, mod.k)


def undo_chain(state: SchedulerState, chain: ReplacementChain) -> None:
    """Exactly invert a previously applied chain."""
    for mod in reversed(chain.ordered_mods()):
        if mod.kind == "add":
            state._remove(mod.i, mod.j, mod.k)
        else:
            state._add(mod.i, mod.j, mod.k)


def _delta_score(state: SchedulerState, reference, chain: ReplacementChain) -> int:
    """Rearrangement change against ``reference`` if ``chain`` were applied now.

    Only the entries the chain touches contribute; the symmetric double count
    keeps scores on the same scale as full rearrangement totals.
    """
    score = 0
    for (i, a, b), delta in chain.net_deltas().items():
        cur = state.scheme[i][a][b]
        ref = reference[i][a][b]
        score += 2 * (abs(cur + delta - ref) - abs(cur - ref))
    return score


def schedule_connection_refined(
    state: SchedulerState,
    j0: int,
    k0: int,
    reference_scheme,
    config: SearchConfig | None = None,
) -> SearchResult:
    """Chain search that samples several shortest chains and keeps the cheapest.

    Up to ``config.num_chains`` chains are sampled at the minimal successful
    depth (duplicates are discarded but still count); the one whose application
    would add the fewest rearrangements relative to ``reference_scheme`` wins,
    ties going to the first found.  With num_chains=1 this is plain search.
    """
    cfg = config or SearchConfig()
    base = schedule_connection(state, j0, k0, cfg)
    if base.chain is None or cfg.num_chains <= 1:
        return base
    d_min = base.chain.length
    undo_chain(state, base.chain)

    candidates = [base.chain]
    seen = {base.chain.canonical()}
    sampler = _ChainSearch(state, cfg.max_comp)
    extra_nodes = 0
    for _ in range(cfg.num_chains - 1):
        found = sampler.run_iteration(j0, k0, d_min)
        extra_nodes += sampler.nodes
        if not found:
            continue
        chain = sampler.chain()
        undo_chain(state, chain)
        key = chain.canonical()
        if key not in seen:
            seen.add(key)
            candidates.append(chain)

    best = candidates[0]
    best_score = _delta_score(state, reference_scheme, best)
    for cand in candidates[1:]:
        s = _delta_score(state, reference_scheme, cand)
        if s < best_score:
            best, best_score = cand, s
    apply_chain(state, best)
    base.stats.extra_sample_nodes = extra_nodes
    base.stats.chain_length = best.length
    return SearchResult(best, base.stats)


# ---------------------------------------------------------------------------
# Two-top-switch restriction
# ---------------------------------------------------------------------------

def two_switch_bfs(state: SchedulerState, j0: int, k0: int) -> ReplacementChain | None:
    """Shortest chain that alternates between two fixed top switches, if any.

    Tries every ordered switch pair (A, B) with A available to L_j0 and B to
    L_k0, in random order, and runs a breadth-first search over the existing
    connections of A and B.  Each low switch may be entered once per
    continuation switch, so link visits stay linear in m per pair.  Finding no
    restricted chain does not imply no chain exists at all.
    """
    if j0 == k0:
        raise ValueError("target pair must join distinct low switches")
    st = state
    rng = st.rng

    sel_j = _selectable_excluding(st, j0, k0)
    sel_k = _selectable_excluding(st, k0, j0)
    both = sel_j & sel_k
    if both:
        i = _random_set_bit(both, rng)
        chain = _direct_level_chain(st, i, j0, k0)
        apply_chain(st, chain)
        return chain

    a_bits = list(iter_bits(sel_j))
    b_bits = list(iter_bits(sel_k))
    # each combination is tried in both orientations: the new connection can
    # land on the switch available to either endpoint, walking from the other
    walks = [(a, b, j0, k0) for a in a_bits for b in b_bits if a != b]
    walks += [(b, a, k0, j0) for a in a_bits for b in b_bits if a != b]
    rng.shuffle(walks)
    for a, b, start_j, start_k in walks:
        chain = _bfs_one_pair(st, a, b, start_j, start_k)
        if chain is not None:
            return chain
    return None


def _direct_level_chain(st: SchedulerState, i: int, j: int, k: int) -> ReplacementChain:
    """Plan a length-0 chain through switch i (harvests resolved, not applied)."""
    harvests = []
    if st.count_lt[j][i] >= st.capacity[i][j]:
        h = st.rng.choice(st.redundant_partners(i, j, exclude=k))
        harvests.append(AtomicModification("remove", i, j, h))
    if st.count_lt[k][i] >= st.capacity[i][k]:
        h = st.rng.choice(st.redundant_partners(i, k, exclude=j))
        harvests.append(AtomicModification("remove", i, k, h))
    return ReplacementChain(levels=[ChainLevel(i, (j, k), tuple(harvests))])


def _bfs_one_pair(st: SchedulerState, A: int, B: int, j0: int, k0: int) -> ReplacementChain | None:
    """BFS over chains through switches A (available to j0) and B (to k0)."""
    m = st.m
    root_partner = {j0: k0, k0: j0}

    def terminal_ok(s: int, x: int, prev_node: int) -> bool:
        if st.count_lt[x][s] < st.capacity[s][x]:
            return True
        banned = (prev_node, root_partner.get(x))
        return any(p not in banned for p in st.redundant_partners(s, x))

    # state key: (node, switch whose slot will re-place the pair ending here)
    parent: dict[tuple[int, int], tuple[int, int] | None] = {}
    frontier: list[tuple[int, int]] = []

    start_row = st.scheme[A][k0]
    for x in range(m):
        if x != j0 and start_row[x] > 0:
            key = (x, B)
            if key not in parent:
                parent[key] = None
                frontier.append(key)

    while frontier:
        next_frontier: list[tuple[int, int]] = []
        for key in frontier:
            x, s = key
            prev = parent[key]
            prev_node = prev[0] if prev is not None else k0
            if terminal_ok(s, x, prev_node):
                chain = _assemble_two_switch(st, A, B, j0, k0, parent, key)
                if chain is not None:
                    return chain
                # the chain's own edits invalidated this ending; keep walking
            row = st.scheme[s][x]
            nxt = B if s == A else A
            for y in range(m):
                if y == prev_node or row[y] <= 0:
                    continue
                nkey = (y, nxt)
                if nkey not in parent:
                    parent[nkey] = key
                    next_frontier.append(nkey)
        frontier = next_frontier
    return None


def _assemble_two_switch(
    st: SchedulerState,
    A: int,
    B: int,
    j0: int,
    k0: int,
    parent: dict,
    terminal: tuple[int, int],
) -> ReplacementChain | None:
    """Turn a BFS path into a chain, applying it if every step stays legal."""
    nodes = []
    key: tuple[int, int] | None = terminal
    while key is not None:
        nodes.append(key[0])
        key = parent[key]
    nodes.append(k0)
    nodes.reverse()  # k0 = x_0, x_1, ..., x_l

    levels = [ChainLevel(A, (j0, k0))]
    for t in range(1, len(nodes)):
        top = B if t % 2 == 1 else A
        levels.append(ChainLevel(top, (nodes[t - 1], nodes[t])))
    chain = ReplacementChain(levels=levels)

    # Harvest points: the j0 side of level 0, the k0 side of level 1 and the
    # far side of the terminal level use pre-existing availability; resolve
    # their harvests live while replaying, abandoning the path on any illegal
    # step (a pair may appear twice and exhaust its multiplicity).
    l = chain.length
    harvest_points = {0: (A, j0, k0), 1: (B, k0, nodes[1])}
    terminal_top = B if l % 2 == 1 else A
    root_partner = {j0: k0, k0: j0}
    applied: list[AtomicModification] = []

    def undo_all() -> None:
        for mod in reversed(applied):
            if mod.kind == "add":
                st._remove(mod.i, mod.j, mod.k)
            else:
                st._add(mod.i, mod.j, mod.k)

    resolved_levels: list[ChainLevel] = []
    for t, lv in enumerate(chain.levels):
        harvests: list[AtomicModification] = []
        points = []
        if t in harvest_points and t <= l:
            points.append(harvest_points[t])
        if t == l and t >= 1:
            points.append((terminal_top, nodes[l], nodes[l - 1]))
        for top, node, other in points:
            if st.count_lt[node][top] >= st.capacity[top][node]:
                banned = (other, root_partner.get(node))
                partners = [
                    p for p in st.redundant_partners(top, node) if p not in banned
                ]
                if not partners:
                    undo_all()
                    return None
                h = st.rng.choice(partners)
                mod = AtomicModification("remove", top, node, h)
                st._remove(top, node, h)
                applied.append(mod)
                harvests.append(mod)
        if t + 1 <= l:
            nj, nk = chain.levels[t + 1].pair
            if st.scheme[lv.top][nj][nk] <= 0:
                undo_all()
                return None
            st._remove(lv.top, nj, nk)
            applied.append(AtomicModification("remove", lv.top, nj, nk))
        pj, pk = lv.pair
        if (
            st.count_lt[pj][lv.top] >= st.capacity[lv.top][pj]
            or st.count_lt[pk][lv.top] >= st.capacity[lv.top][pk]
        ):
            undo_all()
            return None
        st._add(lv.top, pj, pk)
        applied.append(AtomicModification("add", lv.top, pj, pk))
        resolved_levels.append(ChainLevel(lv.top, lv.pair, tuple(harvests)))

    return ReplacementChain(levels=resolved_levels)
