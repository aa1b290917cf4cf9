"""Exact capacitated categorical clustering, parameterised by the budget B.

Search outline
--------------
Columns are first grouped into initial clusters (identical columns).  An
optimal solution can be assumed acyclic: its bipartite intersection graph
with the initial clusters is a forest.  The solver then guesses

* ``t``: the number of composite clusters (0..min(B, k)),
* ``l``: how many initial clusters meet a composite cluster (t+1..2B),
* a coloring of the initial clusters with ``l`` colors, hoping the touched
  ones receive distinct colors,
* a forest template: the shape of the composite/initial intersection forest,

and runs a dynamic program over each tree of the template.  W-nodes of a
template stand for touched initial clusters, U-nodes for composite clusters.
All other initial clusters are cut into simple (single-type, zero-cost)
blocks by the W-node that owns their color.

Table layout (all tables are sparse dicts; entries above B are dropped):

``w_table[x][(h, Y, g, j)]``
    W-node ``x`` is played by initial cluster ``g`` (color in ``Y``), ``j``
    of its elements are handed up to the parent composite cluster, and the
    subtree spans the colors ``Y`` and uses ``h`` clusters.
``u_table[x][(h, Y, j, si)]``
    U-node ``x`` is a composite cluster with median ``M[si]`` that still
    lacks ``j`` elements from its parent; ``h`` counts it too.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import islice

from .combinatorics import (
    ForestTemplate,
    TreeTemplate,
    canonical_coloring,
    coloring_family,
    surjective_colorings,
    default_trials,
    distribute_blocks,
    enumerate_forest_templates,
    simple_split_feasible,
    split_bounds,
    split_into_blocks,
)
from .core import Capacitated, Clustering, InitialClustering, Instance, InstanceError, initial_clusters
from .median_enum import CandidateMedianSet, candidate_medians
from .metric import make_clustering

log = logging.getLogger(__name__)


class DPError(RuntimeError):
    """Inconsistent DP tables or backpointers; indicates a solver bug."""


def _popcount(x: int) -> int:
    return bin(x).count("1")


def _relax(table: dict, key, cost, back) -> None:
    old = table.get(key)
    if old is None or cost < old[0]:
        table[key] = (cost, back)


@dataclass
class SolverContext:
    """Per-instance data shared by every coloring and template."""

    instance: Instance
    p: int
    q: int
    init: InitialClustering
    medians: CandidateMedianSet
    dist: list[list[int]] = field(init=False)  # dist[si][g]

    def __post_init__(self):
        reps = self.init.representatives
        self.dist = [[sum(a != b for a, b in zip(med, rep)) for rep in reps] for med in self.medians.vectors]
        self.sizes = self.init.sizes

    @classmethod
    def build(cls, instance: Instance, medians: CandidateMedianSet | None = None) -> "SolverContext":
        c = instance.constraint
        if not isinstance(c, Capacitated):
            raise InstanceError("the FPT solver needs a Capacitated constraint")
        init = initial_clusters(instance.matrix)
        if medians is None:
            medians = candidate_medians(instance.matrix, instance.B, init)
        return cls(instance, c.p, c.q, init, medians)

    @property
    def k(self) -> int:
        return self.instance.k

    @property
    def B(self) -> int:
        return self.instance.B

    @property
    def s(self) -> int:
        return self.init.s


class ColoredGroups:
    """Initial clusters bucketed by color, with simple-split bounds per color."""

    def __init__(self, ctx: SolverContext, psi):
        self.ctx = ctx
        self.psi = tuple(psi)
        l = max(self.psi) + 1  # noqa: E741
        self.by_color: list[list[int]] = [[] for _ in range(l)]
        for g, c in enumerate(self.psi):
            self.by_color[c].append(g)
        p, q = ctx.p, ctx.q
        self.bounds = [split_bounds(sz, p, q) for sz in ctx.sizes]
        self.color_lo = [0] * l
        self.color_hi = [0] * l
        self.color_bad = [0] * l
        for g, c in enumerate(self.psi):
            b = self.bounds[g]
            if b is None:
                self.color_bad[c] += 1
            else:
                self.color_lo[c] += b[0]
                self.color_hi[c] += b[1]

    def simple_range(self, g: int, rest: int):
        """Block-count range for color psi[g] when group g keeps only ``rest`` elements."""
        c = self.psi[g]
        bad = self.color_bad[c] - (self.bounds[g] is None)
        if bad:
            return None
        rb = split_bounds(rest, self.ctx.p, self.ctx.q)
        if rb is None:
            return None
        own = self.bounds[g] or (0, 0)
        return (self.color_lo[c] - own[0] + rb[0], self.color_hi[c] - own[1] + rb[1])


# -- tree DP ----------------------------------------------------------------


def _w_leaf(ctx: SolverContext, cg: ColoredGroups) -> dict:
    table: dict = {}
    k = ctx.k
    for g, c in enumerate(cg.psi):
        for j in range(1, ctx.sizes[g] + 1):
            rest = ctx.sizes[g] - j
            rng = cg.simple_range(g, rest)
            if rng is None:
                continue
            for h in range(max(rng[0], 0), min(rng[1], k) + 1):
                table[(h, 1 << c, g, j)] = (0, ("leaf", (), rest, h))
    return table


def _w_internal(ctx: SolverContext, cg: ColoredGroups, child_tables: list[dict], l_x: int) -> dict:
    """Initial cluster g splits its elements among child composite clusters,
    its own simple blocks and the parent's composite cluster."""
    table: dict = {}
    k, B, dist = ctx.k, ctx.B, ctx.dist
    f = len(child_tables)
    for g, c in enumerate(cg.psi):
        size = ctx.sizes[g]
        if size < f + 1:
            continue
        cbit = 1 << c
        states = {(0, 0, 0): (0, ())}
        for ut in child_tables:
            # best median per (h, Z, a) once the a elements of g are charged
            child: dict = {}
            for (h, Z, a, si), (cost, _) in ut.items():
                if Z & cbit or a == 0:
                    continue
                val = cost + a * dist[si][g]
                if val <= B:
                    _relax(child, (h, Z, a), val, si)
            nxt: dict = {}
            for (h0, Z0, a0), (cost0, chain) in states.items():
                for (h1, Z1, a1), (cost1, si) in child.items():
                    if Z0 & Z1 or h0 + h1 > k or a0 + a1 > size - 1:
                        continue
                    cost = cost0 + cost1
                    if cost <= B:
                        _relax(nxt, (h0 + h1, Z0 | Z1, a0 + a1), cost, chain + ((h1, Z1, a1, si),))
            states = nxt
            if not states:
                break
        for (hc, Z, a), (cost, chain) in states.items():
            if _popcount(Z) + 1 != l_x:
                continue
            for j in range(1, size - a + 1):
                rest = size - j - a
                rng = cg.simple_range(g, rest)
                if rng is None:
                    continue
                for h0 in range(max(rng[0], 0), min(rng[1], k - hc) + 1):
                    _relax(table, (hc + h0, Z | cbit, g, j), cost, ("int", chain, rest, h0))
    return table


def _u_node(ctx: SolverContext, child_tables: list[dict], is_root: bool) -> dict:
    """A composite cluster made of elements of its child initial clusters."""
    table: dict = {}
    k, B, p, q, dist = ctx.k, ctx.B, ctx.p, ctx.q, ctx.dist
    max_size = q if is_root else q - 1
    entries = [[(h, Z, g, b, cost) for (h, Z, g, b), (cost, _) in wt.items() if b <= max_size]
               for wt in child_tables]
    for si in range(len(ctx.medians)):
        drow = dist[si]
        states = {(0, 0, 0): (0, ())}
        for ent in entries:
            child: dict = {}
            for h, Z, g, b, cost in ent:
                val = cost + b * drow[g]
                if val <= B:
                    key = (h, Z, b)
                    old = child.get(key)
                    if old is None or val < old[0]:
                        child[key] = (val, g)
            if not child:
                states = {}
                break
            nxt: dict = {}
            citems = list(child.items())
            for (h0, Z0, b0), (cost0, chain) in states.items():
                room_h = k - 1 - h0
                room_b = max_size - b0
                room_c = B - cost0
                for (h1, Z1, b1), (cost1, g) in citems:
                    if Z0 & Z1 or h1 > room_h or b1 > room_b or cost1 > room_c:
                        continue
                    key = (h0 + h1, Z0 | Z1, b0 + b1)
                    cost = cost0 + cost1
                    old = nxt.get(key)
                    if old is None or cost < old[0]:
                        nxt[key] = (cost, chain + ((h1, Z1, b1, g),))
            states = nxt
            if not states:
                break
        for (hc, Z, size), (cost, chain) in states.items():
            if is_root:
                if p <= size <= q:
                    _relax(table, (hc + 1, Z, 0, si), cost, chain)
            else:
                for j in range(max(1, p - size), q - size + 1):
                    _relax(table, (hc + 1, Z, j, si), cost, chain)
    return table


@dataclass
class TreeTables:
    tree: TreeTemplate
    tables: list[dict]
    root: dict  # (X, h) -> (cost, si)


def tree_dp(ctx: SolverContext, cg: ColoredGroups, tree: TreeTemplate, node_cache: dict | None = None) -> TreeTables:
    """Minimum cost of a feasible h-clustering for every color set X (|X| = l_i) and h.

    A node's table depends only on the coloring and its rooted subtree, so
    ``node_cache`` (scoped to one coloring) shares tables between equal
    subtrees of this tree and of other templates.
    """
    if node_cache is None:
        node_cache = {}
    children = tree.children()
    l_sub = [0] * tree.size
    enc = [""] * tree.size
    tables: list[dict] = [None] * tree.size  # type: ignore[list-item]
    for x in reversed(range(tree.size)):  # preorder reversed: children first
        l_sub[x] = (tree.kinds[x] == "W") + sum(l_sub[y] for y in children[x])
        enc[x] = tree.kinds[x].lower() + "(" + "".join(enc[y] for y in children[x]) + ")"
        key = (enc[x], x == 0)
        cached = node_cache.get(key)
        if cached is not None:
            tables[x] = cached
            continue
        kids = [tables[y] for y in children[x]]
        if tree.kinds[x] == "W":
            if not children[x]:
                tables[x] = _w_leaf(ctx, cg)
            else:
                tables[x] = _w_internal(ctx, cg, kids, l_sub[x])
        else:
            if not children[x] or (x == 0 and len(children[x]) < 2):
                raise DPError("malformed template: U-node with too few neighbours")
            tables[x] = _u_node(ctx, kids, is_root=(x == 0))
        node_cache[key] = tables[x]
    root: dict = {}
    for (h, X, _, si), (cost, _) in tables[0].items():
        _relax(root, (X, h), cost, si)
    return TreeTables(tree, tables, root)


def tree_value(tt: TreeTables, X: int, h: int):
    """The component table entry, or None for +infinity."""
    if h <= 0 or _popcount(X) != tt.tree.l:
        return None
    e = tt.root.get((X, h))
    return None if e is None else e[0]


def combine_components(component_tables: list[dict], full: int, k: int, B: int):
    """Subset-split DP over components: cheapest way to give every color
    set and cluster count to exactly one component.

    ``component_tables[i]`` maps (X, h) to (cost, ...).  Returns
    ``(cost, [(X_i, h_i) ...])`` for the whole color set and k clusters, or None.
    """
    acc = {(X, h): (cost, ((X, h),)) for (X, h), (cost, _) in component_tables[0].items() if cost <= B}
    for comp in component_tables[1:]:
        nxt: dict = {}
        for (X0, h0), (c0, parts) in acc.items():
            for (X1, h1), (c1, _) in comp.items():
                if X0 & X1 or h0 + h1 > k:
                    continue
                cost = c0 + c1
                if cost <= B:
                    _relax(nxt, (X0 | X1, h0 + h1), cost, parts + ((X1, h1),))
        acc = nxt
    e = acc.get((full, k))
    return e


# -- reconstruction ---------------------------------------------------------


class _Builder:
    """Turns DP backpointers into abstract clusters: lists of (group, count)."""

    def __init__(self, ctx: SolverContext, cg: ColoredGroups, tt: TreeTables):
        self.ctx, self.cg, self.tt = ctx, cg, tt
        self.children = tt.tree.children()
        self.clusters: list[tuple[list[tuple[int, int]], int | None]] = []

    def simple_blocks(self, g: int, rest: int, h0: int) -> None:
        c = self.cg.psi[g]
        members = [(g2, self.ctx.sizes[g2] if g2 != g else rest) for g2 in self.cg.by_color[c]]
        counts = distribute_blocks([sz for _, sz in members], h0, self.ctx.p, self.ctx.q)
        for (g2, sz), cnt in zip(members, counts):
            for block in split_into_blocks(range(sz), cnt, self.ctx.p, self.ctx.q):
                self.clusters.append(([(g2, len(block))], None))

    def w_node(self, x: int, key) -> None:
        entry = self.tt.tables[x].get(key)
        if entry is None:
            raise DPError(f"missing W entry {key} at node {x}")
        _, (kind, chain, rest, h0) = entry
        g = key[2]
        self.simple_blocks(g, rest, h0)
        if kind == "leaf":
            return
        for y, (h1, Z1, a1, si) in zip(self.children[x], chain):
            slot = self.u_node(y, (h1, Z1, a1, si))
            slot[0].append((g, a1))

    def u_node(self, x: int, key):
        entry = self.tt.tables[x].get(key)
        if entry is None:
            raise DPError(f"missing U entry {key} at node {x}")
        _, chain = entry
        si = key[3]
        composite = ([], si)
        self.clusters.append(composite)
        for y, (h1, Z1, b1, g) in zip(self.children[x], chain):
            self.w_node(y, (h1, Z1, g, b1))
            composite[0].append((g, b1))
        return composite

    def root(self, X: int, h: int) -> None:
        entry = self.tt.root.get((X, h))
        if entry is None:
            raise DPError(f"missing root entry {(X, h)}")
        self.u_node(0, (h, X, 0, entry[1]))


def _materialise(ctx: SolverContext, abstract) -> list[list[int]]:
    cursor = [0] * ctx.s
    out = []
    for parts, _ in abstract:
        cluster = []
        for g, cnt in parts:
            members = ctx.init.groups[g]
            cluster.extend(members[cursor[g]:cursor[g] + cnt])
            cursor[g] += cnt
        out.append(cluster)
    if cursor != ctx.sizes:
        raise DPError("reconstruction did not use every column exactly once")
    return out


def reconstruct(ctx: SolverContext, cg: ColoredGroups, parts, trees: list[TreeTables]) -> Clustering:
    """Explicit clustering for a winning template; checks sizes and cost."""
    abstract = []
    for (X, h), tt in zip(parts, trees):
        b = _Builder(ctx, cg, tt)
        b.root(X, h)
        abstract.extend(b.clusters)
    clusters = _materialise(ctx, abstract)
    if len(clusters) != ctx.k:
        raise DPError(f"reconstructed {len(clusters)} clusters, expected {ctx.k}")
    if any(not ctx.p <= len(c) <= ctx.q for c in clusters):
        raise DPError("reconstructed cluster violates the size bounds")
    return make_clustering(ctx.instance.matrix, clusters)


# -- search -----------------------------------------------------------------


@dataclass
class ColorfulResult:
    cost: int
    clustering: Clustering
    template: ForestTemplate


def template_lower_bound(f: ForestTemplate) -> int:
    """Each composite cluster costs nothing on at most one neighbouring
    initial cluster, so every other template edge costs at least 1."""
    return f.l - len(f.components)


def colorful_solve(ctx: SolverContext, t: int, l: int, psi, templates=None, cache=None):  # noqa: E741
    """Cheapest clustering that is feasible for some template with (t, l) under ``psi``."""
    cg = ColoredGroups(ctx, psi)
    if len(cg.by_color) != l or any(not gs for gs in cg.by_color):
        return None  # a color without initial clusters cannot host a W-node
    if templates is None:
        templates = enumerate_forest_templates(t, l)
    if cache is None:
        cache = {}  # node tables for this coloring, keyed by rooted subtree
    full = (1 << l) - 1
    best = None
    for f in templates:
        if template_lower_bound(f) > ctx.B:
            continue
        trees = [tree_dp(ctx, cg, comp, cache) for comp in f.components]
        hit = combine_components([tt.root for tt in trees], full, ctx.k, ctx.B)
        if hit is not None and (best is None or hit[0] < best[0]):
            best = (hit[0], hit[1], trees, f)
    if best is None:
        return None
    cost, parts, trees, f = best
    clustering = reconstruct(ctx, cg, parts, trees)
    if clustering.cost > cost:
        raise DPError(f"reconstructed cost {clustering.cost} exceeds DP value {cost}")
    return ColorfulResult(cost, clustering, f)


def solve_t_zero(instance: Instance, init: InitialClustering | None = None):
    """Solution made only of simple clusters (cost 0), if the sizes allow it."""
    c = instance.constraint
    if init is None:
        init = initial_clusters(instance.matrix)
    sizes = init.sizes
    if not simple_split_feasible(sizes, instance.k, c.p, c.q):
        return None
    counts = distribute_blocks(sizes, instance.k, c.p, c.q)
    clusters = []
    for group, cnt in zip(init.groups, counts):
        clusters.extend(split_into_blocks(group, cnt, c.p, c.q))
    return make_clustering(instance.matrix, clusters)


@dataclass
class SolveStats:
    colorings: int = 0
    templates: int = 0
    accepted_at: tuple | None = None


# worker-process state for parallel coloring search
_WORKER: dict = {}


def _worker_init(ctx: SolverContext) -> None:
    _WORKER["ctx"] = ctx


def _worker_task(args):
    l, psi, templates = args  # noqa: E741
    return colorful_solve(_WORKER["ctx"], 0, l, psi, templates)


def _unique_colorings(family):
    seen = set()
    for psi in family:
        psi = canonical_coloring(psi)
        if psi not in seen:
            seen.add(psi)
            yield psi


def solve(instance: Instance, coloring: str = "perfect", trials: int | None = None, seed: int = 0,
          medians: CandidateMedianSet | None = None, stats: SolveStats | None = None,
          workers: int = 1) -> Clustering | None:
    """Decide whether a clustering of cost <= B with sizes in [p, q] exists.

    ``coloring`` picks the family of colorings tried per l:
    ``perfect`` and ``exhaustive`` are deterministic and exact; ``random``
    may miss a solution but never reports one that does not exist.
    Returns a witness (with recomputed majority-median cost) or None.

    With ``workers > 1`` colorings are solved in batches by a process pool;
    the first accepting coloring in family order wins, so the witness does
    not depend on ``workers``.
    """
    c = instance.constraint
    if not isinstance(c, Capacitated):
        raise InstanceError("solve expects a Capacitated constraint; see catclust.variants")
    n, k, B = instance.n, instance.k, instance.B
    if k * c.p > n or k * c.q < n:
        return None
    if stats is None:
        stats = SolveStats()
    init = initial_clusters(instance.matrix)
    witness = solve_t_zero(instance, init)
    if witness is not None:
        stats.accepted_at = (0, 0)
        return witness
    if B == 0:
        return None
    ctx = SolverContext(instance, c.p, c.q, init, medians or candidate_medians(instance.matrix, B, init))
    s = init.s
    if workers > 1:
        with ProcessPoolExecutor(workers, initializer=_worker_init, initargs=(ctx,)) as pool:
            return _search(ctx, coloring, trials, seed, stats, s, pool, workers)
    return _search(ctx, coloring, trials, seed, stats, s, None, 1)


def _accept(stats: SolveStats, res, l: int, psi) -> Clustering:  # noqa: E741
    stats.accepted_at = (res.template.t, l)
    log.debug("accepted t=%d l=%d psi=%s cost=%d", res.template.t, l, psi, res.cost)
    return res.clustering


def _search(ctx: SolverContext, coloring, trials, seed, stats, s, pool, workers):
    k, B = ctx.k, ctx.B
    # all t share one coloring loop per l, so equal subtrees are solved once
    for l in range(2, min(2 * B, s) + 1):  # noqa: E741
        templates = [f for t in range(1, min(B, k, l - 1) + 1)
                     for f in enumerate_forest_templates(t, l) if template_lower_bound(f) <= B]
        if not templates:
            continue
        n_trials = trials if trials is not None else (default_trials(l) if coloring == "random" else None)
        if coloring == "exhaustive":
            # colors are interchangeable and unused colors never succeed,
            # so one surjective coloring per renaming class covers l**s
            family = surjective_colorings(s, l)
        else:
            family = coloring_family(s, l, coloring, trials=n_trials, seed=_mix_seed(seed, l))
        if pool is None:
            for psi in _unique_colorings(family):
                stats.colorings += 1
                stats.templates += len(templates)
                res = colorful_solve(ctx, 0, l, psi, templates)
                if res is not None:
                    return _accept(stats, res, l, psi)
            continue
        psis = _unique_colorings(family)
        while True:
            batch = list(islice(psis, 4 * workers))
            if not batch:
                break
            stats.colorings += len(batch)
            stats.templates += len(batch) * len(templates)
            results = pool.map(_worker_task, [(l, psi, templates) for psi in batch])
            for psi, res in zip(batch, results):
                if res is not None:
                    return _accept(stats, res, l, psi)
    return None


def _mix_seed(seed: int, l: int) -> int:  # noqa: E741
    """Independent, reproducible stream per l derived from one 64-bit seed."""
    return (seed * 1_000_003 + l) % (1 << 64)


def minimum_cost(instance: Instance, **kw) -> int | None:
    """Smallest budget (up to instance.B) the solver accepts; a convenience wrapper."""
    for b in range(instance.B + 1):
        if solve(instance.with_budget(b), **kw) is not None:
            return b
    return None


__all__ = [
    "SolverContext",
    "ColoredGroups",
    "tree_dp",
    "tree_value",
    "combine_components",
    "colorful_solve",
    "reconstruct",
    "solve",
    "solve_t_zero",
    "minimum_cost",
    "SolveStats",
    "DPError",
]
