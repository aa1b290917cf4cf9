"""Block-split feasibility, forest templates and coloring families."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product

import numpy as np

from .core import ResourceError

EXHAUSTIVE_CAP = 200_000


# -- splitting identical columns into blocks --------------------------------


def block_partition_feasible(size: int, h: int, p: int, q: int) -> bool:
    """Can ``size`` items be split into exactly ``h`` blocks of sizes in [p, q]?"""
    return -(-size // q) <= h <= size // p


def split_bounds(size: int, p: int, q: int):
    """(fewest, most) blocks for ``size`` items, or None if no split exists."""
    lo, hi = -(-size // q), size // p
    return (lo, hi) if lo <= hi else None


def simple_split_feasible(group_sizes, h: int, p: int, q: int) -> bool:
    lo = hi = 0
    for size in group_sizes:
        b = split_bounds(size, p, q)
        if b is None:
            return False
        lo += b[0]
        hi += b[1]
    return lo <= h <= hi


def split_into_blocks(items, h: int, p: int, q: int) -> list[list]:
    """Split ``items`` into ``h`` blocks of sizes in [p, q]: p each, then top up greedily."""
    items = list(items)
    if not block_partition_feasible(len(items), h, p, q):
        raise ValueError(f"cannot split {len(items)} items into {h} blocks of size {p}..{q}")
    sizes = [p] * h
    extra = len(items) - p * h
    for i in range(h):
        add = min(extra, q - p)
        sizes[i] += add
        extra -= add
    out, pos = [], 0
    for sz in sizes:
        out.append(items[pos:pos + sz])
        pos += sz
    return out


def distribute_blocks(group_sizes, h: int, p: int, q: int) -> list[int]:
    """Per-group block counts summing to ``h`` (each within its split bounds)."""
    bounds = [split_bounds(s, p, q) for s in group_sizes]
    if any(b is None for b in bounds):
        raise ValueError("some group cannot be split")
    counts = [b[0] for b in bounds]
    rest = h - sum(counts)
    for i, b in enumerate(bounds):
        add = min(rest, b[1] - b[0])
        counts[i] += add
        rest -= add
    if rest != 0:
        raise ValueError(f"cannot reach {h} blocks")
    return counts


# -- forest templates -------------------------------------------------------


@dataclass(frozen=True)
class TreeTemplate:
    """A tree with U/W labelled nodes, rooted at a U node (node 0).

    ``parent[v]`` is -1 for the root; nodes are listed in preorder.
    """

    kinds: tuple[str, ...]
    parent: tuple[int, ...]
    canon: str

    @property
    def t(self) -> int:
        return self.kinds.count("U")

    @property
    def l(self) -> int:  # noqa: E743
        return self.kinds.count("W")

    @property
    def size(self) -> int:
        return len(self.kinds)

    def children(self) -> list[list[int]]:
        ch = [[] for _ in self.kinds]
        for v, par in enumerate(self.parent):
            if par >= 0:
                ch[par].append(v)
        return ch

    def edges(self) -> list[tuple[int, int]]:
        return [(par, v) for v, par in enumerate(self.parent) if par >= 0]


@dataclass(frozen=True)
class ForestTemplate:
    t: int
    l: int  # noqa: E741
    components: tuple[TreeTemplate, ...]

    @property
    def kinds(self) -> list[str]:
        return [k for c in self.components for k in c.kinds]

    def edges(self) -> list[tuple[int, int]]:
        out, base = [], 0
        for c in self.components:
            out.extend((a + base, b + base) for a, b in c.edges())
            base += c.size
        return out

    @property
    def roots(self) -> list[int]:
        out, base = [], 0
        for c in self.components:
            out.append(base)
            base += c.size
        return out


def _parse(encoding: str):
    """Inverse of the rooted encoding: returns (kinds, parent) in preorder."""
    kinds, parent, stack = [], [], []
    for ch in encoding:
        if ch in "uw":
            kinds.append(ch.upper())
            parent.append(stack[-1] if stack else -1)
        elif ch == "(":
            stack.append(len(kinds) - 1)
        elif ch == ")":
            stack.pop()
    return kinds, parent


def _rooted_encoding(kinds, adj, root: int) -> str:
    def enc(v, par):
        subs = sorted(enc(u, v) for u in adj[v] if u != par)
        return kinds[v].lower() + "(" + "".join(subs) + ")"

    return enc(root, -1)


def _multisets(pool, count_range, t_total, l_total):
    """Sorted multisets of (t, l, encoding) items whose t and l sum to the totals."""
    lo, hi = count_range
    out = []

    def rec(start, chosen, t_left, l_left):
        if t_left == 0 and l_left == 0 and lo <= len(chosen) <= hi:
            out.append(tuple(chosen))
        if len(chosen) >= hi:
            return
        for i in range(start, len(pool)):
            ti, li, _ = pool[i]
            if ti <= t_left and li <= l_left:
                chosen.append(pool[i])
                rec(i, chosen, t_left - ti, l_left - li)
                chosen.pop()

    rec(0, [], t_total, l_total)
    return out


@lru_cache(maxsize=None)
def _w_rooted(t: int, l: int) -> tuple[str, ...]:  # noqa: E741
    """Encodings of W-rooted subtrees with t U-nodes and l W-nodes (root included)."""
    if l < 1:
        return ()
    if t == 0:
        return ("w()",) if l == 1 else ()
    pool = [(ti, li, e) for ti in range(1, t + 1) for li in range(1, l)
            for e in _u_rooted(ti, li, 1)]
    res = set()
    for ms in _multisets(pool, (1, t), t, l - 1):
        res.add("w(" + "".join(sorted(e for _, _, e in ms)) + ")")
    return tuple(sorted(res))


@lru_cache(maxsize=None)
def _u_rooted(t: int, l: int, min_children: int) -> tuple[str, ...]:  # noqa: E741
    """U-rooted subtrees; every W below the root is reachable, leaves are W."""
    if t < 1 or l < min_children:
        return ()
    pool = [(ti, li, e) for ti in range(0, t) for li in range(1, l + 1)
            for e in _w_rooted(ti, li)]
    res = set()
    for ms in _multisets(pool, (min_children, l), t - 1, l):
        res.add("u(" + "".join(sorted(e for _, _, e in ms)) + ")")
    return tuple(sorted(res))


def _canonical_tree(encoding: str) -> TreeTemplate:
    kinds, parent = _parse(encoding)
    adj = [[] for _ in kinds]
    for v, par in enumerate(parent):
        if par >= 0:
            adj[v].append(par)
            adj[par].append(v)
    # root at the U vertex whose rooted encoding is smallest
    best = min(_rooted_encoding(kinds, adj, v) for v in range(len(kinds)) if kinds[v] == "U")
    kinds, parent = _parse(best)
    return TreeTemplate(tuple(kinds), tuple(parent), best)


@lru_cache(maxsize=None)
def tree_templates(t: int, l: int) -> tuple[TreeTemplate, ...]:  # noqa: E741
    """Non-isomorphic trees with t U-nodes, l W-nodes, all leaves in W."""
    seen = {}
    for enc in _u_rooted(t, l, 2):
        tree = _canonical_tree(enc)
        seen.setdefault(tree.canon, tree)
    return tuple(seen[c] for c in sorted(seen))


@lru_cache(maxsize=None)
def enumerate_forest_templates(t: int, l: int) -> tuple[ForestTemplate, ...]:  # noqa: E741
    """All forests of t U-nodes and l W-nodes whose leaves are W and components have >= 3 nodes."""
    if t < 1 or l < t + 1:
        return ()
    pool = [(ti, li, tree) for ti in range(1, t + 1) for li in range(ti + 1, l + 1)
            for tree in tree_templates(ti, li)]
    pool.sort(key=lambda x: (x[0], x[1], x[2].canon))
    keyed = [(ti, li, i) for i, (ti, li, _) in enumerate(pool)]
    out = []
    for ms in _multisets(keyed, (1, t), t, l):
        out.append(ForestTemplate(t, l, tuple(pool[i][2] for _, _, i in ms)))
    out.sort(key=lambda f: tuple((c.t, c.l, c.canon) for c in f.components))
    return tuple(out)


def check_template(f: ForestTemplate) -> None:
    """Raise AssertionError unless ``f`` satisfies every template invariant."""
    kinds = f.kinds
    assert kinds.count("U") == f.t and kinds.count("W") == f.l
    deg = [0] * len(kinds)
    for a, b in f.edges():
        assert {kinds[a], kinds[b]} == {"U", "W"}, "edge inside one side"
        deg[a] += 1
        deg[b] += 1
    for c in f.components:
        assert c.size >= 3
        assert len(c.edges()) == c.size - 1  # connected via parent pointers, so a tree
        assert c.kinds[0] == "U"
    for v, d in enumerate(deg):
        if d <= 1:
            assert kinds[v] == "W", "leaf outside W"


# -- colorings --------------------------------------------------------------


def default_trials(l: int) -> int:  # noqa: E741
    """Random colorings needed for a >= 75% chance of hitting a rainbow one."""
    return math.ceil(math.exp(l) * math.log(4))


def coloring_family(s: int, l: int, mode: str = "exhaustive", trials: int | None = None,  # noqa: E741
                    seed: int = 0, cap: int = EXHAUSTIVE_CAP):
    """Yield colorings of s initial clusters with colors 0..l-1, as tuples.

    ``exhaustive``: all l**s maps (refused above ``cap``).
    ``perfect``: one map per l-subset of clusters, injective on that subset;
    the smallest family with the same completeness guarantee.
    ``random``: ``trials`` uniform maps from a PCG64 stream seeded with ``seed``.
    """
    if s < 1 or l < 1:
        raise ValueError("s and l must be positive")
    if mode == "exhaustive":
        if l ** s > cap:
            raise ResourceError(f"{l}**{s} colorings exceed the cap of {cap}; use random mode")
        yield from product(range(l), repeat=s)
    elif mode == "perfect":
        for subset in combinations(range(s), l):
            psi = [0] * s
            for color, g in enumerate(subset):
                psi[g] = color
            yield tuple(psi)
    elif mode == "random":
        if trials is None:
            trials = default_trials(l)
        rng = np.random.Generator(np.random.PCG64(seed))
        for _ in range(trials):
            yield tuple(int(c) for c in rng.integers(0, l, size=s))
    else:
        raise ValueError(f"unknown coloring mode {mode!r}")


def surjective_colorings(s: int, l: int):  # noqa: E741
    """Every coloring of s clusters onto exactly l colors, one per renaming class.

    These are the restricted-growth strings with l blocks: exactly the
    distinct canonical forms of the exhaustive family that use every color.
    """
    if l < 1 or s < l:
        return
    a = [0] * s

    def rec(i, top):
        if s - i < l - 1 - top:
            return  # not enough positions left to open the remaining colors
        if i == s:
            yield tuple(a)
            return
        for v in range(min(top + 2, l)):
            a[i] = v
            yield from rec(i + 1, max(top, v))

    yield from rec(1, 0)


def canonical_coloring(psi) -> tuple[int, ...]:
    """Relabel colors by first appearance; colorings equal up to renaming collapse."""
    relabel: dict[int, int] = {}
    return tuple(relabel.setdefault(c, len(relabel)) for c in psi)
