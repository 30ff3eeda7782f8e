"""Communication graphs and the combinatorial quantities regret bounds use.

Vertices are ``0..n-1``. Every greedy routine breaks ties by ascending vertex
index, so all results are deterministic.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ExactSolverLimitError, ValidationError

EXACT_ALPHA_LIMIT = 40


@dataclass(frozen=True)
class Graph:
    """Immutable undirected simple graph on vertices ``0..n-1``.

    ``edges`` holds normalized pairs ``(u, v)`` with ``u < v``. Use
    :func:`build_graph` to construct one from an arbitrary edge list.
    """

    n: int
    edges: frozenset

    def __post_init__(self):
        if self.n < 0:
            raise ValidationError(f"vertex count must be nonnegative, got {self.n}")
        for u, v in self.edges:
            if not (0 <= u < v < self.n):
                raise ValidationError(f"edge ({u}, {v}) is not normalized for n={self.n}")

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def neighbors(self) -> tuple[frozenset, ...]:
        adj = [set() for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return tuple(frozenset(a) for a in adj)

    @cached_property
    def adjacency_bits(self) -> tuple[int, ...]:
        """Open neighborhoods as integer bitsets."""
        bits = [0] * self.n
        for u, v in self.edges:
            bits[u] |= 1 << v
            bits[v] |= 1 << u
        return tuple(bits)

    @cached_property
    def closed_adjacency(self) -> np.ndarray:
        """Boolean ``(n, n)`` matrix with ``A[v, w]`` true iff ``w`` is in N_v."""
        a = np.eye(self.n, dtype=bool)
        for u, v in self.edges:
            a[u, v] = a[v, u] = True
        a.setflags(write=False)
        return a

    def degree(self, v: int) -> int:
        return len(self.neighbors[v])

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.edges

    def closed_neighborhood(self, v: int) -> frozenset:
        return closed_neighborhood(self, v)

    def induced_subgraph(self, vertices: Iterable[int]) -> tuple["Graph", list[int]]:
        """Subgraph on ``vertices`` relabeled ``0..k-1``; also returns the old labels."""
        keep = sorted(set(vertices))
        index = {v: i for i, v in enumerate(keep)}
        edges = [(index[u], index[v]) for u, v in self.edges if u in index and v in index]
        return build_graph(len(keep), edges), keep


@dataclass(frozen=True)
class CliqueCover:
    """Partition of the vertex set into cliques."""

    blocks: tuple[frozenset, ...]

    def __len__(self) -> int:
        return len(self.blocks)

    def block_of(self, v: int) -> frozenset:
        for b in self.blocks:
            if v in b:
                return b
        raise ValidationError(f"vertex {v} is not covered")

    def labels(self, n: int) -> np.ndarray:
        """Block index of each vertex as an int array of length ``n``."""
        lab = np.full(n, -1, dtype=np.int64)
        for i, b in enumerate(self.blocks):
            lab[list(b)] = i
        return lab

    def validate(self, g: Graph) -> None:
        seen: set = set()
        for b in self.blocks:
            if not b:
                raise ValidationError("clique cover contains an empty block")
            if seen & b:
                raise ValidationError(f"clique cover blocks overlap on {sorted(seen & b)}")
            seen |= b
            for u, v in itertools.combinations(sorted(b), 2):
                if not g.has_edge(u, v):
                    raise ValidationError(f"block {sorted(b)} is not a clique: missing edge ({u}, {v})")
        if seen != set(range(g.n)):
            raise ValidationError(f"clique cover misses vertices {sorted(set(range(g.n)) - seen)}")


def build_graph(n: int, edge_list: Iterable[Sequence[int]]) -> Graph:
    """Normalize an edge list: deduplicate unordered pairs, reject self-loops."""
    if n < 0:
        raise ValidationError(f"vertex count must be nonnegative, got {n}")
    edges = set()
    for pair in edge_list:
        u, v = (int(x) for x in pair)
        if not (0 <= u < n and 0 <= v < n):
            raise ValidationError(f"edge ({u}, {v}) has an endpoint outside 0..{n - 1}")
        if u == v:
            raise ValidationError(f"self-loop at vertex {u}")
        edges.add((min(u, v), max(u, v)))
    return Graph(n, frozenset(edges))


def closed_neighborhood(g: Graph, v: int) -> frozenset:
    if not 0 <= v < g.n:
        raise IndexError(f"vertex {v} out of range for n={g.n}")
    return g.neighbors[v] | {v}


def _lowest_bit(x: int) -> int:
    return (x & -x).bit_length() - 1


def independence_number_exact(g: Graph, limit: int = EXACT_ALPHA_LIMIT) -> int:
    """Exact independence number by branch and bound.

    Raises :class:`ExactSolverLimitError` when ``g.n > limit``; there is no
    silent heuristic fallback.
    """
    return len(maximum_independent_set(g, limit=limit))


def maximum_independent_set(g: Graph, limit: int = EXACT_ALPHA_LIMIT) -> frozenset:
    """A maximum independent set (the lexicographically first one found).

    Searches cliques of the complement graph. The pruning bound is the size
    of a greedy partition of the candidate set into cliques of ``g``: an
    independent set takes at most one vertex from each.
    """
    if g.n > limit:
        raise ExactSolverLimitError(
            f"exact independence number refused for n={g.n} > limit {limit}; use a heuristic explicitly"
        )
    n = g.n
    if n == 0:
        return frozenset()
    adj = g.adjacency_bits
    full = (1 << n) - 1
    compatible = [full & ~adj[v] & ~(1 << v) for v in range(n)]

    best: list[int] = []

    def expand(cand: int, chosen: list[int]) -> None:
        nonlocal best
        order: list[int] = []
        bounds: list[int] = []
        rest = cand
        k = 0
        while rest:
            k += 1
            pool = rest
            while pool:
                v = _lowest_bit(pool)
                pool &= adj[v]
                rest &= ~(1 << v)
                order.append(v)
                bounds.append(k)
        for i in range(len(order) - 1, -1, -1):
            if len(chosen) + bounds[i] <= len(best):
                return
            v = order[i]
            chosen.append(v)
            sub = cand & compatible[v]
            if sub:
                expand(sub, chosen)
            elif len(chosen) > len(best):
                best = list(chosen)
            chosen.pop()
            cand &= ~(1 << v)

    expand(full, [])
    return frozenset(best)


def independence_number_bruteforce(g: Graph) -> int:
    """Exhaustive search over all vertex subsets; for tests and tiny graphs."""
    adj = g.adjacency_bits
    best = 0
    for mask in range(1 << g.n):
        size = bin(mask).count("1")
        if size <= best:
            continue
        m = mask
        ok = True
        while m:
            v = _lowest_bit(m)
            if adj[v] & mask:
                ok = False
                break
            m &= m - 1
        if ok:
            best = size
    return best


def maximal_independent_set(g: Graph) -> frozenset:
    """Greedy maximal independent set, scanning vertices in ascending order."""
    chosen: set = set()
    blocked: set = set()
    for v in range(g.n):
        if v not in blocked:
            chosen.add(v)
            blocked |= g.neighbors[v]
            blocked.add(v)
    return frozenset(chosen)


def greedy_clique_cover(g: Graph) -> CliqueCover:
    """Partition vertices into cliques greedily.

    The lowest uncovered vertex opens a block; uncovered vertices are then
    scanned in ascending order and joined when adjacent to every member.
    """
    covered = [False] * g.n
    blocks = []
    for v in range(g.n):
        if covered[v]:
            continue
        block = [v]
        covered[v] = True
        common = set(g.neighbors[v])
        for w in range(v + 1, g.n):
            if not covered[w] and w in common:
                block.append(w)
                covered[w] = True
                common &= g.neighbors[w]
        blocks.append(frozenset(block))
    return CliqueCover(tuple(blocks))


def minimum_clique_cover_size(g: Graph, limit: int = 12) -> int:
    """Exact clique-cover number by enumeration over set partitions (small graphs only)."""
    if g.n > limit:
        raise ExactSolverLimitError(f"exact clique cover refused for n={g.n} > limit {limit}")
    # clique cover of g == proper coloring of the complement
    adj = g.adjacency_bits
    best = g.n

    def assign(v: int, blocks: list[int]) -> None:
        nonlocal best
        if len(blocks) >= best:
            return
        if v == g.n:
            best = len(blocks)
            return
        for i, b in enumerate(blocks):
            if b & ~adj[v] == 0:
                blocks[i] = b | (1 << v)
                assign(v + 1, blocks)
                blocks[i] = b
        blocks.append(1 << v)
        assign(v + 1, blocks)
        blocks.pop()

    if g.n == 0:
        return 0
    assign(0, [])
    return best


def greedy_dominating_set(g: Graph) -> frozenset:
    """Greedy dominating set: repeatedly take the vertex covering most undominated vertices."""
    undominated = set(range(g.n))
    chosen = set()
    while undominated:
        v = max(range(g.n), key=lambda u: (len(closed_neighborhood(g, u) & undominated), -u))
        chosen.add(v)
        undominated -= closed_neighborhood(g, v)
    return frozenset(chosen)


def inverse_neighborhood_sum(g: Graph) -> float:
    """Sum over vertices of 1/|N_v|."""
    return float(sum(1.0 / (g.degree(v) + 1) for v in range(g.n)))


def star(n: int) -> Graph:
    """Star with center 0 and leaves ``1..n-1``."""
    return build_graph(n, [(0, i) for i in range(1, n)])


def cycle(n: int) -> Graph:
    if n < 3:
        raise ValidationError(f"cycle needs n >= 3, got {n}")
    return build_graph(n, [(i, (i + 1) % n) for i in range(n)])


def path(n: int) -> Graph:
    return build_graph(n, [(i, i + 1) for i in range(n - 1)])


def complete(n: int) -> Graph:
    return build_graph(n, itertools.combinations(range(n), 2))


def edgeless(n: int) -> Graph:
    return build_graph(n, [])


def disjoint_cliques(count: int, size: int) -> Graph:
    """Disjoint union of ``count`` cliques of ``size`` vertices; independence number ``count``."""
    if count < 1 or size < 1:
        raise ValidationError(f"need count >= 1 and size >= 1, got {count}, {size}")
    edges = []
    for c in range(count):
        base = c * size
        edges.extend((base + i, base + j) for i, j in itertools.combinations(range(size), 2))
    return build_graph(count * size, edges)


def gnp(n: int, p: float, seed: int = 0) -> Graph:
    """Erdos-Renyi graph; pair ``(u, v)`` is kept iff its uniform draw is below ``p``."""
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"gnp edge probability must lie in [0, 1], got {p}")
    rng = np.random.default_rng(seed)
    pairs = list(itertools.combinations(range(n), 2))
    draws = rng.random(len(pairs))
    return build_graph(n, [e for e, u in zip(pairs, draws) if u < p])


_GENERATORS = {
    "star": star,
    "cycle": cycle,
    "path": path,
    "complete": complete,
    "edgeless": edgeless,
    "cliques": disjoint_cliques,
    "gnp": gnp,
}


def generate(kind: str, seed: int = 0, **params) -> Graph:
    """Build a named graph family, e.g. ``generate("gnp", n=10, p=0.3, seed=1)``."""
    try:
        fn = _GENERATORS[kind]
    except KeyError:
        raise ValidationError(f"unknown graph kind {kind!r}; expected one of {sorted(_GENERATORS)}") from None
    if kind == "gnp":
        params["seed"] = seed
    try:
        return fn(**params)
    except TypeError as exc:
        raise ValidationError(f"bad parameters for graph kind {kind!r}: {exc}") from None


def verify_ratio_bound(g: Graph, q: Sequence[float], alpha: int | None = None) -> dict:
    """Check sum_v q_v / Q_v <= alpha, where Q_v is the mass of the closed neighborhood."""
    q = np.asarray(q, dtype=float)
    if q.shape != (g.n,):
        raise ValidationError(f"q must have length {g.n}, got shape {q.shape}")
    if np.any(q < 0) or abs(q.sum() - 1.0) > 1e-12:
        raise ValidationError("q must be a probability distribution (nonnegative, sum 1 within 1e-12)")
    mass = g.closed_adjacency.astype(float) @ q
    zero = np.flatnonzero(mass <= 0)
    if zero.size:
        raise ValidationError(f"closed-neighborhood mass is zero at vertex {int(zero[0])}")
    total = float(np.sum(q / mass))
    if alpha is None:
        alpha = independence_number_exact(g)
    return {"sum": total, "alpha": alpha, "holds": total <= alpha + 1e-9}


def read_edge_list(path: str | Path) -> Graph:
    """Parse the edge-list text format: ``n m`` header, then ``m`` lines ``u v``.

    Lines starting with ``#`` and blank lines are ignored.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"graph file not found: {path}")
    rows = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValidationError(f"{path}:{lineno}: expected two integers, got {raw!r}")
        try:
            rows.append((lineno, int(parts[0]), int(parts[1])))
        except ValueError:
            raise ValidationError(f"{path}:{lineno}: expected two integers, got {raw!r}") from None
    if not rows:
        raise ValidationError(f"{path}: missing 'n m' header")
    _, n, m = rows[0]
    body = rows[1:]
    if len(body) != m:
        raise ValidationError(f"{path}: header declares {m} edges but {len(body)} follow")
    edges = []
    for lineno, u, v in body:
        if not (0 <= u < n and 0 <= v < n) or u == v:
            raise ValidationError(f"{path}:{lineno}: invalid edge ({u}, {v}) for n={n}")
        edges.append((u, v))
    return build_graph(n, edges)


def write_edge_list(g: Graph, path: str | Path) -> None:
    lines = [f"{g.n} {g.m}"] + [f"{u} {v}" for u, v in sorted(g.edges)]
    Path(path).write_text("\n".join(lines) + "\n")
