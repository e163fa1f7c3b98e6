"""Observer networks as hypergraphs.

Vertices are qubits (one per observer) and every hyperedge is the set of
observers taking part in one Bell test.  Besides the value type this module
provides canonical labelling by exhaustive permutation, isomorphism-class
enumeration, line graphs, pattern embeddings and DOT export.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb

import numpy as np

MAX_ENUM_VERTICES = 8


class TopologyError(ValueError):
    """Invalid hypergraph or unsupported request."""


class SizeError(TopologyError):
    """Request exceeds the desk-scale caps."""


@dataclass(frozen=True)
class Hypergraph:
    n: int
    edges: tuple[tuple[int, ...], ...]

    def __init__(self, n, edges):
        n = int(n)
        normed = []
        for e in edges:
            t = tuple(sorted(int(v) for v in e))
            if len(t) < 2:
                raise TopologyError(f"hyperedge {t} has fewer than 2 vertices")
            if len(set(t)) != len(t):
                raise TopologyError(f"hyperedge {t} repeats a vertex")
            if t[0] < 0 or t[-1] >= n:
                raise TopologyError(f"hyperedge {t} out of range for n={n}")
            normed.append(t)
        normed.sort()
        for a, b in zip(normed, normed[1:]):
            if a == b:
                raise TopologyError(f"duplicate hyperedge {a}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "edges", tuple(normed))

    @property
    def h(self) -> int:
        return len(self.edges)

    @property
    def arities(self) -> set[int]:
        return {len(e) for e in self.edges}

    @property
    def arity(self) -> int:
        """Common edge arity; raises for mixed-arity networks."""
        ar = self.arities
        if len(ar) != 1:
            raise TopologyError(f"mixed or empty arity {sorted(ar)}")
        return next(iter(ar))

    def covered(self) -> set[int]:
        return {v for e in self.edges for v in e}

    @property
    def isolated(self) -> list[int]:
        cov = self.covered()
        return [v for v in range(self.n) if v not in cov]

    @property
    def connected(self) -> bool:
        """True when the covered vertices form one component (isolated vertices ignored)."""
        if not self.edges:
            return False
        parent = {v: v for v in self.covered()}

        def find(v):
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        for e in self.edges:
            r = find(e[0])
            for v in e[1:]:
                parent[find(v)] = r
        return len({find(v) for v in parent}) == 1

    def edge_index(self, edge) -> int:
        return self.edges.index(tuple(sorted(edge)))

    def relabel(self, perm) -> "Hypergraph":
        """Image under the vertex map ``v -> perm[v]``."""
        return Hypergraph(self.n, [[perm[v] for v in e] for e in self.edges])

    def to_dict(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in self.edges]}

    @classmethod
    def from_dict(cls, d) -> "Hypergraph":
        try:
            return cls(d["n"], d["edges"])
        except (KeyError, TypeError) as exc:
            raise TopologyError(f"malformed hypergraph record: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "Hypergraph":
        return cls.from_dict(json.loads(text))

    def __str__(self):
        return "{" + ",".join("{" + ",".join(map(str, e)) + "}" for e in self.edges) + f"}}/n={self.n}"


@dataclass(frozen=True)
class Link:
    members: tuple[int, ...]
    pattern: str
    weight: Fraction = Fraction(1)


@dataclass(frozen=True)
class LineStructure:
    """Line (hyper)graph: one vertex per base hyperedge, links mark overlapping tests."""

    base: Hypergraph
    links: tuple[Link, ...]

    @property
    def vertices(self) -> range:
        return range(self.base.h)

    @property
    def epsilon(self) -> int:
        return len(self.links)

    def degrees(self) -> list[int]:
        d = [0] * self.base.h
        for link in self.links:
            for v in link.members:
                d[v] += 1
        return d


@dataclass(frozen=True)
class Embedding:
    """Injective placement of a pattern hypergraph into a network.

    ``edge_map[i]`` is the index of the network edge that pattern edge ``i``
    lands on; ``vertex_map[v]`` is the network vertex of pattern vertex ``v``.
    """

    pattern: str
    edge_map: tuple[int, ...]
    vertex_map: tuple[int, ...]

    @property
    def image(self) -> frozenset[int]:
        return frozenset(self.edge_map)

    def to_dict(self) -> dict:
        return {"pattern": self.pattern, "edge_map": list(self.edge_map),
                "vertex_map": list(self.vertex_map)}

    @classmethod
    def from_dict(cls, d) -> "Embedding":
        return cls(d["pattern"], tuple(d["edge_map"]), tuple(d["vertex_map"]))


# --- canonical labelling -------------------------------------------------

@lru_cache(maxsize=None)
def _perm_table(n: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(n))), dtype=np.int64).reshape(-1, n)


def _canonical_uniform(H: Hypergraph) -> tuple[tuple[int, ...], ...]:
    # Sorted tuples of one arity compare like their base-n integer codes.
    n, m = H.n, H.arity
    perms = _perm_table(n)
    E = np.array(H.edges, dtype=np.int64)
    img = np.sort(perms[:, E], axis=2)                   # (P, h, m)
    weights = n ** np.arange(m - 1, -1, -1, dtype=np.int64)
    codes = np.sort(img @ weights, axis=1)               # (P, h)
    best = codes[np.lexsort(codes.T[::-1])[0]]
    out = []
    for c in best:
        digits = []
        for _ in range(m):
            digits.append(int(c % n))
            c //= n
        out.append(tuple(reversed(digits)))
    return tuple(out)


def canonical_form(H: Hypergraph) -> Hypergraph:
    """Lexicographically smallest edge list over all vertex permutations."""
    if H.n > MAX_ENUM_VERTICES:
        raise SizeError(f"canonical_form is exhaustive; n={H.n} too large")
    if not H.edges:
        return H
    if len(H.arities) == 1:
        return Hypergraph(H.n, _canonical_uniform(H))
    best = None
    for p in itertools.permutations(range(H.n)):
        cand = sorted(tuple(sorted(p[v] for v in e)) for e in H.edges)
        if best is None or cand < best:
            best = cand
    return Hypergraph(H.n, best)


def is_isomorphic(a: Hypergraph, b: Hypergraph) -> bool:
    return a.n == b.n and a.h == b.h and canonical_form(a) == canonical_form(b)


def enumerate_hypergraphs(n: int, h: int, m: int, require_cover: bool = True) -> list[Hypergraph]:
    """One canonical representative per isomorphism class of m-uniform hypergraphs.

    Classes are grown edge by edge from the canonical classes with one edge
    fewer, which reaches every class.  With ``require_cover`` the classes that
    leave a vertex isolated are dropped.  Output is sorted by edge list.
    """
    if not 2 <= m <= n:
        raise TopologyError(f"need 2 <= m <= n, got m={m}, n={n}")
    if n > MAX_ENUM_VERTICES:
        raise SizeError(f"enumeration capped at n <= {MAX_ENUM_VERTICES}, got {n}")
    all_edges = list(itertools.combinations(range(n), m))
    if not 1 <= h <= len(all_edges):
        raise TopologyError(f"need 1 <= h <= C({n},{m}) = {len(all_edges)}, got {h}")
    level = {canonical_form(Hypergraph(n, [all_edges[0]]))}
    for _ in range(h - 1):
        nxt = set()
        for G in level:
            present = set(G.edges)
            for e in all_edges:
                if e not in present:
                    nxt.add(canonical_form(Hypergraph(n, G.edges + (e,))))
        level = nxt
    out = sorted(level, key=lambda G: G.edges)
    if require_cover:
        out = [G for G in out if not G.isolated]
    return out


# --- line graphs and embeddings -----------------------------------------

BIPARTITE_PATTERN = "pair"


def line_graph(G: Hypergraph) -> LineStructure:
    """Line graph of a graph: link every pair of edges sharing a vertex."""
    if G.edges and G.arities != {2}:
        raise TopologyError("line_graph expects a graph with arity-2 edges only")
    links = []
    for i, j in itertools.combinations(range(G.h), 2):
        if set(G.edges[i]) & set(G.edges[j]):
            links.append(Link((i, j), BIPARTITE_PATTERN, Fraction(1)))
    return LineStructure(G, tuple(links))


def line_structure(G: Hypergraph, embeddings, weights=None) -> LineStructure:
    """Line hypergraph whose links are the images of the given embeddings."""
    embeddings = list(embeddings)
    weights = [Fraction(1)] * len(embeddings) if weights is None else [Fraction(w) for w in weights]
    links = tuple(Link(tuple(sorted(e.edge_map)), e.pattern, w) for e, w in zip(embeddings, weights))
    return LineStructure(G, links)


def find_embeddings(G: Hypergraph, pattern: Hypergraph, name: str = "") -> list[Embedding]:
    """All placements of ``pattern`` onto edges of ``G``, one per image edge set.

    Pattern edges are placed in order onto unused network edges; each
    placement extends an injective vertex map consistently.  Isolated
    pattern vertices are not supported (they would be unconstrained).
    """
    if pattern.isolated:
        raise TopologyError("pattern has isolated vertices")
    if not pattern.edges:
        return []
    if not pattern.arities <= G.arities:
        return []
    by_arity: dict[int, list[int]] = {}
    for idx, e in enumerate(G.edges):
        by_arity.setdefault(len(e), []).append(idx)

    found: dict[frozenset, Embedding] = {}
    vmap: dict[int, int] = {}
    used_v: set[int] = set()
    emap: list[int] = []
    used_e: set[int] = set()

    def extend(k: int):
        if k == pattern.h:
            key = frozenset(emap)
            if key not in found:
                vm = tuple(vmap[v] for v in range(pattern.n))
                found[key] = Embedding(name, tuple(emap), vm)
            return
        pe = pattern.edges[k]
        for gi in by_arity.get(len(pe), ()):
            if gi in used_e:
                continue
            ge = G.edges[gi]
            fixed = {v: vmap[v] for v in pe if v in vmap}
            if not set(fixed.values()) <= set(ge):
                continue
            free_p = [v for v in pe if v not in vmap]
            free_g = [w for w in ge if w not in fixed.values()]
            if any(w in used_v for w in free_g):
                continue
            for img in itertools.permutations(free_g):
                for v, w in zip(free_p, img):
                    vmap[v] = w
                    used_v.add(w)
                emap.append(gi)
                used_e.add(gi)
                extend(k + 1)
                used_e.discard(gi)
                emap.pop()
                for v, w in zip(free_p, img):
                    del vmap[v]
                    used_v.discard(w)

    extend(0)
    return sorted(found.values(), key=lambda e: (sorted(e.edge_map), e.edge_map))


def cyclic_hypergraph(h: int) -> Hypergraph:
    """Ring of h triples on 2h vertices; consecutive triples share one vertex."""
    if h < 3:
        raise TopologyError(f"cyclic hypergraph needs h >= 3, got {h}")
    n = 2 * h
    return Hypergraph(n, [(2 * j - 2, 2 * j - 1, (2 * j) % n) for j in range(1, h + 1)])


def subhypergraph(G: Hypergraph, edge_indices) -> Hypergraph:
    """Edges of G selected by index, relabelled onto 0..k-1 by first appearance."""
    chosen = [G.edges[i] for i in sorted(edge_indices)]
    order = sorted({v for e in chosen for v in e})
    relabel = {v: i for i, v in enumerate(order)}
    return Hypergraph(len(order), [[relabel[v] for v in e] for e in chosen])


def is_subgraph(small: Hypergraph, big: Hypergraph) -> bool:
    """True if ``small`` (isolated vertices ignored) embeds into ``big``."""
    if not small.edges:
        return True
    return bool(find_embeddings(big, subhypergraph(small, range(small.h))))


# --- export ---------------------------------------------------------------

def export_dot(obj) -> str:
    """Graphviz text for a hypergraph or a line structure.

    Hyperedges of arity two are plain edges; larger ones are drawn as box
    nodes joined to their members.
    """
    lines = []
    if isinstance(obj, LineStructure):
        lines.append("graph L {")
        for v in obj.vertices:
            label = "".join(str(x) for x in obj.base.edges[v])
            lines.append(f'  b{v} [shape=square, label="B{label}"];')
        for k, link in enumerate(obj.links):
            if len(link.members) == 2:
                a, b = link.members
                lines.append(f'  b{a} -- b{b} [label="{link.pattern}:{link.weight}"];')
            else:
                lines.append(f'  l{k} [shape=point, label="{link.pattern}:{link.weight}"];')
                for v in link.members:
                    lines.append(f"  l{k} -- b{v};")
        lines.append("}")
        return "\n".join(lines) + "\n"
    if not isinstance(obj, Hypergraph):
        raise TypeError(f"cannot export {type(obj).__name__}")
    lines.append("graph G {")
    for v in range(obj.n):
        lines.append(f"  v{v} [shape=circle];")
    for k, e in enumerate(obj.edges):
        if len(e) == 2:
            lines.append(f"  v{e[0]} -- v{e[1]};")
        else:
            label = "".join(str(x) for x in e)
            lines.append(f'  e{k} [shape=box, label="{label}"];')
            for v in e:
                lines.append(f"  e{k} -- v{v};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def max_edges(n: int, m: int) -> int:
    return comb(n, m)
