"""Monogamy relations: the elementary catalog and the averaging engine.

A relation reads ``sum_e c_e B_e**2 <= bound`` over the Bell tests (edges)
of a network.  Relations are produced by summing elementary relations
placed on overlapping tests; the weights of that sum are chosen by an exact
fractional-covering LP.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache

from .lp import CoverageError, fractional_cover
from .pauli import (PartitionCertificate, PauliString, lift_certificate,
                    search_partition, verify_certificate, xy_plane_observables)
from .topology import Embedding, Hypergraph, TopologyError, find_embeddings, subhypergraph

CERTIFIED = "certified"
CONJECTURED = "conjectured"


class RelationError(ValueError):
    pass


def required_observables(network: Hypergraph) -> list[PauliString]:
    """The in-plane correlation observables entering every Bell parameter of the network."""
    out = []
    for e in network.edges:
        out.extend(xy_plane_observables(e, network.n))
    return out


@dataclass(frozen=True)
class ElementaryRelation:
    name: str
    pattern: Hypergraph
    bound: Fraction
    certificate: PartitionCertificate | None = None

    def verify(self):
        if self.certificate is None:
            raise RelationError(f"{self.name} has no certificate")
        report = verify_certificate(self.certificate, required_observables(self.pattern))
        if not report.passed:
            raise RelationError(f"{self.name}: certificate rejected: {report.violations[:3]}")
        if Fraction(report.bound) != self.bound:
            raise RelationError(f"{self.name}: certificate proves {report.bound}, claimed {self.bound}")
        return report

    def as_relation(self) -> "MonogamyRelation":
        """The relation on its own pattern network, as a one-term average."""
        emb = Embedding(self.name, tuple(range(self.pattern.h)), tuple(range(self.pattern.n)))
        return averaging_sum(self.pattern, [(emb, 1)], {self.name: self})

    def to_dict(self) -> dict:
        return {"name": self.name, "pattern": self.pattern.to_dict(), "bound": str(self.bound),
                "certificate": None if self.certificate is None else self.certificate.to_dict()}


@dataclass(frozen=True)
class Contribution:
    """One placed elementary relation inside an average.

    ``embedding.edge_map`` lists the network edges hit by the used pattern
    edges ``pattern_edges`` (all of them when empty); unused pattern vertices
    map to -1.
    """

    embedding: Embedding
    weight: Fraction
    name: str
    bound: Fraction
    pattern_edges: tuple[int, ...] = ()

    def to_dict(self) -> dict:
        d = {"relation": self.name, "weight": str(self.weight), "elementary_bound": str(self.bound),
             "edges": list(self.embedding.edge_map), "vertex_map": list(self.embedding.vertex_map)}
        if self.pattern_edges:
            d["pattern_edges"] = list(self.pattern_edges)
        return d

    @classmethod
    def from_dict(cls, d) -> "Contribution":
        emb = Embedding(d["relation"], tuple(d["edges"]), tuple(d.get("vertex_map", ())))
        return cls(emb, Fraction(d["weight"]), d["relation"], Fraction(d["elementary_bound"]),
                   tuple(d.get("pattern_edges", ())))


@dataclass(frozen=True)
class MonogamyRelation:
    network: Hypergraph
    coefficients: tuple[Fraction, ...]
    bound: Fraction
    provenance: tuple[Contribution, ...] = ()
    status: str = CONJECTURED
    clamped: bool = False
    certificate: PartitionCertificate | None = None
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(Fraction(c) for c in self.coefficients))
        object.__setattr__(self, "bound", Fraction(self.bound))
        object.__setattr__(self, "provenance", tuple(self.provenance))
        self.validate()

    def validate(self):
        G = self.network
        if len(self.coefficients) != G.h:
            raise RelationError("one coefficient per network edge required")
        if any(c < 0 for c in self.coefficients) or self.bound < 0:
            raise RelationError("coefficients and bound must be nonnegative")
        if self.status not in (CERTIFIED, CONJECTURED):
            raise RelationError(f"unknown status {self.status!r}")
        if not self.provenance:
            if self.status == CERTIFIED:
                if self.certificate is None:
                    raise RelationError("certified relation needs provenance or a certificate")
                rep = verify_certificate(self.certificate, required_observables(G))
                if not rep.passed or Fraction(rep.bound) != self.bound:
                    raise RelationError("attached certificate does not prove the bound")
            return
        cover = [Fraction(0)] * G.h
        total = Fraction(0)
        for c in self.provenance:
            if c.weight < 0:
                raise RelationError("negative weight in provenance")
            for gi in c.embedding.edge_map:
                if not 0 <= gi < G.h:
                    raise RelationError(f"provenance edge index {gi} outside network")
                cover[gi] += c.weight
            total += c.weight * c.bound
        if total != self.bound:
            raise RelationError(f"bound {self.bound} != provenance sum {total}")
        for c, cov in zip(self.coefficients, cover):
            if (c > cov) if self.clamped else (c != cov):
                raise RelationError(f"coefficient {c} inconsistent with provenance cover {cov}")

    @property
    def unproven(self) -> bool:
        return self.status == CONJECTURED

    @property
    def uniform(self) -> bool:
        nz = {c for c in self.coefficients if c != 0}
        return len(nz) == 1 and all(c != 0 for c in self.coefficients)

    @property
    def uniform_bound(self) -> Fraction | None:
        """C in ``sum_e B_e**2 <= C``; None if some edge has coefficient 0."""
        cmin = min(self.coefficients, default=Fraction(0))
        if cmin <= 0:
            return None
        return self.bound / cmin

    def normalized(self) -> "MonogamyRelation":
        """All-ones form ``sum B**2 <= bound / min coefficient`` (uses B**2 >= 0)."""
        cmin = min(self.coefficients)
        if cmin <= 0:
            raise RelationError("cannot normalise: an edge is not covered")
        prov = tuple(replace(c, weight=c.weight / cmin) for c in self.provenance)
        clamped = self.clamped or not self.uniform
        return MonogamyRelation(self.network, (Fraction(1),) * self.network.h, self.bound / cmin,
                                prov, self.status, clamped, self.certificate, self.label)

    def summary(self) -> str:
        ub = self.uniform_bound
        if ub is not None:
            return f"Σ B² ≤ {ub}"
        terms = " + ".join(f"{c}·B{''.join(map(str, e))}²" for c, e in zip(self.coefficients, self.network.edges) if c)
        return f"{terms} ≤ {self.bound}"

    def to_dict(self) -> dict:
        d = {
            "network": self.network.to_dict(),
            "coefficients": [{"edge": list(e), "c": str(c)} for e, c in zip(self.network.edges, self.coefficients)],
            "bound": str(self.bound),
            "provenance": [c.to_dict() for c in self.provenance],
            "status": self.status,
            "clamped": self.clamped,
        }
        if self.label:
            d["label"] = self.label
        if self.certificate is not None:
            d["certificate"] = self.certificate.to_dict()
        return d


def serialize(rel: MonogamyRelation) -> str:
    return json.dumps(rel.to_dict(), indent=2, ensure_ascii=False)


def deserialize(text: str) -> MonogamyRelation:
    try:
        d = json.loads(text) if isinstance(text, str) else text
        G = Hypergraph.from_dict(d["network"])
        coef = {tuple(sorted(c["edge"])): Fraction(c["c"]) for c in d["coefficients"]}
        if set(coef) != set(G.edges):
            raise RelationError("coefficient edges do not match network edges")
        cert = d.get("certificate")
        return MonogamyRelation(
            G, tuple(coef[e] for e in G.edges), Fraction(d["bound"]),
            tuple(Contribution.from_dict(c) for c in d.get("provenance", [])),
            d.get("status", CONJECTURED), bool(d.get("clamped", False)),
            None if cert is None else PartitionCertificate.from_dict(cert), d.get("label", ""))
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, RelationError):
            raise
        raise RelationError(f"malformed relation: {exc}") from exc


def manual_relation(network: Hypergraph, bound, coefficients=None, label="") -> MonogamyRelation:
    """A relation without derivation; recorded as conjectured."""
    coefficients = (Fraction(1),) * network.h if coefficients is None else coefficients
    return MonogamyRelation(network, coefficients, Fraction(bound), (), CONJECTURED, label=label)


# --- built-in catalog ------------------------------------------------------

def _cert(rows, n) -> PartitionCertificate:
    return PartitionCertificate([[PauliString.parse(s, n) for s in g] for g in rows])


def _swap_all(text: str) -> str:
    return text.translate(str.maketrans("XY", "YX"))


def _square_groups():
    cols = [
        ["X1 X2 Y3", "X1 Y2 X4", "X1 X3 Y4", "Y2 Y3 Y4"],
        ["X1 Y2 X3", "Y1 Y2 Y4", "Y1 X3 X4", "X2 X3 Y4"],
        ["Y1 X2 X3", "X1 X2 Y4", "Y1 Y3 Y4", "X2 Y3 X4"],
        ["Y1 Y2 Y3", "Y1 X2 X4", "X1 Y3 X4", "Y2 X3 X4"],
    ]
    return [c + [_swap_all(s) for s in c] for c in cols]


BIPARTITE_GROUPS = [["X1 X2", "X1 Y2", "Y1 X3", "Y1 Y3"], ["X1 X3", "X1 Y3", "Y1 X2", "Y1 Y2"]]
ONE_OVERLAP_GROUPS = [
    ["X1 X2 X3", "X1 Y2 X3", "Y1 X4 Y5", "Y1 Y4 Y5"],
    ["Y1 X2 Y3", "Y1 Y2 Y3", "X1 X4 X5", "X1 Y4 X5"],
    ["X1 X2 Y3", "X1 Y2 Y3", "Y1 X4 X5", "Y1 Y4 X5"],
    ["Y1 X2 X3", "Y1 Y2 X3", "X1 X4 Y5", "X1 Y4 Y5"],
]
SQUARE_GROUPS = _square_groups()


def _searched(name, pattern, bound) -> ElementaryRelation:
    cert = search_partition(required_observables(pattern), int(bound))
    return ElementaryRelation(name, pattern, Fraction(bound), cert)


@lru_cache(maxsize=None)
def _catalog() -> tuple[ElementaryRelation, ...]:
    pair = ElementaryRelation("pair", Hypergraph(3, [(0, 1), (0, 2)]), Fraction(2), _cert(BIPARTITE_GROUPS, 3))
    overlap2 = _searched("overlap2", Hypergraph(4, [(0, 1, 2), (0, 1, 3)]), 4)
    overlap1 = ElementaryRelation("overlap1", Hypergraph(5, [(0, 1, 2), (0, 3, 4)]), Fraction(4), _cert(ONE_OVERLAP_GROUPS, 5))
    square = ElementaryRelation("square", Hypergraph(4, [(0, 1, 2), (1, 2, 3), (0, 2, 3), (0, 1, 3)]),
                             Fraction(4), _cert(SQUARE_GROUPS, 4))
    kite = _searched("kite", Hypergraph(6, [(0, 1, 2), (0, 3, 4), (0, 2, 4), (2, 4, 5)]), 4)
    lifted = lift_relation(square, name="lifted-square")
    rels = (pair, overlap2, overlap1, square, kite, lifted)
    for r in rels:
        r.verify()
    return rels


def builtin_catalog() -> list[ElementaryRelation]:
    """Verified elementary relations; each certificate is re-checked on load."""
    return list(_catalog())


def catalog_lookup(name: str) -> ElementaryRelation:
    for r in _catalog():
        if r.name.lower() == name.lower():
            return r
    raise KeyError(f"no built-in relation named {name!r}")


def select_catalog(names=None) -> list[ElementaryRelation]:
    if not names:
        return builtin_catalog()
    return [catalog_lookup(n) for n in names]


# --- averaging ---------------------------------------------------------------

def _check_embedding(G: Hypergraph, rel: ElementaryRelation, emb: Embedding, pattern_edges):
    idxs = pattern_edges or range(rel.pattern.h)
    if len(emb.edge_map) != len(idxs):
        raise RelationError(f"embedding of {rel.name} has {len(emb.edge_map)} edges, expected {len(idxs)}")
    vm = emb.vertex_map
    for pi, gi in zip(idxs, emb.edge_map):
        if not 0 <= gi < G.h:
            raise RelationError(f"embedding refers to edge {gi} outside the network")
        if vm:
            img = tuple(sorted(vm[v] for v in rel.pattern.edges[pi]))
            if img != G.edges[gi]:
                raise RelationError(f"{rel.name}: pattern edge {rel.pattern.edges[pi]} maps to {img}, "
                                    f"not onto network edge {G.edges[gi]}")
    if len(set(emb.edge_map)) != len(emb.edge_map):
        raise RelationError("embedding is not injective on edges")


def averaging_sum(G: Hypergraph, selection, catalog=None) -> MonogamyRelation:
    """Weighted sum of placed elementary relations.

    ``selection`` holds ``(embedding, weight)`` or ``(embedding, weight,
    pattern_edges)`` items; the embedding's pattern name is resolved in
    ``catalog`` (a name->relation mapping or a list of relations).
    """
    if catalog is None:
        catalog = builtin_catalog()
    if not isinstance(catalog, dict):
        catalog = {r.name: r for r in catalog}
    coeff = [Fraction(0)] * G.h
    bound = Fraction(0)
    prov = []
    status = CERTIFIED
    for item in selection:
        emb, w = item[0], Fraction(item[1])
        pedges = tuple(item[2]) if len(item) > 2 else ()
        if w < 0:
            raise RelationError("weights must be nonnegative")
        try:
            rel = catalog[emb.pattern]
        except KeyError:
            raise RelationError(f"unknown elementary relation {emb.pattern!r}") from None
        _check_embedding(G, rel, emb, pedges)
        for gi in emb.edge_map:
            coeff[gi] += w
        bound += w * rel.bound
        prov.append(Contribution(emb, w, rel.name, rel.bound, pedges))
        if rel.certificate is None:
            status = CONJECTURED
    if not prov:
        status = CONJECTURED
    return MonogamyRelation(G, tuple(coeff), bound, tuple(prov), status)


def _same_arity(G: Hypergraph, rel: ElementaryRelation) -> bool:
    return bool(G.edges) and rel.pattern.arities <= G.arities


def all_embeddings_relation(G: Hypergraph, catalog=None) -> MonogamyRelation:
    """Every full placement of every catalog pattern, weight 1 (the plain line-graph sum)."""
    catalog = builtin_catalog() if catalog is None else list(catalog)
    sel = []
    for rel in catalog:
        if _same_arity(G, rel):
            sel.extend((e, 1) for e in find_embeddings(G, rel.pattern, rel.name))
    return averaging_sum(G, sel, catalog)


def candidate_placements(G: Hypergraph, catalog, subpatterns: bool = True):
    """Cheapest placement per network edge set.

    With ``subpatterns`` a relation may also be placed through any subset of
    its edges at the same bound, since dropping B**2 >= 0 terms keeps it
    valid.  Returns ``[(image, bound, relation, embedding, pattern_edges)]``
    in deterministic order.
    """
    best: dict[tuple, tuple] = {}
    for ri, rel in enumerate(catalog):
        if not _same_arity(G, rel):
            continue
        P = rel.pattern
        subsets = [tuple(range(P.h))]
        if subpatterns:
            for k in range(P.h - 1, 0, -1):
                subsets.extend(itertools.combinations(range(P.h), k))
        for idxs in subsets:
            full = len(idxs) == P.h
            sub = P if full else subhypergraph(P, idxs)
            order = sorted({v for i in idxs for v in P.edges[i]})
            for emb in find_embeddings(G, sub, rel.name):
                image = tuple(sorted(emb.edge_map))
                key = (rel.bound, len(idxs) != P.h, ri)
                if image in best and best[image][0] <= key:
                    continue
                if full:
                    placed, pedges = emb, ()
                else:
                    vm = [-1] * P.n
                    for local, v in enumerate(order):
                        vm[v] = emb.vertex_map[local]
                    placed, pedges = Embedding(rel.name, emb.edge_map, tuple(vm)), idxs
                best[image] = (key, rel, placed, pedges)
    out = []
    for image in sorted(best, key=lambda im: (len(im), im)):
        key, rel, emb, pedges = best[image]
        out.append((image, rel.bound, rel, emb, pedges))
    return out


def optimal_fractional_cover(G: Hypergraph, catalog=None, subpatterns: bool = True) -> MonogamyRelation:
    """Best bound derivable by averaging catalog relations over G.

    Solves min sum_j w_j bound_j subject to every edge being covered with
    total weight >= 1; the result is the raw weighted relation, whose
    normalised form is ``sum B**2 <= optimum``.
    """
    catalog = builtin_catalog() if catalog is None else list(catalog)
    if not G.edges:
        raise RelationError("network has no Bell tests")
    places = candidate_placements(G, catalog, subpatterns)
    try:
        opt, w = fractional_cover(G.h, [p[0] for p in places], [p[1] for p in places])
    except CoverageError as exc:
        raise CoverageError(f"network {G}: {exc}") from None
    sel = [(p[3], wj, p[4]) for p, wj in zip(places, w) if wj > 0]
    rel = averaging_sum(G, sel, catalog)
    assert rel.bound == opt
    return rel


def lift_relation(rel: ElementaryRelation, name: str | None = None) -> ElementaryRelation:
    """Two copies of ``rel`` joined by a new observer placed in every Bell test.

    The new observer is vertex 0, the copies occupy 1..k and k+1..2k.
    """
    if rel.certificate is None:
        raise RelationError(f"{rel.name} has no certificate to lift")
    rel.verify()
    k = rel.pattern.n
    n = 2 * k + 1
    map_a = [1 + v for v in range(k)]
    map_b = [1 + k + v for v in range(k)]
    edges = [[0] + [map_a[v] for v in e] for e in rel.pattern.edges]
    edges += [[0] + [map_b[v] for v in e] for e in rel.pattern.edges]
    pattern = Hypergraph(n, edges)
    ca = PartitionCertificate([[p.embed(n, map_a) for p in g] for g in rel.certificate.groups])
    cb = PartitionCertificate([[p.embed(n, map_b) for p in g] for g in rel.certificate.groups])
    cert = lift_certificate(ca, cb, 0)
    out = ElementaryRelation(name or f"{rel.name}+lift", pattern, 2 * rel.bound, cert)
    out.verify()
    return out
