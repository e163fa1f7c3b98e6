import itertools

import pytest
from hypothesis import given, settings, strategies as st

from bellmono.topology import (Embedding, Hypergraph, SizeError, TopologyError, canonical_form,
                               cyclic_hypergraph, enumerate_hypergraphs, export_dot,
                               find_embeddings, is_isomorphic, is_subgraph, line_graph,
                               line_structure, subhypergraph)

from oracles import hypergraph_classes

SQUARE = Hypergraph(4, [(0, 1, 2), (1, 2, 3), (0, 2, 3), (0, 1, 3)])
TWO_SHARED = Hypergraph(4, [(0, 1, 2), (0, 1, 3)])
ONE_SHARED = Hypergraph(5, [(0, 1, 2), (0, 3, 4)])


def brute_canonical(H):
    best = None
    for p in itertools.permutations(range(H.n)):
        key = sorted(tuple(sorted(p[v] for v in e)) for e in H.edges)
        if best is None or key < best:
            best = key
    return [tuple(e) for e in best]


def test_hypergraph_storage_is_canonical():
    H = Hypergraph(4, [[3, 1, 2], [1, 0, 2]])
    assert H.edges == ((0, 1, 2), (1, 2, 3))
    assert H.h == 2 and H.arity == 3


@pytest.mark.parametrize("edges", [[(0,)], [(0, 0)], [(0, 5)], [(0, 1), (1, 0)]])
def test_hypergraph_rejects_bad_edges(edges):
    with pytest.raises(TopologyError):
        Hypergraph(3, edges)


def test_hypergraph_json_roundtrip():
    H = cyclic_hypergraph(5)
    assert Hypergraph.from_json(H.to_json()) == H
    with pytest.raises(TopologyError):
        Hypergraph.from_dict({"n": 3})


def test_canonical_relabels_path():
    H = Hypergraph(3, [(1, 2), (0, 1)])
    # lexicographic minimum puts the shared vertex first
    assert canonical_form(H).edges == ((0, 1), (0, 2))
    assert list(canonical_form(H).edges) == brute_canonical(H)
    assert canonical_form(Hypergraph(3, [(0, 1), (1, 2)])) == canonical_form(H)


def test_canonical_two_shared_is_fixed_point():
    assert canonical_form(TWO_SHARED).edges == TWO_SHARED.edges
    assert list(canonical_form(TWO_SHARED).edges) == brute_canonical(TWO_SHARED)


def test_canonical_c3_matches_permutation_oracle():
    C3 = Hypergraph(6, [(0, 1, 2), (2, 3, 4), (4, 5, 0)])
    assert list(canonical_form(C3).edges) == brute_canonical(C3)
    assert canonical_form(canonical_form(C3)) == canonical_form(C3)


def test_canonical_mixed_arity_matches_oracle():
    H = Hypergraph(5, [(0, 3), (1, 2, 4), (0, 1, 2)])
    assert list(canonical_form(H).edges) == brute_canonical(H)


def test_canonical_size_cap():
    with pytest.raises(SizeError):
        canonical_form(Hypergraph(9, [(0, 8)]))


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_canonical_is_permutation_invariant(data):
    n = data.draw(st.integers(3, 6))
    m = data.draw(st.integers(2, 3))
    pool = list(itertools.combinations(range(n), m))
    edges = data.draw(st.lists(st.sampled_from(pool), min_size=1, max_size=min(6, len(pool)), unique=True))
    H = Hypergraph(n, edges)
    perm = data.draw(st.permutations(range(n)))
    K = H.relabel(perm)
    assert canonical_form(K) == canonical_form(H)
    assert is_isomorphic(H, K)
    assert canonical_form(canonical_form(H)) == canonical_form(H)


def test_enumerate_examples():
    assert [H.edges for H in enumerate_hypergraphs(4, 2, 3)] == [((0, 1, 2), (0, 1, 3))]
    assert [H.edges for H in enumerate_hypergraphs(5, 2, 3)] == [((0, 1, 2), (0, 3, 4))]
    single = enumerate_hypergraphs(3, 1, 2, require_cover=False)
    assert len(single) == 1 and single[0].isolated == [2]
    assert enumerate_hypergraphs(3, 1, 2) == []


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_enumerate_graph_counts_match_networkx(n):
    for h in range(1, n * (n - 1) // 2 + 1):
        assert len(enumerate_hypergraphs(n, h, 2)) == hypergraph_classes(n, h, 2)
        assert len(enumerate_hypergraphs(n, h, 2, require_cover=False)) == hypergraph_classes(n, h, 2, False)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_enumerate_triple_counts_match_networkx(n):
    for h in range(1, len(list(itertools.combinations(range(n), 3))) + 1):
        assert len(enumerate_hypergraphs(n, h, 3)) == hypergraph_classes(n, h, 3)


def test_enumerate_flags_connectivity_and_caps():
    import networkx as nx
    classes = enumerate_hypergraphs(4, 3, 2) + enumerate_hypergraphs(5, 3, 2)
    assert sorted(H.connected for H in classes) == [False, True, True]
    for H in classes:
        assert H.connected == nx.is_connected(nx.Graph(list(H.edges)))
    with pytest.raises(SizeError):
        enumerate_hypergraphs(9, 1, 3)
    with pytest.raises(TopologyError):
        enumerate_hypergraphs(4, 5, 3)


def test_line_graph_path():
    L = line_graph(Hypergraph(3, [(0, 1), (1, 2)]))
    assert len(L.links) == 1 and L.epsilon == 1 and L.degrees() == [1, 1]


def test_line_graph_triangle():
    L = line_graph(Hypergraph(3, [(0, 1), (1, 2), (0, 2)]))
    assert L.epsilon == 3 and L.degrees() == [2, 2, 2]


def test_line_graph_star_is_complete():
    L = line_graph(Hypergraph(5, [(0, j) for j in range(1, 5)]))
    assert L.epsilon == 6 and L.degrees() == [3] * 4
    assert all(len(link.members) == 2 for link in L.links)


def test_line_graph_rejects_triples():
    with pytest.raises(TopologyError):
        line_graph(TWO_SHARED)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 7), st.data())
def test_handshaking(n, data):
    pool = list(itertools.combinations(range(n), 2))
    edges = data.draw(st.lists(st.sampled_from(pool), min_size=1, max_size=len(pool), unique=True))
    L = line_graph(Hypergraph(n, edges))
    assert sum(L.degrees()) == 2 * L.epsilon


def test_line_structure_from_embeddings():
    C5 = cyclic_hypergraph(5)
    embs = find_embeddings(C5, ONE_SHARED, "overlap1")
    L = line_structure(C5, embs)
    assert L.epsilon == 5 and L.degrees() == [2] * 5


def test_find_embeddings_examples():
    assert len(find_embeddings(TWO_SHARED, TWO_SHARED)) == 1
    C5 = cyclic_hypergraph(5)
    embs = find_embeddings(C5, ONE_SHARED)
    assert len(embs) == 5
    for e in embs:
        a, b = (set(C5.edges[i]) for i in e.edge_map)
        assert len(a & b) == 1
    assert len(find_embeddings(SQUARE, SQUARE)) == 1
    assert find_embeddings(SQUARE, ONE_SHARED) == []


def _check_embedding(G, P, emb):
    assert len(set(emb.vertex_map)) == P.n
    for pi, gi in enumerate(emb.edge_map):
        assert tuple(sorted(emb.vertex_map[v] for v in P.edges[pi])) == G.edges[gi]


def test_embeddings_respect_incidence_exhaustively():
    patterns = [TWO_SHARED, ONE_SHARED, SQUARE, Hypergraph(3, [(0, 1), (0, 2)])]
    for n in (4, 5):
        for h in range(1, 5):
            for G in enumerate_hypergraphs(n, h, 3) + enumerate_hypergraphs(n, h, 2):
                for P in patterns:
                    embs = find_embeddings(G, P)
                    assert len({e.image for e in embs}) == len(embs)
                    for emb in embs:
                        _check_embedding(G, P, emb)


def test_embedding_count_matches_brute_force():
    # count image edge sets by trying every vertex injection
    G = Hypergraph(6, [(0, 1, 2), (0, 3, 4), (0, 2, 4), (2, 4, 5), (1, 3, 5)])
    for P in (TWO_SHARED, ONE_SHARED):
        images = set()
        for vm in itertools.permutations(range(G.n), P.n):
            img = [tuple(sorted(vm[v] for v in e)) for e in P.edges]
            if all(e in G.edges for e in img):
                images.add(frozenset(G.edge_index(e) for e in img))
        assert {e.image for e in find_embeddings(G, P)} == images


def test_embedding_dict_roundtrip():
    emb = find_embeddings(SQUARE, TWO_SHARED, "overlap2")[0]
    assert Embedding.from_dict(emb.to_dict()) == emb


def test_cyclic_examples():
    C3 = cyclic_hypergraph(3)
    assert C3.n == 6 and set(C3.edges) == {(0, 1, 2), (2, 3, 4), (0, 4, 5)}
    C5 = cyclic_hypergraph(5)
    assert C5.n == 10 and C5.h == 5
    for j in range(5):
        a = set(C5.edges[j])
        shared = [len(a & set(C5.edges[k])) for k in range(5) if k != j]
        assert sorted(shared) == [0, 0, 1, 1]
    assert cyclic_hypergraph(4).h == 4
    with pytest.raises(TopologyError):
        cyclic_hypergraph(2)


def test_subgraph_helpers():
    assert subhypergraph(SQUARE, [0, 1]).edges == TWO_SHARED.edges
    assert is_subgraph(TWO_SHARED, SQUARE)
    assert not is_subgraph(ONE_SHARED, SQUARE)


def test_export_dot_path_and_c3():
    text = export_dot(Hypergraph(3, [(0, 1), (1, 2)]))
    body = text.splitlines()[1:-1]
    assert sum("shape=circle" in s for s in body) == 3
    assert sum("--" in s for s in body) == 2
    text = export_dot(cyclic_hypergraph(3))
    assert text.count("shape=circle") == 6 and text.count("shape=box") == 3
    assert export_dot(cyclic_hypergraph(3)) == text


def test_export_dot_line_structure():
    text = export_dot(line_graph(Hypergraph(3, [(0, 1), (1, 2), (0, 2)])))
    assert text.startswith("graph L {") and text.count("shape=square") == 3
    with pytest.raises(TypeError):
        export_dot("not a graph")
