import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bellmono.pauli import (PartitionCertificate, PartitionNotFound, PauliError, PauliString,
                            SearchBudgetExceeded, anticommutes, commutes, lift_certificate, product,
                            search_partition, swap_xy, verify_certificate, xy_plane_observables)

from oracles import dense, dense_word, expect, random_state
from tables import BIPARTITE, ONE_OVERLAP_COLUMNS, square_table, lifted_square_table

P = PauliString.parse

def cert(rows, n):
    return PartitionCertificate([[P(s, n) for s in g] for g in rows])


def cover(edges, n):
    return [p for e in edges for p in xy_plane_observables(e, n)]


def random_string(rng, n):
    word = "".join(rng.choice(list("IXYZ")) for _ in range(n))
    return PauliString.from_letters(word), word


def test_letters_and_text_form():
    p = P("X1 Y3", 4)
    assert p.letters() == {0: "X", 2: "Y"} and str(p) == "X1 Y3"
    assert p.hermitian and p.weight() == 2
    assert P(str(P("-i Z2 Y4", 4)), 4) == P("-i Z2 Y4", 4)
    with pytest.raises(PauliError):
        P("Q1")
    with pytest.raises(PauliError):
        P("X1 X1")
    with pytest.raises(PauliError):
        P("X5", 3)


def test_commutes_examples():
    assert not commutes(P("X1 X2"), P("X1 Y2"))
    assert commutes(P("X1 X2"), P("Y1 Y2"))
    for text in ("X1", "Y1 Z2", "X1 X2 Y3"):
        assert commutes(P(text), P(text))
    with pytest.raises(PauliError):
        commutes(P("X1"), P("X1 X2"))


def test_product_examples():
    xi = PauliString.from_letters("XI")
    ix = PauliString.from_letters("IX")
    assert product(xi, ix) == PauliString.from_letters("XX")
    assert product(xi, ix).sign == 1
    xy = product(PauliString.from_letters("X"), PauliString.from_letters("Y"))
    assert xy.letters() == {0: "Z"} and xy.sign == 1j
    big = product(P("X5 X6 Y7", 12), P("X9 X10 Y11", 12))
    assert len(big.support) == 6 and big.hermitian


def test_xy_plane_examples():
    assert [str(p) for p in xy_plane_observables([0, 1], 3)] == ["X1 X2", "X1 Y2", "Y1 X2", "Y1 Y2"]
    assert [str(p) for p in xy_plane_observables([0], 1)] == ["X1", "Y1"]
    assert len(xy_plane_observables([0, 1, 2], 3)) == 8
    with pytest.raises(PauliError):
        xy_plane_observables([], 2)


def test_commutes_and_product_exhaustive_small():
    for n in (1, 2):
        words = ["".join(w) for w in itertools.product("IXYZ", repeat=n)]
        for a, b in itertools.product(words, repeat=2):
            pa, pb = PauliString.from_letters(a), PauliString.from_letters(b)
            A, B = dense_word(a), dense_word(b)
            assert commutes(pa, pb) == np.allclose(A @ B, B @ A)
            ab = product(pa, pb)
            assert np.allclose(dense(str(ab), n), A @ B)
            ba = product(pb, pa)
            assert (ab == ba) == commutes(pa, pb)
            assert ab.sign == (ba.sign if commutes(pa, pb) else -ba.sign)


def test_commutes_and_product_random_vs_dense():
    rng = np.random.default_rng(7)
    for _ in range(500):
        n = int(rng.integers(1, 5))
        pa, a = random_string(rng, n)
        pb, b = random_string(rng, n)
        A, B = dense_word(a), dense_word(b)
        assert commutes(pa, pb) == np.allclose(A @ B - B @ A, 0)
        assert anticommutes(pa, pb) == np.allclose(A @ B + B @ A, 0)
        assert np.allclose(dense(str(product(pa, pb)), n), A @ B)


@settings(max_examples=200, deadline=None)
@given(st.text("IXYZ", min_size=1, max_size=6), st.sampled_from([0, 1, 2, 3]))
def test_hermitian_predicate_matches_matrix(word, phase):
    p = PauliString.from_letters(word)
    p = PauliString(p.n, p.x_mask, p.z_mask, p.phase + phase)
    M = dense(str(p), p.n)
    assert p.hermitian == np.allclose(M, M.conj().T)


def test_swap_xy():
    assert swap_xy(P("X1 Y2 Z3")) == P("Y1 X2 Z3")


def test_verify_bipartite_certificate():
    rep = verify_certificate(cert(BIPARTITE, 3), cover([(0, 1), (0, 2)], 3))
    assert rep.passed and rep.bound == 2


def test_verify_one_overlap_table():
    rep = verify_certificate(cert(ONE_OVERLAP_COLUMNS, 5), cover([(0, 1, 2), (0, 3, 4)], 5))
    assert rep.passed and rep.bound == 4


def test_verify_square_table():
    rep = verify_certificate(cert(square_table(), 4), cover([(0, 1, 2), (1, 2, 3), (0, 2, 3), (0, 1, 3)], 4))
    assert rep.passed and rep.bound == 4


def test_verify_flags_moved_string():
    rows = [list(g) for g in BIPARTITE]
    rows[1].append(rows[0].pop(0))  # X1 X2 joins a group holding Y1 Y2
    rep = verify_certificate(cert(rows, 3), cover([(0, 1), (0, 2)], 3))
    assert not rep.passed
    assert any("X1 X2" in v and "commute" in v for v in rep.violations)


def test_verify_flags_missing_extra_duplicate_nonhermitian():
    required = cover([(0, 1)], 2)
    bad = PartitionCertificate([[P("X1 X2", 2), P("X1 Y2", 2)], [P("X1 X2", 2)], [P("i X1", 2)]])
    rep = verify_certificate(bad, required)
    text = " | ".join(rep.violations)
    assert "missing required observable Y1 X2" in text
    assert "already listed" in text and "not Hermitian" in text and "not a required" in text


def test_certificate_json_roundtrip():
    c = cert(BIPARTITE, 3)
    assert PartitionCertificate.from_json(c.to_json()) == c
    assert PartitionCertificate.from_dict({"groups": BIPARTITE}).claimed_bound == 2


def test_search_one_overlap():
    obs = cover([(0, 1, 2), (0, 3, 4)], 5)
    found = search_partition(obs, 4)
    assert verify_certificate(found, obs).passed and found.claimed_bound <= 4
    with pytest.raises(PartitionNotFound):
        search_partition(obs, 3)


def test_search_six_qubit_four_tests():
    obs = cover([(0, 1, 2), (0, 3, 4), (0, 2, 4), (2, 4, 5)], 6)
    assert len(obs) == 32
    found = search_partition(obs, 4)
    assert verify_certificate(found, obs).passed and found.claimed_bound == 4


def test_search_single_qubit_paulis():
    found = search_partition([P("X1"), P("Y1"), P("Z1")], 1)
    assert found.claimed_bound == 1 and len(found.groups[0]) == 3


def test_search_is_deterministic_and_guarded():
    obs = cover([(0, 1, 2), (0, 3, 4)], 5)
    assert search_partition(obs, 4) == search_partition(obs, 4)
    with pytest.raises(PauliError):
        search_partition(cover([(0, 1, 2, 3, 4, 5, 6)], 7), 64)
    with pytest.raises(PauliError):
        search_partition([P("X1"), P("X1")], 2)
    with pytest.raises(SearchBudgetExceeded):
        search_partition(obs, 4, max_nodes=5)


def test_lift_square_matches_lifted_table():
    n = 9
    a = PartitionCertificate([[P(s, 4).embed(n, [1, 2, 3, 4]) for s in g] for g in square_table()])
    b = PartitionCertificate([[P(s, 4).embed(n, [5, 6, 7, 8]) for s in g] for g in square_table()])
    lifted = lift_certificate(a, b, 0)
    assert lifted.claimed_bound == 8 and all(len(g) == 16 for g in lifted.groups)
    expected = {frozenset(P(s, n) for s in g) for g in lifted_square_table()}
    assert {frozenset(g) for g in lifted.groups} == expected
    edges = [(0,) + tuple(1 + v for v in e) for e in [(0, 1, 2), (1, 2, 3), (0, 2, 3), (0, 1, 3)]]
    edges += [(0,) + tuple(5 + v for v in e) for e in [(0, 1, 2), (1, 2, 3), (0, 2, 3), (0, 1, 3)]]
    assert verify_certificate(lifted, cover(edges, n)).passed


def test_lift_bipartite_pair():
    n = 7
    a = PartitionCertificate([[P(s, 3).embed(n, [1, 2, 3]) for s in g] for g in BIPARTITE])
    b = PartitionCertificate([[P(s, 3).embed(n, [4, 5, 6]) for s in g] for g in BIPARTITE])
    lifted = lift_certificate(a, b, 0)
    assert lifted.claimed_bound == 4 and all(len(g) == 8 for g in lifted.groups)
    edges = [(0, 1, 2), (0, 1, 3), (0, 4, 5), (0, 4, 6)]
    assert verify_certificate(lifted, cover(edges, n)).passed


def test_lift_errors():
    n = 7
    a = PartitionCertificate([[P(s, 3).embed(n, [1, 2, 3]) for s in g] for g in BIPARTITE])
    b = PartitionCertificate([[P(s, 3).embed(n, [4, 5, 6]) for s in g] for g in BIPARTITE])
    with pytest.raises(PauliError):
        lift_certificate(a, b, 1)
    with pytest.raises(PauliError):
        lift_certificate(a, PartitionCertificate(b.groups[:1]), 0)
    with pytest.raises(PauliError):
        lift_certificate(a, a, 0)


def test_complementarity_on_certificate_groups():
    rng = np.random.default_rng(11)
    tables = [(BIPARTITE, 3), (ONE_OVERLAP_COLUMNS, 5), (square_table(), 4)]
    mats = [[[dense(s, n) for s in g] for g in rows] for rows, n in tables]
    for _ in range(40):
        for (rows, n), groups in zip(tables, mats):
            v = random_state(n, rng)
            for g in groups:
                assert sum(expect(v, M) ** 2 for M in g) <= 1 + 1e-9
