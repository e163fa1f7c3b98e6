"""Independent reference implementations used only by the tests.

Nothing here calls into the package's algebra: Pauli strings become dense
Kronecker products, hypergraph classes are deduplicated with networkx,
covering LPs go through scipy, and Bell values are summed over sign
vectors with explicit measurement operators.
"""
import itertools
import math
import re
from functools import reduce

import networkx as nx
import numpy as np
from scipy.optimize import linprog

I2 = np.eye(2, dtype=complex)
PX = np.array([[0, 1], [1, 0]], dtype=complex)
PY = np.array([[0, -1j], [1j, 0]], dtype=complex)
PZ = np.array([[1, 0], [0, -1]], dtype=complex)
LETTER = {"I": I2, "X": PX, "Y": PY, "Z": PZ}


def dense(text: str, n: int) -> np.ndarray:
    """Matrix of e.g. "X1 Y3" on n qubits; qubit 1 is the leftmost factor."""
    sign = 1
    text = text.strip()
    for prefix, val in (("-i", -1j), ("i", 1j), ("-", -1)):
        if text.startswith(prefix + " ") or (text.startswith(prefix) and text[len(prefix):len(prefix) + 1] in "XYZI"):
            sign = val
            text = text[len(prefix):].strip()
            break
    letters = ["I"] * n
    for letter, idx in re.findall(r"([IXYZ])(\d+)", text):
        letters[int(idx) - 1] = letter
    return sign * reduce(np.kron, [LETTER[c] for c in letters])


def dense_word(word: str) -> np.ndarray:
    return reduce(np.kron, [LETTER[c] for c in word])


def random_state(n: int, rng) -> np.ndarray:
    v = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
    return v / np.linalg.norm(v)


def expect(vec, M) -> float:
    return float(np.vdot(vec, M @ vec).real)


def hypergraph_classes(n: int, h: int, m: int, require_cover: bool = True) -> int:
    """Isomorphism classes via incidence-graph isomorphism (networkx)."""
    reps = []
    for edges in itertools.combinations(itertools.combinations(range(n), m), h):
        if require_cover and len({v for e in edges for v in e}) < n:
            continue
        g = nx.Graph()
        g.add_nodes_from((("v", v) for v in range(n)), kind="v")
        g.add_nodes_from((("e", k) for k in range(h)), kind="e")
        g.add_edges_from((("v", v), ("e", k)) for k, e in enumerate(edges) for v in e)
        match = nx.algorithms.isomorphism.categorical_node_match("kind", None)
        if not any(nx.is_isomorphic(g, r, node_match=match) for r in reps):
            reps.append(g)
    return len(reps)


def cover_lp(n_elements, columns, costs) -> float:
    A = np.zeros((n_elements, len(columns)))
    for j, col in enumerate(columns):
        for e in col:
            A[e, j] = 1
    res = linprog(np.asarray(costs, float), A_ub=-A, b_ub=-np.ones(n_elements), bounds=(0, None),
                  method="highs")
    assert res.success
    return float(res.fun)


def plane_op(theta: float, axes=(PX, PY)) -> np.ndarray:
    return math.cos(theta) * axes[0] + math.sin(theta) * axes[1]


def bell_value_dense(vec, n, qubits, angles, axes=(PX, PY)) -> float:
    """2**-m sum_s |<prod_j (A_j + s_j A'_j)>| with explicit operators."""
    m = len(qubits)
    total = 0.0
    for s in itertools.product((1, -1), repeat=m):
        factors = [I2] * n
        for j, q in enumerate(qubits):
            a, b = angles[j]
            factors[q] = plane_op(a, axes) + s[j] * plane_op(b, axes)
        total += abs(expect(vec, reduce(np.kron, factors)))
    return total / 2 ** m


def tensor_dense(vec, n, qubits, axes=(PX, PY)) -> np.ndarray:
    out = np.zeros((2,) * len(qubits))
    for idx in itertools.product((0, 1), repeat=len(qubits)):
        factors = [I2] * n
        for j, q in enumerate(qubits):
            factors[q] = axes[idx[j]]
        out[idx] = expect(vec, reduce(np.kron, factors))
    return out


def chsh_grid_max(vec, n, qubits, steps: int = 24) -> float:
    """Grid over all four angles, then Nelder-Mead polish of the best cell."""
    from scipy.optimize import minimize

    T = tensor_dense(vec, n, qubits)

    def value(x):
        a, ap, b, bp = x
        ua = np.array([[math.cos(a) + math.cos(ap), math.sin(a) + math.sin(ap)],
                       [math.cos(a) - math.cos(ap), math.sin(a) - math.sin(ap)]])
        ub = np.array([[math.cos(b) + math.cos(bp), math.sin(b) + math.sin(bp)],
                       [math.cos(b) - math.cos(bp), math.sin(b) - math.sin(bp)]])
        return float(np.abs(ua @ T @ ub.T).sum()) / 4

    grid = np.linspace(-math.pi, math.pi, steps, endpoint=False)
    a, ap = (g.reshape(-1) for g in np.meshgrid(grid, grid, indexing="ij"))
    U = np.stack([np.stack([np.cos(a) + np.cos(ap), np.sin(a) + np.sin(ap)], -1),
                  np.stack([np.cos(a) - np.cos(ap), np.sin(a) - np.sin(ap)], -1)], 1)
    F = np.abs(np.einsum("pij,jk,qlk->pqil", U, T, U)).sum(axis=(2, 3)) / 4
    p, q = np.unravel_index(np.argmax(F), F.shape)
    best = np.array([a[p], ap[p], a[q], ap[q]])
    res = minimize(lambda x: -value(x), best, method="Nelder-Mead",
                   options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 20000})
    return max(value(best), -res.fun)
