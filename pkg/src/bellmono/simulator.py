"""Dense qubit simulator for correlation Bell parameters.

States are finite ensembles of pure state vectors (never density
matrices of the full register).  Qubit 0 is the most significant bit of
the basis index, so ``|q0 q1 ... q_{n-1}>`` reads left to right.

The Bell parameter of a subset of m qubits with two in-plane settings per
party is the normalised WWZB value

    B = 2**-m * sum_s | <(a_1 + s_1 a'_1) x ... x (a_m + s_m a'_m)> |

with s ranging over {+1,-1}**m; it never exceeds sqrt(sum of squared
in-plane correlations), and local models give B <= 1.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize

from .pauli import PauliString

MAX_QUBITS = 12
NORM_TOL = 1e-12

SIGMA = np.array([
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)
AXES = {"x": np.array([1.0, 0, 0]), "y": np.array([0, 1.0, 0]), "z": np.array([0, 0, 1.0])}


class SimulatorError(ValueError):
    pass


class RegionError(SimulatorError):
    """Requested Bell values lie outside the region a construction covers."""


# --- states ------------------------------------------------------------------

@dataclass(frozen=True)
class QuantumEnsemble:
    n: int
    components: tuple[tuple[float, np.ndarray], ...]

    def __init__(self, n, components):
        n = int(n)
        if not 1 <= n <= MAX_QUBITS:
            raise SimulatorError(f"qubit count must be in [1, {MAX_QUBITS}], got {n}")
        comps = []
        total = 0.0
        for p, vec in components:
            p = float(p)
            vec = np.asarray(vec, dtype=complex).reshape(-1)
            if p < 0:
                raise SimulatorError("negative probability")
            if vec.shape != (2 ** n,):
                raise SimulatorError(f"state vector length {vec.size} != 2**{n}")
            if abs(np.vdot(vec, vec).real - 1) > NORM_TOL * 2 ** n:
                raise SimulatorError("component not normalised")
            vec.setflags(write=False)
            comps.append((p, vec))
            total += p
        if not comps or abs(total - 1) > NORM_TOL * max(1, len(comps)):
            raise SimulatorError(f"probabilities sum to {total}, not 1")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "components", tuple(comps))

    @classmethod
    def pure(cls, vec) -> "QuantumEnsemble":
        vec = np.asarray(vec, dtype=complex).reshape(-1)
        n = int(round(math.log2(vec.size)))
        return cls(n, [(1.0, vec / np.linalg.norm(vec))])

    @property
    def is_pure(self) -> bool:
        return len(self.components) == 1

    def to_dict(self) -> dict:
        return {"n": self.n, "components": [
            {"p": p, "amplitudes": [[float(a.real), float(a.imag)] for a in v]}
            for p, v in self.components]}

    @classmethod
    def from_dict(cls, d) -> "QuantumEnsemble":
        comps = [(c["p"], np.array([complex(re, im) for re, im in c["amplitudes"]]))
                 for c in d["components"]]
        return cls(d["n"], comps)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "QuantumEnsemble":
        return cls.from_dict(json.loads(text))

    def permute(self, perm) -> "QuantumEnsemble":
        """Move qubit q to position ``perm[q]``."""
        inv = np.argsort(perm)
        comps = []
        for p, v in self.components:
            t = v.reshape((2,) * self.n).transpose(inv)
            comps.append((p, t.reshape(-1)))
        return QuantumEnsemble(self.n, comps)


def _check_n(n):
    if not 1 <= n <= MAX_QUBITS:
        raise SimulatorError(f"n must be in [1, {MAX_QUBITS}], got {n}")


def basis_state(bits) -> np.ndarray:
    bits = list(bits)
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int("".join(str(int(b)) for b in bits), 2) if bits else 0] = 1
    return v


def ghz(n: int) -> QuantumEnsemble:
    _check_n(n)
    v = np.zeros(2 ** n, dtype=complex)
    v[0] = v[-1] = 1 / math.sqrt(2)
    return QuantumEnsemble(n, [(1.0, v)])


def x_product(n: int) -> QuantumEnsemble:
    """All spins along +x."""
    _check_n(n)
    return QuantumEnsemble(n, [(1.0, np.full(2 ** n, 2 ** (-n / 2), dtype=complex))])


def ghz_on(n: int, qubits) -> QuantumEnsemble:
    """GHZ on the listed qubits, |0> elsewhere."""
    _check_n(n)
    qubits = list(qubits)
    v = np.zeros(2 ** n, dtype=complex)
    mask = sum(1 << (n - 1 - q) for q in qubits)
    v[0] = v[mask] = 1 / math.sqrt(2)
    return QuantumEnsemble(n, [(1.0, v)])


def random_state(n: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
    return v / np.linalg.norm(v)


def random_ensemble(n: int, rng: np.random.Generator, k: int = 1) -> QuantumEnsemble:
    probs = rng.dirichlet(np.ones(k)) if k > 1 else np.ones(1)
    return QuantumEnsemble(n, [(p, random_state(n, rng)) for p in probs])


def tree_state(network, alphas) -> QuantumEnsemble:
    """``2**-1/2 sum_e alpha_e |0 on e, 1 elsewhere> + 2**-1/2 |1...1>``."""
    alphas = np.asarray(alphas, dtype=float)
    if alphas.shape != (network.h,):
        raise SimulatorError("need one alpha per hyperedge")
    if abs(float(alphas @ alphas) - 1) > 1e-9:
        raise SimulatorError("alphas must satisfy sum alpha_e**2 = 1")
    n = network.n
    _check_n(n)
    v = np.zeros(2 ** n, dtype=complex)
    full = 2 ** n - 1
    v[full] = 1 / math.sqrt(2)
    for a, e in zip(alphas, network.edges):
        idx = full & ~sum(1 << (n - 1 - q) for q in e)
        v[idx] += a / math.sqrt(2)
    return QuantumEnsemble(n, [(1.0, v / np.linalg.norm(v))])


def _mix_leaves(n, base_amp, noisy: dict[int, float]):
    """Expand ``p|b><b| + (1-p)/2 I`` noise on qubits held in |b> into pure components."""
    comps = []
    qubits = sorted(noisy)
    for flips in np.ndindex(*(2,) * len(qubits)):
        prob = 1.0
        v = base_amp.copy().reshape((2,) * n)
        for q, flip in zip(qubits, flips):
            p = noisy[q]
            prob *= (1 + p) / 2 if not flip else (1 - p) / 2
            if flip:
                v = np.flip(v, axis=q)
        if prob > 0:
            comps.append((prob, v.reshape(-1)))
    return comps


def star_state(n_leaves: int, t: float, noise=None) -> QuantumEnsemble:
    """Centre qubit 0 entangled with leaf 1, remaining leaves in noisy |0>.

    ``noise`` gives p_j for leaves 2..n_leaves (default 1, i.e. pure |0>).
    In the xz plane this yields B_01**2 = 2cos(t)**2 and
    B_0j**2 = 2 p_j**2 sin(t)**2.
    """
    if n_leaves < 1:
        raise SimulatorError("need at least one leaf")
    if not -1e-15 <= t <= math.pi / 4 + 1e-15:
        raise RegionError(f"t must lie in [0, pi/4], got {t}")
    n = n_leaves + 1
    _check_n(n)
    noise = [1.0] * (n_leaves - 1) if noise is None else [float(p) for p in noise]
    if len(noise) != n_leaves - 1:
        raise SimulatorError(f"need {n_leaves - 1} noise values, got {len(noise)}")
    if any(not 0 <= p <= 1 for p in noise):
        raise RegionError("noise parameters must lie in [0, 1]")
    s = math.sqrt(2) * math.sin(t)
    alpha = math.sqrt(max(0.0, (1 + s) / 2))
    beta = math.sqrt(max(0.0, (1 - s) / 2))
    v = np.zeros(2 ** n, dtype=complex)
    v[0] = alpha
    v[0b11 << (n - 2)] = beta
    comps = _mix_leaves(n, v, {j + 2: p for j, p in enumerate(noise) if p < 1})
    return QuantumEnsemble(n, comps)


# --- chain configuration ----------------------------------------------------

CHAIN_EDGES = ((0, 1), (0, 2), (2, 3))
STEINMETZ_TOL = 1e-12


def _clip01(x):
    return min(1.0, max(0.0, x))


def chain_p1_amplitudes(b12: float, b13: float, b34: float) -> tuple[float, float, float, float]:
    """Real amplitudes of a|0000> + b|1111> + c|1100> + d|0011> for given Bell values."""
    if b13 >= 1:
        return (math.sqrt((1 + b13) / 2), 0.0, 0.0, 0.0)
    denom = 1 - b13 ** 2
    u = math.acos(math.sqrt(_clip01((b12 ** 2 - 1) / denom)))
    w = math.asin(math.sqrt(_clip01((b34 ** 2 - 1) / denom)))
    theta = (u + w) / 2
    phi = (w - u) / 2
    r_plus = math.sqrt((1 + b13) / 2)
    r_minus = math.sqrt((1 - b13) / 2)
    return (r_plus * math.cos(phi), r_plus * math.sin(phi),
            r_minus * math.cos(theta), r_minus * math.sin(theta))


def classify_chain_region(b12: float, b13: float, b34: float) -> str:
    if b12 > 1 and b34 > 1:
        return "P1"
    if b12 > 1:
        return "P2"
    if b13 > 1:
        return "P3"
    if b34 > 1:
        return "P4"
    return "P5"


def _check_chain_targets(region, b12, b13, b34):
    if min(b12, b13, b34) < 0:
        raise RegionError("Bell targets must be nonnegative")
    if b12 ** 2 + b13 ** 2 > 2 + STEINMETZ_TOL or b13 ** 2 + b34 ** 2 > 2 + STEINMETZ_TOL:
        raise RegionError(f"targets {(b12, b13, b34)} violate the two elementary relations")
    # a named region accepts its closure, so boundary points belong to both sides
    above = lambda b: b >= 1 - STEINMETZ_TOL
    below = lambda b: b <= 1 + STEINMETZ_TOL
    inside = {
        "P1": above(b12) and above(b34),
        "P2": above(b12) and below(b34),
        "P3": above(b13),
        "P4": below(b12) and above(b34),
        "P5": below(b12) and below(b13) and below(b34),
    }
    if region not in inside:
        raise RegionError(f"unknown region {region!r}")
    if not inside[region]:
        actual = classify_chain_region(b12, b13, b34)
        raise RegionError(f"targets {(b12, b13, b34)} lie in region {actual}, not {region}")


def chain_state(region: str, targets) -> QuantumEnsemble:
    """Four-qubit state realising Bell values (B_01, B_02, B_23) in the xz plane.

    Regions follow the split of the intersection of B_01^2 + B_02^2 <= 2 and
    B_02^2 + B_23^2 <= 2: P1 both outer tests violated, P2 only B_01, P3 only
    the middle test, P4 only B_23 (mirror of P2), P5 everything local.
    """
    b12, b13, b34 = (float(x) for x in targets)
    region = region.upper()
    _check_chain_targets(region, b12, b13, b34)
    if region == "P1":
        a1, a2, a3, a4 = chain_p1_amplitudes(b12, b13, b34)
        v = np.zeros(16, dtype=complex)
        v[0b0000], v[0b1111], v[0b1100], v[0b0011] = a1, a2, a3, a4
        return QuantumEnsemble(4, [(1.0, v / np.linalg.norm(v))])
    if region == "P2":
        return _chain_p2(b12, b13, b34)
    if region == "P4":
        mirrored = _chain_p2(b34, b13, b12)
        return mirrored.permute([2, 3, 0, 1])
    if region == "P3":
        t = math.acos(min(1.0, b13 / math.sqrt(2)))
        s = math.sqrt(2) * math.sin(t)
        p2 = min(1.0, b12 / s) if s > 0 else 0.0
        p4 = min(1.0, b34 / s) if s > 0 else 0.0
        v = np.zeros(16, dtype=complex)
        v[0b0000] = math.sqrt(max(0.0, (1 + s) / 2))
        v[0b1010] = math.sqrt(max(0.0, (1 - s) / 2))
        noisy = {q: p for q, p in ((1, p2), (3, p4)) if p < 1}
        return QuantumEnsemble(4, _mix_leaves(4, v, noisy))
    if region == "P5":
        return _chain_classical(b12, b13, b34)
    raise RegionError(f"unknown region {region!r}")


def _chain_p2(b12, b13, b34) -> QuantumEnsemble:
    a1, a2, a3, a4 = chain_p1_amplitudes(b12, b13, 1.0)
    p = b34
    comps = []
    for (x, y), q2 in (((a1, a3), 0), ((a4, a2), 1)):
        w = x * x + y * y
        if w <= 0:
            continue
        for q3, pr in ((q2, (1 + p) / 2), (1 - q2, (1 - p) / 2)):
            if pr <= 0:
                continue
            v = np.zeros(16, dtype=complex)
            v[(0b00 << 2) | (q2 << 1) | q3] = x / math.sqrt(w)
            v[(0b11 << 2) | (q2 << 1) | q3] = y / math.sqrt(w)
            comps.append((w * pr, v))
    return QuantumEnsemble(4, comps)


def _chain_classical(b12, b13, b34) -> QuantumEnsemble:
    # z0 uniform; z1 = z0 f1, z2 = z0 f2, z3 = z2 f3 with P(f = +1) = (1 + B)/2.
    comps = []
    for z0 in (0, 1):
        for f1, f2, f3 in np.ndindex(2, 2, 2):
            pr = 0.5
            for f, b in ((f1, b12), (f2, b13), (f3, b34)):
                pr *= (1 + b) / 2 if f == 0 else (1 - b) / 2
            if pr <= 0:
                continue
            z1, z2 = z0 ^ f1, z0 ^ f2
            z3 = z2 ^ f3
            comps.append((pr, basis_state([z0, z1, z2, z3])))
    return QuantumEnsemble(4, comps)


# --- observables -------------------------------------------------------------

@lru_cache(maxsize=256)
def _index_tables(n: int):
    return np.arange(2 ** n, dtype=np.int64)


def _state_masks(P: PauliString) -> tuple[int, int]:
    n = P.n
    x = sum(1 << (n - 1 - q) for q in range(n) if P.x_mask >> q & 1)
    z = sum(1 << (n - 1 - q) for q in range(n) if P.z_mask >> q & 1)
    return x, z


def _parity(arr: np.ndarray) -> np.ndarray:
    arr = arr.copy()
    out = np.zeros_like(arr)
    while np.any(arr):
        out ^= arr & 1
        arr >>= 1
    return out


def apply_pauli(P: PauliString, vec: np.ndarray) -> np.ndarray:
    """``P |vec>`` using the bit-mask action, no matrices."""
    x, z = _state_masks(P)
    idx = _index_tables(P.n)
    src = idx ^ x
    signs = 1 - 2 * _parity(src & z)
    return (1j ** P.phase) * signs * vec[src]


def expectation(E: QuantumEnsemble, P: PauliString) -> float:
    if P.n != E.n:
        raise SimulatorError(f"string on {P.n} qubits, state on {E.n}")
    if not P.hermitian:
        raise SimulatorError(f"{P} is not Hermitian")
    val = sum(p * np.vdot(v, apply_pauli(P, v)) for p, v in E.components)
    return float(np.real(val))


def reduced_density(E: QuantumEnsemble, qubits) -> np.ndarray:
    """Density matrix of the listed qubits, in the listed order."""
    qubits = list(qubits)
    if len(set(qubits)) != len(qubits) or any(not 0 <= q < E.n for q in qubits):
        raise SimulatorError(f"bad qubit subset {qubits} for n={E.n}")
    rest = [q for q in range(E.n) if q not in qubits]
    m = len(qubits)
    rho = np.zeros((2 ** m, 2 ** m), dtype=complex)
    for p, v in E.components:
        A = v.reshape((2,) * E.n).transpose(qubits + rest).reshape(2 ** m, -1)
        rho += p * (A @ A.conj().T)
    return rho


# --- measurement planes and correlation tensors -------------------------------

@dataclass(frozen=True)
class MeasurementPlane:
    """Per-qubit orthonormal pair spanning the plane of local settings."""

    default: tuple[tuple[float, ...], tuple[float, ...]] = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0))
    overrides: tuple = ()
    name: str = "xy"

    def __post_init__(self):
        for a1, a2 in [self.default] + [ax for _, ax in self.overrides]:
            a1, a2 = np.asarray(a1, float), np.asarray(a2, float)
            if abs(a1 @ a1 - 1) > 1e-9 or abs(a2 @ a2 - 1) > 1e-9 or abs(a1 @ a2) > 1e-9:
                raise SimulatorError("plane axes must be orthonormal")

    @classmethod
    def named(cls, name: str) -> "MeasurementPlane":
        name = name.lower()
        if len(name) != 2 or name[0] == name[1] or not set(name) <= set("xyz"):
            raise SimulatorError(f"unknown plane {name!r}")
        return cls((tuple(AXES[name[0]]), tuple(AXES[name[1]])), (), name)

    def axes(self, q: int):
        for qq, ax in self.overrides:
            if qq == q:
                return np.asarray(ax[0], float), np.asarray(ax[1], float)
        return np.asarray(self.default[0], float), np.asarray(self.default[1], float)

    def operators(self, q: int) -> np.ndarray:
        """Shape (2, 2, 2): the two axis observables of qubit q."""
        a1, a2 = self.axes(q)
        return np.stack([np.tensordot(a1, SIGMA, 1), np.tensordot(a2, SIGMA, 1)])


XY = MeasurementPlane.named("xy")
XZ = MeasurementPlane.named("xz")


def _letters(k: int) -> str:
    return "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"[:k]


def tensor_from_rho(rho: np.ndarray, ops: list[np.ndarray]) -> np.ndarray:
    """``T[a_1..a_m] = Tr(rho (ops_1[a_1] x ... x ops_m[a_m]))``, shape (2,)*m."""
    m = len(ops)
    R = rho.reshape((2,) * (2 * m))
    L = _letters(3 * m + 1)
    rows, cols, axes = L[:m], L[m:2 * m], L[2 * m:3 * m]
    terms = [rows + cols] + [axes[k] + cols[k] + rows[k] for k in range(m)]
    T = np.einsum(",".join(terms) + "->" + axes, R, *ops, optimize=True)
    return T.real


def operator_from_grad(g: np.ndarray, ops: list[np.ndarray]) -> np.ndarray:
    """``sum_a g[a] ops_1[a_1] x ... x ops_m[a_m]`` as a 2**m matrix."""
    m = len(ops)
    L = _letters(3 * m + 1)
    rows, cols, axes = L[:m], L[m:2 * m], L[2 * m:3 * m]
    terms = [axes] + [axes[k] + rows[k] + cols[k] for k in range(m)]
    G = np.einsum(",".join(terms) + "->" + rows + cols, g.astype(complex), *ops, optimize=True)
    return G.reshape(2 ** m, 2 ** m)


@dataclass(frozen=True)
class CorrelationTensor:
    qubits: tuple[int, ...]
    values: np.ndarray
    plane: str = "xy"

    @property
    def m(self) -> int:
        return len(self.qubits)

    @property
    def t_squared(self) -> float:
        return float(np.sum(self.values ** 2))

    def __getitem__(self, label: str) -> float:
        """Look up by axis letters of a named plane, e.g. ``T["xyy"]``."""
        idx = tuple(self.plane.index(c) for c in label)
        return float(self.values[idx])

    def rows(self):
        for idx in np.ndindex(*self.values.shape):
            label = "".join(self.plane[i] for i in idx) if len(self.plane) == 2 else "".join("12"[i] for i in idx)
            yield label, float(self.values[idx])

    def to_csv_rows(self):
        q = " ".join(str(x) for x in self.qubits)
        return [(q, label, val) for label, val in self.rows()]


def correlation_tensor(E: QuantumEnsemble, qubits, plane: MeasurementPlane = XY) -> CorrelationTensor:
    qubits = tuple(qubits)
    rho = reduced_density(E, qubits)
    T = tensor_from_rho(rho, [plane.operators(q) for q in qubits])
    return CorrelationTensor(qubits, T, plane.name)


# --- Bell values ---------------------------------------------------------------

@dataclass(frozen=True)
class SettingsAssignment:
    """Two in-plane angles per party; angle 0 is the first plane axis."""

    angles: np.ndarray

    def __init__(self, angles):
        a = np.asarray(angles, dtype=float).reshape(-1, 2)
        if not np.all(np.isfinite(a)):
            raise SimulatorError("non-finite setting angle")
        a.setflags(write=False)
        object.__setattr__(self, "angles", a)

    @property
    def m(self) -> int:
        return self.angles.shape[0]

    def to_list(self):
        return [[float(x) for x in row] for row in self.angles]


def _setting_mats(angles: np.ndarray):
    c, s = np.cos(angles), np.sin(angles)
    # rows: s=+1, s=-1 ; cols: plane axis 1, axis 2
    U = np.stack([np.stack([c[:, 0] + c[:, 1], s[:, 0] + s[:, 1]], -1),
                  np.stack([c[:, 0] - c[:, 1], s[:, 0] - s[:, 1]], -1)], 1)
    dU1 = np.stack([np.stack([-s[:, 0], c[:, 0]], -1)] * 2, 1)
    dU2 = np.stack([np.stack([-s[:, 1], c[:, 1]], -1),
                    np.stack([s[:, 1], -c[:, 1]], -1)], 1)
    return U, dU1, dU2


def _multilinear(T: np.ndarray, mats) -> np.ndarray:
    out = T
    for k, M in enumerate(mats):
        out = np.moveaxis(np.tensordot(M, out, axes=([1], [k])), 0, k)
    return out


def wwzb_terms(T: np.ndarray, angles: np.ndarray) -> np.ndarray:
    """The 2**m signed sums inside the absolute values, indexed by sign vector."""
    U, _, _ = _setting_mats(np.asarray(angles, float).reshape(-1, 2))
    return _multilinear(T, list(U))


def wwzb_value_grad(T: np.ndarray, angles: np.ndarray):
    """Bell value with gradients w.r.t. the tensor entries and the angles."""
    angles = np.asarray(angles, float).reshape(-1, 2)
    m = T.ndim
    U, dU1, dU2 = _setting_mats(angles)
    f = _multilinear(T, list(U))
    scale = 2.0 ** -m
    B = scale * np.abs(f).sum()
    sg = scale * np.sign(f)
    gT = _multilinear(sg, [u.T for u in U])
    gA = np.zeros_like(angles)
    for k in range(m):
        for c, dU in ((0, dU1), (1, dU2)):
            mats = list(U)
            mats[k] = dU[k]
            gA[k, c] = float(np.sum(sg * _multilinear(T, mats)))
    return B, gT, gA


def wwzb_value(T, settings) -> float:
    values = T.values if isinstance(T, CorrelationTensor) else np.asarray(T, float)
    angles = settings.angles if isinstance(settings, SettingsAssignment) else np.asarray(settings, float)
    angles = angles.reshape(-1, 2)
    if angles.shape[0] != values.ndim:
        raise SimulatorError(f"settings for {angles.shape[0]} parties, tensor has {values.ndim}")
    return float(2.0 ** -values.ndim * np.abs(wwzb_terms(values, angles)).sum())


def chsh_optimal_angles(T: np.ndarray) -> np.ndarray:
    """Closed-form two-party settings reaching B = sqrt(sum T**2)."""
    U, sv, Vt = np.linalg.svd(T)
    norm = math.hypot(sv[0], sv[1])
    if norm == 0:
        return np.zeros((2, 2))
    a1, a2 = U[:, 0], U[:, 1]
    b1 = (sv[0] * Vt[0] + sv[1] * Vt[1]) / norm
    b2 = (sv[0] * Vt[0] - sv[1] * Vt[1]) / norm
    ang = lambda v: math.atan2(v[1], v[0])
    return np.array([[ang(a1), ang(a2)], [ang(b1), ang(b2)]])


def optimize_settings(T: np.ndarray, rng: np.random.Generator, restarts: int = 32,
                      starts=()) -> tuple[float, np.ndarray]:
    """Multi-start quasi-Newton maximisation of the Bell value over angles."""
    m = T.ndim
    cands = [np.asarray(s, float).reshape(m, 2) for s in starts]
    if m == 2:
        cands.append(chsh_optimal_angles(T))
    cands.append(np.tile([0.0, math.pi / 2], (m, 1)))
    cands.append(np.tile([math.pi / 4, -math.pi / 4], (m, 1)))
    cands.extend(rng.uniform(-math.pi, math.pi, size=(restarts, m, 2)))

    def fun(x):
        B, _, gA = wwzb_value_grad(T, x.reshape(m, 2))
        return -B, -gA.reshape(-1)

    best_B, best_x = -1.0, cands[0]
    for x0 in cands:
        B0 = wwzb_value(T, x0)
        if B0 > best_B:
            best_B, best_x = B0, x0
        res = minimize(fun, x0.reshape(-1), jac=True, method="BFGS",
                       options={"gtol": 1e-10, "maxiter": 400})
        B = -float(res.fun)
        if B > best_B + 1e-15:
            best_B, best_x = B, res.x.reshape(m, 2)
    return best_B, best_x


def max_bell_settings(E: QuantumEnsemble, qubits, plane: MeasurementPlane = XY,
                      restarts: int = 32, seed: int = 0, rng=None):
    """Best Bell value found over in-plane settings, with the settings."""
    qubits = tuple(qubits)
    if len(qubits) > 6:
        raise SimulatorError("settings optimisation supports at most 6 parties")
    rng = np.random.default_rng(seed) if rng is None else rng
    T = correlation_tensor(E, qubits, plane)
    B, angles = optimize_settings(T.values, rng, restarts)
    bound = math.sqrt(T.t_squared)
    assert B <= bound + 1e-6, f"Bell value {B} exceeds tensor bound {bound}"
    return B, SettingsAssignment(angles)


# --- Steinmetz grids ------------------------------------------------------------

@dataclass(frozen=True)
class GridPoint:
    config: str
    params: tuple[float, ...]
    edges: tuple[tuple[int, int], ...]
    targets: tuple[float, ...]
    achieved: tuple[float, ...]

    @property
    def deviation(self) -> float:
        return max(abs(a - t) for a, t in zip(self.achieved, self.targets))

    def relation_sums(self) -> list[float]:
        """B_a**2 + B_b**2 for every pair of tests sharing an observer."""
        out = []
        for (i, e), (j, f) in _pairs(self.edges):
            if set(e) & set(f):
                out.append(self.achieved[i] ** 2 + self.achieved[j] ** 2)
        return out


def _pairs(edges):
    items = list(enumerate(edges))
    return [(a, b) for k, a in enumerate(items) for b in items[k + 1:]]


def _achieved(E: QuantumEnsemble, edges, rng) -> tuple[float, ...]:
    return tuple(optimize_settings(correlation_tensor(E, e, XZ).values, rng, 0)[0] for e in edges)


def star_grid(n_observers: int = 4, points: int = 17, noise=None, seed: int = 0) -> list[GridPoint]:
    """Star states over an evenly spaced t in [0, pi/4]; centre is observer 0."""
    leaves = n_observers - 1
    noise = tuple([1.0] + [0.5] * (leaves - 2)) if noise is None else tuple(noise)
    edges = tuple((0, j) for j in range(1, n_observers))
    rng = np.random.default_rng(seed)
    out = []
    for t in np.linspace(0.0, math.pi / 4, points):
        E = star_state(leaves, float(t), noise)
        targets = (math.sqrt(2) * math.cos(t),) + tuple(math.sqrt(2) * p * math.sin(t) for p in noise)
        out.append(GridPoint("star", (float(t),), edges, targets, _achieved(E, edges, rng)))
    return out


def chain_targets(region: str, per_axis: int = 5) -> list[tuple[float, float, float]]:
    """Target triples (B_01, B_02, B_23) filling a region of the chain intersection."""
    region = region.upper()
    f = np.linspace(0.1, 1.0, per_axis)
    g = np.linspace(0.0, 1.0, per_axis)
    mid = np.linspace(0.0, 0.9, per_axis)
    out = []
    if region == "P1":
        for b13, f1, f2 in itertools.product(mid, f, f):
            r = 1 - b13 ** 2
            out.append((math.sqrt(1 + f1 * r), b13, math.sqrt(1 + f2 * r)))
    elif region in ("P2", "P4"):
        for b13, f1, g2 in itertools.product(mid, f, g):
            t = (math.sqrt(1 + f1 * (1 - b13 ** 2)), b13, g2)
            out.append(t if region == "P2" else t[::-1])
    elif region == "P3":
        for f1, g1, g2 in itertools.product(f, g, g):
            b13 = math.sqrt(1 + f1)
            r = math.sqrt(max(0.0, 2 - b13 ** 2))
            out.append((g1 * r, b13, g2 * r))
    elif region == "P5":
        for a, b, c in itertools.product(g, g, g):
            out.append((a, b, c))
    else:
        raise RegionError(f"unknown region {region!r}")
    return out


def chain_grid(region: str, per_axis: int = 5, seed: int = 0) -> list[GridPoint]:
    rng = np.random.default_rng(seed)
    out = []
    for targets in chain_targets(region, per_axis):
        E = chain_state(region, targets)
        out.append(GridPoint(f"chain-{region.upper()}", targets, CHAIN_EDGES, targets,
                             _achieved(E, CHAIN_EDGES, rng)))
    return out
