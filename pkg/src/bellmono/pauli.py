"""Pauli strings in symplectic form and anti-commuting partition certificates.

A string on n qubits is ``i**phase * prod_q X_q**x_q Z_q**z_q`` with the bit
masks stored as Python ints (bit q <-> qubit q).  Y is ``i X Z`` so the
string "Y" carries x=1, z=1, phase=1.  In this convention a string is
Hermitian exactly when ``phase + popcount(x & z)`` is even.

Text form is 1-indexed with identity implicit: ``"X1 Y3 X4"``, optionally
prefixed by ``-``, ``i`` or ``-i``.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

MAX_SEARCH_OBSERVABLES = 64
EXHAUSTIVE_SEARCH_LIMIT = 32


class PauliError(ValueError):
    pass


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True, order=True)
class PauliString:
    n: int
    x_mask: int
    z_mask: int
    phase: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise PauliError("PauliString needs n >= 1")
        full = (1 << self.n) - 1
        if self.x_mask & ~full or self.z_mask & ~full:
            raise PauliError("mask bits beyond n")
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def from_letters(cls, letters: dict[int, str] | str, n: int | None = None) -> "PauliString":
        """Build from ``{qubit: letter}`` (0-indexed) or a dense word like ``"XIY"``."""
        if isinstance(letters, str):
            letters = {q: c for q, c in enumerate(letters)}
            n = len(letters) if n is None else n
        if n is None:
            n = max(letters) + 1
        x = z = 0
        phase = 0
        for q, c in letters.items():
            c = c.upper()
            if c == "I":
                continue
            if c not in "XYZ":
                raise PauliError(f"unknown Pauli letter {c!r}")
            if c in "XY":
                x |= 1 << q
            if c in "YZ":
                z |= 1 << q
            if c == "Y":
                phase += 1
        return cls(n, x, z, phase)

    @classmethod
    def parse(cls, text: str, n: int | None = None) -> "PauliString":
        """Parse ``"X1 Y3 X4"`` (1-indexed qubits, identity implicit)."""
        tokens = text.replace("*", " ").split()
        sign = 0
        if tokens and tokens[0] in ("-", "+", "i", "-i", "+i"):
            sign = {"-": 2, "+": 0, "i": 1, "+i": 1, "-i": 3}[tokens.pop(0)]
        elif tokens and tokens[0].startswith("-"):
            sign = 2
            tokens[0] = tokens[0][1:]
        letters = {}
        for tok in tokens:
            c, idx = tok[0], tok[1:]
            if not idx.isdigit() or int(idx) < 1:
                raise PauliError(f"bad Pauli token {tok!r}")
            q = int(idx) - 1
            if q in letters:
                raise PauliError(f"qubit {q + 1} repeated in {text!r}")
            letters[q] = c
        top = max(letters) + 1 if letters else 1
        if n is None:
            n = top
        elif top > n:
            raise PauliError(f"{text!r} does not fit on {n} qubits")
        p = cls.from_letters(letters, n)
        return cls(p.n, p.x_mask, p.z_mask, p.phase + sign)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n, 0, 0, 0)

    @property
    def y_count(self) -> int:
        return _popcount(self.x_mask & self.z_mask)

    @property
    def hermitian(self) -> bool:
        return (self.phase + self.y_count) % 2 == 0

    @property
    def sign(self) -> complex:
        """Overall scalar relative to the plain letter product (1, i, -1 or -i)."""
        return 1j ** ((self.phase - self.y_count) % 4)

    @property
    def support(self) -> tuple[int, ...]:
        s = self.x_mask | self.z_mask
        return tuple(q for q in range(self.n) if s >> q & 1)

    def letter(self, q: int) -> str:
        return "IXZY"[(self.x_mask >> q & 1) | (self.z_mask >> q & 1) << 1]

    def letters(self) -> dict[int, str]:
        return {q: self.letter(q) for q in self.support}

    def weight(self) -> int:
        return len(self.support)

    def unsigned(self) -> "PauliString":
        """Same letters with unit (Hermitian, +1) scalar."""
        return PauliString(self.n, self.x_mask, self.z_mask, self.y_count)

    def embed(self, n: int, qubit_map) -> "PauliString":
        """Re-place on an n-qubit register, qubit q going to ``qubit_map[q]``."""
        x = z = 0
        for q in range(self.n):
            if self.x_mask >> q & 1:
                x |= 1 << qubit_map[q]
            if self.z_mask >> q & 1:
                z |= 1 << qubit_map[q]
        return PauliString(n, x, z, self.phase)

    def tensor(self, other: "PauliString") -> "PauliString":
        """Product of strings with disjoint support on a common register."""
        _check_n(self, other)
        if (self.x_mask | self.z_mask) & (other.x_mask | other.z_mask):
            raise PauliError("tensor() needs disjoint supports")
        return product(self, other)

    def __mul__(self, other):
        return product(self, other)

    def __str__(self):
        prefix = {1: "1", 1j: "i", -1: "-", -1j: "-i"}[self.sign]
        body = " ".join(f"{self.letter(q)}{q + 1}" for q in self.support) or "I"
        return body if prefix == "1" else f"{prefix} {body}"

    def __repr__(self):
        return f"PauliString({str(self)!r}, n={self.n})"


def _check_n(a: PauliString, b: PauliString):
    if a.n != b.n:
        raise PauliError(f"qubit count mismatch {a.n} vs {b.n}")


def commutes(a: PauliString, b: PauliString) -> bool:
    _check_n(a, b)
    return (_popcount(a.x_mask & b.z_mask) + _popcount(a.z_mask & b.x_mask)) % 2 == 0


def anticommutes(a: PauliString, b: PauliString) -> bool:
    return not commutes(a, b)


def product(a: PauliString, b: PauliString) -> PauliString:
    _check_n(a, b)
    # Z^z1 X^x2 = (-1)^{|z1 & x2|} X^x2 Z^z1
    phase = a.phase + b.phase + 2 * _popcount(a.z_mask & b.x_mask)
    return PauliString(a.n, a.x_mask ^ b.x_mask, a.z_mask ^ b.z_mask, phase)


def xy_plane_observables(qubits, n: int) -> list[PauliString]:
    """All 2**m strings with X or Y on each listed qubit, X before Y."""
    qubits = sorted(qubits)
    if not qubits:
        raise PauliError("empty qubit set")
    out = []
    for word in itertools.product("XY", repeat=len(qubits)):
        out.append(PauliString.from_letters(dict(zip(qubits, word)), n))
    return out


def swap_xy(p: PauliString, qubits=None) -> PauliString:
    """Exchange X and Y letters on the given qubits (all by default)."""
    qubits = p.support if qubits is None else qubits
    letters = p.letters()
    for q in qubits:
        if letters.get(q) == "X":
            letters[q] = "Y"
        elif letters.get(q) == "Y":
            letters[q] = "X"
    return PauliString.from_letters(letters, p.n)


# --- certificates ---------------------------------------------------------

@dataclass(frozen=True)
class PartitionCertificate:
    groups: tuple[tuple[PauliString, ...], ...]

    def __init__(self, groups):
        object.__setattr__(self, "groups", tuple(tuple(g) for g in groups))

    @property
    def claimed_bound(self) -> int:
        return len(self.groups)

    @property
    def n(self) -> int:
        return self.groups[0][0].n if self.groups and self.groups[0] else 0

    def observables(self) -> list[PauliString]:
        return [p for g in self.groups for p in g]

    def support(self) -> set[int]:
        return {q for p in self.observables() for q in p.support}

    def to_dict(self) -> dict:
        return {"n": self.n, "groups": [[str(p) for p in g] for g in self.groups]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d) -> "PartitionCertificate":
        groups = d["groups"]
        n = d.get("n")
        if n is None:
            n = max((PauliString.parse(s).n for g in groups for s in g), default=1)
        return cls([[PauliString.parse(s, n) for s in g] for g in groups])

    @classmethod
    def from_json(cls, text: str) -> "PartitionCertificate":
        return cls.from_dict(json.loads(text))


@dataclass
class VerificationReport:
    passed: bool
    bound: int
    violations: list[str] = field(default_factory=list)

    def __bool__(self):
        return self.passed

    def to_dict(self) -> dict:
        return {"passed": self.passed, "bound": self.bound, "violations": list(self.violations)}


def verify_certificate(cert: PartitionCertificate, required_cover) -> VerificationReport:
    """Check a partition: anti-commuting groups, exact cover, bound = group count."""
    problems = []
    seen: dict[tuple, tuple[int, int]] = {}
    for gi, group in enumerate(cert.groups):
        for k, p in enumerate(group):
            if not p.hermitian:
                problems.append(f"group {gi}: {p} is not Hermitian")
            key = (p.n, p.x_mask, p.z_mask)
            if key in seen:
                problems.append(f"group {gi}: {p} already listed in group {seen[key][0]}")
            else:
                seen[key] = (gi, k)
        for a, b in itertools.combinations(group, 2):
            if a.n != b.n:
                problems.append(f"group {gi}: {a} and {b} live on different registers")
            elif commutes(a, b):
                problems.append(f"group {gi}: {a} and {b} commute")
    required = {(p.n, p.x_mask, p.z_mask): p for p in required_cover}
    for key, p in required.items():
        if key not in seen:
            problems.append(f"missing required observable {p}")
    for key, (gi, k) in seen.items():
        if key not in required:
            problems.append(f"group {gi}: {cert.groups[gi][k]} is not a required observable")
    return VerificationReport(not problems, cert.claimed_bound, problems)


class PartitionNotFound(Exception):
    pass


class SearchBudgetExceeded(PartitionNotFound):
    """The search stopped early; a partition may still exist."""


def search_partition(observables, max_groups: int, max_nodes: int | None = None) -> PartitionCertificate:
    """Partition observables into at most ``max_groups`` pairwise anti-commuting groups.

    This is a clique cover of the anti-commutation graph, solved as a
    colouring of the commutation graph by backtracking.  Observables are
    placed most-constrained first (ties by input order) and a new group may
    only be opened as the next unused index, which removes relabelling
    symmetry.  The search is exhaustive, so ``PartitionNotFound`` means no
    such partition exists.  With ``max_nodes`` the search gives up after
    that many placements and raises ``SearchBudgetExceeded`` instead.
    """
    obs = list(observables)
    if len(obs) > MAX_SEARCH_OBSERVABLES:
        raise PauliError(f"search_partition handles at most {MAX_SEARCH_OBSERVABLES} observables")
    if any(not p.hermitian for p in obs):
        raise PauliError("observables must be Hermitian")
    if len({(p.x_mask, p.z_mask) for p in obs}) != len(obs):
        raise PauliError("observables must be distinct")
    if not obs:
        return PartitionCertificate([])
    N = len(obs)
    conflict = [[commutes(obs[i], obs[j]) and i != j for j in range(N)] for i in range(N)]
    colour = [-1] * N
    # forbidden[i][c] counts assigned neighbours of i coloured c
    forbidden = [[0] * max_groups for _ in range(N)]

    def pick():
        best, best_key = None, None
        for i in range(N):
            if colour[i] >= 0:
                continue
            sat = sum(1 for c in range(max_groups) if forbidden[i][c])
            deg = sum(1 for j in range(N) if conflict[i][j] and colour[j] < 0)
            key = (-sat, -deg, i)
            if best_key is None or key < best_key:
                best, best_key = i, key
        return best

    nodes = [0]

    def solve(used: int) -> bool:
        i = pick()
        if i is None:
            return True
        for c in range(min(used + 1, max_groups)):
            if forbidden[i][c]:
                continue
            nodes[0] += 1
            if max_nodes is not None and nodes[0] > max_nodes:
                raise SearchBudgetExceeded(f"gave up after {max_nodes} placements")
            colour[i] = c
            for j in range(N):
                if conflict[i][j]:
                    forbidden[j][c] += 1
            if solve(max(used, c + 1)):
                return True
            for j in range(N):
                if conflict[i][j]:
                    forbidden[j][c] -= 1
            colour[i] = -1
        return False

    if not solve(0):
        raise PartitionNotFound(f"no partition of {N} observables into {max_groups} anti-commuting groups")
    groups = [[] for _ in range(max(colour) + 1)]
    for i, c in enumerate(colour):
        groups[c].append(obs[i])
    return PartitionCertificate(groups)


def lift_certificate(cert_a: PartitionCertificate, cert_b: PartitionCertificate,
                     pivot: int) -> PartitionCertificate:
    """Join two certificates on disjoint registers through a new pivot qubit.

    Group i of the result is ``X_pivot A_i + Y_pivot B_i`` and group g+i its
    partner ``Y_pivot A_i + X_pivot B_i``.
    """
    g = cert_a.claimed_bound
    if g != cert_b.claimed_bound:
        raise PauliError(f"group count mismatch: {g} vs {cert_b.claimed_bound}")
    if cert_a.n != cert_b.n:
        raise PauliError("certificates must be placed on one common register")
    n = cert_a.n
    sa, sb = cert_a.support(), cert_b.support()
    if sa & sb:
        raise PauliError(f"certificates overlap on qubits {sorted(sa & sb)}")
    if not 0 <= pivot < n or pivot in sa or pivot in sb:
        raise PauliError(f"pivot qubit {pivot} is not a free qubit of the register")
    xp = PauliString.from_letters({pivot: "X"}, n)
    yp = PauliString.from_letters({pivot: "Y"}, n)
    first, second = [], []
    for ga, gb in zip(cert_a.groups, cert_b.groups):
        first.append([xp.tensor(p) for p in ga] + [yp.tensor(p) for p in gb])
        second.append([yp.tensor(p) for p in ga] + [xp.tensor(p) for p in gb])
    return PartitionCertificate(first + second)


def dense_matrix(p: PauliString):
    """Dense 2**n matrix, qubit 0 as the most significant tensor factor."""
    import numpy as np

    mats = {"I": np.eye(2), "X": np.array([[0, 1], [1, 0]]),
            "Y": np.array([[0, -1j], [1j, 0]]), "Z": np.diag([1.0, -1.0])}
    m = np.array([[1.0 + 0j]])
    for q in range(p.n):
        m = np.kron(m, mats[p.letter(q)])
    return p.sign * m
