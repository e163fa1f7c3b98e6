"""Numerical tightness checks, the elementary-relation search loop, and the
symbolic obstruction for odd cyclic networks.

Tightness here is numerical evidence only: a local optimiser over pure
states and in-plane settings either reaches the derived bound or it does
not.  Failing to reach a bound never proves it is loose.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce

import numpy as np
from scipy.optimize import minimize

from .pauli import (PartitionNotFound, PauliError, PauliString, anticommutes, product,
                    search_partition)
from .relations import (CERTIFIED, CONJECTURED, ElementaryRelation, MonogamyRelation,
                        builtin_catalog, catalog_lookup, optimal_fractional_cover,
                        required_observables)
from .simulator import (MAX_QUBITS, MeasurementPlane, QuantumEnsemble, SettingsAssignment,
                        SimulatorError, correlation_tensor, expectation, ghz_on, optimize_settings,
                        tree_state, wwzb_value, wwzb_value_grad, x_product)
from .topology import Hypergraph, SizeError, cyclic_hypergraph, enumerate_hypergraphs, is_subgraph

TIGHT = "numerically-tight"
GAP = "gap-found"
INCONCLUSIVE = "inconclusive"
EXCEEDED = "exceeded"

SOUNDNESS_TOL = 1e-6
SNAP_TOL = 1e-3
SNAP_MAX_DENOMINATOR = 8


class SoundnessError(AssertionError):
    """A state beat a certified bound: a bug somewhere, never a physics result."""


@dataclass(frozen=True)
class OptimizeConfig:
    seed: int = 0
    restarts: int = 32
    tight_tol: float = 1e-4
    plane: str = "xy"
    settings_restarts: int = 4
    maxiter: int = 400
    use_seeds: bool = True
    joint: bool = True
    # stop once a certified bound is reached; the optimiser cannot do better
    stop_at_bound: bool = True

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass
class TightnessVerdict:
    relation: MonogamyRelation
    best_lhs: float
    bound: float
    state: QuantumEnsemble | None
    settings: list[SettingsAssignment]
    plane: str
    status: str
    edge_values: list[float] = field(default_factory=list)
    starts: int = 0
    best_start: str = ""
    config: OptimizeConfig | None = None

    @property
    def gap(self) -> float:
        return self.bound - self.best_lhs

    def to_dict(self, include_state: bool = True) -> dict:
        d = {
            "relation": self.relation.to_dict(),
            "bound": self.bound,
            "best_lhs": self.best_lhs,
            "gap": self.gap,
            "status": self.status,
            "checker": "numeric optimizer (local search, no supremum claim)",
            "edge_bell_values": self.edge_values,
            "starts": self.starts,
            "best_start": self.best_start,
            "witness": {
                "plane": self.plane,
                "settings": [s.to_list() for s in self.settings],
                "state": self.state.to_dict() if (include_state and self.state is not None) else None,
            },
        }
        if self.config is not None:
            d["config"] = self.config.to_dict()
        return d


# --- fast pure-state objective -----------------------------------------------

def _edge_basis(plane: MeasurementPlane, edge) -> np.ndarray:
    """Stack of the 2**m in-plane product operators on ``edge``, tensor-index order."""
    ops = [plane.operators(q) for q in edge]
    mats = [reduce(np.kron, [ops[k][a[k]] for k in range(len(edge))])
            for a in itertools.product((0, 1), repeat=len(edge))]
    return np.array(mats)


class _Objective:
    """``sum_e c_e B_e**2`` for a pure state, with its gradient."""

    def __init__(self, network: Hypergraph, coefficients, plane: MeasurementPlane):
        self.n = network.n
        self.edges = [tuple(e) for e in network.edges]
        self.coef = np.array([float(c) for c in coefficients])
        self.basis = [_edge_basis(plane, e) for e in self.edges]
        self.rest = [[q for q in range(self.n) if q not in e] for e in self.edges]
        self.n_ang = sum(2 * len(e) for e in self.edges)
        self.dim = 2 ** self.n

    def split(self, x):
        d = self.dim
        v = x[:d] + 1j * x[d:2 * d]
        angles, off = [], 2 * d
        for e in self.edges:
            k = 2 * len(e)
            angles.append(x[off:off + k].reshape(len(e), 2))
            off += k
        return v, angles

    def pack(self, v, angles):
        return np.concatenate([v.real, v.imag] + [np.asarray(a, float).reshape(-1) for a in angles])

    def tensors(self, psi):
        pt = psi.reshape((2,) * self.n)
        out = []
        for e, rest, O in zip(self.edges, self.rest, self.basis):
            m = len(e)
            A = pt.transpose(list(e) + rest).reshape(2 ** m, -1)
            rho = A @ A.conj().T
            T = np.einsum("aij,ji->a", O, rho).real
            out.append(T.reshape((2,) * m))
        return out

    def values(self, psi, angles) -> list[float]:
        return [wwzb_value(T, a) for T, a in zip(self.tensors(psi), angles)]

    def __call__(self, x):
        v, angles = self.split(x)
        nrm2 = float(np.vdot(v, v).real)
        if nrm2 < 1e-300:
            return 0.0, np.zeros_like(x)
        psi = v / math.sqrt(nrm2)
        pt = psi.reshape((2,) * self.n)
        F = 0.0
        Hv = np.zeros((2,) * self.n, dtype=complex)
        g_lin = 0.0
        g_ang = []
        for e, rest, O, c, a in zip(self.edges, self.rest, self.basis, self.coef, angles):
            m = len(e)
            A = pt.transpose(list(e) + rest).reshape(2 ** m, -1)
            rho = A @ A.conj().T
            T = np.einsum("aij,ji->a", O, rho).real.reshape((2,) * m)
            B, gT, gA = wwzb_value_grad(T, a)
            F += c * B * B
            gT = (2 * c * B) * gT.reshape(-1)
            g_ang.append((2 * c * B) * gA.reshape(-1))
            g_lin += float(gT @ T.reshape(-1))
            G = np.einsum("a,aij->ij", gT, O).reshape((2,) * (2 * m))
            out = np.tensordot(G, pt, axes=(list(range(m, 2 * m)), list(e)))
            Hv += np.moveaxis(out, list(range(m)), list(e))
        w = (Hv.reshape(-1) - g_lin * psi) * (2 / math.sqrt(nrm2))
        grad = np.concatenate([w.real, w.imag] + g_ang)
        return F, grad


def evaluate_relation(rel: MonogamyRelation, state: QuantumEnsemble, settings,
                      plane: MeasurementPlane | str = "xy") -> tuple[float, list[float]]:
    """``sum_e c_e B_e**2`` for given state and per-edge settings, via dense simulation."""
    plane = MeasurementPlane.named(plane) if isinstance(plane, str) else plane
    vals = []
    for e, s in zip(rel.network.edges, settings):
        T = correlation_tensor(state, e, plane)
        vals.append(wwzb_value(T, s))
    lhs = sum(float(c) * b * b for c, b in zip(rel.coefficients, vals))
    return lhs, vals


def _seed_states(network: Hypergraph, rng) -> list[tuple[str, np.ndarray]]:
    n = network.n
    out = [(f"ghz{list(e)}", ghz_on(n, e).components[0][1]) for e in network.edges]
    out.append(("x_product", x_product(n).components[0][1]))
    alphas = rng.uniform(0.1, 1.0, size=network.h)
    out.append(("tree_state", tree_state(network, alphas / np.linalg.norm(alphas)).components[0][1]))
    return out


def optimize_relation(rel: MonogamyRelation, config: OptimizeConfig | None = None) -> TightnessVerdict:
    """Search for a pure state and settings maximising the relation's left side.

    Each start (analytic witnesses first, then random states) gets per-test
    settings from a multistart over angles, then a joint L-BFGS run over the
    state amplitudes and all angles.
    """
    cfg = config or OptimizeConfig()
    G = rel.network
    if G.n > MAX_QUBITS:
        raise SizeError(f"network has {G.n} observers; the simulator stops at {MAX_QUBITS} qubits")
    if not G.edges:
        raise SimulatorError("relation has no Bell tests")
    if max(len(e) for e in G.edges) > 6:
        raise SizeError("Bell tests with more than 6 parties are not supported")
    plane = MeasurementPlane.named(cfg.plane)
    rng = np.random.default_rng(cfg.seed)
    obj = _Objective(G, rel.coefficients, plane)
    bound = float(rel.bound)
    certified = rel.status == CERTIFIED

    starts = _seed_states(G, rng) if cfg.use_seeds else []
    for k in range(cfg.restarts):
        v = rng.normal(size=obj.dim) + 1j * rng.normal(size=obj.dim)
        starts.append((f"random{k}", v / np.linalg.norm(v)))

    best = (-math.inf, None, None, "")
    count = 0
    for label, v in starts:
        count += 1
        psi = v / np.linalg.norm(v)
        angles = [optimize_settings(T, rng, cfg.settings_restarts)[1] for T in obj.tensors(psi)]
        x = obj.pack(psi, angles)
        F, _ = obj(x)
        cand = [(F, x)]
        if cfg.joint:
            res = minimize(lambda y: tuple(-t for t in obj(y)), x, jac=True, method="L-BFGS-B",
                           options={"maxiter": cfg.maxiter, "gtol": 1e-10, "ftol": 1e-14})
            if np.all(np.isfinite(res.x)):
                cand.append((-float(res.fun), res.x))
        for Fc, xc in cand:
            if np.isfinite(Fc) and Fc > best[0] + 1e-12:
                vv, aa = obj.split(xc)
                best = (Fc, vv / np.linalg.norm(vv), [np.array(a) for a in aa], label)
        if cfg.stop_at_bound and certified and best[0] >= bound - 1e-3 * cfg.tight_tol:
            break

    if best[1] is None:
        return TightnessVerdict(rel, float("nan"), bound, None, [], plane.name, INCONCLUSIVE,
                                starts=count, config=cfg)
    _, psi, angles, label = best
    # polish settings for the final state and re-evaluate through the dense simulator
    Ts = obj.tensors(psi)
    angles = [max(((wwzb_value(T, a), a), optimize_settings(T, rng, 0, starts=[a])),
                  key=lambda t: t[0])[1] for T, a in zip(Ts, angles)]
    state = QuantumEnsemble.pure(psi)
    settings = [SettingsAssignment(a) for a in angles]
    lhs, vals = evaluate_relation(rel, state, settings, plane)
    if lhs > bound + SOUNDNESS_TOL:
        if certified:
            raise SoundnessError(f"value {lhs} beats certified bound {bound} on {G}")
        status = EXCEEDED
    elif bound - lhs <= cfg.tight_tol:
        status = TIGHT
    else:
        status = GAP
    return TightnessVerdict(rel, lhs, bound, state, settings, plane.name, status, vals, count, label, cfg)


def seed_witness_value(rel: MonogamyRelation, seed: int = 0) -> float | None:
    """Best value from the analytic witnesses alone (settings optimised, state fixed)."""
    if rel.network.n > MAX_QUBITS or not rel.network.edges:
        return None
    cfg = OptimizeConfig(seed=seed, restarts=0, joint=False, settings_restarts=4)
    return optimize_relation(rel, cfg).best_lhs


# --- elementary relation search ------------------------------------------------

@dataclass(frozen=True)
class SearchConfig:
    seed: int = 0
    restarts: int = 8
    tight_tol: float = 1e-4
    h_max: int | None = None
    certify: bool = True
    certify_nodes: int = 200_000
    settings_restarts: int = 2

    def optimize_config(self) -> OptimizeConfig:
        return OptimizeConfig(seed=self.seed, restarts=self.restarts, tight_tol=self.tight_tol,
                              settings_restarts=self.settings_restarts)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass
class SearchLog:
    entries: list[dict] = field(default_factory=list)
    catalog: list[ElementaryRelation] = field(default_factory=list)

    def record(self, **entry):
        self.entries.append(entry)

    def to_jsonl(self) -> str:
        return "".join(json.dumps(e, sort_keys=True, ensure_ascii=False) + "\n" for e in self.entries)

    def added(self) -> list[dict]:
        return [e for e in self.entries if e.get("action") == "added"]


def snap_bound(value: float) -> tuple[Fraction, bool]:
    """Nearest fraction with denominator <= 8 if within 1e-3, else a fine rational (unsnapped)."""
    f = Fraction(value).limit_denominator(SNAP_MAX_DENOMINATOR)
    if abs(float(f) - value) <= SNAP_TOL:
        return f, True
    return Fraction(value).limit_denominator(10 ** 6), False


def _seed_relations(m: int) -> list[ElementaryRelation]:
    if m == 2:
        return [catalog_lookup("pair")]
    if m == 3:
        return [catalog_lookup("overlap2")]
    return []


def elementary_search(n_max: int, m: int, config: SearchConfig | None = None,
                      initial=None) -> SearchLog:
    """Brute-force listing of elementary relations for m-party Bell tests.

    For every network (n ascending, then number of tests ascending) the
    current relation set is averaged into a bound, the bound is checked
    numerically, and any gap turns the network itself into a new relation.
    Relations on subnetworks of a new relation with the same bound are then
    dropped, since the new one reproduces them through its sub-patterns.
    """
    cfg = config or SearchConfig()
    if m == 3 and n_max > 7 or n_max > 8:
        raise SizeError("elementary_search is limited to n <= 7 for tripartite tests")
    if m < 2:
        raise ValueError("Bell tests need at least two parties")
    rels = list(initial) if initial is not None else _seed_relations(m)
    log = SearchLog()
    log.record(event="start", n_max=n_max, m=m, config=cfg.to_dict(),
               checker="numeric optimizer (stand-in for an exact tightness check)",
               initial=[r.name for r in rels])
    opt_cfg = cfg.optimize_config()
    counter = 0
    for n in range(m, n_max + 1):
        h_top = math.comb(n, m) if cfg.h_max is None else min(cfg.h_max, math.comb(n, m))
        for h in range(1, h_top + 1):
            for G in enumerate_hypergraphs(n, h, m, require_cover=True):
                entry = {"event": "network", "n": n, "h": h, "network": [list(e) for e in G.edges],
                         "catalog": [r.name for r in rels]}
                try:
                    derived = optimal_fractional_cover(G, rels).normalized()
                except ValueError as exc:
                    entry.update(action="skipped", reason=str(exc))
                    log.record(**entry)
                    continue
                verdict = optimize_relation(derived, opt_cfg)
                entry.update(derived_bound=str(derived.bound), derived_status=derived.status,
                             best_lhs=round(verdict.best_lhs, 9), status=verdict.status)
                if verdict.status != GAP:
                    entry["action"] = "none"
                    log.record(**entry)
                    continue
                counter += 1
                bound, snapped = snap_bound(verdict.best_lhs)
                cert, cert_note = None, "not attempted"
                if cfg.certify and snapped and bound.denominator == 1:
                    try:
                        cert = search_partition(required_observables(G), int(bound), cfg.certify_nodes)
                        cert_note = "found"
                    except PartitionNotFound as exc:
                        cert_note = f"none: {exc}"
                    except PauliError as exc:
                        cert_note = f"skipped: {exc}"
                new = ElementaryRelation(f"S{m}.{n}.{h}.{counter}", G, bound, cert)
                if cert is not None:
                    new.verify()
                removed = [r.name for r in rels
                           if r.bound == bound and r.pattern.h < G.h and is_subgraph(r.pattern, G)]
                rels = [r for r in rels if r.name not in removed] + [new]
                entry.update(action="added", name=new.name, bound=str(bound), snapped=snapped,
                             status_of_new=CERTIFIED if cert is not None else CONJECTURED,
                             certificate=cert_note, removed=removed)
                log.record(**entry)
    log.catalog = rels
    log.record(event="end", catalog=[{"name": r.name, "network": [list(e) for e in r.pattern.edges],
                                      "bound": str(r.bound), "certified": r.certificate is not None}
                                     for r in rels])
    return log


# --- cyclic obstruction --------------------------------------------------------

LEMMA_MARGIN = (math.sqrt(2) - 1) ** 2


@dataclass
class ObstructionReport:
    h: int
    x_groups: list[list[PauliString]]
    m_observables: dict[str, list[PauliString]]
    checks: list[tuple[str, bool]]
    lemma_bound: float = LEMMA_MARGIN
    complementarity_budget: float = 1.0

    @property
    def passed(self) -> bool:
        return all(ok for _, ok in self.checks)

    @property
    def lhs(self) -> float:
        """X_1 + X_2 + <M M>**2 under the equal-share assumption."""
        return 0.5 + 0.5 + self.lemma_bound

    @property
    def contradiction(self) -> bool:
        return self.passed and self.lhs > self.complementarity_budget

    def to_dict(self) -> dict:
        return {
            "h": self.h,
            "n_qubits": 2 * self.h,
            "x_groups": [[str(p) for p in g] for g in self.x_groups],
            "m_observables": {k: [str(p) for p in v] for k, v in self.m_observables.items()},
            "checks": [{"check": name, "passed": ok} for name, ok in self.checks],
            "all_passed": self.passed,
            "lemma_bound": self.lemma_bound,
            "lemma_bound_exact": "3 - 2*sqrt(2)",
            "complementarity_budget": self.complementarity_budget,
            "lhs": self.lhs,
            "margin": self.lhs - self.complementarity_budget,
            "contradiction": self.contradiction,
        }


def _support(ps) -> set[int]:
    return {q for p in ps for q in p.support}


def cyclic_obstruction(h: int) -> ObstructionReport:
    """Pauli-algebra checks showing the averaging bound of C_h cannot be met.

    With every Bell test at its share, the first two tests' correlation sums
    are 1/2 each; two rotated observables further round the ring each have
    mean 1/sqrt(2), and their product joins the first two tests' observables
    in one anti-commuting set, which overflows the budget of 1.
    """
    if h < 5 or h % 2 == 0:
        raise ValueError(
            f"h={h}: need odd h >= 5; for smaller rings the two rotated observables "
            "share qubits and cannot be measured jointly")
    n = 2 * h

    def P(text):
        return PauliString.parse(text, n)

    x1 = [P("X1 X2 Y3"), P("X1 Y2 Y3")]
    x2 = [P("X3 X4 Y5"), P("X3 Y4 Y5")]
    m6 = [P("X5 X6 Y7"), P("X5 Y6 Y7")]
    mlast = [P(f"X{n - 1} X{n} Y1"), P(f"X{n - 1} Y{n} Y1")]
    checks = []
    xs = x1 + x2
    for a, b in itertools.combinations(xs, 2):
        checks.append((f"{a} anticommutes with {b}", anticommutes(a, b)))
    for name, pair in (("M6", m6), (f"M{n}", mlast)):
        checks.append((f"{name} terms anticommute (so {name}**2 = 1)", anticommutes(*pair)))
    checks.append(("M6 and M%d have disjoint support" % n, not (_support(m6) & _support(mlast))))
    for a, b in itertools.product(m6, mlast):
        ab = product(a, b)
        checks.append((f"{ab} is Hermitian", ab.hermitian))
        for x in xs:
            checks.append((f"{ab} anticommutes with {x}", anticommutes(ab, x)))
    return ObstructionReport(h, [x1, x2], {"M6": m6, f"M{n}": mlast}, checks)


# --- marginal lemma ------------------------------------------------------------

@dataclass(frozen=True)
class LemmaReport:
    mean_a: float
    mean_b: float
    mean_ab: float
    applicable: bool
    lower_bound: float
    margin: float

    @property
    def holds(self) -> bool:
        return not self.applicable or self.margin >= -1e-12

    def to_dict(self) -> dict:
        return {"mean_a": self.mean_a, "mean_b": self.mean_b, "mean_ab": self.mean_ab,
                "applicable": self.applicable, "lower_bound": self.lower_bound,
                "margin": self.margin, "holds": self.holds}


def check_marginal_lemma(E: QuantumEnsemble, A: PauliString, B: PauliString) -> LemmaReport:
    """Check <AB>**2 >= (|<A>| + |<B>| - 1)**2 for disjoint dichotomic A, B."""
    if set(A.support) & set(B.support):
        raise PauliError(f"{A} and {B} overlap; the inequality needs disjoint supports")
    if not (A.hermitian and B.hermitian):
        raise PauliError("observables must be Hermitian")
    a, b = expectation(E, A), expectation(E, B)
    ab = expectation(E, product(A, B))
    s = abs(a) + abs(b)
    if s < 1:
        return LemmaReport(a, b, ab, False, 0.0, ab * ab)
    lb = (s - 1) ** 2
    return LemmaReport(a, b, ab, True, lb, ab * ab - lb)


def cyclic_relation(h: int, catalog=None) -> MonogamyRelation:
    """Averaging relation for the ring C_h (normalised)."""
    G = cyclic_hypergraph(h)
    catalog = catalog if catalog is not None else [catalog_lookup("overlap1")]
    return optimal_fractional_cover(G, catalog).normalized()
