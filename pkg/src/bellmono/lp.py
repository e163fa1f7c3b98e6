"""Exact rational fractional covering.

    minimize    sum_j cost_j * w_j
    subject to  sum_{j covers e} w_j >= 1   for every element e
                w >= 0

is solved through its packing dual (maximize sum_e y_e subject to
sum_{e in j} y_e <= cost_j, y >= 0), whose slack basis is feasible from
the start.  Pivoting uses Bland's rule, so the run is finite and the
returned optimum is reproducible for a fixed column order.  The primal
weights are read off the reduced costs of the dual slacks.
"""
from __future__ import annotations

from fractions import Fraction


class CoverageError(ValueError):
    """Some element is not covered by any column."""


def fractional_cover(n_elements: int, columns, costs) -> tuple[Fraction, list[Fraction]]:
    """Return ``(optimum, weights)`` for the covering LP.

    ``columns[j]`` is the collection of element indices covered by column j
    and ``costs[j]`` its nonnegative cost.
    """
    columns = [sorted(set(c)) for c in columns]
    costs = [Fraction(c) for c in costs]
    if any(c < 0 for c in costs):
        raise ValueError("costs must be nonnegative")
    covered = {e for c in columns for e in c}
    missing = [e for e in range(n_elements) if e not in covered]
    if missing:
        raise CoverageError(f"elements {missing} are not covered by any column")
    J, E = len(columns), n_elements
    if E == 0:
        return Fraction(0), [Fraction(0)] * J

    # Tableau rows: one per column constraint. Variables: y_0..y_{E-1}, s_0..s_{J-1}.
    width = E + J
    rows = []
    for j, col in enumerate(columns):
        r = [Fraction(0)] * (width + 1)
        for e in col:
            r[e] = Fraction(1)
        r[E + j] = Fraction(1)
        r[width] = costs[j]
        rows.append(r)
    obj = [Fraction(-1)] * E + [Fraction(0)] * J + [Fraction(0)]
    basis = [E + j for j in range(J)]

    while True:
        entering = next((k for k in range(width) if obj[k] < 0), None)
        if entering is None:
            break
        best = None
        for i, r in enumerate(rows):
            if r[entering] > 0:
                ratio = r[width] / r[entering]
                key = (ratio, basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            raise CoverageError("covering LP infeasible (dual unbounded)")
        pr = best[1]
        piv = rows[pr][entering]
        rows[pr] = [v / piv for v in rows[pr]]
        prow = rows[pr]
        for i, r in enumerate(rows):
            if i != pr and r[entering] != 0:
                f = r[entering]
                rows[i] = [a - f * b for a, b in zip(r, prow)]
        f = obj[entering]
        obj = [a - f * b for a, b in zip(obj, prow)]
        basis[pr] = entering

    weights = [obj[E + j] for j in range(J)]
    return obj[width], weights
