"""Exact two-phase simplex for ``min c.y  s.t.  M y = r, y >= 0``.

The tableau is kept in integers with a common positive divisor ``D``
(fraction-free pivoting): the true tableau is ``T / D``.  After each pivot on
``T[r][s]`` every other row becomes ``(T[i] * p - T[i][s] * T[r]) // D`` and
the division is exact.  Bland's rule picks entering and leaving columns, so
the method terminates on degenerate problems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass
class LPResult:
    status: str
    value: Optional[Fraction] = None
    # primal solution (optimal) or recession direction with M y = 0, c.y < 0 (unbounded)
    y: Optional[list[Fraction]] = None
    # simplex multipliers: pi M <= c and pi r = value (optimal);
    # Farkas ray: pi M <= 0 and pi r > 0 (infeasible)
    pi: Optional[list[Fraction]] = None


def _lcm_den(values) -> int:
    den = 1
    for q in values:
        qd = q.denominator
        if qd != 1:
            den = den * qd // math.gcd(den, qd)
    return den


def _scaled(x: Fraction, scale: int) -> int:
    # exact because scale is a multiple of the denominator
    return x.numerator * (scale // x.denominator)


def solve(M: Sequence[Sequence[Fraction]], r: Sequence[Fraction], c: Sequence[Fraction]) -> LPResult:
    p = len(M)
    q = len(c)
    width = q + p + 1
    rhs = width - 1

    # Each row is sign-flipped so r >= 0 and scaled to integers; remember how.
    row_factor: list[int] = []
    T: list[list[int]] = []
    for i in range(p):
        row = list(M[i]) + [Fraction(r[i])]
        sign = -1 if r[i] < 0 else 1
        scale = sign * _lcm_den(row)
        row_factor.append(scale)
        ints = [_scaled(x, scale) for x in row[:q]]
        art = [0] * p
        art[i] = 1
        T.append(ints + art + [_scaled(row[q], scale)])

    cost_scale = _lcm_den(c)
    obj2 = [_scaled(Fraction(x), cost_scale) for x in c] + [0] * (p + 1)
    obj1 = [0] * width
    for row in T:
        for j in range(q):
            obj1[j] -= row[j]
        obj1[rhs] -= row[rhs]

    rows = T + [obj2, obj1]
    basis = [q + i for i in range(p)]
    D = 1

    def pivot(pr: int, s: int) -> None:
        nonlocal D
        prow = rows[pr]
        piv = prow[s]
        for i, row in enumerate(rows):
            if i == pr:
                continue
            f = row[s]
            if f == 0:
                if piv != D:
                    rows[i] = [a * piv // D for a in row]
            else:
                rows[i] = [(a * piv - f * b) // D for a, b in zip(row, prow)]
        D = piv
        basis[pr] = s
        if D < 0:
            for i, row in enumerate(rows):
                rows[i] = [-a for a in row]
            D = -D

    def run(obj_index: int, ncols: int) -> Optional[int]:
        """Pivot to optimality; returns the entering column if unbounded."""
        while True:
            obj = rows[obj_index]
            s = -1
            for j in range(ncols):
                if obj[j] < 0:
                    s = j
                    break
            if s < 0:
                return None
            best = -1
            for i in range(p):
                a = rows[i][s]
                if a > 0:
                    if best < 0:
                        best = i
                        continue
                    # compare rhs_i / a  vs  rhs_best / a_best
                    lhs = rows[i][rhs] * rows[best][s]
                    rhs_ = rows[best][rhs] * a
                    if lhs < rhs_ or (lhs == rhs_ and basis[i] < basis[best]):
                        best = i
            if best < 0:
                return s
            pivot(best, s)

    obj2_i, obj1_i = p, p + 1

    # phase 1: minimize the sum of artificials (bounded below by zero)
    run(obj1_i, q + p)
    if rows[obj1_i][rhs] != 0:
        w = Fraction(-rows[obj1_i][rhs], D)
        pi = [
            (1 - Fraction(rows[obj1_i][q + k], D)) * row_factor[k] for k in range(p)
        ]
        return LPResult(INFEASIBLE, value=w, pi=pi)

    # drive zero-level artificials out of the basis where possible
    for i in range(p):
        if basis[i] >= q:
            row = rows[i]
            for j in range(q):
                if row[j] != 0:
                    pivot(i, j)
                    break

    rows.pop()  # phase-1 objective no longer needed
    entering = run(obj2_i, q)
    if entering is not None:
        ray = [Fraction(0)] * q
        ray[entering] = Fraction(1)
        for i in range(p):
            if basis[i] < q:
                ray[basis[i]] = Fraction(-rows[i][entering], D)
        return LPResult(UNBOUNDED, y=ray)

    y = [Fraction(0)] * q
    for i in range(p):
        if basis[i] < q:
            y[basis[i]] = Fraction(rows[i][rhs], D)
    obj = rows[obj2_i]
    value = Fraction(-obj[rhs], D * cost_scale)
    pi = [
        Fraction(-obj[q + k] * row_factor[k], D * cost_scale) for k in range(p)
    ]
    return LPResult(OPTIMAL, value=value, y=y, pi=pi)
