"""Exact feasibility, optimization, implication and vertex enumeration.

All answers come with evidence that can be re-checked by exact arithmetic:
feasibility returns a point or a Farkas infeasibility certificate, implication
returns nonnegative multipliers or a counterexample point.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Optional, Sequence, Union

from . import _simplex
from .poly_core import (
    EQ,
    LE,
    InequalitySystem,
    LinearConstraint,
    PolyError,
    VarId,
    canonicalize,
    combine,
    format_rational,
    lhs_value,
    normalize,
    point_to_json,
)

Point = dict  # dict[VarId, Fraction]


class GeometryError(PolyError):
    pass


class Unbounded(GeometryError):
    def __init__(self, message: str = "polyhedron is unbounded in the requested direction", direction=None):
        super().__init__(message)
        self.direction = direction


class InfeasibleSystem(GeometryError):
    def __init__(self, certificate: "InfeasibilityCertificate"):
        super().__init__("constraint system is infeasible")
        self.certificate = certificate


# ---------------------------------------------------------------- certificates


@dataclass(frozen=True)
class FarkasCertificate:
    """``target`` follows from ``premises`` by the weighted sum ``multipliers``.

    Multipliers on ``<=`` premises are nonnegative; equality premises may carry
    either sign.  ``slack`` is ``target.rhs`` minus the weighted rhs sum.
    """

    premises: tuple
    target: LinearConstraint
    multipliers: Mapping[int, Fraction]

    @property
    def slack(self) -> Fraction:
        _, rhs = combine((w, self.premises[i]) for i, w in self.multipliers.items())
        return self.target.rhs - rhs

    def verify(self) -> bool:
        if self.target.rel != LE:
            return False
        for i, w in self.multipliers.items():
            if self.premises[i].rel == LE and w < 0:
                return False
        lhs, rhs = combine((w, self.premises[i]) for i, w in self.multipliers.items())
        return lhs == self.target.as_dict() and rhs <= self.target.rhs

    def to_json(self, with_premises: bool = False) -> dict:
        out = {
            "target": self.target.to_json(),
            "multipliers": {str(i): format_rational(w) for i, w in sorted(self.multipliers.items())},
            "slack": format_rational(self.slack),
        }
        if with_premises:
            out["premises"] = [c.to_json() for c in self.premises]
        return out


@dataclass(frozen=True)
class InfeasibilityCertificate:
    """Multipliers whose weighted row sum reads ``0 <= negative``."""

    rows: tuple
    multipliers: Mapping[int, Fraction]

    def verify(self) -> bool:
        for i, w in self.multipliers.items():
            if self.rows[i].rel == LE and w < 0:
                return False
        lhs, rhs = combine((w, self.rows[i]) for i, w in self.multipliers.items())
        return not lhs and rhs < 0

    def to_json(self) -> dict:
        return {
            "rows": [c.to_json() for c in self.rows],
            "multipliers": {str(i): format_rational(w) for i, w in sorted(self.multipliers.items())},
        }


@dataclass(frozen=True)
class Infeasible:
    """Verdict of :func:`feasible` when no point exists."""

    certificate: InfeasibilityCertificate

    def __bool__(self) -> bool:
        return False


@dataclass(frozen=True)
class NotImplied:
    """A point satisfying the premises and violating the target."""

    point: Point
    target: LinearConstraint

    def __bool__(self) -> bool:
        return False

    def to_json(self) -> dict:
        return {"implied": False, "target": self.target.to_json(), "point": point_to_json(self.point)}


# ------------------------------------------------------------- LP plumbing


def _columns(rows: Sequence[LinearConstraint]):
    """Dual-form columns: one per <= row, a +/- pair per = row."""
    cols = []
    for i, c in enumerate(rows):
        cols.append((i, 1))
        if c.rel == EQ:
            cols.append((i, -1))
    return cols


def _dual_lp(rows: Sequence[LinearConstraint], vars_: Sequence[VarId], objective: Mapping[VarId, Fraction],
             normalizer: bool = False):
    """Solve ``min sum y_i b_i  s.t.  sum y_i a_i = objective``; y_i >= 0 on <= rows.

    With ``normalizer`` an extra row ``sum y = 1`` is appended and the objective
    vector is extended with a trailing 1 (the feasibility form).
    Returns (LPResult, columns, n) where n is the number of variable rows.
    """
    index = {v: k for k, v in enumerate(vars_)}
    cols = _columns(rows)
    n = len(vars_)
    zero = Fraction(0)
    M = [[zero] * len(cols) for _ in range(n + (1 if normalizer else 0))]
    cost = []
    for j, (i, sign) in enumerate(cols):
        c = rows[i]
        for v, q in c.coeffs:
            M[index[v]][j] = q if sign > 0 else -q
        cost.append(c.rhs if sign > 0 else -c.rhs)
        if normalizer:
            M[n][j] = Fraction(1)
    r = [Fraction(objective.get(v, 0)) for v in vars_]
    if normalizer:
        r.append(Fraction(1))
    return _simplex.solve(M, r, cost), cols, n


def _multipliers(y, cols) -> dict[int, Fraction]:
    out: dict[int, Fraction] = {}
    for (i, sign), w in zip(cols, y):
        if w:
            out[i] = out.get(i, Fraction(0)) + (w if sign > 0 else -w)
    return {i: w for i, w in out.items() if w != 0}


def _vars_of(sys: InequalitySystem, *extra) -> tuple[VarId, ...]:
    vs = set(sys.vars)
    for e in extra:
        vs.update(e)
    return tuple(sorted(vs))


# ---------------------------------------------------------------- feasibility


def _pin(sys: InequalitySystem, fixed: Mapping[VarId, Fraction]) -> tuple[LinearConstraint, ...]:
    pinned = tuple(LinearConstraint({v: 1}, EQ, Fraction(val)) for v, val in sorted(fixed.items()))
    return tuple(sys.constraints) + pinned


def feasible(sys: InequalitySystem, fixed: Optional[Mapping[VarId, Fraction]] = None) -> Union[Point, Infeasible]:
    """Find a rational point of ``sys`` with the ``fixed`` coordinates pinned.

    Returns the point (a dict over ``sys.vars``) or an :class:`Infeasible`
    verdict carrying a certificate over ``sys`` rows followed by the pins.
    """
    fixed = dict(fixed or {})
    for v in fixed:
        if v not in sys.vars:
            raise GeometryError(f"fixed variable {v} is not in the system")
    rows = _pin(sys, fixed)
    vars_ = sys.vars
    res, cols, n = _dual_lp(rows, vars_, {}, normalizer=True)
    if res.status == _simplex.OPTIMAL and res.value < 0:
        cert = InfeasibilityCertificate(rows, _multipliers(res.y, cols))
        return Infeasible(cert)
    if res.status == _simplex.OPTIMAL:
        # pi = (x, s) maximizes the uniform slack s >= 0
        point = {v: res.pi[k] for k, v in enumerate(vars_)}
    else:
        # no y with sum a_i y_i = 0 and sum y = 1: a strict direction x exists
        x = res.pi[:n]
        s = res.pi[n]
        need = max([Fraction(0)] + [-c.rhs for c in rows if c.rel == LE])
        lam = need / s
        point = {v: lam * x[k] for k, v in enumerate(vars_)}
    for v, val in fixed.items():
        point[v] = Fraction(val)
    return point


def _require_feasible(sys: InequalitySystem) -> Point:
    pt = feasible(sys)
    if isinstance(pt, Infeasible):
        raise InfeasibleSystem(pt.certificate)
    return pt


# ---------------------------------------------------------------- implication


def _nonneg_vars(rows: Sequence[LinearConstraint], skip: int = -1) -> dict[VarId, int]:
    out = {}
    for i, c in enumerate(rows):
        if i != skip and c.rel == LE and c.rhs == 0 and len(c.coeffs) == 1 and c.coeffs[0][1] < 0:
            out.setdefault(c.coeffs[0][0], i)
    return out


def dominance_multiplier(target: LinearConstraint, other: LinearConstraint, nonneg) -> Optional[Fraction]:
    """Smallest-needed weight ``lam >= 0`` with ``target`` implied by ``lam * other``
    plus nonnegativity of the variables in ``nonneg``; None if impossible.

    Requires for every variable ``u_j - lam*w_j <= 0`` (= 0 if the variable is
    not known nonnegative) and ``lam * other.rhs <= target.rhs``.
    """
    if target.rel != LE or other.rel != LE:
        return None
    return _dominance(target.as_dict(), target.rhs, other.as_dict(), other.rhs, nonneg)


def _dominance(u: Mapping, b, w: Mapping, g, nonneg) -> Optional[Fraction]:
    # bounds on lam kept as (num, den) pairs with den > 0, compared by cross-multiplying
    lo_n, lo_d = 0, 1
    hi = None
    forced = None
    for v, uj in u.items():
        if v not in w:
            if uj > 0 or (uj != 0 and v not in nonneg):
                return None
    for v, wj in w.items():
        uj = u.get(v, 0)
        if v in nonneg:
            if wj > 0:
                if uj * lo_d > lo_n * wj:
                    lo_n, lo_d = uj, wj
            elif hi is None or -uj * hi[1] < hi[0] * -wj:
                hi = (-uj, -wj)
        else:
            lam = (uj, wj) if wj > 0 else (-uj, -wj)
            if forced is None:
                forced = lam
            elif forced[0] * lam[1] != lam[0] * forced[1]:
                return None
    if g > 0:
        if hi is None or b * hi[1] < hi[0] * g:
            hi = (b, g)
    elif g < 0:
        if -b * lo_d > lo_n * -g:
            lo_n, lo_d = -b, -g
    elif b < 0:
        return None
    if forced is not None:
        fn, fd = forced
        if fn * lo_d < lo_n * fd or (hi is not None and fn * hi[1] > hi[0] * fd):
            return None
        return Fraction(fn) / fd
    if hi is not None and hi[0] * lo_d < lo_n * hi[1]:
        return None
    return Fraction(lo_n) / lo_d


def _dominance_certificate(premises: tuple, target: LinearConstraint, nonneg: Mapping[VarId, int],
                           skip: int = -1) -> Optional[FarkasCertificate]:
    for i, c in enumerate(premises):
        if i == skip or c.rel != LE:
            continue
        lam = dominance_multiplier(target, c, nonneg)
        if lam is None:
            continue
        return _assemble_dominance(premises, target, i, lam, nonneg)
    return None


def _assemble_dominance(premises, target, i, lam, nonneg) -> FarkasCertificate:
    mult: dict[int, Fraction] = {}
    if lam:
        mult[i] = lam
    u = target.as_dict()
    w = premises[i].as_dict()
    for v, k in nonneg.items():
        gap = lam * w.get(v, 0) - u.get(v, 0)
        if gap:
            mult[k] = mult.get(k, Fraction(0)) + gap
    return FarkasCertificate(premises, target, mult)


def is_implied(premises: InequalitySystem, target: LinearConstraint) -> Union[FarkasCertificate, NotImplied]:
    """Decide whether every point of ``premises`` satisfies the ``<=`` row ``target``.

    Raises :class:`InfeasibleSystem` when the premises have no point at all.
    """
    if target.rel != LE:
        raise GeometryError("is_implied takes a '<=' target; split equalities into two rows")
    rows = tuple(premises.constraints)
    cert = _dominance_certificate(rows, target, _nonneg_vars(rows))
    if cert is not None:
        return cert
    return _lp_implied(rows, premises, target)


def _lp_implied(rows, premises: InequalitySystem, target: LinearConstraint, base: Optional[Point] = None):
    """LP implication check; ``base``, when given, must be a point of ``premises``."""
    vars_ = _vars_of(premises, target.support)
    res, cols, _ = _dual_lp(rows, vars_, target.as_dict())
    if res.status == _simplex.OPTIMAL:
        if res.value <= target.rhs:
            return FarkasCertificate(rows, target, _multipliers(res.y, cols))
        return NotImplied({v: res.pi[k] for k, v in enumerate(vars_)}, target)
    if res.status == _simplex.UNBOUNDED:
        raise InfeasibleSystem(InfeasibilityCertificate(rows, _multipliers(res.y, cols)))
    # target direction is not in the cone of the rows: walk along the ray
    if base is None:
        base = _require_feasible(InequalitySystem(vars_, rows))
    base = {v: base.get(v, Fraction(0)) for v in vars_}
    ray = {v: res.pi[k] for k, v in enumerate(vars_)}
    gain = lhs_value(target, ray)
    gap = target.rhs - lhs_value(target, base)
    lam = max(Fraction(0), gap / gain) + 1
    return NotImplied({v: base[v] + lam * ray[v] for v in vars_}, target)


# ---------------------------------------------------------------- optimization


def _split(row: LinearConstraint):
    if row.rel == LE:
        return [row]
    return [LinearConstraint(row.coeffs, LE, row.rhs),
            LinearConstraint(tuple((v, -q) for v, q in row.coeffs), LE, -row.rhs)]


def _optimum(rows, vars_, objective):
    res, cols, _ = _dual_lp(rows, vars_, objective)
    if res.status == _simplex.OPTIMAL:
        return res.value, {v: res.pi[k] for k, v in enumerate(vars_)}
    if res.status == _simplex.UNBOUNDED:
        raise InfeasibleSystem(InfeasibilityCertificate(tuple(rows), _multipliers(res.y, cols)))
    _require_feasible(InequalitySystem(vars_, tuple(rows)))
    raise Unbounded(direction={v: res.pi[k] for k, v in enumerate(vars_)})


def maximize(sys: InequalitySystem, objective: Mapping[VarId, Fraction],
             lexicographic: bool = True) -> tuple[Fraction, Point]:
    """Exact maximum of ``objective . x`` over ``sys`` and an optimal point.

    Among optimal points the lexicographically smallest (in variable order) is
    returned when ``lexicographic``.  Raises :class:`InfeasibleSystem` or
    :class:`Unbounded`.
    """
    vars_ = _vars_of(sys, objective.keys())
    rows = tuple(sys.constraints)
    objective = {v: Fraction(q) for v, q in objective.items() if q != 0}
    value, point = _optimum(rows, vars_, objective)
    if not lexicographic:
        return value, point
    face = rows + (LinearConstraint(objective, EQ, value),) if objective else rows
    for v in vars_:
        try:
            low, pt = _optimum(face, vars_, {v: Fraction(-1)})
        except Unbounded:
            break
        point = pt
        face = face + (LinearConstraint({v: 1}, EQ, -low),)
    return value, point


# ---------------------------------------------------------------- vertices


@dataclass(frozen=True)
class Vertex:
    point: tuple  # tuple[Fraction, ...] in VertexSet.vars order
    active: tuple[int, ...]


@dataclass(frozen=True)
class VertexSet:
    vars: tuple[VarId, ...]
    vertices: tuple[Vertex, ...]

    def points(self) -> set[tuple]:
        return {v.point for v in self.vertices}

    def as_dicts(self) -> list[Point]:
        return [dict(zip(self.vars, v.point)) for v in self.vertices]

    def __len__(self) -> int:
        return len(self.vertices)

    def to_json(self) -> dict:
        return {
            "vars": [v.name for v in self.vars],
            "vertices": [
                {"point": {v.name: format_rational(x) for v, x in zip(self.vars, vx.point)},
                 "active": list(vx.active)}
                for vx in self.vertices
            ],
        }


def _solve_square(A: list[list[Fraction]], b: list[Fraction]) -> Optional[list[Fraction]]:
    """Gauss-Jordan on a square system; None if singular."""
    n = len(A)
    M = [list(A[i]) + [b[i]] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            return None
        M[col], M[piv] = M[piv], M[col]
        pv = M[col][col]
        prow = [x / pv for x in M[col]]
        M[col] = prow
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [x - f * y for x, y in zip(M[r], prow)]
    return [M[i][n] for i in range(n)]


def _rank(A: list[list[Fraction]], n: int) -> int:
    M = [list(r) for r in A]
    rank = 0
    for col in range(n):
        piv = next((r for r in range(rank, len(M)) if M[r][col] != 0), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        for r in range(rank + 1, len(M)):
            if M[r][col] != 0:
                f = M[r][col] / M[rank][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[rank])]
        rank += 1
    return rank


def _dense(sys: InequalitySystem):
    index = {v: k for k, v in enumerate(sys.vars)}
    n = len(sys.vars)
    A, b = [], []
    for c in sys.constraints:
        row = [Fraction(0)] * n
        for v, q in c.coeffs:
            row[index[v]] = q
        A.append(row)
        b.append(c.rhs)
    return A, b


def _dot(a, x) -> Fraction:
    return sum((p * q for p, q in zip(a, x) if p), Fraction(0))


def _feasible_point(A, b, rels, x) -> bool:
    for row, rhs, rel in zip(A, b, rels):
        val = _dot(row, x)
        if rel == LE and val > rhs:
            return False
        if rel == EQ and val != rhs:
            return False
    return True


def _active(A, b, x) -> tuple[int, ...]:
    return tuple(i for i, (row, rhs) in enumerate(zip(A, b)) if _dot(row, x) == rhs)


def enumerate_vertices(sys: InequalitySystem, method: str = "adjacency") -> VertexSet:
    """All vertices of a bounded polyhedron, sorted, each with its active rows.

    ``method="adjacency"`` walks the edge graph from one vertex, enumerating
    the rank-(n-1) subsets of active rows at each vertex; ``"exhaustive"`` solves
    every n-subset of rows.  Raises :class:`Unbounded` on a recession direction.
    """
    n = len(sys.vars)
    A, b = _dense(sys)
    rels = [c.rel for c in sys.constraints]
    if n == 0:
        return VertexSet(sys.vars, (Vertex((), ()),) if _feasible_point(A, b, rels, []) else ())
    if _rank(A, n) < n:
        if isinstance(feasible(sys), Infeasible):
            return VertexSet(sys.vars, ())
        raise Unbounded("polyhedron has a lineality direction")
    if method == "exhaustive":
        found = _exhaustive(A, b, rels, n)
    elif method == "adjacency":
        found = _adjacency(sys, A, b, rels, n)
    else:
        raise GeometryError(f"unknown vertex enumeration method {method!r}")
    verts = tuple(Vertex(x, _active(A, b, x)) for x in sorted(found))
    return VertexSet(sys.vars, verts)


def _exhaustive(A, b, rels, n) -> set[tuple]:
    eqs = [i for i, r in enumerate(rels) if r == EQ]
    ineqs = [i for i, r in enumerate(rels) if r == LE]
    found = set()
    need = n - len(eqs)
    if need < 0:
        need = 0
    for subset in itertools.combinations(ineqs, need):
        idx = eqs + list(subset)
        # select n independent rows among idx (equalities may be dependent)
        rows = [A[i] for i in idx]
        if _rank(rows, n) < n:
            continue
        chosen = []
        for i in idx:
            if _rank([A[j] for j in chosen + [i]], n) == len(chosen) + 1:
                chosen.append(i)
            if len(chosen) == n:
                break
        x = _solve_square([A[i] for i in chosen], [b[i] for i in chosen])
        if x is not None and _feasible_point(A, b, rels, x):
            found.add(tuple(x))
    if found:
        _check_bounded_exhaustive(A, rels, n)
    return found


def _check_bounded_exhaustive(A, rels, n):
    # bounded iff  {d : A_le d <= 0, A_eq d = 0}  is {0}: maximize +-e_j over it
    cone = []
    for row, rel in zip(A, rels):
        cone.append(row)
    vars_ = tuple(VarId("x", j + 1) for j in range(n))
    rows = tuple(LinearConstraint(dict(zip(vars_, row)), rel, 0) for row, rel in zip(A, rels))
    box = tuple(LinearConstraint({v: 1}, LE, 1) for v in vars_) + tuple(
        LinearConstraint({v: -1}, LE, 1) for v in vars_)
    cone_sys = InequalitySystem(vars_, rows + box)
    for v in vars_:
        for sign in (1, -1):
            val, pt = maximize(cone_sys, {v: Fraction(sign)}, lexicographic=False)
            if val > 0:
                raise Unbounded(direction=pt)


def _bareiss_det(M: list[list[int]]) -> int:
    """Determinant of a square integer matrix by fraction-free elimination."""
    n = len(M)
    if n == 0:
        return 1
    M = [list(r) for r in M]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if M[r][k] != 0), None)
            if swap is None:
                return 0
            M[k], M[swap] = M[swap], M[k]
            sign = -sign
        pk = M[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * pk - M[i][k] * M[k][j]) // prev
        prev = pk
    return sign * M[n - 1][n - 1]


def _cofactor_direction(rows: list[list[int]], n: int) -> Optional[tuple[int, ...]]:
    """Primitive integer spanning vector of the null space of ``n - 1`` rows, or
    None when the rows are dependent (the generalized cross product vanishes)."""
    vec = []
    for j in range(n):
        minor = [r[:j] + r[j + 1:] for r in rows]
        det = _bareiss_det(minor)
        vec.append(det if j % 2 == 0 else -det)
    g = 0
    for x in vec:
        g = math.gcd(g, x)
    if g == 0:
        return None
    return tuple(x // g for x in vec)


def _independent_rows(rows: list[list[int]], n: int) -> list[int]:
    """Indices of a maximal independent subset of ``rows`` (greedy, in order)."""
    basis: list[list[Fraction]] = []
    pivots: list[int] = []
    chosen = []
    for idx, r in enumerate(rows):
        v = [Fraction(x) for x in r]
        for b, pc in zip(basis, pivots):
            if v[pc] != 0:
                f = v[pc] / b[pc]
                v = [x - f * y for x, y in zip(v, b)]
        pc = next((j for j in range(n) if v[j] != 0), None)
        if pc is not None:
            basis.append(v)
            pivots.append(pc)
            chosen.append(idx)
    return chosen


def _adjacency(sys, A, b, rels, n) -> set[tuple]:
    start = feasible(sys)
    if isinstance(start, Infeasible):
        return set()
    # integer rows: scale each row (and its rhs) by a positive factor
    IA, bn, bd = [], [], []
    for row, rhs in zip(A, b):
        den = 1
        for q in row:
            den = den * q.denominator // math.gcd(den, q.denominator)
        ints = [int(q * den) for q in row]
        r = rhs * den
        IA.append(ints)
        bn.append(r.numerator)
        bd.append(r.denominator)
    m = len(IA)
    eqs = [i for i in range(m) if rels[i] == EQ]
    eq_rows = [IA[eqs[j]] for j in _independent_rows([IA[i] for i in eqs], n)] if eqs else []
    k = n - 1 - len(eq_rows)

    def idot(r, X):
        return sum(a * x for a, x in zip(r, X) if a)

    def normal(X, den):
        g = den
        for x in X:
            g = math.gcd(g, x)
        return tuple(x // g for x in X), den // g

    def active(X, den):
        return [i for i in range(m) if idot(IA[i], X) * bd[i] == bn[i] * den]

    # a vertex: maximize the sum of all row normals (bounded on a pointed polyhedron)
    objective: dict[VarId, Fraction] = {}
    for c in sys.constraints:
        for v, q in c.coeffs:
            objective[v] = objective.get(v, Fraction(0)) + q
    _, pt = _optimum(tuple(sys.constraints), sys.vars, objective)
    x0 = [pt[v] for v in sys.vars]
    if _rank([A[i] for i in _active(A, b, tuple(x0))], n) < n:
        x0 = list(_to_vertex(A, b, rels, x0, n))
    den0 = 1
    for q in x0:
        den0 = den0 * q.denominator // math.gcd(den0, q.denominator)
    v0 = normal([int(q * den0) for q in x0], den0)

    seen = {v0}
    stack = [v0]
    while stack:
        X, den = stack.pop()
        act_le = [i for i in active(X, den) if rels[i] == LE]
        directions = set()
        if k >= 0:
            for subset in itertools.combinations(act_le, k):
                dvec = _cofactor_direction(eq_rows + [IA[i] for i in subset], n)
                if dvec is None:
                    continue
                for sgn in (1, -1):
                    dd = dvec if sgn == 1 else tuple(-x for x in dvec)
                    if all(idot(IA[i], dd) <= 0 for i in act_le):
                        directions.add(dd)
        for dd in directions:
            best = None  # step length as (num, den)
            for i in range(m):
                if rels[i] != LE:
                    continue
                rate = idot(IA[i], dd)
                if rate > 0:
                    num = bn[i] * den - idot(IA[i], X) * bd[i]
                    dnm = bd[i] * den * rate
                    if best is None or num * best[1] < best[0] * dnm:
                        best = (num, dnm)
            if best is None:
                raise Unbounded(direction=dict(zip(sys.vars, (Fraction(x) for x in dd))))
            p, q = best
            Y = [x * q + p * t * den for x, t in zip(X, dd)]
            y = normal(Y, den * q)
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return {tuple(Fraction(x, den) for x in X) for X, den in seen}


def _to_vertex(A, b, rels, x, n):
    """Move a feasible point onto a vertex by successive ray shooting."""
    while True:
        act = list(_active(A, b, tuple(x)))
        rows = [A[i] for i in act]
        if _rank(rows, n) == n:
            return tuple(x)
        # a direction in the null space of the active rows
        d = _null_space_vector(rows, n)
        for dd in (d, [-t for t in d]):
            step = None
            for i, (row, rhs) in enumerate(zip(A, b)):
                rate = _dot(row, dd)
                if rels[i] == LE and rate > 0:
                    t = (rhs - _dot(row, x)) / rate
                    if step is None or t < step:
                        step = t
            if step is not None:
                x = [p + step * q for p, q in zip(x, dd)]
                break
        else:
            raise Unbounded(direction=d)


def _null_space_vector(rows, n):
    if not rows:
        return [Fraction(1)] + [Fraction(0)] * (n - 1)
    M = [list(r) for r in rows]
    pivots = []
    r = 0
    for col in range(n):
        piv = next((i for i in range(r, len(M)) if M[i][col] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        pv = M[r][col]
        M[r] = [x / pv for x in M[r]]
        for i in range(len(M)):
            if i != r and M[i][col] != 0:
                f = M[i][col]
                M[i] = [x - f * y for x, y in zip(M[i], M[r])]
        pivots.append(col)
        r += 1
    free = next(c for c in range(n) if c not in pivots)
    vec = [Fraction(0)] * n
    vec[free] = Fraction(1)
    for i, col in enumerate(pivots):
        vec[col] = -M[i][free]
    return vec


# ---------------------------------------------------------------- equivalence


@dataclass(frozen=True)
class EquivalenceCertificate:
    """Both systems imply each other row by row; plus the canonical-form check."""

    a_from_b: tuple  # FarkasCertificate per <= row of A (equalities split)
    b_from_a: tuple
    minimal_a: InequalitySystem
    minimal_b: InequalitySystem

    @property
    def canonical_match(self) -> bool:
        return self.minimal_a == self.minimal_b

    def verify(self) -> bool:
        return all(c.verify() for c in self.a_from_b) and all(c.verify() for c in self.b_from_a)

    def __bool__(self) -> bool:
        return True

    def to_json(self) -> dict:
        return {
            "equivalent": True,
            "canonical_match": self.canonical_match,
            "a_from_b": [c.to_json() for c in self.a_from_b],
            "b_from_a": [c.to_json() for c in self.b_from_a],
            "minimal": self.minimal_a.to_json(),
        }


@dataclass(frozen=True)
class Counterexample:
    """A point lying in exactly one of the two systems."""

    point: Point
    in_a: bool
    violated: LinearConstraint

    def __bool__(self) -> bool:
        return False

    def to_json(self) -> dict:
        return {
            "equivalent": False,
            "point": point_to_json(self.point),
            "in_a": self.in_a,
            "in_b": not self.in_a,
            "violated": self.violated.to_json(),
        }


def _implied_rows(premises: InequalitySystem, targets: InequalitySystem, premises_in_a: bool):
    certs = []
    rows = tuple(premises.constraints)
    nonneg = _nonneg_vars(rows)
    lookup = {}
    for i, c in enumerate(rows):
        for half in _split(normalize(c)):
            lookup.setdefault(normalize(half), (i, c, half))
    for t in targets.constraints:
        for half in _split(t):
            half_n = normalize(half)
            hit = lookup.get(half_n) if half.coeffs else None
            if hit is not None:
                i, c, _ = hit
                certs.append(_identity_certificate(rows, i, half))
                continue
            cert = _dominance_certificate(rows, half, nonneg)
            if cert is None:
                cert = _lp_implied(rows, premises, half)
            if isinstance(cert, NotImplied):
                return Counterexample(cert.point, premises_in_a, half)
            certs.append(cert)
    return tuple(certs)


def _identity_certificate(rows, i, target: LinearConstraint) -> FarkasCertificate:
    row = rows[i]
    # find w with w * row == target on the lhs; both scale to the same normal form
    v0, q0 = target.coeffs[0]
    w = q0 / row.coeff(v0)
    return FarkasCertificate(rows, target, {i: w})


def equivalent(A: InequalitySystem, B: InequalitySystem) -> Union[EquivalenceCertificate, Counterexample]:
    """Double inclusion by Farkas certificates, cross-checked by minimal forms."""
    if set(A.vars) != set(B.vars):
        raise GeometryError("systems live in different variable spaces")
    a_from_b = _implied_rows(B, A, premises_in_a=False)
    if isinstance(a_from_b, Counterexample):
        return a_from_b
    b_from_a = _implied_rows(A, B, premises_in_a=True)
    if isinstance(b_from_a, Counterexample):
        return b_from_a
    return EquivalenceCertificate(a_from_b, b_from_a, minimal_form(A), minimal_form(B))


def minimal_form(sys: InequalitySystem) -> InequalitySystem:
    """Canonical irredundant H-representation (memoized on the canonical input)."""
    return _minimal_cached(canonicalize(sys))


@lru_cache(maxsize=4096)
def _minimal_cached(sys: InequalitySystem) -> InequalitySystem:
    from .fme import prune_full

    return prune_full(sys)[0]
