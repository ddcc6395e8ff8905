"""Fourier-Motzkin elimination with a replayable per-step trace."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .geometry import (
    FarkasCertificate,
    NotImplied,
    _assemble_dominance,
    _dominance,
    _lp_implied,
    _require_feasible,
)
from .poly_core import (
    EQ,
    LE,
    InequalitySystem,
    InfeasibleConstant,
    LinearConstraint,
    PolyError,
    VarId,
    canonicalize,
    combine,
    is_contradiction,
    lhs_value,
    normalize,
)

PRUNE_MODES = ("syntactic", "pairwise", "full")


class FmeError(PolyError):
    pass


class VariableAbsent(FmeError):
    pass


@dataclass(frozen=True)
class ProducedRow:
    """``constraint`` = normalize(weights[0] * negative + weights[1] * positive)."""

    constraint: LinearConstraint
    negative: int
    positive: int
    weights: tuple[Fraction, Fraction]

    def to_json(self) -> dict:
        return {
            "row": self.constraint.to_json(),
            "text": str(self.constraint),
            "parents": [self.negative, self.positive],
            "weights": [str(w) for w in self.weights],
        }


@dataclass(frozen=True)
class PrunedRow:
    constraint: LinearConstraint
    reason: str  # tautology | duplicate | dominated | implied
    by: tuple = ()
    certificate: Optional[FarkasCertificate] = None

    def to_json(self) -> dict:
        out = {"row": self.constraint.to_json(), "text": str(self.constraint), "reason": self.reason}
        if self.by:
            out["by"] = [str(c) for c in self.by]
        if self.certificate is not None:
            out["certificate"] = self.certificate.to_json()
        return out


@dataclass(frozen=True)
class EliminationStep:
    eliminated: VarId
    absent: tuple
    negative: tuple
    positive: tuple
    produced: tuple
    pruned: tuple
    result: InequalitySystem
    substituted: Optional[LinearConstraint] = None  # set when the step used an equality

    @property
    def groups(self) -> dict[str, tuple]:
        return {"absent": self.absent, "negative": self.negative, "positive": self.positive}

    def replay(self) -> bool:
        """Every produced row is the recorded positive combination of its parents."""
        for p in self.produced:
            n, q = self.negative[p.negative], self.positive[p.positive]
            lhs, rhs = combine(((p.weights[0], n), (p.weights[1], q)))
            if self.eliminated in lhs:
                return False
            if normalize(LinearConstraint(lhs, LE, rhs)) != p.constraint:
                return False
        return True

    def to_json(self) -> dict:
        def rows(cs):
            return [{"row": c.to_json(), "text": str(c)} for c in cs]

        out = {
            "eliminated": self.eliminated.name,
            "groups": {k: rows(v) for k, v in self.groups.items()},
            "produced": [p.to_json() for p in self.produced],
            "pruned": [p.to_json() for p in self.pruned],
            "result_size": len(self.result),
        }
        if self.substituted is not None:
            out["substituted"] = str(self.substituted)
        return out


@dataclass
class EliminationTrace:
    steps: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"steps": [s.to_json() for s in self.steps]}


def substitute_equality(sys: InequalitySystem, eq: LinearConstraint, var: VarId) -> InequalitySystem:
    """Remove ``var`` using the equality ``eq``; ``eq`` itself is dropped from the result."""
    if eq.rel != EQ:
        raise FmeError(f"{eq} is not an equality")
    pivot = eq.coeff(var)
    if pivot == 0:
        raise VariableAbsent(f"{var} does not appear in {eq}")
    eq_n = normalize(eq)
    out = []
    for c in sys.constraints:
        if c.rel == EQ and normalize(c) == eq_n:
            continue
        k = c.coeff(var)
        if k == 0:
            out.append(c)
            continue
        lhs, rhs = combine(((Fraction(1), c), (-k / pivot, eq)))
        lhs.pop(var, None)
        out.append(LinearConstraint(lhs, c.rel, rhs))
    return canonicalize(InequalitySystem(sys.without_vars([var]), tuple(out)))


def eliminate(sys: InequalitySystem, var: VarId) -> tuple[InequalitySystem, EliminationStep]:
    """One Fourier-Motzkin step: project ``sys`` along ``var``."""
    if var not in sys.vars:
        raise FmeError(f"{var} is not a variable of the system")
    if any(c.rel == EQ and c.coeff(var) != 0 for c in sys.constraints):
        raise FmeError(f"{var} occurs in an equality; use substitute_equality instead")
    absent, negative, positive = [], [], []
    for c in sys.constraints:
        k = c.coeff(var)
        (absent if k == 0 else negative if k < 0 else positive).append(c)

    produced = []
    for i, n in enumerate(negative):
        kn = n.coeff(var)
        for j, p in enumerate(positive):
            kp = p.coeff(var)
            weights = (kp, -kn)
            lhs, rhs = combine(((weights[0], n), (weights[1], p)))
            lhs.pop(var, None)
            row = normalize(LinearConstraint(lhs, LE, rhs))
            produced.append(ProducedRow(row, i, j, weights))

    pruned = []
    seen = set()
    kept = []
    for c in absent + [p.constraint for p in produced]:
        c = normalize(c)
        if not c.coeffs:
            if is_contradiction(c):
                raise InfeasibleConstant(c)
            pruned.append(PrunedRow(c, "tautology"))
            continue
        if c in seen:
            pruned.append(PrunedRow(c, "duplicate"))
            continue
        seen.add(c)
        kept.append(c)
    kept.sort(key=LinearConstraint.sort_key)
    result = InequalitySystem(sys.without_vars([var]), tuple(kept))
    step = EliminationStep(var, tuple(absent), tuple(negative), tuple(positive),
                           tuple(produced), tuple(pruned), result)
    return result, step


class _RowInfo:
    __slots__ = ("row", "coeffs", "pos_support", "support")

    def __init__(self, row: LinearConstraint):
        self.row = row
        # integral coefficients as ints keep the dominance test off Fraction arithmetic
        self.coeffs = {v: int(q) if q.denominator == 1 else q for v, q in row.coeffs}
        self.support = frozenset(self.coeffs)
        self.pos_support = frozenset(v for v, q in self.coeffs.items() if q > 0)


def prune_pairwise(sys: InequalitySystem) -> tuple[InequalitySystem, list[PrunedRow]]:
    """Drop rows dominated by one other row plus nonnegativity rows."""
    sys = canonicalize(sys)
    rows = list(sys.constraints)
    info = [_RowInfo(r) for r in rows]
    alive = [True] * len(rows)
    log = []
    for k, target in enumerate(rows):
        if target.rel != LE:
            continue
        live_rows = [rows[i] if alive[i] else None for i in range(len(rows))]
        nonneg = {v: i for v, i in _nonneg_vars_alive(rows, alive, k).items()}
        need = info[k].pos_support
        for i, other in enumerate(rows):
            if i == k or not alive[i] or other.rel != LE:
                continue
            # a positive target coefficient needs a positive counterpart (lam >= 0)
            if not need <= info[i].pos_support:
                continue
            lam = _dominance(info[k].coeffs, target.rhs, info[i].coeffs, other.rhs, nonneg)
            if lam is None:
                continue
            premises = tuple(r for r in live_rows if r is not None and r is not target)
            idx = {r: n for n, r in enumerate(premises)}
            cert = _assemble_dominance(premises, target, idx[other], lam,
                                       {v: idx[rows[j]] for v, j in nonneg.items()})
            alive[k] = False
            log.append(PrunedRow(target, "dominated", (other,), cert))
            break
    kept = tuple(r for r, a in zip(rows, alive) if a)
    return InequalitySystem(sys.vars, kept), log


def _nonneg_vars_alive(rows, alive, skip) -> dict[VarId, int]:
    out = {}
    for i, c in enumerate(rows):
        if i == skip or not alive[i]:
            continue
        if c.rel == LE and c.rhs == 0 and len(c.coeffs) == 1 and c.coeffs[0][1] < 0:
            out.setdefault(c.coeffs[0][0], i)
    return out


def prune_full(sys: InequalitySystem) -> tuple[InequalitySystem, list[PrunedRow]]:
    """Drop every row implied by the remaining rows; minimal H-representation.

    Rows are examined in canonical order and removed one at a time, so each
    removal is certified against rows that are still present.  Raises
    :class:`~misodof.geometry.InfeasibleSystem` for an empty polyhedron.
    """
    sys, log = prune_pairwise(sys)
    rows = list(sys.constraints)
    alive = [True] * len(rows)
    # a point of the whole system satisfies every subset of its rows
    base = _require_feasible(sys) if rows else None
    facets = _ray_facets(rows, base) if rows else set()
    for k, target in enumerate(rows):
        if target.rel != LE or k in facets:
            continue
        premises = tuple(r for i, r in enumerate(rows) if alive[i] and i != k)
        res = _lp_implied(premises, InequalitySystem(sys.vars, premises), target, base)
        if isinstance(res, NotImplied):
            continue
        alive[k] = False
        log.append(PrunedRow(target, "implied", (), res))
    kept = tuple(r for r, a in zip(rows, alive) if a)
    return InequalitySystem(sys.vars, kept), log


def _ray_facets(rows: Sequence[LinearConstraint], center) -> set[int]:
    """Rows proven irredundant by ray shooting from a strictly interior point.

    Along each row normal (both signs) the first hyperplane hit, when unique,
    is touched by a point strictly inside every other row, so that row can
    never be implied by the others.  Returns the empty set when ``center`` is
    not strictly interior.
    """
    if any(r.rel != LE for r in rows):
        return set()
    slack = [r.rhs - lhs_value(r, center) for r in rows]
    if any(s <= 0 for s in slack):
        return set()
    # rows are normalized, so coefficients are integers and the dot products exact ints
    dense = [{v: int(q) for v, q in r.coeffs} for r in rows]
    m = len(rows)
    gram = [[0] * m for _ in range(m)]
    for a in range(m):
        ra = dense[a]
        for b in range(a, m):
            rb = dense[b]
            g = sum(q * rb[v] for v, q in ra.items() if v in rb)
            gram[a][b] = gram[b][a] = g
    sn = [x.numerator for x in slack]
    sd = [x.denominator for x in slack]
    found = set()
    for k in range(m):
        for sign in (1, -1):
            best, who = -1, []
            for j in range(m):
                rate = sign * gram[k][j]
                if rate <= 0:
                    continue
                if best < 0:
                    best, who = j, [j]
                    continue
                # compare sn_j / (sd_j * rate_j) against the best so far
                lhs = sn[j] * sd[best] * sign * gram[k][best]
                rhs = sn[best] * sd[j] * rate
                if lhs < rhs:
                    best, who = j, [j]
                elif lhs == rhs:
                    who.append(j)
            if len(who) == 1:
                found.add(who[0])
    return found


def prune(sys: InequalitySystem, mode: str = "pairwise") -> InequalitySystem:
    return prune_with_log(sys, mode)[0]


def prune_with_log(sys: InequalitySystem, mode: str) -> tuple[InequalitySystem, list[PrunedRow]]:
    if mode == "syntactic":
        return canonicalize(sys), []
    if mode == "pairwise":
        return prune_pairwise(sys)
    if mode == "full":
        return prune_full(sys)
    raise FmeError(f"unknown prune mode {mode!r}; expected one of {PRUNE_MODES}")


def project(sys: InequalitySystem, eliminate_vars: Sequence[VarId],
            prune_mode: str = "pairwise") -> tuple[InequalitySystem, EliminationTrace]:
    """Eliminate ``eliminate_vars`` in order, pruning after every step.

    A variable that occurs in an equality is substituted out through that
    equality instead of being paired off.
    """
    if prune_mode not in PRUNE_MODES:
        raise FmeError(f"unknown prune mode {prune_mode!r}; expected one of {PRUNE_MODES}")
    for v in eliminate_vars:
        if v not in sys.vars:
            raise FmeError(f"{v} is not a variable of the system")
    if len(set(eliminate_vars)) != len(eliminate_vars):
        raise FmeError("elimination list has repeated variables")
    current = canonicalize(sys)
    trace = EliminationTrace()
    for v in eliminate_vars:
        pivot = next((c for c in current.constraints if c.rel == EQ and c.coeff(v) != 0), None)
        if pivot is not None:
            current = substitute_equality(current, pivot, v)
            current, log = prune_with_log(current, prune_mode)
            step = EliminationStep(v, (), (), (), (), tuple(log), current, substituted=pivot)
        else:
            current, step = eliminate(current, v)
            current, log = prune_with_log(current, prune_mode)
            step = EliminationStep(step.eliminated, step.absent, step.negative, step.positive,
                                   step.produced, step.pruned + tuple(log), current)
        trace.steps.append(step)
    return current, trace
