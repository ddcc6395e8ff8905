"""DoF regions of the K-user MISO broadcast channel with partial CSIT.

Users are indexed 1..K in non-increasing order of CSIT quality.  All builders
work in that sorted indexing; :meth:`CsitProfile.relabel` maps a system back
to the caller's original user labels.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional, Sequence, Union

from . import geometry
from .fme import prune, substitute_equality
from .poly_core import (
    A_SHARED,
    EQ,
    LE,
    InequalitySystem,
    LinearConstraint,
    PolyError,
    RationalLike,
    VarId,
    canonicalize,
    contains,
    d,
    dc,
    dp,
    evaluate,
    to_rational,
)


class InvalidProfile(PolyError):
    pass


class IndexOutOfRange(PolyError):
    pass


class EmptySet(PolyError):
    pass


@dataclass(frozen=True)
class CsitProfile:
    """CSIT levels sorted non-increasing; ``permutation[k]`` is the original
    (0-based) position of sorted user ``k + 1``."""

    alphas: tuple
    permutation: tuple

    def __post_init__(self):
        if not self.alphas:
            raise InvalidProfile("need at least one user")
        for a in self.alphas:
            if not 0 <= a <= 1:
                raise InvalidProfile(f"CSIT level {a} outside [0, 1]")
        if any(x < y for x, y in zip(self.alphas, self.alphas[1:])):
            raise InvalidProfile("alphas must be sorted non-increasing; use CsitProfile.from_values")
        if sorted(self.permutation) != list(range(len(self.alphas))):
            raise InvalidProfile("permutation is not a permutation of the users")

    @classmethod
    def from_values(cls, values: Iterable[RationalLike]) -> "CsitProfile":
        vals = [to_rational(v) for v in values]
        if not vals:
            raise InvalidProfile("need at least one user")
        for a in vals:
            if not 0 <= a <= 1:
                raise InvalidProfile(f"CSIT level {a} outside [0, 1]")
        order = sorted(range(len(vals)), key=lambda i: -vals[i])  # stable
        return cls(tuple(vals[i] for i in order), tuple(order))

    @classmethod
    def parse(cls, text: str) -> "CsitProfile":
        parts = [p for p in text.split(",")]
        if any(not p.strip() for p in parts):
            raise InvalidProfile(f"malformed alpha list {text!r}")
        return cls.from_values(parts)

    @property
    def K(self) -> int:
        return len(self.alphas)

    def alpha(self, i: int) -> Fraction:
        return self.alphas[i - 1]

    def alpha_sum(self, S: Iterable[int]) -> Fraction:
        return sum((self.alphas[i - 1] for i in S), Fraction(0))

    @property
    def original(self) -> tuple:
        out = [Fraction(0)] * self.K
        for k, pos in enumerate(self.permutation):
            out[pos] = self.alphas[k]
        return tuple(out)

    def to_sorted(self, values: Sequence) -> list:
        """Reorder a per-user list given in original labels into sorted labels."""
        return [values[pos] for pos in self.permutation]

    def to_original(self, values: Sequence) -> list:
        out = [None] * self.K
        for k, pos in enumerate(self.permutation):
            out[pos] = values[k]
        return out

    def relabel(self, sys: InequalitySystem) -> InequalitySystem:
        """Rename indexed variables from sorted to original user labels."""
        mapping = {}
        for v in sys.vars:
            if v.index >= 1 and v.kind in ("d", "dp", "dc", "a") and v.index <= self.K:
                mapping[v] = VarId(v.kind, self.permutation[v.index - 1] + 1)
            else:
                mapping[v] = v
        rows = [LinearConstraint({mapping[v]: q for v, q in c.coeffs}, c.rel, c.rhs) for c in sys.constraints]
        return canonicalize(InequalitySystem(tuple(mapping.values()), tuple(rows)))

    def to_json(self) -> dict:
        return {
            "alpha": [str(a) for a in self.original],
            "sorted": [str(a) for a in self.alphas],
            "permutation": list(self.permutation),
        }


@dataclass(frozen=True)
class Strategy:
    """Single-power rate-splitting strategy in original user labels."""

    a: Fraction
    d_common: tuple
    d_private: tuple

    @property
    def dof(self) -> tuple:
        return tuple(p + c for p, c in zip(self.d_private, self.d_common))

    def to_json(self) -> dict:
        return {
            "achievable": True,
            "a": str(self.a),
            "d_private": [str(x) for x in self.d_private],
            "d_common": [str(x) for x in self.d_common],
        }


@dataclass(frozen=True)
class NotAchievable:
    dof: tuple
    violated: Optional[LinearConstraint]

    def __bool__(self) -> bool:
        return False

    def to_json(self) -> dict:
        return {
            "achievable": False,
            "dof": [str(x) for x in self.dof],
            "violated": None if self.violated is None else str(self.violated),
        }


def subsets(indices: Sequence[int]):
    """All subsets of ``indices`` (including the empty set), smallest first."""
    for r in range(len(indices) + 1):
        yield from itertools.combinations(indices, r)


def _d_vars(K: int) -> list[VarId]:
    return [d(i) for i in range(1, K + 1)]


def _nonneg(K: int) -> list[LinearConstraint]:
    return [LinearConstraint({d(i): -1}, LE, 0) for i in range(1, K + 1)]


def _sum(vs: Iterable[VarId], coeff=1) -> dict:
    return {v: Fraction(coeff) for v in vs}


def _outer_row(profile: CsitProfile, S: Sequence[int]) -> LinearConstraint:
    rest = [j for j in S if j != min(S)]
    return LinearConstraint(_sum(d(i) for i in S), LE, 1 + profile.alpha_sum(rest))


def outer_bound(profile: CsitProfile) -> InequalitySystem:
    """One row ``d(S) <= 1 + alpha(S minus its best user)`` per nonempty S, plus d >= 0."""
    K = profile.K
    rows = [_outer_row(profile, S) for S in subsets(range(1, K + 1)) if S]
    return canonicalize(InequalitySystem(_d_vars(K), rows + _nonneg(K)))


def rs_region_single_power(profile: CsitProfile) -> InequalitySystem:
    """Rate-splitting region with one shared power exponent ``a``, in the lifted space."""
    K = profile.K
    a = A_SHARED
    rows = []
    for i in range(1, K + 1):
        rows.append(LinearConstraint({d(i): 1, dp(i): -1, dc(i): -1}, EQ, 0))
        rows.append(LinearConstraint({dp(i): -1}, LE, 0))
        rows.append(LinearConstraint({dc(i): -1}, LE, 0))
        rows.append(LinearConstraint({dp(i): 1, a: -1}, LE, 0))
        rows.append(LinearConstraint({dp(i): 1}, LE, profile.alpha(i)))
    rows.append(LinearConstraint({**_sum(dc(i) for i in range(1, K + 1)), a: 1}, LE, 1))
    rows.append(LinearConstraint({a: -1}, LE, 0))
    rows.append(LinearConstraint({a: 1}, LE, 1))
    vs = _d_vars(K) + [dp(i) for i in range(1, K + 1)] + [dc(i) for i in range(1, K + 1)] + [a]
    return canonicalize(InequalitySystem(vs, rows + _nonneg(K)))


def rs_after_private_elim(profile: CsitProfile, keep_private_nonneg: bool = False) -> InequalitySystem:
    """Private DoF replaced by ``d_i - dc_i``.

    The rows ``dc_i - d_i <= 0`` (private DoF nonnegative) do not change the
    projection onto ``d`` and are left out unless ``keep_private_nonneg``;
    with them the result equals direct substitution into
    :func:`rs_region_single_power`.
    """
    K = profile.K
    a = A_SHARED
    rows = []
    for i in range(1, K + 1):
        rows.append(LinearConstraint({dc(i): -1}, LE, 0))
        rows.append(LinearConstraint({d(i): 1, dc(i): -1}, LE, profile.alpha(i)))
        rows.append(LinearConstraint({d(i): 1, dc(i): -1, a: -1}, LE, 0))
        if keep_private_nonneg:
            rows.append(LinearConstraint({dc(i): 1, d(i): -1}, LE, 0))
    rows.append(LinearConstraint({**_sum(dc(i) for i in range(1, K + 1)), a: 1}, LE, 1))
    rows.append(LinearConstraint({a: -1}, LE, 0))
    rows.append(LinearConstraint({a: 1}, LE, 1))
    vs = _d_vars(K) + [dc(i) for i in range(1, K + 1)] + [a]
    return canonicalize(InequalitySystem(vs, rows + _nonneg(K)))


def rs_after_power_elim(profile: CsitProfile) -> InequalitySystem:
    """Common-DoF budget met with equality and ``a = 1 - sum(dc)`` substituted."""
    K = profile.K
    users = range(1, K + 1)
    rows = []
    for i in users:
        rows.append(LinearConstraint({d(i): 1, dc(i): -1}, LE, profile.alpha(i)))
        rows.append(LinearConstraint({dc(i): -1}, LE, 0))
        rows.append(LinearConstraint({d(i): 1, **_sum(dc(j) for j in users if j != i)}, LE, 1))
    rows.append(LinearConstraint(_sum(dc(j) for j in users), LE, 1))
    vs = _d_vars(K) + [dc(i) for i in users]
    return canonicalize(InequalitySystem(vs, rows + _nonneg(K)))


def power_budget_equality(profile: CsitProfile) -> LinearConstraint:
    return LinearConstraint({**_sum(dc(i) for i in range(1, profile.K + 1)), A_SHARED: 1}, EQ, 1)


def rs_power_elim_mechanical(profile: CsitProfile) -> InequalitySystem:
    """Tighten the common budget to equality, substitute ``a``, pairwise-prune."""
    sys = rs_after_private_elim(profile)
    budget = power_budget_equality(profile)
    rows = [c for c in sys.constraints if c != _budget_row(profile)] + [budget]
    tightened = InequalitySystem(sys.vars, tuple(rows))
    return prune(substitute_equality(tightened, budget, A_SHARED), "pairwise")


def _budget_row(profile: CsitProfile) -> LinearConstraint:
    from .poly_core import normalize

    return normalize(LinearConstraint({**_sum(dc(i) for i in range(1, profile.K + 1)), A_SHARED: 1}, LE, 1))


def intermediate_rows(profile: CsitProfile, k: int) -> dict[str, list[LinearConstraint]]:
    """The row groups expected after eliminating ``dc_1 .. dc_k``.

    Group names: ``alpha`` (d_i - dc_i <= alpha_i), ``common_nonneg``
    (-dc_i <= 0), ``with_user`` and ``common_budget`` (the two subset families,
    empty subset included), ``nonneg`` (-d_i <= 0).
    """
    K = profile.K
    if not 0 <= k <= K - 1:
        raise IndexOutOfRange(f"k={k} outside 0..{K - 1}")
    done = list(range(1, k + 1))
    left = list(range(k + 1, K + 1))
    groups: dict[str, list] = {"alpha": [], "common_nonneg": [], "with_user": [], "common_budget": [], "nonneg": _nonneg(K)}
    for i in left:
        groups["alpha"].append(LinearConstraint({d(i): 1, dc(i): -1}, LE, profile.alpha(i)))
        groups["common_nonneg"].append(LinearConstraint({dc(i): -1}, LE, 0))
    for S in subsets(done):
        for i in left:
            coeffs = {**_sum(d(j) for j in S), d(i): 1, **_sum(dc(j) for j in left if j != i)}
            groups["with_user"].append(LinearConstraint(coeffs, LE, 1 + profile.alpha_sum(S)))
        rest = [j for j in S if j != min(S)] if S else []
        coeffs = {**_sum(d(j) for j in S), **_sum(dc(j) for j in left)}
        groups["common_budget"].append(LinearConstraint(coeffs, LE, 1 + profile.alpha_sum(rest)))
    return groups


@lru_cache(maxsize=512)
def expected_intermediate(profile: CsitProfile, k: int, prune_mode: str = "full") -> InequalitySystem:
    """Closed-form system after ``k`` elimination steps (k=0 is the starting system)."""
    groups = intermediate_rows(profile, k)
    K = profile.K
    vs = _d_vars(K) + [dc(i) for i in range(k + 1, K + 1)]
    rows = [r for g in groups.values() for r in g]
    return prune(InequalitySystem(vs, tuple(rows)), prune_mode)


def final_rows(profile: CsitProfile) -> tuple[list[LinearConstraint], list[LinearConstraint]]:
    """Rows left after the last common variable is gone: the looser family
    ``d(S' + K) <= 1 + alpha(S')`` and the outer-bound family."""
    K = profile.K
    looser = []
    for S in subsets(range(1, K)):
        looser.append(LinearConstraint(_sum(d(i) for i in S + (K,)), LE, 1 + profile.alpha_sum(S)))
    outer = [_outer_row(profile, S) for S in subsets(range(1, K + 1)) if S]
    return looser, outer


def final_system(profile: CsitProfile, prune_mode: str = "syntactic") -> InequalitySystem:
    looser, outer = final_rows(profile)
    return prune(InequalitySystem(_d_vars(profile.K), tuple(looser + outer + _nonneg(profile.K))), prune_mode)


def private_dof_cap_full(a_vec: Sequence[RationalLike], profile: CsitProfile, i: int) -> Fraction:
    """``(a_i - (max_{j != i} a_j - alpha_i)^+)^+`` for user ``i`` (1-based)."""
    K = profile.K
    if K < 2:
        raise IndexOutOfRange("needs at least two users")
    if len(a_vec) != K:
        raise IndexOutOfRange(f"power vector has {len(a_vec)} entries, expected {K}")
    if not 1 <= i <= K:
        raise IndexOutOfRange(f"user {i} outside 1..{K}")
    a = [to_rational(x) for x in a_vec]
    others = max(a[j] for j in range(K) if j != i - 1)
    inner = max(others - profile.alpha(i), Fraction(0))
    return max(a[i - 1] - inner, Fraction(0))


def alpha_drop_min(profile: CsitProfile, S: Iterable[int], extra: int) -> tuple[Fraction, Fraction, bool]:
    """Compare ``alpha(S + {extra} - {min S})`` with ``alpha(S)``.

    When ``extra`` is worse than every member of ``S`` this swap can only lose
    CSIT, which is what makes the looser rows redundant.
    """
    S = sorted(set(S))
    if not S:
        raise EmptySet("S must be nonempty")
    if extra <= S[-1]:
        raise PolyError(f"extra user {extra} must exceed max(S) = {S[-1]}")
    if not 1 <= S[0] or extra > profile.K:
        raise IndexOutOfRange("user index outside 1..K")
    lhs = profile.alpha_sum([j for j in S if j != S[0]] + [extra])
    rhs = profile.alpha_sum(S)
    return lhs, rhs, lhs <= rhs


def sum_dof(profile: CsitProfile) -> Fraction:
    return 1 + sum(profile.alphas[1:], Fraction(0))


def synthesize_strategy(profile: CsitProfile, dof: Sequence[RationalLike]) -> Union[Strategy, NotAchievable]:
    """Find a single-power strategy reaching ``dof`` (given in original user labels)."""
    K = profile.K
    vals = [to_rational(x) for x in dof]
    if len(vals) != K:
        raise PolyError(f"expected {K} DoF values, got {len(vals)}")
    if any(x < 0 for x in vals):
        raise PolyError("DoF values must be nonnegative")
    sorted_vals = profile.to_sorted(vals)
    point = {d(i + 1): x for i, x in enumerate(sorted_vals)}
    for row in outer_bound(profile).constraints:
        if not evaluate(row, point):
            relabeled = profile.relabel(InequalitySystem.of([row]))
            return NotAchievable(tuple(vals), relabeled.constraints[0])
    lifted = rs_region_single_power(profile)
    pins = [LinearConstraint({v: 1}, EQ, x) for v, x in point.items()]
    try:
        # smallest private power that reaches the target
        _, witness = geometry.maximize(lifted.with_constraints(lifted.constraints + tuple(pins)), {A_SHARED: -1},
                                       lexicographic=False)
    except geometry.InfeasibleSystem:
        return NotAchievable(tuple(vals), None)
    if not contains(lifted, witness):
        raise AssertionError("feasibility witness does not satisfy the rate-splitting rows")
    priv = [witness[dp(i)] for i in range(1, K + 1)]
    common = [witness[dc(i)] for i in range(1, K + 1)]
    return Strategy(witness[A_SHARED], tuple(profile.to_original(common)), tuple(profile.to_original(priv)))


def strategy_point(profile: CsitProfile, s: Strategy) -> dict:
    """Lifted point (sorted labels) of a strategy, for checking against the region rows."""
    K = profile.K
    priv = profile.to_sorted(s.d_private)
    common = profile.to_sorted(s.d_common)
    pt = {A_SHARED: s.a}
    for i in range(1, K + 1):
        pt[d(i)] = priv[i - 1] + common[i - 1]
        pt[dp(i)] = priv[i - 1]
        pt[dc(i)] = common[i - 1]
    return pt


# ---------------------------------------------------------------- sampling


def random_rational(rng: random.Random, max_den: int = 1000) -> Fraction:
    den = rng.randint(1, max_den)
    return Fraction(rng.randint(0, den), den)


def random_profile(rng: random.Random, K: int, max_den: int = 1000) -> CsitProfile:
    return CsitProfile.from_values([random_rational(rng, max_den) for _ in range(K)])


def sample_full_region_point(profile: CsitProfile, rng: random.Random, max_den: int = 1000):
    """A random feasible tuple of the K-power-variable region; returns (a_vec, dp, dc, d)."""
    K = profile.K
    a_vec = [random_rational(rng, max_den) for _ in range(K)]
    caps = [private_dof_cap_full(a_vec, profile, i) for i in range(1, K + 1)] if K >= 2 else [a_vec[0]]
    priv = [cap * random_rational(rng, max_den) for cap in caps]
    budget = 1 - max(a_vec)
    weights = [random_rational(rng, max_den) for _ in range(K)]
    total = sum(weights, Fraction(0))
    share = random_rational(rng, max_den) * budget
    common = [share * w / total if total else Fraction(0) for w in weights]
    dof = [p + c for p, c in zip(priv, common)]
    return a_vec, priv, common, dof
