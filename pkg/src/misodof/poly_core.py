"""Exact linear constraint systems over named variables.

Every coefficient and bound is a :class:`fractions.Fraction`.  Constraints are
either ``<=`` or ``=`` rows; a system is the H-representation of a polyhedron
over an ordered variable space.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Union

Rational = Fraction
RationalLike = Union[Fraction, int, str]

LE = "<="
EQ = "="
RELATIONS = (LE, EQ)

# d < dp < dc < a, anything else sorts after in name order
_KIND_RANK = {"d": 0, "dp": 1, "dc": 2, "a": 3}
_INDEXED_KINDS = ("d", "dp", "dc")
_NAME_RE = re.compile(r"^([A-Za-z_]+)([1-9][0-9]*)?$")
_ROW_RE = re.compile(r"^\s*(.+?)\s*(<=|>=|=)\s*(\S+)\s*$")
_TERM_RE = re.compile(r"([+-])(?:([0-9]+(?:/[0-9]+)?)\*)?([A-Za-z_]+[0-9]*)")


class PolyError(ValueError):
    pass


class InfeasibleConstant(PolyError):
    """A constraint with no variables reduced to ``0 <= c`` (c < 0) or ``0 = c`` (c != 0)."""

    def __init__(self, constraint: "LinearConstraint"):
        super().__init__(f"constant constraint is infeasible: {constraint}")
        self.constraint = constraint


class MissingVariable(PolyError):
    def __init__(self, var: "VarId"):
        super().__init__(f"no value assigned to variable {var}")
        self.var = var


def to_rational(value: RationalLike) -> Fraction:
    """Exact conversion; decimal strings such as ``"0.3"`` become ``3/10``."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise PolyError(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise PolyError(f"not a rational: {value!r}") from None
    raise PolyError(f"not a rational: {value!r} (floats are not accepted)")


def format_rational(q: Fraction) -> str:
    return str(q)


@dataclass(frozen=True, order=True)
class VarId:
    """A variable name ``kind`` + ``index`` with the fixed global order
    ``d_1 < ... < d_K < dp_1 < ... < dc_1 < ... < a < a_1 < ...``.

    Index 0 is the unindexed form (the shared power variable ``a``).
    """

    rank: int = field(init=False, repr=False)
    kind: str
    index: int = 0

    def __post_init__(self):
        if self.index < 0:
            raise PolyError(f"negative variable index: {self.index}")
        if self.kind in _INDEXED_KINDS and self.index == 0:
            raise PolyError(f"variable kind {self.kind!r} needs an index >= 1")
        object.__setattr__(self, "rank", _KIND_RANK.get(self.kind, len(_KIND_RANK)))

    @classmethod
    def parse(cls, name: str) -> "VarId":
        m = _NAME_RE.match(name)
        if m is None:
            raise PolyError(f"bad variable name: {name!r}")
        return cls(m.group(1), int(m.group(2)) if m.group(2) else 0)

    @property
    def name(self) -> str:
        return self.kind if self.index == 0 else f"{self.kind}{self.index}"

    def __str__(self) -> str:
        return self.name


def d(i: int) -> VarId:
    return VarId("d", i)


def dp(i: int) -> VarId:
    return VarId("dp", i)


def dc(i: int) -> VarId:
    return VarId("dc", i)


A_SHARED = VarId("a", 0)


def var(v: Union[VarId, str]) -> VarId:
    return v if isinstance(v, VarId) else VarId.parse(v)


Coeffs = tuple  # tuple[tuple[VarId, Fraction], ...] sorted by VarId


def _coeff_tuple(coeffs) -> Coeffs:
    if isinstance(coeffs, Mapping):
        items = coeffs.items()
    else:
        items = coeffs
    merged: dict[VarId, Fraction] = {}
    for v, c in items:
        v = var(v)
        merged[v] = merged.get(v, Fraction(0)) + to_rational(c)
    return tuple(sorted((v, c) for v, c in merged.items() if c != 0))


@dataclass(frozen=True)
class LinearConstraint:
    """``sum(coeffs[v] * v) rel rhs`` with ``rel`` one of ``<=``, ``=``.

    ``coeffs`` may be given as a mapping or pairs; it is stored as a tuple of
    ``(VarId, Fraction)`` sorted by variable, zero entries removed.
    """

    coeffs: Coeffs
    rel: str = LE
    rhs: Fraction = Fraction(0)

    def __post_init__(self):
        if self.rel not in RELATIONS:
            raise PolyError(f"unknown relation {self.rel!r}")
        object.__setattr__(self, "coeffs", _coeff_tuple(self.coeffs))
        object.__setattr__(self, "rhs", to_rational(self.rhs))

    @property
    def support(self) -> tuple[VarId, ...]:
        return tuple(v for v, _ in self.coeffs)

    def as_dict(self) -> dict[VarId, Fraction]:
        return dict(self.coeffs)

    def coeff(self, v: VarId) -> Fraction:
        for w, c in self.coeffs:
            if w == v:
                return c
        return Fraction(0)

    @property
    def is_constant(self) -> bool:
        return not self.coeffs

    def scaled(self, factor: Fraction) -> "LinearConstraint":
        if factor <= 0 and self.rel == LE:
            raise PolyError("inequalities may only be scaled by a positive factor")
        return LinearConstraint(tuple((v, c * factor) for v, c in self.coeffs), self.rel, self.rhs * factor)

    def sort_key(self):
        return (tuple((v, c) for v, c in self.coeffs), self.rel, self.rhs)

    def __str__(self) -> str:
        return f"{format_lhs(self.coeffs)} {self.rel} {self.rhs}"

    def to_json(self) -> dict:
        return {
            "coeffs": {v.name: format_rational(c) for v, c in self.coeffs},
            "rel": self.rel,
            "rhs": format_rational(self.rhs),
        }

    @classmethod
    def parse(cls, text: str) -> "LinearConstraint":
        """Inverse of ``str``: ``"d1 + 2*d2 - dc1 <= 13/10"``; ``>=`` is flipped to ``<=``."""
        m = _ROW_RE.match(text)
        if not m:
            raise PolyError(f"cannot parse constraint {text!r}")
        lhs, rel, rhs = m.group(1), m.group(2), m.group(3)
        coeffs: dict[VarId, Fraction] = {}
        if lhs.strip() != "0":
            body = lhs.replace(" ", "")
            if not body.startswith(("+", "-")):
                body = "+" + body
            pos = 0
            for t in _TERM_RE.finditer(body):
                if t.start() != pos:
                    raise PolyError(f"cannot parse constraint {text!r}")
                pos = t.end()
                mag = to_rational(t.group(2)) if t.group(2) else Fraction(1)
                v = VarId.parse(t.group(3))
                coeffs[v] = coeffs.get(v, Fraction(0)) + (mag if t.group(1) == "+" else -mag)
            if pos != len(body):
                raise PolyError(f"cannot parse constraint {text!r}")
        value = to_rational(rhs.strip())
        if rel == ">=":
            return cls({v: -q for v, q in coeffs.items()}, LE, -value)
        return cls(coeffs, LE if rel == "<=" else EQ, value)

    @classmethod
    def from_json(cls, obj: Mapping) -> "LinearConstraint":
        try:
            coeffs = {VarId.parse(k): to_rational(v) for k, v in obj["coeffs"].items()}
            return cls(coeffs, obj.get("rel", LE), to_rational(obj["rhs"]))
        except (KeyError, AttributeError, TypeError) as exc:
            raise PolyError(f"malformed constraint: {obj!r}") from exc


def format_lhs(coeffs) -> str:
    if not coeffs:
        return "0"
    parts = []
    for n, (v, c) in enumerate(coeffs):
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        term = v.name if mag == 1 else f"{mag}*{v.name}"
        if n == 0:
            parts.append(term if sign == "+" else f"-{term}")
        else:
            parts.append(f"{sign} {term}")
    return " ".join(parts)


def le(coeffs, rhs: RationalLike = 0) -> LinearConstraint:
    return LinearConstraint(coeffs, LE, rhs)


def eq(coeffs, rhs: RationalLike = 0) -> LinearConstraint:
    return LinearConstraint(coeffs, EQ, rhs)


def normalize(c: LinearConstraint) -> LinearConstraint:
    """Scale to coprime integer coefficients; equalities get a positive leading coefficient."""
    if not c.coeffs:
        return c
    den = 1
    for _, q in c.coeffs:
        den = den * q.denominator // math.gcd(den, q.denominator)
    ints = [q.numerator * (den // q.denominator) for _, q in c.coeffs]
    g = 0
    for n in ints:
        g = math.gcd(g, n)
    factor = Fraction(den, g)
    if c.rel == EQ and ints[0] < 0:
        factor = -factor
    if factor == 1:
        return c
    return LinearConstraint(
        tuple((v, q * factor) for v, q in c.coeffs), c.rel, c.rhs * factor
    )


def is_tautology(c: LinearConstraint) -> bool:
    if c.coeffs:
        return False
    return c.rhs >= 0 if c.rel == LE else c.rhs == 0


def is_contradiction(c: LinearConstraint) -> bool:
    if c.coeffs:
        return False
    return c.rhs < 0 if c.rel == LE else c.rhs != 0


@dataclass(frozen=True)
class InequalitySystem:
    """A finite constraint list over an ordered variable space."""

    vars: tuple[VarId, ...]
    constraints: tuple[LinearConstraint, ...]

    def __post_init__(self):
        vs = tuple(sorted({var(v) for v in self.vars}))
        object.__setattr__(self, "vars", vs)
        object.__setattr__(self, "constraints", tuple(self.constraints))
        known = set(vs)
        for c in self.constraints:
            for v in c.support:
                if v not in known:
                    raise PolyError(f"constraint {c} uses {v}, which is not in the variable space")

    @classmethod
    def of(cls, constraints: Iterable[LinearConstraint], vars: Iterable = ()) -> "InequalitySystem":
        """Build a system whose variable space is ``vars`` plus every variable used."""
        constraints = tuple(constraints)
        vs = {var(v) for v in vars}
        for c in constraints:
            vs.update(c.support)
        return cls(tuple(vs), constraints)

    def __len__(self) -> int:
        return len(self.constraints)

    def __iter__(self):
        return iter(self.constraints)

    @property
    def inequalities(self) -> tuple[LinearConstraint, ...]:
        return tuple(c for c in self.constraints if c.rel == LE)

    @property
    def equalities(self) -> tuple[LinearConstraint, ...]:
        return tuple(c for c in self.constraints if c.rel == EQ)

    def with_constraints(self, constraints: Iterable[LinearConstraint]) -> "InequalitySystem":
        return InequalitySystem(self.vars, tuple(constraints))

    def without_vars(self, drop: Iterable[VarId]) -> tuple[VarId, ...]:
        drop = set(drop)
        return tuple(v for v in self.vars if v not in drop)

    def __str__(self) -> str:
        head = "vars: " + ", ".join(v.name for v in self.vars)
        return "\n".join([head] + [f"  {c}" for c in self.constraints])

    def to_json(self) -> dict:
        return {
            "vars": [v.name for v in self.vars],
            "constraints": [c.to_json() for c in self.constraints],
        }

    def dumps(self) -> str:
        return dumps(self.to_json())

    @classmethod
    def from_json(cls, obj: Mapping) -> "InequalitySystem":
        if not isinstance(obj, Mapping) or "constraints" not in obj:
            raise PolyError("system JSON needs a 'constraints' list")
        rows = obj["constraints"]
        if not isinstance(rows, list):
            raise PolyError("'constraints' must be a list")
        names = obj.get("vars", [])
        if not isinstance(names, list):
            raise PolyError("'vars' must be a list")
        return cls.of((LinearConstraint.from_json(r) for r in rows), (VarId.parse(n) for n in names))

    @classmethod
    def loads(cls, text: str) -> "InequalitySystem":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise PolyError(f"invalid JSON: {exc}") from exc
        return cls.from_json(obj)


def dumps(obj) -> str:
    """The one JSON encoding used on the wire, so output is byte-stable."""
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def canonicalize(sys: InequalitySystem) -> InequalitySystem:
    """Normalize every row, drop tautologies and duplicates, sort.

    Raises :class:`InfeasibleConstant` when a row reduces to a false constant.
    """
    seen = set()
    out = []
    for c in sys.constraints:
        c = normalize(c)
        if not c.coeffs:
            if is_contradiction(c):
                raise InfeasibleConstant(c)
            continue
        if c in seen:
            continue
        seen.add(c)
        out.append(c)
    out.sort(key=LinearConstraint.sort_key)
    return InequalitySystem(sys.vars, tuple(out))


def evaluate(c: LinearConstraint, point: Mapping[VarId, Fraction]) -> bool:
    total = Fraction(0)
    for v, q in c.coeffs:
        try:
            total += q * point[v]
        except KeyError:
            raise MissingVariable(v) from None
    return total <= c.rhs if c.rel == LE else total == c.rhs


def lhs_value(c: LinearConstraint, point: Mapping[VarId, Fraction]) -> Fraction:
    total = Fraction(0)
    for v, q in c.coeffs:
        if v not in point:
            raise MissingVariable(v)
        total += q * point[v]
    return total


def contains(sys: InequalitySystem, point: Mapping[VarId, Fraction]) -> bool:
    for v in sys.vars:
        if v not in point:
            raise MissingVariable(v)
    return all(evaluate(c, point) for c in sys.constraints)


def violated(sys: InequalitySystem, point: Mapping[VarId, Fraction]) -> list[LinearConstraint]:
    return [c for c in sys.constraints if not evaluate(c, point)]


def point_to_json(point: Mapping[VarId, Fraction]) -> dict:
    return {v.name: format_rational(q) for v, q in sorted(point.items())}


def point_from_json(obj: Mapping) -> dict[VarId, Fraction]:
    return {VarId.parse(k): to_rational(v) for k, v in obj.items()}


def combine(rows: Iterable[tuple[Fraction, LinearConstraint]]) -> tuple[dict[VarId, Fraction], Fraction]:
    """Weighted sum of rows: returns (lhs coefficients without zeros, rhs)."""
    acc: dict[VarId, Fraction] = {}
    rhs = Fraction(0)
    for w, c in rows:
        if w == 0:
            continue
        for v, q in c.coeffs:
            acc[v] = acc.get(v, Fraction(0)) + w * q
        rhs += w * c.rhs
    return {v: q for v, q in acc.items() if q != 0}, rhs
