"""End-to-end verification of one CSIT profile, with per-phase timings."""

from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import geometry
from .dof_model import (
    CsitProfile,
    alpha_drop_min,
    expected_intermediate,
    final_rows,
    final_system,
    outer_bound,
    rs_after_power_elim,
    subsets,
    sum_dof,
)
from .fme import EliminationTrace, eliminate, project, prune
from .poly_core import InequalitySystem, LinearConstraint, d, dc


@dataclass
class StepCheck:
    k: int
    match: bool
    missing: tuple = ()  # rows expected but not produced
    extra: tuple = ()  # rows produced but not expected

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "match": self.match,
            "diff": {"missing": [str(c) for c in self.missing], "extra": [str(c) for c in self.extra]},
        }


@dataclass
class VerificationReport:
    profile: CsitProfile
    theorem2: object = None  # EquivalenceCertificate | Counterexample
    certificates_verified: bool = False
    induction_steps: list = field(default_factory=list)
    redundancy: dict = field(default_factory=dict)
    sum_dof: dict = field(default_factory=dict)
    final_region: Optional[InequalitySystem] = None
    timings: dict = field(default_factory=dict)
    trace: Optional[EliminationTrace] = None

    @property
    def equivalent(self) -> bool:
        return isinstance(self.theorem2, geometry.EquivalenceCertificate)

    @property
    def ok(self) -> bool:
        return (
            self.equivalent
            and self.certificates_verified
            and self.theorem2.canonical_match
            and all(s.match for s in self.induction_steps)
            and self.redundancy.get("holds", False)
            and self.sum_dof.get("agree", False)
        )

    def to_json(self, timings: bool = True) -> dict:
        theorem2 = self.theorem2.to_json()
        if self.equivalent:
            theorem2["certificates_verified"] = self.certificates_verified
        out = {
            "profile": self.profile.to_json(),
            "ok": self.ok,
            "theorem2": theorem2,
            "final_region": None if self.final_region is None else self.profile.relabel(self.final_region).to_json(),
            "induction_steps": [s.to_json() for s in self.induction_steps],
            "redundancy": self.redundancy,
            "sum_dof": self.sum_dof,
        }
        if timings:
            out["timings_ms"] = self.timings
        if self.trace is not None:
            out["trace"] = self.trace.to_json()
        return out

    def summary_lines(self) -> list[str]:
        alphas = ",".join(str(a) for a in self.profile.original)
        lines = [f"profile alpha=({alphas}) K={self.profile.K}"]
        t2 = "equivalent" if self.equivalent else "NOT equivalent"
        if self.equivalent:
            t2 += f", certificates {'verified' if self.certificates_verified else 'FAILED'}"
            t2 += f", canonical match {'yes' if self.theorem2.canonical_match else 'no'}"
        lines.append(f"projection vs outer bound: {t2}")
        bad = [s.k for s in self.induction_steps if not s.match]
        lines.append(f"induction steps: {len(self.induction_steps) - len(bad)}/{len(self.induction_steps)} matched")
        lines.append(f"redundancy lemmas: {'hold' if self.redundancy.get('holds') else 'FAIL'}"
                     f" ({self.redundancy.get('checked', 0)} cases)")
        s = self.sum_dof
        lines.append(f"sum-DoF: formula {s.get('formula')}, LP {s.get('lp_outer')}, "
                     f"{'agree' if s.get('agree') else 'DISAGREE'}")
        lines.append("PASS" if self.ok else "FAIL")
        return lines


def _sum_objective(K: int) -> dict:
    return {d(i): Fraction(1) for i in range(1, K + 1)}


def induction_step(profile: CsitProfile, k: int) -> StepCheck:
    """Eliminate ``dc_{k+1}`` from the closed form after ``k`` steps and compare
    against the closed form after ``k + 1`` steps (or the final region)."""
    K = profile.K
    start = expected_intermediate(profile, k)
    produced, _ = eliminate(start, dc(k + 1))
    got = prune(produced, "full")
    if k + 1 <= K - 1:
        want = expected_intermediate(profile, k + 1)
    else:
        want = geometry.minimal_form(final_system(profile))
        # the final closed form must also collapse onto the outer bound
        if want != geometry.minimal_form(outer_bound(profile)):
            return StepCheck(k, False, tuple(want.constraints), ())
    got_rows, want_rows = set(got.constraints), set(want.constraints)
    missing = tuple(sorted(want_rows - got_rows, key=LinearConstraint.sort_key))
    extra = tuple(sorted(got_rows - want_rows, key=LinearConstraint.sort_key))
    return StepCheck(k, not missing and not extra and got.vars == want.vars, missing, extra)


def check_redundancy(profile: CsitProfile) -> dict:
    """Every swap inequality holds, and every looser final row follows from the
    outer-bound rows plus nonnegativity by a verified certificate."""
    K = profile.K
    checked = 0
    failures = []
    for extra in range(2, K + 1):
        for S in subsets(range(1, extra)):
            if not S:
                continue
            lhs, rhs, holds = alpha_drop_min(profile, S, extra)
            checked += 1
            if not holds:
                failures.append({"S": list(S), "extra": extra, "lhs": str(lhs), "rhs": str(rhs)})
    looser, outer = final_rows(profile)
    base = outer_bound(profile)
    implied = 0
    for row in looser:
        cert = geometry.is_implied(base, row)
        checked += 1
        if isinstance(cert, geometry.NotImplied) or not cert.verify():
            failures.append({"row": str(row)})
        else:
            implied += 1
    return {"checked": checked, "looser_rows_implied": implied, "holds": not failures, "failures": failures}


@contextmanager
def _timed(timings: dict, phase: str):
    t0 = time.perf_counter()
    try:
        yield
    finally:
        timings[phase] = round((time.perf_counter() - t0) * 1000, 3)


def run_verification(profile: CsitProfile, trace: bool = False, induction: bool = True) -> VerificationReport:
    rep = VerificationReport(profile)
    K = profile.K
    t = rep.timings
    with _timed(t, "build"):
        start = rs_after_power_elim(profile)
        target = outer_bound(profile)
    with _timed(t, "project"):
        projected, tr = project(start, [dc(i) for i in range(1, K + 1)], "pairwise")
        rep.final_region = geometry.minimal_form(projected)
    if trace:
        rep.trace = tr
    with _timed(t, "equivalence"):
        rep.theorem2 = geometry.equivalent(projected, target)
        if rep.equivalent:
            rep.certificates_verified = rep.theorem2.verify()
    if induction:
        with _timed(t, "induction"):
            rep.induction_steps = [induction_step(profile, k) for k in range(K)]
        with _timed(t, "redundancy"):
            rep.redundancy = check_redundancy(profile)
    else:
        rep.redundancy = {"checked": 0, "holds": True, "skipped": True}
    with _timed(t, "sum_dof"):
        formula = sum_dof(profile)
        lp_outer, _ = geometry.maximize(target, _sum_objective(K), lexicographic=False)
        lp_proj, _ = geometry.maximize(projected, _sum_objective(K), lexicographic=False)
        rep.sum_dof = {
            "formula": str(formula),
            "lp_outer": str(lp_outer),
            "lp_projected": str(lp_proj),
            "agree": formula == lp_outer == lp_proj,
        }
    t["total"] = round(sum(t.values()), 3)
    return rep
