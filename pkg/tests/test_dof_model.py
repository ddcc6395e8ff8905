import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from misodof.dof_model import (
    CsitProfile,
    EmptySet,
    IndexOutOfRange,
    InvalidProfile,
    NotAchievable,
    Strategy,
    alpha_drop_min,
    expected_intermediate,
    final_rows,
    intermediate_rows,
    outer_bound,
    power_budget_equality,
    private_dof_cap_full,
    random_profile,
    rs_after_power_elim,
    rs_after_private_elim,
    rs_power_elim_mechanical,
    rs_region_single_power,
    sample_full_region_point,
    strategy_point,
    subsets,
    sum_dof,
    synthesize_strategy,
)
from misodof.fme import project, substitute_equality
from misodof.geometry import enumerate_vertices, maximize
from misodof.poly_core import (
    A_SHARED,
    EQ,
    LE,
    PolyError,
    canonicalize,
    contains,
    d,
    dc,
    dp,
)

F = Fraction
alphas = st.fractions(min_value=0, max_value=1, max_denominator=1000)


def texts(s):
    return sorted(str(c) for c in s.constraints)


def ordered(s):
    return [str(c) for c in s.constraints]


def profiles(max_k=5, min_k=1):
    return st.lists(alphas, min_size=min_k, max_size=max_k).map(CsitProfile.from_values)


# ---------------------------------------------------------------- profiles


def test_profile_sorts_and_remembers_order():
    P = CsitProfile.parse("3/10,9/10,1/2")
    assert P.alphas == (F(9, 10), F(1, 2), F(3, 10))
    assert P.original == (F(3, 10), F(9, 10), F(1, 2))
    assert P.to_original([1, 2, 3]) == [3, 1, 2]
    assert P.to_sorted(P.to_original([1, 2, 3])) == [1, 2, 3]


def test_profile_decimal_input_is_exact():
    assert CsitProfile.parse("0.3").alphas == (F(3, 10),)


@pytest.mark.parametrize("text", ["", "2", "-1/2", "1/2,3/2", "x"])
def test_profile_rejects_bad_levels(text):
    with pytest.raises((InvalidProfile, PolyError)):
        CsitProfile.parse(text)


def test_profile_relabels_rows_to_original_users():
    P = CsitProfile.parse("3/10,9/10")
    # sorted user 1 is original user 2
    assert "d2 - dc2 <= 9/10" in texts(P.relabel(rs_after_power_elim(P)))


# ---------------------------------------------------------------- outer bound


def test_outer_bound_k2():
    s = outer_bound(CsitProfile.parse("9/10,3/10"))
    assert texts(s) == ["-d1 <= 0", "-d2 <= 0", "d1 + d2 <= 13/10", "d1 <= 1", "d2 <= 1"]


def test_outer_bound_k1():
    assert texts(outer_bound(CsitProfile.parse("1/3"))) == ["-d1 <= 0", "d1 <= 1"]


def test_outer_bound_k3_rows():
    rows = set(texts(outer_bound(CsitProfile.parse("1,1/2,1/5"))))
    assert {"d2 + d3 <= 6/5", "d1 + d2 + d3 <= 17/10", "d1 + d3 <= 6/5"} <= rows


@given(profiles(max_k=4))
def test_outer_bound_has_one_row_per_subset(P):
    s = outer_bound(P)
    assert len(s) == (2 ** P.K - 1) + P.K


# ---------------------------------------------------------------- rate-splitting regions


def test_rs_region_shape_k2():
    s = rs_region_single_power(CsitProfile.parse("9/10,3/10"))
    assert len(s.vars) == 7
    assert sum(c.rel == EQ for c in s.constraints) == 2
    assert sum(c.rel == LE for c in s.constraints) == 13


def test_rs_region_contains_known_witness():
    s = rs_region_single_power(CsitProfile.parse("9/10,3/10"))
    pt = {d(1): F(1), d(2): F(3, 10), dp(1): F(3, 10), dp(2): F(3, 10),
          dc(1): F(7, 10), dc(2): F(0), A_SHARED: F(3, 10)}
    assert contains(s, pt)


def test_rs_region_zero_alpha_projects_to_unit_budget():
    P = CsitProfile.parse("0,0")
    out, _ = project(rs_region_single_power(P), [dp(1), dp(2), dc(1), dc(2), A_SHARED], "full")
    assert texts(out) == ["-d1 <= 0", "-d2 <= 0", "d1 + d2 <= 1"]


def test_private_elim_k1_rows():
    s = rs_after_private_elim(CsitProfile.parse("1"))
    assert texts(s) == sorted(["-dc1 <= 0", "d1 - dc1 <= 1", "d1 - dc1 - a <= 0",
                               "dc1 + a <= 1", "-a <= 0", "a <= 1", "-d1 <= 0"])


@given(profiles(max_k=5))
def test_private_elim_row_count(P):
    assert len(rs_after_private_elim(P)) == 4 * P.K + 3


@pytest.mark.parametrize("K", [2, 3, 4])
def test_private_elim_equals_substitution(K):
    rng = random.Random(K)
    for _ in range(3):
        P = random_profile(rng, K)
        s = rs_region_single_power(P)
        for i in range(1, K + 1):
            eq = next(c for c in s.constraints if c.rel == EQ and c.coeff(dp(i)) != 0)
            s = substitute_equality(s, eq, dp(i))
        assert s == rs_after_private_elim(P, keep_private_nonneg=True)
        # without the extra rows the projection onto d is unchanged
        lean, _ = project(rs_after_private_elim(P), [A_SHARED] + [dc(i) for i in range(1, K + 1)], "full")
        full, _ = project(s, [A_SHARED] + [dc(i) for i in range(1, K + 1)], "full")
        assert lean == full


def test_power_elim_k2():
    P = CsitProfile.parse("9/10,3/10")
    assert texts(rs_after_power_elim(P)) == sorted([
        "d1 - dc1 <= 9/10", "d2 - dc2 <= 3/10", "-dc1 <= 0", "-dc2 <= 0",
        "d1 + dc2 <= 1", "d2 + dc1 <= 1", "dc1 + dc2 <= 1", "-d1 <= 0", "-d2 <= 0"])


@pytest.mark.parametrize("K", [2, 3, 4, 5])
def test_power_elim_mechanical_path(K):
    rng = random.Random(50 + K)
    for _ in range(3):
        P = random_profile(rng, K)
        assert rs_power_elim_mechanical(P) == canonicalize(rs_after_power_elim(P))


def test_power_elim_zero_alpha_projection():
    P = CsitProfile.parse("0,0")
    out, _ = project(rs_after_power_elim(P), [dc(1), dc(2)], "full")
    assert texts(out) == ["-d1 <= 0", "-d2 <= 0", "d1 + d2 <= 1"]


@pytest.mark.parametrize("K", [1, 2, 3, 4])
def test_budget_equality_is_inconsequential(K):
    # keep the common budget as an inequality and eliminate a by pairing, not substitution
    rng = random.Random(900 + K)
    dcs = [dc(i) for i in range(1, K + 1)]
    for _ in range(4):
        P = random_profile(rng, K)
        relaxed, trace = project(rs_after_private_elim(P), [A_SHARED] + dcs, "full")
        assert trace.steps[0].substituted is None
        tight, _ = project(rs_after_power_elim(P), dcs, "full")
        assert relaxed == tight


def test_power_budget_equality_row():
    assert str(power_budget_equality(CsitProfile.parse("1,1/2"))) == "dc1 + dc2 + a = 1"


# ---------------------------------------------------------------- induction family


def test_intermediate_step1_rows_k3():
    P = CsitProfile.parse("1,1/2,1/5")
    assert ordered(expected_intermediate(P, 1, "pairwise")) == [
        "-d1 <= 0", "d1 + d2 + dc3 <= 2", "d1 + d3 + dc2 <= 2", "d1 + dc2 + dc3 <= 1",
        "-d2 <= 0", "d2 - dc2 <= 1/2", "d2 + dc3 <= 1", "-d3 <= 0", "d3 + dc2 <= 1",
        "d3 - dc3 <= 1/5", "-dc2 <= 0", "-dc3 <= 0"]
    # the literal transcription also carries the empty-subset budget row
    assert "dc2 + dc3 <= 1" in texts(expected_intermediate(P, 1, "syntactic"))


def test_intermediate_step2_rows_k3():
    P = CsitProfile.parse("1,1/2,1/5")
    assert ordered(expected_intermediate(P, 2, "pairwise")) == [
        "-d1 <= 0", "d1 + d2 + d3 <= 5/2", "d1 + d2 + dc3 <= 3/2", "d1 + d3 <= 2", "d1 + dc3 <= 1",
        "-d2 <= 0", "d2 + d3 <= 3/2", "d2 + dc3 <= 1", "-d3 <= 0", "d3 <= 1",
        "d3 - dc3 <= 1/5", "-dc3 <= 0"]


def test_intermediate_group_sizes():
    P = CsitProfile.parse("1,3/4,1/2,1/4")
    for k in range(P.K):
        g = intermediate_rows(P, k)
        left = P.K - k
        assert len(g["alpha"]) == len(g["common_nonneg"]) == left
        assert len(g["with_user"]) == 2 ** k * left
        assert len(g["common_budget"]) == 2 ** k
        assert len(g["nonneg"]) == P.K


def test_intermediate_k0_is_starting_system():
    P = CsitProfile.parse("1,1/2,1/5")
    assert expected_intermediate(P, 0, "syntactic") == canonicalize(rs_after_power_elim(P))


def test_intermediate_index_range():
    P = CsitProfile.parse("1,1/2")
    with pytest.raises(IndexOutOfRange):
        expected_intermediate(P, 2)
    with pytest.raises(IndexOutOfRange):
        intermediate_rows(P, -1)


def test_final_rows_k2():
    looser, outer = final_rows(CsitProfile.parse("9/10,3/10"))
    assert sorted(map(str, looser)) == ["d1 + d2 <= 19/10", "d2 <= 1"]
    assert sorted(map(str, outer)) == ["d1 + d2 <= 13/10", "d1 <= 1", "d2 <= 1"]


# ---------------------------------------------------------------- caps and redundancy lemma


def test_cap_examples():
    P = CsitProfile.from_values(["0", "0"])
    assert private_dof_cap_full([1, 0], P, 1) == 1
    P = CsitProfile.from_values(["1/4", "1/4"])
    assert private_dof_cap_full([F(1, 2), 1], P, 1) == 0


def test_cap_errors():
    P = CsitProfile.parse("1/2,1/3")
    with pytest.raises(IndexOutOfRange):
        private_dof_cap_full([0, 0], P, 3)
    with pytest.raises(IndexOutOfRange):
        private_dof_cap_full([0], CsitProfile.parse("1/2"), 1)


@given(st.fractions(min_value=0, max_value=1, max_denominator=97), profiles(min_k=2, max_k=5), st.data())
def test_cap_with_equal_powers_is_min(a, P, data):
    i = data.draw(st.integers(1, P.K))
    assert private_dof_cap_full([a] * P.K, P, i) == min(a, P.alpha(i))


def test_alpha_drop_min_example():
    P = CsitProfile.parse("9/10,1/2,1/5")
    assert alpha_drop_min(P, {1, 2}, 3) == (F(7, 10), F(14, 10), True)


def test_alpha_drop_min_uniform_is_tight():
    P = CsitProfile.parse("2/5,2/5,2/5,2/5")
    lhs, rhs, holds = alpha_drop_min(P, {1, 2, 3}, 4)
    assert lhs == rhs == F(6, 5) and holds


def test_alpha_drop_min_errors():
    P = CsitProfile.parse("1,1/2,1/4")
    with pytest.raises(EmptySet):
        alpha_drop_min(P, set(), 2)
    with pytest.raises(PolyError):
        alpha_drop_min(P, {2}, 1)
    with pytest.raises(IndexOutOfRange):
        alpha_drop_min(P, {2}, 4)


@pytest.mark.parametrize("K", [2, 3, 4, 5])
def test_alpha_drop_min_exhaustive(K):
    rng = random.Random(K)
    for _ in range(20):
        P = random_profile(rng, K)
        for extra in range(2, K + 1):
            for S in subsets(range(1, extra)):
                if S:
                    assert alpha_drop_min(P, S, extra)[2]


@given(profiles(min_k=2, max_k=8), st.data())
def test_alpha_drop_min_holds_for_sorted_profiles(P, data):
    extra = data.draw(st.integers(2, P.K))
    S = data.draw(st.sets(st.integers(1, extra - 1), min_size=1))
    assert alpha_drop_min(P, S, extra)[2]


# ---------------------------------------------------------------- synthesis and sum-DoF


def test_synthesize_example_witness():
    P = CsitProfile.parse("9/10,3/10")
    s = synthesize_strategy(P, ["1", "3/10"])
    assert isinstance(s, Strategy)
    assert (s.a, s.d_private, s.d_common) == (F(3, 10), (F(3, 10), F(3, 10)), (F(7, 10), F(0)))
    assert contains(rs_region_single_power(P), strategy_point(P, s))


def test_synthesize_zero():
    s = synthesize_strategy(CsitProfile.parse("9/10,3/10"), [0, 0])
    assert s.a == 0 and s.d_private == (0, 0) and s.d_common == (0, 0)


def test_synthesize_reports_violated_row():
    res = synthesize_strategy(CsitProfile.parse("9/10,3/10"), [1, 1])
    assert isinstance(res, NotAchievable) and not res
    assert str(res.violated) == "d1 + d2 <= 13/10"


def test_synthesize_uses_original_labels():
    P = CsitProfile.parse("3/10,9/10")
    s = synthesize_strategy(P, ["3/10", "1"])
    assert s.dof == (F(3, 10), F(1))
    assert str(synthesize_strategy(P, [1, 1]).violated) == "d1 + d2 <= 13/10"


def test_synthesize_rejects_bad_input():
    P = CsitProfile.parse("1/2,1/3")
    with pytest.raises(PolyError):
        synthesize_strategy(P, [0])
    with pytest.raises(PolyError):
        synthesize_strategy(P, [-1, 0])


@pytest.mark.parametrize("K", [2, 3])
def test_synthesize_at_every_vertex(K):
    P = random_profile(random.Random(K), K)
    lifted = rs_region_single_power(P)
    for v in enumerate_vertices(outer_bound(P)).points():
        s = synthesize_strategy(P, P.to_original(list(v)))
        assert isinstance(s, Strategy) and contains(lifted, strategy_point(P, s))


@pytest.mark.parametrize("text,value", [("1,1/2,1/5", F(17, 10)), ("0,0,0", F(1)), ("1,1,1,1", F(4)), ("1/3", F(1))])
def test_sum_dof_examples(text, value):
    P = CsitProfile.parse(text)
    assert sum_dof(P) == value
    assert maximize(outer_bound(P), {d(i): 1 for i in range(1, P.K + 1)}, lexicographic=False)[0] == value


@given(profiles(max_k=5))
def test_sum_dof_matches_lp(P):
    val, _ = maximize(outer_bound(P), {d(i): 1 for i in range(1, P.K + 1)}, lexicographic=False)
    assert val == sum_dof(P)


# ---------------------------------------------------------------- sampling


@given(profiles(max_k=5), st.integers(0, 2 ** 32))
def test_full_region_samples_land_in_outer_bound(P, seed):
    a_vec, priv, common, dof = sample_full_region_point(P, random.Random(seed))
    assert all(0 <= x <= 1 for x in a_vec)
    assert sum(common) <= 1 - max(a_vec)
    if P.K >= 2:
        for i in range(P.K):
            assert 0 <= priv[i] <= private_dof_cap_full(a_vec, P, i + 1)
    assert contains(outer_bound(P), {d(i + 1): x for i, x in enumerate(dof)})


def test_subsets_enumeration():
    # by size, then lexicographically
    assert list(subsets([1, 2, 3])) == [(), (1,), (2,), (3,), (1, 2), (1, 3), (2, 3), (1, 2, 3)]
    assert len(list(subsets(range(1, 5)))) == 16
