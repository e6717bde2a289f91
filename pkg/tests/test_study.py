"""Crossover-study bookkeeping: groups, questionnaires, reliability, export."""

from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from uiadapt.study import (
    DescriptiveStats,
    Participant,
    PeriodResult,
    QuisResponse,
    Technique,
    UesResponse,
    UES_ITEMS,
    assign_groups,
    cronbach_alpha,
    default_ues_dimension_map,
    descriptive,
    export_results,
    group_for_registration,
    group_sequence,
    parse_results,
    plan_for_group,
    quis_score,
    ues_score,
)
from uiadapt.ui import Domain


class TestGroupAssignment:
    def test_33_participants_split_9_8_8_8(self):
        participants = assign_groups([f"p{i}" for i in range(33)], seed=0)
        sizes = sorted(Counter(p.group for p in participants).values())
        assert sizes == [8, 8, 8, 9]

    def test_four_participants_one_per_group(self):
        participants = assign_groups(["a", "b", "c", "d"], seed=1)
        assert sorted(p.group for p in participants) == [1, 2, 3, 4]

    def test_same_seed_identical(self):
        ids = [f"p{i}" for i in range(10)]
        a = assign_groups(ids, seed=5)
        b = assign_groups(ids, seed=5)
        assert a == b

    def test_duplicate_ids_rejected(self):
        with pytest.raises(ValueError, match="distinct"):
            assign_groups(["x", "x"])

    def test_group_validation(self):
        with pytest.raises(ValueError):
            Participant(id="p", group=5)

    def test_registration_sequence_cycles_all_groups(self):
        seq = group_sequence(seed=3)
        assert sorted(seq) == [1, 2, 3, 4]
        firsts = [group_for_registration(n, seed=3) for n in range(8)]
        assert firsts[:4] == list(seq) and firsts[4:] == list(seq)


class TestSessionPlans:
    def test_group_1(self):
        plan = plan_for_group(1)
        assert (plan.period1.technique, plan.period1.domain) == (Technique.NA, Domain.COURSES)
        assert (plan.period2.technique, plan.period2.domain) == (Technique.ADAPTIVE, Domain.TRIPS)

    def test_group_2(self):
        plan = plan_for_group(2)
        assert (plan.period1.technique, plan.period1.domain) == (Technique.ADAPTIVE, Domain.TRIPS)
        assert (plan.period2.technique, plan.period2.domain) == (Technique.NA, Domain.COURSES)

    def test_group_3(self):
        plan = plan_for_group(3)
        assert (plan.period1.technique, plan.period1.domain) == (
            Technique.ADAPTIVE,
            Domain.COURSES,
        )
        assert (plan.period2.technique, plan.period2.domain) == (Technique.NA, Domain.TRIPS)

    def test_group_4(self):
        plan = plan_for_group(4)
        assert (plan.period1.technique, plan.period1.domain) == (Technique.NA, Domain.TRIPS)
        assert (plan.period2.technique, plan.period2.domain) == (Technique.ADAPTIVE, Domain.COURSES)

    def test_each_plan_crosses_technique_and_domain(self):
        for g in (1, 2, 3, 4):
            plan = plan_for_group(g)
            assert plan.period1.technique != plan.period2.technique
            assert plan.period1.domain != plan.period2.domain

    def test_out_of_range_group(self):
        for g in (0, 5, -1):
            with pytest.raises(ValueError):
                plan_for_group(g)


class TestQuis:
    def test_constant_items(self):
        assert quis_score(QuisResponse(items=(7,) * 27)) == 7.0

    def test_two_item_mean(self):
        assert quis_score(QuisResponse(items=(4, 6))) == 5.0

    @given(st.lists(st.integers(min_value=1, max_value=10), min_size=1, max_size=27))
    def test_permutation_invariance(self, items):
        forward = quis_score(QuisResponse(items=tuple(items)))
        backward = quis_score(QuisResponse(items=tuple(reversed(items))))
        assert forward == pytest.approx(backward)
        assert 1.0 <= forward <= 10.0

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError, match="items must lie"):
            QuisResponse(items=(5, 11))
        with pytest.raises(ValueError, match="items must lie"):
            QuisResponse(items=(0,))

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="at least one"):
            QuisResponse(items=())


class TestUes:
    def test_constant_items_no_reverse(self):
        overall, dims = ues_score(UesResponse(items=(3,) * UES_ITEMS))
        assert overall == 3.0
        assert set(dims) == set(default_ues_dimension_map())
        assert all(v == 3.0 for v in dims.values())

    def test_reverse_coded_item_maps_one_to_five(self):
        reverse = tuple(i == 0 for i in range(UES_ITEMS))
        items = (1,) + (3,) * (UES_ITEMS - 1)
        overall, _ = ues_score(UesResponse(items=items, reverse_coded=reverse))
        assert overall == pytest.approx((5 + 3 * (UES_ITEMS - 1)) / UES_ITEMS)

    @given(st.lists(st.integers(min_value=1, max_value=5), min_size=31, max_size=31))
    def test_dimension_means_decompose_overall(self, items):
        overall, dims = ues_score(UesResponse(items=tuple(items)))
        mapping = default_ues_dimension_map()
        weighted = sum(dims[d] * mapping.count(d) for d in dims) / UES_ITEMS
        assert weighted == pytest.approx(overall, abs=1e-12)
        assert 1.0 <= overall <= 5.0

    def test_wrong_item_count_rejected(self):
        with pytest.raises(ValueError, match="exactly"):
            UesResponse(items=(3,) * 30)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError, match="items must lie"):
            UesResponse(items=(6,) + (3,) * (UES_ITEMS - 1))

    def test_mismatched_maps_rejected(self):
        with pytest.raises(ValueError, match="cover every item"):
            UesResponse(items=(3,) * UES_ITEMS, dimensions=("a",) * 30)


class TestCronbachAlpha:
    def test_perfectly_correlated_items(self):
        col = np.array([1.0, 2.0, 3.0, 4.0])
        matrix = np.stack([col, col], axis=1)
        assert cronbach_alpha(matrix) == pytest.approx(1.0)

    def test_hand_computed_three_by_three(self):
        matrix = np.array(
            [
                [2.0, 4.0, 6.0],
                [3.0, 5.0, 9.0],
                [5.0, 8.0, 10.0],
            ]
        )
        # Sample variances: items 7/3, 13/3, 13/3; row totals [12,17,23] -> 91/3.
        expected = Fraction(3, 2) * (1 - Fraction(33, 91))
        assert cronbach_alpha(matrix) == pytest.approx(float(expected), abs=1e-12)

    def test_independent_items_near_zero(self):
        rng = np.random.default_rng(0)
        matrix = rng.uniform(size=(10_000, 2))
        assert abs(cronbach_alpha(matrix)) < 0.15

    def test_constant_shift_invariance(self):
        rng = np.random.default_rng(1)
        matrix = rng.normal(size=(40, 5))
        assert cronbach_alpha(matrix + 17.0) == pytest.approx(cronbach_alpha(matrix))

    def test_degenerate_rejected(self):
        with pytest.raises(ValueError, match="degenerate responses"):
            cronbach_alpha(np.array([[1.0, 2.0], [1.0, 2.0]]))

    def test_too_small_rejected(self):
        with pytest.raises(ValueError):
            cronbach_alpha(np.array([[1.0, 2.0]]))
        with pytest.raises(ValueError):
            cronbach_alpha(np.array([[1.0], [2.0]]))


class TestDescriptive:
    def test_hand_arithmetic(self):
        stats = descriptive([1.0, 2.0, 3.0])
        assert (stats.min, stats.max, stats.mean, stats.median) == (1.0, 3.0, 2.0, 2.0)
        assert stats.std == pytest.approx(1.0)

    def test_single_value_has_no_std(self):
        stats = descriptive([5.0])
        assert stats.std is None
        assert "undefined" in stats.format_row("x")

    def test_even_count_median_midpoint(self):
        assert descriptive([1.0, 2.0, 3.0, 10.0]).median == 2.5

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="no values"):
            descriptive([])

    def test_table_style_row_formatting(self):
        stats = DescriptiveStats(min=4.61, max=8.98, mean=6.90, median=7.02, std=1.11)
        assert stats.format_row("Adaptive") == "Adaptive 4.61 8.98 6.90 7.02 1.11"

    def test_matches_numpy(self):
        rng = np.random.default_rng(2)
        values = rng.normal(size=101).tolist()
        stats = descriptive(values)
        assert stats.mean == pytest.approx(np.mean(values))
        assert stats.median == pytest.approx(np.median(values))
        assert stats.std == pytest.approx(np.std(values, ddof=1))


def period_results(n_participants):
    records = []
    for i in range(n_participants):
        pid = f"p{i:02d}"
        group = (i % 4) + 1
        plan = plan_for_group(group)
        for period, pp in ((1, plan.period1), (2, plan.period2)):
            records.append(
                PeriodResult(
                    participant=pid,
                    group=group,
                    period=period,
                    technique=pp.technique,
                    domain=pp.domain,
                    satisfaction=5.0 + 0.01 * i + period,
                    engagement=3.0 + 0.005 * i,
                )
            )
    return records


class TestExport:
    def test_33_participants_yield_66_rows(self):
        text = export_results(period_results(33))
        lines = text.strip().split("\n")
        assert lines[0] == "participant,group,period,technique,domain,satisfaction,engagement"
        assert len(lines) == 67

    def test_empty_records_header_only(self):
        assert export_results([]).strip().split("\n") == [
            "participant,group,period,technique,domain,satisfaction,engagement"
        ]

    def test_round_trip(self):
        records = period_results(7)
        parsed = parse_results(export_results(records))
        assert sorted(parsed, key=lambda r: (r.participant, r.period)) == sorted(
            records, key=lambda r: (r.participant, r.period)
        )

    def test_missing_period_rejected(self):
        records = period_results(2)[:-1]
        with pytest.raises(ValueError, match="missing period"):
            export_results(records)

    def test_duplicate_period_rejected(self):
        records = period_results(1)
        with pytest.raises(ValueError, match="duplicate period"):
            export_results(records + [records[0]])

    def test_rows_sorted_by_participant_then_period(self):
        records = list(reversed(period_results(5)))
        lines = export_results(records).strip().split("\n")[1:]
        keys = [(line.split(",")[0], int(line.split(",")[2])) for line in lines]
        assert keys == sorted(keys)
