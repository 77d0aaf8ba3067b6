"""Tests for event extraction and ground-truth scoring."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from procmp.detection import (
    AnomalyEvent,
    AttackInterval,
    match_attacks,
    sweep_thresholds,
    threshold_detect,
)
from procmp.errors import InvalidDataError
from procmp.profile import MatrixProfile


def make_profile(distances, window=4):
    d = np.asarray(distances, dtype=np.float64)
    return MatrixProfile(
        window=window,
        metric="hamming",
        distances=d,
        nn_index=np.zeros(d.size, dtype=np.int64),
        exclusion=0,
    )


# -------------------------------------------------------- threshold_detect

class TestThresholdDetect:
    def test_single_run(self):
        events = threshold_detect([0, 0, 0.05, 0.2, 0.3, 0.08, 0], 0.1)
        assert len(events) == 1
        ev = events[0]
        assert (ev.start, ev.end) == (3, 4)
        assert ev.peak == pytest.approx(0.3)
        assert ev.width == 2

    def test_merge_gap_bridges_runs(self):
        events = threshold_detect([0.2, 0, 0.2], 0.1, merge_gap=1)
        assert len(events) == 1
        assert (events[0].start, events[0].end) == (0, 2)
        assert events[0].width == 3

    def test_without_merge_gap_runs_stay_apart(self):
        events = threshold_detect([0.2, 0, 0.2], 0.1)
        assert [(e.start, e.end) for e in events] == [(0, 0), (2, 2)]

    def test_min_width_drops_blips(self):
        events = threshold_detect([0, 0.5, 0, 0.5, 0.5, 0], 0.1, min_width=2)
        assert [(e.start, e.end) for e in events] == [(3, 4)]

    def test_threshold_above_max_gives_nothing(self):
        assert threshold_detect([0.1, 0.9, 0.3], 1.1) == []

    def test_threshold_zero_spans_everything(self):
        # distance >= 0 holds everywhere, so one event covers the profile,
        # spanning each positive run
        events = threshold_detect([0.2, 0.0, 0.2], 0.0)
        assert [(e.start, e.end) for e in events] == [(0, 2)]

    def test_peak_reaches_threshold(self):
        events = threshold_detect([0, 0.1, 0.1, 0], 0.1)
        assert events[0].peak >= 0.1

    def test_accepts_matrix_profile(self):
        events = threshold_detect(make_profile([0, 0.4, 0]), 0.2)
        assert [(e.start, e.end) for e in events] == [(1, 1)]

    def test_parameter_validation(self):
        with pytest.raises(InvalidDataError):
            threshold_detect([0.1], -0.5)
        with pytest.raises(InvalidDataError):
            threshold_detect([0.1], 0.1, merge_gap=-1)
        with pytest.raises(InvalidDataError):
            threshold_detect([0.1], 0.1, min_width=0)

    @given(
        seed=st.integers(0, 2**32 - 1),
        merge_gap=st.integers(0, 4),
        min_width=st.integers(1, 3),
    )
    @settings(max_examples=40, deadline=None)
    def test_events_are_sane(self, seed, merge_gap, min_width):
        rng = np.random.default_rng(seed)
        d = rng.uniform(0, 1, size=rng.integers(1, 120))
        t = float(rng.uniform(0, 1))
        events = threshold_detect(d, t, merge_gap=merge_gap, min_width=min_width)
        prev_end = -2
        for ev in events:
            assert 0 <= ev.start <= ev.end < d.size
            assert ev.width == ev.end - ev.start + 1
            assert ev.width >= min_width
            assert ev.peak >= t
            assert ev.start > prev_end + 1  # disjoint and ordered
            prev_end = ev.end

    @given(seed=st.integers(0, 2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_alarmed_positions_shrink_with_threshold(self, seed):
        rng = np.random.default_rng(seed)
        d = rng.uniform(0, 1, size=80)
        counts = [np.count_nonzero(d >= t) for t in np.linspace(0, 1.05, 12)]
        assert all(a >= b for a, b in zip(counts, counts[1:]))


# ----------------------------------------------------------- match_attacks

class TestMatchAttacks:
    def test_exact_cover(self):
        m = 10
        attack = AttackInterval(start=50, end=69, targets=("P-101",))
        event = AnomalyEvent(start=50, end=60, peak=0.5, width=11)
        rep = match_attacks([event], [attack], window=m)
        assert rep.detected == [True]
        assert rep.missed_count == 0
        assert rep.false_positive_count == 0
        assert rep.delays == [0]
        assert rep.matches[0] == [0]
        assert rep.event_match == [0]

    def test_smear_allows_late_alarm(self):
        attack = AttackInterval(start=10, end=19, targets=("P-101",))
        late = AnomalyEvent(start=24, end=25, peak=0.5, width=2)
        hit = match_attacks([late], [attack], window=4, smear=10)
        assert hit.detected == [True]
        assert hit.delays == [14]
        miss = match_attacks([late], [attack], window=4, smear=2)
        assert miss.detected == [False]
        assert miss.delays == [None]
        assert miss.false_positive_count == 1

    def test_early_alarm_clamps_delay(self):
        attack = AttackInterval(start=100, end=150, targets=("P-101",))
        ev = AnomalyEvent(start=95, end=120, peak=0.4, width=26)
        rep = match_attacks([ev], [attack], window=8)
        assert rep.delays == [0]

    def test_back_to_back_attacks_one_event(self):
        a1 = AttackInterval(start=100, end=149, targets=("P-302",))
        a2 = AttackInterval(start=150, end=400, targets=("P-302",))
        ev = AnomalyEvent(start=90, end=380, peak=0.6, width=291)
        rep = match_attacks([ev], [a1, a2], window=20)
        assert rep.detected == [True, True]
        assert rep.false_positive_count == 0

    def test_overlapping_attacks_form_one_group(self):
        a1 = AttackInterval(start=100, end=200, targets=("P-101",))
        a2 = AttackInterval(start=150, end=260, targets=("P-102",))
        ev = AnomalyEvent(start=230, end=240, peak=0.6, width=11)
        rep = match_attacks([ev], [a1, a2], window=10, smear=20)
        # event only overlaps a2's own span, but the group spans both
        assert rep.detected == [True, True]
        assert rep.delays[0] == 130
        assert rep.delays[1] == 80

    def test_no_attacks_means_every_event_is_fp(self):
        evs = [
            AnomalyEvent(start=1, end=2, peak=0.2, width=2),
            AnomalyEvent(start=9, end=9, peak=0.9, width=1),
        ]
        rep = match_attacks(evs, [], window=4)
        assert rep.false_positive_count == 2
        assert rep.detected_count == 0
        assert rep.event_match == [-1, -1]

    def test_non_process_attacks_still_count(self):
        attack = AttackInterval(
            start=10, end=19, targets=("P-101",), affects_process=False
        )
        rep = match_attacks([], [attack], window=4)
        assert rep.missed_count == 1
        rep = match_attacks(
            [AnomalyEvent(start=11, end=12, peak=0.3, width=2)], [attack], window=4
        )
        assert rep.detected_count == 1

    def test_detected_plus_missed_partitions(self):
        attacks = [
            AttackInterval(start=s, end=s + 9, targets=("X",)) for s in (0, 40, 90)
        ]
        evs = [AnomalyEvent(start=41, end=44, peak=0.5, width=4)]
        rep = match_attacks(evs, attacks, window=4)
        assert rep.detected_count + rep.missed_count == 3
        assert rep.detected == [False, True, False]

    def test_order_invariance(self):
        attacks = [
            AttackInterval(start=300, end=340, targets=("A",)),
            AttackInterval(start=10, end=30, targets=("B",)),
        ]
        evs = [
            AnomalyEvent(start=305, end=310, peak=0.5, width=6),
            AnomalyEvent(start=12, end=15, peak=0.7, width=4),
        ]
        a = match_attacks(evs, attacks, window=6)
        b = match_attacks(list(reversed(evs)), attacks, window=6)
        assert a.detected == b.detected
        assert a.delays == b.delays
        assert a.false_positive_count == b.false_positive_count

    def test_attack_validation(self):
        with pytest.raises(InvalidDataError):
            AttackInterval(start=10, end=5, targets=("X",))
        with pytest.raises(InvalidDataError):
            AttackInterval(start=0, end=5, targets=("X",), category="BAD")
        with pytest.raises(InvalidDataError):
            AttackInterval(start=0, end=5, targets=())


# --------------------------------------------------------- sweep_thresholds

class TestSweepThresholds:
    def test_counts_across_thresholds(self):
        d = np.zeros(200)
        d[50:60] = 0.5   # covers the attack
        d[120:124] = 0.3  # spurious
        prof = make_profile(d, window=10)
        attacks = [AttackInterval(start=50, end=69, targets=("X",))]
        rows = sweep_thresholds(prof, attacks, [0.1, 0.4, 0.9])
        assert [(r.detected, r.false_positives) for r in rows] == [
            (1, 1),
            (1, 0),
            (0, 0),
        ]

    def test_threshold_above_global_max(self):
        prof = make_profile([0.2, 0.4])
        rows = sweep_thresholds(prof, [], [1.0])
        assert rows[0].detected == 0
        assert rows[0].false_positives == 0

    def test_requires_ascending(self):
        prof = make_profile([0.1])
        with pytest.raises(InvalidDataError):
            sweep_thresholds(prof, [], [0.5, 0.2])
        with pytest.raises(InvalidDataError):
            sweep_thresholds(prof, [], [])
        with pytest.raises(InvalidDataError):
            sweep_thresholds(prof, [], [-0.1, 0.5])
