"""Thresholding a matrix profile into events and scoring against ground truth.

An anomaly event is a maximal run of window positions whose profile
distance reaches the threshold; runs separated by at most merge_gap
positions fuse, then runs narrower than min_width are dropped. An event
at positions [s, e] covers samples [s, e + m - 1].

Scoring is event-level. Each ground-truth attack interval gets a
tolerance window from its start to its end plus a smear allowance (one
window length by default, since a window that still overlaps the tail
of an attack keeps alarming). Overlapping attacks are folded into one
logical group for matching, mirroring back-to-back attacks whose peaks
fuse; an event overlapping a group's tolerance window detects every
attack in the group. Events overlapping no group are false positives.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidDataError
from .ioutil import atomic_write_text, format_kv
from .profile import MatrixProfile

ATTACK_CATEGORIES = ("SSSP", "SSMP", "MSSP", "MSMP")


@dataclass
class AnomalyEvent:
    """Maximal alarming run of window positions, ends inclusive."""

    start: int
    end: int
    peak: float
    width: int

    def __post_init__(self) -> None:
        if self.start < 0 or self.end < self.start:
            raise InvalidDataError(f"bad event bounds [{self.start}, {self.end}]")

    def sample_span(self, window: int) -> tuple[int, int]:
        """First and last sample covered by any window in the event."""
        return self.start, self.end + window - 1


@dataclass
class AttackInterval:
    """Ground-truth attack: sample span, targeted channels, taxonomy."""

    start: int
    end: int
    targets: tuple[str, ...]
    category: str = "SSSP"
    affects_process: bool = True

    def __post_init__(self) -> None:
        if isinstance(self.targets, str):
            self.targets = (self.targets,)
        else:
            self.targets = tuple(self.targets)
        if self.start < 0 or self.end < self.start:
            raise InvalidDataError(f"bad attack bounds [{self.start}, {self.end}]")
        if self.category not in ATTACK_CATEGORIES:
            raise InvalidDataError(
                f"category {self.category!r} not one of {ATTACK_CATEGORIES}"
            )
        if not self.targets:
            raise InvalidDataError("attack needs at least one target channel")


@dataclass
class DetectionReport:
    """Events matched against attacks, with event-level FP accounting."""

    events: list
    attacks: list
    window: int
    smear: int
    matches: list = field(repr=False)        # per attack: overlapping event indices
    detected: list = field(repr=False)       # per attack: bool
    delays: list = field(repr=False)         # per attack: samples or None
    event_match: list = field(repr=False)    # per event: first matched attack or -1

    @property
    def detected_count(self) -> int:
        return sum(self.detected)

    @property
    def missed_count(self) -> int:
        return len(self.attacks) - self.detected_count

    @property
    def false_positive_count(self) -> int:
        return sum(1 for a in self.event_match if a < 0)


@dataclass
class SweepPoint:
    threshold: float
    detected: int
    false_positives: int


def _distances(profile) -> np.ndarray:
    if isinstance(profile, MatrixProfile):
        return profile.distances
    return np.asarray(profile, dtype=np.float64)


def threshold_detect(profile, threshold: float, merge_gap: int = 0, min_width: int = 1):
    """Events = maximal runs with distance >= threshold, merged then filtered."""
    if threshold < 0:
        raise InvalidDataError(f"threshold {threshold} is negative")
    if merge_gap < 0:
        raise InvalidDataError(f"merge_gap {merge_gap} is negative")
    if min_width < 1:
        raise InvalidDataError(f"min_width {min_width} must be at least 1")
    d = _distances(profile)
    hot = np.flatnonzero(d >= threshold)
    if hot.size == 0:
        return []
    # raw runs of consecutive alarming positions
    cut = np.flatnonzero(np.diff(hot) > 1)
    starts = np.concatenate(([hot[0]], hot[cut + 1]))
    ends = np.concatenate((hot[cut], [hot[-1]]))
    # bridge short gaps
    merged: list[list[int]] = []
    for s, e in zip(starts, ends):
        if merged and s - merged[-1][1] - 1 <= merge_gap:
            merged[-1][1] = int(e)
        else:
            merged.append([int(s), int(e)])
    events = []
    for s, e in merged:
        if e - s + 1 < min_width:
            continue
        events.append(
            AnomalyEvent(start=s, end=e, peak=float(d[s:e + 1].max()), width=e - s + 1)
        )
    return events


def _attack_groups(attacks) -> list[list[int]]:
    """Indices of attacks folded together wherever their spans intersect."""
    order = sorted(range(len(attacks)), key=lambda k: (attacks[k].start, attacks[k].end))
    groups: list[list[int]] = []
    reach = -1
    for k in order:
        a = attacks[k]
        if groups and a.start <= reach:
            groups[-1].append(k)
            reach = max(reach, a.end)
        else:
            groups.append([k])
            reach = a.end
    return groups


def match_attacks(events, attacks, window: int, smear=None) -> DetectionReport:
    """Associate events with attack tolerance windows.

    Invariant under reordering of either input: events and attacks are
    ranked internally. detected + missed always partitions the attacks.
    """
    if window < 1:
        raise InvalidDataError(f"window {window} must be at least 1")
    smear = window if smear is None else int(smear)
    if smear < 0:
        raise InvalidDataError(f"smear {smear} is negative")
    events = sorted(events, key=lambda ev: (ev.start, ev.end))
    attacks = list(attacks)

    matches: list[list[int]] = [[] for _ in attacks]
    detected = [False] * len(attacks)
    delays: list = [None] * len(attacks)
    event_match = [-1] * len(events)

    for group in _attack_groups(attacks):
        lo = min(attacks[k].start for k in group)
        hi = max(attacks[k].end for k in group) + smear
        hits = []
        for ei, ev in enumerate(events):
            s_lo, s_hi = ev.sample_span(window)
            if s_lo <= hi and lo <= s_hi:
                hits.append(ei)
                if event_match[ei] < 0:
                    event_match[ei] = min(group)
        if not hits:
            continue
        first_alarm = min(events[ei].start for ei in hits)
        for k in group:
            matches[k] = hits
            detected[k] = True
            delays[k] = max(0, first_alarm - attacks[k].start)

    return DetectionReport(
        events=events,
        attacks=attacks,
        window=window,
        smear=smear,
        matches=matches,
        detected=detected,
        delays=delays,
        event_match=event_match,
    )


def sweep_thresholds(
    profile: MatrixProfile,
    attacks,
    thresholds,
    merge_gap: int = 0,
    min_width: int = 1,
    smear=None,
) -> list[SweepPoint]:
    """Detection and false-positive counts across an ascending threshold list."""
    if not isinstance(profile, MatrixProfile):
        raise InvalidDataError("sweep_thresholds needs a MatrixProfile")
    ts = [float(t) for t in thresholds]
    if not ts:
        raise InvalidDataError("no thresholds given")
    if any(t < 0 for t in ts):
        raise InvalidDataError("thresholds must be nonnegative")
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise InvalidDataError("thresholds must be strictly ascending")
    rows = []
    for t in ts:
        events = threshold_detect(profile, t, merge_gap=merge_gap, min_width=min_width)
        rep = match_attacks(events, attacks, profile.window, smear=smear)
        rows.append(
            SweepPoint(
                threshold=t,
                detected=rep.detected_count,
                false_positives=rep.false_positive_count,
            )
        )
    return rows


# ---------------------------------------------------------- serialization

def _fmt_bool(v) -> str:
    return "true" if v else "false"


def format_report(report: DetectionReport, context: dict | None = None) -> str:
    """Structured text: key=value summary, then events and attacks tables."""
    head = dict(context or {})
    head.update(
        {
            "window": report.window,
            "smear": report.smear,
            "events": len(report.events),
            "attacks": len(report.attacks),
            "detected": report.detected_count,
            "missed": report.missed_count,
            "false_positive_events": report.false_positive_count,
        }
    )
    parts = [format_kv(head), "\n[events]\nstart,end,peak,width,matched_attack\n"]
    for ev, am in zip(report.events, report.event_match):
        parts.append(f"{ev.start},{ev.end},{ev.peak:.9g},{ev.width},{am}\n")
    parts.append("\n[attacks]\nstart,end,targets,category,affects_process,detected,delay\n")
    for k, a in enumerate(report.attacks):
        delay = "" if report.delays[k] is None else report.delays[k]
        parts.append(
            f"{a.start},{a.end},{';'.join(a.targets)},{a.category},"
            f"{_fmt_bool(a.affects_process)},{_fmt_bool(report.detected[k])},{delay}\n"
        )
    return "".join(parts)


def write_report(report: DetectionReport, path, context: dict | None = None) -> None:
    atomic_write_text(path, format_report(report, context))


def events_csv(report: DetectionReport) -> str:
    lines = ["start,end,peak,width,matched_attack"]
    for ev, am in zip(report.events, report.event_match):
        lines.append(f"{ev.start},{ev.end},{ev.peak:.9g},{ev.width},{am}")
    return "\n".join(lines) + "\n"


def write_events_csv(report: DetectionReport, path) -> None:
    atomic_write_text(path, events_csv(report))


def sweep_csv(rows) -> str:
    lines = ["threshold,detected,false_positives"]
    for r in rows:
        lines.append(f"{r.threshold:.9g},{r.detected},{r.false_positives}")
    return "\n".join(lines) + "\n"


def write_sweep_csv(rows, path) -> None:
    atomic_write_text(path, sweep_csv(rows))
