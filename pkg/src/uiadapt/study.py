"""Counterbalanced two-period study bookkeeping and questionnaire scoring.

Participants are assigned round-robin (after a seeded shuffle) to four groups
whose technique/domain sequences form a crossover: every group sees both
techniques and both domains, and every (technique, domain) cell appears in
both periods across groups. Satisfaction comes from a 10-point questionnaire
(mean of items), engagement from a 31-item six-dimension 5-point scale with
optional reverse-coded items. Internal consistency uses Cronbach's alpha.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional, Sequence

import numpy as np

from .ui import Domain


class Technique(str, Enum):
    ADAPTIVE = "adaptive"
    NA = "na"  # non-adaptive: the fixed default configuration


@dataclass(frozen=True)
class PeriodPlan:
    technique: Technique
    domain: Domain


@dataclass(frozen=True)
class SessionPlan:
    period1: PeriodPlan
    period2: PeriodPlan


GROUPS = (1, 2, 3, 4)

# Crossover design: each row is (period-1, period-2).
GROUP_PLANS: Mapping[int, SessionPlan] = {
    1: SessionPlan(
        PeriodPlan(Technique.NA, Domain.COURSES),
        PeriodPlan(Technique.ADAPTIVE, Domain.TRIPS),
    ),
    2: SessionPlan(
        PeriodPlan(Technique.ADAPTIVE, Domain.TRIPS),
        PeriodPlan(Technique.NA, Domain.COURSES),
    ),
    3: SessionPlan(
        PeriodPlan(Technique.ADAPTIVE, Domain.COURSES),
        PeriodPlan(Technique.NA, Domain.TRIPS),
    ),
    4: SessionPlan(
        PeriodPlan(Technique.NA, Domain.TRIPS),
        PeriodPlan(Technique.ADAPTIVE, Domain.COURSES),
    ),
}


def plan_for_group(group: int) -> SessionPlan:
    if group not in GROUP_PLANS:
        raise ValueError(f"group must be one of {GROUPS}")
    return GROUP_PLANS[group]


@dataclass(frozen=True)
class Participant:
    id: str
    group: int
    demographic: Optional[Mapping[str, str]] = None

    def __post_init__(self) -> None:
        if self.group not in GROUPS:
            raise ValueError(f"group must be one of {GROUPS}")


def assign_groups(ids: Sequence[str], seed: int = 0) -> list[Participant]:
    """Seeded shuffle, then round-robin over groups 1..4 (sizes differ by <=1)."""
    if len(set(ids)) != len(ids):
        raise ValueError("participant ids must be distinct")
    rng = np.random.default_rng(seed)
    order = [ids[i] for i in rng.permutation(len(ids))]
    return [Participant(id=pid, group=GROUPS[i % len(GROUPS)]) for i, pid in enumerate(order)]


def group_sequence(seed: int = 0) -> tuple[int, ...]:
    """Seeded permutation of the four groups, cycled for online registration."""
    rng = np.random.default_rng(seed)
    return tuple(GROUPS[i] for i in rng.permutation(len(GROUPS)))


def group_for_registration(n: int, seed: int = 0) -> int:
    """Group of the n-th registered participant (0-based) under the seed."""
    seq = group_sequence(seed)
    return seq[n % len(seq)]


# --- Questionnaires -----------------------------------------------------------

QUIS_DEFAULT_ITEMS = 27
QUIS_SCALE = (1, 10)

UES_ITEMS = 31
UES_SCALE = (1, 5)

# Six-dimension split of the 31-item engagement scale, in item order.
UES_DIMENSIONS: tuple[tuple[str, int], ...] = (
    ("focused_attention", 7),
    ("perceived_usability", 8),
    ("aesthetics", 5),
    ("endurability", 5),
    ("novelty", 3),
    ("felt_involvement", 3),
)
assert sum(n for _, n in UES_DIMENSIONS) == UES_ITEMS


def default_ues_dimension_map() -> tuple[str, ...]:
    out: list[str] = []
    for name, count in UES_DIMENSIONS:
        out.extend([name] * count)
    return tuple(out)


@dataclass(frozen=True)
class QuisResponse:
    """Satisfaction items on a 1..10 scale; score is the plain mean."""

    items: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.items:
            raise ValueError("need at least one item")
        lo, hi = QUIS_SCALE
        if any(not lo <= v <= hi for v in self.items):
            raise ValueError(f"items must lie in [{lo}, {hi}]")


def quis_score(r: QuisResponse) -> float:
    return float(sum(r.items) / len(r.items))


@dataclass(frozen=True)
class UesResponse:
    """31 engagement items on a 1..5 scale.

    dimensions maps each item to its dimension name (defaults to the standard
    split); reverse_coded marks items scored as 6 - v (defaults to none).
    """

    items: tuple[int, ...]
    dimensions: tuple[str, ...] = field(default_factory=default_ues_dimension_map)
    reverse_coded: tuple[bool, ...] = tuple([False] * UES_ITEMS)

    def __post_init__(self) -> None:
        if len(self.items) != UES_ITEMS:
            raise ValueError(f"need exactly {UES_ITEMS} items")
        lo, hi = UES_SCALE
        if any(not lo <= v <= hi for v in self.items):
            raise ValueError(f"items must lie in [{lo}, {hi}]")
        if len(self.dimensions) != UES_ITEMS or len(self.reverse_coded) != UES_ITEMS:
            raise ValueError("dimensions and reverse_coded must cover every item")


def ues_score(r: UesResponse) -> tuple[float, dict[str, float]]:
    """(overall mean, per-dimension means) after reverse-coding."""
    lo, hi = UES_SCALE
    coded = [float(hi + lo - v) if rev else float(v) for v, rev in zip(r.items, r.reverse_coded)]
    by_dim: dict[str, list[float]] = {}
    for value, dim in zip(coded, r.dimensions):
        by_dim.setdefault(dim, []).append(value)
    overall = float(sum(coded) / len(coded))
    return overall, {dim: float(sum(vs) / len(vs)) for dim, vs in by_dim.items()}


def cronbach_alpha(matrix: np.ndarray) -> float:
    """alpha = k/(k-1) * (1 - sum item variances / variance of row totals).

    Rows are participants, columns items; variances are sample variances.
    """
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError("matrix must be 2-d (participants x items)")
    n, k = m.shape
    if n < 2:
        raise ValueError("need at least two participants")
    if k < 2:
        raise ValueError("need at least two items")
    item_vars = m.var(axis=0, ddof=1)
    total_var = m.sum(axis=1).var(ddof=1)
    if total_var == 0.0:
        raise ValueError("degenerate responses")
    return float(k / (k - 1) * (1.0 - item_vars.sum() / total_var))


# --- Descriptive statistics ----------------------------------------------------


@dataclass(frozen=True)
class DescriptiveStats:
    """std is the sample standard deviation; None when n < 2."""

    min: float
    max: float
    mean: float
    median: float
    std: Optional[float]

    def format_row(self, label: str) -> str:
        std = "undefined" if self.std is None else f"{self.std:.2f}"
        return f"{label} {self.min:.2f} {self.max:.2f} {self.mean:.2f} {self.median:.2f} {std}"


def descriptive(values: Sequence[float]) -> DescriptiveStats:
    if not values:
        raise ValueError("no values")
    arr = np.asarray(values, dtype=np.float64)
    return DescriptiveStats(
        min=float(arr.min()),
        max=float(arr.max()),
        mean=float(arr.mean()),
        median=float(np.median(arr)),
        std=float(arr.std(ddof=1)) if len(arr) >= 2 else None,
    )


# --- Long-format export ---------------------------------------------------------

EXPORT_HEADER = ("participant", "group", "period", "technique", "domain", "satisfaction", "engagement")


@dataclass(frozen=True)
class PeriodResult:
    participant: str
    group: int
    period: int
    technique: Technique
    domain: Domain
    satisfaction: float
    engagement: float

    def __post_init__(self) -> None:
        if self.period not in (1, 2):
            raise ValueError("period must be 1 or 2")
        if self.group not in GROUPS:
            raise ValueError(f"group must be one of {GROUPS}")


def export_results(records: Sequence[PeriodResult]) -> str:
    """Long-format CSV, one row per (participant, period), sorted by
    participant id then period. Every participant must have both periods."""
    by_participant: dict[str, dict[int, PeriodResult]] = {}
    for r in records:
        periods = by_participant.setdefault(r.participant, {})
        if r.period in periods:
            raise ValueError(f"duplicate period {r.period} for {r.participant}")
        periods[r.period] = r
    for pid, periods in by_participant.items():
        if set(periods) != {1, 2}:
            raise ValueError(f"missing period for {pid}")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(EXPORT_HEADER)
    for pid in sorted(by_participant):
        for period in (1, 2):
            r = by_participant[pid][period]
            writer.writerow(
                [
                    r.participant,
                    r.group,
                    r.period,
                    r.technique.value,
                    r.domain.value,
                    f"{r.satisfaction:.10g}",
                    f"{r.engagement:.10g}",
                ]
            )
    return buf.getvalue()


def parse_results(text: str) -> list[PeriodResult]:
    """Inverse of export_results (round-trip safe for the emitted format)."""
    reader = csv.reader(io.StringIO(text))
    header = tuple(next(reader))
    if header != EXPORT_HEADER:
        raise ValueError("unexpected header")
    out = []
    for row in reader:
        if not row:
            continue
        pid, group, period, technique, domain, satisfaction, engagement = row
        out.append(
            PeriodResult(
                participant=pid,
                group=int(group),
                period=int(period),
                technique=Technique(technique),
                domain=Domain(domain),
                satisfaction=float(satisfaction),
                engagement=float(engagement),
            )
        )
    return out
