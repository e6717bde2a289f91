"""Active pairwise ranking of clips, driven by a red-black tree.

Clips are inserted one at a time into a balanced binary tree whose in-order
traversal reads best-first. Every insertion descends from the root, and each
descent step is a question to the human: "which of these two clips do you
prefer?". Left means the pending clip is preferred (descend toward the
more-preferred subtree), Right the opposite, Equal merges the pending clip
into the incumbent's bucket, and Skip re-enqueues the pending clip. Balancing
keeps the number of questions near n log n's information bound; rotations
never reorder the in-order sequence, so answers already given stay honored.

Sessions log every answer as one JSON line and can be resumed by replaying the
log against a fresh session built from the same seed and clip list.
"""

from __future__ import annotations

import json
import time
from collections import Counter, deque
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Iterable, Mapping, Optional, Sequence

import numpy as np

from .env import ClipSegment
from .ui import Domain

RED = "red"
BLACK = "black"


class PreferenceLabel(str, Enum):
    LEFT = "left"
    RIGHT = "right"
    EQUAL = "equal"
    SKIP = "skip"


@dataclass(frozen=True)
class ComparisonQuery:
    query_id: str
    left: str  # pending clip id
    right: str  # incumbent bucket representative


@dataclass(frozen=True)
class LogEntry:
    query: ComparisonQuery
    label: PreferenceLabel
    t: float


@dataclass(frozen=True)
class PreferencePair:
    """Training pair: mu = (1,0) first preferred, (0,1) second, (0.5,0.5) tie."""

    first: str
    second: str
    mu: tuple[float, float]

    def __post_init__(self) -> None:
        if self.mu not in ((1.0, 0.0), (0.0, 1.0), (0.5, 0.5)):
            raise ValueError("mu must be (1,0), (0,1) or (0.5,0.5)")


@dataclass(frozen=True)
class RankProgress:
    placed: int
    total: int
    answered: int

    @property
    def complete(self) -> bool:
        return self.placed >= self.total


class _Node:
    __slots__ = ("bucket", "color", "left", "right", "parent")

    def __init__(self, bucket: list[str], color: str, nil: "_Node | None" = None) -> None:
        self.bucket = bucket
        self.color = color
        self.left: "_Node" = nil if nil is not None else self
        self.right: "_Node" = nil if nil is not None else self
        self.parent: "_Node" = nil if nil is not None else self


class QueryMismatch(ValueError):
    pass


class SessionComplete(RuntimeError):
    pass


class RankSession:
    """One participant's ranking of one domain's clips.

    Construct via new_session(); drive with next_query()/submit(). The clip
    insertion order is a seeded shuffle of the given list, so a (seed, clips)
    pair fully determines behavior given the same answers.
    """

    def __init__(self, participant: str, domain: Domain, clip_ids: Sequence[str], seed: int) -> None:
        if len(clip_ids) < 2:
            raise ValueError("need at least two clips to rank")
        if len(set(clip_ids)) != len(clip_ids):
            raise ValueError("clip ids must be distinct")
        self.participant = participant
        self.domain = domain
        self.seed = seed
        self.clip_ids = tuple(clip_ids)

        order = [clip_ids[i] for i in np.random.default_rng(seed).permutation(len(clip_ids))]
        self._nil = _Node([], BLACK)
        self._root = _Node([order[0]], BLACK, nil=self._nil)
        self._root.parent = self._nil

        self._queue: deque[str] = deque(order[2:])
        self._pending: Optional[str] = order[1]
        self._cursor: _Node = self._root
        self._query_seq = 0
        self._current: Optional[ComparisonQuery] = None
        self.log: list[LogEntry] = []

    # -- queries --------------------------------------------------------

    @property
    def complete(self) -> bool:
        return self._pending is None

    def next_query(self) -> Optional[ComparisonQuery]:
        """Current question, or None once every clip is placed. Idempotent."""
        if self._pending is None:
            return None
        if self._current is None:
            self._query_seq += 1
            self._current = ComparisonQuery(
                query_id=f"q{self._query_seq:05d}",
                left=self._pending,
                right=self._cursor.bucket[0],
            )
        return self._current

    def submit(self, query_id: str, label: PreferenceLabel, t: float | None = None) -> None:
        """Record an answer to the current query and advance the insertion."""
        query = self.next_query()
        if query is None:
            raise SessionComplete("session complete")
        if query_id != query.query_id:
            raise QueryMismatch("query mismatch")
        assert self._pending is not None
        self.log.append(LogEntry(query=query, label=label, t=time.time() if t is None else t))
        self._current = None

        if label is PreferenceLabel.EQUAL:
            self._cursor.bucket.append(self._pending)
            self._advance()
        elif label is PreferenceLabel.SKIP:
            self._queue.append(self._pending)
            self._advance()
        elif label in (PreferenceLabel.LEFT, PreferenceLabel.RIGHT):
            # Left: pending preferred, descend toward the better (left) side.
            child = self._cursor.left if label is PreferenceLabel.LEFT else self._cursor.right
            if child is self._nil:
                node = _Node([self._pending], RED, nil=self._nil)
                node.parent = self._cursor
                if label is PreferenceLabel.LEFT:
                    self._cursor.left = node
                else:
                    self._cursor.right = node
                self._insert_fixup(node)
                self._advance()
            else:
                self._cursor = child
        else:  # pragma: no cover - enum is closed
            raise ValueError(f"unknown label: {label!r}")

    def _advance(self) -> None:
        self._pending = self._queue.popleft() if self._queue else None
        self._cursor = self._root

    # -- results ---------------------------------------------------------

    def ranking(self) -> list[list[str]]:
        """Buckets best-first; only defined once the session is complete."""
        if not self.complete:
            raise SessionComplete("ranking unavailable")
        out: list[list[str]] = []
        stack: list[tuple[_Node, bool]] = [(self._root, False)]
        while stack:
            node, visited = stack.pop()
            if node is self._nil:
                continue
            if visited:
                out.append(list(node.bucket))
            else:
                stack.append((node.right, False))
                stack.append((node, True))
                stack.append((node.left, False))
        return out

    def training_pairs(self, closure: bool = False) -> list[PreferencePair]:
        """Pairs for reward-model training.

        Default: one pair per non-Skip answer, in log order. closure=True
        (complete sessions only) instead derives one pair per unordered clip
        pair from the final ranking, including within-bucket ties.
        """
        if not closure:
            mu_for = {
                PreferenceLabel.LEFT: (1.0, 0.0),
                PreferenceLabel.RIGHT: (0.0, 1.0),
                PreferenceLabel.EQUAL: (0.5, 0.5),
            }
            return [
                PreferencePair(first=e.query.left, second=e.query.right, mu=mu_for[e.label])
                for e in self.log
                if e.label is not PreferenceLabel.SKIP
            ]
        buckets = self.ranking()
        pairs: list[PreferencePair] = []
        for i, bucket in enumerate(buckets):
            for j in range(len(bucket)):
                for k in range(j + 1, len(bucket)):
                    pairs.append(PreferencePair(bucket[j], bucket[k], (0.5, 0.5)))
            for later in buckets[i + 1 :]:
                for a in bucket:
                    for b in later:
                        pairs.append(PreferencePair(a, b, (1.0, 0.0)))
        return pairs

    def progress(self) -> RankProgress:
        placed = sum(len(n.bucket) for n in self._nodes())
        return RankProgress(placed=placed, total=len(self.clip_ids), answered=len(self.log))

    # -- red-black machinery (CLRS insert fixup) --------------------------

    def _rotate_left(self, x: _Node) -> None:
        y = x.right
        x.right = y.left
        if y.left is not self._nil:
            y.left.parent = x
        y.parent = x.parent
        if x.parent is self._nil:
            self._root = y
        elif x is x.parent.left:
            x.parent.left = y
        else:
            x.parent.right = y
        y.left = x
        x.parent = y

    def _rotate_right(self, x: _Node) -> None:
        y = x.left
        x.left = y.right
        if y.right is not self._nil:
            y.right.parent = x
        y.parent = x.parent
        if x.parent is self._nil:
            self._root = y
        elif x is x.parent.right:
            x.parent.right = y
        else:
            x.parent.left = y
        y.right = x
        x.parent = y

    def _insert_fixup(self, z: _Node) -> None:
        while z.parent.color == RED:
            if z.parent is z.parent.parent.left:
                uncle = z.parent.parent.right
                if uncle.color == RED:
                    z.parent.color = BLACK
                    uncle.color = BLACK
                    z.parent.parent.color = RED
                    z = z.parent.parent
                else:
                    if z is z.parent.right:
                        z = z.parent
                        self._rotate_left(z)
                    z.parent.color = BLACK
                    z.parent.parent.color = RED
                    self._rotate_right(z.parent.parent)
            else:
                uncle = z.parent.parent.left
                if uncle.color == RED:
                    z.parent.color = BLACK
                    uncle.color = BLACK
                    z.parent.parent.color = RED
                    z = z.parent.parent
                else:
                    if z is z.parent.left:
                        z = z.parent
                        self._rotate_right(z)
                    z.parent.color = BLACK
                    z.parent.parent.color = RED
                    self._rotate_left(z.parent.parent)
        self._root.color = BLACK

    def _nodes(self) -> Iterable[_Node]:
        stack = [self._root]
        while stack:
            node = stack.pop()
            if node is self._nil:
                continue
            yield node
            stack.append(node.left)
            stack.append(node.right)

    def check_invariants(self) -> None:
        """Red-black structure + clip conservation; raises AssertionError."""
        assert self._root.color == BLACK, "root must be black"
        assert self._nil.color == BLACK, "sentinel must be black"

        def black_height(node: _Node) -> int:
            if node is self._nil:
                return 1
            if node.color == RED:
                assert node.left.color == BLACK and node.right.color == BLACK, "red-red violation"
            if node.left is not self._nil:
                assert node.left.parent is node, "broken parent pointer"
            if node.right is not self._nil:
                assert node.right.parent is node, "broken parent pointer"
            assert node.bucket, "empty bucket"
            lh = black_height(node.left)
            rh = black_height(node.right)
            assert lh == rh, "unequal black heights"
            return lh + (1 if node.color == BLACK else 0)

        black_height(self._root)
        held = Counter()
        for node in self._nodes():
            held.update(node.bucket)
        held.update(self._queue)
        if self._pending is not None:
            held.update([self._pending])
        assert held == Counter(self.clip_ids), "clips lost or duplicated"

    # -- persistence -------------------------------------------------------

    def log_lines(self) -> list[str]:
        return [
            json.dumps(
                {
                    "query_id": e.query.query_id,
                    "left": e.query.left,
                    "right": e.query.right,
                    "label": e.label.value,
                    "t": e.t,
                }
            )
            for e in self.log
        ]


def new_session(
    participant: str,
    domain: Domain,
    clips: Sequence[ClipSegment],
    seed: int,
) -> RankSession:
    """Start a ranking session over the given clips (all from one domain)."""
    for clip in clips:
        if clip.domain is not domain:
            raise ValueError(f"clip {clip.id} belongs to {clip.domain.value}, not {domain.value}")
    return RankSession(participant, domain, [c.id for c in clips], seed)


def replay_session(
    participant: str,
    domain: Domain,
    clip_ids: Sequence[str],
    seed: int,
    entries: Iterable[Mapping[str, Any]],
) -> RankSession:
    """Rebuild a session from its answer log; raises on any divergence."""
    session = RankSession(participant, domain, clip_ids, seed)
    for obj in entries:
        query = session.next_query()
        if query is None:
            raise ValueError("log divergence: answer after completion")
        if (query.query_id, query.left, query.right) != (obj["query_id"], obj["left"], obj["right"]):
            raise ValueError(f"log divergence at {obj['query_id']}")
        session.submit(query.query_id, PreferenceLabel(obj["label"]), t=float(obj["t"]))
    return session


def run_to_completion(
    session: RankSession,
    clips_by_id: Mapping[str, ClipSegment],
    comparator: Callable[[ClipSegment, ClipSegment], PreferenceLabel],
    max_queries: int = 1_000_000,
) -> RankSession:
    """Drive a session to completion with a programmatic comparator."""
    for _ in range(max_queries):
        query = session.next_query()
        if query is None:
            return session
        label = comparator(clips_by_id[query.left], clips_by_id[query.right])
        session.submit(query.query_id, label)
    raise RuntimeError("comparator did not converge within max_queries")
