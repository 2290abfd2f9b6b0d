"""Detection of list walking: several workers giving the same answers in
the same order, as happens when they copy from a shared external list.

For a window of ``s`` answers starting at per-worker position ``o``, the
probability that one worker produces the shared sequence mixes the
positional answer frequencies seen in the data with a deliberately skewed
prior (the most likely remaining item is picked with probability ``1-h``).
A binomial tail then gives the chance that at least ``w`` of the ``W``
eligible workers would share it by accident; windows below the threshold
are reported as lists.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

from .stream import AnswerStream, prefix, prefix_lengths


@dataclass(frozen=True)
class ListWalkConfig:
    s_min: int = 5
    beta: float = 0.5
    h: float = 0.2
    threshold: float = 0.01

    def __post_init__(self) -> None:
        if self.s_min < 2:
            raise ValueError("s_min must be >= 2")
        if not 0 <= self.beta <= 1:
            raise ValueError("beta must lie in [0, 1]")
        if not 0 < self.h < 1:
            raise ValueError("h must lie in (0, 1)")
        if not 0 < self.threshold < 1:
            raise ValueError("threshold must lie in (0, 1)")


@dataclass(frozen=True)
class DetectedWindow:
    offset: int
    length: int
    sequence: tuple[str, ...]
    workers: tuple[str, ...]
    cohort: int
    p_sequence: float
    probability: float


@dataclass(frozen=True)
class ListWalkReport:
    windows: tuple[DetectedWindow, ...]
    affected_hits: int
    n: int
    affected_series: tuple[tuple[int, int], ...] = ()
    config: ListWalkConfig = field(default_factory=ListWalkConfig)

    @property
    def affected_fraction(self) -> float:
        return self.affected_hits / self.n if self.n else 0.0

    def to_dict(self) -> dict:
        return {
            "config": asdict(self.config),
            "n": self.n,
            "affected_hits": self.affected_hits,
            "affected_fraction": self.affected_fraction,
            "windows": [
                {**asdict(w), "sequence": list(w.sequence), "workers": list(w.workers)}
                for w in self.windows
            ],
            "affected_series": [list(p) for p in self.affected_series],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def target_probability(
    sequence: Sequence[str],
    offset: int,
    cohort: Sequence[Sequence[str]],
    beta: float = 0.5,
    h: float = 0.2,
) -> float:
    """Smoothed probability that a single worker produces ``sequence`` at ``offset``.

    Position ``i`` contributes ``beta * r_i / W + (1 - beta) * (1 - h)`` where
    ``r_i`` counts cohort workers whose answer at ``offset + i`` matches.
    """
    W = len(cohort)
    if W == 0:
        raise ValueError("empty cohort")
    end = offset + len(sequence)
    if any(len(seq) < end for seq in cohort):
        raise ValueError("every cohort worker needs answers through the window")
    prior = (1.0 - beta) * (1.0 - h)
    p = 1.0
    for i, target in enumerate(sequence):
        r = sum(1 for seq in cohort if seq[offset + i] == target)
        p *= beta * r / W + prior
    return p


def binomial_tail(w: int, W: int, p: float) -> float:
    """``P[X >= w]`` for ``X ~ Binomial(W, p)``.

    The upper-tail terms are summed directly in log space rather than
    subtracting the lower tail from one, which would cancel badly when
    ``p`` is small.
    """
    if not 0 <= w <= W:
        raise ValueError(f"need 0 <= w <= W, got w={w}, W={W}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p={p} is not a probability")
    if w == 0 or p == 1.0:
        return 1.0
    if p == 0.0:
        return 0.0
    log_p, log_q = math.log(p), math.log1p(-p)
    base = math.lgamma(W + 1)
    terms = [
        base - math.lgamma(i + 1) - math.lgamma(W - i + 1) + i * log_p + (W - i) * log_q
        for i in range(w, W + 1)
    ]
    top = max(terms)
    return min(1.0, math.exp(top) * math.fsum(math.exp(t - top) for t in terms))


def _consolidate(windows: list[DetectedWindow]) -> list[DetectedWindow]:
    # drop windows nested inside another window shared by the same workers
    by_workers: dict[tuple[str, ...], list[DetectedWindow]] = {}
    for win in windows:
        by_workers.setdefault(win.workers, []).append(win)
    kept = []
    for group in by_workers.values():
        group.sort(key=lambda w: (w.offset, -w.length))
        reach = -1
        for win in group:
            end = win.offset + win.length
            if end <= reach:
                continue
            kept.append(win)
            reach = end
    return kept


def scan(stream: AnswerStream, cfg: ListWalkConfig | None = None) -> ListWalkReport:
    """Find answer windows shared by suspiciously many workers.

    Every offset ``o`` and length ``s >= s_min`` is covered: workers sharing
    the first ``s_min`` answers from ``o`` form candidate groups, which are
    extended one answer at a time while at least two members agree. The
    cohort for a window is every worker with at least ``o + s`` answers.
    """
    cfg = cfg or ListWalkConfig()
    sequences = list(stream.worker_sequences().values())
    ids = [s.worker_id for s in sequences]
    values = [s.values for s in sequences]
    lengths = [len(v) for v in values]
    max_len = max(lengths, default=0)

    found: list[DetectedWindow] = []
    for o in range(max_len - cfg.s_min + 1):
        starters = [j for j, n in enumerate(lengths) if n >= o + cfg.s_min]
        if len(starters) < 2:
            break
        groups: dict[tuple[str, ...], list[int]] = {}
        for j in starters:
            groups.setdefault(values[j][o : o + cfg.s_min], []).append(j)
        frontier = [(alpha, g) for alpha, g in groups.items() if len(g) >= 2]
        while frontier:
            alpha, group = frontier.pop()
            s = len(alpha)
            cohort = [values[j] for j, n in enumerate(lengths) if n >= o + s]
            p_alpha = target_probability(alpha, o, cohort, cfg.beta, cfg.h)
            tail = binomial_tail(len(group), len(cohort), p_alpha)
            if tail < cfg.threshold:
                found.append(
                    DetectedWindow(
                        offset=o,
                        length=s,
                        sequence=alpha,
                        workers=tuple(sorted(ids[j] for j in group)),
                        cohort=len(cohort),
                        p_sequence=p_alpha,
                        probability=tail,
                    )
                )
            longer: dict[str, list[int]] = {}
            for j in group:
                if lengths[j] > o + s:
                    longer.setdefault(values[j][o + s], []).append(j)
            frontier.extend((alpha + (a,), g) for a, g in longer.items() if len(g) >= 2)

    windows = sorted(_consolidate(found), key=lambda w: (w.offset, w.length, w.workers))
    by_id = {s.worker_id: s.hit_indices for s in sequences}
    covered = {
        by_id[worker][pos]
        for win in windows
        for worker in win.workers
        for pos in range(win.offset, win.offset + win.length)
    }
    return ListWalkReport(tuple(windows), len(covered), len(stream), config=cfg)


def affected_series(
    stream: AnswerStream, cfg: ListWalkConfig | None = None, step: int = 50
) -> list[tuple[int, int]]:
    """Affected-HIT counts from re-running :func:`scan` on growing prefixes."""
    cfg = cfg or ListWalkConfig()
    return [(k, scan(prefix(stream, k), cfg).affected_hits) for k in prefix_lengths(len(stream), step)]


def detect_lists(stream: AnswerStream, cfg: ListWalkConfig | None = None, step: int | None = None) -> ListWalkReport:
    """Full-stream scan, with the per-prefix series attached when ``step`` is given."""
    cfg = cfg or ListWalkConfig()
    report = scan(stream, cfg)
    if step is None:
        return report
    series = tuple(affected_series(stream, cfg, step))
    return ListWalkReport(report.windows, report.affected_hits, report.n, series, cfg)
