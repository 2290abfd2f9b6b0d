"""Streaker-bias correction.

Workers who contribute far more answers than their peers ("streakers")
sample without replacement and flood the stream with new items, which
makes coverage-based estimators over-predict. Both heuristics here slow
such workers down before estimation by dropping part of their answers:

* ``cluster``: cap every worker near the mean answer count of the top-t
  workers, resampling the retained answers uniformly.
* ``f1``: the same quota rule, but restricted to answers that are
  singletons in the whole stream, so duplicated answers are never removed.

In both cases a worker never loses more than ``floor(r * a_j)`` answers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal

import numpy as np

from .stream import AnswerStream

HeuristicKind = Literal["cluster", "f1"]


@dataclass(frozen=True)
class HeuristicConfig:
    kind: HeuristicKind = "f1"
    t: int = 10
    r: float = 0.40
    seed: int = 0
    repetitions: int = 1

    def __post_init__(self) -> None:
        if self.kind not in ("cluster", "f1"):
            raise ValueError(f"unknown heuristic kind {self.kind!r}")
        if self.t < 1:
            raise ValueError("t must be >= 1")
        if not 0 <= self.r < 1:
            raise ValueError("r must lie in [0, 1)")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")


def quota(counts: list[int], t: int) -> Fraction:
    """Mean of the ``t`` largest counts (all counts if there are fewer)."""
    if not counts:
        return Fraction(0)
    top = sorted(counts, reverse=True)[:t]
    return Fraction(sum(top), len(top))


def removal_count(a: int, q: Fraction, r: float) -> int:
    """How many of a worker's ``a`` answers to drop under quota ``q``.

    Retained answers never exceed the quota, so the excess is rounded up,
    and the cap ``floor(r * a)`` is taken in exact arithmetic.
    """
    excess = max(math.ceil(a - q), 0)
    cap = math.floor(Fraction(repr(r)) * a)
    return min(excess, cap)


def _rng(cfg: HeuristicConfig, rep: int) -> np.random.Generator:
    return np.random.default_rng([cfg.seed, rep])


def cluster_truncate(stream: AnswerStream, cfg: HeuristicConfig, rep: int = 0) -> AnswerStream:
    """Multistage-cluster truncation of over-contributing workers.

    Each worker keeps a uniform without-replacement subsample of its own
    sequence; kept records stay in arrival order with their original hit
    indices. ``rep`` selects an independent resample for the same seed.
    """
    if cfg.kind != "cluster":
        raise ValueError("cluster_truncate needs a 'cluster' config")
    sequences: dict[str, list[int]] = {}
    for pos, rec in enumerate(stream.records):
        sequences.setdefault(rec.worker_id, []).append(pos)
    q = quota([len(s) for s in sequences.values()], cfg.t)

    rng = _rng(cfg, rep)
    dropped: set[int] = set()
    for positions in sequences.values():
        a = len(positions)
        k = removal_count(a, q, cfg.r)
        if k == 0:
            continue
        keep = set(rng.choice(a, size=a - k, replace=False).tolist())
        dropped.update(p for i, p in enumerate(positions) if i not in keep)
    return AnswerStream(tuple(rec for pos, rec in enumerate(stream.records) if pos not in dropped))


def f1_truncate(stream: AnswerStream, cfg: HeuristicConfig, rep: int = 0) -> AnswerStream:
    """Drop part of the streakers' singleton answers.

    ``a_j`` counts worker j's answers that occur exactly once in the whole
    stream; the quota and the r-cap both apply to that count.
    """
    if cfg.kind != "f1":
        raise ValueError("f1_truncate needs an 'f1' config")
    totals: dict[str, int] = {}
    for rec in stream.records:
        totals[rec.answer] = totals.get(rec.answer, 0) + 1

    singles: dict[str, list[int]] = {}
    for pos, rec in enumerate(stream.records):
        bucket = singles.setdefault(rec.worker_id, [])
        if totals[rec.answer] == 1:
            bucket.append(pos)
    q = quota([len(s) for s in singles.values()], cfg.t)

    rng = _rng(cfg, rep)
    dropped: set[int] = set()
    for positions in singles.values():
        k = removal_count(len(positions), q, cfg.r)
        if k:
            dropped.update(rng.choice(positions, size=k, replace=False).tolist())
    return AnswerStream(tuple(rec for pos, rec in enumerate(stream.records) if pos not in dropped))


def apply_heuristic(stream: AnswerStream, cfg: HeuristicConfig, rep: int = 0) -> AnswerStream:
    if cfg.kind == "cluster":
        return cluster_truncate(stream, cfg, rep)
    return f1_truncate(stream, cfg, rep)
