"""Synthetic worker answer streams with known ground truth.

Items are labelled ``item1 .. itemN`` in decreasing popularity. Sampling
workers draw from an :class:`ItemDistribution`, by default without
replacement; list walkers copy a fixed item order verbatim. Worker streams
are interleaved into one global HIT order and every record is labelled
with whether it came from a list walker.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from .estimators import estimate_chao92
from .stream import AnswerRecord, AnswerStream, compute_fstat, write_stream


class SimulationError(ValueError):
    """Inconsistent simulation configuration."""


DistKind = Literal["uniform", "zipf", "self_similar", "gray", "explicit"]


@dataclass(frozen=True)
class ItemDistribution:
    """Popularity distribution over ``n_items`` items.

    ``self_similar`` uses geometric weights ``(1-h) h^(i-1)``: the most
    likely remaining item is picked with probability close to ``1-h`` even
    after earlier picks are removed. ``gray`` is the integer 80/20
    generator of Gray et al., where the top ``h`` fraction of items carries
    ``1-h`` of the mass recursively; it has a much longer tail.
    """

    kind: DistKind
    n_items: int
    param: float | None = None
    explicit_weights: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.n_items < 1:
            raise SimulationError("n_items must be >= 1")
        if self.kind == "explicit":
            if self.explicit_weights is None or len(self.explicit_weights) != self.n_items:
                raise SimulationError("explicit weights must have n_items entries")
            if min(self.explicit_weights) <= 0:
                raise SimulationError("weights must be strictly positive")
        elif self.kind in ("self_similar", "gray"):
            if self.param is None or not 0 < self.param < 1:
                raise SimulationError("self-similar h must lie in (0, 1)")
        elif self.kind == "zipf":
            if self.param is None or self.param < 0:
                raise SimulationError("zipf exponent must be >= 0")
        elif self.kind != "uniform":
            raise SimulationError(f"unknown distribution kind {self.kind!r}")

    @classmethod
    def uniform(cls, n_items: int) -> ItemDistribution:
        return cls("uniform", n_items)

    @classmethod
    def zipf(cls, n_items: int, s: float = 1.0) -> ItemDistribution:
        return cls("zipf", n_items, float(s))

    @classmethod
    def self_similar(cls, n_items: int, h: float = 0.2) -> ItemDistribution:
        return cls("self_similar", n_items, float(h))

    @classmethod
    def gray(cls, n_items: int, h: float = 0.2) -> ItemDistribution:
        return cls("gray", n_items, float(h))

    @classmethod
    def explicit(cls, weights: Sequence[float]) -> ItemDistribution:
        return cls("explicit", len(weights), explicit_weights=tuple(float(w) for w in weights))

    @cached_property
    def weights(self) -> np.ndarray:
        N = self.n_items
        rank = np.arange(1, N + 1, dtype=float)
        if self.kind == "uniform":
            w = np.ones(N)
        elif self.kind == "zipf":
            w = rank ** -self.param
        elif self.kind == "self_similar":
            h = self.param
            # log-space keeps deep-tail weights from underflowing to zero
            w = np.exp(np.log1p(-h) + (rank - 1) * math.log(h))
            w = np.maximum(w, np.finfo(float).tiny)
        elif self.kind == "gray":
            theta = math.log1p(-self.param) / math.log(self.param)
            w = (rank / N) ** theta - ((rank - 1) / N) ** theta
        else:
            w = np.asarray(self.explicit_weights, dtype=float)
        w = w / w.sum()
        w.setflags(write=False)
        return w

    @property
    def labels(self) -> list[str]:
        return [f"item{i}" for i in range(1, self.n_items + 1)]


@dataclass(frozen=True)
class WorkerModel:
    """How many sampling workers there are and how much each contributes.

    ``hits`` answers are split among ``num_workers`` either evenly
    (``fixed``) or by weights drawn from a discrete power law with the
    given exponent, every worker answering at least once.
    ``explicit_counts`` overrides both.
    """

    num_workers: int = 1
    hits: int = 100
    counts: Literal["fixed", "power_law"] = "fixed"
    exponent: float = 1.5
    explicit_counts: tuple[int, ...] | None = None
    without_replacement: bool = True
    interleaving: Literal["random", "round_robin"] = "random"

    def __post_init__(self) -> None:
        if self.explicit_counts is not None:
            counts = tuple(int(k) for k in self.explicit_counts)
            object.__setattr__(self, "explicit_counts", counts)
            object.__setattr__(self, "num_workers", len(counts))
            object.__setattr__(self, "hits", sum(counts))
            if not counts or min(counts) < 1:
                raise SimulationError("explicit counts must be >= 1")
        if self.num_workers < 1:
            raise SimulationError("num_workers must be >= 1")
        if self.hits < self.num_workers:
            raise SimulationError("every worker must answer at least once")
        if self.counts not in ("fixed", "power_law"):
            raise SimulationError(f"unknown count model {self.counts!r}")
        if self.interleaving not in ("random", "round_robin"):
            raise SimulationError(f"unknown interleaving {self.interleaving!r}")

    def worker_counts(self, rng: np.random.Generator, n_items: int) -> list[int]:
        cap = n_items if self.without_replacement else self.hits
        if self.explicit_counts is not None:
            counts = list(self.explicit_counts)
        elif self.counts == "fixed":
            base, extra = divmod(self.hits, self.num_workers)
            counts = [base + (1 if j < extra else 0) for j in range(self.num_workers)]
        else:
            raw = rng.zipf(self.exponent, size=self.num_workers).astype(float)
            counts = _allocate(self.hits, raw, cap)
        if max(counts) > cap:
            raise SimulationError(
                f"a worker needs {max(counts)} draws without replacement from {n_items} items"
            )
        return counts


def _allocate(total: int, weights: np.ndarray, cap: int) -> list[int]:
    """Split ``total`` into integer shares >= 1 proportional to ``weights``, capped."""
    k = len(weights)
    if total > k * cap:
        raise SimulationError(f"{total} answers exceed {k} workers x {cap} items")
    counts = np.ones(k, dtype=int)
    remaining = total - k
    while remaining > 0:
        open_ = counts < cap
        share = np.where(open_, weights, 0.0)
        share = share / share.sum() * remaining
        add = np.floor(share).astype(int)
        # largest remainders take the leftover units, ties broken by index
        leftover = remaining - add.sum()
        order = np.lexsort((np.arange(k), -(share - add)))
        add[order[:leftover]] += 1
        counts = np.minimum(counts + add, cap)
        remaining = total - counts.sum()
    return counts.tolist()


@dataclass(frozen=True)
class ListWalkerSpec:
    """Workers that copy a fixed item order.

    ``list_order`` is ``"alphabetical"`` (labels sorted as strings),
    ``"popularity"`` (item1, item2, ...), ``"shuffled"`` (a seeded
    permutation) or an explicit sequence of 0-based item indices.
    ``start_offsets`` gives each walker's starting position in that list.
    """

    count: int
    answers_each: int
    list_order: str | tuple[int, ...] = "alphabetical"
    start_offsets: int | tuple[int, ...] = 0

    def offsets(self) -> tuple[int, ...]:
        if isinstance(self.start_offsets, int):
            return (self.start_offsets,) * self.count
        if len(self.start_offsets) != self.count:
            raise SimulationError("need one start offset per list walker")
        return tuple(self.start_offsets)

    def order(self, dist: ItemDistribution, rng: np.random.Generator) -> list[int]:
        if isinstance(self.list_order, str):
            if self.list_order == "alphabetical":
                labels = dist.labels
                return sorted(range(dist.n_items), key=labels.__getitem__)
            if self.list_order == "popularity":
                return list(range(dist.n_items))
            if self.list_order == "shuffled":
                return rng.permutation(dist.n_items).tolist()
            raise SimulationError(f"unknown list order {self.list_order!r}")
        order = [int(i) for i in self.list_order]
        if sorted(order) != sorted(set(order)) or not all(0 <= i < dist.n_items for i in order):
            raise SimulationError("list order must be distinct item indices")
        return order


@dataclass(frozen=True)
class GroundTruth:
    n_items: int
    weights: tuple[float, ...]
    is_list_walk: tuple[bool, ...]

    @property
    def list_walk_indices(self) -> list[int]:
        return [i for i, flag in enumerate(self.is_list_walk) if flag]

    def to_json(self) -> str:
        payload = {
            "N": self.n_items,
            "weights": list(self.weights),
            "list_walk_indices": self.list_walk_indices,
        }
        return json.dumps(payload, indent=2) + "\n"


@dataclass(frozen=True)
class SimulationOutput:
    stream: AnswerStream
    truth: GroundTruth

    def write(self, directory: str | Path, stem: str = "stream") -> tuple[Path, Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        csv_path = directory / f"{stem}.csv"
        truth_path = directory / f"{stem}.truth.json"
        write_stream(self.stream, csv_path)
        truth_path.write_text(self.truth.to_json(), encoding="utf-8")
        return csv_path, truth_path


def _draw(rng: np.random.Generator, weights: np.ndarray, k: int, without_replacement: bool) -> np.ndarray:
    if not without_replacement:
        return rng.choice(len(weights), size=k, p=weights)
    if k > len(weights):
        raise SimulationError(f"{k} draws without replacement from {len(weights)} items")
    # Gumbel-top-k: ranking log-weights plus Gumbel noise reproduces
    # successive draws with renormalisation after each pick
    keys = np.log(weights) + rng.gumbel(size=len(weights))
    return np.argsort(-keys, kind="stable")[:k]


def simulate(
    dist: ItemDistribution,
    workers: WorkerModel,
    lists: ListWalkerSpec | None = None,
    seed: int = 0,
) -> SimulationOutput:
    """Generate one seeded answer stream and its ground truth."""
    rng = np.random.default_rng(seed)
    labels = dist.labels
    weights = dist.weights

    sequences: list[tuple[str, list[int], bool]] = []
    for j, k in enumerate(workers.worker_counts(rng, dist.n_items)):
        draws = _draw(rng, weights, k, workers.without_replacement)
        sequences.append((f"w{j:03d}", draws.tolist(), False))

    if lists is not None and lists.count > 0:
        order = lists.order(dist, rng)
        for j, start in enumerate(lists.offsets()):
            if start < 0 or start + lists.answers_each > len(order):
                raise SimulationError("list walker runs past the end of its list")
            sequences.append((f"lw{j:03d}", order[start : start + lists.answers_each], True))

    owners = np.repeat(np.arange(len(sequences)), [len(s[1]) for s in sequences])
    if workers.interleaving == "random":
        # a uniform shuffle of the owner multiset picks the next worker with
        # probability proportional to its remaining answers
        owners = rng.permutation(owners)
    else:
        owners = _round_robin([len(s[1]) for s in sequences])

    cursor = [0] * len(sequences)
    records, flags = [], []
    for hit, owner in enumerate(owners.tolist()):
        worker_id, items, walker = sequences[owner]
        item = items[cursor[owner]]
        cursor[owner] += 1
        records.append(AnswerRecord(hit, worker_id, labels[item]))
        flags.append(walker)

    truth = GroundTruth(dist.n_items, tuple(weights.tolist()), tuple(flags))
    return SimulationOutput(AnswerStream(tuple(records)), truth)


def _round_robin(lengths: list[int]) -> np.ndarray:
    out = []
    for turn in range(max(lengths, default=0)):
        out.extend(j for j, n in enumerate(lengths) if turn < n)
    return np.asarray(out, dtype=int)


@dataclass(frozen=True)
class StudyRow:
    mode: str
    num_workers: int
    runs: int
    mean_estimate: float
    mean_error: float
    low_confidence_runs: int


def streaker_impact_study(
    dist: ItemDistribution,
    worker_counts: Sequence[int],
    hits: int,
    seed: int = 0,
    runs: int = 20,
) -> list[StudyRow]:
    """Mean signed Chao92 error as the same ``hits`` are split among more workers.

    The first row is a with-replacement baseline (every answer an
    independent draw); each further row splits ``hits`` evenly among
    ``k`` workers sampling without replacement. Runs whose Chao92 value
    rests on the coverage floor (all singletons) are counted separately
    but still enter the mean.
    """
    rows = []
    settings = [("with_replacement", 1, False)] + [
        ("without_replacement", int(k), True) for k in worker_counts
    ]
    for mode, k, without in settings:
        estimates, flagged = [], 0
        for run in range(runs):
            model = WorkerModel(num_workers=k, hits=hits, without_replacement=without)
            out = simulate(dist, model, seed=int(np.random.SeedSequence([seed, k, run]).generate_state(1)[0]))
            est = estimate_chao92(compute_fstat(out.stream))
            flagged += bool(est.flags)
            estimates.append(est.value)
        mean = float(np.mean(estimates))
        rows.append(StudyRow(mode, k, runs, mean, mean - dist.n_items, flagged))
    return rows
