"""Worker answer streams and the frequency statistics computed from them.

An answer stream is the ordered log of HIT responses: one record per HIT,
carrying the worker who submitted it and the (normalized) answer. Every
estimator in the package consumes either the stream itself or its
frequency-of-frequencies summary.
"""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

CSV_HEADER = ("hit_index", "worker_id", "answer")


class StreamError(ValueError):
    """Invalid answer stream or stream input."""


class BlankAnswerError(StreamError):
    """An answer was empty after normalization."""


class StreamParseError(StreamError):
    """A CSV row could not be ingested."""

    def __init__(self, row: int, message: str):
        super().__init__(f"row {row}: {message}")
        self.row = row


def normalize_answer(raw: str) -> str:
    """Canonical form used for answer identity.

    Surrounding whitespace is trimmed, inner whitespace runs collapse to a
    single space and the result is lowercased.

    >>> normalize_answer("  New  York ")
    'new york'
    """
    out = " ".join(raw.split()).lower()
    if not out:
        raise BlankAnswerError("blank answer")
    return out


@dataclass(frozen=True)
class AnswerRecord:
    hit_index: int
    worker_id: str
    answer: str


@dataclass(frozen=True)
class WorkerSequence:
    worker_id: str
    answers: tuple[tuple[int, str], ...]

    def __len__(self) -> int:
        return len(self.answers)

    @property
    def values(self) -> tuple[str, ...]:
        return tuple(a for _, a in self.answers)

    @property
    def hit_indices(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.answers)


@dataclass(frozen=True)
class AnswerStream:
    """Ordered, immutable sequence of answer records.

    Hit indices must be non-negative and strictly increasing. Streams read
    from a HIT log are contiguous from 0; streams produced by the streaker
    heuristics are subsequences and keep the original indices.
    """

    records: tuple[AnswerRecord, ...] = ()

    def __post_init__(self) -> None:
        records = tuple(self.records)
        object.__setattr__(self, "records", records)
        last = -1
        for rec in records:
            if rec.hit_index <= last:
                raise StreamError(
                    f"hit_index {rec.hit_index} does not increase (previous {last})"
                )
            if not rec.answer:
                raise BlankAnswerError(f"blank answer at hit_index {rec.hit_index}")
            last = rec.hit_index

    @classmethod
    def from_answers(
        cls, answers: Iterable[str], workers: Iterable[str] | None = None
    ) -> AnswerStream:
        """Build a stream from raw answers, numbering hits from 0.

        Without ``workers`` every record gets its own worker id, which makes
        the stream look like a with-replacement sample.
        """
        answers = [normalize_answer(a) for a in answers]
        if workers is None:
            worker_ids = [f"w{i}" for i in range(len(answers))]
        else:
            worker_ids = [str(w) for w in workers]
            if len(worker_ids) != len(answers):
                raise StreamError("answers and workers differ in length")
        return cls(
            tuple(AnswerRecord(i, w, a) for i, (w, a) in enumerate(zip(worker_ids, answers)))
        )

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[AnswerRecord]:
        return iter(self.records)

    @property
    def answers(self) -> tuple[str, ...]:
        return tuple(r.answer for r in self.records)

    def worker_sequences(self) -> dict[str, WorkerSequence]:
        """Per-worker answer sequences, keyed in order of first appearance."""
        acc: dict[str, list[tuple[int, str]]] = {}
        for rec in self.records:
            acc.setdefault(rec.worker_id, []).append((rec.hit_index, rec.answer))
        return {w: WorkerSequence(w, tuple(seq)) for w, seq in acc.items()}


@dataclass(frozen=True)
class FrequencyStatistics:
    """Sample size, distinct count and frequency-of-frequencies histogram.

    ``f[j]`` is the number of distinct answers seen exactly ``j`` times;
    zero entries are dropped.
    """

    n: int
    c: int
    f: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        f = {int(j): int(v) for j, v in sorted(self.f.items()) if v}
        object.__setattr__(self, "f", f)
        if any(j < 1 or v < 0 for j, v in f.items()):
            raise ValueError("frequency classes must be >= 1 with non-negative counts")
        if sum(f.values()) != self.c:
            raise ValueError(f"sum of f_j is {sum(f.values())}, expected c={self.c}")
        if sum(j * v for j, v in f.items()) != self.n:
            raise ValueError(f"sum of j*f_j does not equal n={self.n}")

    @classmethod
    def from_f(cls, f: Mapping[int, int]) -> FrequencyStatistics:
        """Statistics implied by a histogram alone."""
        return cls(
            n=sum(j * v for j, v in f.items()), c=sum(f.values()), f=dict(f)
        )

    @classmethod
    def from_counts(cls, counts: Iterable[int]) -> FrequencyStatistics:
        """Statistics from per-class occurrence counts (zeros ignored)."""
        counts = [int(k) for k in counts if k]
        return cls(n=sum(counts), c=len(counts), f=dict(Counter(counts)))

    def get(self, j: int) -> int:
        return self.f.get(j, 0)

    @property
    def f1(self) -> int:
        return self.get(1)

    @property
    def f2(self) -> int:
        return self.get(2)


@dataclass(frozen=True)
class SACurve:
    """Species accumulation curve: distinct answers after each hit.

    ``unique`` may hold fractional values when the curve is an average
    over permutations.
    """

    hits: tuple[int, ...]
    unique: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "hits", tuple(int(h) for h in self.hits))
        object.__setattr__(self, "unique", tuple(self.unique))
        if len(self.hits) != len(self.unique):
            raise ValueError("hits and unique differ in length")
        for i, (h, u) in enumerate(zip(self.hits, self.unique)):
            # tolerance covers float averaging noise in mean curves
            if u > h + 1e-9:
                raise ValueError(f"unique {u} exceeds hits {h}")
            if i and u < self.unique[i - 1] - 1e-9:
                raise ValueError("unique counts must be non-decreasing")

    def __len__(self) -> int:
        return len(self.hits)

    @property
    def points(self) -> list[tuple[int, float]]:
        return list(zip(self.hits, self.unique))


def parse_stream(text: str) -> AnswerStream:
    """Read a ``hit_index,worker_id,answer`` CSV document.

    Rows may come in any order; the result is sorted by hit index and every
    answer is normalized. Row numbers in errors count the header as row 1.
    """
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise StreamParseError(1, "missing header") from None
    if tuple(header) != CSV_HEADER:
        raise StreamParseError(1, f"expected header {','.join(CSV_HEADER)!r}")

    records: list[AnswerRecord] = []
    seen: dict[int, int] = {}
    for row_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 3:
            raise StreamParseError(row_no, f"expected 3 columns, got {len(row)}")
        raw_index, worker, raw_answer = row
        try:
            hit_index = int(raw_index)
        except ValueError:
            raise StreamParseError(row_no, f"hit_index {raw_index!r} is not an integer") from None
        if hit_index < 0:
            raise StreamParseError(row_no, "hit_index must be non-negative")
        if hit_index in seen:
            raise StreamParseError(
                row_no, f"duplicate hit_index {hit_index} (first at row {seen[hit_index]})"
            )
        if not worker:
            raise StreamParseError(row_no, "empty worker_id")
        try:
            answer = normalize_answer(raw_answer)
        except BlankAnswerError:
            raise StreamParseError(row_no, "blank answer") from None
        seen[hit_index] = row_no
        records.append(AnswerRecord(hit_index, worker, answer))

    records.sort(key=lambda r: r.hit_index)
    return AnswerStream(tuple(records))


def serialize_stream(stream: AnswerStream) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for rec in stream.records:
        writer.writerow((rec.hit_index, rec.worker_id, rec.answer))
    return buf.getvalue()


def read_stream(path: str | Path) -> AnswerStream:
    return parse_stream(Path(path).read_text(encoding="utf-8"))


def write_stream(stream: AnswerStream, path: str | Path) -> None:
    Path(path).write_text(serialize_stream(stream), encoding="utf-8", newline="")


def compute_fstat(stream: AnswerStream | Sequence[str]) -> FrequencyStatistics:
    """Frequency-of-frequencies summary of a stream (or a plain answer list)."""
    answers = stream.answers if isinstance(stream, AnswerStream) else tuple(stream)
    if not answers:
        raise StreamError("no samples")
    return FrequencyStatistics.from_counts(Counter(answers).values())


def f1_ratio(fstat: FrequencyStatistics) -> float:
    """Fraction of distinct answers that are singletons."""
    if fstat.c <= 0:
        raise ValueError("f1 ratio needs at least one distinct answer")
    return fstat.f1 / fstat.c


def sac(stream: AnswerStream | Sequence[str]) -> SACurve:
    answers = stream.answers if isinstance(stream, AnswerStream) else tuple(stream)
    seen: set[str] = set()
    unique = []
    for a in answers:
        seen.add(a)
        unique.append(len(seen))
    return SACurve(tuple(range(1, len(answers) + 1)), tuple(unique))


def prefix(stream: AnswerStream, k: int) -> AnswerStream:
    """First ``k`` records of ``stream``, hit indices unchanged."""
    if k < 0 or k > len(stream):
        raise StreamError(f"prefix length {k} outside [0, {len(stream)}]")
    return AnswerStream(stream.records[:k])


def prefix_lengths(n: int, step: int) -> list[int]:
    """Evaluation points ``step, 2*step, ...``, always ending at ``n``."""
    if step < 1:
        raise ValueError("step must be >= 1")
    points = list(range(step, n + 1, step))
    if n and (not points or points[-1] != n):
        points.append(n)
    return points
