from collections import Counter

import pytest
from hypothesis import given, strategies as st

from openworld.stream import (
    AnswerRecord,
    AnswerStream,
    BlankAnswerError,
    FrequencyStatistics,
    SACurve,
    StreamError,
    StreamParseError,
    compute_fstat,
    f1_ratio,
    normalize_answer,
    parse_stream,
    prefix,
    prefix_lengths,
    sac,
    serialize_stream,
)

answers = st.lists(st.sampled_from("abcdefghij"), min_size=1, max_size=60)


def stream_of(*answers):
    return AnswerStream.from_answers(answers)


class TestNormalize:
    def test_collapses_whitespace_and_case(self):
        assert normalize_answer("  New  York ") == "new york"
        assert normalize_answer("Texas") == "texas"

    def test_blank_is_error(self):
        with pytest.raises(BlankAnswerError):
            normalize_answer("   ")


class TestParse:
    def test_three_rows(self):
        s = parse_stream("hit_index,worker_id,answer\n0,w1,Texas\n1,w2,Ohio\n2,w1,Iowa\n")
        assert len(s) == 3
        assert s.answers == ("texas", "ohio", "iowa")

    def test_out_of_order_rows_are_sorted(self):
        shuffled = parse_stream("hit_index,worker_id,answer\n2,w,c\n0,w,a\n1,w,b\n")
        ordered = parse_stream("hit_index,worker_id,answer\n0,w,a\n1,w,b\n2,w,c\n")
        assert shuffled == ordered

    @pytest.mark.parametrize(
        "body, row",
        [
            ("0,w1,a\n1,w2,\n", 3),
            ("0,w1,a\n0,w2,b\n", 3),
            ("x,w1,a\n", 2),
            ("-1,w1,a\n", 2),
            ("0,,a\n", 2),
            ("0,w1\n", 2),
        ],
    )
    def test_bad_rows_name_the_row(self, body, row):
        with pytest.raises(StreamParseError) as err:
            parse_stream("hit_index,worker_id,answer\n" + body)
        assert err.value.row == row
        assert f"row {row}" in str(err.value)

    def test_bad_header(self):
        with pytest.raises(StreamParseError):
            parse_stream("index,worker,answer\n0,w,a\n")

    def test_quoted_answers_round_trip(self):
        s = AnswerStream.from_answers(['washington, d.c.', 'say "hi"'], ["w1", "w2"])
        assert parse_stream(serialize_stream(s)) == s

    @given(answers)
    def test_round_trip(self, values):
        s = AnswerStream.from_answers(values, [f"w{i % 3}" for i in range(len(values))])
        assert parse_stream(serialize_stream(s)) == s


class TestStreamInvariants:
    def test_indices_must_increase(self):
        with pytest.raises(StreamError):
            AnswerStream((AnswerRecord(1, "w", "a"), AnswerRecord(1, "w", "b")))

    def test_gaps_allowed(self):
        s = AnswerStream((AnswerRecord(0, "w", "a"), AnswerRecord(5, "w", "b")))
        assert len(s) == 2

    def test_worker_sequences_keep_order(self):
        s = AnswerStream.from_answers("abcd", ["x", "y", "x", "y"])
        seqs = s.worker_sequences()
        assert list(seqs) == ["x", "y"]
        assert seqs["x"].values == ("a", "c")
        assert seqs["y"].hit_indices == (1, 3)


class TestFstat:
    def test_examples(self):
        fs = compute_fstat(stream_of("A", "B", "A", "C"))
        assert (fs.n, fs.c, fs.f) == (4, 3, {1: 2, 2: 1})
        fs = compute_fstat(stream_of("A", "A", "A"))
        assert (fs.n, fs.c, fs.f) == (3, 1, {3: 1})

    def test_empty_is_error(self):
        with pytest.raises(StreamError):
            compute_fstat(AnswerStream())

    def test_inconsistent_histogram_rejected(self):
        with pytest.raises(ValueError):
            FrequencyStatistics(n=5, c=2, f={1: 2})

    @given(answers)
    def test_sums(self, values):
        fs = compute_fstat(values)
        assert sum(fs.f.values()) == fs.c == len(set(values))
        assert sum(j * v for j, v in fs.f.items()) == fs.n == len(values)

    def test_uniform_sample_peaks_near_four(self):
        # 200 draws from 50 equally likely items: mean count per item is 4
        import numpy as np

        rng = np.random.default_rng(7)
        totals = Counter()
        for _ in range(50):
            totals.update(compute_fstat(rng.integers(0, 50, 200).tolist()).f)
        mode = max(totals, key=totals.get)
        assert mode in (3, 4)


class TestF1Ratio:
    def test_examples(self):
        assert f1_ratio(FrequencyStatistics.from_f({1: 10, 2: 40})) == 0.2
        assert f1_ratio(FrequencyStatistics.from_f({2: 5})) == 0.0
        assert f1_ratio(FrequencyStatistics.from_f({1: 7})) == 1.0


class TestSac:
    def test_example(self):
        assert sac(stream_of("A", "B", "A", "C")).points == [(1, 1), (2, 2), (3, 2), (4, 3)]

    def test_constant(self):
        assert sac(stream_of(*"aaaaa")).unique == (1,) * 5

    def test_rejects_decreasing(self):
        with pytest.raises(ValueError):
            SACurve((1, 2), (1, 0))

    @given(answers)
    def test_bounds(self, values):
        curve = sac(values)
        assert all(u <= h for h, u in curve.points)
        assert curve.unique[-1] == len(set(values))


class TestPrefix:
    def test_examples(self):
        s = stream_of("A", "B", "C")
        assert prefix(s, 3) == s
        assert len(prefix(s, 0)) == 0
        assert prefix(s, 2).answers == ("a", "b")

    def test_out_of_range(self):
        with pytest.raises(StreamError):
            prefix(stream_of("A"), 2)

    def test_lengths(self):
        assert prefix_lengths(200, 50) == [50, 100, 150, 200]
        assert prefix_lengths(210, 50) == [50, 100, 150, 200, 210]
        assert prefix_lengths(30, 50) == [30]
