import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from seqfix import BoundedSeq

finite = st.floats(min_value=-100, max_value=100, allow_nan=False, allow_infinity=False)
seqs = st.builds(BoundedSeq, st.lists(finite, max_size=6).map(tuple), finite)


def test_constant_reads_same_everywhere():
    s = BoundedSeq.constant(3.0)
    assert s.prefix == ()
    for n in (0, 1, 5, 100):
        assert s.at(n) == 3.0


def test_at_prefix_and_tail():
    s = BoundedSeq((1.0, 2.0), 0.0)
    assert s.at(1) == 2.0
    assert s.at(10) == 0.0
    with pytest.raises(ValueError):
        s.at(-1)


def test_construction_trims_trailing_tail_entries():
    assert BoundedSeq((1.0, 0.0, 0.0), 0.0).prefix == (1.0,)
    assert BoundedSeq((0.0,), 0.0).prefix == ()
    s = BoundedSeq((1.0, 0.0, 0.0), 0.0)
    # already-canonical input is untouched
    assert BoundedSeq(s.prefix, s.tail) == s


def test_equality_is_pointwise():
    assert BoundedSeq.constant(2.0) == BoundedSeq((2.0, 2.0), 2.0)
    assert BoundedSeq((1.0,), 0.0) != BoundedSeq.constant(0.0)


def test_prepend_shifts_right():
    assert BoundedSeq.constant(0.0).prepend(1.0) == BoundedSeq((1.0,), 0.0)
    # prepending the tail value collapses back to the constant sequence
    assert BoundedSeq((), 5.0).prepend(5.0) == BoundedSeq.constant(5.0)


def test_prepend_stack_order():
    s = BoundedSeq((7.0,), 0.0)
    for v in (1.0, 2.0, 3.0):
        s = s.prepend(v)
    assert s.prefix == (3.0, 2.0, 1.0, 7.0)
    assert s.tail == 0.0


def test_rejects_non_finite():
    for bad in (math.nan, math.inf, -math.inf):
        with pytest.raises(ValueError):
            BoundedSeq.constant(bad)
        with pytest.raises(ValueError):
            BoundedSeq((bad,), 0.0)
        with pytest.raises(ValueError):
            BoundedSeq.constant(0.0).prepend(bad)


def test_values_head_and_map_values():
    s = BoundedSeq((1.0, 2.0), 0.5)
    assert s.values() == (1.0, 2.0, 0.5)
    assert s.head(3) == (1.0, 2.0, 0.5)
    assert s.map_values(lambda v: v / 2) == BoundedSeq((0.5, 1.0), 0.25)


@given(seqs, finite)
def test_prepend_then_at(s, v):
    t = s.prepend(v)
    assert t.at(0) == v
    for n in range(len(s.prefix) + 3):
        assert t.at(n + 1) == s.at(n)


@given(st.lists(finite, max_size=6), finite)
def test_canonical_form_preserves_pointwise_values(prefix, tail):
    s = BoundedSeq(tuple(prefix), tail)
    for n in range(len(prefix) + 3):
        expected = prefix[n] if n < len(prefix) else tail
        assert s.at(n) == expected
