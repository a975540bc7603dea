import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from aegan_omics.errors import DataError
from aegan_omics.rng import RngHandle, standard_normal, uniform_split


def test_same_seed_same_stream():
    a = RngHandle(7).uniform(0, 1, 5)
    b = RngHandle(7).uniform(0, 1, 5)
    np.testing.assert_array_equal(a, b)


def test_different_seeds_differ():
    assert not np.array_equal(RngHandle(1).uniform(0, 1, 5), RngHandle(2).uniform(0, 1, 5))


def test_child_does_not_consume_parent():
    parent = RngHandle(5)
    parent.child("x").uniform(0, 1, 100)
    np.testing.assert_array_equal(parent.uniform(0, 1, 3), RngHandle(5).uniform(0, 1, 3))


def test_children_are_named_streams():
    root = RngHandle(5)
    np.testing.assert_array_equal(root.child("a").permutation(20), RngHandle(5).child("a").permutation(20))
    assert not np.array_equal(root.child("a").permutation(20), root.child("b").permutation(20))


def test_seed_range():
    with pytest.raises(ValueError):
        RngHandle(-1)


def test_standard_normal_shape(rng):
    assert standard_normal(rng, 3, 4).shape == (3, 4)


def test_split_sizes_hand_case():
    train, test = uniform_split(RngHandle(0), 10, 0.8)
    assert len(train) == 8 and len(test) == 2


def test_split_needs_two_items():
    with pytest.raises(DataError):
        uniform_split(RngHandle(0), 1, 0.5)


def test_split_fraction_bounds():
    with pytest.raises(ValueError):
        uniform_split(RngHandle(0), 10, 1.0)


@given(st.integers(2, 500), st.floats(0.01, 0.99), st.integers(0, 2**32))
def test_split_is_partition(n, fraction, seed):
    a, b = uniform_split(RngHandle(seed), n, fraction)
    assert len(a) >= 1 and len(b) >= 1
    assert not set(a) & set(b)
    assert sorted(np.concatenate([a, b]).tolist()) == list(range(n))
    expected = min(max(int(np.floor(fraction * n + 0.5)), 1), n - 1)
    assert len(a) == expected
