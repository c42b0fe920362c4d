import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ifaudit import ValidationError
from ifaudit.harness import binary_axes
from ifaudit.lattice import (
    WILDCARD,
    SensitiveAxis,
    enumerate_groups,
    format_key,
    group_members,
    matches,
    parse_key,
)

P = WILDCARD


@st.composite
def axes_strategy(draw, max_axes=4, max_attrs=4):
    sizes = draw(st.lists(st.integers(2, max_attrs), min_size=1, max_size=max_axes))
    return tuple(SensitiveAxis(f"ax{j}", tuple(f"v{i}" for i in range(n))) for j, n in enumerate(sizes))


def test_single_binary_axis():
    lat = enumerate_groups(binary_axes("g"))
    assert lat.groups == ((0,), (1,))
    assert lat.concrete_mask == (True, True)


def test_two_binary_axes_order():
    lat = enumerate_groups(binary_axes("a", "b"))
    assert lat.groups == ((0, 0), (0, 1), (0, P), (1, 0), (1, 1), (1, P), (P, 0), (P, 1))
    assert sum(lat.concrete_mask) == 4


def test_four_binary_axes():
    lat = enumerate_groups(binary_axes("a", "b", "c", "d"))
    assert len(lat) == 80
    assert len(lat.concrete_groups) == 16


@given(axes_strategy())
def test_count_formula(axes):
    lat = enumerate_groups(axes)
    assert len(lat) == int(np.prod([len(a) + 1 for a in axes])) - 1
    assert len(lat.concrete_groups) == int(np.prod([len(a) for a in axes]))
    assert len(set(lat.groups)) == len(lat)
    assert (P,) * len(axes) not in lat.groups


@given(axes_strategy())
def test_membership_matches_predicate(axes):
    lat = enumerate_groups(axes)
    cells = list(itertools.product(*(range(len(a)) for a in axes)))
    expected = np.array([[matches(c, k) for c in cells] for k in lat.groups], dtype=np.int64)
    assert np.array_equal(lat.membership, expected)
    # concrete rows are unit vectors
    assert (lat.membership[np.array(lat.concrete_mask)].sum(axis=1) == 1).all()


@pytest.mark.parametrize(
    "axes, message",
    [
        ((), "at least one"),
        ((SensitiveAxis("a", ("0", "1")), SensitiveAxis("a", ("x", "y"))), "duplicate"),
    ],
)
def test_enumerate_errors(axes, message):
    with pytest.raises(ValidationError, match=message):
        enumerate_groups(axes)


@pytest.mark.parametrize(
    "name, attrs",
    [
        ("a", ("only",)),
        ("a", ("x", "x")),
        ("", ("x", "y")),
        ("a", ("x", "+")),
        ("a|b", ("x", "y")),
        ("a", ("x=1", "y")),
    ],
)
def test_axis_validation(name, attrs):
    with pytest.raises(ValidationError):
        SensitiveAxis(name, attrs)


def test_matches_examples():
    assert matches((0, 1), (0, 1))
    assert matches((0, 1), (0, P))
    assert not matches((0, 1), (1, P))
    with pytest.raises(ValueError):
        matches((0, 1), (0,))


def test_group_members_examples():
    rows = [(0, 0), (0, 1), (1, 1)]
    assert group_members(rows, (0, P)) == [0, 1]
    assert group_members(rows, (P, 1)) == [1, 2]
    assert len(group_members(rows, (0, P))) == len(group_members(rows, (0, 0))) + len(group_members(rows, (0, 1)))


@given(axes_strategy(max_axes=3, max_attrs=3), st.data())
def test_union_identity(axes, data):
    lat = enumerate_groups(axes)
    n = data.draw(st.integers(0, 30))
    rows = [tuple(data.draw(st.integers(0, len(a) - 1)) for a in axes) for _ in range(n)]
    for key in lat.groups:
        covered = [c for c in lat.concrete_groups if all(k == P or k == v for k, v in zip(key, c))]
        assert len(group_members(rows, key)) == sum(len(group_members(rows, c)) for c in covered)


def test_codec_examples():
    axes = binary_axes("gender", "race", "age")
    assert format_key((1, P, 0), axes) == "gender=1|race=+|age=0"
    assert parse_key("gender=1|race=+|age=0", axes) == (1, P, 0)


@pytest.mark.parametrize(
    "text",
    [
        "gender=2|race=+|age=0",
        "gender=+|race=+|age=+",
        "gender=1|race=+",
        "race=1|gender=+|age=0",
        "gender1|race=+|age=0",
        "sex=1|race=+|age=0",
    ],
)
def test_codec_rejects(text):
    with pytest.raises(ValidationError):
        parse_key(text, binary_axes("gender", "race", "age"))


@given(axes_strategy())
def test_codec_round_trip(axes):
    lat = enumerate_groups(axes)
    for key in lat.groups:
        assert lat.parse_key(lat.format_key(key)) == key


def test_format_key_validates():
    with pytest.raises(ValidationError):
        format_key((2, 0), binary_axes("a", "b"))
    with pytest.raises(ValidationError):
        format_key((0,), binary_axes("a", "b"))


def test_concrete_index_and_prefix():
    axes = (SensitiveAxis("a", ("x", "y", "z")), SensitiveAxis("b", ("p", "q")))
    lat = enumerate_groups(axes)
    idx = lat.concrete_index(np.array([[0, 0], [2, 1], [1, 0]]))
    assert idx.tolist() == [0, 5, 2]
    assert lat.prefix(1).groups == ((0,), (1,), (2,))
    with pytest.raises(ValidationError):
        lat.concrete_index(np.array([[3, 0]]))
    with pytest.raises(ValidationError):
        lat.index_of((P, P))
