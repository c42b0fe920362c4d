"""Intersectional group lattice over several categorical sensitive axes.

A group key is a tuple with one entry per axis: an attribute index into that
axis, or the wildcard ``"+"`` standing for the union of every attribute of the
axis. Keys with no wildcard are *concrete* and partition the population; keys
with at least one wildcard are *abstract* unions of concrete groups.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence, Union

import numpy as np

from ifaudit.errors import ValidationError

WILDCARD = "+"
KEY_SEPARATOR = "|"
VALUE_SEPARATOR = "="

GroupKey = tuple[Union[int, str], ...]

_RESERVED = (WILDCARD, KEY_SEPARATOR, VALUE_SEPARATOR)


@dataclass(frozen=True)
class SensitiveAxis:
    """One demographic dimension and its ordered attribute labels.

    Label order is declaration order; attribute index ``i`` always refers to
    ``attributes[i]`` regardless of the order rows appear in the data.
    """

    name: str
    attributes: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "attributes", tuple(str(a) for a in self.attributes))
        _check_token(self.name, "axis name")
        if len(self.attributes) < 2:
            raise ValidationError(
                f"axis {self.name!r} needs at least 2 attributes, got {len(self.attributes)}"
            )
        for label in self.attributes:
            _check_token(label, f"attribute label of axis {self.name!r}")
        if len(set(self.attributes)) != len(self.attributes):
            raise ValidationError(f"axis {self.name!r} has duplicate attribute labels")

    def __len__(self) -> int:
        return len(self.attributes)

    def index(self, label: str) -> int:
        try:
            return self.attributes.index(label)
        except ValueError:
            raise ValidationError(
                f"unknown attribute {label!r} for axis {self.name!r}"
            ) from None


def _check_token(token: str, what: str) -> None:
    if not isinstance(token, str) or not token:
        raise ValidationError(f"{what} must be a non-empty string")
    if token == WILDCARD:
        raise ValidationError(f"{what} may not be the reserved wildcard {WILDCARD!r}")
    for ch in (KEY_SEPARATOR, VALUE_SEPARATOR):
        if ch in token:
            raise ValidationError(f"{what} {token!r} contains reserved character {ch!r}")


def group_sort_key(key: GroupKey, axes: Sequence[SensitiveAxis]) -> tuple[int, ...]:
    """Lexicographic order with the wildcard after every attribute index."""
    return tuple(len(ax) if v == WILDCARD else v for v, ax in zip(key, axes))


@dataclass(frozen=True)
class GroupLattice:
    """Every non-trivial intersectional group over ``axes``, in lattice order.

    Construct with :func:`enumerate_groups`. Instances are immutable.
    """

    axes: tuple[SensitiveAxis, ...]
    groups: tuple[GroupKey, ...]
    concrete_mask: tuple[bool, ...]
    _index: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {k: i for i, k in enumerate(self.groups)})

    def __len__(self) -> int:
        return len(self.groups)

    @property
    def p(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(ax) for ax in self.axes)

    @property
    def concrete_groups(self) -> tuple[GroupKey, ...]:
        return tuple(k for k, c in zip(self.groups, self.concrete_mask) if c)

    def index_of(self, key: GroupKey) -> int:
        try:
            return self._index[tuple(key)]
        except KeyError:
            raise ValidationError(f"{key!r} is not a group of this lattice") from None

    def format_key(self, key: GroupKey) -> str:
        return format_key(key, self.axes)

    def parse_key(self, text: str) -> GroupKey:
        return parse_key(text, self.axes)

    def prefix(self, k: int) -> "GroupLattice":
        """Lattice over the first ``k`` axes."""
        return enumerate_groups(self.axes[:k])

    @cached_property
    def key_array(self) -> np.ndarray:
        """(|G|, p) integer array with -1 marking wildcard entries."""
        return np.array(
            [[-1 if v == WILDCARD else v for v in key] for key in self.groups],
            dtype=np.int64,
        ).reshape(len(self.groups), self.p)

    @cached_property
    def membership(self) -> np.ndarray:
        """(|G|, C) 0/1 matrix: group row covers concrete column.

        Concrete columns are in row-major (``np.ravel_multi_index``) order.
        """
        concrete = np.array(list(itertools.product(*(range(n) for n in self.shape))))
        keys = self.key_array[:, None, :]
        hit = (keys == -1) | (keys == concrete[None, :, :])
        return hit.all(axis=2).astype(np.int64)

    def concrete_index(self, assignments: np.ndarray) -> np.ndarray:
        """Row-major concrete cell of every assignment row."""
        assignments = validate_assignments(assignments, self.axes)
        return np.ravel_multi_index(assignments.T, self.shape)


def enumerate_groups(axes: Iterable[SensitiveAxis]) -> GroupLattice:
    """Build the lattice of all keys except the all-wildcard one.

    Yields ``prod(|A_j| + 1) - 1`` groups, ``prod(|A_j|)`` of them concrete.
    """
    axes = tuple(axes)
    if not axes:
        raise ValidationError("at least one sensitive axis is required")
    for ax in axes:
        if not isinstance(ax, SensitiveAxis):
            raise ValidationError(f"expected SensitiveAxis, got {type(ax).__name__}")
    names = [ax.name for ax in axes]
    if len(set(names)) != len(names):
        raise ValidationError(f"duplicate axis names in {names}")

    # itertools.product is lexicographic in its inputs, and the wildcard is
    # placed last per axis, so the output is already in lattice order.
    choices = [list(range(len(ax))) + [WILDCARD] for ax in axes]
    groups = tuple(k for k in itertools.product(*choices) if any(v != WILDCARD for v in k))
    mask = tuple(all(v != WILDCARD for v in k) for k in groups)
    return GroupLattice(axes=axes, groups=groups, concrete_mask=mask)


def validate_key(key: GroupKey, axes: Sequence[SensitiveAxis]) -> GroupKey:
    key = tuple(key)
    if len(key) != len(axes):
        raise ValidationError(f"key {key!r} has length {len(key)}, expected {len(axes)}")
    for v, ax in zip(key, axes):
        if v == WILDCARD:
            continue
        if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or not 0 <= v < len(ax):
            raise ValidationError(f"invalid entry {v!r} for axis {ax.name!r} in key {key!r}")
    return tuple(v if v == WILDCARD else int(v) for v in key)


def validate_assignments(assignments, axes: Sequence[SensitiveAxis]) -> np.ndarray:
    arr = np.asarray(assignments)
    if arr.ndim != 2 or arr.shape[1] != len(axes):
        raise ValidationError(
            f"assignments must have shape (n, {len(axes)}), got {arr.shape}"
        )
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        raise ValidationError("assignments must be integer attribute indices")
    arr = arr.astype(np.int64, copy=False)
    for j, ax in enumerate(axes):
        col = arr[:, j]
        bad = np.flatnonzero((col < 0) | (col >= len(ax)))
        if bad.size:
            raise ValidationError(
                f"row {bad[0]}: attribute index {col[bad[0]]} out of range for axis {ax.name!r}"
            )
    return arr


def matches(assignment: Sequence[int], key: GroupKey) -> bool:
    """True iff every key entry is the wildcard or equals the assignment."""
    if len(assignment) != len(key):
        raise ValueError(
            f"assignment length {len(assignment)} does not match key length {len(key)}"
        )
    return all(k == WILDCARD or k == a for a, k in zip(assignment, key))


def group_members(assignments: Iterable[Sequence[int]], key: GroupKey) -> list[int]:
    """Indices of the examples belonging to ``key``, in input order."""
    return [i for i, a in enumerate(assignments) if matches(tuple(a), key)]


def format_key(key: GroupKey, axes: Sequence[SensitiveAxis]) -> str:
    """Canonical text form, e.g. ``gender=1|race=+|age=0``."""
    key = validate_key(key, axes)
    return KEY_SEPARATOR.join(
        f"{ax.name}{VALUE_SEPARATOR}{WILDCARD if v == WILDCARD else ax.attributes[v]}"
        for v, ax in zip(key, axes)
    )


def parse_key(text: str, axes: Sequence[SensitiveAxis]) -> GroupKey:
    """Inverse of :func:`format_key`; axes must appear in declared order."""
    parts = text.split(KEY_SEPARATOR)
    if len(parts) != len(axes):
        raise ValidationError(
            f"group key {text!r} has {len(parts)} components, expected {len(axes)}"
        )
    key = []
    for part, ax in zip(parts, axes):
        name, sep, label = part.partition(VALUE_SEPARATOR)
        if not sep:
            raise ValidationError(f"malformed group key component {part!r}")
        if name != ax.name:
            raise ValidationError(
                f"unknown or misplaced axis {name!r} in group key (expected {ax.name!r})"
            )
        key.append(WILDCARD if label == WILDCARD else ax.index(label))
    if all(v == WILDCARD for v in key):
        raise ValidationError("the all-wildcard group is not part of the lattice")
    return tuple(key)
