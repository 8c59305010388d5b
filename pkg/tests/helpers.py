"""Shared fixture builders and independent oracles for the test suite."""

from __future__ import annotations

from typing import Iterator

from beq.core import Presentation, PresentationBuilder, Snapshot


def static_presentation(classes: list[list[int]], horizon: int = 0) -> Presentation:
    """All classes laid out at stage 0 and frozen."""
    b = PresentationBuilder(horizon)
    for cls in classes:
        b.new(0, cls[0])
        for e in cls[1:]:
            b.join(0, e, cls[0])
    return b.build()


def sized_presentation(sizes: list[int], horizon: int = 0) -> Presentation:
    """Static presentation with the given class sizes on consecutive ids."""
    classes = []
    next_id = 0
    for size in sizes:
        classes.append(list(range(next_id, next_id + size)))
        next_id += size
    return static_presentation(classes, horizon)


def growth_presentation(
    specs: list[list[tuple[int, int]]], horizon: int
) -> Presentation:
    """Classes from growth schedules: specs[k] = [(stage, how_many), ...].

    Class k starts at the first listed stage with its first element and
    gains the listed counts at the listed stages, on ids 1000*k + i.
    """
    pending: list[tuple[int, int, int]] = []  # (stage, class, count)
    for k, spec in enumerate(specs):
        for stage, count in spec:
            pending.append((stage, k, count))
    pending.sort()
    b = PresentationBuilder(horizon)
    next_member = {}
    for stage, k, count in pending:
        for _ in range(count):
            elem = 1000 * k + next_member.get(k, 0)
            if k in next_member:
                b.join(stage, elem, 1000 * k)
            else:
                b.new(stage, elem)
            next_member[k] = next_member.get(k, 0) + 1
    return b.build()


def all_partitions(elems: list[int]) -> Iterator[list[list[int]]]:
    """Every set partition of elems (Bell-number many)."""
    if not elems:
        yield []
        return
    first, rest = elems[0], elems[1:]
    for part in all_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1 :]
        yield [[first]] + part


def pairwise_bicongruent(source: Snapshot, target: Snapshot, pairs: dict[int, int]) -> bool:
    """Literal pairwise definition of a partial embedding, used as an oracle
    for the class-wise check."""
    keys = sorted(pairs)
    if len(set(pairs.values())) != len(pairs):
        return False
    for i, x in enumerate(keys):
        for y in keys[i + 1 :]:
            if source.equivalent(x, y) != target.equivalent(pairs[x], pairs[y]):
                return False
    return True
