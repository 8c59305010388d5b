"""Reduction gadgets and the categoricity-degree classifier.

Each reduction turns declarative inputs of known limit behavior (entry
schedules or stage predicates) into a Presentation whose horizon character
witnesses the encoded fact: a class of the right size appears, a single
class grows forever, the character becomes unbounded, or infinitely many
classes keep growing.  The classifier and the bounded-case bi-embeddability
test read character profiles, so the gadget outputs can be checked against
their predicted classifications.
"""

from __future__ import annotations

import enum
from typing import Callable, Mapping

from .core import (
    INFINITE,
    CharacterProfile,
    FixtureError,
    Presentation,
    PresentationBuilder,
    direct_sum,
)
from .pairing import pair, quad, triple


class Degree(enum.Enum):
    ZERO = "ZERO"
    JUMP = "JUMP"
    DOUBLE_JUMP = "DOUBLE_JUMP"


def classify_becat(profile: CharacterProfile) -> Degree:
    """Three-way classification by character and infinite-class count."""
    if not profile.finitely_many_infinite():
        return Degree.DOUBLE_JUMP
    if profile.bounded():
        return Degree.ZERO
    return Degree.JUMP


def biemb_test_cbec(pa: CharacterProfile, pb: CharacterProfile) -> bool:
    """Bi-embeddability of profiles in the bounded, finitely-infinite case.

    Requires the same infinite-class count and the same bound.  When some
    size n occurs infinitely often on the first profile (take the largest
    such), the multiplicities must agree at every size at or above n;
    smaller classes are absorbed.  When no size repeats infinitely often the
    structure is finite up to its infinite classes and bi-embeddability
    collapses to isomorphism, so all multiplicities must agree.
    """
    if not pa.bounded() or not pa.finitely_many_infinite():
        raise FixtureError("first profile is outside the bounded case")
    if pa.infinite_classes != pb.infinite_classes:
        return False
    if pa.bound != pb.bound:
        return False
    repeated = [m for m, c in pa.multiplicities.items() if c == INFINITE]
    lo = max(repeated) if repeated else 1
    top = max(
        [pa.cutoff, pb.cutoff]
        + [m for m in pa.multiplicities] + [m for m in pb.multiplicities]
    )
    return all(pa.multiplicity(m) == pb.multiplicity(m) for m in range(lo, top + 1))


EnterSchedule = Mapping[int, int]
"""Entry stages of an enumerable set: x -> the stage x shows up (absent =
never).  Where a gadget notes it, the standard normalization x < stage is
enforced."""


def _check_entries(entries: EnterSchedule) -> None:
    for x, s in entries.items():
        if x >= s:
            raise FixtureError(f"entry x={x} at stage {s} violates x < stage")


def reduce_d01(
    e_enters: int | None,
    i_enters: int | None,
    n: int,
    base: Presentation,
    horizon: int,
) -> Presentation:
    """Difference-of-enumerable gadget for the finite case.

    On top of a base missing one size-n class, the first entry event adds a
    size-n class on even ids and the second a size-(n+1) class on odd ids.
    The horizon profile matches the full structure exactly when the first
    fires and the second does not.
    """
    b = PresentationBuilder(horizon)
    for fires, size, shift in ((e_enters, n, 0), (i_enters, n + 1, 1)):
        if fires is None or fires + 1 > horizon:
            continue
        s = fires
        elems = [2 * (s + j) + shift for j in range(1, size + 1)]
        b.new(s + 1, elems[0])
        for e in elems[1:]:
            b.join(s + 1, e, elems[0])
    return direct_sum(base, b.build())


def reduce_pi02(
    entries: EnterSchedule, n: int, base: Presentation, horizon: int
) -> Presentation:
    """One fresh size-n class per entry event, on top of the big-class base."""
    _check_entries(entries)
    b = PresentationBuilder(horizon)
    for x in sorted(entries, key=lambda x: (entries[x], x)):
        s = entries[x]
        if s + 1 > horizon:
            continue
        elems = [pair(x, s + j) for j in range(n)]
        b.new(s + 1, elems[0])
        for e in elems[1:]:
            b.join(s + 1, e, elems[0])
    return direct_sum(base, b.build())


def reduce_pi02_inf(
    entries: EnterSchedule, base: Presentation, horizon: int
) -> Presentation:
    """A single class gaining one element per entry event; it grows without
    bound exactly when the entries keep coming."""
    b = PresentationBuilder(horizon)
    anchor = None
    for x in sorted(entries, key=lambda x: (entries[x], x)):
        s = entries[x]
        if s + 1 > horizon:
            continue
        elem = pair(x, s + 1)
        if anchor is None:
            b.new(s + 1, elem)
            anchor = elem
        else:
            b.join(s + 1, elem, anchor)
    return direct_sum(base, b.build())


def reduce_d03(
    r_pred: Callable[[int, int], bool],
    t_pred: Callable[[int, int], bool],
    k: int,
    horizon: int,
) -> Presentation:
    """Two-sided gadget: even columns carry one class per finite size grown
    by the first predicate, odd columns carry k parallel classes per index
    grown by the second.

    Stage 0 lays out the size ladder; even stages 2j extend class 2x by the
    first predicate at (x, j) for x < j, odd stages 2j+1 extend the k
    classes over column 2x+1 by the second at (x, j).
    """
    b = PresentationBuilder(horizon)
    ladder = horizon // 2
    for x in range(ladder + 1):
        anchor = triple(2 * x, 0, 0)
        b.new(0, anchor)
        for i in range(1, x + 1):
            b.join(0, triple(2 * x, 0, i), anchor)
    odd_anchor: dict[tuple[int, int], int] = {}
    for stage in range(1, horizon + 1):
        if stage % 2 == 0:
            j = stage // 2
            for x in range(min(j, ladder + 1)):
                if r_pred(x, j):
                    elem = triple(2 * x, 0, j)
                    if elem not in b:
                        b.join(stage, elem, triple(2 * x, 0, 0))
        else:
            j = (stage - 1) // 2
            for x in range(j):
                if t_pred(x, j):
                    for i in range(k):
                        anchor = odd_anchor.get((x, i))
                        elem = triple(2 * x + 1, i, j)
                        if anchor is None:
                            b.new(stage, elem)
                            odd_anchor[(x, i)] = elem
                        elif elem not in b:
                            b.join(stage, elem, anchor)
    return b.build()


def reduce_sigma02(entries: EnterSchedule, horizon: int) -> Presentation:
    """One class of size x+1 per entry event x: the character stays bounded
    exactly when finitely many bounded x ever enter."""
    _check_entries(entries)
    b = PresentationBuilder(horizon)
    for x in sorted(entries, key=lambda x: (entries[x], x)):
        s = entries[x]
        if s + 1 > horizon:
            continue
        elems = [pair(x, s + i) for i in range(x + 1)]
        b.new(s + 1, elems[0])
        for e in elems[1:]:
            b.join(s + 1, e, elems[0])
    return b.build()


def reduce_pi04(
    s_pred: Callable[[int, int, int, int], bool], horizon: int
) -> Presentation:
    """Anchor classes ⟨x,y,0,0⟩ collecting every predicate hit ⟨x,y,u,v⟩.

    Coordinates are swept up to the stage number, so the class over (x, y)
    grows without bound within the horizon exactly when hits keep coming at
    larger (u, v).  The stage-s size of an anchor class is 1 plus the number
    of nonzero hits with u, v <= s.
    """
    b = PresentationBuilder(horizon)
    b.new(0, quad(0, 0, 0, 0))
    for t in range(1, horizon + 1):
        shell = [(t, v) for v in range(t + 1)] + [(u, t) for u in range(t)]
        for x, y in shell:
            b.new(t, quad(x, y, 0, 0))
        for x in range(t + 1):
            for y in range(t + 1):
                anchor = quad(x, y, 0, 0)
                uv_pairs = (
                    ((u, v) for u in range(t + 1) for v in range(t + 1))
                    if max(x, y) == t
                    else iter(shell)
                )
                for u, v in uv_pairs:
                    if (u, v) != (0, 0) and s_pred(x, y, u, v):
                        b.join(t, quad(x, y, u, v), anchor)
    return b.build()


def reduce_sigma04(
    s_pred: Callable[[int, int, int, int], bool],
    unbounded_base: Presentation,
    horizon: int,
) -> Presentation:
    """The previous gadget summed with an unbounded structure, flipping the
    classification between the jump and double-jump rows."""
    return direct_sum(reduce_pi04(s_pred, horizon), unbounded_base)
