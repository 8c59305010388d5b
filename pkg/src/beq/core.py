"""Finite equivalence structures presented stage by stage.

A Snapshot is a partition of a finite set of element ids.  A Presentation is
an event trace (element enters as a singleton, or enters directly into an
existing class) replayed up to a stage horizon.  Classes only ever grow:
events never remove elements and never merge classes, so class identity is
stable and every census is monotone in the stage.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

INFINITE = math.inf
UNBOUNDED = math.inf


class ParseError(Exception):
    """A text artifact (trace, snapshot, family, map, ...) failed to parse."""


class FixtureError(Exception):
    """An input violates a documented precondition."""


class InvariantError(Exception):
    """A constructed value violates a structural invariant."""


@dataclass(frozen=True)
class Event:
    """One trace step: `joins is None` creates a singleton class, otherwise
    `elem` enters the existing class whose id was `joins` at event time."""

    stage: int
    elem: int
    joins: int | None = None


class Snapshot:
    """An immutable partition.  The id of a class is its least member."""

    __slots__ = ("classes", "_elem_class")

    def __init__(self, classes: Iterable[Iterable[int]]):
        normalized = sorted(tuple(sorted(c)) for c in classes)
        elem_class: dict[int, tuple[int, ...]] = {}
        for cls in normalized:
            if not cls:
                raise InvariantError("empty class in snapshot")
            for e in cls:
                if e in elem_class:
                    raise InvariantError(f"element {e} occurs in two classes")
                elem_class[e] = cls
        object.__setattr__(self, "classes", tuple(normalized))
        object.__setattr__(self, "_elem_class", elem_class)

    @property
    def universe(self) -> frozenset[int]:
        return frozenset(self._elem_class)

    def __contains__(self, elem: int) -> bool:
        return elem in self._elem_class

    def __len__(self) -> int:
        return len(self._elem_class)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Snapshot) and self.classes == other.classes

    def __hash__(self) -> int:
        return hash(self.classes)

    def __repr__(self) -> str:
        return f"Snapshot({list(self.classes)!r})"

    def class_of(self, elem: int) -> tuple[int, ...]:
        try:
            return self._elem_class[elem]
        except KeyError:
            raise ValueError(f"element {elem} not in snapshot") from None

    def class_id(self, elem: int) -> int:
        return self.class_of(elem)[0]

    def size(self, elem: int) -> int:
        return len(self.class_of(elem))

    def equivalent(self, x: int, y: int) -> bool:
        return self.class_of(x) is self.class_of(y) or self.class_of(x) == self.class_of(y)

    def class_ids(self) -> list[int]:
        return [c[0] for c in self.classes]


EMPTY_SNAPSHOT = Snapshot(())


def census(snap: Snapshot) -> Counter:
    """Multiset of class sizes; the counts sum to the universe size."""
    return Counter(len(c) for c in snap.classes)


def format_census(c: Mapping[int, int]) -> str:
    sizes: list[str] = []
    for size in sorted(c):
        sizes.extend([str(size)] * c[size])
    return "{" + ",".join(sizes) + "}"


def canonical_transversal(snap: Snapshot) -> list[int]:
    """The least element of every class, ascending."""
    return [c[0] for c in snap.classes]


def restrict_above(snap: Snapshot, l: int) -> Snapshot:
    """The sub-partition made of the classes of size > l."""
    return Snapshot(c for c in snap.classes if len(c) > l)


class Presentation:
    """A monotone stage-indexed family of snapshots, stored as its trace.

    Construction validates the trace: stages are nondecreasing and within
    [0, horizon], a singleton event introduces a fresh element, and a join
    event introduces a fresh element into a class that already exists.  That
    validation is exactly what makes every replayed prefix monotone
    (universe grows, equivalent elements stay equivalent, inequivalent
    elements stay inequivalent).
    """

    __slots__ = ("horizon", "events", "_entry", "_root", "_members", "_member_stages")

    def __init__(self, horizon: int, events: Sequence[Event] = ()):
        if horizon < 0:
            raise InvariantError("horizon must be nonnegative")
        events = tuple(events)
        # entry stage and lineage root per element; members per root in entry order
        entry: dict[int, int] = {}
        root: dict[int, int] = {}
        members: dict[int, list[int]] = {}
        member_stages: dict[int, list[int]] = {}
        current_id: dict[int, int] = {}
        id_to_root: dict[int, int] = {}
        last_stage = 0
        for ev in events:
            if ev.stage < last_stage:
                raise InvariantError(f"trace stages not monotone at {ev}")
            if not 0 <= ev.stage <= horizon:
                raise InvariantError(f"event stage {ev.stage} outside [0, {horizon}]")
            last_stage = ev.stage
            if ev.elem in entry:
                raise InvariantError(f"element {ev.elem} introduced twice")
            entry[ev.elem] = ev.stage
            if ev.joins is None:
                root[ev.elem] = ev.elem
                members[ev.elem] = [ev.elem]
                member_stages[ev.elem] = [ev.stage]
                current_id[ev.elem] = ev.elem
                id_to_root[ev.elem] = ev.elem
            else:
                target_root = id_to_root.get(ev.joins)
                if target_root is None:
                    raise InvariantError(
                        f"join target {ev.joins} is not a class id at stage {ev.stage}"
                    )
                root[ev.elem] = target_root
                members[target_root].append(ev.elem)
                member_stages[target_root].append(ev.stage)
                if ev.elem < current_id[target_root]:
                    del id_to_root[current_id[target_root]]
                    current_id[target_root] = ev.elem
                    id_to_root[ev.elem] = target_root
        self.horizon = horizon
        self.events = events
        self._entry = entry
        self._root = root
        self._members = members  # root -> elems in entry order
        self._member_stages = member_stages  # root -> entry stages (sorted)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Presentation)
            and self.horizon == other.horizon
            and self.events == other.events
        )

    def __repr__(self) -> str:
        return f"Presentation(horizon={self.horizon}, events={len(self.events)})"

    @property
    def universe(self) -> frozenset[int]:
        return frozenset(self._entry)

    def entry_stage(self, elem: int) -> int:
        try:
            return self._entry[elem]
        except KeyError:
            raise ValueError(f"element {elem} never enters the presentation") from None

    def root_of(self, elem: int) -> int:
        """Lineage root (the element whose singleton event created the class)."""
        return self._root[self._require(elem)]

    def _require(self, elem: int) -> int:
        if elem not in self._entry:
            raise ValueError(f"element {elem} never enters the presentation")
        return elem

    def growth_stages(self, elem: int) -> list[int]:
        """Stages at which the class containing elem gained an element."""
        return self._member_stages[self.root_of(elem)]

    def class_size_at(self, elem: int, s: int) -> int:
        return bisect_right(self.growth_stages(elem), s)

    def class_members_at(self, elem: int, s: int) -> list[int]:
        root = self.root_of(elem)
        return self._members[root][: bisect_right(self._member_stages[root], s)]

    def snapshot_at(self, s: int) -> Snapshot:
        classes = []
        for root, stages in self._member_stages.items():
            k = bisect_right(stages, s)
            if k:
                classes.append(self._members[root][:k])
        return Snapshot(classes)

    def final(self) -> Snapshot:
        return self.snapshot_at(self.horizon)

    def census_at(self, s: int) -> Counter:
        out: Counter = Counter()
        for stages in self._member_stages.values():
            k = bisect_right(stages, s)
            if k:
                out[k] += 1
        return out

    def present_at(self, elem: int, s: int) -> bool:
        return elem in self._entry and self._entry[elem] <= s

    def elements_in_order(self) -> list[int]:
        """Elements in trace order (the enumeration the embeddings recurse on)."""
        return [ev.elem for ev in self.events]

    def class_roots(self) -> list[int]:
        """Lineage roots of all classes ever created, in creation order."""
        return list(self._member_stages)


def size_at_least(pres: Presentation, a: int, k: int, s: int) -> bool:
    """Whether the class of a has at least k members at stage s.

    Monotone in s: classes never shrink, so once true it stays true.
    """
    if not pres.present_at(a, s):
        raise ValueError(f"element {a} not in the universe at stage {s}")
    return pres.class_size_at(a, s) >= k


def inf_guess(pres: Presentation, a: int, s: int) -> bool:
    """Stage guess that the class of a grows forever.

    True iff the class gained an element in the window (s // 2, s].  A class
    that grows infinitely often is guessed true for infinitely many s; a
    class that stops growing is guessed false for every s past twice its
    last growth stage.
    """
    if not pres.present_at(a, s):
        raise ValueError(f"element {a} not in the universe at stage {s}")
    stages = pres.growth_stages(a)
    lo = s // 2
    i = bisect_right(stages, lo)
    return i < len(stages) and stages[i] <= s


def direct_sum(p: Presentation, q: Presentation) -> Presentation:
    """Disjoint union: p relabeled onto evens, q onto odds, stages aligned."""

    def relabel(ev: Event, shift: int) -> Event:
        joins = None if ev.joins is None else 2 * ev.joins + shift
        return Event(ev.stage, 2 * ev.elem + shift, joins)

    merged: list[Event] = []
    pi = qi = 0
    while pi < len(p.events) or qi < len(q.events):
        take_p = pi < len(p.events) and (
            qi >= len(q.events) or p.events[pi].stage <= q.events[qi].stage
        )
        if take_p:
            merged.append(relabel(p.events[pi], 0))
            pi += 1
        else:
            merged.append(relabel(q.events[qi], 1))
            qi += 1
    return Presentation(max(p.horizon, q.horizon), merged)


class PresentationBuilder:
    """Mutable accumulator for stage constructions.

    Keeps the live partition so builders can query membership and sizes
    while emitting events; `build` freezes everything into a Presentation.
    """

    def __init__(self, horizon: int):
        self.horizon = horizon
        self._events: list[Event] = []
        self._root: dict[int, int] = {}
        self._members: dict[int, list[int]] = {}
        self._id: dict[int, int] = {}  # root -> current class id (least member)

    def __contains__(self, elem: int) -> bool:
        return elem in self._root

    def new(self, stage: int, elem: int) -> None:
        if elem in self._root:
            raise InvariantError(f"element {elem} already present")
        self._events.append(Event(stage, elem))
        self._root[elem] = elem
        self._members[elem] = [elem]
        self._id[elem] = elem

    def join(self, stage: int, elem: int, anchor: int) -> None:
        """Introduce elem directly into the class of the existing anchor."""
        if elem in self._root:
            raise InvariantError(f"element {elem} already present")
        root = self._root[anchor]
        self._events.append(Event(stage, elem, self._id[root]))
        self._root[elem] = root
        self._members[root].append(elem)
        if elem < self._id[root]:
            self._id[root] = elem

    def size(self, anchor: int) -> int:
        return len(self._members[self._root[anchor]])

    def members(self, anchor: int) -> list[int]:
        return list(self._members[self._root[anchor]])

    def root(self, elem: int) -> int:
        return self._root[elem]

    def class_id(self, elem: int) -> int:
        return self._id[self._root[elem]]

    def roots(self) -> list[int]:
        return sorted(self._members)

    def build(self) -> Presentation:
        return Presentation(self.horizon, self._events)


@dataclass(frozen=True)
class CharacterProfile:
    """Declared character data: the finite-size multiplicities, the bound on
    finite class sizes, and how many classes are infinite.

    `bound` and `infinite_classes` use math.inf for "unbounded" and
    "infinitely many"; multiplicity values may be math.inf as well.
    Multiplicities are recorded for sizes up to `cutoff`.
    """

    bound: int | float
    infinite_classes: int | float
    multiplicities: Mapping[int, int | float]
    cutoff: int = 64

    def __post_init__(self):
        if self.bound != UNBOUNDED:
            for size, count in self.multiplicities.items():
                if size > self.bound and count:
                    raise InvariantError(
                        f"declared bound {self.bound} but {count} classes of size {size}"
                    )

    def multiplicity(self, size: int) -> int | float:
        return self.multiplicities.get(size, 0)

    def bounded(self) -> bool:
        return self.bound != UNBOUNDED

    def finitely_many_infinite(self) -> bool:
        return self.infinite_classes != INFINITE


def profile_from_census(
    sizes: Mapping[int, int],
    infinite_classes: int | float = 0,
    unbounded: bool = False,
    cutoff: int = 64,
) -> CharacterProfile:
    """Profile of a horizon census plus declared limit facts.

    The census cannot itself say which classes keep growing; callers declare
    `infinite_classes` and `unbounded`, and classes counted infinite are
    dropped from the finite multiplicities by taking the largest sizes.
    """
    counts = Counter(dict(sizes))
    if infinite_classes:
        remaining = infinite_classes
        for size in sorted(counts, reverse=True):
            if remaining <= 0:
                break
            take = counts[size] if remaining == INFINITE else min(counts[size], remaining)
            counts[size] -= take
            if counts[size] == 0:
                del counts[size]
            if remaining != INFINITE:
                remaining -= take
    bound = UNBOUNDED if unbounded else max(counts, default=0)
    return CharacterProfile(bound, infinite_classes, dict(counts), cutoff)


def profile_violations(pres: Presentation, profile: CharacterProfile) -> list[str]:
    """Consistency of declared profile data against the horizon snapshot.

    A finite declared bound allows at most `infinite_classes` many classes
    to exceed it (those are the ones declared infinite).
    """
    problems = []
    if profile.bounded():
        over = [
            c[0] for c in pres.final().classes if len(c) > profile.bound
        ]
        if profile.finitely_many_infinite() and len(over) > profile.infinite_classes:
            problems.append(
                f"{len(over)} classes exceed bound {profile.bound} "
                f"but only {profile.infinite_classes} declared infinite"
            )
    return problems


def assert_monotone(pres: Presentation, exhaustive: bool = False) -> None:
    """Monotonicity suite: universe growth, relation growth, no merging.

    The trace validation performed by Presentation already proves all three
    for every stage (fresh singletons and fresh joins are the only event
    kinds), so the single-pass check is to rebuild the Presentation from its
    own events.  With exhaustive=True, adjacent snapshots are also compared
    pairwise, which is affordable only for small fixtures.
    """
    Presentation(pres.horizon, pres.events)
    if not exhaustive:
        return
    prev = pres.snapshot_at(0)
    for s in range(1, pres.horizon + 1):
        cur = pres.snapshot_at(s)
        if not prev.universe <= cur.universe:
            raise InvariantError(f"universe shrank between stages {s - 1} and {s}")
        elems = sorted(prev.universe)
        for i, x in enumerate(elems):
            for y in elems[i + 1 :]:
                before = prev.equivalent(x, y)
                after = cur.equivalent(x, y)
                if before and not after:
                    raise InvariantError(f"{x} ~ {y} lost between {s - 1} and {s}")
                if not before and after:
                    raise InvariantError(f"classes of {x}, {y} merged at stage {s}")
        prev = cur


# -- text formats -----------------------------------------------------------

def dump_snapshot(snap: Snapshot) -> str:
    lines = ["SNAPSHOT v1"]
    for cls in snap.classes:
        lines.append(f"class {cls[0]}: " + " ".join(str(e) for e in cls))
    return "\n".join(lines) + "\n"


def parse_snapshot(text: str) -> Snapshot:
    lines = text.splitlines()
    if not lines or lines[0] != "SNAPSHOT v1":
        raise ParseError("expected 'SNAPSHOT v1' header")
    classes = []
    for line in lines[1:]:
        if not line.strip():
            continue
        if not line.startswith("class "):
            raise ParseError(f"bad snapshot line: {line!r}")
        head, _, rest = line.partition(":")
        try:
            cid = int(head[len("class "):])
            members = [int(tok) for tok in rest.split()]
        except ValueError as exc:
            raise ParseError(f"bad snapshot line: {line!r}") from exc
        if not members or min(members) != cid:
            raise ParseError(f"class id {cid} is not the least member in {line!r}")
        classes.append(members)
    try:
        return Snapshot(classes)
    except InvariantError as exc:
        raise ParseError(str(exc)) from exc


def dump_trace(pres: Presentation) -> str:
    lines = [f"TRACE v1 horizon={pres.horizon}"]
    for ev in pres.events:
        if ev.joins is None:
            lines.append(f"s={ev.stage} new {ev.elem}")
        else:
            lines.append(f"s={ev.stage} join {ev.elem} -> {ev.joins}")
    return "\n".join(lines) + "\n"


def parse_trace(text: str) -> Presentation:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("TRACE v1 horizon="):
        raise ParseError("expected 'TRACE v1 horizon=<H>' header")
    try:
        horizon = int(lines[0].split("=", 1)[1])
    except ValueError as exc:
        raise ParseError("bad horizon") from exc
    events = []
    for line in lines[1:]:
        if not line.strip():
            continue
        toks = line.split()
        try:
            if len(toks) == 3 and toks[0].startswith("s=") and toks[1] == "new":
                events.append(Event(int(toks[0][2:]), int(toks[2])))
            elif (
                len(toks) == 5
                and toks[0].startswith("s=")
                and toks[1] == "join"
                and toks[3] == "->"
            ):
                events.append(Event(int(toks[0][2:]), int(toks[2]), int(toks[4])))
            else:
                raise ParseError(f"bad trace line: {line!r}")
        except ValueError as exc:
            raise ParseError(f"bad trace line: {line!r}") from exc
    try:
        return Presentation(horizon, events)
    except InvariantError as exc:
        raise ParseError(str(exc)) from exc


def _num(value: int | float) -> str:
    return "infinite" if value == INFINITE else str(int(value))


def dump_profile(p: CharacterProfile) -> str:
    lines = [f"PROFILE v1 cutoff={p.cutoff}"]
    lines.append("bound " + ("unbounded" if not p.bounded() else str(int(p.bound))))
    lines.append(f"infinite {_num(p.infinite_classes)}")
    for size in sorted(p.multiplicities):
        count = p.multiplicities[size]
        if count:
            lines.append(f"size {size} count {_num(count)}")
    return "\n".join(lines) + "\n"


def parse_profile(text: str) -> CharacterProfile:
    lines = [l for l in text.splitlines() if l.strip()]
    if not lines or not lines[0].startswith("PROFILE v1 cutoff="):
        raise ParseError("expected 'PROFILE v1 cutoff=<c>' header")
    try:
        cutoff = int(lines[0].split("=", 1)[1])
    except ValueError as exc:
        raise ParseError("bad cutoff") from exc
    bound: int | float | None = None
    infinite: int | float | None = None
    mult: dict[int, int | float] = {}
    for line in lines[1:]:
        toks = line.split()
        try:
            if toks[0] == "bound" and len(toks) == 2:
                bound = UNBOUNDED if toks[1] == "unbounded" else int(toks[1])
            elif toks[0] == "infinite" and len(toks) == 2:
                infinite = INFINITE if toks[1] == "infinite" else int(toks[1])
            elif toks[0] == "size" and len(toks) == 4 and toks[2] == "count":
                mult[int(toks[1])] = INFINITE if toks[3] == "infinite" else int(toks[3])
            else:
                raise ParseError(f"bad profile line: {line!r}")
        except (ValueError, IndexError) as exc:
            raise ParseError(f"bad profile line: {line!r}") from exc
    if bound is None or infinite is None:
        raise ParseError("profile must declare bound and infinite lines")
    try:
        return CharacterProfile(bound, infinite, mult, cutoff)
    except InvariantError as exc:
        raise ParseError(str(exc)) from exc
