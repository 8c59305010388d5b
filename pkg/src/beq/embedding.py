"""Embedding synthesis between staged equivalence structures.

Three synthesis routines mirror three effectiveness levels.  The bounded
routine answers every query against the horizon diagram and never revises
an image.  The jump-level routine recomputes its recursion at every stage
from stage-local class sizes, so images may move while sizes settle; the
revisions are the mind-change log.  The double-jump routine routes whole
classes onto target classes currently guessed to grow forever, re-routing
when a guess is withdrawn.

verify_partial_embedding and the brute-force search are the exact checks
the synthesized maps are audited against.
"""

from __future__ import annotations

from typing import Callable, Mapping

from .core import (
    INFINITE,
    CharacterProfile,
    FixtureError,
    ParseError,
    Presentation,
    Snapshot,
    inf_guess,
)


class PartialMap:
    """Finite map between snapshot universes, candidate partial embedding."""

    def __init__(self, source: Snapshot, target: Snapshot, pairs: Mapping[int, int]):
        self.source = source
        self.target = target
        self.pairs = dict(sorted(pairs.items()))

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, PartialMap)
            and self.pairs == other.pairs
            and self.source == other.source
            and self.target == other.target
        )

    def __repr__(self) -> str:
        return f"PartialMap({len(self.pairs)} pairs)"


def verify_partial_embedding(m: PartialMap) -> bool:
    """Exact check: injective and bi-congruent.

    Bi-congruence is checked class-wise, which is equivalent to the pairwise
    condition (x E y iff f(x) E f(y)): every mapped source class must land
    inside a single target class, and distinct source classes in distinct
    target classes.  Raises ValueError on elements outside the snapshots.
    """
    for x, y in m.pairs.items():
        if x not in m.source:
            raise ValueError(f"source element {x} not in source snapshot")
        if y not in m.target:
            raise ValueError(f"target element {y} not in target snapshot")
    if len(set(m.pairs.values())) != len(m.pairs):
        return False
    image_class: dict[int, int] = {}
    for x, y in m.pairs.items():
        src = m.source.class_id(x)
        tgt = m.target.class_id(y)
        if image_class.setdefault(src, tgt) != tgt:
            return False
    used = list(image_class.values())
    return len(set(used)) == len(used)


def finite_embeds(a: Snapshot, b: Snapshot) -> bool:
    """Size-dominance test for embeddability of finite snapshots.

    Sorting class sizes descending, a embeds in b iff a has no more classes
    than b and each a-size is at most the b-size at the same rank.
    """
    sa = sorted((len(c) for c in a.classes), reverse=True)
    sb = sorted((len(c) for c in b.classes), reverse=True)
    return len(sa) <= len(sb) and all(x <= y for x, y in zip(sa, sb))


def brute_force_embeds(a: Snapshot, b: Snapshot, max_elements: int | None = 8) -> bool:
    """Exhaustive search over injective congruent maps, with backtracking.

    Independent of finite_embeds: no size bookkeeping, just extension of
    partial injections element by element.  Guarded to max_elements per
    side; pass None to lift the guard (searches that fail by pigeonhole
    stay cheap at any size).
    """
    if max_elements is not None and (len(a) > max_elements or len(b) > max_elements):
        raise ValueError(f"snapshots exceed the {max_elements}-element search cutoff")
    elems = [e for cls in a.classes for e in cls]
    target_members = {cls[0]: cls for cls in b.classes}
    used: set[int] = set()
    src_to_tgt_class: dict[int, int] = {}
    imaged_classes: set[int] = set()

    def extend(k: int) -> bool:
        if k == len(elems):
            return True
        x = elems[k]
        cid = a.class_id(x)
        assigned = src_to_tgt_class.get(cid)
        if assigned is not None:
            candidates = [y for y in target_members[assigned] if y not in used]
            fresh = False
        else:
            candidates = [
                y
                for tid, members in target_members.items()
                if tid not in imaged_classes
                for y in members
                if y not in used
            ]
            fresh = True
        for y in candidates:
            tid = b.class_id(y)
            used.add(y)
            if fresh:
                src_to_tgt_class[cid] = tid
                imaged_classes.add(tid)
            if extend(k + 1):
                return True
            used.discard(y)
            if fresh:
                del src_to_tgt_class[cid]
                imaged_classes.discard(tid)
        return False

    return extend(0)


class StagedMap:
    """Stage-indexed partial maps with their revision history."""

    def __init__(
        self,
        source: Presentation,
        target: Presentation,
        horizon: int,
        stages: list[dict[int, int]],
        mind_changes: dict[int, list[int]],
        deferrals: list[tuple[int, int]] | None = None,
    ):
        self.source = source
        self.target = target
        self.horizon = horizon
        self.stages = stages
        self.mind_changes = mind_changes
        self.deferrals = deferrals or []

    def map_at(self, s: int) -> dict[int, int]:
        return self.stages[s]

    def final_map(self) -> PartialMap:
        return PartialMap(
            self.source.snapshot_at(self.horizon),
            self.target.snapshot_at(self.horizon),
            self.stages[self.horizon],
        )

    def total_mind_changes(self) -> int:
        return sum(len(v) for v in self.mind_changes.values())


class _ChangeTracker:
    def __init__(self):
        self.last: dict[int, int] = {}
        self.changes: dict[int, list[int]] = {}

    def observe(self, stage: int, mapping: dict[int, int]) -> None:
        for elem, img in mapping.items():
            prev = self.last.get(elem)
            if prev is not None and prev != img:
                self.changes.setdefault(elem, []).append(stage)
            self.last[elem] = img


def _largest_repeated_size(profile: CharacterProfile) -> int:
    sizes = [m for m, count in profile.multiplicities.items() if count == INFINITE]
    return max(sizes, default=0)


def embed_bounded(
    pres_a: Presentation,
    pres_b: Presentation,
    profile_a: CharacterProfile,
    profile_b: CharacterProfile,
    iso_seed: Mapping[int, int],
    horizon: int,
) -> StagedMap:
    """Computable-case embedding for bounded character.

    Let l be the largest size occurring infinitely often on the source side.
    The classes above l are finitely many and handed over by the supplied
    isomorphism seed; every other class starts at the next unused target
    class of size l (by ascending class id) and its members fill that class
    in ascending order.  Every image is decided once, against the horizon
    diagram, so the result has no mind changes.
    """
    for name, profile in (("source", profile_a), ("target", profile_b)):
        if not profile.bounded() or not profile.finitely_many_infinite():
            raise FixtureError(
                f"{name} profile must declare bounded character and "
                "finitely many infinite classes"
            )
    l = _largest_repeated_size(profile_a)
    snap_a = pres_a.snapshot_at(horizon)
    snap_b = pres_b.snapshot_at(horizon)
    _check_iso_seed(iso_seed, snap_a, snap_b, l)

    small_targets = [c for c in snap_b.classes if len(c) == l]
    next_target = 0
    class_assignment: dict[int, tuple[int, ...]] = {}
    fill_index: dict[int, int] = {}
    nu: dict[int, int] = {}
    for a in pres_a.elements_in_order():
        if a not in snap_a:
            continue
        if a in iso_seed:
            nu[a] = iso_seed[a]
            continue
        cid = snap_a.class_id(a)
        members = class_assignment.get(cid)
        if members is None:
            if next_target >= len(small_targets):
                raise FixtureError(
                    f"target ran out of size-{l} classes; not a bi-embeddable fixture"
                )
            members = small_targets[next_target]
            next_target += 1
            class_assignment[cid] = members
            fill_index[cid] = 0
        nu[a] = members[fill_index[cid]]
        fill_index[cid] += 1

    stages = [
        {a: nu[a] for a in nu if pres_a.present_at(a, s)} for s in range(horizon + 1)
    ]
    return StagedMap(pres_a, pres_b, horizon, stages, {})


def _check_iso_seed(
    seed: Mapping[int, int], snap_a: Snapshot, snap_b: Snapshot, l: int
) -> None:
    dom = set(seed)
    big_a = {e for c in snap_a.classes if len(c) > l for e in c}
    big_b = {e for c in snap_b.classes if len(c) > l for e in c}
    if dom != big_a or set(seed.values()) != big_b or len(set(seed.values())) != len(seed):
        raise FixtureError(
            f"seed must be a bijection between the size->{l} restrictions"
        )
    for cls in snap_a.classes:
        if len(cls) > l:
            images = {snap_b.class_id(seed[e]) for e in cls}
            if len(images) != 1:
                raise FixtureError("seed is not class-preserving")


def embed_delta2(
    pres_a: Presentation,
    pres_b: Presentation,
    profile_a: CharacterProfile,
    profile_b: CharacterProfile,
    transversal_seed: Mapping[int, int],
    horizon: int,
) -> StagedMap:
    """Limit embedding for unbounded character, recomputed every stage.

    The infinite classes on both sides are finitely many; the supplied
    bijection between their transversals routes them directly.  Everything
    else is placed by the three-case recursion along the source enumeration,
    except that class-size comparisons use sizes as of the current stage.
    When a source class outgrows the target class it was placed in, the next
    stage's recomputation moves it, which is recorded as a mind change.  An
    element with no eligible target at this stage is deferred to the next.
    """
    if profile_a.bounded() or profile_b.bounded():
        raise FixtureError("profiles must declare unbounded character")
    if not (profile_a.finitely_many_infinite() and profile_b.finitely_many_infinite()):
        raise FixtureError("profiles must declare finitely many infinite classes")
    if profile_a.infinite_classes != profile_b.infinite_classes:
        raise FixtureError("infinite-class counts differ")
    if len(transversal_seed) != profile_a.infinite_classes:
        raise FixtureError(
            f"seed has {len(transversal_seed)} pairs but profiles declare "
            f"{profile_a.infinite_classes} infinite classes"
        )

    order = pres_a.elements_in_order()
    tracker = _ChangeTracker()
    stages: list[dict[int, int]] = []
    deferrals: list[tuple[int, int]] = []
    for s in range(horizon + 1):
        seed_class_of_root: dict[int, list[int]] = {}
        for t, ft in transversal_seed.items():
            if pres_a.present_at(t, s):
                if not pres_b.present_at(ft, s):
                    raise FixtureError(f"seed image {ft} absent at stage {s}")
                seed_class_of_root[pres_a.root_of(t)] = sorted(
                    pres_b.class_members_at(ft, s)
                )
        seed_target_roots = {
            pres_b.root_of(ft)
            for ft in transversal_seed.values()
            if pres_b.present_at(ft, s)
        }

        b_classes = []  # (current id, root, sorted members)
        for root in pres_b.class_roots():
            members = pres_b.class_members_at(root, s)
            if members:
                members.sort()
                b_classes.append((members[0], root, members))
        b_classes.sort()

        nu: dict[int, int] = {}
        used: set[int] = set()
        used_roots: set[int] = set()
        assigned: dict[int, list[int]] = {}  # source root -> target members
        for a in order:
            if not pres_a.present_at(a, s):
                continue
            root = pres_a.root_of(a)
            members = seed_class_of_root.get(root)
            if members is None:
                members = assigned.get(root)
            if members is None:
                size_needed = pres_a.class_size_at(a, s)
                chosen = None
                for cid, b_root, b_members in b_classes:
                    if (
                        b_root not in used_roots
                        and b_root not in seed_target_roots
                        and len(b_members) >= size_needed
                    ):
                        chosen = (b_root, b_members)
                        break
                if chosen is None:
                    deferrals.append((s, a))
                    continue
                used_roots.add(chosen[0])
                assigned[root] = chosen[1]
                members = chosen[1]
            image = next((y for y in members if y not in used), None)
            if image is None:
                deferrals.append((s, a))
                continue
            nu[a] = image
            used.add(image)
            used_roots.add(pres_b.root_of(image))
        tracker.observe(s, nu)
        stages.append(nu)
    return StagedMap(pres_a, pres_b, horizon, stages, tracker.changes, deferrals)


def embed_delta3(
    pres_a: Presentation,
    pres_b: Presentation,
    horizon: int,
    inf_oracle: Callable[[int, int], bool] | None = None,
) -> StagedMap:
    """Double-jump-level embedding onto classes guessed infinite.

    Each source class is routed to the least target class currently guessed
    to grow forever (by default the growth-window guess on the target
    presentation itself) and not already in use; the routing is kept while
    the guess holds and re-made when it is withdrawn.  Members map in
    ascending order onto the target class, deferring when the target is
    still too small.
    """
    if inf_oracle is None:
        oracle = lambda root, s: inf_guess(pres_b, root, s)
    else:
        oracle = inf_oracle

    routing: dict[int, int] = {}  # source root -> target root
    tracker = _ChangeTracker()
    stages: list[dict[int, int]] = []
    deferrals: list[tuple[int, int]] = []
    for s in range(horizon + 1):
        b_info: dict[int, list[int]] = {}
        believed: dict[int, bool] = {}
        order_b = []
        for root in pres_b.class_roots():
            members = pres_b.class_members_at(root, s)
            if members:
                members.sort()
                b_info[root] = members
                believed[root] = oracle(root, s)
                order_b.append((members[0], root))
        order_b.sort()

        a_roots = []
        for root in pres_a.class_roots():
            members = pres_a.class_members_at(root, s)
            if members:
                members.sort()
                a_roots.append((members[0], root, members))
        a_roots.sort()

        # routings whose guess still holds keep their reservation
        taken = {
            tgt
            for _, a_root, _ in a_roots
            if (tgt := routing.get(a_root)) is not None and believed.get(tgt, False)
        }
        nu: dict[int, int] = {}
        for _, a_root, a_members in a_roots:
            tgt = routing.get(a_root)
            if tgt is not None and not believed.get(tgt, False):
                tgt = None  # guess withdrawn, re-route
            if tgt is None:
                for _, b_root in order_b:
                    if believed[b_root] and b_root not in taken:
                        tgt = b_root
                        taken.add(b_root)
                        break
                if tgt is None:
                    routing.pop(a_root, None)
                    deferrals.extend((s, a) for a in a_members)
                    continue
                routing[a_root] = tgt
            targets = b_info[tgt]
            for a, y in zip(a_members, targets):
                nu[a] = y
            for a in a_members[len(targets):]:
                deferrals.append((s, a))
        tracker.observe(s, nu)
        stages.append(nu)
    return StagedMap(pres_a, pres_b, horizon, stages, tracker.changes, deferrals)


# -- text formats -----------------------------------------------------------

def dump_map(pairs: Mapping[int, int], stage: int) -> str:
    lines = [f"MAP v1 stage={stage}"]
    for src in sorted(pairs):
        lines.append(f"-> {src} {pairs[src]}")
    return "\n".join(lines) + "\n"


def parse_map(text: str) -> tuple[dict[int, int], int]:
    lines = [l for l in text.splitlines() if l.strip()]
    if not lines or not lines[0].startswith("MAP v1 stage="):
        raise ParseError("expected 'MAP v1 stage=<s>' header")
    try:
        stage = int(lines[0].split("=", 1)[1])
    except ValueError as exc:
        raise ParseError("bad stage") from exc
    pairs: dict[int, int] = {}
    for line in lines[1:]:
        toks = line.split()
        if len(toks) != 3 or toks[0] != "->":
            raise ParseError(f"bad map line: {line!r}")
        try:
            pairs[int(toks[1])] = int(toks[2])
        except ValueError as exc:
            raise ParseError(f"bad map line: {line!r}") from exc
    return pairs, stage


def dump_mind_changes(changes: Mapping[int, list[int]]) -> str:
    lines = ["MC v1"]
    for elem in sorted(changes):
        if changes[elem]:
            lines.append(f"{elem}: " + " ".join(str(s) for s in changes[elem]))
    return "\n".join(lines) + "\n"


def parse_mind_changes(text: str) -> dict[int, list[int]]:
    lines = [l for l in text.splitlines() if l.strip()]
    if not lines or lines[0] != "MC v1":
        raise ParseError("expected 'MC v1' header")
    out: dict[int, list[int]] = {}
    for line in lines[1:]:
        head, _, rest = line.partition(":")
        try:
            out[int(head)] = [int(tok) for tok in rest.split()]
        except ValueError as exc:
            raise ParseError(f"bad mind-change line: {line!r}") from exc
    return out
