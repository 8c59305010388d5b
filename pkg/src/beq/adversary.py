"""Adversarial stage constructions with audit logs.

Each builder runs a deterministic stage loop against clocked programs or
approximation families and emits a Presentation plus a ConstructionLog of
the decisions taken (attention, blocking, designation, discarding, growth).
The logs are what the soundness checks in the test suite audit: every
growth corresponds to a trace event, discarded classes never grow again,
and the accounting bounds can be recounted from them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

from .approx import ApproximationFamily, ClockedProgram, Semantics
from .core import (
    FixtureError,
    InvariantError,
    ParseError,
    Presentation,
    PresentationBuilder,
    inf_guess,
)
from .embedding import PartialMap, verify_partial_embedding
from .pairing import pair, triple, unpair


@dataclass(frozen=True)
class LogEvent:
    stage: int
    kind: str  # attend | block | designate | discard | grow
    args: tuple[int, ...]


class ConstructionLog:
    def __init__(self, events: Iterable[LogEvent] = ()):
        self.events = list(events)

    def add(self, stage: int, kind: str, *args: int) -> None:
        self.events.append(LogEvent(stage, kind, tuple(args)))

    def of_kind(self, kind: str) -> list[LogEvent]:
        return [ev for ev in self.events if ev.kind == kind]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ConstructionLog) and self.events == other.events

    def __len__(self) -> int:
        return len(self.events)


def dump_log(log: ConstructionLog) -> str:
    lines = ["LOG v1"]
    for ev in log.events:
        lines.append(f"s={ev.stage} {ev.kind} " + " ".join(str(a) for a in ev.args))
    return "\n".join(lines).rstrip() + "\n"


def parse_log(text: str) -> ConstructionLog:
    lines = [l for l in text.splitlines() if l.strip()]
    if not lines or lines[0] != "LOG v1":
        raise ParseError("expected 'LOG v1' header")
    events = []
    for line in lines[1:]:
        toks = line.split()
        if len(toks) < 2 or not toks[0].startswith("s="):
            raise ParseError(f"bad log line: {line!r}")
        try:
            events.append(
                LogEvent(int(toks[0][2:]), toks[1], tuple(int(t) for t in toks[2:]))
            )
        except ValueError as exc:
            raise ParseError(f"bad log line: {line!r}") from exc
    return ConstructionLog(events)


# -- the triangular structure ------------------------------------------------

def canonical_triangular(horizon: int) -> Presentation:
    """One class per left column: stage s completes the column-s class,
    which has size s + 1.  Element ids are the pair codes ⟨s, n⟩, n <= s."""
    b = PresentationBuilder(horizon)
    for s in range(horizon + 1):
        b.new(s, pair(s, 0))
        for n in range(1, s + 1):
            b.join(s, pair(s, n), pair(s, 0))
    return b.build()


def triangular_column(code: int) -> int | None:
    """Left column of a code, or None when the code is off the triangle."""
    i, n = unpair(code)
    return i if n <= i else None


def triangular_class_size(code: int) -> int:
    col = triangular_column(code)
    if col is None:
        raise ValueError(f"{code} is not a triangular element")
    return col + 1


# -- diagonalization against clocked programs -------------------------------

class _GraphTracker:
    """Incrementally maintained program graph with embedding status.

    Violations are permanent: images persist under growing fuel, inequivalent
    elements never become equivalent (classes never merge), and equivalent
    elements stay equivalent, so a graph that stops being a partial embedding
    into the triangle never becomes one again.
    """

    def __init__(self, program: ClockedProgram, root_of: Callable[[int], int]):
        self.program = program
        self.root_of = root_of
        self.pending: list[int] = []
        self.pairs: dict[int, int] = {}
        self.alive = True
        self._images: set[int] = set()
        self._column_of_root: dict[int, int] = {}
        self._root_of_column: dict[int, int] = {}

    def feed(self, new_elements: Iterable[int], fuel: int) -> None:
        candidates = self.pending + list(new_elements)
        self.pending = []
        for b in candidates:
            v = self.program.eval(b, fuel)
            if v is None:
                self.pending.append(b)
                continue
            self.pairs[b] = v
            if not self.alive:
                continue
            col = triangular_column(v)
            if col is None or v in self._images:
                self.alive = False
                continue
            self._images.add(v)
            root = self.root_of(b)
            known = self._column_of_root.get(root)
            if known is None:
                if col in self._root_of_column:
                    self.alive = False
                else:
                    self._column_of_root[root] = col
                    self._root_of_column[col] = root
            elif known != col:
                self.alive = False

    def is_partial_embedding(self) -> bool:
        return self.alive and bool(self.pairs)


def diagonalize_unbounded(
    programs: list[ClockedProgram], horizon: int
) -> tuple[Presentation, ConstructionLog]:
    """Build a structure no supplied program embeds into the triangle.

    Stage s + 1 checks each program (index e <= s, fuel s + 1) restricted to
    the previous stage's structure.  If the least e whose graph is a
    nonempty partial embedding exists, the class of the newest singleton is
    grown by s + 1 fresh elements, overtaking the size any image class can
    certify; a fresh singleton is appended every stage either way.  Each
    class is grown at most once, so the result has unbounded character and
    no infinite classes.
    """
    b = PresentationBuilder(horizon)
    log = ConstructionLog()
    b.new(0, pair(0, 0))
    fresh_since_check = [pair(0, 0)]
    trackers = [_GraphTracker(p, b.root) for p in programs]
    for t in range(1, horizon + 1):
        s = t - 1
        for tracker in trackers:
            if tracker.alive:
                tracker.feed(fresh_since_check, t)
        fresh_since_check = []
        attacker = next(
            (
                e
                for e, tracker in enumerate(trackers)
                if e <= s and tracker.is_partial_embedding()
            ),
            None,
        )
        if attacker is not None:
            log.add(t, "attend", attacker)
            anchor = pair(s, 0)
            added = 0
            j = 0
            while added < s + 1:
                elem = pair(s, s + j)
                j += 1
                if elem in b:
                    continue
                b.join(t, elem, anchor)
                log.add(t, "grow", b.class_id(anchor), elem)
                fresh_since_check.append(elem)
                added += 1
        singleton = pair(t, 0)
        b.new(t, singleton)
        fresh_since_check.append(singleton)
    return b.build(), log


def partial_embedding_stages(
    programs: list[ClockedProgram], pres: Presentation, horizon: int
) -> list[int | None]:
    """First stage at which each program's restricted graph is a nonempty
    partial embedding into the triangle, replayed after the fact against the
    finished presentation (None if that never happens by the horizon).

    This probes the status of every program at every stage; the index gate
    that throttles who may receive attention in the construction itself does
    not apply here.
    """
    first: list[int | None] = [None] * len(programs)
    trackers = [_GraphTracker(p, pres.root_of) for p in programs]
    elems = pres.elements_in_order()
    entry = {e: pres.entry_stage(e) for e in elems}
    idx = 0
    for t in range(1, horizon + 1):
        batch = []
        while idx < len(elems) and entry[elems[idx]] <= t - 1:
            batch.append(elems[idx])
            idx += 1
        for e, tracker in enumerate(trackers):
            if tracker.alive:
                tracker.feed(batch, t)
            if first[e] is None and tracker.is_partial_embedding():
                first[e] = t
    return first


def defeat_reason(
    program: ClockedProgram, pres_b: Presentation, horizon: int, fuel: int | None = None
) -> str | None:
    """Why the program's horizon graph is not an embedding into the triangle.

    None means the graph is still a verified partial embedding whose image
    classes are at least as large as their sources, i.e. not defeated.
    """
    if fuel is None:
        fuel = horizon
    snap_b = pres_b.snapshot_at(horizon)
    graph = {}
    for e in sorted(snap_b.universe):
        v = program.eval(e, fuel)
        if v is not None:
            graph[e] = v
    for e, v in graph.items():
        if triangular_column(v) is None:
            return f"image of {e} is {v}, outside the triangular structure"
    max_col = max((triangular_column(v) for v in graph.values()), default=0)
    tri = canonical_triangular(max_col).final()
    if not verify_partial_embedding(PartialMap(snap_b, tri, graph)):
        return "graph is not a partial embedding"
    for e, v in graph.items():
        if snap_b.size(e) > triangular_class_size(v):
            return (
                f"class of {e} (size {snap_b.size(e)}) maps into a class of "
                f"size {triangular_class_size(v)}"
            )
    return None


# -- blocking construction: a structure whose finite part meets every
#    eventually-always approximation ----------------------------------------

def build_simple_fin(
    families: list[ApproximationFamily], horizon: int
) -> tuple[Presentation, ConstructionLog]:
    """Freeze a witness inside every infinite eventually-always family.

    Classes are fresh singletons until designated (they then grow by one
    element per stage) or blocked (they then never grow).  At stage s + 1
    the least family e whose stage-s approximation avoids all blocked
    elements but contains some x > e**3 gets attention: the member above
    e**3 longest uninterruptedly in the approximation (the member itself if
    it is beyond s) is blocked.  First attention also designates the least
    untouched element, keeping the supply of growing classes infinite.
    Blocked witnesses that drop out of their approximation hand their class
    back to the designated pool.
    """
    for e, fam in enumerate(families):
        if fam.semantics is not Semantics.SIGMA2:
            raise FixtureError(f"family {e} must have SIGMA2 semantics")
    b = PresentationBuilder(horizon)
    log = ConstructionLog()
    designated: list[int] = []  # roots, in designation order
    blocked: dict[int, tuple[int, int]] = {}  # root -> (family, witness)
    seen_attention: set[int] = set()
    last_out: dict[tuple[int, int], int] = {}  # (family, x) -> last stage out

    def member_at(fam: ApproximationFamily, x: int, s: int) -> bool:
        return s >= 0 and bool(fam.h(x, s))

    def blocked_elems() -> set[int]:
        out: set[int] = set()
        for root in blocked:
            out.update(b.members(root))
        return out

    def next_untouched(above: int) -> int:
        y = above + 1
        while y in b:
            y += 1
        return y

    for t in range(1, horizon + 1):
        s = t - 1
        for e, fam in enumerate(families):
            for x in fam.schedules:
                if not member_at(fam, x, s):
                    last_out[(e, x)] = s
        fin_now = blocked_elems()
        # step 1: attention
        for e, fam in enumerate(families):
            if e >= s:
                break
            current = [x for x in fam.schedules if member_at(fam, x, s)]
            if any(x in fin_now for x in current):
                continue
            above = sorted(x for x in current if x > e**3)
            if not above:
                continue
            log.add(t, "attend", e)
            x = above[0]
            if x <= s:
                eligible = [y for y in current if e**3 < y <= s]
                witness = min(
                    eligible,
                    key=lambda y: (last_out.get((e, y), -1), y),
                )
            else:
                witness = x
            if witness not in b:
                b.new(t, witness)
            root = b.root(witness)
            if root in blocked:
                raise InvariantError(
                    f"family {e} attacked an already blocked class at stage {t}"
                )
            if root in designated:
                designated.remove(root)
            blocked[root] = (e, witness)
            log.add(t, "block", e, witness)
            if e not in seen_attention:
                seen_attention.add(e)
                fresh = next_untouched(-1)
                b.new(t, fresh)
                designated.append(fresh)
                log.add(t, "designate", fresh)
            break
        # step 2: grow every designated class by one element beyond s
        grabbed = s
        for root in sorted(designated):
            y = next_untouched(grabbed)
            grabbed = y
            b.join(t, y, root)
            log.add(t, "grow", b.class_id(root), y)
        # step 3: blocked witnesses that fell out are re-designated
        if s >= 1:
            for root, (e, witness) in list(blocked.items()):
                fam = families[e]
                if member_at(fam, witness, s - 1) and not member_at(fam, witness, s):
                    del blocked[root]
                    designated.append(root)
                    log.add(t, "designate", b.class_id(root))
    return b.build(), log


# -- the structure realizing a monotone limit function as class sizes -------

def build_af(f_family: ApproximationFamily, horizon: int) -> Presentation:
    """Classes anchored at ⟨x,0⟩ whose stage-s size equals h(x, s) exactly.

    ⟨x,0⟩ materializes once x falls under the stage counter and its value is
    positive; each stage the class is topped up to the current approximation
    value with fresh elements ⟨x,r⟩.  The approximation must be
    nondecreasing (a value of 0 simply means the class is not there yet).
    """
    if f_family.semantics is not Semantics.MONOTONE_LIMIT:
        raise FixtureError("build_af needs a MONOTONE_LIMIT family")
    b = PresentationBuilder(horizon)
    next_r: dict[int, int] = {}

    def top_up(x: int, t: int) -> None:
        anchor = pair(x, 0)
        want = f_family.h(x, t)
        if anchor not in b:
            if want < 1:
                return  # value still 0: the class does not exist yet
            b.new(t, anchor)
        have = b.size(anchor)
        if want < have:
            raise FixtureError(f"approximation decreased at x={x}, stage {t}")
        while have < want:
            r = max(next_r.get(x, 1), t)
            while pair(x, r) in b:
                r += 1
            b.join(t, pair(x, r), anchor)
            next_r[x] = r + 1
            have += 1

    top_up(0, 0)
    for t in range(1, horizon + 1):
        for x in range(t):
            top_up(x, t)
    return b.build()


# -- the double-jump coder ---------------------------------------------------

def lex_string(i: int) -> str:
    """Length-lexicographic listing of binary strings: '', 0, 1, 00, 01, ..."""
    return bin(i + 1)[3:]


def build_doublejump_coder(
    pi2_family: ApproximationFamily,
    horizon: int,
    string_enum: Callable[[int], str] = lex_string,
) -> tuple[Presentation, ConstructionLog]:
    """Witness classes that grow without bound exactly for the strings
    consistent with the family's limit.

    String i keeps one designated witness ⟨i,j,0⟩.  Whenever a position the
    string declares out shows up in the stage approximation, the witness is
    discarded for good and ⟨i,s+1,0⟩ takes over.  Each stage the designated
    witness's class is topped up to the smallest stage count among the
    positions the string declares in (the stage number itself for strings
    declaring nothing in, so they grow too).
    """
    if pi2_family.semantics is not Semantics.PI2:
        raise FixtureError("the coder needs a PI2 family")
    b = PresentationBuilder(horizon)
    log = ConstructionLog()
    witness: dict[int, int] = {}  # i -> current witness element
    witness_j: dict[int, int] = {}
    next_r: dict[tuple[int, int], int] = {}
    counts: dict[int, int] = {}
    tracked = sorted(
        {x for i in range(horizon + 1) for x in range(len(string_enum(i)))}
    )

    def h(x: int, t: int) -> int:
        return pi2_family.h(x, t)

    def designate(i: int, j: int, t: int) -> None:
        w = triple(i, j, 0)
        b.new(t, w)
        witness[i] = w
        witness_j[i] = j
        log.add(t, "designate", i, w)

    designate(0, 0, 0)
    for x in tracked:
        counts[x] = counts.get(x, 0) + h(x, 0)
    for t in range(1, horizon + 1):
        designate(t, 0, t)
        stage_in = {x for x in tracked if h(x, t)}
        for i in range(t):
            sigma = string_enum(i)
            zeros = [x for x, ch in enumerate(sigma) if ch == "0"]
            if any(x in stage_in for x in zeros):
                log.add(t, "discard", i, witness[i])
                designate(i, t, t)
        for i in range(t):
            sigma = string_enum(i)
            ones = [x for x, ch in enumerate(sigma) if ch == "1"]
            target = min((counts[x] for x in ones), default=t)
            w = witness[i]
            j = witness_j[i]
            while b.size(w) < target:
                r = max(next_r.get((i, j), 1), t)
                while triple(i, j, r) in b:
                    r += 1
                b.join(t, triple(i, j, r), w)
                next_r[(i, j)] = r + 1
                log.add(t, "grow", b.class_id(w), triple(i, j, r))
        for x in tracked:
            counts[x] += h(x, t)
    return b.build(), log


def surviving_growing_witnesses(
    pres: Presentation,
    log: ConstructionLog,
    horizon: int,
    stable_from: int | None = None,
) -> dict[int, int]:
    """Witnesses designated by stage `stable_from`, never discarded after,
    and still growing per the horizon guess.  These are the classes the
    finite run certifies as growing without bound."""
    if stable_from is None:
        stable_from = horizon // 2
    last_designation: dict[int, tuple[int, int]] = {}  # i -> (stage, witness)
    discarded: dict[int, set[int]] = {}
    for ev in log.events:
        if ev.kind == "designate" and len(ev.args) == 2:
            last_designation[ev.args[0]] = (ev.stage, ev.args[1])
        elif ev.kind == "discard":
            discarded.setdefault(ev.args[0], set()).add(ev.args[1])
    out: dict[int, int] = {}
    for i, (stage, w) in sorted(last_designation.items()):
        if w in discarded.get(i, ()):
            continue
        if stage <= stable_from and inf_guess(pres, w, horizon):
            out[i] = w
    return out


def decode_transversal(
    pres: Presentation,
    log: ConstructionLog,
    horizon: int,
    x: int,
    string_enum: Callable[[int], str] = lex_string,
    stable_from: int | None = None,
) -> int:
    """Read bit x of the coded set off a surviving growing witness.

    A surviving witness for string i certifies that i is consistent with
    the approximated set, so position x of the set is the string's bit and
    the coded complement bit is its negation.  Raises when no surviving
    witness reaches past x; the caller gets no guess.
    """
    for i, _ in sorted(surviving_growing_witnesses(pres, log, horizon, stable_from).items()):
        sigma = string_enum(i)
        if len(sigma) > x:
            return 1 - int(sigma[x])
    raise ValueError(f"no surviving witness certifies bit {x}")
