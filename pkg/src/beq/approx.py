"""Clocked partial functions and stage-approximation families.

A ClockedProgram is a deterministic rule with an explicit per-input halting
time, evaluated under a fuel bound; divergence is the value None.  An
ApproximationFamily is a stage predicate (or stage-indexed natural) with
declared limit semantics: eventually-always membership, infinitely-often
membership, plain pointwise limits, or nondecreasing pointwise limits.
Families loaded from fixture files are driven by explicit schedules so that
horizon tests stay deterministic.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Mapping

from .core import FixtureError, ParseError


class Semantics(enum.Enum):
    SIGMA2 = "SIGMA2"
    PI2 = "PI2"
    LIMIT = "LIMIT"
    MONOTONE_LIMIT = "MONOTONE_LIMIT"


@dataclass(frozen=True)
class Schedule:
    """Boolean stage schedule.

    Kinds: always, never, `from s` (true at stages >= s), `until s` (true at
    stages < s), and `period p offset o from s` (true at stages t >= s with
    t % p == o).
    """

    kind: str
    start: int = 0
    period: int = 1
    offset: int = 0

    def active(self, s: int) -> bool:
        if self.kind == "always":
            return True
        if self.kind == "never":
            return False
        if self.kind == "from":
            return s >= self.start
        if self.kind == "until":
            return s < self.start
        if self.kind == "period":
            return s >= self.start and s % self.period == self.offset
        raise ValueError(f"unknown schedule kind {self.kind!r}")

    def count_through(self, s: int) -> int:
        """Number of active stages t with 0 <= t <= s (closed form)."""
        if s < 0:
            return 0
        if self.kind == "always":
            return s + 1
        if self.kind == "never":
            return 0
        if self.kind == "from":
            return max(0, s - self.start + 1)
        if self.kind == "until":
            return min(s + 1, self.start)
        if self.kind == "period":
            if s < self.start:
                return 0
            first = self.start + (self.offset - self.start) % self.period
            if first > s:
                return 0
            return (s - first) // self.period + 1
        raise ValueError(f"unknown schedule kind {self.kind!r}")

    def fires_unboundedly(self) -> bool:
        return self.kind in ("always", "from", "period")

    def eventually_always(self) -> bool:
        return self.kind in ("always", "from")

    def text(self) -> str:
        if self.kind in ("always", "never"):
            return self.kind
        if self.kind in ("from", "until"):
            return f"{self.kind} {self.start}"
        return f"period {self.period} offset {self.offset} from {self.start}"


NEVER = Schedule("never")
ALWAYS = Schedule("always")


def parse_schedule(expr: str) -> Schedule:
    toks = expr.split()
    try:
        if toks == ["always"]:
            return ALWAYS
        if toks == ["never"]:
            return NEVER
        if len(toks) == 2 and toks[0] in ("from", "until"):
            return Schedule(toks[0], int(toks[1]))
        if len(toks) == 6 and toks[0] == "period" and toks[2] == "offset" and toks[4] == "from":
            period = int(toks[1])
            if period <= 0:
                raise ParseError(f"period must be positive in {expr!r}")
            return Schedule("period", int(toks[5]), period, int(toks[3]))
    except ValueError as exc:
        raise ParseError(f"bad schedule {expr!r}") from exc
    raise ParseError(f"bad schedule {expr!r}")


@dataclass(frozen=True)
class TruthDecl:
    value: int
    stable: int


@dataclass(frozen=True)
class ApproximationFamily:
    """Stage approximation h(x, s) with declared limit semantics.

    Schedule-backed families are the fixture form and serialize to FAMILY
    files.  For set semantics h is the 0/1 schedule value; for limit
    semantics h counts the active stages through s, which is nondecreasing
    by construction.  A callable `h_fn` overrides the schedules (used for
    computed families, which do not serialize).
    """

    semantics: Semantics
    horizon: int
    schedules: Mapping[int, Schedule] = field(default_factory=dict)
    truth: Mapping[int, TruthDecl] = field(default_factory=dict)
    h_fn: Callable[[int, int], int] | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.semantics is Semantics.LIMIT:
            for x, sched in self.schedules.items():
                if sched.kind == "period":
                    raise FixtureError(
                        f"x={x}: periodic schedule has no pointwise limit"
                    )

    def schedule(self, x: int) -> Schedule:
        return self.schedules.get(x, NEVER)

    def h(self, x: int, s: int) -> int:
        if self.h_fn is not None:
            return self.h_fn(x, s)
        if self.semantics is Semantics.MONOTONE_LIMIT:
            return self.schedule(x).count_through(s)
        return int(self.schedule(x).active(s))

    def declared_member(self, x: int) -> bool:
        """Limit membership read off the schedule, per the semantics."""
        sched = self.schedule(x)
        if self.semantics is Semantics.PI2:
            return sched.fires_unboundedly()
        return sched.eventually_always()


def eval_clocked(prog: "ClockedProgram", x: int, fuel: int) -> int | None:
    """Run prog on x under a fuel bound; None means not yet converged."""
    return prog.eval(x, fuel)


def sigma2_member_at(fam: ApproximationFamily, x: int, s: int) -> bool:
    if fam.semantics is not Semantics.SIGMA2:
        raise ValueError(f"expected SIGMA2 semantics, got {fam.semantics.value}")
    return bool(fam.h(x, s))


def pi2_member_at(fam: ApproximationFamily, x: int, s: int) -> bool:
    if fam.semantics is not Semantics.PI2:
        raise ValueError(f"expected PI2 semantics, got {fam.semantics.value}")
    return bool(fam.h(x, s))


def limit_value(fam: ApproximationFamily, x: int, horizon: int) -> int:
    """Value at the horizon; equals the true limit once past the
    stabilization stage declared for x."""
    if fam.semantics is not Semantics.MONOTONE_LIMIT:
        raise ValueError(f"expected MONOTONE_LIMIT semantics, got {fam.semantics.value}")
    return fam.h(x, horizon)


@dataclass(frozen=True)
class ClockedProgram:
    """Partial function with an explicit halting time per input.

    value_fn(x) is the output (None where the program diverges on x) and
    time_fn(x) the fuel needed to see it.  Results are fuel-monotone by
    construction: once converged the value never changes.
    """

    name: str
    value_fn: Callable[[int], int | None] = field(compare=False)
    time_fn: Callable[[int], int] = field(compare=False)

    def eval(self, x: int, fuel: int) -> int | None:
        v = self.value_fn(x)
        if v is None or self.time_fn(x) > fuel:
            return None
        return v


def identity_program(time: int = 1) -> ClockedProgram:
    return ClockedProgram("identity", lambda x: x, lambda x: time)


def constant_program(c: int, time: int = 1) -> ClockedProgram:
    return ClockedProgram(f"const-{c}", lambda x: c, lambda x: time)


def shift_program(k: int, time: int = 1) -> ClockedProgram:
    return ClockedProgram(f"shift+{k}", lambda x: x + k, lambda x: time)


def diverging_program() -> ClockedProgram:
    return ClockedProgram("diverge", lambda x: None, lambda x: 0)


def selfclock_program() -> ClockedProgram:
    """Halts on x after exactly x steps, with value x."""
    return ClockedProgram("selfclock", lambda x: x, lambda x: x)


def table_program(name: str, entries: Mapping[int, tuple[int, int]]) -> ClockedProgram:
    """Finite step table: entries[x] = (value, halting time); else diverge."""
    table = dict(entries)
    return ClockedProgram(
        name,
        lambda x: table[x][0] if x in table else None,
        lambda x: table[x][1] if x in table else 0,
    )


def dominant_f(
    programs: list[ClockedProgram],
    fuel_schedule: Callable[[int], int] | None = None,
) -> ApproximationFamily:
    """Monotone-limit family h(x,s) = 1 + sum of converged values phi_i(x)
    over i <= x, at fuel fuel_schedule(s).

    The limit dominates every supplied program on inputs x >= its index:
    whenever phi_i(x) converges, the limit exceeds phi_i(x) because the sum
    includes it and starts from 1.  Defaults to fuel_schedule(s) = s.
    """
    if fuel_schedule is None:
        fuel_schedule = lambda s: s

    def h(x: int, s: int) -> int:
        fuel = fuel_schedule(s)
        total = 1
        for i, prog in enumerate(programs):
            if i > x:
                break
            v = prog.eval(x, fuel)
            if v is not None:
                if v < 0:
                    raise FixtureError(f"program {prog.name} returned a negative value")
                total += v
        return total

    return ApproximationFamily(Semantics.MONOTONE_LIMIT, 0, h_fn=h)


# -- text formats -----------------------------------------------------------

def dump_family(fam: ApproximationFamily) -> str:
    if fam.h_fn is not None:
        raise ValueError("computed families have no fixture form")
    lines = [f"FAMILY v1 semantics={fam.semantics.value} horizon={fam.horizon}"]
    for x in sorted(fam.schedules):
        lines.append(f"x={x} schedule={fam.schedules[x].text()}")
    for x in sorted(fam.truth):
        t = fam.truth[x]
        lines.append(f"truth x={x} value={t.value} stable={t.stable}")
    return "\n".join(lines) + "\n"


def parse_family(text: str) -> ApproximationFamily:
    lines = [l for l in text.splitlines() if l.strip()]
    if not lines or not lines[0].startswith("FAMILY v1 "):
        raise ParseError("expected 'FAMILY v1 ...' header")
    head: dict[str, str] = {}
    for tok in lines[0].split()[2:]:
        key, _, val = tok.partition("=")
        head[key] = val
    try:
        semantics = Semantics(head["semantics"])
        horizon = int(head["horizon"])
    except (KeyError, ValueError) as exc:
        raise ParseError(f"bad family header: {lines[0]!r}") from exc
    schedules: dict[int, Schedule] = {}
    truth: dict[int, TruthDecl] = {}
    for line in lines[1:]:
        if line.startswith("truth "):
            fields = dict(tok.partition("=")[::2] for tok in line.split()[1:])
            try:
                truth[int(fields["x"])] = TruthDecl(int(fields["value"]), int(fields["stable"]))
            except (KeyError, ValueError) as exc:
                raise ParseError(f"bad truth line: {line!r}") from exc
        elif line.startswith("x="):
            head_tok, _, expr = line.partition(" schedule=")
            try:
                x = int(head_tok[2:])
            except ValueError as exc:
                raise ParseError(f"bad rule line: {line!r}") from exc
            if not expr:
                raise ParseError(f"bad rule line: {line!r}")
            schedules[x] = parse_schedule(expr)
        else:
            raise ParseError(f"bad family line: {line!r}")
    try:
        fam = ApproximationFamily(semantics, horizon, schedules, truth)
    except FixtureError as exc:
        raise ParseError(str(exc)) from exc
    _check_truth(fam)
    return fam


def _check_truth(fam: ApproximationFamily) -> None:
    """Reject fixtures whose declared truth contradicts their schedules."""
    for x, decl in fam.truth.items():
        if fam.semantics in (Semantics.SIGMA2, Semantics.PI2):
            if bool(decl.value) != fam.declared_member(x):
                raise ParseError(
                    f"x={x}: declared value {decl.value} contradicts schedule "
                    f"{fam.schedule(x).text()!r}"
                )
        elif fam.semantics is Semantics.MONOTONE_LIMIT:
            if fam.h(x, max(decl.stable, fam.horizon)) != decl.value:
                raise ParseError(f"x={x}: declared limit {decl.value} never reached")


def parse_programs(text: str) -> list[ClockedProgram]:
    lines = [l for l in text.splitlines() if l.strip()]
    if not lines or lines[0] != "PROGRAMS v1":
        raise ParseError("expected 'PROGRAMS v1' header")
    programs = []
    for line in lines[1:]:
        if not line.startswith("prog "):
            raise ParseError(f"bad program line: {line!r}")
        programs.append(program_from_spec(line[len("prog "):]))
    return programs


def program_from_spec(spec: str) -> ClockedProgram:
    """Build a program from its fixture spec, e.g. 'const 5 time=2',
    'identity', 'shift 3', 'diverge', 'selfclock', 'table 1:0@1 4:9@2'."""
    toks = spec.split()
    if not toks:
        raise ParseError("empty program spec")
    kind, args = toks[0], toks[1:]
    time = 1
    plain = []
    for tok in args:
        if tok.startswith("time="):
            try:
                time = int(tok[5:])
            except ValueError as exc:
                raise ParseError(f"bad program spec {spec!r}") from exc
        else:
            plain.append(tok)
    try:
        if kind == "identity" and not plain:
            return identity_program(time)
        if kind == "const" and len(plain) == 1:
            return constant_program(int(plain[0]), time)
        if kind == "shift" and len(plain) == 1:
            return shift_program(int(plain[0]), time)
        if kind == "diverge" and not plain:
            return diverging_program()
        if kind == "selfclock" and not plain:
            return selfclock_program()
        if kind == "table":
            entries = {}
            for tok in plain:
                xpart, _, rest = tok.partition(":")
                vpart, _, tpart = rest.partition("@")
                entries[int(xpart)] = (int(vpart), int(tpart) if tpart else 1)
            return table_program("table", entries)
    except ValueError as exc:
        raise ParseError(f"bad program spec {spec!r}") from exc
    raise ParseError(f"bad program spec {spec!r}")
