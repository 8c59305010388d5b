"""Command-line front end.

Exit codes: 0 success, 2 parse or fixture error, 3 invariant violation,
4 verification failure.  All commands are deterministic: identical inputs
produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import adversary, approx, core, embedding, indexsets
from .core import FixtureError, InvariantError, ParseError
from .pairing import pair, unpair

REDUCE_KINDS = ("d01", "pi02", "pi02-inf", "d03", "sigma02", "pi04", "sigma04")


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc


def _write(path: str, text: str) -> None:
    Path(path).write_text(text)


def _entries_from_family(fam: approx.ApproximationFamily) -> dict[int, int]:
    entries = {}
    for x, sched in fam.schedules.items():
        if sched.kind == "from":
            entries[x] = sched.start
        elif sched.kind != "never":
            raise FixtureError(
                f"x={x}: entry schedules must be 'from <s>' or 'never', "
                f"got {sched.text()!r}"
            )
    return entries


def _split_fixture(text: str) -> tuple[str, dict[str, str]]:
    family_lines = []
    params: dict[str, str] = {}
    for line in text.splitlines():
        if line.startswith("params"):
            for tok in line.split()[1:]:
                key, _, val = tok.partition("=")
                params[key] = val
        else:
            family_lines.append(line)
    return "\n".join(family_lines) + "\n", params


def cmd_build(args: argparse.Namespace) -> int:
    log = None
    if args.kind == "triangular":
        pres = adversary.canonical_triangular(args.horizon)
    elif args.kind == "diag":
        if not args.programs:
            raise FixtureError("build diag needs --programs")
        programs = approx.parse_programs(_read(args.programs))
        pres, log = adversary.diagonalize_unbounded(programs, args.horizon)
    elif args.kind == "simple-fin":
        families = [approx.parse_family(_read(p)) for p in args.family or []]
        pres, log = adversary.build_simple_fin(families, args.horizon)
    elif args.kind == "af":
        if not args.family:
            raise FixtureError("build af needs --family")
        pres = adversary.build_af(approx.parse_family(_read(args.family[0])), args.horizon)
    elif args.kind == "coder":
        if not args.family:
            raise FixtureError("build coder needs --family")
        pres, log = adversary.build_doublejump_coder(
            approx.parse_family(_read(args.family[0])), args.horizon
        )
    else:
        raise FixtureError(f"unknown build kind {args.kind!r}")
    core.assert_monotone(pres)
    _write(args.out, core.dump_trace(pres))
    if args.log and log is not None:
        _write(args.log, adversary.dump_log(log))
    return 0


def cmd_embed(args: argparse.Namespace) -> int:
    pres_a = core.parse_trace(_read(args.source))
    pres_b = core.parse_trace(_read(args.target))
    if args.algo in ("bounded", "delta2"):
        if not (args.profile_a and args.profile_b and args.seed):
            raise FixtureError(f"embed {args.algo} needs --profile-a, --profile-b, --seed")
        profile_a = core.parse_profile(_read(args.profile_a))
        profile_b = core.parse_profile(_read(args.profile_b))
        seed, _ = embedding.parse_map(_read(args.seed))
        fn = embedding.embed_bounded if args.algo == "bounded" else embedding.embed_delta2
        staged = fn(pres_a, pres_b, profile_a, profile_b, seed, args.horizon)
    elif args.algo == "delta3":
        staged = embedding.embed_delta3(pres_a, pres_b, args.horizon)
    else:
        raise FixtureError(f"unknown embed algorithm {args.algo!r}")
    _write(args.out, embedding.dump_map(staged.map_at(args.horizon), args.horizon))
    if args.mc:
        _write(args.mc, embedding.dump_mind_changes(staged.mind_changes))
    if not embedding.verify_partial_embedding(staged.final_map()):
        print("FAIL", file=sys.stderr)
        return 4
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    pairs, stage = embedding.parse_map(_read(args.map))
    pres_a = core.parse_trace(_read(args.source))
    pres_b = core.parse_trace(_read(args.target))
    if args.stage is not None:
        stage = args.stage
    snap_a = pres_a.snapshot_at(stage)
    snap_b = pres_b.snapshot_at(stage)
    ok = embedding.verify_partial_embedding(embedding.PartialMap(snap_a, snap_b, pairs))
    print("PASS" if ok else "FAIL")
    if len(snap_a) <= 8 and len(snap_b) <= 8:
        embeds = embedding.brute_force_embeds(snap_a, snap_b)
        print(f"oracle: {'EMBEDS' if embeds else 'NO-EMBEDDING'}")
    return 0 if ok else 4


def cmd_census(args: argparse.Namespace) -> int:
    pres = core.parse_trace(_read(args.trace))
    stages = [args.stage] if args.stage is not None else range(pres.horizon + 1)
    for s in stages:
        print(f"s={s} " + core.format_census(pres.census_at(s)))
    return 0


def cmd_classify(args: argparse.Namespace) -> int:
    profile = core.parse_profile(_read(args.profile))
    print(indexsets.classify_becat(profile).value)
    return 0


def cmd_reduce(args: argparse.Namespace) -> int:
    family_text, params = _split_fixture(_read(args.fixture))
    fam = approx.parse_family(family_text)
    base = None
    if "base" in params:
        base_path = Path(args.fixture).parent / params["base"]
        base = core.parse_trace(_read(str(base_path)))
    kind = args.kind
    if kind == "d01":
        entries = _entries_from_family(fam)
        if base is None:
            raise FixtureError("d01 needs params base=<trace>")
        pres = indexsets.reduce_d01(
            entries.get(0), entries.get(1), int(params["n"]), base, args.horizon
        )
    elif kind == "pi02":
        if base is None:
            raise FixtureError("pi02 needs params base=<trace>")
        pres = indexsets.reduce_pi02(
            _entries_from_family(fam), int(params["n"]), base, args.horizon
        )
    elif kind == "pi02-inf":
        if base is None:
            raise FixtureError("pi02-inf needs params base=<trace>")
        pres = indexsets.reduce_pi02_inf(_entries_from_family(fam), base, args.horizon)
    elif kind == "d03":
        if "aux" not in params:
            raise FixtureError("d03 needs params aux=<family> for the second predicate")
        aux = approx.parse_family(_read(str(Path(args.fixture).parent / params["aux"])))
        pres = indexsets.reduce_d03(
            lambda x, j: bool(fam.h(x, j)),
            lambda x, j: bool(aux.h(x, j)),
            int(params.get("k", 1)),
            args.horizon,
        )
    elif kind == "sigma02":
        pres = indexsets.reduce_sigma02(_entries_from_family(fam), args.horizon)
    elif kind == "pi04":
        pres = indexsets.reduce_pi04(
            lambda x, y, u, v: bool(fam.h(pair(x, y), pair(u, v))), args.horizon
        )
    elif kind == "sigma04":
        if base is None:
            raise FixtureError("sigma04 needs params base=<trace>")
        pres = indexsets.reduce_sigma04(
            lambda x, y, u, v: bool(fam.h(pair(x, y), pair(u, v))), base, args.horizon
        )
    else:
        raise FixtureError(f"unknown reduction kind {kind!r}")
    core.assert_monotone(pres)
    _write(args.out, core.dump_trace(pres))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="beq")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="run a stage construction")
    p.add_argument("kind", choices=["triangular", "diag", "simple-fin", "af", "coder"])
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--programs", help="PROGRAMS v1 fixture (diag)")
    p.add_argument("--family", action="append", help="FAMILY v1 fixture (repeatable)")
    p.add_argument("--out", required=True, help="output trace path")
    p.add_argument("--log", help="output construction log path")
    p.set_defaults(fn=cmd_build)

    p = sub.add_parser("embed", help="synthesize an embedding between traces")
    p.add_argument("algo", choices=["bounded", "delta2", "delta3"])
    p.add_argument("--a", dest="source", required=True, help="source trace")
    p.add_argument("--b", dest="target", required=True, help="target trace")
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--seed", help="MAP v1 seed (bounded: isomorphism, delta2: transversals)")
    p.add_argument("--profile-a", dest="profile_a")
    p.add_argument("--profile-b", dest="profile_b")
    p.add_argument("--out", required=True, help="output map path")
    p.add_argument("--mc", help="output mind-change log path")
    p.set_defaults(fn=cmd_embed)

    p = sub.add_parser("verify", help="check a map file against two traces")
    p.add_argument("--map", required=True)
    p.add_argument("--a", dest="source", required=True)
    p.add_argument("--b", dest="target", required=True)
    p.add_argument("--stage", type=int)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("census", help="print class-size multisets per stage")
    p.add_argument("--trace", required=True)
    p.add_argument("--stage", type=int)
    p.set_defaults(fn=cmd_census)

    p = sub.add_parser("classify", help="categoricity degree of a profile")
    p.add_argument("--profile", required=True)
    p.set_defaults(fn=cmd_classify)

    p = sub.add_parser("reduce", help="run a reduction gadget")
    p.add_argument("kind", choices=list(REDUCE_KINDS))
    p.add_argument("--fixture", required=True)
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_reduce)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ParseError, FixtureError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InvariantError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
