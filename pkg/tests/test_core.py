import pytest

from beq.core import (
    INFINITE,
    UNBOUNDED,
    CharacterProfile,
    Event,
    InvariantError,
    ParseError,
    Presentation,
    PresentationBuilder,
    Snapshot,
    assert_monotone,
    canonical_transversal,
    census,
    direct_sum,
    dump_profile,
    dump_snapshot,
    dump_trace,
    format_census,
    inf_guess,
    parse_profile,
    parse_snapshot,
    parse_trace,
    profile_from_census,
    profile_violations,
    restrict_above,
    size_at_least,
)
from beq.adversary import build_af, canonical_triangular
from beq.approx import ApproximationFamily, Schedule, Semantics

from helpers import sized_presentation, static_presentation


def triangular_by_hand(horizon):
    """Independent replay of the triangular trace, straight off its rule."""
    from beq.pairing import pair

    classes = []
    for i in range(horizon + 1):
        classes.append([pair(i, n) for n in range(i + 1)])
    return Snapshot(classes)


class TestSnapshot:
    def test_class_id_is_least_member(self):
        snap = Snapshot([[2, 0], [1]])
        assert snap.class_id(2) == 0
        assert snap.class_ids() == [0, 1]

    def test_rejects_overlap_and_empty(self):
        with pytest.raises(InvariantError):
            Snapshot([[0, 1], [1, 2]])
        with pytest.raises(InvariantError):
            Snapshot([[0], []])

    def test_equivalent(self):
        snap = Snapshot([[0, 2], [1]])
        assert snap.equivalent(0, 2)
        assert not snap.equivalent(0, 1)
        with pytest.raises(ValueError):
            snap.class_of(9)


class TestCensus:
    def test_empty(self):
        assert census(Snapshot(())) == {}
        assert format_census({}) == "{}"

    def test_triangular_stage3(self):
        snap = canonical_triangular(3).snapshot_at(3)
        assert snap == triangular_by_hand(3)
        assert sorted(census(snap).elements()) == [1, 2, 3, 4]

    def test_single_class_of_five(self):
        assert census(sized_presentation([5]).final()) == {5: 1}

    def test_format(self):
        assert format_census({1: 2, 3: 1}) == "{1,1,3}"


class TestTransversal:
    def test_least_element_rule(self):
        assert canonical_transversal(Snapshot([[0, 2], [1]])) == [0, 1]

    def test_single_class(self):
        assert canonical_transversal(Snapshot([[5, 7, 9]])) == [5]

    def test_triangular_stage2(self):
        snap = canonical_triangular(2).snapshot_at(2)
        by_hand = sorted(min(c) for c in triangular_by_hand(2).classes)
        assert canonical_transversal(snap) == by_hand

    def test_covers_universe_pairwise_inequivalent(self):
        snap = canonical_triangular(4).final()
        t = canonical_transversal(snap)
        assert len({snap.class_id(x) for x in t}) == len(t) == len(snap.classes)


class TestSizeAtLeast:
    def test_singleton(self):
        pres = sized_presentation([1])
        assert size_at_least(pres, 0, 1, 0)
        assert not size_at_least(pres, 0, 2, 0)

    def test_triangular_completed_class(self):
        pres = canonical_triangular(5)
        from beq.pairing import pair

        a = pair(2, 0)
        for s in range(2, 6):
            assert size_at_least(pres, a, 3, s)
        assert not size_at_least(pres, a, 4, 5)

    def test_monotone_in_stage(self):
        pres = canonical_triangular(6)
        from beq.pairing import pair

        for k in range(1, 5):
            was_true = False
            for s in range(3, 7):
                now = size_at_least(pres, pair(3, 0), k, s)
                assert now or not was_true
                was_true = now

    def test_unknown_element(self):
        with pytest.raises(ValueError):
            size_at_least(sized_presentation([1]), 7, 1, 0)


class TestInfGuess:
    def test_frozen_class(self):
        pres = static_presentation([[0, 1]], horizon=10)
        assert not inf_guess(pres, 0, 10)

    def test_growing_every_stage(self):
        b = PresentationBuilder(10)
        b.new(0, 0)
        for s in range(1, 11):
            b.join(s, s, 0)
        pres = b.build()
        for s in range(2, 11):
            assert inf_guess(pres, 0, s)

    def test_stabilized_class_eventually_false(self):
        fam = ApproximationFamily(
            Semantics.MONOTONE_LIMIT, 10, {0: Schedule("until", 3)}
        )
        pres = build_af(fam, 10)
        from beq.pairing import pair

        last_growth = max(pres.growth_stages(pair(0, 0)))
        for s in range(2 * last_growth + 1, 11):
            assert not inf_guess(pres, pair(0, 0), s)


class TestRestrictAbove:
    def test_drops_small(self):
        snap = sized_presentation([1, 2, 3]).final()
        assert sorted(census(restrict_above(snap, 1)).elements()) == [2, 3]

    def test_all_dropped(self):
        snap = sized_presentation([1, 2]).final()
        assert restrict_above(snap, 5) == Snapshot(())

    def test_triangular(self):
        snap = canonical_triangular(3).final()
        filtered = restrict_above(snap, 2)
        assert sorted(len(c) for c in filtered.classes) == [3, 4]
        # census-then-filter oracle
        assert sorted(census(filtered).elements()) == sorted(
            s for s in census(snap).elements() if s > 2
        )


class TestDirectSum:
    def test_sum_with_empty(self):
        p = sized_presentation([2, 3])
        out = direct_sum(p, Presentation(0))
        assert census(out.final()) == census(p.final())
        assert out.universe == {2 * e for e in p.universe}

    def test_two_singletons(self):
        out = direct_sum(sized_presentation([1]), sized_presentation([1]))
        assert sorted(census(out.final()).elements()) == [1, 1]

    def test_triangular_pair_stage2(self):
        tri = canonical_triangular(2)
        out = direct_sum(tri, tri)
        assert sorted(out.census_at(2).elements()) == [1, 1, 2, 2, 3, 3]

    def test_census_additivity_every_stage(self):
        p = canonical_triangular(4)
        q = sized_presentation([2, 2], horizon=4)
        out = direct_sum(p, q)
        for s in range(5):
            assert out.census_at(s) == p.census_at(s) + q.census_at(s)


class TestPresentation:
    def test_replay_determinism(self):
        pres = canonical_triangular(4)
        for s in range(5):
            assert pres.snapshot_at(s) == pres.snapshot_at(s)

    def test_snapshot_matches_prefix_replay(self):
        pres = canonical_triangular(4)
        for s in range(5):
            prefix = [ev for ev in pres.events if ev.stage <= s]
            assert pres.snapshot_at(s) == Presentation(4, prefix).snapshot_at(s)

    def test_validation(self):
        with pytest.raises(InvariantError):
            Presentation(1, [Event(0, 0), Event(0, 0)])
        with pytest.raises(InvariantError):
            Presentation(1, [Event(0, 0), Event(1, 1, joins=5)])
        with pytest.raises(InvariantError):
            Presentation(1, [Event(1, 0), Event(0, 1)])
        with pytest.raises(InvariantError):
            Presentation(1, [Event(2, 0)])

    def test_monotonicity_suite_exhaustive(self):
        assert_monotone(canonical_triangular(5), exhaustive=True)

    def test_class_id_resolution_after_smaller_join(self):
        # a smaller element joining an existing class moves the class id
        b = PresentationBuilder(2)
        b.new(0, 5)
        b.join(1, 9, 5)
        b.join(2, 1, 9)
        pres = b.build()
        snap = pres.snapshot_at(2)
        assert snap.class_id(5) == 1
        assert parse_trace(dump_trace(pres)) == pres


class TestProfiles:
    def test_bound_consistency(self):
        with pytest.raises(InvariantError):
            CharacterProfile(2, 0, {3: 1})

    def test_violations(self):
        pres = sized_presentation([1, 2, 5])
        ok = CharacterProfile(2, 1, {1: 1, 2: 1})
        assert profile_violations(pres, ok) == []
        bad = CharacterProfile(2, 0, {1: 1, 2: 1})
        assert profile_violations(pres, bad)

    def test_profile_from_census(self):
        p = profile_from_census({1: 3, 7: 2}, infinite_classes=2)
        assert p.bound == 1
        assert p.multiplicities == {1: 3}
        q = profile_from_census({1: 3}, unbounded=True)
        assert q.bound == UNBOUNDED


class TestFormats:
    def test_snapshot_roundtrip(self):
        snap = canonical_triangular(3).final()
        assert parse_snapshot(dump_snapshot(snap)) == snap
        assert dump_snapshot(parse_snapshot(dump_snapshot(snap))) == dump_snapshot(snap)

    def test_trace_roundtrip(self):
        pres = canonical_triangular(3)
        assert parse_trace(dump_trace(pres)) == pres

    def test_profile_roundtrip(self):
        p = CharacterProfile(UNBOUNDED, 2, {1: INFINITE, 4: 2}, cutoff=32)
        assert parse_profile(dump_profile(p)) == p

    def test_parse_errors(self):
        with pytest.raises(ParseError):
            parse_trace("TRACE v1\n")
        with pytest.raises(ParseError):
            parse_trace("TRACE v1 horizon=2\ns=0 frobnicate 3\n")
        with pytest.raises(ParseError):
            parse_snapshot("SNAPSHOT v1\nclass 3: 4 5\n")
        with pytest.raises(ParseError):
            parse_profile("PROFILE v1 cutoff=8\nbound 3\n")
