import pytest

from beq.core import (
    INFINITE,
    UNBOUNDED,
    CharacterProfile,
    FixtureError,
    PresentationBuilder,
    Snapshot,
)
from beq.embedding import (
    PartialMap,
    brute_force_embeds,
    dump_map,
    dump_mind_changes,
    embed_bounded,
    embed_delta2,
    embed_delta3,
    finite_embeds,
    parse_map,
    parse_mind_changes,
    verify_partial_embedding,
)

from helpers import (
    all_partitions,
    growth_presentation,
    pairwise_bicongruent,
    sized_presentation,
    static_presentation,
)


def snap(*classes):
    return Snapshot(classes)


class TestVerify:
    def test_empty_map(self):
        assert verify_partial_embedding(PartialMap(snap(), snap([0]), {}))

    def test_identity(self):
        s = snap([0, 1], [2])
        assert verify_partial_embedding(PartialMap(s, s, {0: 0, 1: 1, 2: 2}))

    def test_collapsing_two_classes_fails(self):
        src = snap([0], [1])
        tgt = snap([5, 6])
        assert not verify_partial_embedding(PartialMap(src, tgt, {0: 5, 1: 6}))

    def test_splitting_one_class_fails(self):
        src = snap([0, 1])
        tgt = snap([5], [6])
        assert not verify_partial_embedding(PartialMap(src, tgt, {0: 5, 1: 6}))

    def test_non_injective_fails(self):
        src = snap([0], [1])
        tgt = snap([5], [6])
        assert not verify_partial_embedding(PartialMap(src, tgt, {0: 5, 1: 5}))

    def test_dangling_raises(self):
        with pytest.raises(ValueError):
            verify_partial_embedding(PartialMap(snap([0]), snap([1]), {9: 1}))
        with pytest.raises(ValueError):
            verify_partial_embedding(PartialMap(snap([0]), snap([1]), {0: 9}))

    def test_agrees_with_pairwise_definition(self):
        # class-wise check vs the literal pairwise oracle, exhaustively
        universes = list(all_partitions([0, 1, 2]))
        for pa in universes:
            for pb in universes:
                sa, sb = Snapshot(pa), Snapshot(pb)
                from itertools import permutations

                for k in range(4):
                    for sources in permutations([0, 1, 2], k):
                        for images in permutations([0, 1, 2], k):
                            pairs = dict(zip(sources, images))
                            got = verify_partial_embedding(PartialMap(sa, sb, pairs))
                            assert got == pairwise_bicongruent(sa, sb, pairs)


class TestFiniteEmbeds:
    def test_empty_embeds_everywhere(self):
        assert finite_embeds(snap(), snap())
        assert finite_embeds(snap(), snap([0, 1]))

    def test_three_into_two_twos(self):
        a = snap([0, 1, 2])
        b = snap([10, 11], [20, 21])
        assert not brute_force_embeds(a, b)  # oracle first
        assert not finite_embeds(a, b)

    def test_one_two_into_two_three(self):
        a = snap([0], [1, 2])
        b = snap([10, 11], [20, 21, 22])
        assert brute_force_embeds(a, b)
        assert finite_embeds(a, b)

    def test_oracle_agreement_small(self):
        parts = list(all_partitions([0, 1, 2, 3]))
        snaps = [Snapshot(p) for p in parts] + [snap()]
        for a in snaps:
            for b in snaps:
                assert finite_embeds(a, b) == brute_force_embeds(a, b)

    def test_cutoff_guard(self):
        big = sized_presentation([9]).final()
        with pytest.raises(ValueError):
            brute_force_embeds(big, big)
        assert brute_force_embeds(big, big, max_elements=None)


def singleton_stream(count, first_id=0, horizon=None):
    b = PresentationBuilder(horizon if horizon is not None else count)
    for i in range(count):
        b.new(i, first_id + i)
    return b.build()


class TestEmbedBounded:
    def bounded_profile(self, extra=None):
        mult = {1: INFINITE}
        mult.update(extra or {})
        bound = max(m for m in mult if mult[m])
        return CharacterProfile(bound, 0, mult)

    def test_singleton_streams_match_in_order(self):
        a = singleton_stream(10)
        b = singleton_stream(10)
        staged = embed_bounded(a, b, self.bounded_profile(), self.bounded_profile(), {}, 10)
        assert staged.map_at(10) == {i: i for i in range(10)}
        assert staged.total_mind_changes() == 0
        assert verify_partial_embedding(staged.final_map())

    def test_seeded_big_class(self):
        ba = PresentationBuilder(8)
        ba.new(0, 100)
        ba.join(0, 101, 100)
        ba.join(0, 102, 100)
        for i in range(6):
            ba.new(i + 1, i)
        a = ba.build()
        bb = PresentationBuilder(8)
        bb.new(0, 200)
        bb.join(0, 201, 200)
        bb.join(0, 202, 200)
        for i in range(6):
            bb.new(i + 1, 10 + i)
        b = bb.build()
        profile = self.bounded_profile({3: 1})
        seed = {100: 200, 101: 201, 102: 202}
        staged = embed_bounded(a, b, profile, profile, seed, 8)
        expected = dict(seed)
        expected.update({i: 10 + i for i in range(6)})
        assert staged.map_at(8) == expected  # hand replay of the recursion
        assert staged.total_mind_changes() == 0
        assert verify_partial_embedding(staged.final_map())
        # mutual direction
        back = embed_bounded(b, a, profile, profile, {v: k for k, v in seed.items()}, 8)
        assert verify_partial_embedding(back.final_map())

    def test_postcondition_verified(self):
        a = singleton_stream(4)
        b = singleton_stream(7)
        staged = embed_bounded(a, b, self.bounded_profile(), self.bounded_profile(), {}, 7)
        assert verify_partial_embedding(staged.final_map())

    def test_profile_mismatch(self):
        a = singleton_stream(3)
        unbounded = CharacterProfile(UNBOUNDED, 0, {})
        with pytest.raises(FixtureError):
            embed_bounded(a, a, unbounded, unbounded, {}, 3)

    def test_bad_seed(self):
        a = sized_presentation([3, 1], horizon=2)
        profile = self.bounded_profile({3: 1})
        with pytest.raises(FixtureError):
            embed_bounded(a, a, profile, profile, {}, 2)

    def test_target_exhaustion(self):
        a = singleton_stream(5)
        b = singleton_stream(3, horizon=5)
        with pytest.raises(FixtureError):
            embed_bounded(a, b, self.bounded_profile(), self.bounded_profile(), {}, 5)


def unbounded_profile(infinite=0):
    return CharacterProfile(UNBOUNDED, infinite, {})


class TestEmbedDelta2:
    def test_identical_traces_zero_changes(self):
        spec = [[(0, 1), (1, 1), (2, 1)], [(0, 1), (3, 2)]]
        a = growth_presentation(spec, 10)
        b = growth_presentation(spec, 10)
        staged = embed_delta2(a, b, unbounded_profile(), unbounded_profile(), {}, 10)
        assert staged.total_mind_changes() == 0
        assert not staged.deferrals
        assert verify_partial_embedding(staged.final_map())
        assert staged.map_at(10) == {e: e for e in a.universe}

    def test_least_fitting_class_by_hand(self):
        a = static_presentation([[0], [10, 11], [20, 21, 22]], horizon=8)
        b = static_presentation(
            [[0, 1], [10, 11, 12, 13], [20, 21, 22, 23, 24, 25]], horizon=8
        )
        staged = embed_delta2(a, b, unbounded_profile(), unbounded_profile(), {}, 8)
        assert staged.map_at(8) == {0: 0, 10: 10, 11: 11, 20: 20, 21: 21, 22: 22}
        assert staged.total_mind_changes() == 0
        assert verify_partial_embedding(staged.final_map())

    def test_growth_forces_mind_change(self):
        ba = PresentationBuilder(6)
        ba.new(0, 7)
        ba.join(2, 8, 7)  # class of 7 outgrows its first image at stage 2
        a = ba.build()
        b = static_presentation([[0], [3, 4]], horizon=6)
        staged = embed_delta2(a, b, unbounded_profile(), unbounded_profile(), {}, 6)
        assert staged.map_at(0) == {7: 0}
        assert staged.map_at(2) == {7: 3, 8: 4}
        assert staged.mind_changes == {7: [2]}
        assert verify_partial_embedding(staged.final_map())

    def test_transversal_seed_routes_infinite_classes(self):
        a = growth_presentation([[(0, 1), (1, 1), (2, 1), (3, 1)], [(0, 2)]], 8)
        b = growth_presentation([[(0, 1), (1, 1), (2, 1), (3, 1)], [(0, 2)]], 8)
        staged = embed_delta2(
            a, b, unbounded_profile(1), unbounded_profile(1), {0: 0}, 8
        )
        assert verify_partial_embedding(staged.final_map())
        final = staged.map_at(8)
        for e in (0, 1, 2, 3):
            assert b.root_of(final[e]) == 0

    def test_seed_size_mismatch(self):
        a = growth_presentation([[(0, 1)]], 4)
        with pytest.raises(FixtureError):
            embed_delta2(a, a, unbounded_profile(1), unbounded_profile(1), {}, 4)

    def test_transient_deferral(self):
        a = static_presentation([[0, 1]], horizon=6)
        bb = PresentationBuilder(6)
        bb.new(0, 9)
        bb.new(3, 1)
        bb.join(3, 2, 1)
        b = bb.build()
        staged = embed_delta2(a, b, unbounded_profile(), unbounded_profile(), {}, 6)
        assert (0, 0) in staged.deferrals
        assert staged.map_at(6) == {0: 1, 1: 2}
        assert verify_partial_embedding(staged.final_map())

    def test_convergence_once_sizes_stabilize(self):
        spec_a = [[(0, 1), (2, 2)], [(1, 1), (3, 1)]]
        spec_b = [[(0, 1)], [(1, 2), (4, 2)], [(2, 1), (3, 1)]]
        a = growth_presentation(spec_a, 12)
        b = growth_presentation(spec_b, 12)
        staged = embed_delta2(a, b, unbounded_profile(), unbounded_profile(), {}, 12)
        for s in range(6, 12):
            assert staged.map_at(s) == staged.map_at(12)
        assert verify_partial_embedding(staged.final_map())


class TestEmbedDelta3:
    def all_growing(self, classes, horizon):
        b = PresentationBuilder(horizon)
        for k in range(classes):
            b.new(0, 1000 * k)
        for s in range(1, horizon + 1):
            for k in range(classes):
                b.join(s, 1000 * k + s, 1000 * k)
        return b.build()

    def test_first_fit_no_churn(self):
        from beq.adversary import canonical_triangular

        a = canonical_triangular(2)
        b = self.all_growing(4, 12)
        staged = embed_delta3(a, b, 12)
        assert staged.total_mind_changes() == 0
        assert verify_partial_embedding(staged.final_map())
        final = staged.map_at(12)
        # first-fit: class ids 0,1,3 of the triangle onto roots 0,1000,2000
        assert b.root_of(final[0]) == 0
        assert b.root_of(final[1]) == 1000
        assert b.root_of(final[3]) == 2000

    def test_single_class_source(self):
        a = growth_presentation([[(0, 1), (1, 1), (2, 1)]], 10)
        b = self.all_growing(2, 10)
        staged = embed_delta3(a, b, 10)
        final = staged.map_at(10)
        assert {b.root_of(v) for v in final.values()} == {0}
        assert verify_partial_embedding(staged.final_map())

    def test_withdrawn_guess_reroutes(self):
        bb = PresentationBuilder(30)
        bb.new(0, 0)  # stalls after stage 5
        bb.new(0, 100)  # grows forever
        for s in range(1, 31):
            if s <= 5:
                bb.join(s, s, 0)
            bb.join(s, 100 + s, 100)
        b = bb.build()
        a = growth_presentation([[(0, 1), (1, 1)]], 30)
        staged = embed_delta3(a, b, 30)
        final = staged.map_at(30)
        assert {b.root_of(v) for v in final.values()} == {100}
        assert staged.total_mind_changes() >= 1
        assert verify_partial_embedding(staged.final_map())


class TestSizeMonotoneImage:
    def test_images_at_least_source_size(self):
        a = static_presentation([[0], [10, 11], [20, 21, 22]], horizon=8)
        b = static_presentation(
            [[0, 1], [10, 11, 12, 13], [20, 21, 22, 23, 24, 25]], horizon=8
        )
        staged = embed_delta2(a, b, unbounded_profile(), unbounded_profile(), {}, 8)
        snap_a = a.snapshot_at(8)
        snap_b = b.snapshot_at(8)
        for src, dst in staged.map_at(8).items():
            assert snap_b.size(dst) >= snap_a.size(src)


class TestMapFormats:
    def test_map_roundtrip(self):
        pairs = {3: 7, 0: 2, 11: 5}
        text = dump_map(pairs, 6)
        assert parse_map(text) == (pairs, 6)
        assert dump_map(*parse_map(text)) == text

    def test_mc_roundtrip(self):
        changes = {4: [2, 9], 1: [5]}
        text = dump_mind_changes(changes)
        assert parse_mind_changes(text) == changes
