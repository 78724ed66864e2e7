import itertools

import pytest

from socialots import social, universe
from socialots.universe import UniverseTooLarge


def test_frozen_sizes_for_the_step_caps():
    # per profile: visibility 2 x relations 3 (none, pending, friend)
    # x photo album 65 (empty, or 2 uids x 2 authors x 4 like sets x 4 view sets)
    # x friend-list views 4
    per_profile = 2 * 3 * (1 + 2 * 2 * 4 * 4) * 4
    assert per_profile == 1560
    b = social.social_bounds()
    assert universe.profile_universe_size("alice", b) == per_profile
    assert len(universe.profile_universe("alice", b)) == per_profile
    assert universe.universe_size(b) == 1 + 2 * per_profile + per_profile**2 == 2_436_721
    assert universe.universe_size(b, max_accounts=1) == 1 + 2 * per_profile


@pytest.mark.parametrize(
    "kw",
    [
        dict(accounts=("a",), uids=(1,)),
        dict(accounts=("a", "b", "c"), uids=(1,), max_set=1),
        dict(uids=(1, 2, 3), max_seq=2, max_set=1),
        dict(placeholders=("wall", "photos"), uids=(1,), payloads=("p", "q")),
        dict(placeholders=("inbox",), max_seq=2),
    ],
)
def test_closed_form_matches_enumeration(kw):
    b = social.social_bounds(**kw)
    for a in b.domains["account"]:
        profiles = universe.profile_universe(a, b)
        assert len(profiles) == universe.profile_universe_size(a, b)
        assert len(set(profiles)) == len(profiles)
        for p in profiles:
            assert social.profile_violations(p) == []
            assert social.profile_within_caps(p, b)


def test_enumeration_is_complete_for_a_tiny_profile():
    b = social.social_bounds(("a", "b"), (1,), max_set=1)
    got = set(universe.profile_universe("a", b))
    # brute force over every field combination, keep the structurally valid ones
    photos_opts = [(), (social.ContentItem("a", 1, "p"),), (social.ContentItem("b", 1, "p"),)]
    sets_ab = [frozenset(), frozenset({"a"}), frozenset({"b"})]
    want = set()
    for vis, photos, friends, pending, flv in itertools.product(
        (False, True), photos_opts, sets_ab, sets_ab, sets_ab
    ):
        keys = [("photos", x.uid) for x in photos]
        view_opts = [frozenset()] + [frozenset({(v, x.uid)}) for v in "ab" for x in photos]
        for likers in itertools.product(sets_ab, repeat=len(keys)):
            for pv in view_opts:
                p = social.ProfileState("a", vis, (), (), photos, tuple(zip(keys, likers)),
                                        friends, pending, pv, flv)
                if not social.profile_violations(p):
                    want.add(p)
    assert got == want


def test_network_enumeration_order_and_validity():
    b = social.social_bounds(("a", "b"), (1,), max_set=1)
    states = list(universe.enumerate_universe(b))
    assert len(states) == universe.universe_size(b)
    assert len(set(states)) == len(states)
    assert states[0] == social.NetworkState(frozenset(), ())
    sizes = [len(s.installed) for s in states]
    assert sizes == sorted(sizes)
    assert all(social.network_violations(s) == [] for s in states)


def test_refuses_oversized_universes():
    b = social.social_bounds(("a", "b", "c"), (1, 2))
    with pytest.raises(UniverseTooLarge) as info:
        next(universe.enumerate_universe(b))
    assert info.value.estimate > universe.DEFAULT_MAX_STATES
    assert universe.check_universe_size(b, max_accounts=1) < universe.DEFAULT_MAX_STATES
