"""Enumeration of every structurally valid network state within caps.

Reachability is not required: this is the arbitrary state of an inductive
step.  Ordering is deterministic (account subsets by size then bounds order,
then per-profile choices in field order).
"""

from __future__ import annotations

import itertools
from math import comb, perm, prod
from typing import Iterator

from .kernel import Bounds, OtsError
from .social import PLACEHOLDERS, ContentItem, NetworkState, ProfileState

DEFAULT_MAX_STATES = 10**7


class UniverseTooLarge(OtsError):
    def __init__(self, estimate: int, limit: int):
        self.estimate = estimate
        self.limit = limit
        super().__init__(f"universe has {estimate} states, above the limit of {limit}")


def _subsets(items, cap: int) -> list[frozenset]:
    items = list(items)
    out = []
    for k in range(min(cap, len(items)) + 1):
        out.extend(frozenset(c) for c in itertools.combinations(items, k))
    return out


def _n_subsets(n: int, cap: int) -> int:
    return sum(comb(n, k) for k in range(min(cap, n) + 1))


def _sequences(b: Bounds) -> list[tuple]:
    items = [
        ContentItem(a, u, p)
        for a in b.domains["account"]
        for u in b.domains["nat"]
        for p in b.domains["payload"]
    ]
    out = []
    for n in range(b.max_seq + 1):
        for seq in itertools.product(items, repeat=n):
            if len({x.uid for x in seq}) == n:
                out.append(seq)
    return out


def _content_choices(b: Bounds) -> list[dict]:
    """All (placeholder contents, likes, photo views) combinations."""
    ids = b.domains["account"]
    seqs = _sequences(b)
    places = [p for p in PLACEHOLDERS if p in b.domains["placeholder"]]
    likers = _subsets(ids, b.max_set)
    out = []
    for contents in itertools.product(seqs, repeat=len(places)):
        filled = dict(zip(places, contents))
        keys = sorted((PLACEHOLDERS.index(p), x.uid) for p in PLACEHOLDERS for x in filled.get(p, ()))
        keys = [(PLACEHOLDERS[i], uid) for i, uid in keys]
        photo_uids = [x.uid for x in filled.get("photos", ())]
        views = _subsets([(v, u) for v in ids for u in photo_uids], b.max_set)
        for like_sets in itertools.product(likers, repeat=len(keys)):
            likes = tuple(zip(keys, like_sets))
            for pv in views:
                out.append(dict(filled, likes=likes, photo_views=pv))
    return out


def profile_universe(a: str, b: Bounds) -> list[ProfileState]:
    ids = b.domains["account"]
    others = [x for x in ids if x != a]
    contents = _content_choices(b)
    flvs = _subsets(ids, b.max_set)
    out = []
    for vis in (False, True):
        for friends in _subsets(others, b.max_set):
            for pending in _subsets([x for x in others if x not in friends], b.max_set):
                for c in contents:
                    for flv in flvs:
                        out.append(
                            ProfileState(
                                a,
                                vis,
                                c.get("wall", ()),
                                c.get("inbox", ()),
                                c.get("photos", ()),
                                c["likes"],
                                friends,
                                pending,
                                c["photo_views"],
                                flv,
                            )
                        )
    return out


def profile_universe_size(a: str, b: Bounds) -> int:
    ids = b.domains["account"]
    n_ids, n_uids = len(ids), len(b.domains["nat"])
    others = n_ids - (1 if a in ids else 0)
    n_items_per_uid = n_ids * len(b.domains["payload"])
    likes = _n_subsets(n_ids, b.max_set)
    total = 1
    for place in b.domains["placeholder"]:
        place_total = 0
        for n in range(min(b.max_seq, n_uids) + 1):
            ways = perm(n_uids, n) * n_items_per_uid**n * likes**n
            if place == "photos":
                ways *= _n_subsets(n_ids * n, b.max_set)
            place_total += ways
        total *= place_total
    rel = sum(comb(others, f) * _n_subsets(others - f, b.max_set) for f in range(min(b.max_set, others) + 1))
    return 2 * rel * total * _n_subsets(n_ids, b.max_set)


def account_subsets(b: Bounds, max_accounts: int | None = None) -> list[tuple[str, ...]]:
    ids = b.domains["account"]
    top = len(ids) if max_accounts is None else min(max_accounts, len(ids))
    return [c for k in range(top + 1) for c in itertools.combinations(ids, k)]


def universe_size(b: Bounds, max_accounts: int | None = None) -> int:
    sizes = {a: profile_universe_size(a, b) for a in b.domains["account"]}
    return sum(prod(sizes[a] for a in sub) for sub in account_subsets(b, max_accounts))


def check_universe_size(b: Bounds, max_accounts=None, max_states: int = DEFAULT_MAX_STATES) -> int:
    n = universe_size(b, max_accounts)
    if n > max_states:
        raise UniverseTooLarge(n, max_states)
    return n


def enumerate_universe(
    b: Bounds, max_accounts: int | None = None, max_states: int = DEFAULT_MAX_STATES
) -> Iterator[NetworkState]:
    check_universe_size(b, max_accounts, max_states)
    per = {a: profile_universe(a, b) for a in b.domains["account"]}
    for sub in account_subsets(b, max_accounts):
        ordered = tuple(sorted(sub))
        for combo in itertools.product(*(per[a] for a in sub)):
            profiles = dict(zip(sub, combo))
            yield NetworkState(frozenset(sub), tuple((a, profiles[a]) for a in ordered))
