"""The social network model: a Profile component OTS and the composite network.

Profiles are the base-level objects.  The network installs and removes them
dynamically (``add``/``del``) and lifts every profile action to the compound
level; ``acceptfriendSN`` is the synchronized one, updating both parties.
"""

from __future__ import annotations

from typing import Iterable, NamedTuple

from .kernel import (
    Bounds,
    ComponentCall,
    CompositeOts,
    CompositeState,
    ObserverSpec,
    OtsError,
    Ots,
    Signature,
    SignatureError,
    SyncRule,
    TransitionSpec,
    boolean,
    enumeration,
    identifier,
    natural,
    sequence_of,
    set_of,
    to_jsonable,
    tuple_of,
)

PLACEHOLDERS = ("wall", "inbox", "photos")
SET_VISIBILITY = "set-visibility"
EXTENSIONS = frozenset({SET_VISIBILITY})

ACCOUNT = identifier("account")
NAT = natural("nat")
PAYLOAD = identifier("payload")
BOOL = boolean("bool")
PLACEHOLDER = enumeration("placeholder", PLACEHOLDERS)
CONTENT = tuple_of("content", ACCOUNT, NAT, PAYLOAD)
ACCOUNT_SET = set_of(ACCOUNT)
CONTENT_SEQ = sequence_of(CONTENT)


class ConfigError(OtsError):
    """Model misconfiguration, e.g. calling a disabled extension."""


class ContentItem(NamedTuple):
    author: str
    uid: int
    payload: str


class ProfileState(NamedTuple):
    myid: str
    visibility: bool
    wall: tuple = ()
    inbox: tuple = ()
    photos: tuple = ()
    likes: tuple = ()  # ((placeholder, uid), frozenset of likers), canonical order
    friends: frozenset = frozenset()
    pending: frozenset = frozenset()
    photo_views: frozenset = frozenset()  # (viewer, photo uid)
    friend_list_views: frozenset = frozenset()

    def placeholder(self, place: str) -> tuple:
        return getattr(self, place)

    def likeset(self, uid: int, place: str) -> frozenset:
        for key, likers in self.likes:
            if key == (place, uid):
                return likers
        return frozenset()


def _likes_order(entry):
    (place, uid), _ = entry
    return PLACEHOLDERS.index(place), uid


def profile_init(a: str, default_visibility: bool = True) -> ProfileState:
    return ProfileState(myid=a, visibility=default_visibility)


# -- profile transitions: (effective condition, effect) pairs ----------------


def c_receive_friend_request(p: ProfileState, sender: str) -> bool:
    return sender != p.myid and sender not in p.friends and sender not in p.pending


def receive_friend_request(p: ProfileState, sender: str) -> ProfileState:
    return p._replace(pending=p.pending | {sender})


def c_accept_friend_request(p: ProfileState, sender: str) -> bool:
    return sender in p.pending


def accept_friend_request(p: ProfileState, sender: str) -> ProfileState:
    return p._replace(friends=p.friends | {sender}, pending=p.pending - {sender})


def c_befriend_direct(p: ProfileState, other: str) -> bool:
    return other != p.myid and other not in p.friends


def befriend_direct(p: ProfileState, other: str) -> ProfileState:
    return p._replace(friends=p.friends | {other}, pending=p.pending - {other})


def c_receive_content(p: ProfileState, item: tuple, place: str) -> bool:
    return all(x.uid != item[1] for x in p.placeholder(place))


def receive_content(p: ProfileState, item: tuple, place: str) -> ProfileState:
    item = ContentItem._make(item)
    likes = tuple(sorted(p.likes + (((place, item.uid), frozenset()),), key=_likes_order))
    return p._replace(**{place: p.placeholder(place) + (item,)}, likes=likes)


def c_receive_like(p: ProfileState, place: str, uid: int, liker: str) -> bool:
    return any(x.uid == uid for x in p.placeholder(place))


def receive_like(p: ProfileState, place: str, uid: int, liker: str) -> ProfileState:
    likes = tuple(
        (key, likers | {liker}) if key == (place, uid) else (key, likers) for key, likers in p.likes
    )
    return p._replace(likes=likes)


def c_view_photos(p: ProfileState, viewer: str) -> bool:
    return p.visibility and viewer in p.friends


def view_photos(p: ProfileState, viewer: str) -> ProfileState:
    return p._replace(photo_views=p.photo_views | {(viewer, x.uid) for x in p.photos})


def c_view_friends(p: ProfileState, viewer: str) -> bool:
    return p.visibility and viewer in p.friends


def view_friends(p: ProfileState, viewer: str) -> ProfileState:
    return p._replace(friend_list_views=p.friend_list_views | {viewer})


def c_set_visibility(p: ProfileState, v: bool) -> bool:
    return True


def set_visibility(p: ProfileState, v: bool) -> ProfileState:
    return p._replace(visibility=v)


PROFILE_TRANSITIONS = {
    "receivefriendrequest": ((ACCOUNT,), c_receive_friend_request, receive_friend_request),
    "acceptfriendrequest": ((ACCOUNT,), c_accept_friend_request, accept_friend_request),
    "befriend": ((ACCOUNT,), c_befriend_direct, befriend_direct),
    "receivecontent": ((CONTENT, PLACEHOLDER), c_receive_content, receive_content),
    "receiveclike": ((PLACEHOLDER, NAT, ACCOUNT), c_receive_like, receive_like),
    "viewphotos": ((ACCOUNT,), c_view_photos, view_photos),
    "viewfriends": ((ACCOUNT,), c_view_friends, view_friends),
    "setvisibility": ((BOOL,), c_set_visibility, set_visibility),
}
EXTENSION_TRANSITIONS = {"setvisibility": SET_VISIBILITY}

PROFILE_OBSERVERS = (
    ObserverSpec("myid", (), ACCOUNT),
    ObserverSpec("visibility", (), BOOL),
    ObserverSpec("wall", (), CONTENT_SEQ),
    ObserverSpec("inbox", (), CONTENT_SEQ),
    ObserverSpec("photoalbum", (), CONTENT_SEQ),
    ObserverSpec("friends", (), ACCOUNT_SET),
    ObserverSpec("pending", (), ACCOUNT_SET),
    ObserverSpec("likeset", (NAT, PLACEHOLDER), ACCOUNT_SET),
    ObserverSpec("viewed_photo", (ACCOUNT, NAT), BOOL),
    ObserverSpec("viewed_friends", (ACCOUNT,), BOOL),
)


def _check_extensions(extensions: Iterable[str]) -> frozenset:
    extensions = frozenset(extensions)
    unknown = extensions - EXTENSIONS
    if unknown:
        raise ConfigError(f"unknown extension(s): {', '.join(sorted(unknown))}")
    return extensions


class ProfileOts(Ots):
    def __init__(self, default_visibility: bool = True, extensions: Iterable[str] = ()):
        self.default_visibility = default_visibility
        self.extensions = _check_extensions(extensions)
        self.signature = Signature(
            PROFILE_OBSERVERS,
            tuple(
                TransitionSpec(name, params)
                for name, (params, _, _) in PROFILE_TRANSITIONS.items()
                if EXTENSION_TRANSITIONS.get(name, None) in (None, *self.extensions)
            ),
        )

    def transition_spec(self, name):
        ext = EXTENSION_TRANSITIONS.get(name)
        if ext is not None and ext not in self.extensions:
            raise ConfigError(f"transition {name!r} needs the {ext} extension")
        return self.signature.transition(name)

    def initial(self, a):
        return profile_init(a, self.default_visibility)

    def observe(self, p, name, args):
        if name == "photoalbum":
            return p.photos
        if name == "likeset":
            return p.likeset(*args)
        if name == "viewed_photo":
            return tuple(args) in p.photo_views
        if name == "viewed_friends":
            return args[0] in p.friend_list_views
        if name in ("myid", "visibility", "wall", "inbox", "friends", "pending"):
            return getattr(p, name)
        raise SignatureError(f"unknown observer {name!r}")

    def condition(self, p, name, args):
        try:
            return PROFILE_TRANSITIONS[name][1](p, *args)
        except KeyError:
            raise SignatureError(f"unknown transition {name!r}") from None

    def effect(self, p, name, args):
        return PROFILE_TRANSITIONS[name][2](p, *args)


class NetworkState(CompositeState):
    """Compound state: installed accounts plus one profile per account."""

    __slots__ = ()

    @property
    def accounts(self) -> frozenset:
        return self.installed

    @property
    def profiles(self) -> dict:
        return dict(self.components)


def _rules(extensions: frozenset) -> list[SyncRule]:
    rules = [
        SyncRule(
            "receivefriendSN",
            (ACCOUNT, ACCOUNT),
            (0, 1),
            (ComponentCall(0, "receivefriendrequest", lambda a: (a[1],)),),
        ),
        SyncRule(
            "acceptfriendSN",
            (ACCOUNT, ACCOUNT),
            (0, 1),
            (
                ComponentCall(0, "acceptfriendrequest", lambda a: (a[1],)),
                ComponentCall(1, "befriend", lambda a: (a[0],), required=False),
            ),
        ),
        SyncRule(
            "receiveSN",
            (ACCOUNT, CONTENT, ACCOUNT, PLACEHOLDER),
            (0, 2),
            (ComponentCall(0, "receivecontent", lambda a: (a[1], a[3])),),
            guard=lambda a: a[1][0] == a[2],
        ),
        SyncRule(
            "receivelikeSN",
            (ACCOUNT, PLACEHOLDER, NAT, ACCOUNT),
            (0, 3),
            (ComponentCall(0, "receiveclike", lambda a: (a[1], a[2], a[3])),),
        ),
        SyncRule(
            "viewphotoSN",
            (ACCOUNT, ACCOUNT),
            (0, 1),
            (ComponentCall(0, "viewphotos", lambda a: (a[1],)),),
        ),
        SyncRule(
            "viewfriendsSN",
            (ACCOUNT, ACCOUNT),
            (0, 1),
            (ComponentCall(0, "viewfriends", lambda a: (a[1],)),),
        ),
    ]
    if SET_VISIBILITY in extensions:
        rules.append(
            SyncRule(
                "setvisibility",
                (ACCOUNT, BOOL),
                (0,),
                (ComponentCall(0, "setvisibility", lambda a: (a[1],)),),
            )
        )
    return rules


NETWORK_TRANSITIONS = (
    "add",
    "del",
    "receivefriendSN",
    "acceptfriendSN",
    "receiveSN",
    "receivelikeSN",
    "viewphotoSN",
    "viewfriendsSN",
    "setvisibility",
)


class SocialNetwork(CompositeOts):
    """Composite OTS over :class:`ProfileOts` components.

    ``default_visibility`` configures the visibility of freshly installed
    profiles.  ``extensions`` may contain ``"set-visibility"``, which adds a
    ``setvisibility(a, v)`` transition that deliberately breaks the privacy
    invariants.
    """

    state_type = NetworkState

    def __init__(self, default_visibility: bool = True, extensions: Iterable[str] = ()):
        extensions = _check_extensions(extensions)
        super().__init__(
            ProfileOts(default_visibility, extensions),
            ACCOUNT,
            _rules(extensions),
            installed_observer="accounts",
        )
        self.default_visibility = default_visibility
        self.extensions = extensions

    def transition_spec(self, name):
        ext = EXTENSION_TRANSITIONS.get(name)
        if ext is not None and ext not in self.extensions:
            raise ConfigError(f"transition {name!r} needs the {ext} extension")
        return self.signature.transition(name)

    def initial(self) -> NetworkState:
        return NetworkState(frozenset(), ())

    def __repr__(self):
        ext = ", ".join(sorted(self.extensions))
        return f"SocialNetwork(default_visibility={self.default_visibility}, extensions=[{ext}])"


def social_bounds(
    accounts: Iterable[str] = ("alice", "bob"),
    uids: Iterable[int] = (1, 2),
    payloads: Iterable[str] = ("p",),
    placeholders: Iterable[str] = ("photos",),
    max_seq: int = 1,
    max_set: int = 2,
) -> Bounds:
    placeholders = tuple(placeholders)
    bad = [p for p in placeholders if p not in PLACEHOLDERS]
    if bad:
        raise ConfigError(f"unknown placeholder(s): {bad}")
    return Bounds(
        {
            "account": tuple(accounts),
            "nat": tuple(uids),
            "payload": tuple(payloads),
            "placeholder": placeholders,
        },
        max_seq=max_seq,
        max_set=max_set,
    )


# -- structural validation ---------------------------------------------------


def profile_violations(p: ProfileState) -> list[str]:
    out = []
    for place in PLACEHOLDERS:
        uids = [x.uid for x in p.placeholder(place)]
        if len(set(uids)) != len(uids):
            out.append(f"{p.myid}: duplicate uid in {place}")
    if p.myid in p.friends:
        out.append(f"{p.myid}: befriends itself")
    if p.myid in p.pending:
        out.append(f"{p.myid}: pending request from itself")
    if p.friends & p.pending:
        out.append(f"{p.myid}: friends and pending overlap")
    keys = [key for key, _ in p.likes]
    items = {(place, x.uid) for place in PLACEHOLDERS for x in p.placeholder(place)}
    if set(keys) != items or len(keys) != len(items):
        out.append(f"{p.myid}: likes keys do not match content items")
    if list(p.likes) != sorted(p.likes, key=_likes_order):
        out.append(f"{p.myid}: likes not in canonical order")
    photo_uids = {x.uid for x in p.photos}
    if any(uid not in photo_uids for _, uid in p.photo_views):
        out.append(f"{p.myid}: photo view references a missing photo")
    return out


def network_violations(s: NetworkState) -> list[str]:
    out = []
    ids = [k for k, _ in s.components]
    if set(ids) != set(s.installed) or len(ids) != len(s.installed):
        out.append("profile map domain differs from accounts")
    if ids != sorted(ids):
        out.append("profile map not in canonical order")
    for a, p in s.components:
        if p.myid != a:
            out.append(f"profile {a} has myid {p.myid}")
        out.extend(profile_violations(p))
    return out


def profile_within_caps(p: ProfileState, b: Bounds) -> bool:
    if any(len(p.placeholder(place)) > b.max_seq for place in PLACEHOLDERS):
        return False
    sets = (p.friends, p.pending, p.photo_views, p.friend_list_views)
    if any(len(x) > b.max_set for x in sets):
        return False
    return all(len(likers) <= b.max_set for _, likers in p.likes)


def within_caps(s: NetworkState, b: Bounds) -> bool:
    return all(profile_within_caps(p, b) for _, p in s.components)


# -- JSON ----------------------------------------------------------------------


def profile_to_json(p: ProfileState) -> dict:
    return {
        "myid": p.myid,
        "visibility": p.visibility,
        "wall": to_jsonable(p.wall),
        "inbox": to_jsonable(p.inbox),
        "photos": to_jsonable(p.photos),
        "likes": [[place, uid, to_jsonable(likers)] for (place, uid), likers in p.likes],
        "friends": to_jsonable(p.friends),
        "pending": to_jsonable(p.pending),
        "photo_views": to_jsonable(p.photo_views),
        "friend_list_views": to_jsonable(p.friend_list_views),
    }


def profile_from_json(d: dict) -> ProfileState:
    def items(xs):
        return tuple(ContentItem(a, int(u), pl) for a, u, pl in xs)

    return ProfileState(
        myid=d["myid"],
        visibility=bool(d["visibility"]),
        wall=items(d["wall"]),
        inbox=items(d["inbox"]),
        photos=items(d["photos"]),
        likes=tuple(((place, int(uid)), frozenset(likers)) for place, uid, likers in d["likes"]),
        friends=frozenset(d["friends"]),
        pending=frozenset(d["pending"]),
        photo_views=frozenset((v, int(u)) for v, u in d["photo_views"]),
        friend_list_views=frozenset(d["friend_list_views"]),
    )


def network_to_json(s: NetworkState) -> dict:
    return {
        "accounts": sorted(s.installed),
        "profiles": {a: profile_to_json(p) for a, p in s.components},
    }


def network_from_json(d: dict) -> NetworkState:
    comps = tuple(sorted((a, profile_from_json(p)) for a, p in d["profiles"].items()))
    return NetworkState(frozenset(d["accounts"]), comps)
