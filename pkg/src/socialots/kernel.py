"""Generic observational transition system (OTS) machinery.

A behaviour bundles a :class:`Signature` with ``initial``, ``observe``,
``condition`` and ``effect``.  This module supplies what every behaviour
shares: sort checking, the stutter guard, bounded observational equivalence,
canonical digests and dynamic synchronized composition with projection.

Values are plain immutable Python objects checked against a :class:`Sort`:
``bool``, ``int``, ``str`` (identifiers and enumeration tags), ``frozenset``
(sets) and ``tuple`` (sequences and tuples).
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping, NamedTuple, Sequence

State = Any
Value = Any

KINDS = ("boolean", "natural", "identifier", "enumeration", "set", "sequence", "tuple")


class OtsError(Exception):
    """Base class for kernel errors."""


class SignatureError(OtsError, LookupError):
    """Unknown observer or transition name."""


class SortError(OtsError, TypeError):
    """An argument does not inhabit the declared sort."""


class BoundsError(OtsError, ValueError):
    """A finite domain is missing or malformed."""


@dataclass(frozen=True)
class Sort:
    name: str
    kind: str
    tags: tuple[str, ...] = ()
    args: tuple["Sort", ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown sort kind {self.kind!r}")
        if self.kind == "enumeration":
            if not self.tags:
                raise ValueError(f"enumeration sort {self.name!r} has no tags")
            if len(set(self.tags)) != len(self.tags):
                raise ValueError(f"enumeration sort {self.name!r} repeats a tag")
        if self.kind in ("set", "sequence") and len(self.args) != 1:
            raise ValueError(f"{self.kind} sort {self.name!r} needs one element sort")
        if self.kind == "tuple" and not self.args:
            raise ValueError(f"tuple sort {self.name!r} needs component sorts")

    def __str__(self):
        return self.name


def boolean(name: str = "bool") -> Sort:
    return Sort(name, "boolean")


def natural(name: str = "nat") -> Sort:
    return Sort(name, "natural")


def identifier(name: str) -> Sort:
    return Sort(name, "identifier")


def enumeration(name: str, tags: Sequence[str]) -> Sort:
    return Sort(name, "enumeration", tags=tuple(tags))


def set_of(elem: Sort, name: str | None = None) -> Sort:
    return Sort(name or f"set<{elem.name}>", "set", args=(elem,))


def sequence_of(elem: Sort, name: str | None = None) -> Sort:
    return Sort(name or f"seq<{elem.name}>", "sequence", args=(elem,))


def tuple_of(name: str, *elems: Sort) -> Sort:
    return Sort(name, "tuple", args=tuple(elems))


def is_well_sorted(sort: Sort, value: Value) -> bool:
    kind = sort.kind
    if kind == "boolean":
        return isinstance(value, bool)
    if kind == "natural":
        return isinstance(value, int) and not isinstance(value, bool) and value >= 0
    if kind == "identifier":
        return isinstance(value, str) and value != ""
    if kind == "enumeration":
        return isinstance(value, str) and value in sort.tags
    if kind == "set":
        return isinstance(value, frozenset) and all(is_well_sorted(sort.args[0], v) for v in value)
    if kind == "sequence":
        return isinstance(value, tuple) and all(is_well_sorted(sort.args[0], v) for v in value)
    return (
        isinstance(value, tuple)
        and len(value) == len(sort.args)
        and all(is_well_sorted(s, v) for s, v in zip(sort.args, value))
    )


def check_args(name: str, sorts: Sequence[Sort], args: Sequence[Value]) -> None:
    if len(args) != len(sorts):
        raise SortError(f"{name}: expected {len(sorts)} argument(s), got {len(args)}")
    for i, (sort, value) in enumerate(zip(sorts, args)):
        if not is_well_sorted(sort, value):
            raise SortError(f"{name}: argument {i} ({value!r}) is not of sort {sort.name}")


@dataclass(frozen=True)
class ObserverSpec:
    name: str
    params: tuple[Sort, ...]
    result: Sort


@dataclass(frozen=True)
class TransitionSpec:
    name: str
    params: tuple[Sort, ...]


@dataclass(frozen=True)
class Signature:
    observers: tuple[ObserverSpec, ...]
    transitions: tuple[TransitionSpec, ...]

    def __post_init__(self):
        obs = [o.name for o in self.observers]
        trs = [t.name for t in self.transitions]
        if len(set(obs)) != len(obs):
            raise ValueError("duplicate observer name")
        if len(set(trs)) != len(trs):
            raise ValueError("duplicate transition name")
        both = set(obs) & set(trs)
        if both:
            raise ValueError(f"names used as both observer and transition: {sorted(both)}")

    def observer(self, name: str) -> ObserverSpec:
        for o in self.observers:
            if o.name == name:
                return o
        raise SignatureError(f"unknown observer {name!r}")

    def transition(self, name: str) -> TransitionSpec:
        for t in self.transitions:
            if t.name == name:
                return t
        raise SignatureError(f"unknown transition {name!r}")


@dataclass(frozen=True)
class Bounds:
    """Finite per-sort domains plus structural size caps.

    ``domains`` maps a sort name to its ordered universe.  Booleans and
    enumerations fall back to their natural domain; tuple sorts are the
    product of their component domains.  The order given here drives every
    enumeration, digest and report.
    """

    domains: Mapping[str, tuple] = field(default_factory=dict)
    max_seq: int = 1
    max_set: int = 2

    def __post_init__(self):
        fixed = {}
        for name, dom in dict(self.domains).items():
            dom = tuple(dom)
            if not dom:
                raise BoundsError(f"domain for sort {name!r} is empty")
            if len(set(dom)) != len(dom):
                raise BoundsError(f"domain for sort {name!r} has duplicates")
            fixed[name] = dom
        object.__setattr__(self, "domains", fixed)
        if self.max_seq < 0 or self.max_set < 0:
            raise BoundsError("structural caps must be non-negative")

    def domain(self, sort: Sort) -> tuple:
        if sort.name in self.domains:
            return self.domains[sort.name]
        if sort.kind == "boolean":
            return (False, True)
        if sort.kind == "enumeration":
            return sort.tags
        if sort.kind == "tuple":
            return tuple(itertools.product(*(self.domain(s) for s in sort.args)))
        raise BoundsError(f"no finite domain for sort {sort.name!r}")

    def with_domains(self, **domains) -> "Bounds":
        merged = dict(self.domains)
        merged.update(domains)
        return Bounds(merged, self.max_seq, self.max_set)


def enumerate_instances(spec: ObserverSpec | TransitionSpec, b: Bounds) -> list[tuple]:
    return list(itertools.product(*(b.domain(s) for s in spec.params)))


class Ots:
    """Base behaviour.  Subclasses provide the four model hooks.

    ``apply`` is the stutter guard: the effect only runs when the effective
    condition holds, otherwise the pre-state itself is returned.
    """

    signature: Signature

    def initial(self, *params) -> State:
        raise NotImplementedError

    def observe(self, s: State, name: str, args: tuple) -> Value:
        raise NotImplementedError

    def condition(self, s: State, name: str, args: tuple) -> bool:
        raise NotImplementedError

    def effect(self, s: State, name: str, args: tuple) -> State:
        raise NotImplementedError

    def transition_spec(self, name: str) -> TransitionSpec:
        return self.signature.transition(name)

    def apply(self, s: State, name: str, args: tuple) -> tuple[State, bool]:
        if self.condition(s, name, args):
            return self.effect(s, name, args), True
        return s, False

    def observation_key(self, s: State, b: Bounds, cache: dict | None = None) -> tuple:
        return tuple(
            (o.name, tuple(self.observe(s, o.name, args) for args in enumerate_instances(o, b)))
            for o in self.signature.observers
        )


def observe(ots: Ots, s: State, obs: str, args: Sequence[Value] = ()) -> Value:
    spec = ots.signature.observer(obs)
    args = tuple(args)
    check_args(obs, spec.params, args)
    return ots.observe(s, obs, args)


def apply(ots: Ots, s: State, tr: str, args: Sequence[Value] = ()) -> tuple[State, bool]:
    spec = ots.transition_spec(tr)
    args = tuple(args)
    check_args(tr, spec.params, args)
    return ots.apply(s, tr, args)


def states_equivalent(ots: Ots, s1: State, s2: State, b: Bounds) -> bool:
    if s1 == s2:
        return True
    for o in ots.signature.observers:
        for args in enumerate_instances(o, b):
            if ots.observe(s1, o.name, args) != ots.observe(s2, o.name, args):
                return False
    return True


def to_jsonable(value: Value) -> Any:
    if isinstance(value, (bool, int, str)) or value is None:
        return value
    if isinstance(value, frozenset):
        items = [to_jsonable(v) for v in value]
        return sorted(items, key=lambda v: json.dumps(v, sort_keys=True))
    if isinstance(value, (tuple, list)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    raise TypeError(f"cannot serialise {value!r}")


def observation_key(ots: Ots, s: State, b: Bounds, cache: dict | None = None) -> tuple:
    """Hashable canonical key; equal keys iff ``states_equivalent`` over ``b``."""
    return ots.observation_key(s, b, cache)


def observation_digest(ots: Ots, s: State, b: Bounds, cache: dict | None = None) -> str:
    key = observation_key(ots, s, b, cache)
    text = json.dumps(to_jsonable(key), separators=(",", ":"), sort_keys=True)
    return hashlib.sha256(text.encode()).hexdigest()[:32]


# -- composition -------------------------------------------------------------


class CompositeState(NamedTuple):
    installed: frozenset
    components: tuple  # ((component id, state), ...) sorted by id

    def component(self, cid):
        for k, v in self.components:
            if k == cid:
                return v
        raise KeyError(cid)


@dataclass(frozen=True)
class ComponentCall:
    """One component update inside a compound transition.

    ``target`` is the position of the compound argument naming the
    component; ``args`` maps compound arguments to the component call.  A
    non-required call does not contribute to the compound condition and is
    itself stutter-guarded at the component level.
    """

    target: int
    transition: str
    args: Callable[[tuple], tuple]
    required: bool = True


@dataclass(frozen=True)
class SyncRule:
    name: str
    params: tuple[Sort, ...]
    installed: tuple[int, ...]
    calls: tuple[ComponentCall, ...]
    guard: Callable[[tuple], bool] | None = None


class CompositeOts(Ots):
    """Dynamic synchronized parallel composition of one component behaviour.

    Observers: the installed set plus every component observer lifted with a
    leading component id (it reads through :meth:`project`).  Transitions:
    the two special ones that install and remove components, plus one
    :class:`SyncRule` per compound action.
    """

    state_type = CompositeState

    def __init__(
        self,
        component: Ots,
        id_sort: Sort,
        rules: Iterable[SyncRule],
        *,
        installed_observer: str = "installed",
        add_name: str = "add",
        del_name: str = "del",
    ):
        self.component = component
        self.id_sort = id_sort
        self.rules = {r.name: r for r in rules}
        self.installed_observer = installed_observer
        self.add_name = add_name
        self.del_name = del_name
        lifted = tuple(
            ObserverSpec(o.name, (id_sort,) + o.params, o.result) for o in component.signature.observers
        )
        self._lifted = {o.name for o in lifted}
        self.signature = Signature(
            (ObserverSpec(installed_observer, (), set_of(id_sort)),) + lifted,
            (TransitionSpec(add_name, (id_sort,)), TransitionSpec(del_name, (id_sort,)))
            + tuple(TransitionSpec(r.name, r.params) for r in self.rules.values()),
        )

    def initial(self) -> CompositeState:
        return self.state_type(frozenset(), ())

    def project(self, s: CompositeState, cid) -> State:
        for k, v in s.components:
            if k == cid:
                return v
        return self.component.initial(cid)

    def install(self, s: CompositeState, cid) -> CompositeState:
        comps = tuple(sorted(s.components + ((cid, self.component.initial(cid)),)))
        return s._replace(installed=s.installed | {cid}, components=comps)

    def remove(self, s: CompositeState, cid) -> CompositeState:
        comps = tuple((k, v) for k, v in s.components if k != cid)
        return s._replace(installed=s.installed - {cid}, components=comps)

    def _replace_component(self, s: CompositeState, cid, new) -> CompositeState:
        return s._replace(components=tuple((k, new if k == cid else v) for k, v in s.components))

    def observe(self, s, name, args):
        if name == self.installed_observer:
            return s.installed
        if name in self._lifted:
            return self.component.observe(self.project(s, args[0]), name, args[1:])
        raise SignatureError(f"unknown observer {name!r}")

    def condition(self, s, name, args):
        if name == self.add_name:
            return args[0] not in s.installed
        if name == self.del_name:
            return args[0] in s.installed
        rule = self.rules.get(name)
        if rule is None:
            raise SignatureError(f"unknown transition {name!r}")
        if any(args[i] not in s.installed for i in rule.installed):
            return False
        if rule.guard is not None and not rule.guard(args):
            return False
        for call in rule.calls:
            if call.required and not self.component.condition(
                self.project(s, args[call.target]), call.transition, call.args(args)
            ):
                return False
        return True

    def effect(self, s, name, args):
        if name == self.add_name:
            return self.install(s, args[0])
        if name == self.del_name:
            return self.remove(s, args[0])
        for call in self.rules[name].calls:
            cid = args[call.target]
            new, applied = self.component.apply(self.project(s, cid), call.transition, call.args(args))
            if applied:
                s = self._replace_component(s, cid, new)
        return s

    def observation_key(self, s, b, cache=None):
        # compound observation = installed set + each component's own key
        keys = []
        for cid in b.domain(self.id_sort):
            comp = self.project(s, cid)
            if cache is None:
                keys.append(self.component.observation_key(comp, b))
            else:
                k = cache.get(comp)
                if k is None:
                    k = cache[comp] = self.component.observation_key(comp, b)
                keys.append(k)
        return (tuple(sorted(s.installed)), tuple(keys))


def project(ots: CompositeOts, cs: CompositeState, cid) -> State:
    return ots.project(cs, cid)


def install_component(ots: CompositeOts, cs: CompositeState, cid) -> CompositeState:
    return ots.install(cs, cid)


def remove_component(ots: CompositeOts, cs: CompositeState, cid) -> CompositeState:
    return ots.remove(cs, cid)
