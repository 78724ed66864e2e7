"""Columnar evaluation of transitions and predicates over many network states.

A :class:`Batch` stores, per account id, an installed flag and an index into
a shared :class:`ProfileTable`.  Component transitions and ground
predicates are tabulated once per distinct profile and then gathered with
numpy, so one transition instance costs a handful of array operations over
the whole universe.  Semantics mirror :class:`~socialots.kernel.CompositeOts`
exactly; the tests cross-check both paths state by state.
"""

from __future__ import annotations

import numpy as np

from . import lang
from .kernel import CompositeOts, enumerate_instances
from .lang import substitute
from .social import NetworkState, ProfileState


class ProfileTable:
    def __init__(self, ots):
        self.ots = ots
        self.entries: list[ProfileState] = []
        self.index: dict[ProfileState, int] = {}
        self._steps: dict = {}
        self._preds: dict = {}

    def intern(self, p: ProfileState) -> int:
        i = self.index.get(p)
        if i is None:
            i = self.index[p] = len(self.entries)
            self.entries.append(p)
        return i

    def step(self, name: str, args: tuple) -> tuple[np.ndarray, np.ndarray]:
        """(condition, result index) arrays covering the current table."""
        key = (name, args)
        cond, res = self._steps.get(key, ([], []))
        comp = self.ots
        i = len(cond)
        while i < len(self.entries):
            p = self.entries[i]
            ok = comp.condition(p, name, args)
            cond.append(ok)
            res.append(self.intern(comp.effect(p, name, args)) if ok else i)
            i += 1
        self._steps[key] = (cond, res)
        return np.array(cond, dtype=bool), np.array(res, dtype=np.int32)

    def predicate(self, pred) -> np.ndarray:
        """Truth of a ground single-owner predicate on every table entry."""
        vals = self._preds.setdefault(pred, [])
        for p in self.entries[len(vals):]:
            vals.append(profile_truth(pred, p))
        return np.array(vals, dtype=bool)


def profile_truth(pred, p: ProfileState) -> bool:
    if isinstance(pred, lang.Implies):
        return (not profile_truth(pred.left, p)) or profile_truth(pred.right, p)
    if isinstance(pred, lang.Or):
        return profile_truth(pred.left, p) or profile_truth(pred.right, p)
    if isinstance(pred, lang.And):
        return profile_truth(pred.left, p) and profile_truth(pred.right, p)
    if isinstance(pred, lang.Not):
        return not profile_truth(pred.expr, p)
    if isinstance(pred, lang.Visibility):
        return p.visibility
    if isinstance(pred, lang.InFriends):
        return pred.who.name in p.friends
    if isinstance(pred, lang.InPending):
        return pred.who.name in p.pending
    if isinstance(pred, lang.InLikes):
        return pred.who.name in p.likeset(pred.uid.value, pred.place)
    if isinstance(pred, lang.ViewedPhoto):
        return (pred.viewer.name, pred.photo.value) in p.photo_views
    if isinstance(pred, lang.ViewedFriends):
        return pred.viewer.name in p.friend_list_views
    if isinstance(pred, lang.MyIdIs):
        return p.myid == pred.who.name
    raise TypeError(f"not a profile predicate: {pred!r}")


def single_owner(pred) -> str | None:
    """The one account a ground predicate reads, if it reads only one profile."""
    owners = set()
    for a in lang.atoms(pred):
        if isinstance(a, lang.InAccounts):
            return None
        owners.add(a.owner.name)
    return owners.pop() if len(owners) == 1 else None


class Batch:
    def __init__(self, net: CompositeOts, table: ProfileTable, acc: dict, prof: dict, size: int):
        self.net = net
        self.table = table
        self.acc = acc
        self.prof = prof
        self.size = size

    @classmethod
    def from_universe(cls, net, b, per_profile: dict, subsets) -> "Batch":
        table = ProfileTable(net.component)
        ids = b.domains["account"]
        init = {a: table.intern(net.component.initial(a)) for a in ids}
        idx = {a: np.array([table.intern(p) for p in per_profile[a]], dtype=np.int32) for a in ids}
        acc = {a: [] for a in ids}
        prof = {a: [] for a in ids}
        total = 0
        for sub in subsets:
            shape = tuple(len(per_profile[a]) for a in sub)
            n = int(np.prod(shape)) if sub else 1
            coords = np.unravel_index(np.arange(n), shape) if sub else ()
            for a in ids:
                if a in sub:
                    acc[a].append(np.ones(n, dtype=bool))
                    prof[a].append(idx[a][coords[sub.index(a)]])
                else:
                    acc[a].append(np.zeros(n, dtype=bool))
                    prof[a].append(np.full(n, init[a], dtype=np.int32))
            total += n
        return cls(
            net,
            table,
            {a: np.concatenate(v) for a, v in acc.items()},
            {a: np.concatenate(v) for a, v in prof.items()},
            total,
        )

    @classmethod
    def from_states(cls, net, ids, states) -> "Batch":
        table = ProfileTable(net.component)
        states = list(states)
        acc = {a: np.array([a in s.installed for s in states], dtype=bool) for a in ids}
        prof = {
            a: np.array([table.intern(net.project(s, a)) for s in states], dtype=np.int32) for a in ids
        }
        return cls(net, table, acc, prof, len(states))

    def state(self, i: int) -> NetworkState:
        comps = tuple(
            sorted((a, self.table.entries[self.prof[a][i]]) for a in self.acc if self.acc[a][i])
        )
        return NetworkState(frozenset(a for a, _ in comps), comps)

    def _owner(self, a) -> np.ndarray:
        if a not in self.prof:
            i = self.table.intern(self.net.component.initial(a))
            self.prof[a] = np.full(self.size, i, dtype=np.int32)
            self.acc[a] = np.zeros(self.size, dtype=bool)
        return self.prof[a]

    def _installed(self, a) -> np.ndarray:
        self._owner(a)
        return self.acc[a]

    # transitions

    def apply(self, name: str, args: tuple) -> tuple[np.ndarray, "Batch"]:
        net = self.net
        acc, prof = dict(self.acc), dict(self.prof)
        if name in (net.add_name, net.del_name):
            a = args[0]
            self._owner(a)
            init = self.table.intern(net.component.initial(a))
            if name == net.add_name:
                cond = ~self.acc[a]
                acc[a] = self.acc[a] | cond
            else:
                cond = self.acc[a].copy()
                acc[a] = self.acc[a] & ~cond
            prof[a] = np.where(cond, init, self.prof[a]).astype(np.int32)
            return cond, Batch(net, self.table, acc, prof, self.size)

        rule = net.rules[name]
        cond = np.ones(self.size, dtype=bool)
        for i in rule.installed:
            cond &= self._installed(args[i])
        if rule.guard is not None and not rule.guard(args):
            cond[:] = False
        for call in rule.calls:
            if call.required:
                ok, _ = self.table.step(call.transition, call.args(args))
                cond &= ok[self._owner(args[call.target])]
        for call in rule.calls:
            a = args[call.target]
            cur = prof.get(a, self._owner(a))
            ok, res = self.table.step(call.transition, call.args(args))
            prof[a] = np.where(cond & ok[cur], res[cur], cur).astype(np.int32)
        return cond, Batch(net, self.table, acc, prof, self.size)

    # predicates

    def truth(self, pred) -> np.ndarray:
        """Vector of truth values of a ground predicate."""
        owner = single_owner(pred)
        if owner is not None:
            idx = self._owner(owner)
            return self.table.predicate(pred)[idx]
        if isinstance(pred, lang.Implies):
            return ~self.truth(pred.left) | self.truth(pred.right)
        if isinstance(pred, lang.Or):
            return self.truth(pred.left) | self.truth(pred.right)
        if isinstance(pred, lang.And):
            return self.truth(pred.left) & self.truth(pred.right)
        if isinstance(pred, lang.Not):
            return ~self.truth(pred.expr)
        if isinstance(pred, lang.InAccounts):
            return self._installed(pred.who.name).copy()
        raise TypeError(f"not a predicate: {pred!r}")

    def eval(self, d, env: dict) -> np.ndarray:
        return self.truth(substitute(d.body, env))


def all_instances(net, b):
    for spec in net.signature.transitions:
        for args in enumerate_instances(spec, b):
            yield spec.name, args
