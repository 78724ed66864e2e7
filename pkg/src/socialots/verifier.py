"""Bounded verification of network invariants.

Four checks mirror the proof-score method at desk scale:

* :func:`check_base` evaluates an invariant in the initial network;
* :func:`explore` searches every reachable state breadth first;
* :func:`check_step` checks the inductive step over an arbitrary-state
  universe, with lemma hypotheses and per-transition case tallies;
* :func:`check_stutter` checks that disabled transitions leave the state
  observationally unchanged.

Violations carry a :class:`ReachTrace` or :class:`InductionPair` that
:func:`replay` re-executes.
"""

from __future__ import annotations

import dataclasses
import itertools
import json
import time
from collections import deque
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Sequence

from . import lang
from .batch import Batch, all_instances
from .kernel import (
    Bounds,
    OtsError,
    SignatureError,
    observation_digest,
    states_equivalent,
    to_jsonable,
)
from .lang import (
    InAccounts,
    InFriends,
    InvariantDef,
    Implies,
    LemmaDef,
    MyIdIs,
    Not,
    Or,
    Param,
    ViewedFriends,
    ViewedPhoto,
    Visibility,
    eval_predicate,
    substitute,
)
from .social import (
    CONTENT,
    ConfigError,
    ContentItem,
    NetworkState,
    SocialNetwork,
    network_from_json,
    network_to_json,
    social_bounds,
    within_caps,
)
from .universe import DEFAULT_MAX_STATES, account_subsets, check_universe_size, profile_universe

SCHEMA = 1


class InvalidDefinition(OtsError, ValueError):
    pass


class ReplayError(OtsError):
    """The counterexample does not fit the model (unknown transition, bad schema...)."""


# -- definitions -----------------------------------------------------------------


def _p(name):
    return Param(name)


def _compiled_builtins() -> list[InvariantDef]:
    a1, a2, pi, a = _p("a1"), _p("a2"), _p("pi"), _p("a")
    hidden_from = Or(Not(Visibility(a1)), Not(InFriends(a2, a1)))
    return [
        InvariantDef(
            "inv1",
            (("a1", "account"), ("a2", "account"), ("pi", "nat")),
            Implies(hidden_from, Not(ViewedPhoto(a1, a2, pi))),
        ),
        InvariantDef(
            "inv2",
            (("a1", "account"), ("a2", "account")),
            Implies(hidden_from, Not(ViewedFriends(a1, a2))),
        ),
        LemmaDef("L1", (("a", "account"),), Implies(InAccounts(a), MyIdIs(a, a))),
    ]


def data_text(name: str) -> str:
    return resources.files("socialots").joinpath("data").joinpath(name).read_text(encoding="utf-8")


_BUILTINS: dict[str, InvariantDef] | None = None


def builtin_definitions() -> dict[str, InvariantDef]:
    """Built-in definitions, parsed from the bundled file and checked against the compiled copies."""
    global _BUILTINS
    if _BUILTINS is None:
        parsed = lang.parse_invariant_file(data_text("builtin.inv"))
        compiled = _compiled_builtins()
        if parsed != compiled:
            raise RuntimeError("bundled builtin.inv disagrees with the compiled-in definitions")
        _BUILTINS = {d.name: d for d in compiled}
    return dict(_BUILTINS)


def validate_definition(d: InvariantDef) -> None:
    sorts = dict(d.params)
    if len(sorts) != len(d.params):
        raise InvalidDefinition(f"{d.name}: duplicate parameter")
    for n, s in d.params:
        if s not in lang.PARAM_SORTS:
            raise InvalidDefinition(f"{d.name}: parameter {n} has unknown sort {s!r}")

    def need(e, sort):
        if isinstance(e, Param):
            if e.name not in sorts:
                raise InvalidDefinition(f"{d.name}: undeclared parameter {e.name!r}")
            if sorts[e.name] != sort:
                raise InvalidDefinition(f"{d.name}: parameter {e.name!r} used as {sort}")
        elif sort == "account" and not isinstance(e, lang.IdLit):
            raise InvalidDefinition(f"{d.name}: {e!r} is not an account expression")
        elif sort == "nat" and not isinstance(e, lang.NatLit):
            raise InvalidDefinition(f"{d.name}: {e!r} is not a natural expression")

    for atom in lang.atoms(d.body):
        if not isinstance(atom, lang.ATOMS):
            raise InvalidDefinition(f"{d.name}: unknown atom {atom!r}")
        for name, value in vars(atom).items():
            if name in ("uid", "photo"):
                need(value, "nat")
            elif name == "place":
                if value not in lang.PLACEHOLDERS:
                    raise InvalidDefinition(f"{d.name}: unknown placeholder {value!r}")
            else:
                need(value, "account")


def instantiations(d: InvariantDef, b: Bounds) -> list[dict]:
    doms = [b.domains["account"] if s == "account" else b.domains["nat"] for _, s in d.params]
    return [dict(zip(d.param_names, combo)) for combo in itertools.product(*doms)]


# -- counterexamples -------------------------------------------------------------


def bounds_to_json(b: Bounds) -> dict:
    return {
        "accounts": list(b.domains["account"]),
        "uids": list(b.domains["nat"]),
        "payloads": list(b.domains["payload"]),
        "placeholders": list(b.domains["placeholder"]),
        "max_seq": b.max_seq,
        "max_set": b.max_set,
    }


def bounds_from_json(d: dict) -> Bounds:
    return social_bounds(
        d["accounts"], d["uids"], d["payloads"], d["placeholders"], d["max_seq"], d["max_set"]
    )


def args_from_json(net: SocialNetwork, name: str, args: list) -> tuple:
    spec = net.transition_spec(name)
    if len(args) != len(spec.params):
        raise ReplayError(f"{name}: expected {len(spec.params)} arguments")
    return tuple(
        ContentItem(*a) if s == CONTENT else a for s, a in zip(spec.params, args)
    )


@dataclass(frozen=True)
class TraceStep:
    transition: str
    args: tuple
    applied: bool
    digest: str

    def to_json(self):
        return {
            "transition": self.transition,
            "args": to_jsonable(self.args),
            "applied": self.applied,
            "digest": self.digest,
        }


@dataclass(frozen=True)
class ReachTrace:
    invariant: InvariantDef
    env: dict
    steps: tuple[TraceStep, ...]
    bounds: Bounds
    default_visibility: bool = True
    extensions: frozenset = frozenset()
    initial_digest: str = ""

    kind = "reach"

    def __len__(self):
        return len(self.steps)

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA,
            "kind": self.kind,
            "invariant": _def_json(self.invariant),
            "instantiation": to_jsonable(self.env),
            "model": _model_json(self.default_visibility, self.extensions),
            "bounds": bounds_to_json(self.bounds),
            "initial": self.initial_digest,
            "steps": [s.to_json() for s in self.steps],
        }


@dataclass(frozen=True)
class InductionPair:
    invariant: InvariantDef
    env: dict
    pre_state: NetworkState
    transition: str
    args: tuple
    lemmas: tuple[InvariantDef, ...]
    bounds: Bounds
    default_visibility: bool = True
    extensions: frozenset = frozenset()

    kind = "induction"

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA,
            "kind": self.kind,
            "invariant": _def_json(self.invariant),
            "instantiation": to_jsonable(self.env),
            "model": _model_json(self.default_visibility, self.extensions),
            "bounds": bounds_to_json(self.bounds),
            "pre_state": network_to_json(self.pre_state),
            "transition": {"transition": self.transition, "args": to_jsonable(self.args)},
            "lemmas": [_def_json(d) for d in self.lemmas],
        }


@dataclass(frozen=True)
class StutterWitness:
    """A reachable state where a disabled transition changed observations."""

    pre_state: NetworkState
    transition: str
    args: tuple
    bounds: Bounds

    kind = "stutter"

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA,
            "kind": self.kind,
            "bounds": bounds_to_json(self.bounds),
            "pre_state": network_to_json(self.pre_state),
            "transition": {"transition": self.transition, "args": to_jsonable(self.args)},
        }


def _def_json(d: InvariantDef) -> dict:
    return {"name": d.name, "kind": d.kind, "text": lang.print_definition(d)}


def _model_json(default_visibility, extensions) -> dict:
    return {"default_visibility": default_visibility, "extensions": sorted(extensions)}


def _def_from_json(d: dict) -> InvariantDef:
    try:
        (parsed,) = lang.parse_invariant_file(d["text"])
    except (lang.ParseError, ValueError) as exc:
        raise ReplayError(f"bad definition text: {exc}") from None
    if parsed.name != d["name"]:
        raise ReplayError("definition name does not match its text")
    return parsed


def counterexample_from_json(d: dict):
    if not isinstance(d, dict) or d.get("schema") != SCHEMA:
        raise ReplayError(f"unsupported counterexample schema {d.get('schema') if isinstance(d, dict) else d!r}")
    try:
        kind = d["kind"]
        if kind == "stutter":
            raise ReplayError("stutter witnesses are tied to an in-memory model")
        inv = _def_from_json(d["invariant"])
        model = d["model"]
        extensions = frozenset(model["extensions"])
        net = SocialNetwork(bool(model["default_visibility"]), extensions)
        b = bounds_from_json(d["bounds"])
        env = dict(d["instantiation"])
        if kind == "reach":
            steps = tuple(
                TraceStep(
                    st["transition"],
                    args_from_json(net, st["transition"], st["args"]),
                    bool(st["applied"]),
                    st["digest"],
                )
                for st in d["steps"]
            )
            return ReachTrace(inv, env, steps, b, net.default_visibility, extensions, d["initial"])
        if kind == "induction":
            tr = d["transition"]
            return InductionPair(
                inv,
                env,
                network_from_json(d["pre_state"]),
                tr["transition"],
                args_from_json(net, tr["transition"], tr["args"]),
                tuple(_def_from_json(x) for x in d["lemmas"]),
                b,
                net.default_visibility,
                extensions,
            )
    except (KeyError, TypeError, SignatureError, ConfigError, OtsError) as exc:
        if isinstance(exc, ReplayError):
            raise
        raise ReplayError(f"malformed counterexample: {exc}") from None
    raise ReplayError(f"unknown counterexample kind {kind!r}")


def _net_for(ce, net=None) -> SocialNetwork:
    if net is not None:
        return net
    return SocialNetwork(ce.default_visibility, ce.extensions)


def replay(ce, net: SocialNetwork | None = None) -> bool:
    """Re-execute a witness; true iff the recorded violation reproduces."""
    net = _net_for(ce, net) if not isinstance(ce, StutterWitness) else net or SocialNetwork()
    if isinstance(ce, StutterWitness):
        s = ce.pre_state
        if net.condition(s, ce.transition, ce.args):
            return False
        after, _ = net.apply(s, ce.transition, ce.args)
        return not states_equivalent(net, after, s, ce.bounds)
    if isinstance(ce, InductionPair):
        s = ce.pre_state
        for lem in ce.lemmas:
            if not all(eval_predicate(lem.body, s, env, net) for env in instantiations(lem, ce.bounds)):
                return False
        if not eval_predicate(ce.invariant.body, s, ce.env, net):
            return False
        try:
            after, _ = net.apply(s, ce.transition, ce.args)
        except (SignatureError, ConfigError) as exc:
            raise ReplayError(str(exc)) from None
        return not eval_predicate(ce.invariant.body, after, ce.env, net)
    cache: dict = {}
    s = net.initial()
    if ce.initial_digest and observation_digest(net, s, ce.bounds, cache) != ce.initial_digest:
        return False
    for st in ce.steps:
        try:
            s, applied = net.apply(s, st.transition, st.args)
        except (SignatureError, ConfigError) as exc:
            raise ReplayError(str(exc)) from None
        if applied != st.applied or observation_digest(net, s, ce.bounds, cache) != st.digest:
            return False
    return not eval_predicate(ce.invariant.body, s, ce.env, net)


def _rebuild(ce: ReachTrace, calls: Sequence[tuple[str, tuple]], net: SocialNetwork) -> ReachTrace:
    cache: dict = {}
    s = net.initial()
    steps = []
    for name, args in calls:
        s, applied = net.apply(s, name, args)
        steps.append(TraceStep(name, args, applied, observation_digest(net, s, ce.bounds, cache)))
    return ReachTrace(
        ce.invariant,
        ce.env,
        tuple(steps),
        ce.bounds,
        ce.default_visibility,
        ce.extensions,
        observation_digest(net, net.initial(), ce.bounds, cache),
    )


def shrink(ce: ReachTrace, net: SocialNetwork | None = None) -> ReachTrace:
    """Greedily drop steps while the violation still reproduces."""
    net = _net_for(ce, net)
    calls = [(s.transition, s.args) for s in ce.steps]
    best = _rebuild(ce, calls, net)
    progress = True
    while progress:
        progress = False
        for i in range(len(calls)):
            cand = calls[:i] + calls[i + 1 :]
            trial = _rebuild(ce, cand, net)
            if replay(trial, net):
                calls, best, progress = cand, trial, True
                break
    return best


# -- reports ---------------------------------------------------------------------


@dataclass
class Verdict:
    invariant: str
    kind: str
    verdict: str  # holds | violated | vacuous
    counterexample: object | None = None
    transitions: list[dict] | None = None
    checks: list[str] = field(default_factory=list)
    required_lemmas: tuple[str, ...] | None = None

    def to_json(self) -> dict:
        d = {"invariant": self.invariant, "kind": self.kind, "verdict": self.verdict}
        if self.checks:
            d["checks"] = list(self.checks)
        if self.required_lemmas is not None:
            d["required_lemmas"] = list(self.required_lemmas)
        if self.counterexample is not None:
            d["counterexample"] = self.counterexample.to_json()
        if self.transitions is not None:
            d["transitions"] = self.transitions
        return d


@dataclass
class Report:
    mode: str
    bounds: Bounds
    verdicts: list[Verdict]
    stats: dict
    default_visibility: bool = True
    extensions: frozenset = frozenset()
    lemmas: tuple[str, ...] = ()
    max_accounts: int | None = None
    complete: bool = True

    @property
    def ok(self) -> bool:
        return self.complete and all(v.verdict != "violated" for v in self.verdicts)

    def verdict(self, name: str) -> Verdict:
        for v in self.verdicts:
            if v.invariant == name:
                return v
        raise KeyError(name)

    def to_json(self, canonical: bool = False) -> dict:
        stats = {k: self.stats.get(k, 0) for k in ("states", "edges", "instances", "millis")}
        if canonical:
            del stats["millis"]
        for k, v in sorted(self.stats.items()):
            if k not in stats and k != "millis":
                stats[k] = v
        caps = {"seq": self.bounds.max_seq, "set": self.bounds.max_set}
        if self.max_accounts is not None:
            caps["accounts"] = self.max_accounts
        return {
            "schema": SCHEMA,
            "mode": self.mode,
            "bounds": {
                "accounts": list(self.bounds.domains["account"]),
                "uids": list(self.bounds.domains["nat"]),
                "payloads": list(self.bounds.domains["payload"]),
                "placeholders": list(self.bounds.domains["placeholder"]),
            },
            "caps": caps,
            "model": _model_json(self.default_visibility, self.extensions),
            "complete": self.complete,
            "lemmas": list(self.lemmas),
            "verdicts": [v.to_json() for v in self.verdicts],
            "stats": stats,
        }

    def canonical_json(self) -> str:
        return json.dumps(self.to_json(canonical=True), sort_keys=True, separators=(",", ":"))

    def format(self) -> str:
        lines = [f"mode {self.mode}: {'OK' if self.ok else 'FAILED'}"]
        b = self.bounds
        lines.append(
            f"  bounds accounts={','.join(b.domains['account'])} uids={','.join(map(str, b.domains['nat']))}"
            f" placeholders={','.join(b.domains['placeholder'])} caps seq={b.max_seq} set={b.max_set}"
        )
        if not self.complete:
            lines.append("  INCOMPLETE: state limit reached")
        if self.lemmas:
            lines.append(f"  lemma hypotheses: {', '.join(self.lemmas)}")
        for v in self.verdicts:
            lines.append(f"  {v.kind} {v.invariant}: {v.verdict}")
            if v.required_lemmas is not None:
                lines.append(f"    lemmas needed: {', '.join(v.required_lemmas) or 'none'}")
            for t in v.transitions or ():
                lines.append(
                    f"    {t['transition']:<16} cases={t['cases']:<10} c-true={t['cond_true']:<9}"
                    f" c-false={t['cond_false']:<10} hyp={t['hypothesis']:<9} violations={t['violations']}"
                )
            ce = v.counterexample
            if isinstance(ce, ReachTrace):
                env = ", ".join(f"{k}={val}" for k, val in ce.env.items())
                lines.append(f"    counterexample ({len(ce)} steps) at {env}:")
                for st in ce.steps:
                    lines.append(f"      {lang.print_call(lang.Call(st.transition, st.args))}")
            elif isinstance(ce, InductionPair):
                env = ", ".join(f"{k}={val}" for k, val in ce.env.items())
                call = lang.print_call(lang.Call(ce.transition, ce.args))
                lines.append(f"    induction step fails for {call} at {env}")
                lines.append(f"      pre-state: {json.dumps(network_to_json(ce.pre_state), sort_keys=True)}")
            elif isinstance(ce, StutterWitness):
                call = lang.print_call(lang.Call(ce.transition, ce.args))
                lines.append(f"    {call} changed a state although disabled")
        s = self.stats
        lines.append(
            f"  stats states={s.get('states', 0)} edges={s.get('edges', 0)}"
            f" instances={s.get('instances', 0)} millis={s.get('millis', 0)}"
        )
        return "\n".join(lines)


def merge_reports(mode: str, reports: Sequence[Report]) -> Report:
    """Fold base/step/lemma reports into one, one verdict per definition."""
    verdicts: dict[str, Verdict] = {}
    stats: dict = {}
    for r in reports:
        for v in r.verdicts:
            cur = verdicts.get(v.invariant)
            if cur is None:
                verdicts[v.invariant] = Verdict(v.invariant, v.kind, v.verdict, v.counterexample,
                                                v.transitions, [r.mode])
                continue
            cur.checks.append(r.mode)
            if cur.verdict != "violated" and v.verdict == "violated":
                cur.verdict, cur.counterexample = "violated", v.counterexample
            elif cur.verdict == "vacuous" and v.verdict == "holds":
                cur.verdict = "holds"
            if v.transitions is not None:
                cur.transitions = v.transitions
            if v.required_lemmas is not None:
                cur.required_lemmas = v.required_lemmas
        for k, val in r.stats.items():
            stats[k] = max(stats.get(k, 0), val) if k != "millis" else stats.get(k, 0) + val
    last = reports[-1]
    lemmas = tuple(dict.fromkeys(x for r in reports for x in r.lemmas))
    return Report(
        mode,
        last.bounds,
        list(verdicts.values()),
        stats,
        last.default_visibility,
        last.extensions,
        lemmas,
        last.max_accounts,
        all(r.complete for r in reports),
    )


# -- evaluation helpers ----------------------------------------------------------


class _Evaluator:
    """Predicate evaluation with a per-profile cache for single-owner instances."""

    def __init__(self, net: SocialNetwork):
        self.net = net
        self._ground: dict = {}
        self._cache: dict = {}

    def _prepare(self, pred, env):
        key = (pred, tuple(env.items()))
        g = self._ground.get(key)
        if g is None:
            from .batch import single_owner

            ground = substitute(pred, env)
            g = self._ground[key] = (ground, single_owner(ground))
        return g

    def holds(self, pred, env: dict, s) -> bool:
        ground, owner = self._prepare(pred, env)
        if owner is None:
            return eval_predicate(ground, s, {}, self.net)
        p = self.net.project(s, owner)
        k = (ground, p)
        v = self._cache.get(k)
        if v is None:
            from .batch import profile_truth

            v = self._cache[k] = profile_truth(ground, p)
        return v


def _antecedent(d: InvariantDef):
    return d.body.left if isinstance(d.body, Implies) else None


def _millis(t0: float) -> int:
    return int(round((time.perf_counter() - t0) * 1000))


# -- checks ----------------------------------------------------------------------


def check_base(
    inv: InvariantDef | Sequence[InvariantDef],
    b: Bounds,
    default_visibility: bool = True,
    extensions: Iterable[str] = (),
    net: SocialNetwork | None = None,
) -> Report:
    t0 = time.perf_counter()
    invs = [inv] if isinstance(inv, InvariantDef) else list(inv)
    net = net or SocialNetwork(default_visibility, extensions)
    s0 = net.initial()
    verdicts = []
    checked = 0
    for d in invs:
        validate_definition(d)
        envs = instantiations(d, b)
        checked += len(envs)
        bad = next((e for e in envs if not eval_predicate(d.body, s0, e, net)), None)
        if bad is not None:
            trace = _rebuild(
                ReachTrace(d, bad, (), b, net.default_visibility, net.extensions), [], net
            )
            verdicts.append(Verdict(d.name, d.kind, "violated", trace))
            continue
        ante = _antecedent(d)
        vacuous = ante is not None and not any(eval_predicate(ante, s0, e, net) for e in envs)
        verdicts.append(Verdict(d.name, d.kind, "vacuous" if vacuous else "holds"))
    stats = {"states": 1, "edges": 0, "instances": checked, "millis": _millis(t0)}
    return Report("base", b, verdicts, stats, net.default_visibility, net.extensions)


def _bfs(net, b, max_states, visit=None, stop=None):
    """Breadth-first search over applied, within-cap successors.

    Yields nothing; calls ``visit(state, key)`` on every new state.  Returns
    (parents, edges, capped, complete).
    """
    cache: dict = {}
    instances = list(all_instances(net, b))
    s0 = net.initial()
    k0 = net.observation_key(s0, b, cache)
    parents = {k0: None}
    queue = deque([(k0, s0)])
    edges = capped = 0
    complete = True
    if visit:
        visit(s0, k0)
    while queue:
        if stop and stop():
            break
        k, s = queue.popleft()
        for name, args in instances:
            t, applied = net.apply(s, name, args)
            if not applied:
                continue
            if not within_caps(t, b):
                capped += 1
                continue
            edges += 1
            kt = net.observation_key(t, b, cache)
            if kt in parents:
                continue
            if len(parents) >= max_states:
                complete = False
                queue.clear()
                break
            parents[kt] = (k, name, args)
            queue.append((kt, t))
            if visit:
                visit(t, kt)
                if stop and stop():
                    queue.clear()
                    break
    return parents, edges, capped, complete, len(instances)


def _path(parents, key) -> list[tuple[str, tuple]]:
    calls = []
    while parents[key] is not None:
        key, name, args = parents[key]
        calls.append((name, args))
    return calls[::-1]


def explore(
    b: Bounds,
    invs: Sequence[InvariantDef],
    extensions: Iterable[str] = (),
    default_visibility: bool = True,
    max_states: int = DEFAULT_MAX_STATES,
    net: SocialNetwork | None = None,
) -> Report:
    """Exhaustive BFS from the initial network; shortest violation first."""
    t0 = time.perf_counter()
    net = net or SocialNetwork(default_visibility, extensions)
    invs = list(invs)
    for d in invs:
        validate_definition(d)
    ev = _Evaluator(net)
    envs = {d.name: instantiations(d, b) for d in invs}
    ante = {d.name: _antecedent(d) for d in invs}
    live = {d.name: ante[d.name] is None for d in invs}
    found: dict[str, tuple] = {}

    def visit(s, k):
        for d in invs:
            if d.name in found:
                continue
            for env in envs[d.name]:
                if not ev.holds(d.body, env, s):
                    found[d.name] = (k, env)
                    break
                if not live[d.name] and ev.holds(ante[d.name], env, s):
                    live[d.name] = True

    parents, edges, capped, complete, n_inst = _bfs(
        net, b, max_states, visit, stop=lambda: bool(invs) and len(found) == len(invs)
    )
    verdicts = []
    for d in invs:
        if d.name in found:
            key, env = found[d.name]
            base = ReachTrace(d, env, (), b, net.default_visibility, net.extensions)
            verdicts.append(Verdict(d.name, d.kind, "violated", _rebuild(base, _path(parents, key), net)))
        else:
            verdicts.append(Verdict(d.name, d.kind, "holds" if live[d.name] else "vacuous"))
    stats = {
        "states": len(parents),
        "edges": edges,
        "instances": n_inst,
        "capped": capped,
        "millis": _millis(t0),
    }
    return Report("reach", b, verdicts, stats, net.default_visibility, net.extensions, (), None, complete)


def reachable_states(b: Bounds, net: SocialNetwork, max_states: int = DEFAULT_MAX_STATES) -> list:
    seen = []
    _bfs(net, b, max_states, lambda s, k: seen.append(s))
    return seen


class StepChecker:
    """Inductive-step checking over one enumerated universe, reused across invariants."""

    def __init__(
        self,
        b: Bounds,
        net: SocialNetwork | None = None,
        max_accounts: int | None = None,
        max_states: int = DEFAULT_MAX_STATES,
    ):
        self.b = b
        self.net = net or SocialNetwork()
        self.max_accounts = max_accounts
        self.size = check_universe_size(b, max_accounts, max_states)
        per = {a: profile_universe(a, b) for a in b.domains["account"]}
        self.universe = Batch.from_universe(self.net, b, per, account_subsets(b, max_accounts))
        self._posts = None
        self._hyp: dict = {}
        self._verdicts: dict = {}

    def _post_batches(self):
        if self._posts is None:
            self._posts = []
            for name, args in all_instances(self.net, self.b):
                cond, post = self.universe.apply(name, args)
                self._posts.append((name, args, cond, int(cond.sum()), post))
        return self._posts

    def hypothesis(self, lemmas: Sequence[InvariantDef]):
        key = tuple(lemmas)
        if key not in self._hyp:
            import numpy as np

            h = np.ones(self.universe.size, dtype=bool)
            for lem in lemmas:
                validate_definition(lem)
                for env in instantiations(lem, self.b):
                    h &= self.universe.eval(lem, env)
            self._hyp[key] = h
        return self._hyp[key]

    def check(self, inv: InvariantDef, lemmas: Sequence[InvariantDef] = ()) -> Verdict:
        key = (inv, tuple(lemmas))
        if key not in self._verdicts:
            self._verdicts[key] = self._check(inv, tuple(lemmas))
        return dataclasses.replace(self._verdicts[key], checks=[])

    def _check(self, inv: InvariantDef, lemmas: tuple) -> Verdict:
        validate_definition(inv)
        n = self.universe.size
        hyp = self.hypothesis(lemmas)
        envs = instantiations(inv, self.b)
        premise = [hyp & self.universe.eval(inv, env) for env in envs]
        premise_counts = [int(p.sum()) for p in premise]
        tallies: dict[str, dict] = {}
        first = None
        for name, args, cond, n_true, post in self._post_batches():
            t = tallies.setdefault(
                name,
                {
                    "transition": name,
                    "instances": 0,
                    "cases": 0,
                    "cond_true": 0,
                    "cond_false": 0,
                    "hypothesis": 0,
                    "hypothesis_cond_true": 0,
                    "violations": 0,
                    "violations_cond_false": 0,
                },
            )
            t["instances"] += 1
            for env, prem, n_prem in zip(envs, premise, premise_counts):
                t["cases"] += n
                t["cond_true"] += n_true
                t["cond_false"] += n - n_true
                t["hypothesis"] += n_prem
                t["hypothesis_cond_true"] += int((prem & cond).sum())
                bad = prem & ~post.eval(inv, env)
                nb = int(bad.sum())
                if nb:
                    t["violations"] += nb
                    t["violations_cond_false"] += int((bad & ~cond).sum())
                    if first is None:
                        i = int(bad.argmax())
                        first = InductionPair(
                            inv,
                            env,
                            self.universe.state(i),
                            name,
                            args,
                            lemmas,
                            self.b,
                            self.net.default_visibility,
                            self.net.extensions,
                        )
        verdict = "violated" if first is not None else "holds"
        return Verdict(inv.name, inv.kind, verdict, first, list(tallies.values()))

    def report(self, verdicts, lemmas, t0) -> Report:
        posts = self._post_batches()
        stats = {
            "states": self.universe.size,
            "edges": sum(p[3] for p in posts),
            "instances": len(posts),
            "millis": _millis(t0),
        }
        return Report(
            "induct",
            self.b,
            verdicts,
            stats,
            self.net.default_visibility,
            self.net.extensions,
            tuple(d.name for d in lemmas),
            self.max_accounts,
        )


def check_step(
    inv: InvariantDef | Sequence[InvariantDef],
    lemmas: Sequence[InvariantDef],
    b: Bounds,
    max_accounts: int | None = None,
    default_visibility: bool = True,
    extensions: Iterable[str] = (),
    max_states: int = DEFAULT_MAX_STATES,
    net: SocialNetwork | None = None,
    checker: StepChecker | None = None,
) -> Report:
    t0 = time.perf_counter()
    invs = [inv] if isinstance(inv, InvariantDef) else list(inv)
    checker = checker or StepChecker(
        b, net or SocialNetwork(default_visibility, extensions), max_accounts, max_states
    )
    verdicts = [checker.check(d, lemmas) for d in invs]
    return checker.report(verdicts, lemmas, t0)


def check_lemma_set(
    lemmas: Sequence[InvariantDef],
    b: Bounds,
    max_accounts: int | None = None,
    default_visibility: bool = True,
    extensions: Iterable[str] = (),
    max_states: int = DEFAULT_MAX_STATES,
    net: SocialNetwork | None = None,
    checker: StepChecker | None = None,
) -> Report:
    """Each lemma must pass its base case and its step under the whole set."""
    t0 = time.perf_counter()
    lemmas = list(lemmas)
    net = net or (checker.net if checker else SocialNetwork(default_visibility, extensions))
    base = check_base(lemmas, b, net=net)
    if not lemmas:
        return Report("induct", b, [], {"states": 0, "edges": 0, "instances": 0, "millis": _millis(t0)},
                      net.default_visibility, net.extensions)
    checker = checker or StepChecker(b, net, max_accounts, max_states)
    step = checker.report([checker.check(d, lemmas) for d in lemmas], lemmas, t0)
    return merge_reports("induct", [base, step])


def find_supporting_lemmas(
    inv: InvariantDef, candidates: Sequence[InvariantDef], checker: StepChecker
) -> tuple[InvariantDef, ...] | None:
    """Smallest subset of ``candidates`` under which the step holds (None if none does)."""
    for k in range(len(candidates) + 1):
        for subset in itertools.combinations(candidates, k):
            if checker.check(inv, subset).verdict == "holds":
                return subset
    return None


def induct(
    invs: Sequence[InvariantDef],
    lemmas: Sequence[InvariantDef],
    b: Bounds,
    max_accounts: int | None = None,
    default_visibility: bool = True,
    extensions: Iterable[str] = (),
    max_states: int = DEFAULT_MAX_STATES,
    net: SocialNetwork | None = None,
    checker: StepChecker | None = None,
) -> Report:
    """Base case, lemma set, then each invariant's step under the smallest lemma subset that closes it.

    Lemmas are only used as hypotheses once the whole set is proven; a
    step that no subset closes is reported with all lemmas assumed.
    """
    t0 = time.perf_counter()
    invs, lemmas = list(invs), list(lemmas)
    if checker is not None:
        net = checker.net
    net = net or SocialNetwork(default_visibility, extensions)
    checker = checker or StepChecker(b, net, max_accounts, max_states)
    parts = [check_base(invs, b, net=net)]
    usable: list[InvariantDef] = []
    if lemmas:
        lemma_report = check_lemma_set(lemmas, b, net=net, checker=checker)
        parts.append(lemma_report)
        if lemma_report.ok:
            usable = lemmas
    verdicts = []
    for d in invs:
        needed = find_supporting_lemmas(d, usable, checker)
        v = checker.check(d, needed if needed is not None else usable)
        v.required_lemmas = tuple(x.name for x in needed) if needed is not None else None
        verdicts.append(v)
    parts.append(checker.report(verdicts, usable, t0))
    merged = merge_reports("induct", parts)
    merged.stats["millis"] = _millis(t0)
    return merged


def observation_delta(before: NetworkState, after: NetworkState) -> list[tuple[str, object, object]]:
    """Observer values that differ between two network states, as (path, old, new)."""
    a, b = network_to_json(before), network_to_json(after)
    out = []
    if a["accounts"] != b["accounts"]:
        out.append(("accounts", a["accounts"], b["accounts"]))
    for ident in sorted(set(a["profiles"]) | set(b["profiles"])):
        pa, pb = a["profiles"].get(ident), b["profiles"].get(ident)
        if pa is None or pb is None:
            out.append((f"profile({ident})", pa and "installed", pb and "installed"))
            continue
        for key in sorted(set(pa) | set(pb)):
            if pa.get(key) != pb.get(key):
                out.append((f"{key}({ident})", pa.get(key), pb.get(key)))
    return out


def check_stutter(
    b: Bounds,
    sample_budget: int | None = None,
    default_visibility: bool = True,
    extensions: Iterable[str] = (),
    net: SocialNetwork | None = None,
    max_states: int = DEFAULT_MAX_STATES,
) -> Report:
    """Every disabled transition instance must leave its state observationally unchanged."""
    t0 = time.perf_counter()
    net = net or SocialNetwork(default_visibility, extensions)
    limit = max_states if sample_budget is None else min(sample_budget, max_states)
    states = reachable_states(b, SocialNetwork(net.default_visibility, net.extensions), limit)
    instances = list(all_instances(net, b))
    checked = conforming = 0
    witness = None
    for s in states:
        for name, args in instances:
            if net.condition(s, name, args):
                continue
            checked += 1
            after, _ = net.apply(s, name, args)
            if after is s or states_equivalent(net, after, s, b):
                conforming += 1
            elif witness is None:
                witness = StutterWitness(s, name, args, b)
    v = Verdict("stutter", "law", "holds" if witness is None else "violated", witness)
    stats = {
        "states": len(states),
        "edges": 0,
        "instances": checked,
        "conforming": conforming,
        "millis": _millis(t0),
    }
    return Report("stutter", b, [v], stats, net.default_visibility, net.extensions)


__all__ = [
    "InductionPair",
    "InvariantDef",
    "LemmaDef",
    "ReachTrace",
    "Report",
    "StepChecker",
    "StutterWitness",
    "TraceStep",
    "Verdict",
    "builtin_definitions",
    "check_base",
    "check_lemma_set",
    "check_stutter",
    "check_step",
    "counterexample_from_json",
    "explore",
    "find_supporting_lemmas",
    "induct",
    "instantiations",
    "merge_reports",
    "observation_delta",
    "replay",
    "shrink",
]
