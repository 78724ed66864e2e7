import dataclasses
import json
from importlib import resources

import jsonschema
import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings

import oracle
import strategies
from socialots import lang, social, universe, verifier
from socialots.batch import Batch, all_instances
from socialots.social import ContentItem, SocialNetwork
from socialots.verifier import InvalidDefinition, ReplayError, TraceStep

# two accounts, one uid: every reachable state fits the caps
TINY = social.social_bounds(("a", "b"), (1,))
SCHEMA = json.loads(resources.files("socialots").joinpath("data").joinpath("report.schema.json").read_text())


def definition(text):
    (d,) = lang.parse_invariant_file(text)
    return d


EMPTY = definition("invariant Empty(a: account) := not a in accounts")
FA = definition("lemma FA(a: account, b: account) := b in friends(a) implies b in accounts")
IMPOSSIBLE = definition(
    "invariant Never(a: account) := a in accounts and not a in accounts implies visibility(a)"
)


@pytest.fixture(scope="module")
def tiny_checker():
    return verifier.StepChecker(TINY, SocialNetwork())


class LeakyNetwork(SocialNetwork):
    """Test-only mutant: a refused friend-list view is still logged."""

    def apply(self, s, name, args):
        if name == "viewfriendsSN" and not self.condition(s, name, args) and args[0] in s.installed:
            p = self.project(s, args[0])
            leaked = p._replace(friend_list_views=p.friend_list_views | {args[1]})
            return self._replace_component(s, args[0], leaked), False
        return super().apply(s, name, args)


# -- batch evaluation agrees with the scalar model --------------------------------


def test_batch_universe_order_matches_enumeration(tiny_checker):
    u = tiny_checker.universe
    states = list(universe.enumerate_universe(TINY))
    assert u.size == len(states) == universe.universe_size(TINY)
    for i in range(0, u.size, 97):
        assert u.state(i) == states[i]


def test_batch_transitions_and_predicates_match_scalar(tiny_checker, defs):
    net = tiny_checker.net
    u = tiny_checker.universe
    idx = np.arange(0, u.size, 211)
    preds = [(d, env) for d in (defs["inv1"], defs["inv2"], defs["L1"], FA)
             for env in verifier.instantiations(d, TINY)]
    for name, args in all_instances(net, TINY):
        cond, post = u.apply(name, args)
        for i in idx:
            s = u.state(int(i))
            t, applied = net.apply(s, name, args)
            assert bool(cond[i]) == applied, (name, args, s)
            assert post.state(int(i)) == t, (name, args, s)
    for d, env in preds:
        truth = u.eval(d, env)
        for i in idx:
            assert bool(truth[i]) == lang.eval_predicate(d.body, u.state(int(i)), env, net)


def test_batch_from_states_round_trips(net):
    s = net.initial()
    for name, args in [("add", ("a",)), ("add", ("b",)), ("receivefriendSN", ("a", "b"))]:
        s, _ = net.apply(s, name, args)
    b = Batch.from_states(net, ("a", "b"), [net.initial(), s])
    assert [b.state(0), b.state(1)] == [net.initial(), s]


# -- base case and reachability ---------------------------------------------------


def test_base_case(defs):
    r = verifier.check_base([defs["inv1"], defs["inv2"], EMPTY], TINY)
    assert [v.verdict for v in r.verdicts] == ["holds", "holds", "holds"]
    assert r.verdict("inv1").counterexample is None


def test_base_case_violation_has_empty_trace():
    d = definition("invariant Seen(a: account) := a in accounts")
    v = verifier.check_base(d, TINY).verdicts[0]
    assert v.verdict == "violated" and len(v.counterexample) == 0
    assert verifier.replay(v.counterexample)


def test_vacuous_verdicts(defs):
    assert verifier.check_base(IMPOSSIBLE, TINY).verdicts[0].verdict == "vacuous"
    assert verifier.check_base(defs["L1"], TINY).verdicts[0].verdict == "vacuous"
    assert verifier.explore(TINY, [IMPOSSIBLE]).verdicts[0].verdict == "vacuous"
    assert verifier.explore(TINY, [defs["L1"]]).verdicts[0].verdict == "holds"


@pytest.mark.parametrize("vis", [True, False])
@pytest.mark.parametrize(
    "kw",
    [dict(), dict(places=("wall",)), dict(max_set=1), dict(extensions=("set-visibility",))],
)
def test_explore_matches_naive_oracle(vis, kw):
    places = kw.get("places", ("photos",))
    ext = kw.get("extensions", ())
    b = social.social_bounds(("a", "b"), (1,), placeholders=places, max_set=kw.get("max_set", 2))
    r = verifier.explore(b, [], default_visibility=vis, extensions=ext)
    want = oracle.reachable(("a", "b"), (1,), places=places, vis=vis,
                            max_set=kw.get("max_set", 2), extensions=ext)
    assert r.complete and r.stats["states"] == len(want)


def test_tiny_bounds_never_hit_the_caps():
    assert verifier.explore(TINY, []).stats["capped"] == 0


def test_explore_reports_shortest_trace(defs):
    r = verifier.explore(TINY, [defs["inv1"], EMPTY])
    v = r.verdict("Empty")
    assert v.verdict == "violated"
    assert [(s.transition, s.args) for s in v.counterexample.steps] == [("add", ("a",))]
    assert r.verdict("inv1").verdict == "holds"


def test_explore_stops_early_once_everything_is_violated():
    full = verifier.explore(TINY, [])
    early = verifier.explore(TINY, [EMPTY])
    assert early.stats["states"] < full.stats["states"]


def test_state_limit_marks_report_incomplete(defs):
    r = verifier.explore(TINY, [defs["inv1"]], max_states=50)
    assert not r.complete and not r.ok
    assert r.stats["states"] == 50


def test_explore_is_deterministic(defs):
    one = verifier.explore(TINY, [defs["inv1"], defs["inv2"]], extensions=["set-visibility"])
    two = verifier.explore(TINY, [defs["inv1"], defs["inv2"]], extensions=["set-visibility"])
    assert one.canonical_json() == two.canonical_json()
    assert "millis" not in one.canonical_json()


# -- counterexamples --------------------------------------------------------------


@pytest.fixture(scope="module")
def leak_trace(defs):
    r = verifier.explore(TINY, [defs["inv1"]], extensions=["set-visibility"])
    return r.verdicts[0].counterexample


def test_replay_and_json_round_trip(leak_trace):
    assert verifier.replay(leak_trace)
    again = verifier.counterexample_from_json(json.loads(json.dumps(leak_trace.to_json())))
    assert again == leak_trace and verifier.replay(again)


def test_replay_fails_on_the_unmutated_model(leak_trace):
    with pytest.raises(ReplayError):
        verifier.replay(leak_trace, SocialNetwork())


def test_tampered_traces_do_not_reproduce(leak_trace):
    steps = list(leak_trace.steps)
    steps[2] = dataclasses.replace(steps[2], digest="0" * 32)
    assert not verifier.replay(dataclasses.replace(leak_trace, steps=tuple(steps)))
    steps = list(leak_trace.steps)
    steps[-1] = dataclasses.replace(steps[-1], applied=False)
    assert not verifier.replay(dataclasses.replace(leak_trace, steps=tuple(steps)))
    assert not verifier.replay(dataclasses.replace(leak_trace, steps=leak_trace.steps[:-1]))


def test_counterexample_schema_errors(leak_trace):
    data = leak_trace.to_json()
    with pytest.raises(ReplayError):
        verifier.counterexample_from_json(dict(data, schema=2))
    with pytest.raises(ReplayError):
        verifier.counterexample_from_json(dict(data, kind="mystery"))
    bad = json.loads(json.dumps(data))
    bad["steps"][0]["transition"] = "teleport"
    with pytest.raises(ReplayError):
        verifier.counterexample_from_json(bad)
    bad = json.loads(json.dumps(data))
    bad["model"]["extensions"] = []
    with pytest.raises(ReplayError):
        verifier.counterexample_from_json(bad)


def test_shrink_keeps_minimal_traces(leak_trace):
    shrunk = verifier.shrink(leak_trace)
    assert shrunk.steps == leak_trace.steps


def test_shrink_drops_redundant_steps(leak_trace):
    net = SocialNetwork(extensions=["set-visibility"])
    calls = [(s.transition, s.args) for s in leak_trace.steps]
    noise = [("add", ("a",)), ("viewfriendsSN", ("b", "a")), ("receivelikeSN", ("b", "photos", 1, "a"))]
    padded = verifier._rebuild(leak_trace, calls[:3] + noise + calls[3:] + noise, net)
    assert verifier.replay(padded) and len(padded) == len(leak_trace) + 6
    shrunk = verifier.shrink(padded)
    assert verifier.replay(shrunk)
    assert len(shrunk) == len(leak_trace)


# -- inductive step ---------------------------------------------------------------


def test_step_holds_with_accounting_identity(tiny_checker, defs):
    r = verifier.check_step([defs["inv1"], defs["inv2"]], [], TINY, checker=tiny_checker)
    n = tiny_checker.universe.size
    for v in r.verdicts:
        assert v.verdict == "holds"
        envs = len(verifier.instantiations(defs[v.invariant], TINY))
        for t in v.transitions:
            assert t["cond_true"] + t["cond_false"] == t["cases"] == n * t["instances"] * envs
            assert t["violations"] == 0
    assert {t["transition"] for t in r.verdicts[0].transitions} == {
        "add", "del", "receivefriendSN", "acceptfriendSN", "receiveSN", "receivelikeSN",
        "viewphotoSN", "viewfriendsSN",
    }
    assert r.to_json()["caps"] == {"seq": 1, "set": 2}


def test_false_lemma_is_refuted_by_del(tiny_checker):
    r = verifier.check_lemma_set([FA], TINY, checker=tiny_checker)
    v = r.verdicts[0]
    assert v.verdict == "violated"
    ce = v.counterexample
    assert ce.transition == "del" and verifier.replay(ce)
    tallies = {t["transition"]: t["violations"] for t in v.transitions}
    assert tallies["del"] > 0 and sum(tallies.values()) == tallies["del"]
    again = verifier.counterexample_from_json(json.loads(json.dumps(ce.to_json())))
    assert verifier.replay(again)


def test_l1_is_proved(tiny_checker, defs):
    r = verifier.check_lemma_set([defs["L1"]], TINY, checker=tiny_checker)
    assert r.ok and r.verdicts[0].checks == ["base", "induct"]


def test_supporting_lemma_search(tiny_checker, defs):
    assert verifier.find_supporting_lemmas(defs["inv1"], [defs["L1"]], tiny_checker) == ()
    assert verifier.find_supporting_lemmas(FA, [], tiny_checker) is None


def test_induct_records_required_lemmas(defs):
    r = verifier.induct([defs["inv1"], defs["inv2"]], [defs["L1"]], TINY)
    assert r.ok
    assert {v.invariant: v.required_lemmas for v in r.verdicts if v.kind == "invariant"} == {
        "inv1": (), "inv2": ()
    }


SUBSUMPTION = [
    "invariant P1(a: account, b: account) := b in friends(a) implies not b in pending(a)",
    "invariant P2(a: account, b: account) := viewed-friends(a, b) implies b in friends(a)",
    "invariant P3(a: account) := not a in friends(a)",
    "invariant P4(a: account, b: account) := b in friends(a) implies a in friends(b)",
    "invariant P5(a: account, b: account) := b in pending(a) implies a in accounts",
    "invariant P6(a: account, u: nat) := viewed-photo(a, a, u) implies visibility(a)",
]


@pytest.mark.parametrize("text", SUBSUMPTION)
def test_induction_subsumes_reachability(tiny_checker, text):
    d = definition(text)
    step = tiny_checker.check(d)
    base = verifier.check_base(d, TINY).verdicts[0]
    reach = verifier.explore(TINY, [d]).verdicts[0]
    if step.verdict == "holds" and base.verdict != "violated":
        assert reach.verdict != "violated"
    if reach.verdict == "violated":
        assert verifier.replay(reach.counterexample)


@settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(strategies.definitions())
def test_induction_subsumes_reachability_random(tiny_checker, d):
    step = tiny_checker.check(d)
    base = verifier.check_base(d, TINY).verdicts[0]
    reach = verifier.explore(TINY, [d]).verdicts[0]
    if step.verdict == "holds" and base.verdict != "violated":
        assert reach.verdict != "violated"
    for v in (step, base, reach):
        if v.verdict == "violated":
            assert verifier.replay(v.counterexample)


def test_reachable_states_lie_in_the_universe(tiny_checker, net):
    universe_states = set(universe.enumerate_universe(TINY))
    assert all(s in universe_states for s in verifier.reachable_states(TINY, net))


def test_universe_limit_is_enforced():
    big = social.social_bounds(("a", "b", "c"), (1, 2))
    with pytest.raises(universe.UniverseTooLarge):
        verifier.StepChecker(big)


# -- stutter law ------------------------------------------------------------------


def test_stutter_law_holds():
    r = verifier.check_stutter(TINY)
    assert r.ok and r.stats["conforming"] == r.stats["instances"] > 0


def test_stutter_law_catches_a_mutant():
    r = verifier.check_stutter(TINY, net=LeakyNetwork())
    v = r.verdicts[0]
    assert v.verdict == "violated" and v.counterexample.transition == "viewfriendsSN"
    assert verifier.replay(v.counterexample, LeakyNetwork())
    assert not verifier.replay(v.counterexample, SocialNetwork())
    assert r.stats["conforming"] < r.stats["instances"]


def test_stutter_sample_budget():
    assert verifier.check_stutter(TINY, sample_budget=10).stats["states"] == 10


# -- definitions and reports --------------------------------------------------------


@pytest.mark.parametrize(
    "d",
    [
        lang.InvariantDef("x", (("a", "account"),), lang.Visibility(lang.Param("b"))),
        lang.InvariantDef("x", (("a", "nat"),), lang.Visibility(lang.Param("a"))),
        lang.InvariantDef("x", (("a", "colour"),), lang.Visibility(lang.Param("a"))),
        lang.InvariantDef("x", (("a", "account"),),
                          lang.InLikes(lang.Param("a"), lang.Param("a"), "attic", lang.NatLit(1))),
        lang.InvariantDef("x", (("a", "account"),), lang.Visibility(lang.NatLit(1))),
    ],
)
def test_ill_formed_definitions_are_rejected(d):
    with pytest.raises(InvalidDefinition):
        verifier.check_base(d, TINY)


def test_builtins_are_self_checked(defs):
    assert set(defs) == {"inv1", "inv2", "L1"}
    assert defs["L1"].kind == "lemma"


def test_instantiations_follow_bounds_order(defs):
    envs = verifier.instantiations(defs["inv1"], social.social_bounds(("x", "y"), (3,)))
    assert envs == [
        {"a1": "x", "a2": "x", "pi": 3}, {"a1": "x", "a2": "y", "pi": 3},
        {"a1": "y", "a2": "x", "pi": 3}, {"a1": "y", "a2": "y", "pi": 3},
    ]


def test_reports_validate_against_schema(tiny_checker, defs, leak_trace):
    reports = [
        verifier.check_base([defs["inv1"]], TINY),
        verifier.explore(TINY, [defs["inv1"]], extensions=["set-visibility"]),
        verifier.check_step([defs["inv1"]], [], TINY, checker=tiny_checker),
        verifier.check_lemma_set([FA], TINY, checker=tiny_checker),
        verifier.check_stutter(TINY, sample_budget=20, net=LeakyNetwork()),
    ]
    for r in reports:
        jsonschema.validate(r.to_json(), SCHEMA)
        assert r.format().startswith(f"mode {r.mode}:")


def test_observation_delta(net):
    s0 = net.initial()
    s1, _ = net.apply(s0, "add", ("a",))
    s2, _ = net.apply(s1, "receiveSN", ("a", ContentItem("a", 1, "p"), "a", "wall"))
    assert verifier.observation_delta(s0, s1) == [
        ("accounts", [], ["a"]), ("profile(a)", None, "installed")
    ]
    paths = [p for p, _, _ in verifier.observation_delta(s1, s2)]
    assert paths == ["likes(a)", "wall(a)"]


def test_merge_keeps_worst_verdict(defs):
    a = verifier.check_base([EMPTY], TINY)
    b = verifier.explore(TINY, [EMPTY])
    merged = verifier.merge_reports("reach", [a, b])
    v = merged.verdict("Empty")
    assert v.verdict == "violated" and v.checks == ["base", "reach"]
    assert isinstance(v.counterexample, verifier.ReachTrace)


def test_trace_steps_serialise_content():
    step = TraceStep("receiveSN", ("a", ContentItem("a", 1, "p"), "a", "wall"), True, "f" * 32)
    assert step.to_json()["args"] == ["a", ["a", 1, "p"], "a", "wall"]
