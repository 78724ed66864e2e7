"""Hypothesis strategies for predicate and scenario ASTs."""

from hypothesis import strategies as st

from socialots import lang
from socialots.social import CONTENT, PLACEHOLDERS, ContentItem

NAMES = st.from_regex(r"[a-z][a-z0-9_]{0,5}(-[a-z0-9]{1,3})?", fullmatch=True).filter(
    lambda s: s not in lang.RESERVED
)
NATS = st.integers(min_value=0, max_value=10**6)
PLACES = st.sampled_from(PLACEHOLDERS)


def predicates(ids, nats):
    atoms = st.one_of(
        st.builds(lang.Visibility, ids),
        st.builds(lang.InFriends, ids, ids),
        st.builds(lang.InPending, ids, ids),
        st.builds(lang.InAccounts, ids),
        st.builds(lang.InLikes, ids, ids, PLACES, nats),
        st.builds(lang.ViewedPhoto, ids, ids, nats),
        st.builds(lang.ViewedFriends, ids, ids),
        st.builds(lang.MyIdIs, ids, ids),
    )
    return st.recursive(
        atoms,
        lambda inner: st.one_of(
            st.builds(lang.Not, inner),
            st.builds(lang.And, inner, inner),
            st.builds(lang.Or, inner, inner),
            st.builds(lang.Implies, inner, inner),
        ),
        max_leaves=12,
    )


# scenario assertions: every bare name is an account literal
literal_predicates = predicates(st.builds(lang.IdLit, NAMES), st.builds(lang.NatLit, NATS))


@st.composite
def definitions(draw):
    accounts = draw(st.lists(NAMES, min_size=1, max_size=3, unique=True))
    nats = draw(st.lists(NAMES.filter(lambda n: n not in accounts), max_size=2, unique=True))
    params = tuple((n, "account") for n in accounts) + tuple((n, "nat") for n in nats)
    nat_expr = st.builds(lang.NatLit, NATS)
    if nats:
        nat_expr = st.one_of(nat_expr, st.sampled_from([lang.Param(n) for n in nats]))
    body = draw(predicates(st.sampled_from([lang.Param(n) for n in accounts]), nat_expr))
    cls = draw(st.sampled_from([lang.InvariantDef, lang.LemmaDef]))
    return cls(draw(NAMES), params, body)


PAYLOADS = st.text(
    alphabet=st.characters(blacklist_categories=("Cs", "Cc"), blacklist_characters="\n\r"),
    min_size=1,
    max_size=8,
)


def _arg(sort):
    if sort == CONTENT:
        return st.builds(ContentItem, NAMES, NATS, PAYLOADS)
    return {
        "account": NAMES,
        "nat": NATS,
        "bool": st.booleans(),
        "placeholder": PLACES,
    }[sort.name]


@st.composite
def calls(draw):
    name = draw(st.sampled_from(sorted(lang.TRANSITION_PARAMS)))
    args = tuple(draw(_arg(s)) for s in lang.TRANSITION_PARAMS[name])
    return lang.Call(name, args)


statements = st.one_of(
    st.builds(lang.Step, calls()),
    st.builds(lang.ExpectStutter, calls()),
    st.builds(lang.Assert, literal_predicates),
    st.builds(lang.ExpectViolation, NAMES),
)

scenarios = st.builds(
    lang.ScenarioAst,
    PAYLOADS,
    st.one_of(st.none(), st.lists(NAMES, min_size=1, max_size=4, unique=True).map(tuple)),
    st.lists(statements, max_size=6).map(tuple),
)
