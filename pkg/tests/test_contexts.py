"""Context activity and salience."""

from hypothesis import given, settings
from hypothesis import strategies as st

from socprac.contexts import (
    UNORDERED, Ambiguous, Context, implies, is_active, most_salient, practice_context,
    salient_pair,
)
from socprac.core import TRUE, Atom, Env, Fact, Not, conj

ATOMS = ["p", "q", "r", "s"]
AGENT = "x"


def context(cid, atoms, negated=()):
    parts = [Atom(Fact(a)) for a in sorted(atoms)] + [Not(Atom(Fact(a))) for a in sorted(negated)]
    return Context(cid, conj(*parts) if parts else TRUE)


def env(facts):
    return Env(frozenset(Fact(a) for a in facts), frozenset())


atom_sets = st.frozensets(st.sampled_from(ATOMS))
contexts = st.builds(lambda a, n: (a, n - a), atom_sets, atom_sets)


def active_by_oracle(atoms, negated, facts):
    return atoms <= facts and not (negated & facts)


@settings(max_examples=400, deadline=None)
@given(contexts, contexts, atom_sets)
def test_salient_pair_axioms(c1spec, c2spec, facts):
    c1 = context("c1", *c1spec)
    c2 = context("c2", *c2spec)
    e = env(facts)
    a1 = active_by_oracle(*c1spec, facts)
    a2 = active_by_oracle(*c2spec, facts)
    assert is_active(c1, AGENT, None, e) == a1
    assert is_active(c2, AGENT, None, e) == a2
    got = salient_pair(c1, c2, AGENT, None, e)
    # inactive contexts are never returned
    if not a1 and not a2:
        assert got is None
        return
    if a1 != a2:
        assert got == (c1 if a1 else c2)
        return
    lits1 = c1.conjuncts()
    lits2 = c2.conjuncts()
    # conjunct-superset specificity dominates
    if lits1 > lits2:
        assert got == c1
    elif lits2 > lits1:
        assert got == c2
    else:
        assert got is UNORDERED


@settings(max_examples=400, deadline=None)
@given(st.lists(contexts, min_size=1, max_size=4), atom_sets)
def test_most_salient_never_picks_silently(specs, facts):
    registry = [context(f"c{i}", *s) for i, s in enumerate(specs)]
    e = env(facts)
    active = [c for c, s in zip(registry, specs) if active_by_oracle(*s, facts)]
    got = most_salient(AGENT, None, e, registry)
    if not active:
        assert got is None
        return
    maximal = [c for c in active
               if not any(o.conjuncts() > c.conjuncts() for o in active if o is not c)]
    if len(maximal) == 1:
        assert got == maximal[0]
    else:
        assert isinstance(got, Ambiguous)
        assert {c.id for c in got.candidates} == {c.id for c in maximal}
        # an explicit order breaks the tie, and only among the maximal candidates
        order = [c.id for c in reversed(registry)]
        chosen = most_salient(AGENT, None, e, registry, order)
        assert chosen in maximal
        assert chosen.id == next(cid for cid in order if cid in {c.id for c in maximal})


def test_identical_context_is_its_own_salient():
    c = context("c", {"p"})
    assert salient_pair(c, c, AGENT, None, env({"p"})) == c


def test_implies_is_conjunct_superset():
    assert implies(context("a", {"p", "q"}), context("b", {"p"}))
    assert not implies(context("b", {"p"}), context("a", {"p", "q"}))


def test_practice_context_more_specific_than_building(lecture):
    sp, sc = lecture
    from socprac.monitor import Monitor
    m = Monitor(sp, sc)
    m.begin_tick(0)
    assert m.salient_id("a1") == "lecture"
    assert practice_context(sp).is_practice


def test_ambiguous_fixture_surfaces_candidates(fixtures_dir):
    from conftest import load
    sp, sc = load("lecture_ambiguous.sp", "lecture.scn")
    from socprac.monitor import Monitor
    m = Monitor(sp, sc)
    m.begin_tick(0)
    s = m.salient("a2")
    assert isinstance(s, Ambiguous)
    assert [c.id for c in s.candidates] == ["hall", "lecture"]
    m2 = Monitor(sp, sc, salience_order=["lecture"])
    m2.begin_tick(0)
    assert m2.salient_id("a2") == "lecture"
