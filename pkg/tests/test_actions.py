"""Complex actions performed by groups."""

import itertools
import random

import pytest

from socprac.actions import (
    Achieve, Atomic, Choice, Parallel, Seq, Star, accepts_group, achievers, basic_actions,
    covering_pairs, enumerate_splits, ground_abstract,
)
from socprac.core import AtomicAction, Fact
from socprac.errors import EmptyGroup, Unachievable

OPEN = AtomicAction("open", ())
WALK = AtomicAction("walk", ())
A, B = "a", "b"


def atom(action, group=None):
    return Atomic(action, None if group is None else frozenset(group))


def ev(group, action):
    return (frozenset(group), action)


class TestNonDistribution:
    """Group execution of a sequence does not distribute over its parts."""

    whole = Seq(atom(OPEN), atom(WALK))  # (open ; walk)({a,b})
    parts = Seq(atom(OPEN, {A, B}), atom(WALK, {A, B}))  # open({a,b}) ; walk({a,b})
    split = [ev({A}, OPEN), ev({B}, WALK)]

    def test_group_annotation_accepts_split_execution(self):
        assert accepts_group(self.whole, {A, B}, self.split)

    def test_per_subaction_annotation_rejects_split_execution(self):
        assert not accepts_group(self.parts, {A, B}, self.split)

    def test_joint_execution_accepted_by_both(self):
        joint = [ev({A, B}, OPEN), ev({A, B}, WALK)]
        assert accepts_group(self.whole, {A, B}, joint)
        assert accepts_group(self.parts, {A, B}, joint)


def test_covering_pairs_of_two_agents():
    pairs = covering_pairs(frozenset({A, B}))
    assert len(pairs) == 7
    assert all(x | y == {A, B} and x and y for x, y in pairs)


def test_split_count_for_binary_node():
    assert len(list(enumerate_splits({A, B}, Seq(atom(OPEN), atom(WALK))))) == 7


def test_fixed_subgroup_is_kept():
    g = Seq(atom(OPEN, {A}), atom(WALK))
    splits = list(enumerate_splits({A, B}, g))
    assert all(s[(0,)] == {A} for s in splits)
    assert {s[(1,)] for s in splits} == {frozenset({B}), frozenset({A, B})}


def test_empty_group_rejected():
    with pytest.raises(EmptyGroup):
        accepts_group(atom(OPEN), set(), [])


def _leaf_words(g, assignment, pos=()):
    """Words of ``(group, action)`` for a star-free action under fixed leaf groups."""
    if isinstance(g, Atomic):
        return {((assignment[pos], g.action),)}
    left = _leaf_words(g.left, assignment, pos + (0,))
    right = _leaf_words(g.right, assignment, pos + (1,))
    if isinstance(g, Choice):
        return left | right
    if isinstance(g, Seq):
        return {x + y for x in left for y in right}
    out = set()
    for x in left:
        for y in right:
            out |= _shuffles(x, y)
    return out


def _shuffles(x, y):
    if not x:
        return {y}
    if not y:
        return {x}
    return {(x[0],) + r for r in _shuffles(x[1:], y)} | {(y[0],) + r for r in _shuffles(x, y[1:])}


def _random_action(rng, depth):
    if depth == 0 or rng.random() < 0.3:
        return atom(rng.choice([OPEN, WALK]))
    cls = rng.choice([Seq, Choice, Parallel])
    return cls(_random_action(rng, depth - 1), _random_action(rng, depth - 1))


def test_accepts_group_matches_split_enumeration():
    rng = random.Random(11)
    groups = [frozenset({A}), frozenset({B}), frozenset({A, B})]
    for _ in range(60):
        g = _random_action(rng, 2)
        expected = set()
        for assignment in enumerate_splits({A, B}, g):
            expected |= _leaf_words(g, assignment)
        letters = [(grp, act) for grp in groups for act in (OPEN, WALK)]
        for n in range(4):
            for word in itertools.product(letters, repeat=n):
                assert accepts_group(g, {A, B}, list(word)) == (word in expected), (g, word)


def test_star_resplits_each_iteration():
    g = Star(atom(OPEN))
    assert accepts_group(g, {A, B}, [ev({A}, OPEN), ev({B}, OPEN), ev({A, B}, OPEN)])
    assert accepts_group(g, {A, B}, [])


def test_basic_actions():
    g = Seq(atom(OPEN), Star(Choice(atom(WALK), atom(OPEN))))
    assert basic_actions(g) == {"open", "walk"}


def test_achievers_in_lecture(lecture):
    sp, sc = lecture
    got = achievers([Fact("lstarted")], sp, sc.caps)
    assert [str(a) for a in got] == ["raise(lecturer,hand)"]
    presented = achievers([Fact("presented")], sp, sc.caps)
    assert [a.symbol for a in presented] == ["present"]
    assert achievers([Fact("nothing")], sp, sc.caps) == []


def test_ground_abstract(lecture):
    sp, sc = lecture
    grounded = ground_abstract(Achieve(frozenset([Fact("presented")])), sp, sc.caps)
    assert isinstance(grounded, Atomic) and grounded.action.symbol == "present"
    with pytest.raises(Unachievable):
        ground_abstract(Achieve(frozenset([Fact("nothing")])), sp, sc.caps)
