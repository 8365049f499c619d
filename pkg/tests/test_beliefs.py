"""Belief tiers and goal attribution."""

import random

import pytest

from socprac.beliefs import BeliefStore
from socprac.core import Fact
from socprac.errors import UnknownAgent
from socprac.monitor import Monitor
from socprac.tracefile import parse_trace

AGENTS = ["a", "b", "c", "d"]
FACTS = [Fact("f", (str(i),)) for i in range(5)]


def random_store(rng):
    store = BeliefStore(AGENTS)
    for _ in range(rng.randint(0, 12)):
        if rng.random() < 0.5:
            store.tell(rng.choice(AGENTS), rng.choice(FACTS))
        else:
            group = rng.sample(AGENTS, rng.randint(1, len(AGENTS)))
            store.publish(group, rng.choice(FACTS))
    return store


def check_chain(store, group, fact):
    if store.common_belief(group, fact):
        assert store.everyone_believes(group, fact)
    if store.everyone_believes(group, fact):
        assert all(store.believes(a, fact) for a in group)


def test_belief_chain_over_random_stores():
    rng = random.Random(2024)
    checked = 0
    for _ in range(1000):
        store = random_store(rng)
        for _ in range(5):
            group = rng.sample(AGENTS, rng.randint(1, len(AGENTS)))
            for f in FACTS:
                check_chain(store, group, f)
                checked += 1
    assert checked == 25000


def test_beliefs_grow_monotonically():
    rng = random.Random(5)
    store = BeliefStore(AGENTS)
    before = {a: store.view(a) for a in AGENTS}
    for _ in range(200):
        if rng.random() < 0.5:
            store.tell(rng.choice(AGENTS), rng.choice(FACTS))
        else:
            store.publish(rng.sample(AGENTS, 2), rng.choice(FACTS))
        after = {a: store.view(a) for a in AGENTS}
        assert all(before[a] <= after[a] for a in AGENTS)
        before = after


def test_private_belief_is_not_common():
    store = BeliefStore(AGENTS)
    for a in AGENTS:
        store.tell(a, FACTS[0])
    assert store.everyone_believes(AGENTS, FACTS[0])
    assert not store.common_belief(AGENTS, FACTS[0])


def test_supergroup_tier_is_common_to_subgroups():
    store = BeliefStore(AGENTS)
    store.publish(AGENTS, FACTS[1])
    assert store.common_belief(["a", "b"], FACTS[1])
    assert FACTS[1] in store.public_view(["c"])
    store.publish(["a", "b"], FACTS[2])
    assert not store.common_belief(["a", "c"], FACTS[2])


def test_unknown_agent():
    store = BeliefStore(AGENTS)
    with pytest.raises(UnknownAgent):
        store.tell("zz", FACTS[0])


def test_snapshot_is_sorted():
    store = BeliefStore(["b", "a"])
    store.publish(["a", "b"], FACTS[0])
    snap = store.snapshot()
    assert list(snap["private"]) == ["a", "b"]
    assert snap["public"] == [{"group": ["a", "b"], "facts": ["f(0)"]}]


def test_attend_attributes_learning_goal(lecture):
    sp, sc = lecture
    m = Monitor(sp, sc)
    for e in parse_trace("0 {a1} raise(a1,hand)\n1 {a2} sit(a2,seat1)\n2 {a2} attend(a2)\n"):
        m.observe(e)
    goals = m.goals()
    assert [(g.agent, str(g)) for g in goals] == [("a2", "Goal(a2, learntopic(a2))")]


def test_no_goal_when_salience_is_ambiguous():
    from conftest import load
    sp, sc = load("lecture_ambiguous.sp", "lecture.scn")
    m = Monitor(sp, sc)
    for e in parse_trace("0 {a1} raise(a1,hand)\n1 {a2} attend(a2)\n"):
        m.observe(e)
    assert m.goals() == []
