"""Runtime monitoring: counts-as, norms, strategies and the value ledger."""

import random
from dataclasses import replace

import pytest

from socprac import fixture_text
from socprac.core import AtomicAction, TraceEvent
from socprac.errors import CapabilityError
from socprac.monitor import Monitor, check_trace
from socprac.norms import afford_check, countsas_expand
from socprac.tracefile import parse_trace, read_trace
from socprac.usefulness import candidate_events

from conftest import FIXTURES, load


def run_text(text, practice="lecture.sp", scenario="lecture.scn"):
    sp, sc = load(practice, scenario)
    return check_trace(sp, sc, parse_trace(text))


def test_bad_trace_has_exactly_one_forbidden_talk():
    sp, sc = load()
    events = read_trace(FIXTURES / "lecture_bad.trace")
    assert len(events) == 8
    reports = [check_trace(sp, sc, events) for _ in range(10)]
    first = reports[0]
    assert [(v.tick, v.agent, v.norm, v.kind) for v in first.violations] == \
        [(4, "a2", 0, "forbidden-done")]
    assert str(sp.norms[first.violations[0].norm]) == "F(student, talk(lecturer), talk(student))"
    assert first.misses == []
    assert first.acceptance.accepted
    assert all(r.violations == first.violations and r.trace == first.trace for r in reports)


def test_compliant_variant_is_clean():
    sp, sc = load()
    report = check_trace(sp, sc, read_trace(FIXTURES / "lecture_good.trace"))
    assert report.violations == [] and report.misses == []


def test_counts_as_expansion():
    report = run_text("0 {a1} raise(a1,hand)\n1 {a2} raise(a2,hand)\n")
    assert [str(e) for e in report.trace] == [
        "0 {a1} raise(a1,hand)", "~0 {a1} start(lecture)",
        "1 {a2} raise(a2,hand)", "~1 {a2} question(a2)",
    ]


def test_counts_as_needs_active_practice():
    report = run_text("0 {a1} raise(a1,hand)\n", scenario="lecture_early.scn")
    assert [str(e) for e in report.trace] == ["0 {a1} raise(a1,hand)"]


def test_countsas_expand_is_transitive():
    sp, sc = load()
    extra = replace(sp, counts_as=sp.counts_as + (
        replace(sp.counts_as[0], source=AtomicAction("question", ("student",)),
                target=AtomicAction("noisy", ("student",))),))
    m = Monitor(extra, sc)
    ev = TraceEvent(0, frozenset(["a2"]), AtomicAction("raise", ("a2", "hand")))
    out = countsas_expand(ev, extra, m.env())
    assert [str(e.action) for e in out] == ["raise(a2,hand)", "question(a2)", "noisy(a2)"]
    assert all(e.derived for e in out[1:])


def test_obligation_unmet_then_discharged():
    # the lecturer has not talked yet, so only the obligation applies
    talk = "0 {a1} raise(a1,hand)\n1 {a2} sit(a2,seat1)\n2 {a2} talk(a2)\n"
    unmet = run_text(talk)
    kinds = sorted(v.kind for v in unmet.violations)
    assert kinds == ["obligation-unmet"]
    met = run_text(talk + "3 {a2} raise(a2,hand)\n")
    assert met.violations == []


def test_obligation_discharged_by_preceding_raise():
    # raising the hand right before talking discharges the obligation at once
    report = run_text("0 {a1} raise(a1,hand)\n1 {a2} raise(a2,hand)\n2 {a2} talk(a2)\n"
                      "3 {a1} stop(talk)\n")
    assert [v for v in report.violations if v.kind == "obligation-unmet"] == []


def test_strategy_miss_when_lecturer_keeps_talking():
    report = run_text("0 {a1} raise(a1,hand)\n1 {a2} sit(a2,seat1)\n2 {a2} raise(a2,hand)\n"
                      "3 {a1} talk(a1)\n")
    assert [(m.tick, m.agent, m.strategy, m.expected) for m in report.misses] == \
        [(3, "a1", 1, "DO(a1, stop(talk))")]


def test_achieve_expectation_tolerates_intermediate_actions():
    report = run_text("0 {a1} raise(a1,hand)\n1 {a1} talk(a1)\n2 {a1} talk(a1)\n"
                      "3 {a1} present(a1,projector)\n")
    assert report.misses == []
    open_ = run_text("0 {a1} raise(a1,hand)\n1 {a1} talk(a1)\n")
    assert "DO(a1, @(presented))" in [x.describe(load()[0]) for x in open_.pending]


def test_value_ledger():
    report = run_text("0 {a1} raise(a1,hand)\n1 {a2} attend(a2)\n2 {a4} noisy(a4)\n")
    assert [str(e) for e in report.ledger] == ["1 a2 +SelfEnhance (rule#0)", "2 a4 -Respect (rule#1)"]


def test_capability_enforced():
    with pytest.raises(CapabilityError):
        run_text("0 {a2} present(a2,projector)\n")


def test_derived_input_events_are_rederived():
    with_derived = run_text("0 {a1} raise(a1,hand)\n~0 {a1} start(lecture)\n~0 {a1} bogus\n")
    plain = run_text("0 {a1} raise(a1,hand)\n")
    assert with_derived.trace == plain.trace


def test_afford_check():
    sp, sc = load()
    kinds = sc.resource_kinds(sp)
    assert afford_check(AtomicAction("sit", ("a2", "seat1")), sp, kinds)
    assert not afford_check(AtomicAction("sit", ("a2", "projector")), sp, kinds)


def test_enabled_checks_preconditions_and_affordances():
    sp, sc = load()
    m = Monitor(sp, sc)
    m.begin_tick(0)
    sit = TraceEvent(0, frozenset(["a2"]), AtomicAction("sit", ("a2", "seat1")))
    assert m.enabled(sit)
    assert not m.enabled(TraceEvent(0, frozenset(["a2"]), AtomicAction("sit", ("a2", "projector"))))
    assert not m.enabled(TraceEvent(0, frozenset(["a1"]), AtomicAction("stop", ("talk",))))
    m.observe(sit)
    assert not m.enabled(TraceEvent(1, frozenset(["a3"]), AtomicAction("sit", ("a3", "seat1"))))


def test_forbidden_probe_does_not_mutate():
    sp, sc = load()
    m = Monitor(sp, sc)
    for e in parse_trace("0 {a1} raise(a1,hand)\n1 {a1} talk(a1)\n"):
        m.observe(e)
    talk = TraceEvent(2, frozenset(["a2"]), AtomicAction("talk", ("a2",)))
    before = m.signature()
    assert m.forbidden(talk)
    assert m.signature() == before
    assert not m.forbidden(TraceEvent(2, frozenset(["a2"]), AtomicAction("attend", ("a2",))))


def test_deleting_a_norm_never_adds_violations():
    sp, sc = load()
    agents = sorted(sc.agent_ids)
    pool = candidate_events(sp, sc, agents, {a.symbol for a in sp.actions})
    rng = random.Random(9)
    for _ in range(150):
        events = [TraceEvent(t, e.group, e.action) for t, e in
                  enumerate(rng.choice(pool) for _ in range(rng.randint(1, 8)))]
        full = {(v.tick, v.agent, v.kind, str(sp.norms[v.norm])) for v in
                check_trace(sp, sc, events).violations}
        for i in range(len(sp.norms)):
            fewer = replace(sp, norms=sp.norms[:i] + sp.norms[i + 1:])
            less = {(v.tick, v.agent, v.kind, str(fewer.norms[v.norm])) for v in
                    check_trace(fewer, sc, events).violations}
            assert less <= full


def test_violation_records_serialise():
    report = run_text(fixture_text("lecture_bad.trace"))
    assert report.violations[0].to_dict() == {
        "tick": 4, "agent": "a2", "norm": 0, "kind": "forbidden-done",
        "evidence": "talk(a2) while talk(lecturer)",
    }
