import pytest

from socprac.core import AtomicAction, TraceEvent
from socprac.errors import DslSyntaxError
from socprac.tracefile import format_trace, parse_trace, read_trace, write_trace


def test_parse_forms():
    events = parse_trace("-- header\n0 {a1,a2} lift(box)\n~0 {a1} start(lecture)\n1 a3 wave\n")
    assert events == [
        TraceEvent(0, frozenset(["a1", "a2"]), AtomicAction("lift", ("box",))),
        TraceEvent(0, frozenset(["a1"]), AtomicAction("start", ("lecture",)), True),
        TraceEvent(1, frozenset(["a3"]), AtomicAction("wave", ())),
    ]


def test_round_trip(tmp_path):
    events = parse_trace("0 {a1} raise(a1,hand)\n~0 {a1} start(lecture)\n2 {b,a} go\n")
    path = tmp_path / "t.trace"
    write_trace(path, events)
    assert read_trace(path) == events
    assert format_trace(events).splitlines()[-1] == "2 {a,b} go()"


@pytest.mark.parametrize("text,line,col", [
    ("0 {a1} raise(a1,hand)\nnonsense\n", 2, 1),
    ("0 {} go\n", 1, 3),
    ("0 {a1} go(a,\n", 1, 13),
])
def test_errors_positioned(text, line, col):
    with pytest.raises(DslSyntaxError) as e:
        parse_trace(text)
    assert (e.value.line, e.value.column) == (line, col)
