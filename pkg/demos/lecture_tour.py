"""A walk through the lecture practice: check it, break it, run it, monitor it.

Run from the repository root:  python3 demos/lecture_tour.py
"""

from socprac import check_trace, check_useful, load_fixture, parse_trace, run, without_strategy
from socprac import fixture_text


def heading(text):
    print(f"\n== {text}")


sp, sc = load_fixture("lecture.sp", "lecture.scn")

heading("Is the lecture a useful practice?")
report = check_useful(sp, sc, bound=12)
print(f"verdict: {report.verdict} after exploring {report.explored} states")
for event in report.witness:
    print("  ", event)

heading("Drop the strategy that makes the lecturer stop talking on a question")
reduced = without_strategy(sp, 1)
qa = parse_trace(fixture_text("lecture_qa.trace"))
report = check_useful(reduced, sc, witness=qa)
print(f"verdict: {report.verdict}")
for pair in report.uncovered:
    print(f"  uncovered handoff {pair}")
    print(f"  a strategy that would cover it: {pair.suggestion}")

heading("Simulate the scenario (seed 1)")
result = run(sp, sc, 50, seed=1)
print(result.trace_text(), end="")
print(f"ended by {result.end_reason} at tick {result.end_tick}; "
      f"accepted: {result.accepted}; violations: {len(result.violations)}")

heading("Monitor a trace where a student talks over the lecturer")
bad = check_trace(sp, sc, parse_trace(fixture_text("lecture_bad.trace")))
for v in bad.violations:
    print("  ", v)
