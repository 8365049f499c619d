"""Students ask questions: strategy expectations at work.

Student a2 raises a hand once seated.  Raising a hand counts as a question,
and the lecturer is expected to stop talking on the next tick.  The second
half shows what the monitor says at each tick of the same run, and what a
student who talks out of turn costs.

Run from the repository root:  python3 demos/question_time.py
"""

from socprac import Monitor, load_fixture, run

sp, sc = load_fixture("lecture.sp", "lecture_question.scn")
result = run(sp, sc, 50, seed=1)

m = Monitor(sp, sc)
by_tick = {}
for e in result.trace:
    if not e.derived:
        by_tick.setdefault(e.tick, []).append(e)

for tick in sorted(by_tick):
    m.begin_tick(tick)
    expected = [x.describe(sp) for x in m.expectations]
    print(f"tick {tick}: expected {', '.join(expected) or 'nothing'}")
    for e in by_tick[tick]:
        for shown in m.observe(e):
            print("    ", shown)

print(f"misses: {len(result.misses)}, violations: {len(result.violations)}")

_, rude = load_fixture("lecture.sp", "lecture_violator.scn")
noisy = run(sp, rude, 50, seed=1)
print("\nwith a student who talks while the lecturer talks:")
for v in noisy.violations:
    print("  ", v)
