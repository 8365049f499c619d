"""Reference procedures the engine is compared against in tests."""

from itertools import product

from socprac.core import AtomicAction, TraceEvent
from socprac.monitor import Monitor


def all_ground_events(practice, scenario):
    """Every single-agent ground action any agent is capable of, unpruned."""
    kinds = scenario.resource_kinds(practice)
    instances = sorted(kinds)
    out = []
    for agent in scenario.agents:
        for decl in practice.actions:
            if decl.symbol not in agent.caps:
                continue
            domains = []
            for p in decl.params:
                if p == "self":
                    domains.append([agent.id])
                elif p[:1].isupper():
                    domains.append(instances)
                else:
                    domains.append([p])
            for args in product(*domains):
                out.append((frozenset([agent.id]), AtomicAction(decl.symbol, tuple(args))))
    out.sort(key=lambda e: (tuple(sorted(e[0])), str(e[1])))
    return out


def conforming(monitor) -> bool:
    report = monitor.close()
    return report.acceptance.accepted and not report.violations and not report.misses


def brute_force_witness(practice, scenario, max_len):
    """Shortest, then lexicographically least, conforming trace by exhaustive enumeration."""
    alphabet = all_ground_events(practice, scenario)

    def dfs(monitor, depth, remaining):
        if remaining == 0:
            return [] if conforming(monitor) else None
        for group, action in alphabet:
            event = TraceEvent(depth, group, action)
            probe = monitor.clone()
            probe.begin_tick(depth)
            if not probe.enabled(event):
                continue
            probe.observe(event)
            found = dfs(probe, depth + 1, remaining - 1)
            if found is not None:
                return [event] + found
        return None

    for n in range(max_len + 1):
        found = dfs(Monitor(practice, scenario), 0, n)
        if found is not None:
            return found
    return None
