"""Social practices: specification language, usefulness checking, monitoring and simulation."""

from importlib import resources

from .actions import Achieve, Atomic, Choice, Parallel, Seq, Star, accepts_group
from .beliefs import BeliefStore, attribute_goals
from .contexts import Ambiguous, Context, most_salient, salient_pair
from .core import FALSE, TRUE, AtomicAction, Fact, TraceEvent, WorldState, eval_condition
from .dsl import parse_action, parse_condition, parse_pattern
from .errors import (
    CapabilityError,
    Diagnostic,
    DslSyntaxError,
    SocialPracticeError,
    UndeclaredSymbol,
    ValidationError,
)
from .model import Scenario, SocialPractice, without_strategy
from .monitor import Monitor, MonitorReport, check_trace
from .patterns import Step, accepts, compile_pattern
from .serialize import serialize, serialize_scenario
from .simulator import SimulationRun, Simulator, run
from .tracefile import format_trace, parse_trace, read_trace, write_trace
from .usefulness import NOT_USEFUL, UNKNOWN, USEFUL, UsefulnessReport, check_useful
from .validation import check_practice, check_scenario, parse_practice, parse_scenario

__version__ = "0.1.0"


def fixture_text(name: str) -> str:
    """Contents of a bundled fixture file such as ``lecture.sp``."""
    return resources.files(__package__).joinpath("fixtures", name).read_text(encoding="utf-8")


def load_fixture(practice: str = "lecture.sp", scenario: str | None = "lecture.scn"):
    """Parse a bundled practice and, optionally, a scenario for it."""
    sp = parse_practice(fixture_text(practice))
    if scenario is None:
        return sp
    return sp, parse_scenario(fixture_text(scenario), sp)


__all__ = [
    "Achieve", "Ambiguous", "Atomic", "AtomicAction", "BeliefStore", "CapabilityError",
    "Choice", "Context", "Diagnostic", "DslSyntaxError", "FALSE", "Fact", "Monitor",
    "MonitorReport", "NOT_USEFUL", "Parallel", "Scenario", "Seq", "SimulationRun", "Simulator",
    "SocialPractice", "SocialPracticeError", "Star", "Step", "TRUE", "TraceEvent", "UNKNOWN",
    "USEFUL", "UndeclaredSymbol", "UsefulnessReport", "ValidationError", "WorldState",
    "accepts", "accepts_group", "attribute_goals", "check_practice", "check_scenario",
    "check_trace", "check_useful", "compile_pattern", "eval_condition", "fixture_text",
    "format_trace", "load_fixture", "most_salient", "parse_action", "parse_condition",
    "parse_pattern", "parse_practice", "parse_scenario", "parse_trace", "read_trace", "run",
    "salient_pair", "serialize", "serialize_scenario", "without_strategy", "write_trace",
]
