"""Deterministic replica network simulator for the counter-based set."""

from .channel import RELIABLE, Channel, ChannelStats, FaultPolicy, Message
from .oracle import CausalHistory, OpRecord, longest_chain, longest_sequence_oracle, reconstruct_history
from .scenario import (
    AssertContains,
    AssertEqual,
    Crash,
    Op,
    Quiesce,
    Recover,
    ScenarioParseError,
    ScenarioScript,
    Send,
    load_scenario,
    parse_scenario,
)
from .sim import (
    DEFAULT_SEED,
    ConvergenceReport,
    Replica,
    ScenarioError,
    ScenarioReport,
    Simulator,
    run_fuzz,
    run_scenario,
)

__all__ = [
    "RELIABLE",
    "Channel",
    "ChannelStats",
    "FaultPolicy",
    "Message",
    "CausalHistory",
    "OpRecord",
    "longest_chain",
    "longest_sequence_oracle",
    "reconstruct_history",
    "AssertContains",
    "AssertEqual",
    "Crash",
    "Op",
    "Quiesce",
    "Recover",
    "ScenarioParseError",
    "ScenarioScript",
    "Send",
    "load_scenario",
    "parse_scenario",
    "DEFAULT_SEED",
    "ConvergenceReport",
    "Replica",
    "ScenarioError",
    "ScenarioReport",
    "Simulator",
    "run_fuzz",
    "run_scenario",
]
