"""Deterministic simulator for a layered intrusion-detection system."""

from ._core import (
    Config,
    Event,
    ParseError,
    Report,
    Scenario,
    SimError,
    audit_text,
    coupling_signal,
    debounce,
    format_config,
    format_scenario,
    gate,
    load_config,
    parse_config,
    parse_scenario,
    run_scenario,
    write_audit,
)

__all__ = [
    "Config",
    "Event",
    "ParseError",
    "Report",
    "Scenario",
    "SimError",
    "audit_text",
    "coupling_signal",
    "debounce",
    "format_config",
    "format_scenario",
    "gate",
    "load_config",
    "parse_config",
    "parse_scenario",
    "run_scenario",
    "write_audit",
]
