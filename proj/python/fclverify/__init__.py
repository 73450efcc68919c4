"""Runtime verification of functional constraints over ensemble-based adaptive systems."""

from ._core import (
    ArchitectureSpec,
    ConstraintDocument,
    FclvError,
    Monitor,
    Trace,
    builtin_managers,
    generate_prompt,
    parse_adsl,
    parse_constraints,
    scenario_constraints,
    scenario_spec,
    scenarios,
    simulate,
    verify_offline,
    verify_online,
)

__all__ = [
    "ArchitectureSpec",
    "ConstraintDocument",
    "FclvError",
    "Monitor",
    "Trace",
    "builtin_managers",
    "generate_prompt",
    "parse_adsl",
    "parse_constraints",
    "scenario_constraints",
    "scenario_spec",
    "scenarios",
    "simulate",
    "verify_offline",
    "verify_online",
]
