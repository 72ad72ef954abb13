"""Target platform profiles.

The default profile models an OSEK-like platform with data-integrity
inter-task communication under fixed-priority preemptive scheduling:
slower-to-faster cluster communication needs a decoupling delay, the
opposite direction is delay-free. Further profiles are configuration
points, not new analyses.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class TargetProfile:
    name: str
    requires_delay_slow_to_fast: bool = True
    fast_to_slow_delay_free: bool = True
    overflow_wraps: bool = False  # wrap sized-int arithmetic instead of trapping


PROFILES: dict[str, TargetProfile] = {
    "osek": TargetProfile("osek"),
    "osek-wrap": TargetProfile("osek-wrap", overflow_wraps=True),
    "permissive": TargetProfile("permissive", requires_delay_slow_to_fast=False),
}


def default_profile() -> TargetProfile:
    return PROFILES["osek"]


def get_profile(name: str) -> TargetProfile:
    if name not in PROFILES:
        raise KeyError(f"unknown target profile '{name}' (known: {', '.join(sorted(PROFILES))})")
    return PROFILES[name]
