"""Integration conflict rules for analysis-level models.

The structural rule: an actuator port written by more than one function is
a conflict, resolved by introducing a coordinating component in front of
the actuator (see transform.coordinator).
"""

from __future__ import annotations

from dataclasses import dataclass

from .. import model as m
from .common import all_contexts

SUGGESTION = "introduce a coordinating functionality"


@dataclass(frozen=True)
class Conflict:
    context: str  # component whose definition contains the port; project name for top
    port: str  # endpoint path within the context, e.g. "brake.cmd"
    writers: tuple[str, ...]  # source endpoint paths, declaration order
    suggestion: str = SUGGESTION

    @property
    def path(self) -> str:
        return f"{self.context}.{self.port}"


def faa_conflict_check(project: m.Project) -> list[Conflict]:
    """One conflict per actuator in-port with two or more writers."""
    conflicts: list[Conflict] = []
    for ctx in all_contexts(project):
        targets: dict[str, list[str]] = {}
        for ch in ctx.channels:
            for sk in ch.sinks:
                if sk.owner is None:
                    continue
                element = ctx.elements.get(sk.owner)
                if element is None:
                    continue
                owner = element.spec if isinstance(element.spec, (m.ComponentType, m.Cluster)) else element.comp
                port = owner.port(sk.port) if owner is not None else None
                if port is not None and port.actuator and port.direction == m.IN:
                    targets.setdefault(sk.dotted, []).append(ch.source.dotted)
        for dotted in sorted(targets):
            writers = targets[dotted]
            if len(writers) >= 2:
                conflicts.append(Conflict(ctx.name, dotted, tuple(writers)))
    return conflicts
