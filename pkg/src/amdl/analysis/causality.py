"""Causality analysis: schedules block evaluation, rejects instantaneous loops.

Edges follow instantaneous channels between elements of one context; delayed
channels (one-tick channel kinds and delay blocks) carry no edge. Clock
expressions that observe other flows (presence tests, mode references, block
gates) add edges to the producing element, because the observer must run
after the observed value exists within the tick.
"""

from __future__ import annotations

from dataclasses import dataclass

from .. import model as m
from ..clocks import referenced_ports
from ..diagnostics import Diagnostic, DiagnosticSink
from .common import ContextView, all_contexts


@dataclass(frozen=True)
class Schedule:
    """Topological evaluation order for one context."""

    context: str
    order: tuple[str, ...]
    edges: frozenset[tuple[str, str]]


def dependency_edges(ctx: ContextView) -> set[tuple[str, str]]:
    edges: set[tuple[str, str]] = set()
    for ch in ctx.channels:
        if ch.kind != m.INSTANTANEOUS:
            continue
        if ch.source.owner is None:
            continue
        src = ch.source.owner
        if ctx.elements.get(src) is not None and ctx.elements[src].kind == "delay":
            # a delay's emission needs no inputs; it never starts an edge
            continue
        for sk in ch.sinks:
            if sk.owner is not None and sk.owner != src:
                edges.add((src, sk.owner))
    for element in ctx.elements.values():
        clock_sources: list[str] = []
        if element.gate is not None:
            clock_sources.extend(referenced_ports(element.gate))
        if element.kind == "when":
            clock_sources.extend(referenced_ports(element.spec.condition))
        for path in clock_sources:
            producer = ctx.producer_of(path)
            if producer is not None and producer != element.name:
                edges.add((producer, element.name))
    return edges


def check_context(ctx: ContextView) -> Schedule | Diagnostic:
    edges = dependency_edges(ctx)
    order = _topo_order(list(ctx.elements), edges)
    if order is not None:
        return Schedule(ctx.name, tuple(order), frozenset(edges))
    cycle = _canonical_cycle(list(ctx.elements), edges)
    path = " -> ".join(cycle + cycle[:1])
    return Diagnostic("error", "AM-CAUS-001", f"{ctx.prefix}{cycle[0]}" if not ctx.is_top else cycle[0],
                      f"instantaneous loop: {path}")


def _topo_order(nodes: list[str], edges: set[tuple[str, str]]) -> list[str] | None:
    """Kahn's algorithm; among ready nodes, declaration order wins."""
    indeg = {n: 0 for n in nodes}
    succs: dict[str, list[str]] = {n: [] for n in nodes}
    for a, b in edges:
        if a in indeg and b in indeg:
            succs[a].append(b)
            indeg[b] += 1
    order: list[str] = []
    ready = [n for n in nodes if indeg[n] == 0]
    while ready:
        cur = ready.pop(0)
        order.append(cur)
        newly = []
        for nxt in succs[cur]:
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                newly.append(nxt)
        if newly:
            position = {n: i for i, n in enumerate(nodes)}
            ready.extend(newly)
            ready.sort(key=lambda n: position[n])
    if len(order) != len(nodes):
        return None
    return order


def _canonical_cycle(nodes: list[str], edges: set[tuple[str, str]]) -> list[str]:
    """A cycle through the lexicographically smallest node on any cycle."""
    succs: dict[str, list[str]] = {n: [] for n in nodes}
    for a, b in edges:
        if a in succs and b in succs:
            succs[a].append(b)
    for n in succs:
        succs[n].sort()

    def find_cycle_from(start: str) -> list[str] | None:
        stack = [(start, [start])]
        visiting: set[str] = set()
        while stack:
            node, path = stack.pop()
            for nxt in succs[node]:
                if nxt == start:
                    return path
                if nxt not in visiting:
                    visiting.add(nxt)
                    stack.append((nxt, path + [nxt]))
        return None

    for start in sorted(nodes):
        cycle = find_cycle_from(start)
        if cycle is not None:
            return cycle
    return nodes  # unreachable if called on a genuine cycle


def causality_check(project: m.Project, component: str | None = None) -> dict[str, Schedule] | list[Diagnostic]:
    """Schedule per context (top network plus each SSD/DFD definition).

    `component` restricts the check to one component's definition."""
    sink = DiagnosticSink()
    schedules: dict[str, Schedule] = {}
    for ctx in all_contexts(project):
        if component is not None and ctx.name != component:
            continue
        result = check_context(ctx)
        if isinstance(result, Schedule):
            schedules[ctx.name] = result
        else:
            sink.items.append(result)
    if sink.has_errors:
        return sink.items
    return schedules
