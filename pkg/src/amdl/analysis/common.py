"""Uniform view over wiring contexts.

Analyses and the simulator all walk the same structures: the top-level
network and each SSD/DFD component definition. A ContextView flattens the
differences (sub-components, builtin blocks, singleton top components,
clusters) into named elements with in/out ports plus the channel list.

Flow identifiers are `<context>.<source endpoint>` for definition contexts
and `<source endpoint>` for the top-level network; one channel is one flow.
"""

from __future__ import annotations

from dataclasses import dataclass

from .. import model as m
from ..clocks import ClockExpr
from ..datatypes import PortType


@dataclass(frozen=True)
class ElementView:
    name: str
    kind: str  # instance | fn | when | delay | merge
    spec: object  # the underlying BlockSpec / ComponentType / Cluster
    comp: m.ComponentType | None  # resolved type for instances
    in_ports: tuple[str, ...]
    out_ports: tuple[str, ...]
    gate: ClockExpr | None = None

    def declared_type(self, port: str) -> PortType | None:
        owner = self.spec if isinstance(self.spec, (m.ComponentType, m.Cluster)) else self.comp
        if owner is None:
            return None
        p = owner.port(port)
        return p.type if p else None

    def declared_clock(self, port: str) -> ClockExpr | None:
        owner = self.spec if isinstance(self.spec, (m.ComponentType, m.Cluster)) else self.comp
        if owner is None:
            return None
        p = owner.port(port)
        return p.clock if p else None


@dataclass(frozen=True)
class ContextView:
    name: str  # component name, or project name for the top network
    is_top: bool
    kind: str  # top | ssd | dfd
    elements: dict[str, ElementView]
    channels: tuple[m.Channel, ...]
    own_ports: tuple[m.Port, ...]  # empty for the top network

    @property
    def prefix(self) -> str:
        return "" if self.is_top else f"{self.name}."

    def flow_id(self, channel: m.Channel) -> str:
        return self.prefix + channel.source.dotted

    def own_port(self, name: str) -> m.Port | None:
        for p in self.own_ports:
            if p.name == name:
                return p
        return None

    def channels_into(self, element: str, port: str) -> list[m.Channel]:
        target = m.Endpoint(element, port)
        return [ch for ch in self.channels if target in ch.sinks]

    def channels_from(self, endpoint: m.Endpoint) -> list[m.Channel]:
        return [ch for ch in self.channels if ch.source == endpoint]

    def producer_of(self, path: str) -> str | None:
        """Element that computes the value observed at `path` this tick.

        Paths name an element output ("ctl.mode"), an element input or own
        port (followed through its driving channel), or a bare element."""
        parts = path.split(".")
        if len(parts) == 1:
            if parts[0] in self.elements:
                return parts[0]
            for ch in self.channels:
                if m.Endpoint(None, parts[0]) in ch.sinks:
                    return ch.source.owner
            return None
        owner, port = parts[0], parts[1]
        element = self.elements.get(owner)
        if element is None:
            return None
        if port in element.out_ports:
            return owner
        for ch in self.channels_into(owner, port):
            return ch.source.owner
        return None


def _instance_view(name: str, comp: m.ComponentType | None, spec, gate=None) -> ElementView:
    in_ports = tuple(p.name for p in comp.in_ports()) if comp else ()
    out_ports = tuple(p.name for p in comp.out_ports()) if comp else ()
    return ElementView(name, "instance", spec, comp, in_ports, out_ports, gate)


def _block_view(project: m.Project, block: m.DFDBlock) -> ElementView:
    spec = block.spec
    if isinstance(spec, m.InstanceSpec):
        comp = project.component(spec.type_name)
        return _instance_view(block.name, comp, spec, spec.gate)
    if isinstance(spec, m.FunctionSpec):
        return ElementView(block.name, "fn", spec, None, spec.params, ("out",))
    if isinstance(spec, m.WhenSpec):
        return ElementView(block.name, "when", spec, None, ("in",), ("out",))
    if isinstance(spec, m.DelaySpec):
        return ElementView(block.name, "delay", spec, None, ("in",), ("out",))
    if isinstance(spec, m.MergeSpec):
        return ElementView(block.name, "merge", spec, None, spec.input_names, ("out",))
    raise TypeError(f"unknown block spec {spec!r}")


def top_context(project: m.Project) -> ContextView:
    elements: dict[str, ElementView] = {}
    for node in project.top_nodes():
        cluster = project.cluster(node)
        if cluster is not None:
            behavior = project.component(cluster.behavior)
            view = ElementView(node, "instance", cluster, behavior,
                               tuple(p.name for p in cluster.ports if p.direction == m.IN),
                               tuple(p.name for p in cluster.ports if p.direction == m.OUT))
        else:
            comp = project.component(node)
            view = _instance_view(node, comp, comp)
        elements[node] = view
    return ContextView(project.name, True, "top", elements, project.channels, ())


def definition_context(project: m.Project, comp: m.ComponentType) -> ContextView | None:
    d = comp.definition
    if isinstance(d, m.SSDDef):
        elements = {}
        for sub in d.subs:
            elements[sub.name] = _instance_view(sub.name, project.component(sub.type_name), sub)
        return ContextView(comp.name, False, "ssd", elements, d.channels, comp.ports)
    if isinstance(d, m.DFDDef):
        elements = {b.name: _block_view(project, b) for b in d.blocks}
        return ContextView(comp.name, False, "dfd", elements, d.wires, comp.ports)
    return None


def all_contexts(project: m.Project) -> list[ContextView]:
    """Top network first, then every SSD/DFD definition in declaration order."""
    out = [top_context(project)]
    for comp in project.component_types:
        ctx = definition_context(project, comp)
        if ctx is not None:
            out.append(ctx)
    return out
