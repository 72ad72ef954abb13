"""In-memory representation of architecture models.

A Project holds component types, clusters, the top-level channel network,
platform elements and deployment bindings for one abstraction level (FAA,
FDA or LA). All model objects are immutable after construction; analyses
and transformations build new Projects instead of mutating.

Definition kinds mirror the modeling notations:
  SSD  hierarchical component network, sibling channels delayed one tick
  DFD  block network with instantaneous default communication
  MTD  mode automaton with one subordinate behavior per mode
  STD  deterministic extended state machine
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .clocks import ClockExpr
from .datatypes import EnumDecl, PortType
from .diagnostics import ModelError
from .expr import Expr, Value

FAA = "FAA"
FDA = "FDA"
LA = "LA"
LEVELS = (FAA, FDA, LA)

IN = "in"
OUT = "out"

SSD_DELAYED = "ssd_delayed"
INSTANTANEOUS = "dfd_instantaneous"
DFD_DELAY = "dfd_delay"


@dataclass(frozen=True)
class Port:
    name: str
    direction: str  # IN | OUT
    type: PortType
    clock: ClockExpr | None = None
    value_range: tuple[float, float] | None = None
    actuator: bool = False


@dataclass(frozen=True)
class Endpoint:
    """Port reference inside a definition: `owner` is a sub/block/top-element
    name, or None for a port of the enclosing definition itself."""

    owner: str | None
    port: str

    @property
    def dotted(self) -> str:
        return self.port if self.owner is None else f"{self.owner}.{self.port}"

    def __str__(self) -> str:
        return self.dotted


@dataclass(frozen=True)
class Channel:
    """1-source/N-sink connection. Fan-out through `sinks`; fan-in between
    channels is rejected outside FAA. `init` applies to dfd_delay only and
    may be the absent message."""

    source: Endpoint
    sinks: tuple[Endpoint, ...]
    kind: str = INSTANTANEOUS
    init: Value | None = None
    clock: ClockExpr | None = None


@dataclass(frozen=True)
class SubComponent:
    name: str
    type_name: str


@dataclass(frozen=True)
class SSDDef:
    subs: tuple[SubComponent, ...]
    channels: tuple[Channel, ...]


@dataclass(frozen=True)
class InstanceSpec:
    """DFD block backed by a named component type, optionally clock-gated:
    while the gate is false the instance is frozen and emits nothing."""

    type_name: str
    gate: ClockExpr | None = None


@dataclass(frozen=True)
class FunctionSpec:
    """Stateless block: named inputs, single output `out`, strict over absence."""

    params: tuple[str, ...]
    body: Expr


@dataclass(frozen=True)
class WhenSpec:
    """Sampler: ports `in`/`out`; forwards the input only on ticks where the
    condition clock fires."""

    condition: ClockExpr


@dataclass(frozen=True)
class DelaySpec:
    """Unit delay on the flow's clock: ports `in`/`out`; emits `init` at the
    first firing, afterwards the value of the previous firing."""

    init: Value


@dataclass(frozen=True)
class MergeSpec:
    """Selector: ports `in1..inN`/`out`; emits the unique present input.
    Two simultaneously present inputs are a simulation-invariant breach."""

    arity: int

    @property
    def input_names(self) -> tuple[str, ...]:
        return tuple(f"in{i + 1}" for i in range(self.arity))


BlockSpec = InstanceSpec | FunctionSpec | WhenSpec | DelaySpec | MergeSpec


@dataclass(frozen=True)
class DFDBlock:
    name: str
    spec: BlockSpec


@dataclass(frozen=True)
class DFDDef:
    blocks: tuple[DFDBlock, ...]
    wires: tuple[Channel, ...]


@dataclass(frozen=True)
class Mode:
    name: str
    behavior: str  # component type name, same port interface as the MTD component


@dataclass(frozen=True)
class MTDTransition:
    source: str
    target: str
    trigger: Expr  # over input presence and values
    priority: int  # lower value wins; unique per source mode


@dataclass(frozen=True)
class MTDDef:
    modes: tuple[Mode, ...]
    transitions: tuple[MTDTransition, ...]
    initial: str


@dataclass(frozen=True)
class VarDecl:
    name: str
    type: PortType
    init: Value


@dataclass(frozen=True)
class Assign:
    var: str
    value: Expr


@dataclass(frozen=True)
class Emit:
    port: str
    value: Expr


Action = Assign | Emit


@dataclass(frozen=True)
class STDTransition:
    source: str
    target: str
    guard: Expr  # side-effect free by construction
    priority: int  # lower value wins; unique per source state
    actions: tuple[Action, ...] = ()


@dataclass(frozen=True)
class STDDef:
    variables: tuple[VarDecl, ...]
    states: tuple[str, ...]
    initial: str
    transitions: tuple[STDTransition, ...]


@dataclass(frozen=True)
class FunctionDef:
    """Atomic component defined by one expression over its in-port names,
    feeding its single out-port."""

    body: Expr


@dataclass(frozen=True)
class Unspecified:
    """Behavior intentionally left open; legal only on the FAA level."""


Definition = SSDDef | DFDDef | MTDDef | STDDef | FunctionDef | Unspecified


@dataclass(frozen=True)
class ComponentType:
    name: str
    ports: tuple[Port, ...]
    definition: Definition

    def port(self, name: str) -> Port | None:
        for p in self.ports:
            if p.name == name:
                return p
        return None

    def in_ports(self) -> tuple[Port, ...]:
        return tuple(p for p in self.ports if p.direction == IN)

    def out_ports(self) -> tuple[Port, ...]:
        return tuple(p for p in self.ports if p.direction == OUT)


@dataclass(frozen=True)
class Cluster:
    """Smallest deployable unit: typed, clocked ports around one behavior."""

    name: str
    ports: tuple[Port, ...]
    behavior: str  # component type name

    def port(self, name: str) -> Port | None:
        for p in self.ports:
            if p.name == name:
                return p
        return None


@dataclass(frozen=True)
class Ecu:
    name: str


@dataclass(frozen=True)
class Task:
    name: str
    ecu: str
    period_ms: int
    priority: int


@dataclass(frozen=True)
class Bus:
    name: str
    connects: tuple[str, ...] = ()


@dataclass(frozen=True)
class Frame:
    name: str
    bus: str
    slots: tuple[str, ...]


@dataclass(frozen=True)
class TechArch:
    ecus: tuple[Ecu, ...]
    tasks: tuple[Task, ...]
    buses: tuple[Bus, ...]
    frames: tuple[Frame, ...]

    def task(self, name: str) -> Task | None:
        for t in self.tasks:
            if t.name == name:
                return t
        return None

    def frame(self, name: str) -> Frame | None:
        for f in self.frames:
            if f.name == name:
                return f
        return None

    def bus(self, name: str) -> Bus | None:
        for b in self.buses:
            if b.name == name:
                return b
        return None


@dataclass(frozen=True)
class ClusterBinding:
    cluster: str
    task: str


@dataclass(frozen=True)
class SignalBinding:
    """Routes one inter-ECU flow (identified by its source port path) to a
    frame slot. All remote readers receive the same slot."""

    source: str  # "Cluster.port"
    frame: str
    slot: str


@dataclass(frozen=True)
class Deployment:
    cluster_to_task: tuple[ClusterBinding, ...]
    signal_to_frame: tuple[SignalBinding, ...]


@dataclass(frozen=True)
class Project:
    name: str
    level: str
    tick_ms: int = 1
    data_types: tuple[EnumDecl, ...] = ()
    component_types: tuple[ComponentType, ...] = ()
    clusters: tuple[Cluster, ...] = ()
    channels: tuple[Channel, ...] = ()  # top-level network between components/clusters
    tech_arch: TechArch | None = None
    deployment: Deployment | None = None
    source_lines: dict = field(default_factory=dict, compare=False, repr=False)

    def component(self, name: str) -> ComponentType | None:
        for c in self.component_types:
            if c.name == name:
                return c
        return None

    def cluster(self, name: str) -> Cluster | None:
        for c in self.clusters:
            if c.name == name:
                return c
        return None

    def enum(self, name: str) -> EnumDecl | None:
        for e in self.data_types:
            if e.name == name:
                return e
        return None

    def top_nodes(self) -> tuple[str, ...]:
        """Names forming the top-level network: clusters on LA, otherwise
        every component type not instantiated inside another one."""
        if self.level == LA:
            return tuple(c.name for c in self.clusters)
        used = set()
        for comp in self.component_types:
            used.update(_referenced_types(comp.definition))
        return tuple(c.name for c in self.component_types if c.name not in used)

    def top_ports(self, node: str) -> tuple[Port, ...]:
        cluster = self.cluster(node)
        if cluster is not None:
            return cluster.ports
        comp = self.component(node)
        if comp is not None:
            return comp.ports
        return ()


def _referenced_types(definition: Definition) -> set[str]:
    refs: set[str] = set()
    if isinstance(definition, SSDDef):
        refs.update(s.type_name for s in definition.subs)
    elif isinstance(definition, DFDDef):
        for b in definition.blocks:
            if isinstance(b.spec, InstanceSpec):
                refs.add(b.spec.type_name)
    elif isinstance(definition, MTDDef):
        refs.update(m.behavior for m in definition.modes)
    return refs


def containment_edges(project: Project) -> dict[str, set[str]]:
    """Component-type containment graph (SSD subs, DFD instances, mode behaviors)."""
    return {c.name: _referenced_types(c.definition) for c in project.component_types}


def resolve(project: Project, path: str):
    """Navigate a dotted element path; empty path yields the project.

    Raises ModelError AM-RESOLVE-001 (not found) or AM-RESOLVE-002 (a name
    matches elements in more than one namespace)."""
    if path == "":
        return project
    segments = path.split(".")
    head, rest = segments[0], segments[1:]
    matches = []
    if project.component(head) is not None:
        matches.append(project.component(head))
    if project.cluster(head) is not None:
        matches.append(project.cluster(head))
    if project.enum(head) is not None:
        matches.append(project.enum(head))
    if project.tech_arch is not None:
        ta = project.tech_arch
        for group in (ta.ecus, ta.tasks, ta.buses, ta.frames):
            for element in group:
                if element.name == head:
                    matches.append(element)
    if not matches:
        raise ModelError("AM-RESOLVE-001", f"no element named '{head}'", path)
    if len(matches) > 1:
        raise ModelError("AM-RESOLVE-002", f"'{head}' is ambiguous across namespaces", path)
    current = matches[0]
    for i, seg in enumerate(rest):
        current = _resolve_in(project, current, seg, ".".join(segments[: i + 2]))
    return current


def _resolve_in(project: Project, element, segment: str, sofar: str):
    if isinstance(element, ComponentType):
        p = element.port(segment)
        if p is not None:
            return p
        d = element.definition
        if isinstance(d, SSDDef):
            for s in d.subs:
                if s.name == segment:
                    return s
        elif isinstance(d, DFDDef):
            for b in d.blocks:
                if b.name == segment:
                    return b
        elif isinstance(d, MTDDef):
            for m in d.modes:
                if m.name == segment:
                    return m
        elif isinstance(d, STDDef):
            if segment in d.states:
                return segment
            for v in d.variables:
                if v.name == segment:
                    return v
    elif isinstance(element, SubComponent):
        target = project.component(element.type_name)
        if target is not None:
            return _resolve_in(project, target, segment, sofar)
    elif isinstance(element, DFDBlock):
        if isinstance(element.spec, InstanceSpec):
            target = project.component(element.spec.type_name)
            if target is not None:
                return _resolve_in(project, target, segment, sofar)
    elif isinstance(element, Cluster):
        p = element.port(segment)
        if p is not None:
            return p
        behavior = project.component(element.behavior)
        if behavior is not None:
            return _resolve_in(project, behavior, segment, sofar)
    elif isinstance(element, Frame):
        if segment in element.slots:
            return segment
    elif isinstance(element, EnumDecl):
        if segment in element.labels:
            return segment
    raise ModelError("AM-RESOLVE-001", f"no element named '{segment}'", sofar)
