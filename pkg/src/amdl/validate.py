"""Structural well-formedness (validate) and per-level legality (level_check).

validate() is total and deterministic: it never raises on model content,
it returns every violation it can find in declaration order.
"""

from __future__ import annotations

from . import model as m
from .clocks import ClockExpr, Every
from .datatypes import EnumType, FixedPoint, is_impl
from .diagnostics import Diagnostic, DiagnosticSink
from .expr import referenced_names


def validate(project: m.Project) -> list[Diagnostic]:
    sink = DiagnosticSink()
    _check_project_header(project, sink)
    _check_unique_names(project, sink)
    _check_data_types(project, sink)
    for comp in project.component_types:
        _check_component(project, comp, sink)
    for cluster in project.clusters:
        _check_cluster(project, cluster, sink)
    _check_containment(project, sink)
    _check_top_channels(project, sink)
    if project.tech_arch is not None:
        _check_tech_arch(project, project.tech_arch, sink)
    if project.deployment is not None:
        _check_deployment(project, sink)
    return sink.items


def level_check(project: m.Project) -> list[Diagnostic]:
    """Constructs illegal at the project's declared level."""
    sink = DiagnosticSink()
    if project.level not in m.LEVELS:
        sink.error("AM-LEVEL-000", project.name, f"unknown level '{project.level}'")
        return sink.items
    if project.level in (m.FDA, m.LA):
        for comp in project.component_types:
            if isinstance(comp.definition, m.Unspecified):
                sink.error("AM-LEVEL-001", comp.name,
                           f"component '{comp.name}' has unspecified behavior; "
                           f"{project.level} requires a defined behavior for every component")
    if project.level in (m.FAA, m.FDA):
        for path, ptype in _all_typed_slots(project):
            if is_impl(ptype):
                sink.error("AM-LEVEL-002", path,
                           f"implementation type '{ptype}' is not allowed on level {project.level}")
        if project.clusters:
            sink.error("AM-LEVEL-003", project.name, "clusters are only allowed on level LA")
        if project.tech_arch is not None:
            sink.error("AM-LEVEL-003", project.name, "a technical architecture is only allowed on level LA")
        if project.deployment is not None:
            sink.error("AM-LEVEL-003", project.name, "a deployment is only allowed on level LA")
    if project.level == m.LA:
        cyclic = _cyclic_types(project)
        for cluster in project.clusters:
            if cluster.behavior in cyclic:
                sink.error("AM-LEVEL-005", cluster.name,
                           f"cluster '{cluster.name}' has a recursively defined behavior")
    return sink.items


# --- individual rule groups -------------------------------------------------

def _check_project_header(project: m.Project, sink: DiagnosticSink) -> None:
    if project.tick_ms <= 0:
        sink.error("AM-STRUCT-022", project.name, f"base tick must be positive, got {project.tick_ms}")


def _check_unique_names(project: m.Project, sink: DiagnosticSink) -> None:
    _dupes([c.name for c in project.component_types], "component type", project.name, sink)
    _dupes([c.name for c in project.clusters], "cluster", project.name, sink)
    _dupes([e.name for e in project.data_types], "data type", project.name, sink)
    if project.tech_arch is not None:
        ta = project.tech_arch
        _dupes([e.name for e in ta.ecus], "ecu", project.name, sink)
        _dupes([t.name for t in ta.tasks], "task", project.name, sink)
        _dupes([b.name for b in ta.buses], "bus", project.name, sink)
        _dupes([f.name for f in ta.frames], "frame", project.name, sink)


def _dupes(names: list[str], what: str, path: str, sink: DiagnosticSink) -> None:
    seen: set[str] = set()
    for name in names:
        if name in seen:
            sink.error("AM-STRUCT-001", path, f"duplicate {what} '{name}'")
        seen.add(name)


def _check_data_types(project: m.Project, sink: DiagnosticSink) -> None:
    for e in project.data_types:
        if not e.labels:
            sink.error("AM-STRUCT-020", e.name, "enum has no labels")
        _dupes(list(e.labels), "enum label", e.name, sink)


def _check_port_decl(project: m.Project, path: str, port: m.Port, sink: DiagnosticSink) -> None:
    if isinstance(port.type, EnumType) and project.enum(port.type.name) is None:
        sink.error("AM-STRUCT-002", f"{path}.{port.name}", f"unknown enum type '{port.type.name}'")
    if isinstance(port.type, FixedPoint) and port.type.scale <= 0:
        sink.error("AM-STRUCT-021", f"{path}.{port.name}", "fixed-point scale must be positive")
    if port.clock is not None:
        _check_clock(port.clock, f"{path}.{port.name}", sink)


def _check_clock(clock: ClockExpr, path: str, sink: DiagnosticSink) -> None:
    if isinstance(clock, Every) and clock.n < 1:
        sink.error("AM-STRUCT-028", path, f"every({clock.n}, ...) requires n >= 1")
    for child in _clock_children(clock):
        _check_clock(child, path, sink)


def _clock_children(clock: ClockExpr):
    from . import clocks as c
    if isinstance(clock, c.Every):
        return (clock.sub,)
    if isinstance(clock, (c.ClockAnd, c.ClockOr)):
        return clock.operands
    if isinstance(clock, c.ClockNot):
        return (clock.operand,)
    return ()


def _check_component(project: m.Project, comp: m.ComponentType, sink: DiagnosticSink) -> None:
    _dupes([p.name for p in comp.ports], "port", comp.name, sink)
    for p in comp.ports:
        _check_port_decl(project, comp.name, p, sink)
    d = comp.definition
    if isinstance(d, m.SSDDef):
        _check_ssd(project, comp, d, sink)
    elif isinstance(d, m.DFDDef):
        _check_dfd(project, comp, d, sink)
    elif isinstance(d, m.MTDDef):
        _check_mtd(project, comp, d, sink)
    elif isinstance(d, m.STDDef):
        _check_std(project, comp, d, sink)
    elif isinstance(d, m.FunctionDef):
        _check_function(comp, d, sink)


def _check_ssd(project: m.Project, comp: m.ComponentType, d: m.SSDDef, sink: DiagnosticSink) -> None:
    _dupes([s.name for s in d.subs], "sub-component", comp.name, sink)
    sub_types: dict[str, m.ComponentType | None] = {}
    for s in d.subs:
        target = project.component(s.type_name)
        sub_types[s.name] = target
        if target is None:
            sink.error("AM-STRUCT-002", f"{comp.name}.{s.name}", f"unknown component type '{s.type_name}'")
    def port_of(ep: m.Endpoint) -> m.Port | None:
        if ep.owner is None:
            return comp.port(ep.port)
        owner = sub_types.get(ep.owner)
        return owner.port(ep.port) if owner is not None else None

    _check_channel_group(project, comp.name, d.channels, port_of, sink, ssd=True,
                         known_owners=set(sub_types))


def _check_dfd(project: m.Project, comp: m.ComponentType, d: m.DFDDef, sink: DiagnosticSink) -> None:
    _dupes([b.name for b in d.blocks], "block", comp.name, sink)
    block_map: dict[str, m.DFDBlock] = {b.name: b for b in d.blocks}
    for b in d.blocks:
        if isinstance(b.spec, m.InstanceSpec):
            if project.component(b.spec.type_name) is None:
                sink.error("AM-STRUCT-002", f"{comp.name}.{b.name}",
                           f"unknown component type '{b.spec.type_name}'")
            if b.spec.gate is not None:
                _check_clock(b.spec.gate, f"{comp.name}.{b.name}", sink)
        elif isinstance(b.spec, m.MergeSpec) and b.spec.arity < 1:
            sink.error("AM-STRUCT-028", f"{comp.name}.{b.name}", "merge arity must be >= 1")
        elif isinstance(b.spec, m.WhenSpec):
            _check_clock(b.spec.condition, f"{comp.name}.{b.name}", sink)

    def port_of(ep: m.Endpoint) -> m.Port | None:
        if ep.owner is None:
            return comp.port(ep.port)
        block = block_map.get(ep.owner)
        if block is None:
            return None
        return _block_port(project, block, ep.port)

    _check_channel_group(project, comp.name, d.wires, port_of, sink, ssd=False,
                         known_owners=set(block_map))


def _block_port(project: m.Project, block: m.DFDBlock, port: str) -> m.Port | None:
    """Synthetic Port for builtin blocks (types are inferred, so the declared
    type is irrelevant here; direction is what channel checks need)."""
    spec = block.spec
    if isinstance(spec, m.InstanceSpec):
        target = project.component(spec.type_name)
        return target.port(port) if target is not None else None
    if isinstance(spec, m.FunctionSpec):
        if port in spec.params:
            return m.Port(port, m.IN, _ANYTYPE)
        if port == "out":
            return m.Port("out", m.OUT, _ANYTYPE)
        return None
    if isinstance(spec, (m.WhenSpec, m.DelaySpec)):
        if port == "in":
            return m.Port("in", m.IN, _ANYTYPE)
        if port == "out":
            return m.Port("out", m.OUT, _ANYTYPE)
        return None
    if isinstance(spec, m.MergeSpec):
        if port in spec.input_names:
            return m.Port(port, m.IN, _ANYTYPE)
        if port == "out":
            return m.Port("out", m.OUT, _ANYTYPE)
        return None
    return None


_ANYTYPE = EnumType("__any__")  # placeholder for inferred block ports


def _check_channel_group(project: m.Project, path: str, channels: tuple[m.Channel, ...],
                         port_of, sink: DiagnosticSink, ssd: bool,
                         known_owners: set[str]) -> None:
    sink_counts: dict[str, int] = {}
    for ch in channels:
        for ep in (ch.source, *ch.sinks):
            if ep.owner is not None and ep.owner not in known_owners:
                sink.error("AM-STRUCT-002", f"{path}.{ep.dotted}", f"unknown channel endpoint owner '{ep.owner}'")
            elif port_of(ep) is None:
                sink.error("AM-STRUCT-002", f"{path}.{ep.dotted}", "unknown channel endpoint port")
        src_port = port_of(ch.source)
        if src_port is not None:
            # a source must produce values here: own in-port or sub out-port
            expected = m.IN if ch.source.owner is None else m.OUT
            if src_port.direction != expected:
                sink.error("AM-STRUCT-004", f"{path}.{ch.source.dotted}",
                           "channel source must be an in-port of the enclosing component "
                           "or an out-port of a sub-element")
        for ep in ch.sinks:
            p = port_of(ep)
            if p is not None:
                expected = m.OUT if ep.owner is None else m.IN
                if p.direction != expected:
                    sink.error("AM-STRUCT-004", f"{path}.{ep.dotted}",
                               "channel sink must be an out-port of the enclosing component "
                               "or an in-port of a sub-element")
            sink_counts[ep.dotted] = sink_counts.get(ep.dotted, 0) + 1
        if ssd:
            delegation = ch.source.owner is None or any(ep.owner is None for ep in ch.sinks)
            if delegation and ch.kind == m.SSD_DELAYED:
                sink.error("AM-STRUCT-006", f"{path}.{ch.source.dotted}",
                           "port delegations must be instantaneous")
            if not delegation and ch.kind != m.SSD_DELAYED:
                sink.error("AM-STRUCT-006", f"{path}.{ch.source.dotted}",
                           "channels between sub-components of an SSD are always delayed")
        if ch.kind == m.DFD_DELAY and ch.init is None:
            sink.error("AM-STRUCT-007", f"{path}.{ch.source.dotted}",
                       "delayed channel needs an explicit initial value ('-' for absent)")
        if ch.clock is not None:
            _check_clock(ch.clock, f"{path}.{ch.source.dotted}", sink)
    if project.level != m.FAA:
        for dotted, count in sink_counts.items():
            if count > 1:
                sink.error("AM-STRUCT-005", f"{path}.{dotted}",
                           f"{count} writers on one port; route fan-in through an explicit merge block")


def _check_mtd(project: m.Project, comp: m.ComponentType, d: m.MTDDef, sink: DiagnosticSink) -> None:
    _dupes([mo.name for mo in d.modes], "mode", comp.name, sink)
    mode_names = {mo.name for mo in d.modes}
    if d.initial not in mode_names:
        sink.error("AM-STRUCT-008", comp.name, f"initial mode '{d.initial}' is not a declared mode")
    for mo in d.modes:
        behavior = project.component(mo.behavior)
        if behavior is None:
            sink.error("AM-STRUCT-002", f"{comp.name}.{mo.name}", f"unknown behavior component '{mo.behavior}'")
        elif not _same_interface(comp, behavior):
            sink.error("AM-STRUCT-011", f"{comp.name}.{mo.name}",
                       f"behavior '{mo.behavior}' does not have the same port interface as '{comp.name}'")
    prios: dict[str, set[int]] = {}
    for t in d.transitions:
        for end in (t.source, t.target):
            if end not in mode_names:
                sink.error("AM-STRUCT-012", comp.name, f"transition endpoint '{end}' is not a declared mode")
        if t.priority in prios.setdefault(t.source, set()):
            sink.error("AM-STRUCT-010", comp.name,
                       f"duplicate transition priority {t.priority} from mode '{t.source}'")
        prios[t.source].add(t.priority)
        _check_expr_names(t.trigger, comp, None, f"{comp.name}", sink, project)
    # reachability from the initial mode
    if d.initial in mode_names:
        reached = {d.initial}
        frontier = [d.initial]
        edges: dict[str, list[str]] = {}
        for t in d.transitions:
            edges.setdefault(t.source, []).append(t.target)
        while frontier:
            cur = frontier.pop()
            for nxt in edges.get(cur, []):
                if nxt in mode_names and nxt not in reached:
                    reached.add(nxt)
                    frontier.append(nxt)
        for mo in d.modes:
            if mo.name not in reached:
                sink.error("AM-STRUCT-009", f"{comp.name}.{mo.name}",
                           f"mode '{mo.name}' is unreachable from the initial mode")


def _same_interface(a: m.ComponentType, b: m.ComponentType) -> bool:
    def key(c: m.ComponentType):
        return tuple(sorted((p.name, p.direction, str(p.type)) for p in c.ports))
    return key(a) == key(b)


def _check_std(project: m.Project, comp: m.ComponentType, d: m.STDDef, sink: DiagnosticSink) -> None:
    _dupes(list(d.states), "state", comp.name, sink)
    _dupes([v.name for v in d.variables], "variable", comp.name, sink)
    states = set(d.states)
    var_names = {v.name for v in d.variables}
    out_ports = {p.name for p in comp.out_ports()}
    if d.initial not in states:
        sink.error("AM-STRUCT-013", comp.name, f"initial state '{d.initial}' is not a declared state")
    prios: dict[str, set[int]] = {}
    for t in d.transitions:
        for end in (t.source, t.target):
            if end not in states:
                sink.error("AM-STRUCT-015", comp.name, f"transition endpoint '{end}' is not a declared state")
        if t.priority in prios.setdefault(t.source, set()):
            sink.error("AM-STRUCT-014", comp.name,
                       f"duplicate transition priority {t.priority} from state '{t.source}'")
        prios[t.source].add(t.priority)
        _check_expr_names(t.guard, comp, var_names, comp.name, sink, project)
        for action in t.actions:
            if isinstance(action, m.Emit):
                if action.port not in out_ports:
                    sink.error("AM-STRUCT-016", comp.name, f"emit target '{action.port}' is not an out-port")
                _check_expr_names(action.value, comp, var_names, comp.name, sink, project)
            else:
                if action.var not in var_names:
                    sink.error("AM-STRUCT-017", comp.name, f"assignment to undeclared variable '{action.var}'")
                _check_expr_names(action.value, comp, var_names, comp.name, sink, project)


def _check_function(comp: m.ComponentType, d: m.FunctionDef, sink: DiagnosticSink) -> None:
    if len(comp.out_ports()) != 1:
        sink.error("AM-STRUCT-027", comp.name,
                   "a function-defined component needs exactly one out-port")


def _check_expr_names(expr, comp: m.ComponentType, extra: set[str] | None,
                      path: str, sink: DiagnosticSink, project: m.Project) -> None:
    in_ports = {p.name for p in comp.in_ports()}
    allowed = in_ports | (extra or set())
    for name in referenced_names(expr):
        head = name.split(".")[0]
        if name in allowed or head in allowed:
            continue
        if project.enum(head) is not None:
            continue  # Enum.Label literal
        sink.error("AM-STRUCT-002", path, f"expression references unknown name '{name}'")


def _check_cluster(project: m.Project, cluster: m.Cluster, sink: DiagnosticSink) -> None:
    _dupes([p.name for p in cluster.ports], "port", cluster.name, sink)
    for p in cluster.ports:
        _check_port_decl(project, cluster.name, p, sink)
        if p.clock is None:
            sink.error("AM-STRUCT-018", f"{cluster.name}.{p.name}",
                       "cluster ports must declare an explicit clock")
    if project.component(cluster.behavior) is None:
        sink.error("AM-STRUCT-002", cluster.name, f"unknown behavior component '{cluster.behavior}'")


def _check_containment(project: m.Project, sink: DiagnosticSink) -> None:
    for name in sorted(_cyclic_types(project)):
        sink.error("AM-STRUCT-003", name,
                   f"component type '{name}' transitively contains itself")


def _cyclic_types(project: m.Project) -> set[str]:
    edges = m.containment_edges(project)
    cyclic: set[str] = set()
    state: dict[str, int] = {}  # 1 = on stack, 2 = done

    def visit(node: str, stack: list[str]) -> None:
        state[node] = 1
        stack.append(node)
        for nxt in sorted(edges.get(node, ())):
            if nxt not in edges:
                continue
            if state.get(nxt) == 1:
                cyclic.update(stack[stack.index(nxt):])
            elif state.get(nxt) is None:
                visit(nxt, stack)
        stack.pop()
        state[node] = 2

    for name in edges:
        if state.get(name) is None:
            visit(name, [])
    return cyclic


def _check_top_channels(project: m.Project, sink: DiagnosticSink) -> None:
    nodes = set(project.top_nodes())

    def port_of(ep: m.Endpoint) -> m.Port | None:
        if ep.owner is None:
            return None
        for p in project.top_ports(ep.owner):
            if p.name == ep.port:
                return p
        return None

    sink_counts: dict[str, int] = {}
    for ch in project.channels:
        for ep in (ch.source, *ch.sinks):
            if ep.owner is None:
                sink.error("AM-STRUCT-002", f"{project.name}.{ep.dotted}",
                           "top-level channels must name their component or cluster")
                continue
            if ep.owner not in nodes:
                sink.error("AM-STRUCT-002", f"{project.name}.{ep.dotted}",
                           f"'{ep.owner}' is not a top-level component or cluster")
            elif port_of(ep) is None:
                sink.error("AM-STRUCT-002", f"{project.name}.{ep.dotted}", "unknown channel endpoint port")
        p = port_of(ch.source)
        if p is not None and p.direction != m.OUT:
            sink.error("AM-STRUCT-004", f"{project.name}.{ch.source.dotted}",
                       "top-level channel source must be an out-port")
        for ep in ch.sinks:
            p = port_of(ep)
            if p is not None and p.direction != m.IN:
                sink.error("AM-STRUCT-004", f"{project.name}.{ep.dotted}",
                           "top-level channel sink must be an in-port")
            sink_counts[ep.dotted] = sink_counts.get(ep.dotted, 0) + 1
        if project.level == m.LA and ch.kind == m.SSD_DELAYED:
            sink.error("AM-STRUCT-006", f"{project.name}.{ch.source.dotted}",
                       "cluster network channels are instantaneous or explicitly delayed")
        if project.level != m.LA and ch.kind != m.SSD_DELAYED:
            sink.error("AM-STRUCT-006", f"{project.name}.{ch.source.dotted}",
                       "top-level channels between components carry a one-tick delay")
        if ch.kind == m.DFD_DELAY and ch.init is None:
            sink.error("AM-STRUCT-007", f"{project.name}.{ch.source.dotted}",
                       "delayed channel needs an explicit initial value ('-' for absent)")
    if project.level != m.FAA:
        for dotted, count in sink_counts.items():
            if count > 1:
                sink.error("AM-STRUCT-005", f"{project.name}.{dotted}",
                           f"{count} writers on one port; route fan-in through an explicit merge block")


def _check_tech_arch(project: m.Project, ta: m.TechArch, sink: DiagnosticSink) -> None:
    ecu_names = {e.name for e in ta.ecus}
    bus_names = {b.name for b in ta.buses}
    for t in ta.tasks:
        if t.ecu not in ecu_names:
            sink.error("AM-STRUCT-002", t.name, f"task runs on unknown ecu '{t.ecu}'")
        if t.period_ms <= 0:
            sink.error("AM-STRUCT-022", t.name, "task period must be positive")
    for b in ta.buses:
        for e in b.connects:
            if e not in ecu_names:
                sink.error("AM-STRUCT-002", b.name, f"bus connects unknown ecu '{e}'")
    for f in ta.frames:
        if f.bus not in bus_names:
            sink.error("AM-STRUCT-002", f.name, f"frame on unknown bus '{f.bus}'")
        _dupes(list(f.slots), "slot", f.name, sink)


def _check_deployment(project: m.Project, sink: DiagnosticSink) -> None:
    dep = project.deployment
    ta = project.tech_arch
    if ta is None:
        sink.error("AM-STRUCT-002", project.name, "deployment without a technical architecture")
        return
    task_names = {t.name for t in ta.tasks}
    mapped: set[str] = set()
    for binding in dep.cluster_to_task:
        if project.cluster(binding.cluster) is None:
            sink.error("AM-STRUCT-002", binding.cluster, f"deployment maps unknown cluster '{binding.cluster}'")
        if binding.task not in task_names:
            sink.error("AM-STRUCT-002", binding.cluster, f"deployment maps to unknown task '{binding.task}'")
        if binding.cluster in mapped:
            sink.error("AM-STRUCT-025", binding.cluster,
                       f"cluster '{binding.cluster}' is mapped to more than one task")
        mapped.add(binding.cluster)
    for sig in dep.signal_to_frame:
        frame = ta.frame(sig.frame)
        if frame is None:
            sink.error("AM-STRUCT-002", sig.source, f"signal mapped to unknown frame '{sig.frame}'")
        elif sig.slot not in frame.slots:
            sink.error("AM-STRUCT-002", sig.source, f"frame '{sig.frame}' has no slot '{sig.slot}'")
        owner = sig.source.split(".")[0]
        if project.cluster(owner) is None:
            sink.error("AM-STRUCT-002", sig.source, f"signal source is not a cluster port")


def _all_typed_slots(project: m.Project):
    """(path, type) pairs for every declared type in the model."""
    for comp in project.component_types:
        for p in comp.ports:
            yield f"{comp.name}.{p.name}", p.type
        if isinstance(comp.definition, m.STDDef):
            for v in comp.definition.variables:
                yield f"{comp.name}.{v.name}", v.type
    for cluster in project.clusters:
        for p in cluster.ports:
            yield f"{cluster.name}.{p.name}", p.type
