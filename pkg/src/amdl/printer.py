"""Canonical text form for Projects.

Declaration order is preserved (stable diffs across refactoring steps);
spacing and punctuation are normalized, so serialize is byte-idempotent
and parse(serialize(p)) reproduces p structurally.
"""

from __future__ import annotations

from . import model as m
from .datatypes import EnumDecl
from .diagnostics import ModelError
from .expr import ABSENT, Value, format_expr
from .validate import validate


def serialize(project: m.Project) -> str:
    bad = [d for d in validate(project) if d.severity == "error"]
    if bad:
        raise ModelError("AM-SER-001", f"model has {len(bad)} structural error(s); first: {bad[0].format()}",
                         project.name)
    out: list[str] = []
    header = f"project {project.name} level {project.level} tick {project.tick_ms}ms {{"
    out.append(header)
    for enum in project.data_types:
        out.append(f"  enum {enum.name} {{ {', '.join(enum.labels)} }}")
    for comp in project.component_types:
        _component(out, comp)
    for cluster in project.clusters:
        _cluster(out, cluster)
    for ch in project.channels:
        out.append(f"  {_channel_text(ch, keyword='channel', top_level=project.level)}")
    if project.tech_arch is not None:
        _tech_arch(out, project.tech_arch)
    if project.deployment is not None:
        _deployment(out, project.deployment)
    out.append("}")
    return "\n".join(out) + "\n"


def _component(out: list[str], comp: m.ComponentType) -> None:
    out.append(f"  component {comp.name} {{")
    for port in comp.ports:
        out.append(f"    {_port_text(port)}")
    d = comp.definition
    if isinstance(d, m.SSDDef):
        out.append("    ssd {")
        for sub in d.subs:
            out.append(f"      sub {sub.name}: {sub.type_name};")
        for ch in d.channels:
            out.append(f"      {_channel_text(ch, keyword='channel')}")
        out.append("    }")
    elif isinstance(d, m.DFDDef):
        out.append("    dfd {")
        for block in d.blocks:
            out.append(f"      {_block_text(block)}")
        for wire in d.wires:
            out.append(f"      {_channel_text(wire, keyword='wire')}")
        out.append("    }")
    elif isinstance(d, m.MTDDef):
        out.append("    mtd {")
        for mode in d.modes:
            prefix = "initial mode" if mode.name == d.initial else "mode"
            out.append(f"      {prefix} {mode.name}: {mode.behavior};")
        for t in d.transitions:
            out.append(f"      transition {t.source} -> {t.target} "
                       f"when {format_expr(t.trigger)} priority {t.priority};")
        out.append("    }")
    elif isinstance(d, m.STDDef):
        out.append("    std {")
        for v in d.variables:
            out.append(f"      var {v.name}: {v.type} = {_value_text(v.init)};")
        for s in d.states:
            prefix = "initial state" if s == d.initial else "state"
            out.append(f"      {prefix} {s};")
        for t in d.transitions:
            line = (f"      transition {t.source} -> {t.target} "
                    f"when {format_expr(t.guard)} priority {t.priority}")
            if t.actions:
                actions = " ".join(_action_text(a) for a in t.actions)
                line += f" do {{ {actions} }}"
            out.append(line + ";")
        out.append("    }")
    elif isinstance(d, m.FunctionDef):
        out.append(f"    function {format_expr(d.body)};")
    out.append("  }")


def _cluster(out: list[str], cluster: m.Cluster) -> None:
    out.append(f"  cluster {cluster.name} {{")
    for port in cluster.ports:
        out.append(f"    {_port_text(port)}")
    out.append(f"    behavior {cluster.behavior};")
    out.append("  }")


def _tech_arch(out: list[str], ta: m.TechArch) -> None:
    out.append("  techarch {")
    for ecu in ta.ecus:
        out.append(f"    ecu {ecu.name};")
    for task in ta.tasks:
        out.append(f"    task {task.name} on {task.ecu} period {task.period_ms}ms priority {task.priority};")
    for bus in ta.buses:
        connects = f" connects {', '.join(bus.connects)}" if bus.connects else ""
        out.append(f"    bus {bus.name}{connects};")
    for frame in ta.frames:
        out.append(f"    frame {frame.name} on {frame.bus} {{")
        for slot in frame.slots:
            out.append(f"      slot {slot};")
        out.append("    }")
    out.append("  }")


def _deployment(out: list[str], dep: m.Deployment) -> None:
    out.append("  deployment {")
    for b in dep.cluster_to_task:
        out.append(f"    map cluster {b.cluster} -> task {b.task};")
    for s in dep.signal_to_frame:
        out.append(f"    map signal {s.source} -> frame {s.frame} slot {s.slot};")
    out.append("  }")


def _port_text(port: m.Port) -> str:
    text = f"{port.direction} port {port.name}: {port.type}"
    if port.clock is not None:
        text += f" on {port.clock}"
    if port.value_range is not None:
        lo, hi = port.value_range
        text += f" range [{_num_text(lo)}, {_num_text(hi)}]"
    if port.actuator:
        text += " actuator"
    return text + ";"


def _block_text(block: m.DFDBlock) -> str:
    spec = block.spec
    if isinstance(spec, m.InstanceSpec):
        gate = f" gate {spec.gate}" if spec.gate is not None else ""
        return f"block {block.name}: {spec.type_name}{gate};"
    if isinstance(spec, m.FunctionSpec):
        params = ", ".join(spec.params)
        return f"block {block.name} = fn({params}): {format_expr(spec.body)};"
    if isinstance(spec, m.WhenSpec):
        return f"block {block.name} = when({spec.condition});"
    if isinstance(spec, m.DelaySpec):
        return f"block {block.name} = delay({_value_text(spec.init)});"
    if isinstance(spec, m.MergeSpec):
        return f"block {block.name} = merge({spec.arity});"
    raise TypeError(f"unknown block spec {spec!r}")


def _channel_text(ch: m.Channel, keyword: str, top_level: str | None = None) -> str:
    sinks = ", ".join(ep.dotted for ep in ch.sinks)
    text = f"{keyword} {ch.source.dotted} -> {sinks}"
    if ch.kind == m.DFD_DELAY:
        text += f" delayed({_value_text(ch.init)})"
    elif ch.init is not None:
        text += f" init {_value_text(ch.init)}"
    if ch.clock is not None:
        text += f" on {ch.clock}"
    return text + ";"


def _action_text(action: m.Action) -> str:
    if isinstance(action, m.Emit):
        return f"emit {action.port} = {format_expr(action.value)};"
    return f"{action.var} = {format_expr(action.value)};"


def _value_text(value: Value) -> str:
    if value is ABSENT:
        return "-"
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, (int, float)):
        return _num_text(value)
    return str(value)  # enum label


def _num_text(value) -> str:
    return repr(value) if isinstance(value, float) else str(value)
