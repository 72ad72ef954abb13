"""Clock calculus: assigns every flow a normalized clock expression.

Rules: both operands of a function block share one clock; `when` conjoins
the input clock with its condition; `delay` and channels preserve the
clock expression; `merge` produces the disjunction of its input clocks.
Components whose output rate cannot be derived (sporadic emitters, state
machines) default to the base clock, which is sound for presence checking:
the base clock admits a message on any tick.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .. import model as m
from ..clocks import BASE, ClockAnd, ClockExpr, ClockOr, clocks_equal, normalize
from ..diagnostics import Diagnostic, DiagnosticSink
from .common import ContextView, ElementView, all_contexts


@dataclass
class ClockAssignment:
    """Normalized clock per flow id, plus per-endpoint clocks for execution."""

    flows: dict[str, ClockExpr] = field(default_factory=dict)
    endpoints: dict[str, ClockExpr] = field(default_factory=dict)  # "<ctx-prefix><elem.port>"

    def __getitem__(self, flow: str) -> ClockExpr:
        return self.flows[flow]


def clock_check(project: m.Project) -> ClockAssignment | list[Diagnostic]:
    sink = DiagnosticSink()
    assignment = ClockAssignment()
    for ctx in all_contexts(project):
        _check_context(project, ctx, assignment, sink)
    for cluster in project.clusters:
        _check_cluster_clocks(project, cluster, sink)
    if project.level == m.LA:
        _check_top_la_channels(project, sink)
    if sink.has_errors:
        return sink.items
    return assignment


def _check_context(project: m.Project, ctx: ContextView, assignment: ClockAssignment,
                   sink: DiagnosticSink) -> None:
    known: dict[str, ClockExpr] = {}

    def key(owner: str | None, port: str) -> str:
        return port if owner is None else f"{owner}.{port}"

    # seeds: own in-ports, unwired element inputs, annotated channels
    wired: set[str] = set()
    for ch in ctx.channels:
        for sk in ch.sinks:
            wired.add(key(sk.owner, sk.port))
    for p in ctx.own_ports:
        if p.direction == m.IN:
            known[p.name] = normalize(p.clock) if p.clock is not None else BASE
    for element in ctx.elements.values():
        for port in element.in_ports:
            k = key(element.name, port)
            if k not in wired and k not in known:
                declared = element.declared_clock(port)
                known[k] = normalize(declared) if declared is not None else BASE
    for ch in ctx.channels:
        if ch.clock is not None:
            known.setdefault(key(ch.source.owner, ch.source.port), normalize(ch.clock))

    changed = True
    passes = 0
    limit = 2 * (len(ctx.channels) + len(ctx.elements)) + 4
    reported: set[str] = set()
    while changed and passes < limit:
        changed = False
        passes += 1
        for ch in ctx.channels:
            src = key(ch.source.owner, ch.source.port)
            if src not in known:
                continue
            for sk in ch.sinks:
                k = key(sk.owner, sk.port)
                if k not in known:
                    known[k] = known[src]
                    changed = True
        for element in ctx.elements.values():
            changed |= _element_outputs(project, ctx, element, known, key, sink, reported)
        if not changed and passes < limit:
            # seed loops that run through a delay: assume the base clock
            for element in ctx.elements.values():
                if element.kind == "delay":
                    k = key(element.name, "out")
                    if k not in known:
                        known[k] = BASE
                        sink.warning("AM-CLOCK-W03", f"{ctx.prefix}{element.name}",
                                     "assumed base clock for delay inside a feedback loop; "
                                     "annotate a wire with 'on <clock>' to override")
                        changed = True
                        break

    # verify annotations and declared out-port clocks against computed clocks
    for ch in ctx.channels:
        src = key(ch.source.owner, ch.source.port)
        if ch.clock is not None and src in known and not clocks_equal(known[src], ch.clock):
            sink.error("AM-CLOCK-001", f"{ctx.prefix}{ch.source.dotted}",
                       f"annotated clock {normalize(ch.clock)} differs from computed {known[src]}")
    for p in ctx.own_ports:
        if p.direction == m.OUT and p.clock is not None and p.name in known:
            if not clocks_equal(known[p.name], p.clock):
                sink.error("AM-CLOCK-001", f"{ctx.prefix}{p.name}",
                           f"declared clock {normalize(p.clock)} differs from computed {known[p.name]}")

    for ch in ctx.channels:
        flow = ctx.flow_id(ch)
        src = key(ch.source.owner, ch.source.port)
        if src in known:
            assignment.flows[flow] = known[src]
        else:
            sink.error("AM-CLOCK-004", flow, "no clock could be inferred for this flow")
    for k, clock in known.items():
        assignment.endpoints[f"{ctx.prefix}{k}"] = clock


def _element_outputs(project: m.Project, ctx: ContextView, element: ElementView,
                     known: dict[str, ClockExpr], key, sink: DiagnosticSink,
                     reported: set[str]) -> bool:
    name = element.name
    in_keys = [key(name, p) for p in element.in_ports]
    if any(k not in known for k in in_keys):
        return False
    changed = False
    in_clocks = [known[k] for k in in_keys]

    def set_out(port: str, clock: ClockExpr) -> None:
        nonlocal changed
        k = key(name, port)
        norm = normalize(clock)
        if k not in known:
            known[k] = norm
            changed = True

    if element.kind == "fn":
        base = in_clocks[0] if in_clocks else BASE
        for i, clk in enumerate(in_clocks[1:], start=1):
            if not clocks_equal(base, clk) and name not in reported:
                sink.error("AM-CLOCK-002", f"{ctx.prefix}{name}",
                           f"operands '{element.in_ports[0]}' and '{element.in_ports[i]}' have "
                           f"different clocks ({base} vs {clk}); resample with 'when'")
                reported.add(name)
        set_out("out", base)
    elif element.kind == "when":
        set_out("out", ClockAnd((in_clocks[0], element.spec.condition)))
    elif element.kind == "delay":
        set_out("out", in_clocks[0])
    elif element.kind == "merge":
        set_out("out", ClockOr(tuple(in_clocks)) if in_clocks else BASE)
    else:  # instance
        common = in_clocks[0] if in_clocks else BASE
        uniform = all(clocks_equal(common, c) for c in in_clocks)
        for port in element.out_ports:
            declared = element.declared_clock(port)
            if declared is not None:
                clock: ClockExpr = declared
            elif uniform:
                clock = common
            else:
                if name not in reported:
                    sink.error("AM-CLOCK-003", f"{ctx.prefix}{name}",
                               "cannot infer output clocks of a multi-rate component; "
                               "annotate its out-ports")
                    reported.add(name)
                clock = BASE
            if element.gate is not None:
                clock = ClockAnd((element.gate, clock))
            set_out(port, clock)
    return changed


def _check_cluster_clocks(project: m.Project, cluster: m.Cluster, sink: DiagnosticSink) -> None:
    behavior = project.component(cluster.behavior)
    if behavior is None:
        return
    for port in cluster.ports:
        bport = behavior.port(port.name)
        if bport is not None and bport.clock is not None and port.clock is not None:
            if not clocks_equal(bport.clock, port.clock):
                sink.error("AM-CLOCK-005", f"{cluster.name}.{port.name}",
                           f"cluster declares {normalize(port.clock)} but behavior declares "
                           f"{normalize(bport.clock)}")


def _check_top_la_channels(project: m.Project, sink: DiagnosticSink) -> None:
    for ch in project.channels:
        src = _top_port(project, ch.source)
        if src is None or src.clock is None:
            continue
        for sk in ch.sinks:
            dst = _top_port(project, sk)
            if dst is not None and dst.clock is not None and not clocks_equal(src.clock, dst.clock):
                sink.error("AM-CLOCK-001", sk.dotted,
                           f"signal rate mismatch: source {normalize(src.clock)}, "
                           f"sink declares {normalize(dst.clock)}")


def _top_port(project: m.Project, ep: m.Endpoint) -> m.Port | None:
    if ep.owner is None:
        return None
    for p in project.top_ports(ep.owner):
        if p.name == ep.port:
            return p
    return None
