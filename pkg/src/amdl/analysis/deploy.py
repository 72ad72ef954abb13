"""Deployment checking: cluster-to-task mapping and bus reachability.

Checks, in order: every cluster sits on exactly one task; the task period
divides the cluster's base period (the task can honor the cluster's rate);
every signal between clusters on different ECUs has a frame slot; and the
frame's bus physically connects both ECUs.
"""

from __future__ import annotations

from .. import model as m
from ..diagnostics import Diagnostic, DiagnosticSink
from .ccd import cluster_base_period


def deployment_check(project: m.Project) -> list[Diagnostic]:
    sink = DiagnosticSink()
    if project.level != m.LA:
        sink.error("AM-DEPLOY-000", project.name, "deployment checking applies to LA-level projects")
        return sink.items
    ta = project.tech_arch
    dep = project.deployment
    if ta is None or dep is None:
        sink.error("AM-DEPLOY-000", project.name,
                   "deployment checking needs a technical architecture and a deployment mapping")
        return sink.items

    task_of: dict[str, m.Task] = {}
    for binding in dep.cluster_to_task:
        task = ta.task(binding.task)
        if task is not None:
            task_of[binding.cluster] = task
    for cluster in project.clusters:
        if cluster.name not in task_of:
            sink.error("AM-DEPLOY-001", cluster.name,
                       f"cluster '{cluster.name}' is not mapped to a task")
            continue
        task = task_of[cluster.name]
        base = cluster_base_period(project, cluster)
        if base is None:
            sink.warning("AM-DEPLOY-W01", cluster.name,
                         "cluster has no periodic port; period compatibility not checked")
        elif base % task.period_ms != 0:
            sink.error("AM-DEPLOY-002", cluster.name,
                       f"task '{task.name}' runs every {task.period_ms} ms, which cannot honor "
                       f"the cluster's {base} ms base period")

    signal_map = {s.source: s for s in dep.signal_to_frame}
    for ch in project.channels:
        src_task = task_of.get(ch.source.owner)
        if src_task is None:
            continue
        for sk in ch.sinks:
            dst_task = task_of.get(sk.owner)
            if dst_task is None or dst_task.ecu == src_task.ecu:
                continue
            binding = signal_map.get(ch.source.dotted)
            if binding is None:
                sink.error("AM-DEPLOY-003", f"{ch.source.dotted}->{sk.dotted}",
                           f"signal crosses from ecu '{src_task.ecu}' to '{dst_task.ecu}' "
                           "but has no frame slot")
                continue
            frame = ta.frame(binding.frame)
            bus = ta.bus(frame.bus) if frame is not None else None
            if bus is None:
                continue  # dangling refs are structural errors, reported by validate
            for ecu in (src_task.ecu, dst_task.ecu):
                if ecu not in bus.connects:
                    sink.error("AM-DEPLOY-004", f"{ch.source.dotted}->{sk.dotted}",
                               f"frame '{frame.name}' travels on bus '{bus.name}', "
                               f"which does not connect ecu '{ecu}'")
    return sink.items
