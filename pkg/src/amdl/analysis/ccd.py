"""Well-definedness of cluster networks against a target profile.

A cluster's base period is the greatest common divisor of its periodic
port periods: the rate its task must run at. Communication from a slower
cluster into a faster one must pass through at least one delay in flow
direction; event-clocked endpoints are exempt from the rate rule and only
warned about.
"""

from __future__ import annotations

from math import gcd

from .. import model as m
from ..clocks import period_ms
from ..diagnostics import Diagnostic, DiagnosticSink
from .profiles import TargetProfile, default_profile


def cluster_base_period(project: m.Project, cluster: m.Cluster) -> int | None:
    periods = []
    for p in cluster.ports:
        if p.clock is None:
            continue
        ms = period_ms(p.clock, project.tick_ms)
        if ms is not None:
            periods.append(ms)
    if not periods:
        return None
    out = periods[0]
    for value in periods[1:]:
        out = gcd(out, value)
    return out


def ccd_welldefined(project: m.Project, profile: TargetProfile | None = None) -> list[Diagnostic]:
    profile = profile or default_profile()
    sink = DiagnosticSink()
    if project.level != m.LA:
        sink.error("AM-CCD-000", project.name, "cluster network rules apply to LA-level projects")
        return sink.items
    periods: dict[str, int | None] = {}
    for cluster in project.clusters:
        periods[cluster.name] = cluster_base_period(project, cluster)
        if periods[cluster.name] is None:
            sink.warning("AM-CCD-W01", cluster.name,
                         "cluster has no periodic port; rate rules do not apply to it")
    for ch in project.channels:
        produced = periods.get(ch.source.owner)
        if produced is None:
            continue
        for sk in ch.sinks:
            consumed = periods.get(sk.owner)
            if consumed is None:
                continue
            delayed = ch.kind == m.DFD_DELAY
            if produced > consumed and profile.requires_delay_slow_to_fast and not delayed:
                sink.error("AM-CCD-001", f"{ch.source.dotted}->{sk.dotted}",
                           f"slower cluster ({produced} ms) feeds faster cluster ({consumed} ms) "
                           "without a delay in flow direction")
            if produced < consumed and not profile.fast_to_slow_delay_free and not delayed:
                sink.error("AM-CCD-002", f"{ch.source.dotted}->{sk.dotted}",
                           f"profile '{profile.name}' requires a delay from faster ({produced} ms) "
                           f"to slower ({consumed} ms) clusters")
    return sink.items
