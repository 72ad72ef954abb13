"""Type checking and inference.

Declared interfaces (component and cluster ports) are checked exactly;
block ports inside DFDs have no declarations and are inferred by
monomorphic unification over the connected flows and function bodies.
Numeric literals default to int unless the context forces another
numeric type.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .. import expr as ex
from .. import model as m
from ..datatypes import (BOOL, INT, INT32, REAL, EnumType, FixedPoint, PortType,
                         SizedInt, is_numeric)
from ..diagnostics import Diagnostic, DiagnosticSink
from .common import ContextView, ElementView, all_contexts


@dataclass
class TypeEnv:
    """Resolved type per flow; every flow of the project appears once."""

    flows: dict[str, PortType] = field(default_factory=dict)

    def __getitem__(self, flow: str) -> PortType:
        return self.flows[flow]


class _Var:
    __slots__ = ("id", "numeric", "bound")
    _next = 0

    def __init__(self, numeric: bool = False):
        self.id = _Var._next
        _Var._next += 1
        self.numeric = numeric
        self.bound: object | None = None


class _Mismatch(Exception):
    def __init__(self, a, b):
        super().__init__(f"{a} vs {b}")
        self.a = a
        self.b = b


def _resolve(t):
    while isinstance(t, _Var) and t.bound is not None:
        t = t.bound
    return t


def _unify(a, b) -> None:
    a, b = _resolve(a), _resolve(b)
    if a is b:
        return
    if isinstance(a, _Var):
        if isinstance(b, _Var):
            b.numeric = b.numeric or a.numeric
            a.bound = b
            return
        if a.numeric and not is_numeric(b):
            raise _Mismatch("a numeric type", b)
        a.bound = b
        return
    if isinstance(b, _Var):
        _unify(b, a)
        return
    if a != b:
        raise _Mismatch(a, b)


def _type_name(t) -> str:
    t = _resolve(t)
    if isinstance(t, _Var):
        return "a numeric type" if t.numeric else "an undetermined type"
    return str(t)


class _ContextChecker:
    def __init__(self, project: m.Project, ctx: ContextView, sink: DiagnosticSink):
        self.project = project
        self.ctx = ctx
        self.sink = sink
        # type term per endpoint, keyed "elem.port" / "port"
        self.slots: dict[str, object] = {}
        self.default_int: PortType = INT32 if project.level == m.LA else INT

    def slot(self, owner: str | None, port: str):
        key = port if owner is None else f"{owner}.{port}"
        if key in self.slots:
            return self.slots[key]
        term: object
        if owner is None:
            p = self.ctx.own_port(port)
            term = p.type if p is not None else _Var()
        else:
            element = self.ctx.elements.get(owner)
            declared = element.declared_type(port) if element is not None else None
            term = declared if declared is not None else _Var()
        self.slots[key] = term
        return term

    def where(self, detail: str) -> str:
        return f"{self.ctx.prefix}{detail}" if not self.ctx.is_top else detail

    def mism(self, detail: str, err: _Mismatch) -> None:
        self.sink.error("AM-TYPE-001", self.where(detail),
                        f"type mismatch: {_type_name(err.a)} is not {_type_name(err.b)}")

    def check(self) -> None:
        for ch in self.ctx.channels:
            src = self.slot(ch.source.owner, ch.source.port)
            for sk in ch.sinks:
                try:
                    _unify(src, self.slot(sk.owner, sk.port))
                except _Mismatch as err:
                    self.mism(f"{ch.source.dotted}->{sk.dotted}", err)
            if ch.kind == m.DFD_DELAY and ch.init is not None and ch.init is not ex.ABSENT:
                try:
                    _unify(src, self.literal_term(ch.init))
                except _Mismatch as err:
                    self.mism(f"{ch.source.dotted} init", err)
        for element in self.ctx.elements.values():
            self.check_element(element)

    def check_element(self, element: ElementView) -> None:
        name = element.name
        if element.kind == "fn":
            spec: m.FunctionSpec = element.spec
            env = {p: self.slot(name, p) for p in spec.params}
            try:
                result = self.infer(spec.body, env, allow_present=False, where=name)
                _unify(self.slot(name, "out"), result)
            except _Mismatch as err:
                self.mism(name, err)
        elif element.kind in ("when", "delay"):
            try:
                _unify(self.slot(name, "in"), self.slot(name, "out"))
            except _Mismatch as err:
                self.mism(name, err)
            if element.kind == "delay":
                init = element.spec.init
                if init is not ex.ABSENT:
                    try:
                        _unify(self.slot(name, "in"), self.literal_term(init))
                    except _Mismatch as err:
                        self.mism(f"{name} init", err)
        elif element.kind == "merge":
            out = self.slot(name, "out")
            for p in element.in_ports:
                try:
                    _unify(out, self.slot(name, p))
                except _Mismatch as err:
                    self.mism(f"{name}.{p}", err)
        # instances: ports carry declared types, nothing to infer here

    def literal_term(self, value: ex.Value):
        if value is True or value is False:
            return BOOL
        if isinstance(value, int):
            return _Var(numeric=True)
        if isinstance(value, float):
            return REAL
        if isinstance(value, str):
            enum = self._enum_of_label(value)
            if enum is None:
                raise _Mismatch(f"unknown enum label '{value}'", "an enum type")
            return EnumType(enum)
        raise _Mismatch(repr(value), "a literal")

    def _enum_of_label(self, label: str) -> str | None:
        for e in self.project.data_types:
            if label in e.labels:
                return e.name
        return None

    # --- expression inference -------------------------------------------------

    def infer(self, node: ex.Expr, env: dict[str, object], allow_present: bool, where: str):
        if isinstance(node, ex.IntLit):
            return _Var(numeric=True)
        if isinstance(node, ex.RealLit):
            return REAL
        if isinstance(node, ex.BoolLit):
            return BOOL
        if isinstance(node, ex.EnumLit):
            return EnumType(node.enum)
        if isinstance(node, ex.QuantLit):
            return node.impl
        if isinstance(node, ex.NameRef):
            name = node.dotted
            if name in env:
                return env[name]
            head = node.path[0]
            enum = self.project.enum(head)
            if enum is not None and len(node.path) == 2:
                if node.path[1] not in enum.labels:
                    self.sink.error("AM-TYPE-004", self.where(where),
                                    f"enum '{head}' has no label '{node.path[1]}'")
                return EnumType(head)
            if head in env:
                return env[head]
            self.sink.error("AM-TYPE-004", self.where(where), f"unknown name '{name}' in expression")
            return _Var()
        if isinstance(node, ex.PresentTest):
            if not allow_present:
                self.sink.error("AM-TYPE-005", self.where(where),
                                "presence tests are only allowed in triggers and guards")
            return BOOL
        if isinstance(node, ex.Unary):
            t = self.infer(node.operand, env, allow_present, where)
            want = BOOL if node.op == "not" else _Var(numeric=True)
            _unify(t, want)
            return _resolve(want)
        if isinstance(node, ex.Binary):
            return self.infer_binary(node, env, allow_present, where)
        if isinstance(node, ex.IfExpr):
            _unify(self.infer(node.cond, env, allow_present, where), BOOL)
            t1 = self.infer(node.then, env, allow_present, where)
            t2 = self.infer(node.otherwise, env, allow_present, where)
            _unify(t1, t2)
            return _resolve(t1)
        raise TypeError(f"unknown expression node {node!r}")

    def infer_binary(self, node: ex.Binary, env, allow_present: bool, where: str):
        lt = self.infer(node.left, env, allow_present, where)
        rt = self.infer(node.right, env, allow_present, where)
        op = node.op
        if op in ("and", "or"):
            _unify(lt, BOOL)
            _unify(rt, BOOL)
            return BOOL
        if op in ("==", "!="):
            _unify(lt, rt)
            return BOOL
        if op in ("<", "<=", ">", ">="):
            _unify(lt, _Var(numeric=True))
            _unify(lt, rt)
            return BOOL
        # arithmetic
        num = _Var(numeric=True)
        _unify(lt, num)
        _unify(rt, num)
        return _resolve(num)


def _check_interface_match(project: m.Project, cluster: m.Cluster, sink: DiagnosticSink) -> None:
    behavior = project.component(cluster.behavior)
    if behavior is None:
        return
    for port in cluster.ports:
        bport = behavior.port(port.name)
        if bport is None or bport.direction != port.direction:
            sink.error("AM-TYPE-003", f"{cluster.name}.{port.name}",
                       f"cluster port has no matching port on behavior '{cluster.behavior}'")
        elif bport.type != port.type:
            sink.error("AM-TYPE-001", f"{cluster.name}.{port.name}",
                       f"type mismatch: cluster declares {port.type}, behavior declares {bport.type}")
    for bport in behavior.ports:
        if cluster.port(bport.name) is None:
            sink.error("AM-TYPE-003", f"{cluster.name}.{bport.name}",
                       f"behavior port '{bport.name}' is not exposed by the cluster")


def _check_component_exprs(project: m.Project, comp: m.ComponentType, sink: DiagnosticSink) -> None:
    d = comp.definition
    in_types = {p.name: p.type for p in comp.in_ports()}
    checker = _ContextChecker(project, ContextView(comp.name, False, "dfd", {}, (), comp.ports), sink)
    if isinstance(d, m.MTDDef):
        for t in d.transitions:
            try:
                _unify(checker.infer(t.trigger, dict(in_types), allow_present=True,
                                     where=f"{t.source}->{t.target}"), BOOL)
            except _Mismatch as err:
                checker.mism(f"{t.source}->{t.target}", err)
    elif isinstance(d, m.STDDef):
        env: dict[str, object] = dict(in_types)
        for v in d.variables:
            env[v.name] = v.type
            try:
                _unify(checker.literal_term(v.init), v.type)
            except _Mismatch as err:
                checker.mism(f"var {v.name}", err)
        out_types = {p.name: p.type for p in comp.out_ports()}
        for t in d.transitions:
            label = f"{t.source}->{t.target}"
            try:
                _unify(checker.infer(t.guard, env, allow_present=True, where=label), BOOL)
            except _Mismatch as err:
                checker.mism(label, err)
            for action in t.actions:
                try:
                    if isinstance(action, m.Emit):
                        want = out_types.get(action.port)
                        got = checker.infer(action.value, env, allow_present=True, where=label)
                        if want is not None:
                            _unify(got, want)
                    else:
                        got = checker.infer(action.value, env, allow_present=True, where=label)
                        if action.var in env:
                            _unify(got, env[action.var])
                except _Mismatch as err:
                    checker.mism(label, err)
    elif isinstance(d, m.FunctionDef):
        outs = comp.out_ports()
        if len(outs) == 1:
            try:
                got = checker.infer(d.body, dict(in_types), allow_present=False, where=comp.name)
                _unify(got, outs[0].type)
            except _Mismatch as err:
                checker.mism(comp.name, err)


def typecheck(project: m.Project) -> TypeEnv | list[Diagnostic]:
    """Full-project check; returns the flow typing on success, else the
    conflict diagnostics."""
    sink = DiagnosticSink()
    env = TypeEnv()
    checkers: list[tuple[ContextView, _ContextChecker]] = []
    for ctx in all_contexts(project):
        checker = _ContextChecker(project, ctx, sink)
        checker.check()
        checkers.append((ctx, checker))
    for comp in project.component_types:
        _check_component_exprs(project, comp, sink)
    for cluster in project.clusters:
        _check_interface_match(project, cluster, sink)
    # resolve flows; free numeric variables default to int (int32 on LA)
    for ctx, checker in checkers:
        for ch in ctx.channels:
            flow = ctx.flow_id(ch)
            term = _resolve(checker.slot(ch.source.owner, ch.source.port))
            if isinstance(term, _Var):
                if term.numeric:
                    term.bound = checker.default_int
                    term = checker.default_int
                else:
                    sink.error("AM-TYPE-002", flow,
                               "no type can be inferred for this flow; add a typed endpoint")
                    continue
            env.flows[flow] = term
    if sink.has_errors:
        return sink.items
    return env
