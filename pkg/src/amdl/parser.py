"""Textual frontend: lexer and recursive-descent parser for `.amd` model files.

The concrete syntax is a block-structured keyword grammar with `--` line
comments; see docs/dsl.md for the full grammar. parse() returns either a
Project or a list of diagnostics with source positions, never both.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction

from . import clocks as ck
from . import expr as ex
from . import model as m
from .datatypes import (BOOL, INT, INT8, INT16, INT32, REAL, EnumDecl, EnumType,
                        FixedPoint, PortType, SizedInt)
from .diagnostics import Diagnostic, error


@dataclass(frozen=True)
class SourceFile:
    path: str
    text: str


class ParseFailure(Exception):
    def __init__(self, diag: Diagnostic):
        super().__init__(diag.format())
        self.diag = diag


_PUNCT2 = ("->", "==", "!=", "<=", ">=")
_PUNCT1 = "{}()[],;:.=<>+-*/"

KEYWORDS = {
    "project", "level", "tick", "include", "enum", "component", "cluster",
    "channel", "wire", "sub", "block", "port", "in", "out", "ssd", "dfd",
    "mtd", "std", "function", "fn", "when", "delay", "merge", "mode",
    "initial", "transition", "priority", "state", "var", "do", "emit",
    "behavior", "on", "gate", "init", "delayed", "range", "actuator",
    "techarch", "deployment", "ecu", "task", "bus", "frame", "slot", "map",
    "signal", "connects", "period", "base", "every", "present", "in_mode",
    "true", "false", "and", "or", "not", "if", "then", "else", "raw",
    "bool", "int", "real", "int8", "int16", "int32", "fixed",
}


@dataclass(frozen=True)
class Token:
    kind: str  # ident | keyword | int | real | string | punct | eof
    text: str
    line: int
    col: int


def tokenize(source: SourceFile) -> list[Token]:
    text = source.text
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "-" and i + 1 < n and text[i + 1] == "-":
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        if c.isdigit():
            j = i
            is_real = False
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == "." and j + 1 < n and text[j + 1].isdigit():
                is_real = True
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    is_real = True
                    j = k
                    while j < n and text[j].isdigit():
                        j += 1
            word = text[i:j]
            tokens.append(Token("real" if is_real else "int", word, start_line, start_col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = "keyword" if word in KEYWORDS else "ident"
            tokens.append(Token(kind, word, start_line, start_col))
            col += j - i
            i = j
            continue
        if c == '"':
            j = i + 1
            while j < n and text[j] not in '"\n':
                j += 1
            if j >= n or text[j] != '"':
                raise ParseFailure(error("AM-PARSE-001", source.path, "unterminated string", start_line))
            tokens.append(Token("string", text[i + 1:j], start_line, start_col))
            col += j + 1 - i
            i = j + 1
            continue
        two = text[i:i + 2]
        if two in _PUNCT2:
            tokens.append(Token("punct", two, start_line, start_col))
            i += 2
            col += 2
            continue
        if c in _PUNCT1:
            tokens.append(Token("punct", c, start_line, start_col))
            i += 1
            col += 1
            continue
        raise ParseFailure(error("AM-PARSE-001", source.path, f"unexpected character {c!r}", start_line))
    tokens.append(Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, source: SourceFile):
        self.source = source
        self.tokens = tokenize(source)
        self.pos = 0

    # --- token plumbing -----------------------------------------------------

    @property
    def cur(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.cur
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at(self, text: str) -> bool:
        return self.cur.text == text and self.cur.kind in ("keyword", "punct")

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.advance()
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected '{text}', found '{self.cur.text or 'end of file'}'")
        return self.advance()

    def expect_ident(self, what: str = "identifier") -> Token:
        if self.cur.kind != "ident":
            self.fail(f"expected {what}, found '{self.cur.text or 'end of file'}'")
        return self.advance()

    def expect_name(self) -> Token:
        """Identifier position where keywords are allowed (port names after '.')."""
        if self.cur.kind not in ("ident", "keyword"):
            self.fail(f"expected name, found '{self.cur.text or 'end of file'}'")
        return self.advance()

    def expect_int(self) -> int:
        if self.cur.kind != "int":
            self.fail(f"expected integer, found '{self.cur.text or 'end of file'}'")
        return int(self.advance().text)

    def fail(self, message: str) -> None:
        raise ParseFailure(error("AM-PARSE-001", self.source.path, message, self.cur.line))

    # --- items ---------------------------------------------------------------

    def parse_items(self, acc: "_Accumulator") -> None:
        while self.cur.kind != "eof":
            if self.at("project"):
                self.parse_project_block(acc)
            else:
                self.parse_item(acc)

    def parse_project_block(self, acc: "_Accumulator") -> None:
        line = self.cur.line
        self.expect("project")
        name = self.expect_ident("project name").text
        self.expect("level")
        level_tok = self.cur
        if level_tok.kind != "ident" or level_tok.text not in m.LEVELS:
            self.fail("expected level FAA, FDA or LA")
        self.advance()
        tick = None
        if self.accept("tick"):
            tick = self.expect_int()
            if self.cur.text == "ms":
                self.advance()
            else:
                self.fail("expected 'ms' after tick value")
        acc.set_header(name, level_tok.text, tick, self.source.path, line)
        self.expect("{")
        while not self.at("}"):
            if self.cur.kind == "eof":
                self.fail("unexpected end of file inside project block")
            self.parse_item(acc)
        self.expect("}")

    def parse_item(self, acc: "_Accumulator") -> None:
        line = self.cur.line
        if self.at("include"):
            self.advance()
            target = self.cur
            if target.kind != "string":
                self.fail("expected quoted file name after 'include'")
            self.advance()
            self.expect(";")
            acc.add_include(self.source, target.text, target.line)
        elif self.at("enum"):
            acc.add_enum(self.parse_enum(), self.source.path, line)
        elif self.at("component"):
            acc.add_component(self.parse_component(), self.source.path, line)
        elif self.at("cluster"):
            acc.add_cluster(self.parse_cluster(), self.source.path, line)
        elif self.at("channel"):
            acc.add_top_channel(self.parse_channel(top=True))
        elif self.at("techarch"):
            acc.set_tech_arch(self.parse_tech_arch(), self.source.path, line)
        elif self.at("deployment"):
            acc.set_deployment(self.parse_deployment(), self.source.path, line)
        else:
            self.fail(f"expected a declaration, found '{self.cur.text or 'end of file'}'")

    def parse_enum(self) -> EnumDecl:
        self.expect("enum")
        name = self.expect_ident("enum name").text
        self.expect("{")
        labels = [self.expect_ident("enum label").text]
        while self.accept(","):
            labels.append(self.expect_ident("enum label").text)
        self.expect("}")
        return EnumDecl(name, tuple(labels))

    # --- components ----------------------------------------------------------

    def parse_component(self) -> m.ComponentType:
        self.expect("component")
        name = self.expect_ident("component name").text
        self.expect("{")
        ports: list[m.Port] = []
        while self.at("in") or self.at("out"):
            ports.append(self.parse_port())
        definition: m.Definition = m.Unspecified()
        if self.at("ssd"):
            definition = self.parse_ssd()
        elif self.at("dfd"):
            definition = self.parse_dfd()
        elif self.at("mtd"):
            definition = self.parse_mtd()
        elif self.at("std"):
            definition = self.parse_std()
        elif self.at("function"):
            self.advance()
            body = self.parse_expr()
            self.expect(";")
            definition = m.FunctionDef(body)
        self.expect("}")
        return m.ComponentType(name, tuple(ports), definition)

    def parse_port(self) -> m.Port:
        direction = self.advance().text  # in | out
        self.expect("port")
        name = self.expect_name().text
        self.expect(":")
        ptype = self.parse_type()
        clock = None
        value_range = None
        actuator = False
        while True:
            if self.accept("on"):
                clock = self.parse_clock()
            elif self.accept("range"):
                self.expect("[")
                lo = self.parse_signed_number()
                self.expect(",")
                hi = self.parse_signed_number()
                self.expect("]")
                value_range = (lo, hi)
            elif self.accept("actuator"):
                actuator = True
            else:
                break
        self.expect(";")
        return m.Port(name, direction, ptype, clock, value_range, actuator)

    def parse_type(self) -> PortType:
        tok = self.cur
        if tok.text == "bool":
            self.advance()
            return BOOL
        if tok.text == "int":
            self.advance()
            return INT
        if tok.text == "real":
            self.advance()
            return REAL
        if tok.text in ("int8", "int16", "int32"):
            self.advance()
            return {"int8": INT8, "int16": INT16, "int32": INT32}[tok.text]
        if tok.text == "fixed":
            self.advance()
            self.expect("(")
            base_tok = self.cur
            if base_tok.text not in ("int8", "int16", "int32"):
                self.fail("fixed-point base must be int8, int16 or int32")
            self.advance()
            base = {"int8": INT8, "int16": INT16, "int32": INT32}[base_tok.text]
            self.expect(",")
            scale = self.parse_rational()
            self.expect(",")
            offset = self.parse_rational()
            self.expect(")")
            if scale <= 0:
                self.fail("fixed-point scale must be positive")
            return FixedPoint(base, scale, offset)
        if tok.kind == "ident":
            self.advance()
            return EnumType(tok.text)
        self.fail(f"expected a type, found '{tok.text or 'end of file'}'")

    def parse_rational(self) -> Fraction:
        negative = self.accept("-")
        tok = self.cur
        if tok.kind not in ("int", "real"):
            self.fail("expected a number")
        self.advance()
        value = Fraction(tok.text)  # exact decimal reading
        return -value if negative else value

    def parse_signed_number(self) -> float:
        negative = self.accept("-")
        tok = self.cur
        if tok.kind not in ("int", "real"):
            self.fail("expected a number")
        self.advance()
        value = int(tok.text) if tok.kind == "int" else float(tok.text)
        return -value if negative else value

    # --- definitions -----------------------------------------------------------

    def parse_ssd(self) -> m.SSDDef:
        self.expect("ssd")
        self.expect("{")
        subs: list[m.SubComponent] = []
        channels: list[m.Channel] = []
        while not self.at("}"):
            if self.at("sub"):
                self.advance()
                name = self.expect_ident("sub-component name").text
                self.expect(":")
                type_name = self.expect_ident("component type").text
                self.expect(";")
                subs.append(m.SubComponent(name, type_name))
            elif self.at("channel"):
                channels.append(self.parse_channel(top=False, ssd=True))
            else:
                self.fail("expected 'sub' or 'channel' inside ssd")
        self.expect("}")
        return m.SSDDef(tuple(subs), tuple(channels))

    def parse_channel(self, top: bool, ssd: bool = False) -> m.Channel:
        self.expect("channel")
        source = self.parse_endpoint(top)
        self.expect("->")
        sinks = [self.parse_endpoint(top)]
        while self.accept(","):
            sinks.append(self.parse_endpoint(top))
        kind = "auto"
        init = None
        clock = None
        while True:
            if self.accept("delayed"):
                self.expect("(")
                init = self.parse_init_literal()
                self.expect(")")
                kind = m.DFD_DELAY
            elif self.accept("init"):
                init = self.parse_init_literal()
            elif self.accept("on"):
                clock = self.parse_clock()
            else:
                break
        self.expect(";")
        if kind == "auto":
            if ssd:
                delegation = source.owner is None or any(s.owner is None for s in sinks)
                kind = m.INSTANTANEOUS if delegation else m.SSD_DELAYED
            elif top:
                kind = "auto"  # fixed once the project level is known
            else:
                kind = m.INSTANTANEOUS
        return m.Channel(source, tuple(sinks), kind, init, clock)

    def parse_endpoint(self, top: bool) -> m.Endpoint:
        first = self.expect_ident("endpoint").text
        if self.accept("."):
            port = self.expect_name().text
            return m.Endpoint(first, port)
        if top:
            self.fail("top-level channel endpoints must be written as Name.port")
        return m.Endpoint(None, first)

    def parse_dfd(self) -> m.DFDDef:
        self.expect("dfd")
        self.expect("{")
        blocks: list[m.DFDBlock] = []
        wires: list[m.Channel] = []
        while not self.at("}"):
            if self.at("block"):
                blocks.append(self.parse_block())
            elif self.at("wire"):
                wires.append(self.parse_wire())
            else:
                self.fail("expected 'block' or 'wire' inside dfd")
        self.expect("}")
        return m.DFDDef(tuple(blocks), tuple(wires))

    def parse_block(self) -> m.DFDBlock:
        self.expect("block")
        name = self.expect_ident("block name").text
        if self.accept(":"):
            type_name = self.expect_ident("component type").text
            gate = None
            if self.accept("gate"):
                gate = self.parse_clock()
            return m.DFDBlock(name, m.InstanceSpec(type_name, gate))
        self.expect("=")
        if self.accept("fn"):
            self.expect("(")
            params: list[str] = []
            if not self.at(")"):
                params.append(self.expect_ident("parameter").text)
                while self.accept(","):
                    params.append(self.expect_ident("parameter").text)
            self.expect(")")
            self.expect(":")
            body = self.parse_expr()
            self.expect(";")
            return m.DFDBlock(name, m.FunctionSpec(tuple(params), body))
        if self.accept("when"):
            self.expect("(")
            condition = self.parse_clock()
            self.expect(")")
            self.expect(";")
            return m.DFDBlock(name, m.WhenSpec(condition))
        if self.accept("delay"):
            self.expect("(")
            init = self.parse_init_literal()
            self.expect(")")
            self.expect(";")
            return m.DFDBlock(name, m.DelaySpec(init))
        if self.accept("merge"):
            self.expect("(")
            arity = self.expect_int()
            self.expect(")")
            self.expect(";")
            return m.DFDBlock(name, m.MergeSpec(arity))
        self.fail("expected fn, when, delay or merge after '='")

    def parse_wire(self) -> m.Channel:
        self.expect("wire")
        source = self.parse_endpoint(top=False)
        self.expect("->")
        sinks = [self.parse_endpoint(top=False)]
        while self.accept(","):
            sinks.append(self.parse_endpoint(top=False))
        kind = m.INSTANTANEOUS
        init = None
        clock = None
        while True:
            if self.accept("delayed"):
                self.expect("(")
                init = self.parse_init_literal()
                self.expect(")")
                kind = m.DFD_DELAY
            elif self.accept("on"):
                clock = self.parse_clock()
            else:
                break
        self.expect(";")
        return m.Channel(source, tuple(sinks), kind, init, clock)

    def parse_mtd(self) -> m.MTDDef:
        self.expect("mtd")
        self.expect("{")
        modes: list[m.Mode] = []
        transitions: list[m.MTDTransition] = []
        initial: str | None = None
        while not self.at("}"):
            if self.at("initial") or self.at("mode"):
                is_initial = self.accept("initial")
                self.expect("mode")
                name = self.expect_ident("mode name").text
                self.expect(":")
                behavior = self.expect_ident("behavior component").text
                self.expect(";")
                modes.append(m.Mode(name, behavior))
                if is_initial:
                    if initial is not None:
                        self.fail("more than one initial mode")
                    initial = name
            elif self.at("transition"):
                self.advance()
                source = self.expect_ident("mode name").text
                self.expect("->")
                target = self.expect_ident("mode name").text
                self.expect("when")
                trigger = self.parse_expr()
                self.expect("priority")
                priority = self.expect_int()
                self.expect(";")
                transitions.append(m.MTDTransition(source, target, trigger, priority))
            else:
                self.fail("expected 'mode' or 'transition' inside mtd")
        self.expect("}")
        if initial is None:
            self.fail("mtd needs an initial mode")
        return m.MTDDef(tuple(modes), tuple(transitions), initial)

    def parse_std(self) -> m.STDDef:
        self.expect("std")
        self.expect("{")
        variables: list[m.VarDecl] = []
        states: list[str] = []
        transitions: list[m.STDTransition] = []
        initial: str | None = None
        while not self.at("}"):
            if self.at("var"):
                self.advance()
                name = self.expect_ident("variable name").text
                self.expect(":")
                vtype = self.parse_type()
                self.expect("=")
                init = self.parse_init_literal(allow_absent=False)
                self.expect(";")
                variables.append(m.VarDecl(name, vtype, init))
            elif self.at("initial") or self.at("state"):
                is_initial = self.accept("initial")
                self.expect("state")
                name = self.expect_ident("state name").text
                self.expect(";")
                states.append(name)
                if is_initial:
                    if initial is not None:
                        self.fail("more than one initial state")
                    initial = name
            elif self.at("transition"):
                self.advance()
                source = self.expect_ident("state name").text
                self.expect("->")
                target = self.expect_ident("state name").text
                self.expect("when")
                guard = self.parse_expr()
                self.expect("priority")
                priority = self.expect_int()
                actions: list[m.Action] = []
                if self.accept("do"):
                    self.expect("{")
                    while not self.at("}"):
                        actions.append(self.parse_action())
                    self.expect("}")
                self.expect(";")
                transitions.append(m.STDTransition(source, target, guard, priority, tuple(actions)))
            else:
                self.fail("expected 'var', 'state' or 'transition' inside std")
        self.expect("}")
        if initial is None:
            self.fail("std needs an initial state")
        return m.STDDef(tuple(variables), tuple(states), initial, tuple(transitions))

    def parse_action(self) -> m.Action:
        if self.accept("emit"):
            port = self.expect_name().text
            self.expect("=")
            value = self.parse_expr()
            self.expect(";")
            return m.Emit(port, value)
        var = self.expect_ident("variable name").text
        self.expect("=")
        value = self.parse_expr()
        self.expect(";")
        return m.Assign(var, value)

    def parse_cluster(self) -> m.Cluster:
        self.expect("cluster")
        name = self.expect_ident("cluster name").text
        self.expect("{")
        ports: list[m.Port] = []
        while self.at("in") or self.at("out"):
            ports.append(self.parse_port())
        self.expect("behavior")
        behavior = self.expect_ident("behavior component").text
        self.expect(";")
        self.expect("}")
        return m.Cluster(name, tuple(ports), behavior)

    # --- platform -------------------------------------------------------------

    def parse_tech_arch(self) -> m.TechArch:
        self.expect("techarch")
        self.expect("{")
        ecus: list[m.Ecu] = []
        tasks: list[m.Task] = []
        buses: list[m.Bus] = []
        frames: list[m.Frame] = []
        while not self.at("}"):
            if self.at("ecu"):
                self.advance()
                ecus.append(m.Ecu(self.expect_ident("ecu name").text))
                self.expect(";")
            elif self.at("task"):
                self.advance()
                name = self.expect_ident("task name").text
                self.expect("on")
                ecu = self.expect_ident("ecu name").text
                self.expect("period")
                period = self.expect_int()
                if self.cur.text == "ms":
                    self.advance()
                else:
                    self.fail("expected 'ms' after period")
                self.expect("priority")
                priority = self.expect_int()
                self.expect(";")
                tasks.append(m.Task(name, ecu, period, priority))
            elif self.at("bus"):
                self.advance()
                name = self.expect_ident("bus name").text
                connects: list[str] = []
                if self.accept("connects"):
                    connects.append(self.expect_ident("ecu name").text)
                    while self.accept(","):
                        connects.append(self.expect_ident("ecu name").text)
                self.expect(";")
                buses.append(m.Bus(name, tuple(connects)))
            elif self.at("frame"):
                self.advance()
                name = self.expect_ident("frame name").text
                self.expect("on")
                bus = self.expect_ident("bus name").text
                self.expect("{")
                slots: list[str] = []
                while self.at("slot"):
                    self.advance()
                    slots.append(self.expect_ident("slot name").text)
                    self.expect(";")
                self.expect("}")
                frames.append(m.Frame(name, bus, tuple(slots)))
            else:
                self.fail("expected 'ecu', 'task', 'bus' or 'frame' inside techarch")
        self.expect("}")
        return m.TechArch(tuple(ecus), tuple(tasks), tuple(buses), tuple(frames))

    def parse_deployment(self) -> m.Deployment:
        self.expect("deployment")
        self.expect("{")
        cluster_bindings: list[m.ClusterBinding] = []
        signal_bindings: list[m.SignalBinding] = []
        while not self.at("}"):
            self.expect("map")
            if self.accept("cluster"):
                cluster = self.expect_ident("cluster name").text
                self.expect("->")
                self.expect("task")
                task = self.expect_ident("task name").text
                self.expect(";")
                cluster_bindings.append(m.ClusterBinding(cluster, task))
            elif self.accept("signal"):
                source = self.parse_dotted_path()
                self.expect("->")
                self.expect("frame")
                frame = self.expect_ident("frame name").text
                self.expect("slot")
                slot = self.expect_ident("slot name").text
                self.expect(";")
                signal_bindings.append(m.SignalBinding(source, frame, slot))
            else:
                self.fail("expected 'cluster' or 'signal' after 'map'")
        self.expect("}")
        return m.Deployment(tuple(cluster_bindings), tuple(signal_bindings))

    # --- clocks and expressions -----------------------------------------------

    def parse_clock(self) -> ck.ClockExpr:
        return self.parse_clock_or()

    def parse_clock_or(self) -> ck.ClockExpr:
        left = self.parse_clock_and()
        operands = [left]
        while self.accept("or"):
            operands.append(self.parse_clock_and())
        return operands[0] if len(operands) == 1 else ck.ClockOr(tuple(operands))

    def parse_clock_and(self) -> ck.ClockExpr:
        left = self.parse_clock_atom()
        operands = [left]
        while self.accept("and"):
            operands.append(self.parse_clock_atom())
        return operands[0] if len(operands) == 1 else ck.ClockAnd(tuple(operands))

    def parse_clock_atom(self) -> ck.ClockExpr:
        if self.accept("not"):
            return ck.ClockNot(self.parse_clock_atom())
        if self.accept("("):
            inner = self.parse_clock()
            self.expect(")")
            return inner
        if self.accept("base") or self.accept("true"):
            return ck.BASE
        if self.accept("every"):
            self.expect("(")
            n = self.expect_int()
            if n < 1:
                self.fail("every(n, ...) requires n >= 1")
            self.expect(",")
            sub = self.parse_clock()
            self.expect(")")
            return ck.Every(n, sub)
        if self.accept("present"):
            self.expect("(")
            port = self.parse_dotted_path()
            self.expect(")")
            return ck.PresenceOf(port)
        if self.accept("in_mode"):
            self.expect("(")
            ref = self.parse_dotted_path()
            self.expect(",")
            mode = self.expect_ident("mode name").text
            self.expect(")")
            return ck.ModeEquals(ref, mode)
        self.fail(f"expected a clock expression, found '{self.cur.text or 'end of file'}'")

    def parse_dotted_path(self) -> str:
        parts = [self.expect_ident("name").text]
        while self.accept("."):
            parts.append(self.expect_name().text)
        return ".".join(parts)

    def parse_expr(self) -> ex.Expr:
        if self.at("if"):
            self.advance()
            cond = self.parse_expr_or()
            self.expect("then")
            then = self.parse_expr_or()
            self.expect("else")
            otherwise = self.parse_expr()
            return ex.IfExpr(cond, then, otherwise)
        return self.parse_expr_or()

    def parse_expr_or(self) -> ex.Expr:
        left = self.parse_expr_and()
        while self.accept("or"):
            left = ex.Binary("or", left, self.parse_expr_and())
        return left

    def parse_expr_and(self) -> ex.Expr:
        left = self.parse_expr_not()
        while self.accept("and"):
            left = ex.Binary("and", left, self.parse_expr_not())
        return left

    def parse_expr_not(self) -> ex.Expr:
        if self.accept("not"):
            return ex.Unary("not", self.parse_expr_not())
        return self.parse_expr_cmp()

    def parse_expr_cmp(self) -> ex.Expr:
        left = self.parse_expr_add()
        for op in ("==", "!=", "<=", ">=", "<", ">"):
            if self.at(op):
                self.advance()
                return ex.Binary(op, left, self.parse_expr_add())
        return left

    def parse_expr_add(self) -> ex.Expr:
        left = self.parse_expr_mul()
        while True:
            if self.accept("+"):
                left = ex.Binary("+", left, self.parse_expr_mul())
            elif self.accept("-"):
                left = ex.Binary("-", left, self.parse_expr_mul())
            else:
                return left

    def parse_expr_mul(self) -> ex.Expr:
        left = self.parse_expr_unary()
        while True:
            if self.accept("*"):
                left = ex.Binary("*", left, self.parse_expr_unary())
            elif self.accept("/"):
                left = ex.Binary("/", left, self.parse_expr_unary())
            else:
                return left

    def parse_expr_unary(self) -> ex.Expr:
        if self.accept("-"):
            return ex.Unary("-", self.parse_expr_unary())
        return self.parse_expr_primary()

    def parse_expr_primary(self) -> ex.Expr:
        tok = self.cur
        if tok.kind == "int":
            self.advance()
            return ex.IntLit(int(tok.text))
        if tok.kind == "real":
            self.advance()
            return ex.RealLit(float(tok.text))
        if self.accept("true"):
            return ex.BoolLit(True)
        if self.accept("false"):
            return ex.BoolLit(False)
        if self.accept("("):
            inner = self.parse_expr()
            self.expect(")")
            return inner
        if self.accept("present"):
            self.expect("(")
            port = self.parse_dotted_path()
            self.expect(")")
            return ex.PresentTest(port)
        if self.accept("raw"):
            self.expect("(")
            negative = self.accept("-")
            raw = self.expect_int()
            self.expect(",")
            impl = self.parse_type()
            if not isinstance(impl, FixedPoint):
                self.fail("raw(...) literals need a fixed-point type")
            self.expect(")")
            return ex.QuantLit(-raw if negative else raw, impl)
        if self.at("if"):
            return self.parse_expr()
        if tok.kind == "ident":
            parts = [self.advance().text]
            while self.accept("."):
                parts.append(self.expect_name().text)
            return ex.NameRef(tuple(parts))
        self.fail(f"expected an expression, found '{tok.text or 'end of file'}'")

    def parse_init_literal(self, allow_absent: bool = True) -> ex.Value:
        tok = self.cur
        if tok.text == "-" and tok.kind == "punct":
            nxt = self.tokens[self.pos + 1]
            if nxt.kind in ("int", "real"):
                self.advance()
                self.advance()
                return -int(nxt.text) if nxt.kind == "int" else -float(nxt.text)
            if allow_absent:
                self.advance()
                return ex.ABSENT
            self.fail("expected a value")
        if tok.kind == "int":
            self.advance()
            return int(tok.text)
        if tok.kind == "real":
            self.advance()
            return float(tok.text)
        if self.accept("true"):
            return True
        if self.accept("false"):
            return False
        if tok.kind == "ident":
            self.advance()
            if self.accept("."):
                return self.expect_name().text  # Enum.Label: the value is the label
            return tok.text  # bare enum label
        self.fail("expected a literal value")


class _Accumulator:
    """Collects declarations across files and builds the final Project."""

    def __init__(self):
        self.name = "Untitled"
        self.level = m.FAA
        self.tick_ms = 1
        self.header_seen = False
        self.enums: list[EnumDecl] = []
        self.components: list[m.ComponentType] = []
        self.clusters: list[m.Cluster] = []
        self.top_channels: list[m.Channel] = []
        self.tech_arch: m.TechArch | None = None
        self.deployment: m.Deployment | None = None
        self.diags: list[Diagnostic] = []
        self.source_lines: dict[str, int] = {}
        self.pending_includes: list[tuple[SourceFile, str, int]] = []

    def set_header(self, name: str, level: str, tick: int | None, path: str, line: int) -> None:
        if self.header_seen:
            self.diags.append(error("AM-PARSE-002", path, "more than one project block", line))
            return
        self.header_seen = True
        self.name = name
        self.level = level
        if tick is not None:
            self.tick_ms = tick

    def add_include(self, source: SourceFile, target: str, line: int) -> None:
        self.pending_includes.append((source, target, line))

    def add_enum(self, decl: EnumDecl, path: str, line: int) -> None:
        if any(e.name == decl.name for e in self.enums):
            self.diags.append(error("AM-PARSE-002", path, f"duplicate definition of enum '{decl.name}'", line))
            return
        self.enums.append(decl)

    def add_component(self, comp: m.ComponentType, path: str, line: int) -> None:
        if any(c.name == comp.name for c in self.components):
            self.diags.append(error("AM-PARSE-002", path, f"duplicate definition of component '{comp.name}'", line))
            return
        self.components.append(comp)
        self.source_lines[comp.name] = line

    def add_cluster(self, cluster: m.Cluster, path: str, line: int) -> None:
        if any(c.name == cluster.name for c in self.clusters):
            self.diags.append(error("AM-PARSE-002", path, f"duplicate definition of cluster '{cluster.name}'", line))
            return
        self.clusters.append(cluster)
        self.source_lines[cluster.name] = line

    def add_top_channel(self, channel: m.Channel) -> None:
        self.top_channels.append(channel)

    def set_tech_arch(self, ta: m.TechArch, path: str, line: int) -> None:
        if self.tech_arch is not None:
            self.diags.append(error("AM-PARSE-002", path, "more than one techarch block", line))
            return
        self.tech_arch = ta

    def set_deployment(self, dep: m.Deployment, path: str, line: int) -> None:
        if self.deployment is not None:
            self.diags.append(error("AM-PARSE-002", path, "more than one deployment block", line))
            return
        self.deployment = dep

    def build(self) -> m.Project:
        channels = []
        for ch in self.top_channels:
            if ch.kind == "auto":
                kind = m.INSTANTANEOUS if self.level == m.LA else m.SSD_DELAYED
                ch = m.Channel(ch.source, ch.sinks, kind, ch.init, ch.clock)
            channels.append(ch)
        return m.Project(
            name=self.name,
            level=self.level,
            tick_ms=self.tick_ms,
            data_types=tuple(self.enums),
            component_types=tuple(self.components),
            clusters=tuple(self.clusters),
            channels=tuple(channels),
            tech_arch=self.tech_arch,
            deployment=self.deployment,
            source_lines=dict(self.source_lines),
        )


def parse(files: list[SourceFile]) -> m.Project | list[Diagnostic]:
    """Parse one model from a set of files. Includes are resolved against the
    provided set first, then the file system relative to the including file."""
    acc = _Accumulator()
    provided = {os.path.basename(f.path): f for f in files}
    provided.update({f.path: f for f in files})
    seen_paths = set()
    queue = list(files)
    while queue:
        source = queue.pop(0)
        if source.path in seen_paths:
            continue
        seen_paths.add(source.path)
        try:
            _Parser(source).parse_items(acc)
        except ParseFailure as exc:
            return [exc.diag]
        while acc.pending_includes:
            includer, target, line = acc.pending_includes.pop(0)
            resolved = provided.get(target)
            if resolved is None:
                candidate = os.path.join(os.path.dirname(includer.path), target)
                if os.path.exists(candidate):
                    with open(candidate, encoding="utf-8") as fh:
                        resolved = SourceFile(candidate, fh.read())
                    provided[target] = resolved
            if resolved is None:
                return [error("AM-PARSE-003", includer.path, f"unresolved include '{target}'", line)]
            if resolved.path not in seen_paths:
                queue.append(resolved)
    if acc.diags:
        return acc.diags
    return acc.build()


def parse_text(text: str, path: str = "<input>") -> m.Project | list[Diagnostic]:
    return parse([SourceFile(path, text)])


def parse_path(path: str) -> m.Project | list[Diagnostic]:
    with open(path, encoding="utf-8") as fh:
        return parse([SourceFile(path, fh.read())])
