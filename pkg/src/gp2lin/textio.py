"""Program and host-graph text formats.

Host graphs::

    [ (0, empty, grey) (1(R), 3:"a") | (0, 0, 1, empty, dashed) ]

Programs are a list of declarations.  Procedures are ``Name = commands``;
rules look like::

    prune(a, x, y: list)
    {
      lhs [ (1, x, blue) (2(R), y, blue) | (e1, 1, 2, a) ]
      rhs [ (1(R), x, blue) | ]
      interface { 1 }
      where indeg(1) < 2
    }

Node ids shared by both sides form the interface (the optional
``interface`` clause is checked against them).  Edge ids shared by both
sides denote a preserved edge.  ``(B)`` after an edge id marks it as
bidirectional, that is, matched in either direction.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .commands import Break, Call, Command, Fail, If, Loop, Or, Skip, Try, seq, unseq
from .host import EDGE_MARKS, MARK_CODES, MARK_NAMES, NODE_MARKS, HostGraph, Label
from .rules import (And, Condition, Const, Degree, EdgePred, LabelExpr, Not, Rule,
                    RuleEdge, RuleError, RuleGraph, RuleNode, Var)


class ParseError(Exception):
    def __init__(self, message: str, line: int = 0, col: int = 0) -> None:
        self.message = message
        self.line = line
        self.col = col
        where = f"{line}:{col}: " if line else ""
        super().__init__(where + message)


class DanglingReferenceError(ParseError):
    pass


def _line_col(text: str, pos: int) -> Tuple[int, int]:
    line = text.count("\n", 0, pos) + 1
    return line, pos - (text.rfind("\n", 0, pos) + 1) + 1


# ------------------------------------------------------------------ labels

_ATOM = r'-?\d+|"(?:[^"\\\n]|\\.)*"'
_ATOM_RE = re.compile(_ATOM)
_UNESCAPE_RE = re.compile(r"\\(.)")


def _atom_value(tok: str):
    if tok[0] == '"':
        return _UNESCAPE_RE.sub(r"\1", tok[1:-1])
    return int(tok)


def format_atom(a) -> str:
    if isinstance(a, str):
        return '"' + a.replace("\\", "\\\\").replace('"', '\\"') + '"'
    return str(a)


def format_label(label: Label) -> str:
    if not label:
        return "empty"
    return ":".join(format_atom(a) for a in label)


def parse_label(text: str) -> Label:
    text = text.strip()
    if text == "empty":
        return ()
    return tuple(_atom_value(t) for t in _ATOM_RE.findall(text))


# -------------------------------------------------------------- host graphs

_LABEL = rf"empty|(?:{_ATOM})(?:\s*:\s*(?:{_ATOM}))*"
_NODE_RE = re.compile(
    rf"\s*\(\s*(\w+)\s*(\(\s*R\s*\))?\s*,\s*({_LABEL})\s*(?:,\s*([a-z]+)\s*)?\)")
_EDGE_RE = re.compile(
    rf"\s*\(\s*(\w+)\s*,\s*(\w+)\s*,\s*(\w+)\s*,\s*({_LABEL})\s*(?:,\s*([a-z]+)\s*)?\)")
_OPEN_RE = re.compile(r"\s*\[")
_BAR_RE = re.compile(r"\s*\|")
_CLOSE_RE = re.compile(r"\s*\]\s*")


def parse_host(text: str) -> HostGraph:
    """Parse the host-graph format; node and edge ids are renumbered densely."""
    def fail(msg, pos, cls=ParseError):
        line, col = _line_col(text, pos)
        raise cls(msg, line, col)

    m = _OPEN_RE.match(text)
    if not m:
        fail("expected '['", 0)
    pos = m.end()
    g = HostGraph()
    ids: Dict[str, object] = {}
    new_node = g._new_node
    node_re = _NODE_RE.match
    while True:
        m = node_re(text, pos)
        if m is None:
            break
        nid, root, label, mark = m.groups()
        if nid in ids:
            fail(f"duplicate node id {nid}", m.start(1))
        code = MARK_CODES.get(mark, -1) if mark else 0
        if code not in NODE_MARKS:
            fail(f"invalid node mark {mark!r}", m.start(4))
        ids[nid] = new_node(() if label == "empty" else parse_label(label), code, root is not None)
        pos = m.end()
    m = _BAR_RE.match(text, pos)
    if not m:
        fail("expected a node or '|'", pos)
    pos = m.end()
    seen_edges = set()
    new_edge = g._new_edge
    edge_re = _EDGE_RE.match
    while True:
        m = edge_re(text, pos)
        if m is None:
            break
        eid, s, t, label, mark = m.groups()
        if eid in seen_edges:
            fail(f"duplicate edge id {eid}", m.start(1))
        seen_edges.add(eid)
        src = ids.get(s)
        tgt = ids.get(t)
        if src is None or tgt is None:
            bad = s if src is None else t
            fail(f"edge {eid} refers to unknown node {bad}", m.start(1), DanglingReferenceError)
        code = MARK_CODES.get(mark, -1) if mark else 0
        if code not in EDGE_MARKS:
            fail(f"invalid edge mark {mark!r}", m.start(5))
        new_edge(src, tgt, () if label == "empty" else parse_label(label), code)
        pos = m.end()
    m = _CLOSE_RE.match(text, pos)
    if not m or m.end() != len(text):
        fail("expected an edge or ']'", pos)
    return g


def print_host(g: HostGraph) -> str:
    """Print in iteration order, one item per line."""
    out = ["["]
    names = MARK_NAMES
    for n in g.node_cells():
        lab = "empty" if not n.label else format_label(n.label)
        r = "(R)" if n.root else ""
        if n.mark:
            out.append(f"({n.id}{r}, {lab}, {names[n.mark]})")
        else:
            out.append(f"({n.id}{r}, {lab})")
    out.append("|")
    for e in g.edge_cells():
        lab = "empty" if not e.label else format_label(e.label)
        if e.mark:
            out.append(f"({e.id}, {e.src.id}, {e.tgt.id}, {lab}, {names[e.mark]})")
        else:
            out.append(f"({e.id}, {e.src.id}, {e.tgt.id}, {lab})")
    out.append("]")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------- tokenizer

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+|//[^\n]*|/\*.*?\*/)
  | (?P<str>"(?:[^"\\\n]|\\.)*")
  | (?P<int>-?\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>!=|<=|>=|[()\[\]{}|,;:!=<>])
""", re.X | re.S)

KEYWORDS = frozenset(
    "if then else try or skip fail break lhs rhs where interface not and "
    "indeg outdeg edge empty list".split())


@dataclass
class Token:
    kind: str
    text: str
    pos: int


def tokenize(text: str) -> List[Token]:
    out = []
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            line, col = _line_col(text, pos)
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        if kind != "ws":
            out.append(Token(kind, m.group(), pos))
        pos = m.end()
    out.append(Token("eof", "", n))
    return out


# ----------------------------------------------------------------- programs


@dataclass
class ProgramSource:
    """Parsed program: rule and procedure declarations in source order."""
    rules: Dict[str, Rule] = field(default_factory=dict)
    procedures: Dict[str, Command] = field(default_factory=dict)
    positions: Dict[str, Tuple[int, int]] = field(default_factory=dict, compare=False)

    def main(self) -> Command:
        from .interpreter import inline_procedures
        return inline_procedures(self)


class _Parser:
    def __init__(self, text: str) -> None:
        self.text = text
        self.toks = tokenize(text)
        self.i = 0

    # helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg: str, tok: Optional[Token] = None) -> ParseError:
        tok = tok or self.tok
        line, col = _line_col(self.text, tok.pos)
        found = tok.text or "end of input"
        return ParseError(f"{msg} (found {found!r})", line, col)

    def at(self, text: str) -> bool:
        t = self.tok
        return t.text == text and t.kind != "str"

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(f"expected {text!r}")
        t = self.tok
        self.i += 1
        return t

    def name(self, what: str = "a name") -> str:
        t = self.tok
        if t.kind != "name" or t.text in KEYWORDS:
            raise self.error(f"expected {what}")
        self.i += 1
        return t.text

    def ident(self) -> str:
        t = self.tok
        if t.kind not in ("name", "int"):
            raise self.error("expected an identifier")
        self.i += 1
        return t.text

    # program
    def program(self) -> ProgramSource:
        ps = ProgramSource()
        if self.tok.kind == "eof":
            raise self.error("empty program")
        while self.tok.kind != "eof":
            start = self.tok
            name = self.name("a declaration name")
            if name in ps.rules or name in ps.procedures:
                raise self.error(f"duplicate declaration {name}", start)
            ps.positions[name] = _line_col(self.text, start.pos)
            if self.accept("="):
                ps.procedures[name] = self.comseq()
            elif self.at("("):
                ps.rules[name] = self.rule(name, start)
            else:
                raise self.error("expected '=' or '(' after declaration name")
        return ps

    def comseq(self) -> Command:
        items = [self.command()]
        while self.accept(";"):
            items.append(self.command())
        return seq(*items)

    def command(self) -> Command:
        if self.accept("if"):
            c = self.block()
            self.expect("then")
            p = self.block()
            q = self.block() if self.accept("else") else Skip()
            return If(c, p, q)
        if self.accept("try"):
            c = self.block()
            p = self.block() if self.accept("then") else Skip()
            q = self.block() if self.accept("else") else Skip()
            return Try(c, p, q)
        c = self.block()
        while self.accept("or"):
            c = Or(c, self.block())
        return c

    def block(self) -> Command:
        if self.accept("("):
            c = self.comseq()
            self.expect(")")
        elif self.accept("{"):
            names = [self.name("a rule name")]
            while self.accept(","):
                names.append(self.name("a rule name"))
            self.expect("}")
            c = Call(tuple(names))
        elif self.accept("skip"):
            c = Skip()
        elif self.accept("fail"):
            c = Fail()
        elif self.accept("break"):
            c = Break()
        else:
            c = Call((self.name("a command"),))
        if self.accept("!"):
            c = Loop(c)
        return c

    # rules
    def rule(self, name: str, start: Token) -> Rule:
        self.expect("(")
        params: List[str] = []
        if not self.at(")"):
            while True:
                group = [self.name("a variable")]
                while self.accept(","):
                    group.append(self.name("a variable"))
                self.expect(":")
                if not self.accept("list"):
                    raise self.error("only the type 'list' is supported")
                params.extend(group)
                if not self.accept(";"):
                    break
        self.expect(")")
        self.expect("{")
        self.expect("lhs")
        lhs = self.graph_lit(set(params))
        self.expect("rhs")
        rhs = self.graph_lit(set(params))
        iface = None
        if self.accept("interface"):
            self.expect("{")
            iface = []
            if not self.at("}"):
                iface.append(self.ident())
                while self.accept(","):
                    iface.append(self.ident())
            self.expect("}")
        cond = None
        if self.accept("where"):
            cond = self.condition()
        end = self.expect("}")
        shared = [n.id for n in lhs.nodes if n.id in set(rhs.node_ids)]
        if iface is not None and sorted(iface) != sorted(shared):
            raise self.error(
                f"interface {{{', '.join(iface)}}} does not match the node ids shared "
                f"by lhs and rhs {{{', '.join(shared)}}}", end)
        try:
            return Rule(name, tuple(params), lhs, rhs, cond, pos=_line_col(self.text, start.pos))
        except RuleError as exc:
            line, col = _line_col(self.text, start.pos)
            raise ParseError(str(exc), line, col) from None

    def graph_lit(self, params: set) -> RuleGraph:
        self.expect("[")
        nodes = []
        while self.at("("):
            self.i += 1
            nid = self.ident()
            root = False
            if self.accept("("):
                if self.tok.text != "R":
                    raise self.error("expected 'R'")
                self.i += 1
                self.expect(")")
                root = True
            self.expect(",")
            label = self.label_expr(params)
            mark = 0
            if self.accept(","):
                mark = self.mark()
            self.expect(")")
            nodes.append(RuleNode(nid, label, mark, root))
        self.expect("|")
        edges = []
        while self.at("("):
            self.i += 1
            eid = self.ident()
            bidi = False
            if self.accept("("):
                if self.tok.text != "B":
                    raise self.error("expected 'B'")
                self.i += 1
                self.expect(")")
                bidi = True
            self.expect(",")
            s = self.ident()
            self.expect(",")
            t = self.ident()
            self.expect(",")
            label = self.label_expr(params)
            mark = 0
            if self.accept(","):
                mark = self.mark()
            self.expect(")")
            edges.append(RuleEdge(eid, s, t, label, mark, bidi))
        self.expect("]")
        return RuleGraph(tuple(nodes), tuple(edges))

    def mark(self) -> int:
        t = self.tok
        if t.kind != "name" or t.text not in MARK_CODES or t.text == "none":
            raise self.error("expected a mark name")
        self.i += 1
        return MARK_CODES[t.text]

    def label_expr(self, params: set) -> LabelExpr:
        if self.accept("empty"):
            return Const(())
        t = self.tok
        if t.kind == "name" and t.text not in KEYWORDS:
            self.i += 1
            if self.at(":"):
                raise self.error("a label expression is a single variable or a constant list")
            if t.text not in params:
                raise self.error(f"undeclared variable {t.text}", t)
            return Var(t.text)
        atoms = [self.atom()]
        while self.accept(":"):
            atoms.append(self.atom())
        return Const(tuple(atoms))

    def atom(self):
        t = self.tok
        if t.kind == "int":
            self.i += 1
            return int(t.text)
        if t.kind == "str":
            self.i += 1
            return _atom_value(t.text)
        raise self.error("expected an integer or a string")

    # conditions
    def condition(self) -> Condition:
        c = self.cond_unary()
        while self.accept("and"):
            c = And(c, self.cond_unary())
        return c

    def cond_unary(self) -> Condition:
        if self.accept("not"):
            return Not(self.cond_unary())
        if self.accept("("):
            c = self.condition()
            self.expect(")")
            return c
        if self.at("indeg") or self.at("outdeg"):
            kind = self.tok.text
            self.i += 1
            self.expect("(")
            nid = self.ident()
            self.expect(")")
            t = self.tok
            if t.kind != "op" or t.text not in ("=", "!=", "<", "<=", ">", ">="):
                raise self.error("expected a comparison operator")
            self.i += 1
            if self.tok.kind != "int":
                raise self.error("expected an integer")
            k = int(self.tok.text)
            self.i += 1
            return Degree(kind, nid, t.text, k)
        if self.accept("edge"):
            self.expect("(")
            s = self.ident()
            self.expect(",")
            t = self.ident()
            self.expect(")")
            return EdgePred(s, t)
        raise self.error("expected a condition")


def parse_program(text: str) -> ProgramSource:
    p = _Parser(text)
    return p.program()


def parse_command(text: str) -> Command:
    p = _Parser(text)
    c = p.comseq()
    if p.tok.kind != "eof":
        raise p.error("unexpected trailing input")
    return c


# ---------------------------------------------------------------- printing


def format_command(c: Command) -> str:
    return "; ".join(_fmt_cmd(x) for x in unseq(c))


def _fmt_cmd(c: Command) -> str:
    if isinstance(c, If):
        return f"if {_fmt_block(c.cond)} then {_fmt_block(c.then)} else {_fmt_block(c.else_)}"
    if isinstance(c, Try):
        return f"try {_fmt_block(c.cond)} then {_fmt_block(c.then)} else {_fmt_block(c.else_)}"
    if isinstance(c, Or):
        return f"{_fmt_block(c.left)} or {_fmt_block(c.right)}"
    return _fmt_block(c)


def _fmt_simple(c: Command) -> Optional[str]:
    if isinstance(c, Call):
        return c.rules[0] if len(c.rules) == 1 else "{" + ", ".join(c.rules) + "}"
    if isinstance(c, Skip):
        return "skip"
    if isinstance(c, Fail):
        return "fail"
    if isinstance(c, Break):
        return "break"
    return None


def _fmt_block(c: Command) -> str:
    s = _fmt_simple(c)
    if s is not None:
        return s
    if isinstance(c, Loop):
        inner = _fmt_simple(c.body)
        if inner is None:
            inner = "(" + format_command(c.body) + ")"
        return inner + "!"
    return "(" + format_command(c) + ")"


def _fmt_label_expr(e: LabelExpr) -> str:
    return e.name if isinstance(e, Var) else format_label(e.label)


def format_rule_graph(g: RuleGraph) -> str:
    items = []
    for n in g.nodes:
        s = f"({n.id}{'(R)' if n.root else ''}, {_fmt_label_expr(n.label)}"
        if n.mark:
            s += f", {MARK_NAMES[n.mark]}"
        items.append(s + ")")
    items.append("|")
    for e in g.edges:
        s = (f"({e.id}{'(B)' if e.bidirectional else ''}, {e.src}, {e.tgt}, "
             f"{_fmt_label_expr(e.label)}")
        if e.mark:
            s += f", {MARK_NAMES[e.mark]}"
        items.append(s + ")")
    return "[ " + " ".join(items) + " ]"


def format_condition(c: Condition) -> str:
    if isinstance(c, Degree):
        return f"{c.kind}({c.node}) {c.op} {c.value}"
    if isinstance(c, EdgePred):
        return f"edge({c.src}, {c.tgt})"
    if isinstance(c, Not):
        inner = format_condition(c.arg)
        return f"not ({inner})" if isinstance(c.arg, And) else f"not {inner}"
    right = format_condition(c.right)
    if isinstance(c.right, And):
        right = f"({right})"
    return f"{format_condition(c.left)} and {right}"


def format_rule(r: Rule) -> str:
    params = f"{', '.join(r.params)}: list" if r.params else ""
    lines = [f"{r.name}({params})", "{",
             f"  lhs {format_rule_graph(r.lhs)}",
             f"  rhs {format_rule_graph(r.rhs)}",
             f"  interface {{{', '.join(r.interface)}}}"]
    if r.condition is not None:
        lines.append(f"  where {format_condition(r.condition)}")
    lines.append("}")
    return "\n".join(lines)


def print_program(ps: ProgramSource) -> str:
    parts = [f"{name} = {format_command(c)}" for name, c in ps.procedures.items()]
    parts += [format_rule(r) for r in ps.rules.values()]
    return "\n\n".join(parts) + "\n"


__all__ = [
    "DanglingReferenceError", "ParseError", "ProgramSource", "format_command",
    "format_label", "format_rule", "parse_command", "parse_host", "parse_label",
    "parse_program", "print_host", "print_program", "tokenize",
]
