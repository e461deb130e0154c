"""Concrete syntax: the statechart DSL and the scenario file format.

This module is the sole owner of concrete syntax. Everything downstream
works on the in-memory model from :mod:`statetest.model`.

Statechart grammar (see docs/grammar.md for the full write-up)::

    statechart  := 'statechart' IDENT '{' item* '}'
    item        := 'var' IDENT ':' ('int'|'bool') '=' literal
                 | 'event' IDENT
                 | 'initial' '->' IDENT
                 | 'state' IDENT '{' transition* '}'
    transition  := 'when' guard? '->' target
                 | 'on' IDENT guard? '->' target
    guard       := '[' expr ']'
    target      := IDENT | 'final'
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import List, Optional, Tuple

from .model import (
    FINAL,
    INT64_MAX,
    INT64_MIN,
    RESERVED_WORDS,
    BoolLit,
    Compare,
    Diagnostic,
    EventDecl,
    Expr,
    IntLit,
    Logic,
    Not,
    Span,
    StateDef,
    StatechartModel,
    Transition,
    VarRef,
    VariableDecl,
    VType,
    format_expr,
    format_value,
)


@dataclass(frozen=True)
class SourceText:
    content: str
    origin: str = "<memory>"


class ParseError(Exception):
    def __init__(self, diagnostics: List[Diagnostic]):
        self.diagnostics = list(diagnostics)
        summary = "; ".join(f"{d.code}: {d.message}" for d in self.diagnostics)
        super().__init__(summary or "parse error")


# --------------------------------------------------------------------------
# Lexer

_PUNCT = ("->", "==", "!=", "<=", ">=", "&&", "||", "{", "}", "[", "]", "(", ")",
          ":", "=", "<", ">", "!", ",")


@dataclass(frozen=True)
class Token:
    kind: str  # 'ident', 'keyword', 'int', 'punct', 'eof'
    text: str
    span: Span


def _lex(src: str) -> Tuple[List[Token], List[Diagnostic]]:
    tokens: List[Token] = []
    diags: List[Diagnostic] = []
    line, col, i = 1, 1, 0
    n = len(src)
    while i < n:
        c = src[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "#":  # line comment
            while i < n and src[i] != "\n":
                i += 1
                col += 1
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            text = src[i:j]
            kind = "keyword" if text in RESERVED_WORDS else "ident"
            tokens.append(Token(kind, text, Span(line, col, j - i)))
            col += j - i
            i = j
            continue
        if c.isdigit() or (c == "-" and i + 1 < n and src[i + 1].isdigit()
                           and (not tokens or tokens[-1].kind in ("punct", "keyword")
                                and tokens[-1].text not in (")", "]"))):
            j = i + 1
            while j < n and src[j].isdigit():
                j += 1
            text = src[i:j]
            span = Span(line, col, j - i)
            value = int(text)
            if not INT64_MIN <= value <= INT64_MAX:
                diags.append(
                    Diagnostic("E_LEXICAL", f"integer literal out of 64-bit range: {text}", span)
                )
            else:
                tokens.append(Token("int", text, span))
            col += j - i
            i = j
            continue
        two = src[i : i + 2]
        if two in _PUNCT:
            tokens.append(Token("punct", two, Span(line, col, 2)))
            i += 2
            col += 2
            continue
        if c in _PUNCT:
            tokens.append(Token("punct", c, Span(line, col, 1)))
            i += 1
            col += 1
            continue
        diags.append(Diagnostic("E_LEXICAL", f"invalid character {c!r}", Span(line, col, 1)))
        i += 1
        col += 1
    tokens.append(Token("eof", "", Span(line, col, 1)))
    return tokens, diags


# --------------------------------------------------------------------------
# Statechart parser (recursive descent with statement-level recovery)

_SYNC_WORDS = {"var", "event", "initial", "state", "when", "on"}


class _Parser:
    def __init__(self, tokens: List[Token]):
        self.tokens = tokens
        self.pos = 0
        self.diags: List[Diagnostic] = []

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.pos += 1
        return t

    def at(self, kind: str, text: Optional[str] = None) -> bool:
        t = self.tok
        return t.kind == kind and (text is None or t.text == text)

    def error(self, message: str, span: Optional[Span] = None) -> None:
        self.diags.append(Diagnostic("E_SYNTAX", message, span or self.tok.span))

    def expect(self, kind: str, text: Optional[str] = None) -> Optional[Token]:
        if self.at(kind, text):
            return self.advance()
        want = text or kind
        got = self.tok.text or "end of input"
        self.error(f"expected '{want}', found '{got}'")
        return None

    def expect_name(self, what: str) -> Optional[str]:
        if self.at("ident"):
            return self.advance().text
        if self.tok.kind == "keyword":
            self.error(f"'{self.tok.text}' is a reserved word and cannot name a {what}")
        else:
            got = self.tok.text or "end of input"
            self.error(f"expected {what} name, found '{got}'")
        return None

    def sync(self) -> None:
        """Skip to the next statement keyword or closing brace."""
        while not self.at("eof"):
            t = self.tok
            if t.kind == "keyword" and t.text in _SYNC_WORDS:
                return
            if t.kind == "punct" and t.text == "}":
                return
            self.advance()

    # -- grammar productions

    def statechart(self) -> StatechartModel:
        top_span = self.tok.span
        self.expect("keyword", "statechart")
        name = self.expect_name("statechart") or "_invalid"
        self.expect("punct", "{")
        variables: List[VariableDecl] = []
        events: List[EventDecl] = []
        states: List[StateDef] = []
        initial: Optional[str] = None
        initial_span = Span()
        while not self.at("punct", "}") and not self.at("eof"):
            t = self.tok
            if self.at("keyword", "var"):
                v = self.var_decl()
                if v is not None:
                    variables.append(v)
            elif self.at("keyword", "event"):
                self.advance()
                ev = self.expect_name("event")
                if ev is not None:
                    events.append(EventDecl(ev, t.span))
                else:
                    self.sync()
            elif self.at("keyword", "initial"):
                self.advance()
                self.expect("punct", "->")
                target = self.expect_name("state")
                if target is not None:
                    if initial is not None:
                        self.error("duplicate 'initial' declaration", t.span)
                    initial = target
                    initial_span = t.span
                else:
                    self.sync()
            elif self.at("keyword", "state"):
                s = self.state_def()
                if s is not None:
                    states.append(s)
            else:
                got = t.text or "end of input"
                self.error(f"expected 'var', 'event', 'initial' or 'state', found '{got}'")
                self.advance()
                self.sync()
        self.expect("punct", "}")
        if not self.at("eof"):
            self.error(f"unexpected trailing input '{self.tok.text}'")
        return StatechartModel(
            name=name,
            variables=tuple(variables),
            events=tuple(events),
            states=tuple(states),
            initial_target=initial,
            initial_span=initial_span,
            span=top_span,
        )

    def var_decl(self) -> Optional[VariableDecl]:
        span = self.tok.span
        self.advance()  # 'var'
        name = self.expect_name("variable")
        if name is None or self.expect("punct", ":") is None:
            self.sync()
            return None
        if self.at("keyword", "int"):
            vtype = VType.INT
        elif self.at("keyword", "bool"):
            vtype = VType.BOOL
        else:
            self.error(f"expected 'int' or 'bool', found '{self.tok.text}'")
            self.sync()
            return None
        self.advance()
        if self.expect("punct", "=") is None:
            self.sync()
            return None
        default = self.literal()
        if default is None:
            self.sync()
            return None
        return VariableDecl(name, vtype, default, span)

    def literal(self):
        if self.at("int"):
            return int(self.advance().text)
        if self.at("keyword", "true"):
            self.advance()
            return True
        if self.at("keyword", "false"):
            self.advance()
            return False
        self.error(f"expected a literal, found '{self.tok.text or 'end of input'}'")
        return None

    def state_def(self) -> Optional[StateDef]:
        span = self.tok.span
        self.advance()  # 'state'
        name = self.expect_name("state")
        if name is None:
            self.sync()
            return None
        if self.expect("punct", "{") is None:
            self.sync()
            return None
        transitions: List[Transition] = []
        while not self.at("punct", "}") and not self.at("eof"):
            if self.at("keyword", "when") or self.at("keyword", "on"):
                tr = self.transition()
                if tr is not None:
                    transitions.append(tr)
            else:
                got = self.tok.text or "end of input"
                self.error(f"expected 'when', 'on' or '}}', found '{got}'")
                self.advance()
                self.sync()
                if not (self.at("keyword", "when") or self.at("keyword", "on")):
                    break
        self.expect("punct", "}")
        return StateDef(name, tuple(transitions), span)

    def transition(self) -> Optional[Transition]:
        span = self.tok.span
        trigger: Optional[str] = None
        if self.at("keyword", "on"):
            self.advance()
            trigger = self.expect_name("event")
            if trigger is None:
                self.sync()
                return None
        else:
            self.advance()  # 'when'
        guard: Optional[Expr] = None
        if self.at("punct", "["):
            self.advance()
            guard = self.expr()
            if guard is None or self.expect("punct", "]") is None:
                self.sync()
                return None
        if self.expect("punct", "->") is None:
            self.sync()
            return None
        if self.at("keyword", "final"):
            self.advance()
            target = FINAL
        else:
            target = self.expect_name("state")
            if target is None:
                self.sync()
                return None
        return Transition(target=target, trigger=trigger, guard=guard, span=span)

    # -- guard expressions

    def expr(self) -> Optional[Expr]:
        return self.or_expr()

    def or_expr(self) -> Optional[Expr]:
        lhs = self.and_expr()
        while lhs is not None and self.at("punct", "||"):
            op = self.advance()
            rhs = self.and_expr()
            if rhs is None:
                return None
            lhs = Logic("||", lhs, rhs, op.span)
        return lhs

    def and_expr(self) -> Optional[Expr]:
        lhs = self.unary()
        while lhs is not None and self.at("punct", "&&"):
            op = self.advance()
            rhs = self.unary()
            if rhs is None:
                return None
            lhs = Logic("&&", lhs, rhs, op.span)
        return lhs

    def unary(self) -> Optional[Expr]:
        if self.at("punct", "!"):
            bang = self.advance()
            operand = self.unary()
            if operand is None:
                return None
            return Not(operand, bang.span)
        return self.comparison()

    def comparison(self) -> Optional[Expr]:
        lhs = self.primary()
        if lhs is None:
            return None
        if self.at("punct") and self.tok.text in ("==", "!=", "<", "<=", ">", ">="):
            op = self.advance()
            rhs = self.primary()
            if rhs is None:
                return None
            return Compare(op.text, lhs, rhs, op.span)
        return lhs

    def primary(self) -> Optional[Expr]:
        t = self.tok
        if t.kind == "int":
            self.advance()
            return IntLit(int(t.text), t.span)
        if self.at("keyword", "true"):
            self.advance()
            return BoolLit(True, t.span)
        if self.at("keyword", "false"):
            self.advance()
            return BoolLit(False, t.span)
        if t.kind == "ident":
            self.advance()
            return VarRef(t.text, t.span)
        if self.at("punct", "("):
            self.advance()
            inner = self.expr()
            if inner is None or self.expect("punct", ")") is None:
                return None
            return inner
        got = t.text or "end of input"
        self.error(f"expected an expression, found '{got}'")
        return None


def parse_statechart(src: SourceText) -> StatechartModel:
    """Parse DSL text; raises ParseError with every collected diagnostic."""
    tokens, diags = _lex(src.content)
    parser = _Parser(tokens)
    model = parser.statechart()
    all_diags = diags + parser.diags
    if all_diags:
        raise ParseError(all_diags)
    return model


# --------------------------------------------------------------------------
# Serializer


def serialize_statechart(model: StatechartModel) -> str:
    """Canonical text form: declaration order preserved, 2-space indent."""
    lines = [f"statechart {model.name} {{"]
    for v in model.variables:
        lines.append(f"  var {v.name}: {v.vtype.value} = {format_value(v.default)}")
    for e in model.events:
        lines.append(f"  event {e.name}")
    if model.initial_target is not None:
        lines.append(f"  initial -> {model.initial_target}")
    for state in model.states:
        if not state.transitions:
            lines.append(f"  state {state.name} {{ }}")
            continue
        lines.append(f"  state {state.name} {{")
        for t in state.transitions:
            head = f"on {t.trigger}" if t.trigger is not None else "when"
            guard = f" [{format_expr(t.guard)}]" if t.guard is not None else ""
            target = "final" if t.target == FINAL else t.target
            lines.append(f"    {head}{guard} -> {target}")
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# Scenario files


def parse_scenario(src: SourceText):
    """Parse a ``.scenario.json`` file into a Scenario.

    Raises ParseError on malformed JSON, wrong keys/types, or when the three
    lists differ in length (E_LENGTH_MISMATCH).
    """
    from .scenario import Scenario

    try:
        data = json.loads(src.content)
    except json.JSONDecodeError as exc:
        span = Span(exc.lineno, exc.colno, 1)
        raise ParseError([Diagnostic("E_SYNTAX", f"invalid JSON: {exc.msg}", span)])

    diags: List[Diagnostic] = []
    if not isinstance(data, dict):
        raise ParseError([Diagnostic("E_SYNTAX", "scenario must be a JSON object")])
    required = {"machine", "expectations", "variables", "inputs"}
    missing = required - set(data)
    extra = set(data) - required
    for key in sorted(missing):
        diags.append(Diagnostic("E_SYNTAX", f"missing key '{key}'"))
    for key in sorted(extra):
        diags.append(Diagnostic("E_SYNTAX", f"unknown key '{key}'"))
    if diags:
        raise ParseError(diags)

    if not isinstance(data["machine"], str):
        diags.append(Diagnostic("E_SYNTAX", "'machine' must be a string"))
    for key in ("expectations", "variables"):
        value = data[key]
        if not (isinstance(value, list) and all(isinstance(x, str) for x in value)):
            diags.append(Diagnostic("E_SYNTAX", f"'{key}' must be a list of strings"))
    inputs = data["inputs"]
    if not (isinstance(inputs, list) and all(type(x) in (int, bool) for x in inputs)):
        diags.append(
            Diagnostic("E_SYNTAX", "'inputs' must be a list of integers and booleans")
        )
    if diags:
        raise ParseError(diags)

    lengths = {len(data["expectations"]), len(data["variables"]), len(inputs)}
    if len(lengths) > 1:
        raise ParseError(
            [
                Diagnostic(
                    "E_LENGTH_MISMATCH",
                    "expectations ({}), variables ({}) and inputs ({}) must have "
                    "the same length".format(
                        len(data["expectations"]), len(data["variables"]), len(inputs)
                    ),
                )
            ]
        )
    return Scenario(
        machine=data["machine"],
        expectations=tuple(data["expectations"]),
        variables=tuple(data["variables"]),
        inputs=tuple(inputs),
    )


def serialize_scenario(scenario) -> str:
    data = {
        "machine": scenario.machine,
        "expectations": list(scenario.expectations),
        "variables": list(scenario.variables),
        "inputs": list(scenario.inputs),
    }
    return json.dumps(data, indent=2) + "\n"


def scenario_from_csv_fields(machine: str, expectations: str, variables: str, inputs: str):
    """Build a Scenario from three comma-separated field strings.

    Surrounding whitespace around each item is trimmed. Empty field strings
    mean empty lists.
    """
    from .scenario import Scenario

    def split_names(text: str) -> tuple:
        return tuple(item.strip() for item in text.split(",")) if text.strip() else ()

    def split_values(text: str) -> tuple:
        items = split_names(text)
        values = []
        for item in items:
            if item == "true":
                values.append(True)
            elif item == "false":
                values.append(False)
            else:
                try:
                    values.append(int(item))
                except ValueError:
                    raise ParseError(
                        [Diagnostic("E_SYNTAX", f"invalid input value '{item}'")]
                    )
        return tuple(values)

    parts = (split_names(expectations), split_names(variables), split_values(inputs))
    if len({len(p) for p in parts}) > 1:
        raise ParseError(
            [Diagnostic("E_LENGTH_MISMATCH", "the three fields must have the same length")]
        )
    return Scenario(machine, *parts)
