"""In-memory statechart model: typed variables, events, states, guarded transitions.

The model here is flat (one implicit region). Hierarchy, parallel regions,
entry/exit actions and time triggers are deliberately unsupported.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1

#: Name of the final pseudo-state. It is not a StateDef: it has no outgoing
#: transitions and is addressable in scenarios and generated code.
FINAL = "__final__"

RESERVED_WORDS = frozenset(
    {
        "statechart",
        "var",
        "event",
        "initial",
        "state",
        "when",
        "on",
        "int",
        "bool",
        "true",
        "false",
        "final",
    }
)


class VType(Enum):
    INT = "int"
    BOOL = "bool"


Value = Union[int, bool]


def value_type(v: Value) -> VType:
    # bool is a subclass of int, so the bool check must come first
    if type(v) is bool:
        return VType.BOOL
    if type(v) is int:
        return VType.INT
    raise TypeError(f"not a model value: {v!r}")


def format_value(v: Value) -> str:
    if type(v) is bool:
        return "true" if v else "false"
    return str(v)


@dataclass(frozen=True)
class Span:
    """1-based source location: (line, column, length)."""

    line: int = 1
    column: int = 1
    length: int = 1


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    span: Span = Span()

    def to_dict(self) -> dict:
        return {
            "code": self.code,
            "message": self.message,
            "span": {
                "line": self.span.line,
                "column": self.span.column,
                "length": self.span.length,
            },
        }


# --------------------------------------------------------------------------
# Guard expressions

COMPARE_OPS = ("==", "!=", "<", "<=", ">", ">=")
ORDER_OPS = ("<", "<=", ">", ">=")


@dataclass(frozen=True)
class IntLit:
    value: int
    span: Span = field(default=Span(), compare=False)


@dataclass(frozen=True)
class BoolLit:
    value: bool
    span: Span = field(default=Span(), compare=False)


@dataclass(frozen=True)
class VarRef:
    name: str
    span: Span = field(default=Span(), compare=False)


@dataclass(frozen=True)
class Compare:
    op: str  # one of COMPARE_OPS
    lhs: "Expr"
    rhs: "Expr"
    span: Span = field(default=Span(), compare=False)


@dataclass(frozen=True)
class Logic:
    op: str  # "&&" or "||"
    lhs: "Expr"
    rhs: "Expr"
    span: Span = field(default=Span(), compare=False)


@dataclass(frozen=True)
class Not:
    operand: "Expr"
    span: Span = field(default=Span(), compare=False)


Expr = Union[IntLit, BoolLit, VarRef, Compare, Logic, Not]


def expr_type(
    expr: Expr, var_types: dict, diags: Optional[list] = None
) -> Optional[VType]:
    """Type of ``expr`` under ``var_types``, or None if it does not check.

    When ``diags`` is given, one E_GUARD_TYPE / E_UNKNOWN_VAR diagnostic is
    appended per defect; the walk continues so every defect is reported.
    """

    def bad(code: str, message: str, span: Span) -> None:
        if diags is not None:
            diags.append(Diagnostic(code, message, span))

    if isinstance(expr, IntLit):
        return VType.INT
    if isinstance(expr, BoolLit):
        return VType.BOOL
    if isinstance(expr, VarRef):
        t = var_types.get(expr.name)
        if t is None:
            bad("E_UNKNOWN_VAR", f"unknown variable '{expr.name}'", expr.span)
        return t
    if isinstance(expr, Compare):
        lt = expr_type(expr.lhs, var_types, diags)
        rt = expr_type(expr.rhs, var_types, diags)
        if lt is None or rt is None:
            return None
        if expr.op in ORDER_OPS:
            if lt is VType.INT and rt is VType.INT:
                return VType.BOOL
            bad(
                "E_GUARD_TYPE",
                f"'{expr.op}' requires int operands, got {lt.value} and {rt.value}",
                expr.span,
            )
            return None
        if lt is not rt:
            bad(
                "E_GUARD_TYPE",
                f"'{expr.op}' operands must have the same type, "
                f"got {lt.value} and {rt.value}",
                expr.span,
            )
            return None
        return VType.BOOL
    if isinstance(expr, Logic):
        ok = True
        for side in (expr.lhs, expr.rhs):
            t = expr_type(side, var_types, diags)
            if t is None:
                ok = False
            elif t is not VType.BOOL:
                bad("E_GUARD_TYPE", f"'{expr.op}' operand must be bool", expr.span)
                ok = False
        return VType.BOOL if ok else None
    if isinstance(expr, Not):
        t = expr_type(expr.operand, var_types, diags)
        if t is None:
            return None
        if t is not VType.BOOL:
            bad("E_GUARD_TYPE", "'!' operand must be bool", expr.span)
            return None
        return VType.BOOL
    raise TypeError(f"not an expression node: {expr!r}")


def eval_guard(expr: Expr, env: dict) -> bool:
    """Evaluate a type-checked guard. Pure; never mutates ``env``."""
    if isinstance(expr, (IntLit, BoolLit)):
        return expr.value
    if isinstance(expr, VarRef):
        return env[expr.name]
    if isinstance(expr, Compare):
        lhs = eval_guard(expr.lhs, env)
        rhs = eval_guard(expr.rhs, env)
        if expr.op == "==":
            return lhs == rhs
        if expr.op == "!=":
            return lhs != rhs
        if expr.op == "<":
            return lhs < rhs
        if expr.op == "<=":
            return lhs <= rhs
        if expr.op == ">":
            return lhs > rhs
        return lhs >= rhs
    if isinstance(expr, Logic):
        if expr.op == "&&":
            return eval_guard(expr.lhs, env) and eval_guard(expr.rhs, env)
        return eval_guard(expr.lhs, env) or eval_guard(expr.rhs, env)
    if isinstance(expr, Not):
        return not eval_guard(expr.operand, env)
    raise TypeError(f"not an expression node: {expr!r}")


def format_expr(expr: Expr) -> str:
    """Canonical text of an expression, parenthesized by precedence."""
    return _fmt(expr, 0)


# precedence levels: 0 = ||, 1 = &&, 2 = comparison, 3 = unary/primary
def _prec(expr: Expr) -> int:
    if isinstance(expr, Logic):
        return 0 if expr.op == "||" else 1
    if isinstance(expr, Compare):
        return 2
    return 3


def _fmt(expr: Expr, parent_prec: int) -> str:
    p = _prec(expr)
    if isinstance(expr, IntLit):
        text = str(expr.value)
    elif isinstance(expr, BoolLit):
        text = "true" if expr.value else "false"
    elif isinstance(expr, VarRef):
        text = expr.name
    elif isinstance(expr, Compare):
        text = f"{_fmt(expr.lhs, p + 1)} {expr.op} {_fmt(expr.rhs, p + 1)}"
    elif isinstance(expr, Logic):
        text = f"{_fmt(expr.lhs, p)} {expr.op} {_fmt(expr.rhs, p + 1)}"
    elif isinstance(expr, Not):
        text = f"!{_fmt(expr.operand, 4)}"
    else:
        raise TypeError(f"not an expression node: {expr!r}")
    if p < parent_prec:
        return f"({text})"
    return text


# --------------------------------------------------------------------------
# Model structure


@dataclass(frozen=True)
class VariableDecl:
    name: str
    vtype: VType
    default: Value
    span: Span = field(default=Span(), compare=False)


@dataclass(frozen=True)
class Transition:
    """One outgoing transition. Source and priority are positional:
    the owning StateDef is the source, the list index is the decl_index."""

    target: str  # state name or FINAL
    trigger: Optional[str] = None  # event name, or None for eventless
    guard: Optional[Expr] = None
    span: Span = field(default=Span(), compare=False)


@dataclass(frozen=True)
class StateDef:
    name: str
    transitions: tuple = ()
    span: Span = field(default=Span(), compare=False)


@dataclass(frozen=True)
class EventDecl:
    name: str
    span: Span = field(default=Span(), compare=False)


@dataclass(frozen=True)
class StatechartModel:
    name: str
    variables: tuple = ()  # of VariableDecl
    events: tuple = ()  # of EventDecl
    states: tuple = ()  # of StateDef
    initial_target: Optional[str] = None
    initial_span: Span = field(default=Span(), compare=False)
    span: Span = field(default=Span(), compare=False)

    def state_names(self) -> list:
        return [s.name for s in self.states]

    def event_names(self) -> list:
        return [e.name for e in self.events]


class ValidationError(Exception):
    def __init__(self, diagnostics: list):
        self.diagnostics = list(diagnostics)
        summary = "; ".join(f"{d.code}: {d.message}" for d in self.diagnostics)
        super().__init__(summary or "invalid model")


class ValidatedModel:
    """Handle proving the wrapped model satisfies every model invariant.

    Immutable after construction; safe to share across concurrent readers.
    """

    def __init__(self, model: StatechartModel, _token=None):
        if _token is not _VALIDATED:
            raise TypeError("use validate() to obtain a ValidatedModel")
        self.model = model
        self.var_types = {v.name: v.vtype for v in model.variables}
        self.defaults = {v.name: v.default for v in model.variables}
        self.states_by_name = {s.name: s for s in model.states}
        self.event_set = frozenset(e.name for e in model.events)

    @property
    def name(self) -> str:
        return self.model.name

    @property
    def initial_target(self) -> str:
        return self.model.initial_target

    def is_state(self, name: str) -> bool:
        return name in self.states_by_name or name == FINAL


_VALIDATED = object()


def diagnose(model: StatechartModel) -> list:
    """All model-invariant violations, as diagnostics. Total: never raises."""
    diags: list = []
    seen: dict = {}
    for kind, decls in (
        ("state", model.states),
        ("variable", model.variables),
        ("event", model.events),
    ):
        for d in decls:
            if d.name in seen:
                diags.append(
                    Diagnostic(
                        "E_DUP_NAME",
                        f"{kind} '{d.name}' conflicts with {seen[d.name]} of the same name",
                        d.span,
                    )
                )
            else:
                seen[d.name] = kind

    state_names = {s.name for s in model.states}
    var_types = {v.name: v.vtype for v in model.variables}
    event_names = {e.name for e in model.events}

    if model.initial_target is None:
        diags.append(
            Diagnostic("E_NO_INITIAL", "model declares no initial state", model.span)
        )
    elif model.initial_target not in state_names:
        diags.append(
            Diagnostic(
                "E_UNKNOWN_STATE",
                f"initial target '{model.initial_target}' is not a declared state",
                model.initial_span,
            )
        )

    for v in model.variables:
        if value_type(v.default) is not v.vtype:
            diags.append(
                Diagnostic(
                    "E_GUARD_TYPE",
                    f"default for '{v.name}' does not match its declared type",
                    v.span,
                )
            )

    for state in model.states:
        for t in state.transitions:
            if t.target != FINAL and t.target not in state_names:
                diags.append(
                    Diagnostic(
                        "E_UNKNOWN_STATE",
                        f"transition target '{t.target}' is not a declared state",
                        t.span,
                    )
                )
            if t.trigger is not None and t.trigger not in event_names:
                diags.append(
                    Diagnostic(
                        "E_UNKNOWN_EVENT",
                        f"trigger '{t.trigger}' is not a declared event",
                        t.span,
                    )
                )
            if t.guard is not None:
                guard_diags: list = []
                t_ = expr_type(t.guard, var_types, guard_diags)
                diags.extend(guard_diags)
                if not guard_diags and t_ is not VType.BOOL:
                    diags.append(
                        Diagnostic("E_GUARD_TYPE", "guard must be boolean", t.span)
                    )
    return diags


def validate(model: StatechartModel) -> ValidatedModel:
    """Validate ``model``; raises ValidationError carrying all diagnostics."""
    diags = diagnose(model)
    if diags:
        raise ValidationError(diags)
    return ValidatedModel(model, _token=_VALIDATED)
