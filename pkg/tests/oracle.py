"""Independent brute-force statechart interpreter used as a test oracle.

Written before (and kept independent of) statetest.simulator: it re-scans
the whole transition list every micro-step, uses its own expression
evaluator, and keeps its own notion of state. Only the model data types are
shared.
"""
from statetest.model import (
    FINAL,
    BoolLit,
    Compare,
    IntLit,
    Logic,
    Not,
    VarRef,
)

LIMIT = 1000


def naive_eval(expr, env):
    """Second, deliberately naive guard evaluator (dict-dispatch style)."""
    kind = type(expr).__name__
    if kind in ("IntLit", "BoolLit"):
        return expr.value
    if kind == "VarRef":
        return env[expr.name]
    if kind == "Compare":
        a = naive_eval(expr.lhs, env)
        b = naive_eval(expr.rhs, env)
        table = {
            "==": lambda: a == b,
            "!=": lambda: a != b,
            "<": lambda: a < b,
            "<=": lambda: a <= b,
            ">": lambda: a > b,
            ">=": lambda: a >= b,
        }
        return table[expr.op]()
    if kind == "Logic":
        a = naive_eval(expr.lhs, env)
        b = naive_eval(expr.rhs, env)
        return (a and b) if expr.op == "&&" else (a or b)
    if kind == "Not":
        return not naive_eval(expr.operand, env)
    raise AssertionError(f"unknown node {kind}")


class BruteForceSession:
    """Reference interpreter: enabled sets recomputed exhaustively."""

    def __init__(self, model):
        # takes the raw StatechartModel, not the validated handle
        self.model = model
        self.active = None
        self.env = {}
        self.trace = []
        self.faulted = False
        self.finalized = False

    def _enabled(self, event):
        """Every enabled (source, target, decl_index) for the active state."""
        found = []
        for state in self.model.states:
            if state.name != self.active:
                continue
            for index, tr in enumerate(state.transitions):
                if tr.trigger != event:
                    continue
                if tr.guard is None or naive_eval(tr.guard, dict(self.env)):
                    found.append((state.name, tr.target, index))
        return found

    def _rtc(self, stimulus, event=None):
        taken = []
        while self.active != FINAL:
            if len(taken) >= LIMIT:
                self.faulted = True
                self.trace.append((stimulus, tuple(taken), self.active))
                return
            enabled = self._enabled(event)
            if not enabled:
                if event is not None:
                    event = None
                    continue
                break
            # priority totality: smallest decl_index among all enabled
            choice = min(enabled, key=lambda item: item[2])
            taken.append(choice)
            self.active = choice[1]
            event = None
        if self.active == FINAL:
            self.finalized = True
        self.trace.append((stimulus, tuple(taken), self.active))

    def enter(self):
        self.env = {v.name: v.default for v in self.model.variables}
        self.active = self.model.initial_target
        self._rtc(("ENTER",))

    def set_variable(self, name, value):
        assert not self.finalized and not self.faulted
        self.env[name] = value
        self._rtc(("SET_VAR", name, value))

    def raise_event(self, event):
        assert not self.finalized and not self.faulted
        self._rtc(("RAISE", event), event=event)
