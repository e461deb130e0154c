"""Deterministic statechart execution with run-to-completion stepping.

Semantics:
  * a stimulus (enter / set-variable / raise-event) triggers one
    run-to-completion (RTC) pass;
  * each micro-step takes the first enabled transition of the active state
    in declaration order;
  * for a raised event, only transitions triggered by that event are
    candidates in the first micro-step; the event is consumed afterwards and
    the pass continues over eventless transitions;
  * the pass ends when no transition is enabled, FINAL is reached, or the
    micro-step limit is exceeded (the session then faults).
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

from .model import FINAL, ValidatedModel, Value, eval_guard, value_type

DEFAULT_MICROSTEP_LIMIT = 1000


class Status(Enum):
    READY = "READY"
    RUNNING = "RUNNING"
    FINALIZED = "FINALIZED"
    FAULTED = "FAULTED"


class SimulatorError(Exception):
    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(message)


@dataclass(frozen=True)
class TraceEntry:
    stimulus: tuple  # ("ENTER",) | ("SET_VAR", name, value) | ("RAISE", event)
    taken: tuple  # of (source, target, decl_index)
    resulting_active: str  # state name or FINAL


class Session:
    """Live simulation state for one validated model.

    Mutated by one logical thread at a time; may be handed between threads
    but not shared mutably.
    """

    def __init__(self, vm: ValidatedModel, microstep_limit: int = DEFAULT_MICROSTEP_LIMIT):
        if microstep_limit < 1:
            raise ValueError("microstep_limit must be positive")
        self.vm = vm
        self.microstep_limit = microstep_limit
        self.active: Optional[str] = None
        self.env: dict = {}
        self.trace: List[TraceEntry] = []
        self.status = Status.READY
        self.fault_reason: Optional[str] = None

    # -- stimuli

    def enter(self) -> "Session":
        if self.status is not Status.READY:
            raise SimulatorError("E_ALREADY_ENTERED", "session was already entered")
        self.env = dict(self.vm.defaults)
        self.active = self.vm.initial_target
        self.status = Status.RUNNING
        self._rtc(("ENTER",))
        return self

    def set_variable(self, name: str, v: Value) -> "Session":
        self._require_running()
        vtype = self.vm.var_types.get(name)
        if vtype is None:
            raise SimulatorError("E_UNKNOWN_VAR", f"unknown variable '{name}'")
        if value_type(v) is not vtype:
            raise SimulatorError(
                "E_TYPE", f"variable '{name}' is {vtype.value}, got {v!r}"
            )
        self.env[name] = v
        self._rtc(("SET_VAR", name, v))
        return self

    def raise_event(self, event: str) -> "Session":
        self._require_running()
        if event not in self.vm.event_set:
            raise SimulatorError("E_UNKNOWN_EVENT", f"unknown event '{event}'")
        self._rtc(("RAISE", event), event=event)
        return self

    def reset(self) -> "Session":
        self.active = None
        self.env = {}
        self.trace = []
        self.status = Status.READY
        self.fault_reason = None
        return self.enter()

    # -- observation

    def is_active(self, designator: str) -> bool:
        if self.status is Status.READY:
            raise SimulatorError("E_NOT_RUNNING", "session not entered")
        if not self.vm.is_state(designator):
            raise SimulatorError("E_UNKNOWN_STATE", f"unknown state '{designator}'")
        return self.active == designator

    # -- internals

    def _require_running(self) -> None:
        if self.status is not Status.RUNNING:
            raise SimulatorError(
                "E_NOT_RUNNING", f"session is {self.status.value}, not RUNNING"
            )

    def _first_enabled(self, event: Optional[str]) -> Optional[Tuple[int, str]]:
        """(decl_index, target) of the first enabled transition, or None.

        With ``event`` set, only transitions triggered by that event are
        candidates; otherwise only eventless ones.
        """
        state = self.vm.states_by_name[self.active]
        for index, tr in enumerate(state.transitions):
            if tr.trigger != event:
                continue
            if tr.guard is None or eval_guard(tr.guard, self.env):
                return index, tr.target
        return None

    def _rtc(self, stimulus: tuple, event: Optional[str] = None) -> None:
        taken: List[Tuple[str, str, int]] = []
        current_event = event
        while self.active != FINAL:
            if len(taken) >= self.microstep_limit:
                self.status = Status.FAULTED
                self.fault_reason = "E_MICROSTEP_LIMIT"
                self.trace.append(TraceEntry(stimulus, tuple(taken), self.active))
                raise SimulatorError(
                    "E_MICROSTEP_LIMIT",
                    f"run-to-completion exceeded {self.microstep_limit} micro-steps",
                )
            hit = self._first_enabled(current_event)
            if hit is None:
                if current_event is not None:
                    # no consumer: the event is discarded, eventless pass follows
                    current_event = None
                    continue
                break
            index, target = hit
            taken.append((self.active, target, index))
            self.active = target
            current_event = None  # consumed after the first micro-step
        if self.active == FINAL:
            self.status = Status.FINALIZED
        self.trace.append(TraceEntry(stimulus, tuple(taken), self.active))
