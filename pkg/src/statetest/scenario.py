"""Scenario binding and execution: the executable oracle for generated tests.

A Scenario is the expectations/variables/inputs triple. Running it replays
each input as a variable assignment and compares the resulting active state
against the matching expectation ("destiny state"). Failures do not abort
the run; the verdict records the first divergence.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

from .model import FINAL, Diagnostic, ValidatedModel, Value, value_type
from .simulator import Session, SimulatorError


@dataclass(frozen=True)
class Scenario:
    machine: str
    expectations: tuple  # of state name or FINAL
    variables: tuple  # of variable name
    inputs: tuple  # of Value

    def __post_init__(self):
        if not (len(self.expectations) == len(self.variables) == len(self.inputs)):
            raise ValueError("expectations, variables and inputs must have equal length")

    def __len__(self) -> int:
        return len(self.inputs)


class BindError(Exception):
    def __init__(self, diagnostics: List[Diagnostic]):
        self.diagnostics = list(diagnostics)
        summary = "; ".join(f"{d.code}: {d.message}" for d in self.diagnostics)
        super().__init__(summary or "scenario does not bind")


@dataclass(frozen=True)
class BoundScenario:
    scenario: Scenario
    vm: ValidatedModel


def bind(scenario: Scenario, vm: ValidatedModel) -> BoundScenario:
    """Resolve every scenario name against the model; raises BindError."""
    diags: List[Diagnostic] = []
    if scenario.machine != vm.name:
        diags.append(
            Diagnostic(
                "E_MACHINE_MISMATCH",
                f"scenario targets machine '{scenario.machine}', model is '{vm.name}'",
            )
        )
    for expected in scenario.expectations:
        if not vm.is_state(expected):
            diags.append(
                Diagnostic("E_UNKNOWN_STATE", f"unknown expected state '{expected}'")
            )
    for name, value in zip(scenario.variables, scenario.inputs):
        vtype = vm.var_types.get(name)
        if vtype is None:
            diags.append(Diagnostic("E_UNKNOWN_VAR", f"unknown variable '{name}'"))
        elif value_type(value) is not vtype:
            diags.append(
                Diagnostic(
                    "E_TYPE",
                    f"input {value!r} does not match '{name}: {vtype.value}'",
                )
            )
    if diags:
        raise BindError(diags)
    return BoundScenario(scenario, vm)


@dataclass(frozen=True)
class StepResult:
    index: int
    variable: str
    input: Value
    expected: str
    observed: str
    passed: bool


@dataclass(frozen=True)
class ScenarioReport:
    machine: str
    initial_expected: str
    initial_observed: str
    initial_passed: bool
    steps: Tuple[StepResult, ...]
    verdict: str  # "PASS" | "FAIL" | "ERROR"
    first_failing_index: Optional[int] = None  # -1 marks the initial check
    error: Optional[Diagnostic] = None

    @property
    def passed(self) -> bool:
        return self.verdict == "PASS"

    def observed_sequence(self) -> List[str]:
        return [self.initial_observed] + [s.observed for s in self.steps]

    def to_dict(self) -> dict:
        return {
            "machine": self.machine,
            "initial": {
                "expected": self.initial_expected,
                "observed": self.initial_observed,
                "pass": self.initial_passed,
            },
            "steps": [
                {
                    "index": s.index,
                    "variable": s.variable,
                    "input": s.input,
                    "expected": s.expected,
                    "observed": s.observed,
                    "pass": s.passed,
                }
                for s in self.steps
            ],
            "verdict": self.verdict,
            "first_failing_index": self.first_failing_index,
            "error": self.error.to_dict() if self.error else None,
        }


def run_scenario(bound: BoundScenario) -> ScenarioReport:
    """Execute the scenario on a fresh session and report every step."""
    scenario, vm = bound.scenario, bound.vm
    session = Session(vm)
    error: Optional[Diagnostic] = None
    steps: List[StepResult] = []

    try:
        session.enter()
    except SimulatorError as exc:
        error = Diagnostic(exc.code, str(exc))
    initial_observed = session.active if session.active is not None else "<none>"
    initial_passed = error is None and initial_observed == vm.initial_target

    if error is None:
        for i in range(len(scenario)):
            name, value, expected = (
                scenario.variables[i],
                scenario.inputs[i],
                scenario.expectations[i],
            )
            try:
                session.set_variable(name, value)
            except SimulatorError as exc:
                if exc.code == "E_NOT_RUNNING":
                    # finalized or faulted earlier than expected: the state
                    # simply no longer changes, keep filling the report
                    pass
                else:
                    error = Diagnostic(exc.code, str(exc))
                    observed = session.active
                    steps.append(
                        StepResult(i, name, value, expected, observed, False)
                    )
                    break
            observed = session.active
            steps.append(
                StepResult(i, name, value, expected, observed, observed == expected)
            )

    # pad the report so |steps| always equals the scenario length
    while len(steps) < len(scenario):
        i = len(steps)
        steps.append(
            StepResult(
                i,
                scenario.variables[i],
                scenario.inputs[i],
                scenario.expectations[i],
                session.active,
                False,
            )
        )

    if error is not None:
        verdict, first_fail = "ERROR", None
    elif not initial_passed:
        verdict, first_fail = "FAIL", -1
    else:
        first_fail = next((s.index for s in steps if not s.passed), None)
        verdict = "PASS" if first_fail is None else "FAIL"

    return ScenarioReport(
        machine=scenario.machine,
        initial_expected=vm.initial_target,
        initial_observed=initial_observed,
        initial_passed=initial_passed,
        steps=tuple(steps),
        verdict=verdict,
        first_failing_index=first_fail,
        error=error,
    )


def performed_sequence(bound: BoundScenario) -> List[tuple]:
    """Abstract stimulus/check sequence run_scenario executes for ``bound``.

    Used to check structural agreement with generated test code:
    ("init",), ("enter",), ("assert", state), ("set", var, value), ...
    """
    scenario, vm = bound.scenario, bound.vm
    seq: List[tuple] = [("init",), ("enter",), ("assert", vm.initial_target)]
    for i in range(len(scenario)):
        seq.append(("set", scenario.variables[i], scenario.inputs[i]))
        seq.append(("assert", scenario.expectations[i]))
    return seq


def render_report(report: ScenarioReport) -> str:
    """Human-readable report text."""
    lines = [f"scenario for machine {report.machine}"]
    mark = "ok" if report.initial_passed else "FAIL"
    lines.append(
        f"  initial: expected {report.initial_expected}, "
        f"observed {report.initial_observed}  [{mark}]"
    )
    for s in report.steps:
        mark = "ok" if s.passed else "FAIL"
        lines.append(
            f"  step {s.index}: set {s.variable} = {_fmt(s.input)} -> "
            f"expected {s.expected}, observed {s.observed}  [{mark}]"
        )
    if report.verdict == "ERROR":
        lines.append(f"verdict: ERROR ({report.error.code}: {report.error.message})")
    elif report.verdict == "FAIL":
        where = (
            "initial check"
            if report.first_failing_index == -1
            else f"step {report.first_failing_index}"
        )
        lines.append(f"verdict: FAIL (first failure at {where})")
    else:
        lines.append("verdict: PASS")
    return "\n".join(lines) + "\n"


def _fmt(v: Value) -> str:
    if type(v) is bool:
        return "true" if v else "false"
    return str(v)
