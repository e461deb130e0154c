import json
import random

import pytest

from statetest import frontend, validate
from statetest.model import FINAL
from statetest.scenario import (
    BindError,
    Scenario,
    bind,
    performed_sequence,
    render_report,
    run_scenario,
)

from modelgen import random_model, random_stimulus_sequence
from oracle import BruteForceSession


def vm_of(text):
    return validate(frontend.parse_statechart(frontend.SourceText(text)))


def test_reference_scenario_binds(sm_vm, sm_scenario):
    bound = bind(sm_scenario, sm_vm)
    assert bound.scenario is sm_scenario


def test_bind_unknown_state(sm_vm, sm_scenario):
    bad = Scenario(
        sm_scenario.machine,
        ("State9",) + sm_scenario.expectations[1:],
        sm_scenario.variables,
        sm_scenario.inputs,
    )
    with pytest.raises(BindError) as err:
        bind(bad, sm_vm)
    assert any(d.code == "E_UNKNOWN_STATE" for d in err.value.diagnostics)


def test_bind_type_mismatch(sm_vm):
    bad = Scenario("Sm", ("State2",), ("value1",), (True,))
    with pytest.raises(BindError) as err:
        bind(bad, sm_vm)
    assert any(d.code == "E_TYPE" for d in err.value.diagnostics)


def test_bind_machine_mismatch(sm_vm, sm_scenario):
    bad = Scenario(
        "Other", sm_scenario.expectations, sm_scenario.variables, sm_scenario.inputs
    )
    with pytest.raises(BindError) as err:
        bind(bad, sm_vm)
    assert any(d.code == "E_MACHINE_MISMATCH" for d in err.value.diagnostics)


def test_scenario_length_invariant():
    with pytest.raises(ValueError):
        Scenario("Sm", ("A",), (), ())


def test_reference_scenario_passes(sm_vm, sm_scenario):
    report = run_scenario(bind(sm_scenario, sm_vm))
    assert report.verdict == "PASS"
    assert report.observed_sequence() == ["State1", "State2", "State3", FINAL]
    assert report.initial_passed


def test_failing_input_reports_first_index(sm_vm, sm_scenario):
    bad = Scenario(
        sm_scenario.machine,
        sm_scenario.expectations,
        sm_scenario.variables,
        (12,) + sm_scenario.inputs[1:],
    )
    report = run_scenario(bind(bad, sm_vm))
    assert report.verdict == "FAIL"
    assert report.first_failing_index == 0
    assert report.steps[0].observed == "State1"
    # the run continues past the failure: the report is complete
    assert len(report.steps) == 3


def test_empty_scenario_passes(sm_vm):
    report = run_scenario(bind(Scenario("Sm", (), (), ()), sm_vm))
    assert report.verdict == "PASS"
    assert report.steps == ()
    assert report.initial_passed


def test_report_microstep_error():
    vm = vm_of(
        "statechart M { var x: int = 0 initial -> A "
        "state A { when [x == 1] -> A } }"
    )
    report = run_scenario(bind(Scenario("M", ("A",), ("x",), (1,)), vm))
    assert report.verdict == "ERROR"
    assert report.error.code == "E_MICROSTEP_LIMIT"
    assert len(report.steps) == 1


def test_rerun_is_deterministic(sm_vm, sm_scenario):
    bound = bind(sm_scenario, sm_vm)
    assert run_scenario(bound) == run_scenario(bound)


def test_report_completeness_on_random_pairs():
    rng = random.Random(4242)
    for _ in range(50):
        model = random_model(rng)
        vm = validate(model)
        scenario = scenario_by_steering(rng, model, tamper=rng.random() < 0.5)
        if scenario is None:
            continue
        report = run_scenario(bind(scenario, vm))
        assert len(report.steps) == len(scenario)
        assert (report.verdict == "PASS") == (
            report.initial_passed and all(s.passed for s in report.steps)
        )


def scenario_by_steering(rng, model, tamper=False):
    """Build a scenario whose expectations come from the oracle interpreter,
    so it PASSes by construction unless tampered with."""
    ref = BruteForceSession(model)
    ref.enter()
    # the runner's automatic initial check expects the declared initial
    # state, so models that move during enter cannot pass by construction
    if ref.faulted or ref.active != model.initial_target or not model.variables:
        return None
    variables, inputs, expectations = [], [], []
    for stimulus in random_stimulus_sequence(rng, model, max_len=3):
        if stimulus[0] != "SET_VAR" or ref.finalized or ref.faulted:
            continue
        ref.set_variable(stimulus[1], stimulus[2])
        if ref.faulted:
            return None
        variables.append(stimulus[1])
        inputs.append(stimulus[2])
        expectations.append(ref.active)
    if tamper and expectations:
        i = rng.randrange(len(expectations))
        others = [s.name for s in model.states if s.name != expectations[i]]
        if not others:
            return None
        expectations[i] = rng.choice(others)
    return Scenario(model.name, tuple(expectations), tuple(variables), tuple(inputs))


def test_steered_scenarios_pass_and_tampered_fail():
    rng = random.Random(777)
    passed = failed = 0
    while passed < 20 or failed < 20:
        model = random_model(rng)
        tamper = rng.random() < 0.5
        scenario = scenario_by_steering(rng, model, tamper=tamper)
        if scenario is None or (tamper and not scenario.expectations):
            continue
        report = run_scenario(bind(scenario, validate(model)))
        if tamper:
            assert report.verdict == "FAIL"
            failed += 1
        else:
            assert report.verdict == "PASS"
            passed += 1


def test_performed_sequence_shape(sm_vm, sm_scenario):
    seq = performed_sequence(bind(sm_scenario, sm_vm))
    assert seq == [
        ("init",),
        ("enter",),
        ("assert", "State1"),
        ("set", "value1", 13),
        ("assert", "State2"),
        ("set", "value2", 54),
        ("assert", "State3"),
        ("set", "value3", True),
        ("assert", FINAL),
    ]


def test_report_serialization_round_trips(sm_vm, sm_scenario):
    report = run_scenario(bind(sm_scenario, sm_vm))
    data = json.loads(json.dumps(report.to_dict()))
    assert data["verdict"] == "PASS"
    assert [s["observed"] for s in data["steps"]] == ["State2", "State3", FINAL]


def test_render_report_text(sm_vm, sm_scenario):
    text = render_report(run_scenario(bind(sm_scenario, sm_vm)))
    assert "verdict: PASS" in text
    assert "initial: expected State1" in text
