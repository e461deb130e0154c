"""Differential tests that compile and run the generated C.

Skipped when no C compiler is available (set STATETEST_CC to override the
default 'gcc'); the toolkit itself never requires a toolchain.
"""
import json
import os
import random
import shutil
import subprocess
from pathlib import Path

import pytest

from statetest import frontend, validate
from statetest.codegen import NamingScheme, generate_machine, generate_test
from statetest.doubles import DoubleSpec, generate_shims
from statetest.model import FINAL
from statetest.scenario import Scenario, bind
from statetest.simulator import Session, SimulatorError, Status

from conftest import SM_SOURCE, SM_SCENARIO
from modelgen import random_model, random_stimulus_sequence

CC = os.environ.get("STATETEST_CC", "gcc")

pytestmark = pytest.mark.skipif(
    shutil.which(CC) is None, reason=f"C compiler '{CC}' not available"
)

CFLAGS = ["-std=c99", "-Wall", "-Wextra", "-Werror"]


def write_artifacts(artifacts, root: Path):
    for a in artifacts:
        target = root / a.path
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(a.content)


def compile_and_run(sources, workdir: Path, extra=()):
    exe = workdir / "prog"
    cmd = [CC, *CFLAGS, "-I", str(workdir), *extra, "-o", str(exe)]
    cmd += [str(s) for s in sources]
    build = subprocess.run(cmd, capture_output=True, text=True)
    assert build.returncode == 0, build.stderr
    return subprocess.run([str(exe)], capture_output=True, text=True)


@pytest.fixture
def sm_build(tmp_path, sm_vm):
    write_artifacts(generate_machine(sm_vm), tmp_path)
    return tmp_path


def test_minimal_test_compiles_and_passes(tmp_path, sm_vm, sm_scenario, sm_build):
    bound = bind(sm_scenario, sm_vm)
    write_artifacts([generate_test(sm_vm, bound, flavor="MINIMAL")], tmp_path)
    res = compile_and_run(
        [tmp_path / "src-gen" / "Sm.c", tmp_path / "tests" / "test_sm.c"], tmp_path
    )
    assert res.returncode == 0, res.stdout
    assert "4 checks, 0 failures" in res.stdout


def test_tampered_expectation_exits_nonzero(tmp_path, sm_vm, sm_build):
    tampered = Scenario(
        "Sm",
        ("State2", "State1", "__final__"),
        SM_SCENARIO.variables,
        SM_SCENARIO.inputs,
    )
    bound = bind(tampered, sm_vm)
    write_artifacts([generate_test(sm_vm, bound, flavor="MINIMAL")], tmp_path)
    res = compile_and_run(
        [tmp_path / "src-gen" / "Sm.c", tmp_path / "tests" / "test_sm.c"], tmp_path
    )
    assert res.returncode == 1
    assert "FAIL" in res.stdout


def driver_source(vm, stimuli) -> str:
    """C driver applying a fixed stimulus list, printing active after each."""
    names = NamingScheme(vm.name)
    lines = [
        "#include <stdio.h>",
        '#include "src-gen/sc_types.h"',
        f'#include "src-gen/{names.type_name}.h"',
        "",
        "int main(void) {",
        f"    {names.type_name} handle;",
        f"    {names.init}(&handle);",
        f"    {names.enter}(&handle);",
        '    printf("%d\\n", (int) handle.active);',
    ]
    for stimulus in stimuli:
        if stimulus[0] == "SET_VAR":
            value = (
                ("sc_true" if stimulus[2] else "sc_false")
                if type(stimulus[2]) is bool
                else str(stimulus[2])
            )
            lines.append(f"    {names.setter(stimulus[1])}(&handle, {value});")
        else:
            lines.append(f"    {names.raiser(stimulus[1])}(&handle);")
        lines.append('    printf("%d\\n", (int) handle.active);')
    lines += ["    return 0;", "}"]
    return "\n".join(lines) + "\n"


def state_index(vm, designator) -> int:
    order = [s.name for s in vm.model.states] + [FINAL]
    return order.index(designator)


def test_generated_machines_agree_with_simulator(tmp_path):
    rng = random.Random(20260823)
    checked = 0
    while checked < 50:
        model = random_model(rng, name=f"G{checked}")
        vm = validate(model)
        stimuli = random_stimulus_sequence(rng, model, max_len=4)

        # simulator replay; skip faulting runs (the C machine has no fault
        # signal, it just stops at the compiled-in limit)
        sim = Session(vm)
        expected = []
        try:
            sim.enter()
            expected.append(sim.active)
            applied = []
            for stimulus in stimuli:
                if sim.status is not Status.RUNNING:
                    break
                if stimulus[0] == "SET_VAR":
                    sim.set_variable(stimulus[1], stimulus[2])
                else:
                    sim.raise_event(stimulus[1])
                applied.append(stimulus)
                expected.append(sim.active)
        except SimulatorError as exc:
            assert exc.code == "E_MICROSTEP_LIMIT"
            continue

        workdir = tmp_path / f"m{checked}"
        workdir.mkdir()
        write_artifacts(generate_machine(vm), workdir)
        driver = workdir / "driver.c"
        driver.write_text(driver_source(vm, applied))
        res = compile_and_run(
            [workdir / "src-gen" / f"{vm.name}.c", driver], workdir
        )
        observed = [int(x) for x in res.stdout.split()]
        assert observed == [state_index(vm, d) for d in expected], vm.model
        checked += 1


MALLOC_FAULT_TEST = """\
#include <assert.h>
#include <stdlib.h>
#include "doubles/clover_doubles.h"

static void *allocate(unsigned long size) {
    return malloc(size);
}

int main(void) {
    void *pt;

    pt = allocate(10);
    assert(pt != NULL);
    free(pt);
    clover_set_status(CLOVER_FN_malloc, 1);
    pt = allocate(10);
    assert(pt == NULL);
    /* checks deactivation */
    pt = allocate(10);
    assert(pt != NULL);
    free(pt);
    /* always activated */
    clover_set_status(CLOVER_FN_malloc, -1);
    pt = allocate(10);
    assert(pt == NULL);
    clover_set_status(CLOVER_FN_malloc, 0);
    pt = allocate(10);
    assert(pt != NULL);
    free(pt);
    return 0;
}
"""


def test_malloc_wrap_reproduces_fault_injection(tmp_path):
    spec = DoubleSpec("malloc", "void *malloc(unsigned long size)", "return NULL;")
    write_artifacts(generate_shims([spec]), tmp_path)
    test_c = tmp_path / "test_malloc_fault.c"
    test_c.write_text(MALLOC_FAULT_TEST)
    res = compile_and_run(
        [tmp_path / "doubles" / "clover_doubles.c", test_c],
        tmp_path,
        extra=["-I", str(tmp_path / "doubles"), "-Wl,--wrap=malloc"],
    )
    assert res.returncode == 0, res.stderr
