"""C code generation: the state machine sources and the generated test file.

All artifacts are deterministic functions of (model, scenario, options);
LF line endings, trailing newline, no environment leakage. The generated
machine is freestanding C99 with no dynamic allocation and no I/O.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import List, Optional

from .model import (
    FINAL,
    Compare,
    BoolLit,
    Expr,
    IntLit,
    Logic,
    Not,
    StatechartModel,
    ValidatedModel,
    Value,
    VarRef,
    VType,
)
from .scenario import BoundScenario
from .simulator import DEFAULT_MICROSTEP_LIMIT

INT32_MIN = -(2**31)
INT32_MAX = 2**31 - 1

_C_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")

_C_KEYWORDS = frozenset(
    """auto break case char const continue default do double else enum extern
    float for goto if inline int long register restrict return short signed
    sizeof static struct switch typedef union unsigned void volatile while
    _Bool bool true false""".split()
)


class CodegenError(Exception):
    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(message)


@dataclass(frozen=True)
class GeneratedArtifact:
    path: str  # relative, forward slashes
    content: str
    kind: str  # SM_HEADER | SM_SOURCE | TEST_SOURCE | DOUBLES_HEADER | DOUBLES_SOURCE


class NamingScheme:
    """Derived C identifiers for one machine, in the conventional generated-statechart shape
    ``sm_init`` / ``smIfaceSm_set_value1`` / ``sm_main_region_State1``."""

    def __init__(self, machine_name: str):
        if not _C_IDENT.match(machine_name) or machine_name in _C_KEYWORDS:
            raise CodegenError(
                "E_IDENTIFIER",
                f"machine name '{machine_name}' is not usable as a C identifier",
            )
        self.prefix = machine_name.lower()
        self.type_name = machine_name[0].upper() + machine_name[1:]
        self.states_enum = f"{self.type_name}States"
        self.init = f"{self.prefix}_init"
        self.enter = f"{self.prefix}_enter"
        self.is_active = f"{self.prefix}_isActive"
        self.final_const = f"{self.prefix}_main_region__final_"

    def state_const(self, state: str) -> str:
        if state == FINAL:
            return self.final_const
        return f"{self.prefix}_main_region_{state}"

    def setter(self, var: str) -> str:
        return f"{self.prefix}Iface{self.type_name}_set_{var}"

    def raiser(self, event: str) -> str:
        return f"{self.prefix}Iface{self.type_name}_raise_{event}"


def _check_collisions(vm: ValidatedModel, names: NamingScheme) -> None:
    seen: dict = {}
    derived = [
        (names.type_name, "machine type"),
        (names.states_enum, "states enum"),
        (names.init, "init function"),
        (names.enter, "enter function"),
        (names.is_active, "isActive function"),
        (names.final_const, "final constant"),
    ]
    for s in vm.model.states:
        derived.append((names.state_const(s.name), f"state '{s.name}'"))
    for v in vm.model.variables:
        derived.append((names.setter(v.name), f"variable '{v.name}'"))
    for e in vm.model.events:
        derived.append((names.raiser(e.name), f"event '{e.name}'"))
    for ident, origin in derived:
        if not _C_IDENT.match(ident) or ident in _C_KEYWORDS:
            raise CodegenError(
                "E_IDENTIFIER", f"{origin} maps to invalid C identifier '{ident}'"
            )
        if ident in seen:
            raise CodegenError(
                "E_NAME_COLLISION",
                f"{origin} and {seen[ident]} both map to '{ident}'",
            )
        seen[ident] = origin


def _check_int_range(vm: ValidatedModel) -> None:
    def walk(expr: Expr) -> None:
        if isinstance(expr, IntLit):
            if not INT32_MIN <= expr.value <= INT32_MAX:
                raise CodegenError(
                    "E_RANGE", f"literal {expr.value} does not fit int32_t"
                )
        elif isinstance(expr, (Compare, Logic)):
            walk(expr.lhs)
            walk(expr.rhs)
        elif isinstance(expr, Not):
            walk(expr.operand)

    for v in vm.model.variables:
        if v.vtype is VType.INT and not INT32_MIN <= v.default <= INT32_MAX:
            raise CodegenError(
                "E_RANGE", f"default of '{v.name}' does not fit int32_t"
            )
    for s in vm.model.states:
        for t in s.transitions:
            if t.guard is not None:
                walk(t.guard)


def _c_type(vtype: VType) -> str:
    return "sc_int32" if vtype is VType.INT else "sc_bool"


def _c_value(v: Value) -> str:
    if type(v) is bool:
        return "sc_true" if v else "sc_false"
    return str(v)


def _c_expr(expr: Expr, handle: str = "handle") -> str:
    if isinstance(expr, IntLit):
        return str(expr.value)
    if isinstance(expr, BoolLit):
        return "sc_true" if expr.value else "sc_false"
    if isinstance(expr, VarRef):
        return f"{handle}->{expr.name}"
    if isinstance(expr, Compare):
        return f"({_c_expr(expr.lhs, handle)} {expr.op} {_c_expr(expr.rhs, handle)})"
    if isinstance(expr, Logic):
        return f"({_c_expr(expr.lhs, handle)} {expr.op} {_c_expr(expr.rhs, handle)})"
    if isinstance(expr, Not):
        return f"(!{_c_expr(expr.operand, handle)})"
    raise TypeError(f"not an expression node: {expr!r}")


SC_TYPES_H = """\
#ifndef SC_TYPES_H_
#define SC_TYPES_H_

#include <stdint.h>
#include <stdbool.h>

typedef int32_t sc_int32;
typedef bool sc_bool;

#define sc_true true
#define sc_false false

#endif /* SC_TYPES_H_ */
"""


def generate_machine(
    vm: ValidatedModel, microstep_limit: int = DEFAULT_MICROSTEP_LIMIT
) -> List[GeneratedArtifact]:
    """Emit src-gen/<P>.h, src-gen/<P>.c and the sc_types.h shim."""
    names = NamingScheme(vm.name)
    _check_collisions(vm, names)
    _check_int_range(vm)
    model = vm.model
    return [
        GeneratedArtifact(f"src-gen/{names.type_name}.h", _machine_header(model, names), "SM_HEADER"),
        GeneratedArtifact(
            f"src-gen/{names.type_name}.c",
            _machine_source(model, names, microstep_limit),
            "SM_SOURCE",
        ),
        GeneratedArtifact("src-gen/sc_types.h", SC_TYPES_H, "SM_HEADER"),
    ]


def _machine_header(model: StatechartModel, names: NamingScheme) -> str:
    guard = f"{names.type_name.upper()}_H_"
    out: List[str] = []
    out.append(f"#ifndef {guard}")
    out.append(f"#define {guard}")
    out.append("")
    out.append('#include "sc_types.h"')
    out.append("")
    out.append("typedef enum {")
    consts = [names.state_const(s.name) for s in model.states] + [names.final_const]
    for i, const in enumerate(consts):
        comma = "," if i + 1 < len(consts) else ""
        out.append(f"    {const}{comma}")
    out.append(f"}} {names.states_enum};")
    out.append("")
    out.append(f"typedef struct {{")
    out.append(f"    {names.states_enum} active;")
    for v in model.variables:
        out.append(f"    {_c_type(v.vtype)} {v.name};")
    out.append(f"}} {names.type_name};")
    out.append("")
    handle = f"{names.type_name}* handle"
    out.append(f"void {names.init}({handle});")
    out.append(f"void {names.enter}({handle});")
    out.append(f"sc_bool {names.is_active}(const {names.type_name}* handle, {names.states_enum} state);")
    for v in model.variables:
        out.append(f"void {names.setter(v.name)}({handle}, {_c_type(v.vtype)} value);")
    for e in model.events:
        out.append(f"void {names.raiser(e.name)}({handle});")
    out.append("")
    out.append(f"#endif /* {guard} */")
    return "\n".join(out) + "\n"


def _machine_source(
    model: StatechartModel, names: NamingScheme, microstep_limit: int
) -> str:
    p = names.prefix
    macro = f"{names.type_name.upper()}_MICROSTEP_LIMIT"
    out: List[str] = []
    out.append(f'#include "{names.type_name}.h"')
    out.append("")
    out.append(f"#define {macro} {microstep_limit}")
    out.append("")
    event_names = [e.name for e in model.events]
    out.append(f"#define {p.upper()}_EVENT_NONE (-1)")
    for i, ev in enumerate(event_names):
        out.append(f"#define {p.upper()}_EVENT_{ev} {i}")
    out.append("")
    # one micro-step: first enabled transition of the active state, in
    # declaration order; returns 1 when a transition was taken
    out.append(f"static sc_bool {p}_step({names.type_name}* handle, int event) {{")
    out.append("    (void) event;")
    out.append("    switch (handle->active) {")
    for state in model.states:
        out.append(f"    case {names.state_const(state.name)}:")
        for tr in state.transitions:
            if tr.trigger is None:
                cond = f"event == {p.upper()}_EVENT_NONE"
            else:
                cond = f"event == {p.upper()}_EVENT_{tr.trigger}"
            if tr.guard is not None:
                cond += f" && {_c_expr(tr.guard)}"
            out.append(f"        if ({cond}) {{")
            out.append(f"            handle->active = {names.state_const(tr.target)};")
            out.append("            return sc_true;")
            out.append("        }")
        out.append("        return sc_false;")
    out.append("    default:")
    out.append("        return sc_false;")
    out.append("    }")
    out.append("}")
    out.append("")
    out.append(f"static void {p}_rtc({names.type_name}* handle, int event) {{")
    out.append("    int steps = 0;")
    out.append(f"    while (steps < {macro} && handle->active != {names.final_const}) {{")
    out.append(f"        if (!{p}_step(handle, event)) {{")
    out.append(f"            if (event == {p.upper()}_EVENT_NONE) {{")
    out.append("                break;")
    out.append("            }")
    out.append(f"            event = {p.upper()}_EVENT_NONE;")
    out.append("            continue;")
    out.append("        }")
    out.append(f"        event = {p.upper()}_EVENT_NONE;")
    out.append("        ++steps;")
    out.append("    }")
    out.append("}")
    out.append("")
    out.append(f"void {names.init}({names.type_name}* handle) {{")
    out.append(f"    handle->active = {names.state_const(model.initial_target)};")
    for v in model.variables:
        out.append(f"    handle->{v.name} = {_c_value(v.default)};")
    out.append("}")
    out.append("")
    out.append(f"void {names.enter}({names.type_name}* handle) {{")
    out.append(f"    {names.init}(handle);")
    out.append(f"    {p}_rtc(handle, {p.upper()}_EVENT_NONE);")
    out.append("}")
    out.append("")
    out.append(
        f"sc_bool {names.is_active}(const {names.type_name}* handle, "
        f"{names.states_enum} state) {{"
    )
    out.append("    return handle->active == state;")
    out.append("}")
    for v in model.variables:
        out.append("")
        out.append(f"void {names.setter(v.name)}({names.type_name}* handle, {_c_type(v.vtype)} value) {{")
        out.append(f"    if (handle->active == {names.final_const}) {{")
        out.append("        return;")
        out.append("    }")
        out.append(f"    handle->{v.name} = value;")
        out.append(f"    {p}_rtc(handle, {p.upper()}_EVENT_NONE);")
        out.append("}")
    for e in model.events:
        out.append("")
        out.append(f"void {names.raiser(e.name)}({names.type_name}* handle) {{")
        out.append(f"    if (handle->active == {names.final_const}) {{")
        out.append("        return;")
        out.append("    }")
        out.append(f"    {p}_rtc(handle, {p.upper()}_EVENT_{e.name});")
        out.append("}")
    return "\n".join(out) + "\n"


# --------------------------------------------------------------------------
# Test generation


def generate_test(
    vm: ValidatedModel, bound: BoundScenario, flavor: str = "GTEST"
) -> GeneratedArtifact:
    """Emit the generated test file for one bound scenario.

    GTEST emits a gtest-style C++ file (tests/Test<P>.cpp); MINIMAL emits a
    dependency-free C file with a counting assert macro (tests/test_<p>.c).
    """
    if bound.vm is not vm and bound.vm.model != vm.model:
        raise ValueError("scenario is bound to a different model")
    names = NamingScheme(vm.name)
    _check_collisions(vm, names)
    if flavor == "GTEST":
        return GeneratedArtifact(
            f"tests/Test{names.type_name}.cpp",
            _gtest_source(vm, bound, names),
            "TEST_SOURCE",
        )
    if flavor == "MINIMAL":
        return GeneratedArtifact(
            f"tests/test_{names.prefix}.c",
            _minimal_source(vm, bound, names),
            "TEST_SOURCE",
        )
    raise ValueError(f"unknown test flavor {flavor!r}")


def _test_steps(vm: ValidatedModel, bound: BoundScenario, names: NamingScheme):
    """(call line, assert line) pairs shared by both flavors."""
    scenario = bound.scenario
    pairs = []
    for i in range(len(scenario)):
        call = (
            f"{names.setter(scenario.variables[i])}(&handle, "
            f"{_c_value(scenario.inputs[i])});"
        )
        check = f"{names.is_active}(&handle, {names.state_const(scenario.expectations[i])})"
        pairs.append((call, check))
    return pairs


def _gtest_source(vm: ValidatedModel, bound: BoundScenario, names: NamingScheme) -> str:
    t = names.type_name
    out: List[str] = []
    out.append("#include <stdio.h>")
    out.append("#include <stdlib.h>")
    out.append('#include "src-gen/sc_types.h"')
    out.append(f'#include "src-gen/{t}.h"')
    out.append('#include "testinglib/gtest/gtest.h"')
    out.append("")
    out.append("class TestStateMachine: public ::testing::Test {")
    out.append("    protected:")
    out.append(f"        {t} handle;")
    out.append("};")
    out.append("")
    out.append(f"TEST_F(TestStateMachine, test{names.prefix}) {{")
    out.append(f"    {names.init}(&handle);")
    out.append(f"    {names.enter}(&handle);")
    out.append("")
    out.append(
        f"    EXPECT_TRUE({names.is_active}(&handle, "
        f"{names.state_const(vm.initial_target)}));"
    )
    for call, check in _test_steps(vm, bound, names):
        out.append("")
        out.append(f"    {call}")
        out.append(f"    EXPECT_TRUE({check});")
    out.append("}")
    return "\n".join(out) + "\n"


def _minimal_source(vm: ValidatedModel, bound: BoundScenario, names: NamingScheme) -> str:
    t = names.type_name
    out: List[str] = []
    out.append("#include <stdio.h>")
    out.append('#include "src-gen/sc_types.h"')
    out.append(f'#include "src-gen/{t}.h"')
    out.append("")
    out.append("static int checks = 0;")
    out.append("static int failures = 0;")
    out.append("")
    out.append("#define EXPECT_TRUE(expr) \\")
    out.append("    do { \\")
    out.append("        ++checks; \\")
    out.append("        if (!(expr)) { \\")
    out.append("            ++failures; \\")
    out.append('            printf("FAIL(line %d): %s\\n", __LINE__, #expr); \\')
    out.append("        } \\")
    out.append("    } while (0)")
    out.append("")
    out.append("int main(void) {")
    out.append(f"    {t} handle;")
    out.append(f"    {names.init}(&handle);")
    out.append(f"    {names.enter}(&handle);")
    out.append("")
    out.append(
        f"    EXPECT_TRUE({names.is_active}(&handle, "
        f"{names.state_const(vm.initial_target)}));"
    )
    for call, check in _test_steps(vm, bound, names):
        out.append("")
        out.append(f"    {call}")
        out.append(f"    EXPECT_TRUE({check});")
    out.append("")
    out.append('    printf("%d checks, %d failures\\n", checks, failures);')
    out.append("    return failures == 0 ? 0 : 1;")
    out.append("}")
    return "\n".join(out) + "\n"


# --------------------------------------------------------------------------
# Structural extraction (for agreement checks against the scenario runner)

_CALL_RE = re.compile(r"^\s*(?:EXPECT_TRUE\()?([A-Za-z_][A-Za-z0-9_]*)\(")


def extract_test_sequence(vm: ValidatedModel, content: str) -> List[tuple]:
    """Recover the abstract call/assert sequence from generated test text.

    Returns the same tuple vocabulary as scenario.performed_sequence, so the
    two can be compared without compiling anything.
    """
    names = NamingScheme(vm.name)
    const_to_state = {names.state_const(s.name): s.name for s in vm.model.states}
    const_to_state[names.final_const] = FINAL
    setter_to_var = {names.setter(v.name): v.name for v in vm.model.variables}

    seq: List[tuple] = []
    for line in content.splitlines():
        m = _CALL_RE.match(line)
        if not m:
            continue
        fn = m.group(1)
        if fn == names.init:
            seq.append(("init",))
        elif fn == names.enter:
            seq.append(("enter",))
        elif fn == names.is_active and "EXPECT_TRUE" in line:
            const = line.split(",")[-1].strip().rstrip(");")
            seq.append(("assert", const_to_state[const]))
        elif fn in setter_to_var:
            arg = line.split(",", 1)[1].strip().rstrip(");")
            seq.append(("set", setter_to_var[fn], _parse_c_value(arg)))
    return seq


def _parse_c_value(text: str) -> Value:
    if text == "sc_true":
        return True
    if text == "sc_false":
        return False
    return int(text)
