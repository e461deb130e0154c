"""Fault-injection doubles: per-function activation semantics plus C shims.

The activation state machine decides, call by call, whether a doubled
function runs its fault body or forwards to the real implementation:

  OFF        never doubled (initial mode)
  ALWAYS     doubled until changed
  COUNT(n)   doubled for the next n calls, then OFF
  REGION(d)  doubled while the bracket depth d is > 0

The pure registry below is the reference semantics; generate_shims emits a
C registry with the same transition table, wired to link-time wrappers
(``__wrap_<fn>`` / ``__real_<fn>``, linked with ``-Wl,--wrap=<fn>``).
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

from .codegen import GeneratedArtifact


class Mode(Enum):
    OFF = "OFF"
    ALWAYS = "ALWAYS"
    COUNT = "COUNT"
    REGION = "REGION"


@dataclass(frozen=True)
class ActivationState:
    mode: Mode = Mode.OFF
    n: int = 0  # COUNT: remaining calls (>= 1); REGION: bracket depth (>= 0)


class DoubleError(Exception):
    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(message)


class DoubleRegistry:
    """Pure activation registry: one ActivationState per registered function."""

    def __init__(self, function_names=()):
        self.entries: dict = {name: ActivationState() for name in function_names}
        self.call_log: List[Tuple[str, bool]] = []

    def register(self, name: str) -> None:
        if name in self.entries:
            raise DoubleError("E_NAME_COLLISION", f"'{name}' already registered")
        self.entries[name] = ActivationState()

    def clone(self) -> "DoubleRegistry":
        copy = DoubleRegistry()
        copy.entries = dict(self.entries)
        copy.call_log = list(self.call_log)
        return copy

    def _require(self, name: str) -> ActivationState:
        state = self.entries.get(name)
        if state is None:
            raise DoubleError("E_UNKNOWN_FUNCTION", f"'{name}' is not registered")
        return state

    def set_status(self, name: str, n: int) -> None:
        """n > 0: double the next n calls; n == -1: always; n == 0: off."""
        self._require(name)
        if n > 0:
            self.entries[name] = ActivationState(Mode.COUNT, n)
        elif n == -1:
            self.entries[name] = ActivationState(Mode.ALWAYS)
        elif n == 0:
            self.entries[name] = ActivationState(Mode.OFF)
        else:
            raise DoubleError("E_BAD_COUNT", f"invalid activation count {n}")

    def consume(self, name: str) -> bool:
        """Record one call to ``name``; True when the call is doubled."""
        state = self._require(name)
        if state.mode is Mode.OFF:
            doubled = False
        elif state.mode is Mode.ALWAYS:
            doubled = True
        elif state.mode is Mode.COUNT:
            doubled = True
            if state.n > 1:
                self.entries[name] = ActivationState(Mode.COUNT, state.n - 1)
            else:
                self.entries[name] = ActivationState(Mode.OFF)
        else:  # REGION
            doubled = state.n > 0
        self.call_log.append((name, doubled))
        return doubled

    def region_enter(self, name: str) -> None:
        state = self._require(name)
        if state.mode is Mode.REGION:
            self.entries[name] = ActivationState(Mode.REGION, state.n + 1)
        else:
            # entering a region replaces COUNT/ALWAYS/OFF outright
            self.entries[name] = ActivationState(Mode.REGION, 1)

    def region_exit(self, name: str) -> None:
        state = self._require(name)
        if state.mode is not Mode.REGION or state.n < 1:
            raise DoubleError("E_REGION_UNDERFLOW", f"'{name}' has no open region")
        self.entries[name] = ActivationState(Mode.REGION, state.n - 1)


def parse_doubles_spec(content: str) -> List["DoubleSpec"]:
    """Parse a ``.doubles.json`` file: a list of {name, signature, body}."""
    import json

    try:
        data = json.loads(content)
    except json.JSONDecodeError as exc:
        raise DoubleError("E_SIGNATURE", f"invalid JSON: {exc.msg}")
    if not isinstance(data, list):
        raise DoubleError("E_SIGNATURE", "doubles spec must be a JSON list")
    specs = []
    for i, item in enumerate(data):
        if not isinstance(item, dict) or set(item) != {"name", "signature", "body"}:
            raise DoubleError(
                "E_SIGNATURE",
                f"entry {i} must be an object with keys name/signature/body",
            )
        if not all(isinstance(item[k], str) for k in ("name", "signature", "body")):
            raise DoubleError("E_SIGNATURE", f"entry {i} fields must be strings")
        specs.append(DoubleSpec(item["name"], item["signature"], item["body"]))
    return specs


# --------------------------------------------------------------------------
# C shim generation

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_C_TYPE_WORDS = frozenset(
    """void char short int long float double signed unsigned const volatile
    struct union enum bool _Bool size_t ssize_t int8_t int16_t int32_t int64_t
    uint8_t uint16_t uint32_t uint64_t intptr_t uintptr_t ptrdiff_t FILE""".split()
)


@dataclass(frozen=True)
class DoubleSpec:
    name: str  # real function name, e.g. "malloc"
    signature: str  # full C prototype text, e.g. "void *malloc(size_t size)"
    body: str  # double body, e.g. "return NULL;"


@dataclass(frozen=True)
class _ParsedSignature:
    return_and_name: str  # text before the parameter list
    params: str  # raw parameter list text
    arg_names: Tuple[str, ...]
    is_void_return: bool


def _parse_signature(spec: DoubleSpec) -> _ParsedSignature:
    sig = spec.signature.strip().rstrip(";")
    open_paren = sig.find("(")
    if open_paren < 0 or not sig.endswith(")"):
        raise DoubleError(
            "E_SIGNATURE", f"'{spec.name}': signature has no parameter list"
        )
    head = sig[:open_paren].strip()
    params = sig[open_paren + 1 : -1].strip()
    head_idents = _IDENT.findall(head)
    if not head_idents or head_idents[-1] != spec.name:
        raise DoubleError(
            "E_SIGNATURE",
            f"'{spec.name}': signature must declare that function, got '{head}'",
        )
    if len(head_idents) < 2 and "*" not in head:
        raise DoubleError("E_SIGNATURE", f"'{spec.name}': missing return type")

    arg_names: List[str] = []
    if params not in ("", "void"):
        for param in params.split(","):
            idents = [
                t for t in _IDENT.findall(param) if t not in _C_TYPE_WORDS
            ]
            if not idents:
                raise DoubleError(
                    "E_SIGNATURE",
                    f"'{spec.name}': parameter '{param.strip()}' has no name",
                )
            arg_names.append(idents[-1])
    ret = head[: head.rfind(spec.name)].strip()
    return _ParsedSignature(
        return_and_name=head,
        params=params,
        arg_names=tuple(arg_names),
        is_void_return=ret == "void",
    )


def _replace_name(parsed: _ParsedSignature, name: str, new_name: str) -> str:
    head = parsed.return_and_name
    pos = head.rfind(name)
    return head[:pos] + new_name + head[pos + len(name) :]


def generate_shims(
    specs: List[DoubleSpec], bundle: str = "clover"
) -> List[GeneratedArtifact]:
    """Emit doubles/<bundle>_doubles.h and .c for the given function specs.

    Each spec yields one ``__wrap_<fn>`` wrapper that consults the registry:
    doubled calls run the spec body, the rest forward to ``__real_<fn>``.
    """
    if not _IDENT.fullmatch(bundle):
        raise DoubleError("E_SIGNATURE", f"invalid bundle name '{bundle}'")
    seen = set()
    for spec in specs:
        if not _IDENT.fullmatch(spec.name):
            raise DoubleError("E_SIGNATURE", f"invalid function name '{spec.name}'")
        if spec.name in seen:
            raise DoubleError("E_NAME_COLLISION", f"duplicate double for '{spec.name}'")
        seen.add(spec.name)
    parsed = [(spec, _parse_signature(spec)) for spec in specs]

    header = _shim_header(specs, bundle)
    source = _shim_source(parsed, bundle)
    return [
        GeneratedArtifact(f"doubles/{bundle}_doubles.h", header, "DOUBLES_HEADER"),
        GeneratedArtifact(f"doubles/{bundle}_doubles.c", source, "DOUBLES_SOURCE"),
    ]


def _shim_header(specs: List[DoubleSpec], bundle: str) -> str:
    guard = f"{bundle.upper()}_DOUBLES_H_"
    out: List[str] = []
    out.append(f"#ifndef {guard}")
    out.append(f"#define {guard}")
    out.append("")
    out.append("/* Doubled-function ids. */")
    out.append("typedef enum {")
    for spec in specs:
        out.append(f"    CLOVER_FN_{spec.name},")
    out.append("    CLOVER_FN_COUNT_")
    out.append("} clover_fn;")
    out.append("")
    out.append("/* n > 0: double the next n calls; n == -1: always; n == 0: off. */")
    out.append("void clover_set_status(clover_fn fn, int n);")
    out.append("")
    out.append("/* Bracket a code region in which fn is doubled. */")
    out.append("void clover_region_enter(clover_fn fn);")
    out.append("void clover_region_exit(clover_fn fn);")
    out.append("")
    out.append("/* Decide (and log) whether the current call is doubled. */")
    out.append("int clover_consume(clover_fn fn);")
    out.append("")
    out.append("/* Calls observed per function since start. */")
    out.append("int clover_call_count(clover_fn fn);")
    out.append("")
    out.append(f"#endif /* {guard} */")
    return "\n".join(out) + "\n"


_REGISTRY_CORE = """\
enum { MODE_OFF, MODE_ALWAYS, MODE_COUNT, MODE_REGION };

typedef struct {
    int mode;
    int n;
    int calls;
} clover_state;

static clover_state clover_states[CLOVER_FN_COUNT_];

void clover_set_status(clover_fn fn, int n) {
    if (n > 0) {
        clover_states[fn].mode = MODE_COUNT;
        clover_states[fn].n = n;
    } else if (n == -1) {
        clover_states[fn].mode = MODE_ALWAYS;
        clover_states[fn].n = 0;
    } else {
        clover_states[fn].mode = MODE_OFF;
        clover_states[fn].n = 0;
    }
}

void clover_region_enter(clover_fn fn) {
    if (clover_states[fn].mode == MODE_REGION) {
        ++clover_states[fn].n;
    } else {
        clover_states[fn].mode = MODE_REGION;
        clover_states[fn].n = 1;
    }
}

void clover_region_exit(clover_fn fn) {
    if (clover_states[fn].mode == MODE_REGION && clover_states[fn].n > 0) {
        --clover_states[fn].n;
    }
}

int clover_consume(clover_fn fn) {
    clover_state* s = &clover_states[fn];
    int doubled = 0;
    switch (s->mode) {
    case MODE_ALWAYS:
        doubled = 1;
        break;
    case MODE_COUNT:
        doubled = 1;
        if (s->n > 1) {
            --s->n;
        } else {
            s->mode = MODE_OFF;
            s->n = 0;
        }
        break;
    case MODE_REGION:
        doubled = s->n > 0;
        break;
    default:
        break;
    }
    ++s->calls;
    return doubled;
}

int clover_call_count(clover_fn fn) {
    return clover_states[fn].calls;
}
"""


def _shim_source(parsed, bundle: str) -> str:
    out: List[str] = []
    out.append(f'#include "{bundle}_doubles.h"')
    out.append("#include <stddef.h>")
    out.append("#include <stdint.h>")
    out.append("")
    out.append(_REGISTRY_CORE)
    for spec, sig in parsed:
        out.append("")
        real_decl = _replace_name(sig, spec.name, f"__real_{spec.name}")
        wrap_decl = _replace_name(sig, spec.name, f"__wrap_{spec.name}")
        out.append(f"{real_decl}({sig.params});")
        out.append("")
        out.append(f"{wrap_decl}({sig.params}) {{")
        out.append(f"    if (clover_consume(CLOVER_FN_{spec.name})) {{")
        for line in spec.body.splitlines() or [""]:
            out.append(f"        {line}".rstrip())
        if sig.is_void_return and "return" not in spec.body:
            out.append("        return;")
        out.append("    }")
        call_args = ", ".join(sig.arg_names)
        if sig.is_void_return:
            out.append(f"    __real_{spec.name}({call_args});")
        else:
            out.append(f"    return __real_{spec.name}({call_args});")
        out.append("}")
    return "\n".join(out) + "\n"
