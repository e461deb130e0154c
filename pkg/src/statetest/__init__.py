"""statetest: statechart-driven TDD toolkit for embedded C.

Model a flat finite state machine in a textual DSL, simulate it, validate
test scenarios against the simulator, and generate C artifacts: the machine
implementation, a test file, and fault-injection double shims.
"""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    FINAL,
    Diagnostic,
    Span,
    StatechartModel,
    ValidatedModel,
    ValidationError,
    VType,
    diagnose,
    eval_guard,
    validate,
)
from .frontend import (  # noqa: F401
    ParseError,
    SourceText,
    parse_scenario,
    parse_statechart,
    serialize_scenario,
    serialize_statechart,
)
from .simulator import Session, SimulatorError, Status, TraceEntry  # noqa: F401
from .scenario import (  # noqa: F401
    BindError,
    BoundScenario,
    Scenario,
    ScenarioReport,
    bind,
    run_scenario,
)
from .codegen import (  # noqa: F401
    CodegenError,
    GeneratedArtifact,
    NamingScheme,
    extract_test_sequence,
    generate_machine,
    generate_test,
)
from .doubles import (  # noqa: F401
    ActivationState,
    DoubleError,
    DoubleRegistry,
    DoubleSpec,
    Mode,
    generate_shims,
)
