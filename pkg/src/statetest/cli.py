"""statetest command line: validate, simulate, run scenarios, generate code.

Exit codes (stable contract for CI):
  0  success / scenario PASS
  1  scenario FAIL
  2  usage error (bad flags, missing files)
  3  diagnostics (parse or validation errors, scenario binding errors)
  4  runtime fault (micro-step limit, I/O errors while writing output)
"""
from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click

from . import __version__, frontend
from .model import FINAL, ValidationError, format_value, validate
from .scenario import BindError, bind, render_report, run_scenario
from .simulator import Session, SimulatorError
from .codegen import CodegenError, generate_machine, generate_test
from .doubles import DoubleError, generate_shims, parse_doubles_spec

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_DIAGNOSTICS = 3
EXIT_FAULT = 4


def _print_diagnostics(diags, origin: str, as_json: bool) -> None:
    if as_json:
        click.echo(json.dumps({"diagnostics": [d.to_dict() for d in diags]}), err=True)
        return
    for d in diags:
        click.echo(
            f"{origin}:{d.span.line}:{d.span.column}: {d.code}: {d.message}", err=True
        )


def _load_model(path: str, as_json: bool):
    text = Path(path).read_text(encoding="utf-8")
    src = frontend.SourceText(text, origin=path)
    try:
        model = frontend.parse_statechart(src)
        return validate(model)
    except (frontend.ParseError, ValidationError) as exc:
        _print_diagnostics(exc.diagnostics, path, as_json)
        sys.exit(EXIT_DIAGNOSTICS)


def _write_artifacts(artifacts, out_dir: str) -> None:
    try:
        for artifact in artifacts:
            target = Path(out_dir) / artifact.path
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(artifact.content, encoding="utf-8", newline="\n")
            click.echo(str(target))
    except OSError as exc:
        click.echo(f"error: cannot write output: {exc}", err=True)
        sys.exit(EXIT_FAULT)


@click.group()
@click.version_option(__version__, prog_name="statetest")
def main():
    """Statechart TDD toolkit: model, simulate, verify, generate C code."""


@main.command(name="validate")
@click.argument("model_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
def validate_cmd(model_file, fmt):
    """Parse and validate a statechart file."""
    _load_model(model_file, fmt == "json")
    if fmt == "json":
        click.echo(json.dumps({"diagnostics": []}))
    else:
        click.echo(f"{model_file}: ok")


def _scenario_from_options(scenario_file, expectations, variables, inputs, machine):
    if scenario_file is not None:
        text = Path(scenario_file).read_text(encoding="utf-8")
        return frontend.parse_scenario(frontend.SourceText(text, origin=scenario_file))
    if expectations is None and variables is None and inputs is None:
        raise click.UsageError(
            "provide --scenario FILE or the --expectations/--variables/--inputs trio"
        )
    return frontend.scenario_from_csv_fields(
        machine, expectations or "", variables or "", inputs or ""
    )


@main.command()
@click.argument("model_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--scenario", "scenario_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--expectations", help="comma-separated expected destiny states")
@click.option("--variables", help="comma-separated variable names")
@click.option("--inputs", help="comma-separated input values")
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
def run(model_file, scenario_file, expectations, variables, inputs, fmt):
    """Run a scenario against a model and report pass/fail per step."""
    vm = _load_model(model_file, fmt == "json")
    try:
        scenario = _scenario_from_options(
            scenario_file, expectations, variables, inputs, vm.name
        )
        bound = bind(scenario, vm)
    except (frontend.ParseError, BindError) as exc:
        _print_diagnostics(exc.diagnostics, scenario_file or "<flags>", fmt == "json")
        sys.exit(EXIT_DIAGNOSTICS)
    report = run_scenario(bound)
    if fmt == "json":
        click.echo(json.dumps(report.to_dict()))
    else:
        click.echo(render_report(report), nl=False)
    if report.verdict == "PASS":
        sys.exit(EXIT_PASS)
    if report.verdict == "FAIL":
        sys.exit(EXIT_FAIL)
    sys.exit(EXIT_FAULT)


@main.command()
@click.argument("model_file", type=click.Path(exists=True, dir_okay=False))
def repl(model_file):
    """Interactively steer a live session (set/raise/show/trace/reset/quit)."""
    vm = _load_model(model_file, as_json=False)
    session = Session(vm)
    try:
        session.enter()
    except SimulatorError as exc:
        click.echo(f"error: {exc.code}: {exc}", err=True)
        sys.exit(EXIT_FAULT)
    click.echo(f"machine {vm.name}; active: {session.active}")
    click.echo("commands: show, set <var> <value>, raise <event>, trace, reset, quit")
    while True:
        try:
            line = input("> ").strip()
        except EOFError:
            break
        if not line:
            continue
        parts = line.split()
        cmd = parts[0]
        try:
            if cmd == "quit":
                break
            elif cmd == "show":
                env = ", ".join(
                    f"{k}={format_value(v)}" for k, v in session.env.items()
                )
                click.echo(f"active: {session.active}  status: {session.status.value}")
                click.echo(f"env: {env}" if env else "env: (none)")
            elif cmd == "set" and len(parts) == 3:
                value = _parse_cli_value(parts[2])
                session.set_variable(parts[1], value)
                click.echo(f"active: {session.active}")
            elif cmd == "raise" and len(parts) == 2:
                session.raise_event(parts[1])
                click.echo(f"active: {session.active}")
            elif cmd == "trace":
                for entry in session.trace:
                    stim = " ".join(format_value(x) if type(x) is bool else str(x)
                                    for x in entry.stimulus)
                    hops = ", ".join(f"{s}->{t}" for s, t, _ in entry.taken)
                    click.echo(f"{stim}: [{hops}] => {entry.resulting_active}")
            elif cmd == "reset":
                session.reset()
                click.echo(f"active: {session.active}")
            else:
                click.echo("error: unknown command", err=True)
        except SimulatorError as exc:
            click.echo(f"error: {exc.code}: {exc}", err=True)
        except ValueError as exc:
            click.echo(f"error: {exc}", err=True)
    sys.exit(EXIT_PASS)


def _parse_cli_value(text: str):
    if text == "true":
        return True
    if text == "false":
        return False
    try:
        return int(text)
    except ValueError:
        raise ValueError(f"invalid value '{text}' (expected integer, true or false)")


@main.group()
def gen():
    """Generate C artifacts: the machine, a test file, or double shims."""


@gen.command("sm")
@click.argument("model_file", type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--out-dir", default=".", type=click.Path(file_okay=False))
def gen_sm(model_file, out_dir):
    """Generate src-gen/<P>.h, src-gen/<P>.c and sc_types.h."""
    vm = _load_model(model_file, as_json=False)
    try:
        artifacts = generate_machine(vm)
    except CodegenError as exc:
        click.echo(f"error: {exc.code}: {exc}", err=True)
        sys.exit(EXIT_DIAGNOSTICS)
    _write_artifacts(artifacts, out_dir)


@gen.command("test")
@click.argument("model_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--scenario", "scenario_file", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--flavor", type=click.Choice(["gtest", "minimal"]), default="gtest")
@click.option("-o", "--out-dir", default=".", type=click.Path(file_okay=False))
def gen_test(model_file, scenario_file, flavor, out_dir):
    """Generate the test file for a model/scenario pair."""
    vm = _load_model(model_file, as_json=False)
    try:
        text = Path(scenario_file).read_text(encoding="utf-8")
        scenario = frontend.parse_scenario(
            frontend.SourceText(text, origin=scenario_file)
        )
        bound = bind(scenario, vm)
    except (frontend.ParseError, BindError) as exc:
        _print_diagnostics(exc.diagnostics, scenario_file, as_json=False)
        sys.exit(EXIT_DIAGNOSTICS)
    try:
        artifact = generate_test(vm, bound, flavor=flavor.upper())
    except CodegenError as exc:
        click.echo(f"error: {exc.code}: {exc}", err=True)
        sys.exit(EXIT_DIAGNOSTICS)
    _write_artifacts([artifact], out_dir)


@gen.command("doubles")
@click.argument("spec_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--bundle", default="clover", help="output file stem")
@click.option("-o", "--out-dir", default=".", type=click.Path(file_okay=False))
def gen_doubles(spec_file, bundle, out_dir):
    """Generate link-time wrapper shims from a .doubles.json spec."""
    try:
        specs = parse_doubles_spec(Path(spec_file).read_text(encoding="utf-8"))
        artifacts = generate_shims(specs, bundle=bundle)
    except DoubleError as exc:
        click.echo(f"error: {exc.code}: {exc}", err=True)
        sys.exit(EXIT_DIAGNOSTICS)
    _write_artifacts(artifacts, out_dir)


@main.command()
@click.option("--port", type=int, default=None,
              help="listen port (default 8732 or $STATETEST_PORT; 0 = ephemeral)")
@click.option("--host", default="127.0.0.1")
@click.option("--ui-dir", type=click.Path(exists=True, file_okay=False), default=None)
def serve(port, host, ui_dir):
    """Run the simulation HTTP service, optionally serving the built UI."""
    import socket

    import uvicorn

    from .service import DEFAULT_PORT, create_app

    if port is None:
        port = int(os.environ.get("STATETEST_PORT", DEFAULT_PORT))
    if port == 0:
        probe = socket.socket()
        probe.bind((host, 0))
        port = probe.getsockname()[1]
        probe.close()
    click.echo(f"statetest service on http://{host}:{port}")
    app = create_app(ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
