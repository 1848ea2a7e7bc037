"""Headless driver for scripting and CI.

Runs the pipeline end to end on fixture or live transports, validates
projects, exports frame streams, and serves the HTTP facade. Machine
output goes to files or stdout only; diagnostics go to stderr. Exit codes:
0 success, 1 domain failure, 2 usage error.
"""

from __future__ import annotations

import functools
import json
import os
import sys
from pathlib import Path

import click
from pydantic import ValidationError

from .app import Engine, EngineConfig
from .breakdown import BreakdownOptions
from .canonical import canonical_json
from .errors import EngineError
from .model import report_to_doc, validate_timeline
from .project import project_from_doc, project_to_doc
from .sequencer import frame_lines


def _engine(ctx: click.Context, mode: str | None = None) -> Engine:
    settings = ctx.obj or {}
    config = EngineConfig(
        mode=mode or settings.get("mode") or os.environ.get("LLM_MODE", "replay"),
        data_dir=Path(settings.get("data_dir") or os.environ.get("DATA_DIR", "data")),
        fixtures_dir=Path(settings.get("fixtures_dir") or os.environ.get("LLM_FIXTURES_DIR", "fixtures")),
    )
    return Engine.from_config(config)


def _load_project(path: str):
    try:
        return project_from_doc(json.loads(Path(path).read_text(encoding="utf-8")))
    except FileNotFoundError as exc:
        raise EngineError(f"project file not found: {path}") from exc
    except (json.JSONDecodeError, KeyError, ValidationError) as exc:
        raise EngineError(f"project file {path} is not a valid project document: {exc}") from exc


def _write_project(project, path: str) -> None:
    Path(path).write_text(canonical_json(project_to_doc(project)) + "\n", encoding="utf-8")


def domain_errors(fn):
    """Domain failures exit 1 with an error document on stderr."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (EngineError, ValidationError) as exc:
            code = getattr(exc, "code", "invalid_input")
            detail = getattr(exc, "detail", {})
            doc = {"code": code, "message": str(exc), "detail": detail}
            click.echo(canonical_json(doc), err=True)
            sys.exit(1)

    return wrapper


@click.group()
@click.option("--mode", type=click.Choice(["live", "record", "replay"]), default=None, help="Transport mode; overrides LLM_MODE.")
@click.option("--data-dir", default=None, help="Project data directory; overrides DATA_DIR.")
@click.option("--fixtures-dir", default=None, help="Fixture directory; overrides LLM_FIXTURES_DIR.")
@click.pass_context
def main(ctx, mode, data_dir, fixtures_dir):
    """Script-driven map animation engine."""
    ctx.obj = {"mode": mode, "data_dir": data_dir, "fixtures_dir": fixtures_dir}


def _breakdown_options(target_duration, default_block_seconds, camera_lead_seconds) -> BreakdownOptions:
    return BreakdownOptions(
        target_duration=target_duration,
        default_block_seconds=default_block_seconds,
        camera_lead_seconds=camera_lead_seconds,
    )


@main.command()
@click.argument("script_path", type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--output", required=True, type=click.Path(dir_okay=False), help="Project file to write.")
@click.pass_context
@domain_errors
def breakdown(ctx, script_path, output):
    """Create a project from a script and run the scene breakdown agent."""
    engine = _engine(ctx)
    script = Path(script_path).read_text(encoding="utf-8")
    project = engine.create_project(script)
    project = engine.run_breakdown(project)
    _write_project(project, output)
    click.echo(f"wrote {output} ({len(project.breakdown.items)} breakdown items)", err=True)


@main.command()
@click.argument("project_path", type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--output", default=None, type=click.Path(dir_okay=False), help="Defaults to in-place.")
@click.pass_context
@domain_errors
def research(ctx, project_path, output):
    """Resolve every breakdown item through the researcher agent."""
    engine = _engine(ctx)
    project = engine.research_all(_load_project(project_path))
    _write_project(project, output or project_path)
    unresolved = [it.id for it in project.breakdown.items if not it.resolved]
    if unresolved:
        click.echo(f"unresolved items (human follow-up needed): {', '.join(unresolved)}", err=True)
    else:
        click.echo("all items resolved", err=True)


@main.command(name="compile")
@click.argument("project_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--duration", "target_duration", default=30.0, show_default=True, help="Target duration, seconds.")
@click.option("--default-block-seconds", default=4.0, show_default=True)
@click.option("--camera-lead-seconds", default=0.5, show_default=True)
@click.option("-o", "--output", default=None, type=click.Path(dir_okay=False), help="Defaults to in-place.")
@click.pass_context
@domain_errors
def compile_cmd(ctx, project_path, target_duration, default_block_seconds, camera_lead_seconds, output):
    """Compile the resolved breakdown into a timed block sequence."""
    engine = _engine(ctx)
    opts = _breakdown_options(target_duration, default_block_seconds, camera_lead_seconds)
    project = engine.compile_project(_load_project(project_path), opts)
    _write_project(project, output or project_path)
    click.echo(f"compiled timeline: {len(project.timeline.blocks)} blocks, {project.timeline.duration:.3f}s", err=True)


@main.command()
@click.argument("project_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--fps", default=30, show_default=True, type=int)
@click.option("-o", "--output", default=None, type=click.Path(dir_okay=False), help="Defaults to stdout.")
@domain_errors
def frames(project_path, fps, output):
    """Export the frame stream (one canonical frame per line)."""
    project = _load_project(project_path)
    lines = frame_lines(project.timeline, fps)
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            for line in lines:
                fh.write(line + "\n")
        click.echo(f"wrote {output}", err=True)
    else:
        for line in lines:
            click.echo(line)


@main.command()
@click.argument("project_path", type=click.Path(exists=True, dir_okay=False))
@domain_errors
def validate(project_path):
    """Print the validation report; exit 0 only when it has no errors."""
    project = _load_project(project_path)
    report = validate_timeline(project.timeline)
    click.echo(canonical_json(report_to_doc(report)))
    if report.errors:
        sys.exit(1)


@main.command()
@click.option("--host", default=None, help="Bind host; overrides BIND_ADDR.")
@click.option("--port", default=None, type=int, help="Bind port; overrides BIND_ADDR.")
@click.pass_context
@domain_errors
def serve(ctx, host, port):
    """Start the HTTP service."""
    import uvicorn

    from .service import create_app

    bind = os.environ.get("BIND_ADDR", "127.0.0.1:8000")
    default_host, _, default_port = bind.partition(":")
    app = create_app(_engine(ctx))
    uvicorn.run(app, host=host or default_host, port=port or int(default_port or 8000))


@main.command(name="record-fixtures")
@click.argument("script_path", type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--output", default=None, type=click.Path(dir_okay=False), help="Also write the project file.")
@click.pass_context
@domain_errors
def record_fixtures(ctx, script_path, output):
    """Run breakdown + research live and record fixtures for replay."""
    engine = _engine(ctx, mode="record")
    script = Path(script_path).read_text(encoding="utf-8")
    project = engine.create_project(script)
    project = engine.run_breakdown(project)
    project = engine.research_all(project)
    if output:
        _write_project(project, output)
    click.echo("fixtures recorded", err=True)


if __name__ == "__main__":  # pragma: no cover
    main()
