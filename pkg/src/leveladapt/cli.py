"""Command-line harness.

Subcommands: evolve, matrix, bands, eval, validate-level, serve. Every
command exits 0 on success; failures print a machine-readable JSON error
object to stderr and exit nonzero.
"""

from __future__ import annotations

import json
import sys

import click

from .adapt import AdaptParams
from .agents import AGENT_KINDS, canonical_agent_name, make_agent
from .archive import evaluate_level
from .config import PRESETS, ExperimentConfig, load_config
from .experiments import (ArchiveMismatchError, bands_csv_text, evolve_to_dir,
                          load_archive, run_matrix)
from .levels import LevelError, parse_level, validate_level, behavior_descriptor


def _fail(code: str, message: str, **extra):
    payload = {"error": {"code": code, "message": message, **extra}}
    click.echo(json.dumps(payload, sort_keys=True), err=True)
    sys.exit(2)


def _load_config(config_path, preset, seed):
    try:
        if config_path:
            cfg = load_config(config_path)
        else:
            cfg = PRESETS[preset]()
    except FileNotFoundError as exc:
        _fail("config-not-found", str(exc))
    except (ValueError, KeyError) as exc:
        _fail("bad-config", str(exc))
    if seed is not None:
        cfg = cfg.with_seed(seed)
    return cfg


def _read_level(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_level(fh.read())
    except FileNotFoundError as exc:
        _fail("level-not-found", str(exc))
    except LevelError as exc:
        _fail("bad-level", str(exc), row=exc.row, col=exc.col)


@click.group()
def main():
    """Evolve difficulty-calibrated level archives and adapt them to agents."""


_config_opts = [
    click.option("--config", "config_path", type=click.Path(), default=None,
                 help="JSON config file; defaults to the chosen preset."),
    click.option("--preset", type=click.Choice(sorted(PRESETS)), default="paper",
                 show_default=True, help="Built-in config preset."),
    click.option("--seed", type=int, default=None, help="Override the root seed."),
]


def _with_config_opts(fn):
    for opt in reversed(_config_opts):
        fn = opt(fn)
    return fn


@main.command()
@_with_config_opts
@click.option("--agent", "agent_name", required=True,
              type=click.Choice(sorted(AGENT_KINDS), case_sensitive=False))
@click.option("--out", "outdir", type=click.Path(), required=True)
@click.option("--no-candidates-log", is_flag=True, default=False,
              help="Skip writing the candidate stream JSONL.")
def evolve(config_path, preset, seed, agent_name, outdir, no_candidates_log):
    """Evolve one agent's archive; writes archive JSON and heatmap CSVs."""
    cfg = _load_config(config_path, preset, seed)
    try:
        out = evolve_to_dir(cfg, agent_name, outdir,
                            log_candidates=not no_candidates_log)
    except OSError as exc:
        _fail("io-error", str(exc))
    click.echo(json.dumps({
        "archive": out.archive_path,
        "occupied_cells": out.occupied_cells,
        "bands": list(out.bands),
        "heatmaps": out.heatmap_paths,
        "candidates_log": out.candidates_path or None,
    }, sort_keys=True))


@main.command()
@_with_config_opts
@click.option("--prior", "prior_paths", type=click.Path(), multiple=True,
              required=True, help="Archive JSON path (repeatable).")
@click.option("--target", "targets", multiple=True, required=True,
              type=click.Choice(sorted(AGENT_KINDS), case_sensitive=False))
@click.option("--out", "outdir", type=click.Path(), required=True)
@click.option("--workers", type=int, default=1, show_default=True,
              help="Process pool size for the adaptation runs.")
@click.option("--no-baseline", is_flag=True, default=False,
              help="Do not append the noise baseline row.")
def matrix(config_path, preset, seed, prior_paths, targets, outdir, workers,
           no_baseline):
    """Run the prior x target adaptation matrix and write matrix/runs CSVs."""
    cfg = _load_config(config_path, preset, seed)
    try:
        out = run_matrix(cfg, prior_paths, targets, outdir, workers=workers,
                         include_baseline=not no_baseline)
    except FileNotFoundError as exc:
        _fail("archive-not-found", str(exc))
    except ArchiveMismatchError as exc:
        _fail("archive-mismatch", str(exc))
    except (ValueError, OSError) as exc:
        _fail("matrix-failed", str(exc))
    click.echo(json.dumps({
        "matrix": out.matrix_path,
        "runs": out.runs_path,
        "traces": len(out.trace_paths),
        "cells": {f"{p}->{t}": {"mean_iterations": mi, "successes": s}
                  for (p, t), (mi, s) in sorted(out.summary.items())},
    }, sort_keys=True))


@main.command()
@click.argument("archive_path", type=click.Path())
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="Write CSV here instead of stdout.")
def bands(archive_path, out_path):
    """Difficulty band counts (easiest to hardest) for an archive."""
    try:
        archive = load_archive(archive_path)
    except FileNotFoundError as exc:
        _fail("archive-not-found", str(exc))
    except (ValueError, KeyError, LevelError) as exc:
        _fail("bad-archive", str(exc))
    text = bands_csv_text(archive, archive.config_fingerprint)
    if out_path:
        from .experiments import atomic_write_text
        atomic_write_text(out_path, text)
        click.echo(json.dumps({"bands_csv": out_path}, sort_keys=True))
    else:
        click.echo(text, nl=False)


@main.command("eval")
@_with_config_opts
@click.argument("level_path", type=click.Path())
@click.option("--agent", "agent_name", required=True,
              type=click.Choice(sorted(AGENT_KINDS), case_sensitive=False))
@click.option("--rollouts", type=int, default=None,
              help="Rollout count; defaults to the config's evolution rollouts.")
def eval_cmd(config_path, preset, seed, level_path, agent_name, rollouts):
    """Win rate and performance of one agent on one level file."""
    cfg = _load_config(config_path, preset, seed)
    level = _read_level(level_path)
    try:
        validate_level(level)
    except LevelError as exc:
        _fail("unsolvable-level", str(exc))
    name = canonical_agent_name(agent_name)
    agent = make_agent(name, cfg.agent_params(name))
    n = rollouts if rollouts is not None else cfg.map_elites.rollouts
    try:
        win_rate, perf = evaluate_level(level, agent, n, cfg.seed, cfg.game)
    except ValueError as exc:
        _fail("bad-eval", str(exc))
    click.echo(json.dumps({
        "agent": name, "rollouts": n, "seed": cfg.seed,
        "win_rate": win_rate, "performance": perf,
    }, sort_keys=True))


@main.command("validate-level")
@click.argument("level_path", type=click.Path())
def validate_level_cmd(level_path):
    """Parse a level file and check its structure and solvability."""
    level = _read_level(level_path)
    try:
        validate_level(level)
    except LevelError as exc:
        _fail("unsolvable-level", str(exc))
    d = behavior_descriptor(level)
    click.echo(json.dumps({
        "valid": True, "width": level.width, "height": level.height,
        "descriptor": {"coverage": d.coverage, "leniency": d.leniency,
                       "reachability": d.reachability},
    }, sort_keys=True))


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service (archives, evaluation, adaptation sessions)."""
    import uvicorn

    from .service.app import create_app
    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
