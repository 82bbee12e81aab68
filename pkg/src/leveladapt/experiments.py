"""Batch experiment harness: evolve archives to disk, run adaptation
matrices, and emit the summary tables as CSV.

All writes are atomic (write to a temp file in the target directory, then
rename) and every file embeds the config fingerprint, so partial results
cannot masquerade as complete ones and files from different configurations
cannot be mixed. Nothing here depends on wall-clock time or scheduling:
rerunning a command with the same config and seed reproduces every output
byte for byte.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from random import Random

from .adapt import AdaptationTrace, adapt, baseline_prior
from .agents import canonical_agent_name, make_agent
from .archive import Archive, difficulty_bands, run_map_elites
from .config import ExperimentConfig
from .seeds import derive_seed

BASELINE_LABEL = "Baseline (noise)"

# Pinned CSV schemas; golden tests depend on these exact headers.
HEATMAP_HEADER = ["bin_a", "bin_b", "mean_win_rate", "mean_performance", "count"]
BANDS_HEADER = ["band", "win_rate_range", "count"]
MATRIX_HEADER = ["prior", "target", "mean_iterations", "successes", "repetitions"]
RUNS_HEADER = ["run_id", "iteration", "cell_id", "win_rate", "performance",
               "acq_value", "success"]

FEATURE_NAMES = ("coverage", "leniency", "reachability")


class ArchiveMismatchError(ValueError):
    """Archives evolved under different game rules cannot be combined."""


def atomic_write_text(path, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def archive_json_text(archive: Archive) -> str:
    return json.dumps(archive.to_dict(), indent=2, sort_keys=True) + "\n"


def save_archive(archive: Archive, path) -> None:
    atomic_write_text(path, archive_json_text(archive))


def load_archive(path) -> Archive:
    with open(path, "r", encoding="utf-8") as fh:
        return Archive.from_dict(json.load(fh))


def _csv_text(fingerprint: str, header, rows) -> str:
    buf = io.StringIO()
    buf.write(f"# config_fingerprint={fingerprint}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def heatmap_rows(archive: Archive, dim_a: int, dim_b: int) -> list:
    """10x10 projection of the archive onto two features, averaging win rate
    and performance over the remaining feature. Only occupied projections
    appear; `count` says how many cells were averaged."""
    groups: dict = {}
    for cell in archive.occupied():
        key = (cell[dim_a], cell[dim_b])
        groups.setdefault(key, []).append(archive.cells[cell])
    rows = []
    for (a, b) in sorted(groups):
        elites = groups[(a, b)]
        n = len(elites)
        rows.append([a, b,
                     repr(sum(e.win_rate for e in elites) / n),
                     repr(sum(e.performance for e in elites) / n),
                     n])
    return rows


def bands_csv_text(archive: Archive, fingerprint: str) -> str:
    from .archive import BAND_LABELS
    counts = difficulty_bands(archive)
    rows = [[i, BAND_LABELS[i], counts[i]] for i in range(5)]
    return _csv_text(fingerprint, BANDS_HEADER, rows)


@dataclass
class EvolveOutput:
    archive_path: str
    heatmap_paths: list
    candidates_path: str
    occupied_cells: int
    bands: tuple


def evolve_to_dir(config: ExperimentConfig, agent_name: str, outdir,
                  log_candidates: bool = True) -> EvolveOutput:
    """Evolve one agent's archive and write archive JSON, heatmap CSVs per
    2-D feature projection, and (optionally) the full candidate log."""
    name = canonical_agent_name(agent_name)
    agent = make_agent(name, config.agent_params(name))
    result = run_map_elites(
        agent, config.map_elites, derive_seed(config.seed, "evolve", name),
        grid=config.grid, game=config.game, agent_name=name,
        config_fingerprint=config.fingerprint(),
        game_fingerprint=config.game_fingerprint())
    archive_path = os.path.join(outdir, f"archive_{name}.json")
    save_archive(result.archive, archive_path)
    heatmap_paths = []
    for dim_a, dim_b in ((0, 1), (0, 2), (1, 2)):
        path = os.path.join(
            outdir, f"heatmap_{name}_{FEATURE_NAMES[dim_a]}_{FEATURE_NAMES[dim_b]}.csv")
        atomic_write_text(path, _csv_text(
            config.fingerprint(), HEATMAP_HEADER,
            heatmap_rows(result.archive, dim_a, dim_b)))
        heatmap_paths.append(path)
    candidates_path = ""
    if log_candidates:
        candidates_path = os.path.join(outdir, f"candidates_{name}.jsonl")
        lines = [json.dumps({
            "index": c.index, "generation": c.generation, "cell": list(c.cell),
            "win_rate": c.win_rate, "performance": c.performance,
            "accepted": c.accepted, "level": c.level_text,
        }, sort_keys=True) for c in result.candidates]
        atomic_write_text(candidates_path, "\n".join(lines) + "\n")
    return EvolveOutput(archive_path, heatmap_paths, candidates_path,
                        len(result.archive), difficulty_bands(result.archive))


def _check_same_rules(config: ExperimentConfig, archives: dict) -> None:
    expected = config.game_fingerprint()
    for label, archive in archives.items():
        if archive.game_fingerprint and archive.game_fingerprint != expected:
            raise ArchiveMismatchError(
                f"archive {label!r} was evolved under game fingerprint "
                f"{archive.game_fingerprint}, but the current config has "
                f"{expected}; refusing to mix")


def _one_run(config_dict: dict, archive_dict: dict, prior_label: str,
             target: str, rep: int) -> dict:
    """Worker-safe single adaptation run (everything arrives as plain data)."""
    config = ExperimentConfig.from_dict(config_dict)
    prior = Archive.from_dict(archive_dict)
    if prior_label == BASELINE_LABEL:
        prior = baseline_prior(
            prior, Random(derive_seed(config.seed, "baseline")))
    agent = make_agent(target, config.agent_params(target))
    trace = adapt(prior, agent, params=config.adapt, kernel=config.kernel,
                  game=config.game,
                  seed=derive_seed(config.seed, "matrix", prior_label, target, rep))
    return trace.to_dict()


def _slug(label: str) -> str:
    return "".join(ch if ch.isalnum() else "_" for ch in label).strip("_")


@dataclass
class MatrixOutput:
    matrix_path: str
    runs_path: str
    trace_paths: list = field(default_factory=list)
    # (prior, target) -> (mean_iterations or None, successes)
    summary: dict = field(default_factory=dict)


def run_matrix(config: ExperimentConfig, prior_paths, targets, outdir,
               workers: int = 1, include_baseline: bool = True) -> MatrixOutput:
    """Adaptation matrix: `repetitions` runs of adapt() per (prior, target).

    Mean iterations are averaged over successful runs only; a pair with no
    successes gets an empty mean. A noise baseline built from the DoNothing
    archive is appended as an extra prior row when one is present.
    """
    priors = {}
    for path in prior_paths:
        archive = load_archive(path)
        priors[archive.agent_name] = archive
    _check_same_rules(config, priors)
    if include_baseline:
        for label in list(priors):
            if label == "DoNothing":
                priors[BASELINE_LABEL] = priors[label]
                break
    targets = [canonical_agent_name(t) for t in targets]
    reps = config.adapt.repetitions
    tasks = [(label, target, rep)
             for label in priors for target in targets for rep in range(reps)]
    config_dict = config.to_dict()
    if workers > 1:
        archive_dicts = {label: a.to_dict() for label, a in priors.items()}
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_one_run, config_dict, archive_dicts[label],
                                   label, target, rep)
                       for label, target, rep in tasks]
            results = [f.result() for f in futures]
    else:
        archive_dicts = {label: a.to_dict() for label, a in priors.items()}
        results = [_one_run(config_dict, archive_dicts[label], label, target, rep)
                   for label, target, rep in tasks]

    traces = {}
    for (label, target, rep), data in zip(tasks, results):
        traces[(label, target, rep)] = AdaptationTrace.from_dict(data)

    fingerprint = config.fingerprint()
    trace_paths = []
    runs_rows = []
    for (label, target, rep) in tasks:
        trace = traces[(label, target, rep)]
        run_id = f"{_slug(label)}--{target}--r{rep:02d}"
        path = os.path.join(outdir, "traces", f"{run_id}.json")
        atomic_write_text(path, json.dumps(
            {"run_id": run_id, "config_fingerprint": fingerprint,
             **trace.to_dict()}, indent=2, sort_keys=True) + "\n")
        trace_paths.append(path)
        for step in trace.steps:
            is_last = step.iteration == trace.iterations_used - 1
            runs_rows.append([
                run_id, step.iteration,
                "/".join(str(x) for x in step.cell),
                repr(step.win_rate), repr(step.performance),
                repr(step.acq_value),
                str(trace.success and is_last).lower(),
            ])

    summary = {}
    matrix_rows = []
    for label in priors:
        for target in targets:
            runs = [traces[(label, target, rep)] for rep in range(reps)]
            wins = [t for t in runs if t.success]
            mean_iters = (sum(t.iterations_used for t in wins) / len(wins)
                          if wins else None)
            summary[(label, target)] = (mean_iters, len(wins))
            matrix_rows.append([
                label, target,
                "" if mean_iters is None else repr(mean_iters),
                len(wins), reps,
            ])
    matrix_path = os.path.join(outdir, "matrix.csv")
    atomic_write_text(matrix_path,
                      _csv_text(fingerprint, MATRIX_HEADER, matrix_rows))
    runs_path = os.path.join(outdir, "runs.csv")
    atomic_write_text(runs_path, _csv_text(fingerprint, RUNS_HEADER, runs_rows))
    return MatrixOutput(matrix_path, runs_path, trace_paths, summary)
