"""Behavior archive: win-rate evaluation, the difficulty-targeting
performance function, cell binning, and the evolutionary illumination loop.

The performance function peaks at a 60% win rate, so the archive fills with
levels that are neither trivial nor hopeless for the evaluated agent. Cells
discretize (coverage, leniency, reachability) on a fixed 10x10x10 grid; each
cell keeps the single best level found for it, replaced only on strict
improvement.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from random import Random

from .game import GameConfig, Outcome, initial_state, run_state_episode
from .levels import (Level, behavior_descriptor, parse_level, random_solution,
                     random_variation)
from .seeds import derive_seed

TARGET_WIN_RATE = 0.6


def performance(win_rate: float) -> float:
    """Map a win rate to [0, 1], peaking at the 60% target.

    Linear (5/3)w below the target; the quadratic -(25/4)w^2 + (15/2)w - 5/4
    above it. Both branches meet at 1 for w = 0.6 and the quadratic falls
    back to 0 at w = 1, so boring (easy) and frustrating (hard) levels score
    low alike. p(w) >= 0.75 exactly when w is in [0.45, 0.8].
    """
    if not 0.0 <= win_rate <= 1.0:
        raise ValueError(f"win rate must be in [0, 1], got {win_rate}")
    if win_rate <= TARGET_WIN_RATE:
        return (5.0 / 3.0) * win_rate
    return -6.25 * win_rate * win_rate + 7.5 * win_rate - 1.25


@dataclass(frozen=True)
class ArchiveGrid:
    """Uniform binning of behavior space; values outside a range clamp to
    the edge bins. Leniency gets one bin per enemy count up to 9+.
    """

    bins: int = 10
    coverage_range: tuple = (0.0, 1.0)
    leniency_range: tuple = (0.0, 9.0)
    reachability_range: tuple = (2.0, 40.0)

    @property
    def ranges(self) -> tuple:
        return (self.coverage_range, self.leniency_range, self.reachability_range)

    def _bin(self, value: float, lo: float, hi: float) -> int:
        if value <= lo:
            return 0
        if value >= hi:
            return self.bins - 1
        return min(int((value - lo) / (hi - lo) * self.bins), self.bins - 1)

    def cell_index(self, descriptor) -> tuple:
        cov, len_, reach = descriptor.as_tuple()
        (c_lo, c_hi), (l_lo, l_hi), (r_lo, r_hi) = self.ranges
        return (self._bin(cov, c_lo, c_hi),
                self._bin(len_, l_lo, l_hi),
                self._bin(reach, r_lo, r_hi))

    def centroid(self, cell: tuple) -> tuple:
        """Cell center in feature units."""
        return tuple(lo + (b + 0.5) / self.bins * (hi - lo)
                     for b, (lo, hi) in zip(cell, self.ranges))

    def normalized_centroid(self, cell: tuple) -> tuple:
        """Cell center with every feature rescaled to [0, 1] by its range,
        so no single feature dominates kernel distances."""
        return tuple((b + 0.5) / self.bins for b in cell)


@dataclass
class Elite:
    level: Level
    win_rate: float
    performance: float
    eval_count: int


class Archive:
    """Map from behavior cells to elites; doubles as a difficulty prior."""

    def __init__(self, grid: ArchiveGrid, agent_name: str,
                 config_fingerprint: str = "", game_fingerprint: str = ""):
        self.grid = grid
        self.agent_name = agent_name
        self.config_fingerprint = config_fingerprint
        self.game_fingerprint = game_fingerprint
        self.cells: dict = {}

    def __len__(self) -> int:
        return len(self.cells)

    def occupied(self) -> list:
        return sorted(self.cells)

    def add_if_better(self, cell: tuple, elite: Elite) -> bool:
        """Insert under the strict-improvement rule; equal performance loses."""
        incumbent = self.cells.get(cell)
        if incumbent is None or incumbent.performance < elite.performance:
            self.cells[cell] = elite
            return True
        return False

    def best_cell(self) -> tuple:
        """Highest-performance cell, lexicographically smallest on ties."""
        if not self.cells:
            raise ValueError("archive is empty")
        return max(self.occupied(), key=lambda c: (self.cells[c].performance,
                                                   tuple(-x for x in c)))

    def performances(self) -> dict:
        return {cell: elite.performance for cell, elite in self.cells.items()}

    def to_dict(self) -> dict:
        return {
            "format": "leveladapt-archive/1",
            "agent": self.agent_name,
            "config_fingerprint": self.config_fingerprint,
            "game_fingerprint": self.game_fingerprint,
            "grid": {
                "bins": self.grid.bins,
                "coverage_range": list(self.grid.coverage_range),
                "leniency_range": list(self.grid.leniency_range),
                "reachability_range": list(self.grid.reachability_range),
            },
            "cells": [
                {
                    "cell": list(cell),
                    "centroid": list(self.grid.centroid(cell)),
                    "level": self.cells[cell].level.to_text(),
                    "win_rate": self.cells[cell].win_rate,
                    "performance": self.cells[cell].performance,
                    "eval_count": self.cells[cell].eval_count,
                }
                for cell in self.occupied()
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Archive":
        if data.get("format") != "leveladapt-archive/1":
            raise ValueError(f"unsupported archive format {data.get('format')!r}")
        g = data["grid"]
        grid = ArchiveGrid(bins=g["bins"],
                           coverage_range=tuple(g["coverage_range"]),
                           leniency_range=tuple(g["leniency_range"]),
                           reachability_range=tuple(g["reachability_range"]))
        archive = cls(grid, data["agent"],
                      config_fingerprint=data.get("config_fingerprint", ""),
                      game_fingerprint=data.get("game_fingerprint", ""))
        for rec in data["cells"]:
            archive.cells[tuple(rec["cell"])] = Elite(
                level=parse_level(rec["level"]),
                win_rate=rec["win_rate"],
                performance=rec["performance"],
                eval_count=rec["eval_count"],
            )
        return archive


def evaluate_level(level: Level, agent, n_rollouts: int, seed: int,
                   game: GameConfig = GameConfig()) -> tuple:
    """Estimate (win_rate, performance) over n seeded rollouts.

    Rollout k plays under seed derived from (seed, k), so the estimate is a
    pure function of its arguments and rollouts can run in any order.
    """
    if n_rollouts < 1:
        raise ValueError("n_rollouts must be >= 1")
    state0 = initial_state(level, game.max_ticks)
    wins = 0
    for k in range(n_rollouts):
        result = run_state_episode(state0, agent, derive_seed(seed, "rollout", k),
                                   game.budget)
        if result.outcome is Outcome.WIN:
            wins += 1
    win_rate = wins / n_rollouts
    return win_rate, performance(win_rate)


@dataclass(frozen=True)
class MapElitesParams:
    n_generations: int = 10
    n_init: int = 100
    iters_per_gen: int = 50
    rollouts: int = 40

    def __post_init__(self):
        if min(self.n_generations, self.n_init, self.iters_per_gen, self.rollouts) < 1:
            raise ValueError("map-elites parameters must be positive")

    @property
    def total_candidates(self) -> int:
        return self.n_init + self.n_generations * self.iters_per_gen


@dataclass(frozen=True)
class CandidateRecord:
    """One evaluated candidate, enough to replay the archive bookkeeping."""

    index: int
    generation: int
    level_text: str
    cell: tuple
    win_rate: float
    performance: float
    accepted: bool


@dataclass
class EvolutionResult:
    archive: Archive
    candidates: list = field(default_factory=list)


def run_map_elites(agent, params: MapElitesParams, seed: int,
                   grid: ArchiveGrid = ArchiveGrid(),
                   game: GameConfig = GameConfig(),
                   agent_name: str = "",
                   config_fingerprint: str = "",
                   game_fingerprint: str = "") -> EvolutionResult:
    """Fill an archive with difficulty-calibrated levels.

    The first n_init candidates are fresh random levels; afterwards each
    candidate mutates a uniformly chosen current elite. A candidate lands in
    the cell of its behavior descriptor and replaces the incumbent only if
    strictly better. The candidate stream is returned for auditing/replay.
    """
    rng = Random(derive_seed(seed, "map-elites"))
    archive = Archive(grid, agent_name or getattr(agent, "kind", ""),
                      config_fingerprint, game_fingerprint)
    candidates = []
    for j in range(params.total_candidates):
        if j < params.n_init:
            generation = 0
            level = random_solution(rng)
        else:
            generation = 1 + (j - params.n_init) // params.iters_per_gen
            pick = archive.occupied()[rng.randrange(len(archive))]
            level = random_variation(archive.cells[pick].level, rng)
        descriptor = behavior_descriptor(level)
        cell = grid.cell_index(descriptor)
        win_rate, perf = evaluate_level(level, agent, params.rollouts,
                                        derive_seed(seed, "candidate", j), game)
        accepted = archive.add_if_better(
            cell, Elite(level, win_rate, perf, params.rollouts))
        candidates.append(CandidateRecord(j, generation, level.to_text(), cell,
                                          win_rate, perf, accepted))
    return EvolutionResult(archive, candidates)


# Win-rate bands for difficulty tables, easiest first. Edges belong to the
# easier band: w = 0.8 counts as easy, w = 0.6 as the second band, etc.
BAND_EDGES = (0.8, 0.6, 0.4, 0.2)
BAND_LABELS = ("easy [0.8,1.0]", "[0.6,0.8)", "[0.4,0.6)", "[0.2,0.4)",
               "hard [0.0,0.2)")


def difficulty_bands(archive: Archive) -> tuple:
    """Count elites per win-rate band, easiest first."""
    counts = [0, 0, 0, 0, 0]
    for elite in archive.cells.values():
        w = elite.win_rate
        if w >= 0.8:
            counts[0] += 1
        elif w >= 0.6:
            counts[1] += 1
        elif w >= 0.4:
            counts[2] += 1
        elif w >= 0.2:
            counts[3] += 1
        else:
            counts[4] += 1
    return tuple(counts)
