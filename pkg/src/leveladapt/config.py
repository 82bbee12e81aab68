"""Experiment configuration: one structured document for every knob.

Each output file is stamped with the config fingerprint (a stable hash of
the canonicalized config), and archives additionally carry a game
fingerprint covering only the rule-relevant subset, so results produced
under different rules can never be silently mixed.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, replace

from . import game as _game
from .adapt import AdaptParams
from .agents import canonical_agent_name
from .archive import ArchiveGrid, MapElitesParams
from .game import BudgetSpec, GameConfig
from .gp import Matern52Kernel

DEFAULT_AGENTS = ("DoNothing", "Random", "OSLA", "GTS", "RS", "RHEA", "MCTS",
                  "OLETS")


def _canonical_json(data) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def _digest(data) -> str:
    return hashlib.sha256(_canonical_json(data).encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 0
    game: GameConfig = field(default_factory=GameConfig)
    grid: ArchiveGrid = field(default_factory=ArchiveGrid)
    map_elites: MapElitesParams = field(default_factory=MapElitesParams)
    kernel: Matern52Kernel = field(default_factory=Matern52Kernel)
    adapt: AdaptParams = field(default_factory=AdaptParams)
    # agent name -> constructor params; empty dict means defaults
    agents: dict = field(default_factory=lambda: {name: {} for name in DEFAULT_AGENTS})

    def to_dict(self) -> dict:
        data = {
            "seed": self.seed,
            "game": {"max_ticks": self.game.max_ticks,
                     "budget": asdict(self.game.budget)},
            "grid": {"bins": self.grid.bins,
                     "coverage_range": list(self.grid.coverage_range),
                     "leniency_range": list(self.grid.leniency_range),
                     "reachability_range": list(self.grid.reachability_range)},
            "map_elites": asdict(self.map_elites),
            "kernel": asdict(self.kernel),
            "adapt": asdict(self.adapt),
            "agents": {name: dict(params) for name, params in sorted(self.agents.items())},
        }
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        g = data.get("grid", {})
        budget = data.get("game", {}).get("budget", {})
        agents = data.get("agents")
        if agents is None:
            agents = {name: {} for name in DEFAULT_AGENTS}
        agents = {canonical_agent_name(name): dict(params or {})
                  for name, params in agents.items()}
        return cls(
            seed=data.get("seed", 0),
            game=GameConfig(
                max_ticks=data.get("game", {}).get("max_ticks", 2000),
                budget=BudgetSpec(mode=budget.get("mode", "calls"),
                                  limit=budget.get("limit", 1000))),
            grid=ArchiveGrid(
                bins=g.get("bins", 10),
                coverage_range=tuple(g.get("coverage_range", (0.0, 1.0))),
                leniency_range=tuple(g.get("leniency_range", (0.0, 9.0))),
                reachability_range=tuple(g.get("reachability_range", (2.0, 40.0)))),
            map_elites=MapElitesParams(**data.get("map_elites", {})),
            kernel=Matern52Kernel(**data.get("kernel", {})),
            adapt=AdaptParams(**data.get("adapt", {})),
            agents=agents,
        )

    def fingerprint(self) -> str:
        return _digest(self.to_dict())

    def game_fingerprint(self) -> str:
        """Hash of everything that changes gameplay or its evaluation."""
        return _digest({
            "rules_version": _game.RULES_VERSION,
            "scores": [_game.KEY_SCORE, _game.KILL_SCORE, _game.WIN_SCORE],
            "periods": sorted(_game.ENEMY_PERIODS.values()),
            "max_ticks": self.game.max_ticks,
            "budget": asdict(self.game.budget),
        })

    def agent_params(self, name: str) -> dict:
        return self.agents.get(canonical_agent_name(name), {})

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return replace(self, seed=seed)


def load_config(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return ExperimentConfig.from_dict(json.load(fh))


def save_config(config: ExperimentConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def paper_scale_config(seed: int = 0) -> ExperimentConfig:
    """Full-scale settings: 100+10x50 candidates, 40 rollouts, 2000 ticks."""
    return ExperimentConfig(seed=seed)


def desk_scale_config(seed: int = 0) -> ExperimentConfig:
    """Settings small enough for a workstation run while keeping the
    qualitative behavior: shorter episodes, tighter planning budget, fewer
    candidates and evaluation rollouts."""
    return ExperimentConfig(
        seed=seed,
        game=GameConfig(max_ticks=150, budget=BudgetSpec("calls", 300)),
        map_elites=MapElitesParams(n_generations=2, n_init=50,
                                   iters_per_gen=50, rollouts=10),
        adapt=AdaptParams(rollouts=40),
    )


def smoke_config(seed: int = 0) -> ExperimentConfig:
    """Minutes-not-hours settings for pipeline and determinism checks."""
    return ExperimentConfig(
        seed=seed,
        game=GameConfig(max_ticks=60, budget=BudgetSpec("calls", 60)),
        map_elites=MapElitesParams(n_generations=1, n_init=6,
                                   iters_per_gen=6, rollouts=3),
        adapt=AdaptParams(rollouts=5, max_iterations=5, repetitions=2),
    )


PRESETS = {
    "paper": paper_scale_config,
    "desk": desk_scale_config,
    "smoke": smoke_config,
}
