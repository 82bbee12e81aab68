"""leveladapt: difficulty-calibrated level archives and few-trial adaptation.

Core pieces:
  - game: deterministic dungeon simulator with a budgeted forward model
  - levels: level genotype, generator/mutator with a solvability guarantee
  - agents: eight planning agents of increasing strength
  - archive: win-rate evaluation and the behavior-space elite archive
  - gp / adapt: Gaussian-process posterior over the archive and the
    suggestion/observe adaptation loop
  - experiments / cli / service: batch harness, command line, HTTP API
"""

from .adapt import (AdaptParams, AdaptationSession, AdaptationTrace, adapt,
                    baseline_prior, select_next)
from .agents import AGENT_KINDS, make_agent
from .archive import (Archive, ArchiveGrid, MapElitesParams, difficulty_bands,
                      evaluate_level, performance, run_map_elites)
from .config import (ExperimentConfig, desk_scale_config, load_config,
                     paper_scale_config, save_config, smoke_config)
from .game import (Action, BudgetSpec, EpisodeResult, GameConfig, GameState,
                   Outcome, run_episode, state_value, step)
from .gp import GPPosterior, Matern52Kernel, matern52
from .levels import (BehaviorDescriptor, Level, LevelError, astar_path,
                     behavior_descriptor, parse_level, random_solution,
                     random_variation)

__version__ = "0.1.0"
