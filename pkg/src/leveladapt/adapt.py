"""Few-trial difficulty adaptation over a prior archive.

Another agent's archive supplies both the candidate levels and the prior mean
of a Gaussian process over behavior cells. Each trial deploys the level whose
posterior upper confidence bound (mean + beta * sigma) is highest, observes
the target's performance there, and conditions the posterior; the search
stops as soon as a level with performance >= 0.75 is found (win rate in
[0.45, 0.8]) or after the iteration cap.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from random import Random

import numpy as np

from .archive import Archive, Elite, evaluate_level, performance
from .game import GameConfig
from .gp import GPPosterior, Matern52Kernel
from .seeds import derive_seed


@dataclass(frozen=True)
class AdaptParams:
    beta: float = 0.03
    max_iterations: int = 20
    success_threshold: float = 0.75
    rollouts: int = 40
    repetitions: int = 10

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError("beta must be non-negative")
        if min(self.max_iterations, self.rollouts, self.repetitions) < 1:
            raise ValueError("iteration/rollout/repetition counts must be positive")
        if not 0.0 < self.success_threshold <= 1.0:
            raise ValueError("success threshold must be in (0, 1]")


@dataclass(frozen=True)
class Suggestion:
    """What to deploy next, with the posterior stats behind the choice."""

    cell: tuple
    level_text: str
    posterior_mean: float
    posterior_sigma: float
    acq_value: float


@dataclass(frozen=True)
class AdaptationStep:
    iteration: int
    cell: tuple
    level_text: str
    win_rate: float
    performance: float
    posterior_mean: float
    posterior_sigma: float
    acq_value: float


@dataclass
class AdaptationTrace:
    prior_agent: str
    target_agent: str
    steps: list = field(default_factory=list)
    success: bool = False

    @property
    def iterations_used(self) -> int:
        return len(self.steps)

    def to_dict(self) -> dict:
        return {
            "format": "leveladapt-trace/1",
            "prior_agent": self.prior_agent,
            "target_agent": self.target_agent,
            "success": self.success,
            "iterations_used": self.iterations_used,
            "steps": [
                {
                    "iteration": s.iteration,
                    "cell": list(s.cell),
                    "level": s.level_text,
                    "win_rate": s.win_rate,
                    "performance": s.performance,
                    "posterior_mean": s.posterior_mean,
                    "posterior_sigma": s.posterior_sigma,
                    "acq_value": s.acq_value,
                }
                for s in self.steps
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AdaptationTrace":
        trace = cls(prior_agent=data["prior_agent"],
                    target_agent=data["target_agent"],
                    success=data["success"])
        for s in data["steps"]:
            trace.steps.append(AdaptationStep(
                iteration=s["iteration"], cell=tuple(s["cell"]),
                level_text=s["level"], win_rate=s["win_rate"],
                performance=s["performance"],
                posterior_mean=s["posterior_mean"],
                posterior_sigma=s["posterior_sigma"],
                acq_value=s["acq_value"]))
        return trace


def posterior_from_archive(archive: Archive,
                           kernel: Matern52Kernel = Matern52Kernel()) -> GPPosterior:
    """GP over the archive's occupied cells; prior mean = recorded performance."""
    if not archive.cells:
        raise ValueError("cannot adapt on an empty archive")
    coords = {cell: archive.grid.normalized_centroid(cell)
              for cell in archive.cells}
    return GPPosterior(kernel, coords, archive.performances())


def select_next(posterior: GPPosterior, beta: float) -> Suggestion:
    """Argmax of mean + beta * sigma over the domain.

    Cells are scanned in sorted order with a strict comparison, so exact ties
    resolve to the lexicographically smallest cell id. With no observations
    this picks the best-performing cell of the prior map.
    """
    means, variances = posterior.predict_all()
    sigmas = np.sqrt(variances)
    acq = means + beta * sigmas
    idx = int(np.argmax(acq))
    return Suggestion(cell=posterior.cells[idx], level_text="",
                      posterior_mean=float(means[idx]),
                      posterior_sigma=float(sigmas[idx]),
                      acq_value=float(acq[idx]))


class AdaptationSession:
    """Observation-driven adaptation: ask for a suggestion, play it anywhere
    (an AI proxy here, a human in a live deployment), report the win rate,
    repeat until a compensatory level appears or the budget of trials ends.
    """

    def __init__(self, prior: Archive, target_agent: str = "",
                 kernel: Matern52Kernel = Matern52Kernel(),
                 params: AdaptParams = AdaptParams()):
        self.prior = prior
        self.params = params
        self.posterior = posterior_from_archive(prior, kernel)
        self.trace = AdaptationTrace(prior_agent=prior.agent_name,
                                     target_agent=target_agent)
        self.done = False
        self._current = self._suggest()

    def _suggest(self) -> Suggestion:
        s = select_next(self.posterior, self.params.beta)
        return Suggestion(cell=s.cell,
                          level_text=self.prior.cells[s.cell].level.to_text(),
                          posterior_mean=s.posterior_mean,
                          posterior_sigma=s.posterior_sigma,
                          acq_value=s.acq_value)

    @property
    def suggestion(self) -> Suggestion:
        if self.done:
            raise RuntimeError("adaptation already finished")
        return self._current

    def observe(self, win_rate: float) -> AdaptationStep:
        """Record the observed win rate for the current suggestion and move on."""
        if self.done:
            raise RuntimeError("adaptation already finished")
        cur = self._current
        perf = performance(win_rate)
        step = AdaptationStep(
            iteration=len(self.trace.steps), cell=cur.cell,
            level_text=cur.level_text, win_rate=win_rate, performance=perf,
            posterior_mean=cur.posterior_mean,
            posterior_sigma=cur.posterior_sigma, acq_value=cur.acq_value)
        self.trace.steps.append(step)
        if perf >= self.params.success_threshold:
            self.trace.success = True
            self.done = True
        elif len(self.trace.steps) >= self.params.max_iterations:
            self.done = True
        else:
            self.posterior.observe(cur.cell, perf)
            self._current = self._suggest()
        return step


def adapt(prior: Archive, target_agent, params: AdaptParams = AdaptParams(),
          kernel: Matern52Kernel = Matern52Kernel(),
          game: GameConfig = GameConfig(), seed: int = 0) -> AdaptationTrace:
    """Run the full loop with an agent standing in for the player.

    Each iteration evaluates the suggested level on `target_agent` over
    `params.rollouts` rollouts (seeded per iteration), reports the measured
    win rate to the session, and stops on success or at the iteration cap.
    """
    session = AdaptationSession(
        prior, target_agent=getattr(target_agent, "kind", str(target_agent)),
        kernel=kernel, params=params)
    while not session.done:
        level = prior.cells[session.suggestion.cell].level
        win_rate, _ = evaluate_level(
            level, target_agent, params.rollouts,
            derive_seed(seed, "iteration", len(session.trace.steps)), game)
        session.observe(win_rate)
    return session.trace


def baseline_prior(archive: Archive, rng: Random,
                   agent_name: str = "Baseline (noise)") -> Archive:
    """Same cells and levels, performances replaced by uniform [0,1) draws.

    Adapting on this prior amounts to trying the archive's levels in a random
    order, which is the control for whether a skill-informed prior helps.
    """
    if not archive.cells:
        raise ValueError("cannot build a baseline from an empty archive")
    noisy = Archive(archive.grid, agent_name,
                    config_fingerprint=archive.config_fingerprint,
                    game_fingerprint=archive.game_fingerprint)
    for cell in archive.occupied():
        elite = archive.cells[cell]
        noisy.cells[cell] = Elite(level=elite.level, win_rate=elite.win_rate,
                                  performance=rng.random(),
                                  eval_count=elite.eval_count)
    return noisy
