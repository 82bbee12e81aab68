"""Deterministic simulator for the dungeon game.

The avatar must pick up the key and reach the goal while dodging enemies that
random-walk at kind-specific speeds; touching an enemy loses, the sword kills
an enemy in the faced cell. States are immutable values: `step` returns the
successor, so planning agents can branch from any state, and a whole episode
is a pure function of (level, agent, seed, config).

Rule details fixed here (the game, not the framework, owns them):
  - a movement action sets facing and moves in the same tick; walls block the
    move but still set facing
  - reaching the goal with the key wins immediately; the enemy phase of that
    tick is skipped (win cannot be overturned by a touch in the same tick)
  - quick/normal/slow enemies move every 1/2/4 ticks, uniformly at random
    over their non-wall, non-key, non-goal neighbor cells; a move into a cell
    already holding another enemy is forfeited (no stacking)
  - scores: key pickup +1, sword kill +2, win +1; running out of ticks loses
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from enum import IntEnum
from random import Random

from .seeds import derive_seed

# Tile codes. The avatar is tracked separately, never as a tile.
FLOOR, WALL, KEY, GOAL, ENEMY_QUICK, ENEMY_NORMAL, ENEMY_SLOW = range(7)
ENEMY_TILES = (ENEMY_QUICK, ENEMY_NORMAL, ENEMY_SLOW)

# Ticks between moves per enemy kind.
ENEMY_PERIODS = {ENEMY_QUICK: 1, ENEMY_NORMAL: 2, ENEMY_SLOW: 4}

KEY_SCORE = 1
KILL_SCORE = 2
WIN_SCORE = 1

WIN_VALUE = 1e6
LOSS_VALUE = -1e6

# Bump when any rule constant above changes; part of the game fingerprint.
RULES_VERSION = 1


class Action(IntEnum):
    NIL = 0
    UP = 1
    DOWN = 2
    LEFT = 3
    RIGHT = 4
    USE = 5


ALL_ACTIONS = tuple(Action)
MOVE_ACTIONS = (Action.UP, Action.DOWN, Action.LEFT, Action.RIGHT)


class Outcome(IntEnum):
    ONGOING = 0
    WIN = 1
    LOSS = 2


_OUTCOMES = (Outcome.ONGOING, Outcome.WIN, Outcome.LOSS)

# Direction index -> (dr, dc); movement action a maps to direction a - 1.
DELTAS = ((-1, 0), (1, 0), (0, -1), (0, 1))
FACING_DOWN = 1  # initial facing


class TerminalStateError(RuntimeError):
    """Raised when step() is called on a finished episode."""


class BudgetExhausted(RuntimeError):
    """Raised by ForwardModel.step once the per-decision budget is spent."""


class EpisodeRules:
    """Static per-episode data shared by every state of the episode.

    Holds both grid variants (key present / picked up) and, for each cell,
    the precomputed tuple of cells an enemy standing there may move to.
    """

    __slots__ = (
        "width",
        "height",
        "grid_with_key",
        "grid_without_key",
        "moves_with_key",
        "moves_without_key",
        "key_pos",
        "goal_pos",
        "max_ticks",
    )

    def __init__(self, width, height, grid_with_key, grid_without_key,
                 moves_with_key, moves_without_key, key_pos, goal_pos, max_ticks):
        self.width = width
        self.height = height
        self.grid_with_key = grid_with_key
        self.grid_without_key = grid_without_key
        self.moves_with_key = moves_with_key
        self.moves_without_key = moves_without_key
        self.key_pos = key_pos
        self.goal_pos = goal_pos
        self.max_ticks = max_ticks


class GameState:
    """One tick of a live episode. Treat as immutable; step() builds the next.

    `enemies` is a tuple of (row, col, period, cooldown); order is the
    row-major scan of the level and stays stable for the whole episode, which
    pins the enemy update order and hence determinism.
    """

    __slots__ = ("rules", "grid", "avatar", "facing", "has_key", "score",
                 "tick", "outcome", "enemies")

    def __init__(self, rules, grid, avatar, facing, has_key, score, tick,
                 outcome, enemies):
        self.rules = rules
        self.grid = grid
        self.avatar = avatar
        self.facing = facing
        self.has_key = has_key
        self.score = score
        self.tick = tick
        self.outcome = outcome
        self.enemies = enemies

    @property
    def key_pos(self):
        """Key cell, or None once picked up."""
        return None if self.has_key else self.rules.key_pos

    @property
    def goal_pos(self):
        return self.rules.goal_pos

    def enemy_cells(self):
        return [(e[0], e[1]) for e in self.enemies]

    def __repr__(self):
        return (f"GameState(avatar={self.avatar}, tick={self.tick}, "
                f"score={self.score}, outcome={self.outcome.name}, "
                f"enemies={len(self.enemies)})")


def _enemy_move_map(grid, width, height):
    """moves[r*width+c] = tuple of neighbor cells an enemy may step into."""
    blocked = (WALL, KEY, GOAL)
    moves = [()] * (width * height)
    for r in range(1, height - 1):
        row = grid[r]
        for c in range(1, width - 1):
            if row[c] == WALL:
                continue
            cands = []
            for dr, dc in DELTAS:
                nr, nc = r + dr, c + dc
                if grid[nr][nc] not in blocked:
                    cands.append((nr, nc))
            moves[r * width + c] = tuple(cands)
    return moves


def initial_state(level, max_ticks: int) -> GameState:
    """Start an episode on `level`: enemies become entities, grid holds terrain."""
    height = level.height
    width = level.width
    enemies = []
    rows_with_key = []
    key_pos = None
    goal_pos = None
    for r in range(height):
        src = level.grid[r]
        row = bytearray(src)
        for c in range(width):
            t = src[c]
            if t in ENEMY_PERIODS:
                period = ENEMY_PERIODS[t]
                enemies.append((r, c, period, period))
                row[c] = FLOOR
            elif t == KEY:
                key_pos = (r, c)
            elif t == GOAL:
                goal_pos = (r, c)
        rows_with_key.append(bytes(row))
    grid_with_key = tuple(rows_with_key)
    kr, kc = key_pos
    nk = list(rows_with_key)
    row = bytearray(nk[kr])
    row[kc] = FLOOR
    nk[kr] = bytes(row)
    grid_without_key = tuple(nk)
    rules = EpisodeRules(
        width, height, grid_with_key, grid_without_key,
        _enemy_move_map(grid_with_key, width, height),
        _enemy_move_map(grid_without_key, width, height),
        key_pos, goal_pos, max_ticks,
    )
    return GameState(rules, grid_with_key, level.avatar, FACING_DOWN, False,
                     0, 0, Outcome.ONGOING, tuple(enemies))


def step(state: GameState, action, rng: Random) -> GameState:
    """Advance one tick: avatar phase, enemy phase, touch and timeout checks.

    Each moving enemy consumes exactly one rng draw, so streams stay aligned
    across states that differ only far from the action.
    """
    if state.outcome is not Outcome.ONGOING:
        raise TerminalStateError("step() on a terminal state")
    rules = state.rules
    grid = state.grid
    ar, ac = state.avatar
    facing = state.facing
    has_key = state.has_key
    score = state.score
    enemies = state.enemies
    outcome = 0

    if action == 5:  # USE: swing at the faced cell
        dr, dc = DELTAS[facing]
        fr, fc = ar + dr, ac + dc
        for i, e in enumerate(enemies):
            if e[0] == fr and e[1] == fc:
                enemies = enemies[:i] + enemies[i + 1:]
                score += KILL_SCORE
                break
    elif action:  # movement: facing always turns, walls block the move
        d = action - 1
        dr, dc = DELTAS[d]
        tr, tc = ar + dr, ac + dc
        facing = d
        cell = grid[tr][tc]
        if cell != WALL:
            ar, ac = tr, tc
            if cell == KEY:
                has_key = True
                score += KEY_SCORE
                grid = rules.grid_without_key
            elif cell == GOAL and has_key:
                score += WIN_SCORE
                outcome = 1

    if outcome == 0 and enemies:
        for e in enemies:
            if e[0] == ar and e[1] == ac:
                outcome = 2
                break

    if outcome == 0 and enemies:
        moves = rules.moves_without_key if has_key else rules.moves_with_key
        width = rules.width
        occupied = set()
        for e in enemies:
            occupied.add((e[0], e[1]))
        moved = []
        for er, ec, period, cd in enemies:
            cd -= 1
            if cd <= 0:
                cd = period
                cands = moves[er * width + ec]
                u = rng.random()
                if cands:
                    tgt = cands[int(u * len(cands))]
                    if tgt not in occupied:
                        occupied.discard((er, ec))
                        occupied.add(tgt)
                        er, ec = tgt
            moved.append((er, ec, period, cd))
        enemies = tuple(moved)
        if (ar, ac) in occupied:
            outcome = 2

    tick = state.tick + 1
    if outcome == 0 and tick >= rules.max_ticks:
        outcome = 2
    return GameState(rules, grid, (ar, ac), facing, has_key, score, tick,
                     _OUTCOMES[outcome], enemies)


def state_value(state: GameState) -> float:
    """Heuristic value: +1e6 on a win, -1e6 on a loss, else the score."""
    o = state.outcome
    if o is Outcome.WIN:
        return WIN_VALUE
    if o is Outcome.LOSS:
        return LOSS_VALUE
    return float(state.score)


@dataclass(frozen=True)
class BudgetSpec:
    """Per-decision planning budget: forward-model calls or wall-clock ms.

    Call counting is the default because it is reproducible; wall-clock mode
    exists for realism experiments and makes runs nondeterministic.
    """

    mode: str = "calls"
    limit: int = 1000

    def __post_init__(self):
        if self.mode not in ("calls", "wallclock"):
            raise ValueError(f"unknown budget mode {self.mode!r}")
        if self.limit <= 0:
            raise ValueError("budget limit must be positive")


class ForwardModel:
    """Budget-counted simulator handle passed to an agent for one decision.

    Simulated steps draw from the agent's random stream, never from the
    environment stream, so planning cannot perturb the real episode.
    """

    __slots__ = ("_rng", "_wallclock", "limit", "calls_used", "_deadline")

    def __init__(self, rng: Random, budget: BudgetSpec):
        self._rng = rng
        self._wallclock = budget.mode == "wallclock"
        self.limit = budget.limit
        self.calls_used = 0
        self._deadline = (time.monotonic() + budget.limit / 1000.0
                          if self._wallclock else 0.0)

    @property
    def remaining(self) -> int:
        if self._wallclock:
            return 1 << 30 if time.monotonic() < self._deadline else 0
        return self.limit - self.calls_used

    def step(self, state: GameState, action) -> GameState:
        if self._wallclock:
            if time.monotonic() >= self._deadline:
                raise BudgetExhausted()
        elif self.calls_used >= self.limit:
            raise BudgetExhausted()
        self.calls_used += 1
        return step(state, action, self._rng)


@dataclass(frozen=True)
class EpisodeResult:
    outcome: Outcome
    final_score: int
    ticks: int
    forward_calls_used: int

    @property
    def won(self) -> bool:
        return self.outcome is Outcome.WIN


@dataclass(frozen=True)
class GameConfig:
    """Episode-level knobs; everything else about the rules is fixed."""

    max_ticks: int = 2000
    budget: BudgetSpec = BudgetSpec()

    def __post_init__(self):
        if self.max_ticks <= 0:
            raise ValueError("max_ticks must be positive")


def run_state_episode(state0: GameState, agent, seed: int,
                      budget: BudgetSpec) -> EpisodeResult:
    """Play one episode from a prepared initial state; pure in its inputs."""
    env_rng = Random(derive_seed(seed, "env"))
    agent_rng = Random(derive_seed(seed, "agent"))
    state = state0
    total_calls = 0
    while state.outcome is Outcome.ONGOING:
        model = ForwardModel(agent_rng, budget)
        action = agent.act(state, model, agent_rng)
        total_calls += model.calls_used
        state = step(state, action, env_rng)
    return EpisodeResult(state.outcome, state.score, state.tick, total_calls)


def run_episode(level, agent, seed: int, max_ticks: int = 2000,
                budget: BudgetSpec = BudgetSpec()) -> EpisodeResult:
    """Play one episode of `agent` on `level`, deterministically in `seed`."""
    return run_state_episode(initial_state(level, max_ticks), agent, seed, budget)
