"""The eight planning agents, from stand-still to open-loop tree search.

Every agent implements act(state, model, rng) -> Action. The ForwardModel
counts simulated steps against the per-decision budget; agents check
model.remaining before simulating and additionally catch BudgetExhausted, so
they always return the best action found so far instead of erroring out.
Given the same (state, seed, budget) every agent is deterministic.
"""

from __future__ import annotations

import heapq
import math
from random import Random

from .game import (ALL_ACTIONS, Action, BudgetExhausted, ForwardModel,
                   GameState, Outcome, state_value)

# Tiebreak weight for "move toward the current objective"; small enough that
# any score difference dominates (max grids keep distances well under 1000).
_DIST_EPS = 1e-3


def _uniform_action(rng: Random) -> Action:
    return ALL_ACTIONS[int(rng.random() * 6)]


class Agent:
    kind = "?"
    params: dict = {}

    def act(self, state: GameState, model: ForwardModel, rng: Random) -> Action:
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}()"


class DoNothingAgent(Agent):
    """Stands still."""

    kind = "DoNothing"

    def act(self, state, model, rng):
        return Action.NIL


class RandomAgent(Agent):
    """Uniform random action each tick."""

    kind = "Random"

    def act(self, state, model, rng):
        return _uniform_action(rng)


def _osla_value(succ: GameState) -> float:
    """Successor value: game value plus a pull toward the key (then goal)."""
    v = state_value(succ)
    if succ.outcome is not Outcome.ONGOING:
        return v
    target = succ.key_pos if not succ.has_key else succ.goal_pos
    ar, ac = succ.avatar
    return v - _DIST_EPS * (abs(ar - target[0]) + abs(ac - target[1]))


class OSLAAgent(Agent):
    """One-step lookahead on the score heuristic.

    Samples each action's successor once and picks the best: kills pay off
    immediately through the score, deaths are avoided through the loss value,
    and exact ties are broken toward whatever currently carries score (the
    key, then the goal) by straight-line distance. The straight-line pull is
    deliberately blind to walls, so the agent gets stuck in concave pockets
    on long levels; it reacts only to what one step can reach.
    """

    kind = "OSLA"

    def act(self, state, model, rng):
        best_action = Action.NIL
        best_value = -math.inf
        try:
            for action in ALL_ACTIONS:
                if model.remaining < 1:
                    break
                value = _osla_value(model.step(state, action))
                if value > best_value:
                    best_value = value
                    best_action = action
        except BudgetExhausted:
            pass
        return best_action


class GTSAgent(Agent):
    """Greedy best-first tree search on the raw state score.

    Expands the highest-value frontier node (FIFO among ties) until the
    budget runs out, then returns the first action of the best state seen.
    """

    kind = "GTS"

    def act(self, state, model, rng):
        best_action = Action.NIL
        best_value = -math.inf
        counter = 0
        frontier = []  # (-value, insertion, first_action, state)
        try:
            for action in ALL_ACTIONS:
                if model.remaining < 1:
                    raise BudgetExhausted()
                succ = model.step(state, action)
                value = state_value(succ)
                if value > best_value:
                    best_value = value
                    best_action = action
                if succ.outcome is Outcome.ONGOING:
                    counter += 1
                    heapq.heappush(frontier, (-value, counter, action, succ))
            while frontier and model.remaining >= 1:
                _, _, first, node = heapq.heappop(frontier)
                for action in ALL_ACTIONS:
                    if model.remaining < 1:
                        break
                    succ = model.step(node, action)
                    value = state_value(succ)
                    if value > best_value:
                        best_value = value
                        best_action = first
                    if succ.outcome is Outcome.ONGOING:
                        counter += 1
                        heapq.heappush(frontier, (-value, counter, first, succ))
        except BudgetExhausted:
            pass
        return best_action


class RSAgent(Agent):
    """Random search over playtraces.

    Rolls out up to n_traces random action sequences of fixed depth and
    follows the first step of the best final state.
    """

    kind = "RS"

    def __init__(self, n_traces: int = 50, depth: int = 10):
        self.n_traces = n_traces
        self.depth = depth
        self.params = {"n_traces": n_traces, "depth": depth}

    def act(self, state, model, rng):
        best_action = Action.NIL
        best_value = -math.inf
        try:
            for _ in range(self.n_traces):
                if model.remaining < 1:
                    break
                node = state
                first = None
                for _ in range(self.depth):
                    if model.remaining < 1:
                        break
                    action = _uniform_action(rng)
                    if first is None:
                        first = action
                    node = model.step(node, action)
                    if node.outcome is not Outcome.ONGOING:
                        break
                value = state_value(node)
                if first is not None and value > best_value:
                    best_value = value
                    best_action = first
        except BudgetExhausted:
            pass
        return best_action


class RHEAAgent(Agent):
    """Rolling-horizon evolution of action sequences.

    Vanilla setup: fixed-length sequences, fitness is the value of the state
    the sequence reaches, tournament selection, one-point crossover, per-gene
    mutation, one elite, generations until the budget is spent.
    """

    kind = "RHEA"

    def __init__(self, population: int = 10, horizon: int = 10,
                 mutation_rate: float = 0.2, elitism: int = 1):
        self.population = population
        self.horizon = horizon
        self.mutation_rate = mutation_rate
        self.elitism = elitism
        self.params = {"population": population, "horizon": horizon,
                       "mutation_rate": mutation_rate, "elitism": elitism}

    def _evaluate(self, state, model, seq) -> float:
        node = state
        for action in seq:
            if model.remaining < 1:
                break
            node = model.step(node, action)
            if node.outcome is not Outcome.ONGOING:
                break
        return state_value(node)

    def act(self, state, model, rng):
        best_seq = None
        best_fit = -math.inf
        scored = []
        try:
            for _ in range(self.population):
                seq = [_uniform_action(rng) for _ in range(self.horizon)]
                fit = self._evaluate(state, model, seq)
                scored.append((fit, seq))
                if fit > best_fit:
                    best_fit, best_seq = fit, seq
            while model.remaining >= self.horizon:
                scored.sort(key=lambda sf: sf[0], reverse=True)
                nxt = scored[:self.elitism]
                while len(nxt) < self.population and model.remaining >= 1:
                    parents = []
                    for _ in range(2):
                        a = scored[int(rng.random() * len(scored))]
                        b = scored[int(rng.random() * len(scored))]
                        parents.append(a if a[0] >= b[0] else b)
                    cut = 1 + int(rng.random() * (self.horizon - 1))
                    child = parents[0][1][:cut] + parents[1][1][cut:]
                    child = [_uniform_action(rng) if rng.random() < self.mutation_rate
                             else gene for gene in child]
                    fit = self._evaluate(state, model, child)
                    nxt.append((fit, child))
                    if fit > best_fit:
                        best_fit, best_seq = fit, child
                scored = nxt
        except BudgetExhausted:
            pass
        return best_seq[0] if best_seq else Action.NIL


class _TreeNode:
    __slots__ = ("state", "parent", "action", "children", "untried", "visits", "total")

    def __init__(self, state, parent, action):
        self.state = state
        self.parent = parent
        self.action = action
        self.children = []
        self.untried = list(ALL_ACTIONS) if (
            state is None or state.outcome is Outcome.ONGOING) else []
        self.visits = 0
        self.total = 0.0


class MCTSAgent(Agent):
    """Vanilla UCT: tree policy with an exploration bonus, random rollouts
    scored by the game value, rewards normalized to [0,1] within the decision.
    Recommends the most-visited root action.
    """

    kind = "MCTS"

    def __init__(self, exploration: float = math.sqrt(2), rollout_depth: int = 10):
        self.exploration = exploration
        self.rollout_depth = rollout_depth
        self.params = {"exploration": exploration, "rollout_depth": rollout_depth}

    def act(self, state, model, rng):
        root = _TreeNode(state, None, None)
        lo, hi = math.inf, -math.inf
        stalled = 0  # zero-call iterations happen once the tree is all-terminal

        def exploit(node):
            q = node.total / node.visits
            return (q - lo) / (hi - lo) if hi > lo else 0.5

        try:
            while model.remaining >= 1 and stalled < 32:
                used_before = model.calls_used
                node = root
                while not node.untried and node.children:
                    log_n = math.log(node.visits)
                    node = max(
                        node.children,
                        key=lambda ch: exploit(ch) + self.exploration
                        * math.sqrt(log_n / ch.visits))
                if node.untried:
                    action = node.untried.pop(int(rng.random() * len(node.untried)))
                    child = _TreeNode(model.step(node.state, action), node, action)
                    node.children.append(child)
                    node = child
                rollout = node.state
                for _ in range(self.rollout_depth):
                    if rollout.outcome is not Outcome.ONGOING or model.remaining < 1:
                        break
                    rollout = model.step(rollout, _uniform_action(rng))
                value = state_value(rollout)
                lo = min(lo, value)
                hi = max(hi, value)
                while node is not None:
                    node.visits += 1
                    node.total += value
                    node = node.parent
                stalled = stalled + 1 if model.calls_used == used_before else 0
        except BudgetExhausted:
            pass
        if not root.children:
            return Action.NIL
        best = max(root.children, key=lambda ch: (ch.visits, -int(ch.action)))
        return best.action


class _OpenLoopNode:
    __slots__ = ("action", "parent", "children", "untried", "visits", "total",
                 "score")

    def __init__(self, action, parent):
        self.action = action
        self.parent = parent
        self.children = []
        self.untried = list(ALL_ACTIONS)
        self.visits = 0
        self.total = 0.0
        self.score = 0.0


class OLETSAgent(Agent):
    """Open-loop expectimax tree search.

    Nodes store action prefixes, not states; every iteration re-simulates the
    prefix, so node statistics average over the game's randomness. There are
    no rollouts: the value of the reached state backs up directly. The
    in-tree node score blends the empirical mean with the best child score
    (weight `blend`) and selection adds a UCB exploration term; the
    most-visited root action is returned.
    """

    kind = "OLETS"

    def __init__(self, exploration: float = math.sqrt(2), blend: float = 0.5):
        self.exploration = exploration
        self.blend = blend
        self.params = {"exploration": exploration, "blend": blend}

    def act(self, state, model, rng):
        root = _OpenLoopNode(None, None)
        try:
            while model.remaining >= 1:
                node = root
                current = state
                while current.outcome is Outcome.ONGOING:
                    if node.untried:
                        action = node.untried.pop(int(rng.random() * len(node.untried)))
                        current = model.step(current, action)
                        child = _OpenLoopNode(action, node)
                        node.children.append(child)
                        node = child
                        break
                    if not node.children:
                        break
                    log_n = math.log(node.visits + 1)
                    # raw scores: once a line tastes a win it is pressed hard,
                    # which is what buys depth without rollouts
                    node = max(node.children,
                               key=lambda ch: ch.score + self.exploration
                               * math.sqrt(log_n / ch.visits))
                    current = model.step(current, node.action)
                value = state_value(current)
                # bottom-up: each node's score sees its child's fresh score
                while node is not None:
                    node.visits += 1
                    node.total += value
                    mean = node.total / node.visits
                    if node.children:
                        node.score = ((1.0 - self.blend) * mean + self.blend
                                      * max(ch.score for ch in node.children))
                    else:
                        node.score = mean
                    node = node.parent
        except BudgetExhausted:
            pass
        if not root.children:
            return Action.NIL
        best = max(root.children, key=lambda ch: (ch.visits, -int(ch.action)))
        return best.action


AGENT_KINDS = {
    "DoNothing": DoNothingAgent,
    "Random": RandomAgent,
    "OSLA": OSLAAgent,
    "GTS": GTSAgent,
    "RS": RSAgent,
    "RHEA": RHEAAgent,
    "MCTS": MCTSAgent,
    "OLETS": OLETSAgent,
}

_CANONICAL = {name.lower(): name for name in AGENT_KINDS}


def canonical_agent_name(name: str) -> str:
    try:
        return _CANONICAL[name.lower()]
    except KeyError:
        raise ValueError(
            f"unknown agent {name!r}; known agents: {', '.join(AGENT_KINDS)}") from None


def make_agent(name: str, params: dict | None = None) -> Agent:
    """Instantiate an agent by (case-insensitive) name with optional params."""
    cls = AGENT_KINDS[canonical_agent_name(name)]
    return cls(**params) if params else cls()
