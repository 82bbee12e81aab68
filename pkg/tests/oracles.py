"""Independent reference implementations used to check the real ones.

Everything here is deliberately written the dumb way (plain BFS, explicit
matrix inverse, dict bookkeeping, exhaustive search) and shares no code with
the package paths it verifies.
"""

from collections import deque

import numpy as np

from leveladapt.game import WALL
from leveladapt.game import ALL_ACTIONS, Outcome, state_value, step


def bfs_path_length(grid, start, goal):
    """Steps from start to goal over non-wall cells, or None."""
    if start == goal:
        return 0
    height, width = len(grid), len(grid[0])
    seen = {start}
    queue = deque([(start, 0)])
    while queue:
        (r, c), d = queue.popleft()
        for nr, nc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
            if 0 <= nr < height and 0 <= nc < width and grid[nr][nc] != WALL:
                if (nr, nc) == goal:
                    return d + 1
                if (nr, nc) not in seen:
                    seen.add((nr, nc))
                    queue.append(((nr, nc), d + 1))
    return None


def bfs_solvable(level):
    """Avatar->key and key->goal both reachable, by BFS."""
    key, goal = level.key_pos, level.goal_pos
    return (bfs_path_length(level.grid, level.avatar, key) is not None
            and bfs_path_length(level.grid, key, goal) is not None)


def dense_gp_reference(kernel, X_obs, f_obs, mu0_obs, x_query, mu0_query):
    """Posterior mean/variance by explicit matrix inversion (no Cholesky)."""
    from leveladapt.gp import matern52

    t = len(X_obs)
    K = np.empty((t, t))
    for i in range(t):
        for j in range(t):
            K[i, j] = matern52(X_obs[i], X_obs[j], kernel)
    K += kernel.noise_variance * np.eye(t)
    K_inv = np.linalg.inv(K)
    k_vec = np.array([matern52(x_query, X_obs[i], kernel) for i in range(t)])
    resid = np.asarray(f_obs, dtype=float) - np.asarray(mu0_obs, dtype=float)
    mean = mu0_query + k_vec @ K_inv @ resid
    var = matern52(x_query, x_query, kernel) - k_vec @ K_inv @ k_vec
    return float(mean), float(var)


def replay_archive(candidates):
    """Replay a candidate stream through the plain update rule:
    keep the best performance per cell, replacing only on strict improvement.
    Returns {cell: (performance, level_text)}."""
    best = {}
    for cand in candidates:
        cell = tuple(cand.cell)
        if cell not in best or best[cell][0] < cand.performance:
            best[cell] = (cand.performance, cand.level_text)
    return best


def exhaustive_best_first_action(state, depth, samples=1, rng=None):
    """Best achievable value within `depth` plies by exhaustive search.

    For deterministic positions (no enemies) one sample suffices; with
    enemies, values are averaged over `samples` sampled futures. Returns
    (best_value, first_action_in_fixed_order).
    """
    from random import Random

    rng = rng or Random(0)

    def rec(s, d):
        if s.outcome is not Outcome.ONGOING or d == 0:
            return state_value(s)
        return max(rec(step(s, a, rng), d - 1) for a in ALL_ACTIONS)

    best_action, best_value = None, -float("inf")
    for action in ALL_ACTIONS:
        total = 0.0
        for _ in range(samples):
            total += rec(step(state, action, rng), depth - 1)
        value = total / samples
        if value > best_value:
            best_value, best_action = value, action
    return best_value, best_action
