"""Level genotype: parsing, generation, mutation, behavior features.

A level is a bordered tile grid plus the avatar start cell. Generation and
mutation both guarantee solvability (an A* path avatar->key and key->goal over
non-wall cells; enemies never block pathing since they move).

ASCII format, one char per cell, rows newline-separated, border all walls:
    w  wall        .  floor      A  avatar start
    +  key         g  goal
    1  quick enemy 2  normal enemy 3  slow enemy
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from random import Random

from .game import (ENEMY_TILES, FLOOR, GOAL, KEY, WALL)

CHAR_TO_TILE = {
    "w": WALL,
    ".": FLOOR,
    "+": KEY,
    "g": GOAL,
    "1": ENEMY_TILES[0],
    "2": ENEMY_TILES[1],
    "3": ENEMY_TILES[2],
}
TILE_TO_CHAR = {tile: ch for ch, tile in CHAR_TO_TILE.items()}
AVATAR_CHAR = "A"

# Initial sampling bounds for width/height; mutation and the room-making
# loop may push sizes above the upper bound.
MIN_DIM = 3
MAX_DIM = 9


class LevelError(ValueError):
    """Malformed or unsolvable level; row/col locate the offending cell."""

    def __init__(self, message: str, row: int | None = None, col: int | None = None):
        super().__init__(message)
        self.row = row
        self.col = col


@dataclass(frozen=True)
class Level:
    """Immutable level: `grid` of tile rows (bytes) and the avatar start."""

    grid: tuple
    avatar: tuple

    @property
    def height(self) -> int:
        return len(self.grid)

    @property
    def width(self) -> int:
        return len(self.grid[0])

    def find_tile(self, tile) -> tuple | None:
        for r, row in enumerate(self.grid):
            c = row.find(tile)
            if c >= 0:
                return (r, c)
        return None

    @property
    def key_pos(self) -> tuple:
        return self.find_tile(KEY)

    @property
    def goal_pos(self) -> tuple:
        return self.find_tile(GOAL)

    def enemy_cells(self) -> list:
        return [(r, c) for r, row in enumerate(self.grid)
                for c, t in enumerate(row) if t in ENEMY_TILES]

    @property
    def enemy_count(self) -> int:
        return len(self.enemy_cells())

    @property
    def inner_wall_count(self) -> int:
        return sum(row.count(WALL) for row in self.grid[1:-1]) - 2 * (self.height - 2)

    def to_text(self) -> str:
        lines = []
        ar, ac = self.avatar
        for r, row in enumerate(self.grid):
            chars = [TILE_TO_CHAR[t] for t in row]
            if r == ar:
                chars[ac] = AVATAR_CHAR
            lines.append("".join(chars))
        return "\n".join(lines)


def parse_level(text: str) -> Level:
    """Parse the ASCII format, checking shape, charset, border, and counts."""
    lines = [ln for ln in text.strip("\n").splitlines()]
    if len(lines) < 3:
        raise LevelError(f"level needs at least 3 rows, got {len(lines)}")
    width = len(lines[0])
    if width < 3:
        raise LevelError(f"level needs at least 3 columns, got {width}")
    rows = []
    avatar = None
    counts = {AVATAR_CHAR: 0, "+": 0, "g": 0}
    for r, line in enumerate(lines):
        if len(line) != width:
            raise LevelError(
                f"row {r} has length {len(line)}, expected {width}", row=r)
        row = bytearray(width)
        for c, ch in enumerate(line):
            if ch == AVATAR_CHAR:
                counts[AVATAR_CHAR] += 1
                avatar = (r, c)
                row[c] = FLOOR
                continue
            if ch not in CHAR_TO_TILE:
                raise LevelError(f"unknown tile {ch!r} at ({r},{c})", row=r, col=c)
            if ch in counts:
                counts[ch] += 1
            row[c] = CHAR_TO_TILE[ch]
        rows.append(bytes(row))
    height = len(rows)
    for c in range(width):
        if rows[0][c] != WALL:
            raise LevelError(f"border cell (0,{c}) is not a wall", row=0, col=c)
        if rows[height - 1][c] != WALL:
            raise LevelError(f"border cell ({height - 1},{c}) is not a wall",
                             row=height - 1, col=c)
    for r in range(height):
        if rows[r][0] != WALL:
            raise LevelError(f"border cell ({r},0) is not a wall", row=r, col=0)
        if rows[r][width - 1] != WALL:
            raise LevelError(f"border cell ({r},{width - 1}) is not a wall",
                             row=r, col=width - 1)
    for ch, name in ((AVATAR_CHAR, "avatar"), ("+", "key"), ("g", "goal")):
        if counts[ch] != 1:
            raise LevelError(f"level must contain exactly one {name}, got {counts[ch]}")
    return Level(grid=tuple(rows), avatar=avatar)


def astar_path(grid, start, goal):
    """Shortest 4-connected path over non-wall cells, or None.

    Enemies are passable (they move; only walls are static obstacles).
    Returns the cells after `start` up to and including `goal`, so the length
    of the returned list is the path length in steps. Ties are broken by the
    fixed neighbor order up/down/left/right and FIFO among equal f-scores.
    """
    if start == goal:
        return []
    height = len(grid)
    width = len(grid[0])
    gr, gc = goal

    def h(cell):
        return abs(cell[0] - gr) + abs(cell[1] - gc)

    counter = 0
    open_heap = [(h(start), 0, start)]
    g_score = {start: 0}
    parent = {}
    closed = set()
    while open_heap:
        _, _, cell = heapq.heappop(open_heap)
        if cell == goal:
            path = []
            while cell != start:
                path.append(cell)
                cell = parent[cell]
            path.reverse()
            return path
        if cell in closed:
            continue
        closed.add(cell)
        r, c = cell
        g_next = g_score[cell] + 1
        for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            nr, nc = r + dr, c + dc
            if nr < 0 or nr >= height or nc < 0 or nc >= width:
                continue
            if grid[nr][nc] == WALL:
                continue
            nxt = (nr, nc)
            if g_next < g_score.get(nxt, 1 << 30):
                g_score[nxt] = g_next
                parent[nxt] = cell
                counter += 1
                heapq.heappush(open_heap, (g_next + h(nxt), counter, nxt))
    return None


def is_solvable(level: Level) -> bool:
    """True if paths avatar->key and key->goal both exist."""
    key = level.key_pos
    goal = level.goal_pos
    if key is None or goal is None:
        return False
    return (astar_path(level.grid, level.avatar, key) is not None
            and astar_path(level.grid, key, goal) is not None)


def validate_level(level: Level) -> None:
    """Raise LevelError if the level is not playable (unreachable key/goal)."""
    key = level.key_pos
    goal = level.goal_pos
    if astar_path(level.grid, level.avatar, key) is None:
        raise LevelError("no path from avatar to key")
    if astar_path(level.grid, key, goal) is None:
        raise LevelError("no path from key to goal")


@dataclass(frozen=True)
class BehaviorDescriptor:
    """Where a level sits in behavior space.

    coverage     fraction of interior cells occupied by anything non-floor
                 (inner walls, enemies, key, goal, avatar)
    leniency     number of enemies
    reachability steps avatar->key plus steps key->goal along shortest paths
    """

    coverage: float
    leniency: int
    reachability: int

    def as_tuple(self) -> tuple:
        return (self.coverage, float(self.leniency), float(self.reachability))


def behavior_descriptor(level: Level) -> BehaviorDescriptor:
    height = level.height
    width = level.width
    interior = (width - 2) * (height - 2)
    occupied = 1  # avatar
    for r in range(1, height - 1):
        row = level.grid[r]
        for c in range(1, width - 1):
            if row[c] != FLOOR:
                occupied += 1
    key = level.key_pos
    goal = level.goal_pos
    p1 = astar_path(level.grid, level.avatar, key)
    p2 = astar_path(level.grid, key, goal)
    if p1 is None or p2 is None:
        raise LevelError("descriptor requested for an unsolvable level")
    return BehaviorDescriptor(coverage=occupied / interior,
                              leniency=level.enemy_count,
                              reachability=len(p1) + len(p2))


def _sample_shape(rng: Random):
    """Draw (w, h, e, i) before the room-making loop.

    Width and height are uniform on [3, 9]; the enemy count e is uniform on
    [min(w,h)//2, min(w,h)]; the inner wall count i is drawn the same way
    when min(w,h) > 3, else 0 (on a 3-thin level any inner wall would almost
    surely seal the corridor).
    """
    w = rng.randint(MIN_DIM, MAX_DIM)
    h = rng.randint(MIN_DIM, MAX_DIM)
    m = min(w, h)
    e = rng.randint(m // 2, m)
    i = rng.randint(m // 2, m) if m > 3 else 0
    return w, h, e, i


def _interior_cells(width, height):
    return [(r, c) for r in range(1, height - 1) for c in range(1, width - 1)]


def _bordered_grid(width, height):
    full = bytes([WALL]) * width
    mid = bytes([WALL]) + bytes([FLOOR]) * (width - 2) + bytes([WALL])
    return [bytearray(full)] + [bytearray(mid) for _ in range(height - 2)] + [bytearray(full)]


def random_solution(rng: Random) -> Level:
    """Generate a random solvable level.

    Samples shape and occupant counts, grows the grid until everything fits
    (e + i + 3 <= interior area), places avatar/key/goal then enemies at
    random, and finally scatters inner walls only on cells not used by the
    avatar->key and key->goal shortest paths, which keeps the level solvable
    by construction.
    """
    w, h, e, i = _sample_shape(rng)
    while i + e + 3 > (w - 2) * (h - 2):
        if rng.random() < 0.5:
            h += 1
        else:
            w += 1
    rows = _bordered_grid(w, h)
    avatar, key, goal = rng.sample(_interior_cells(w, h), 3)
    rows[key[0]][key[1]] = KEY
    rows[goal[0]][goal[1]] = GOAL
    free = [cell for cell in _interior_cells(w, h)
            if cell not in (avatar, key, goal)]
    for _ in range(e):
        pos = free.pop(rng.randrange(len(free)))
        rows[pos[0]][pos[1]] = ENEMY_TILES[rng.randrange(3)]
    grid = tuple(bytes(r) for r in rows)
    path_cells = set(astar_path(grid, avatar, key))
    path_cells.update(astar_path(grid, key, goal))
    available = [cell for cell in free if cell not in path_cells]
    for pos in rng.sample(available, min(len(available), i)):
        rows[pos[0]][pos[1]] = WALL
    return Level(grid=tuple(bytes(r) for r in rows), avatar=avatar)


def _transposed(rows, avatar):
    flipped = [bytearray(col) for col in zip(*rows)]
    return flipped, (avatar[1], avatar[0])


def _level_from(rows, avatar) -> Level:
    return Level(grid=tuple(bytes(r) for r in rows), avatar=avatar)


def _protected_rows(rows, avatar):
    """Row indices that hold the avatar, key, or goal (never removable)."""
    protected = {avatar[0]}
    for r, row in enumerate(rows):
        if KEY in row or GOAL in row:
            protected.add(r)
    return protected


def _mutate_rows(rows, avatar, rng):
    """Add or remove one row (caller transposes for columns).

    Added rows are all floor, which cannot disconnect anything; removals are
    restricted to rows without avatar/key/goal and are reverted if they break
    the avatar->key->goal connectivity.
    """
    height = len(rows)
    width = len(rows[0])
    if rng.random() < 0.5:  # add
        at = rng.randint(1, height - 1)
        new_row = bytearray(bytes([WALL]) + bytes([FLOOR]) * (width - 2) + bytes([WALL]))
        rows = rows[:at] + [new_row] + rows[at:]
        if avatar[0] >= at:
            avatar = (avatar[0] + 1, avatar[1])
        return rows, avatar
    if height <= MIN_DIM:
        return rows, avatar
    protected = _protected_rows(rows, avatar)
    candidates = [r for r in range(1, height - 1) if r not in protected]
    if not candidates:
        return rows, avatar
    at = candidates[rng.randrange(len(candidates))]
    shrunk = rows[:at] + rows[at + 1:]
    new_avatar = (avatar[0] - 1, avatar[1]) if avatar[0] > at else avatar
    if is_solvable(_level_from(shrunk, new_avatar)):
        return shrunk, new_avatar
    return rows, avatar


def _free_floor_cells(rows, avatar):
    return [(r, c) for r in range(1, len(rows) - 1)
            for c in range(1, len(rows[0]) - 1)
            if rows[r][c] == FLOOR and (r, c) != avatar]


def random_variation(level: Level, rng: Random) -> Level:
    """Mutate a level: one row/column change, then +/-2 enemies, then +/-2 walls.

    Each sub-step is skipped when it cannot apply, and every structural change
    is checked to keep avatar->key->goal connected, so the output is always
    solvable. One call changes at most one row or column, two enemies, and
    two walls.
    """
    rows = [bytearray(r) for r in level.grid]
    avatar = level.avatar

    # 1. grow or shrink by one row or column
    if rng.random() < 0.5:
        rows, avatar = _mutate_rows(rows, avatar, rng)
    else:
        rows, avatar = _transposed(rows, avatar)
        rows, avatar = _mutate_rows(rows, avatar, rng)
        rows, avatar = _transposed(rows, avatar)

    # 2. add or remove up to two enemies
    delta = rng.randint(-2, 2)
    if delta > 0:
        free = _free_floor_cells(rows, avatar)
        for _ in range(min(delta, len(free))):
            pos = free.pop(rng.randrange(len(free)))
            rows[pos[0]][pos[1]] = ENEMY_TILES[rng.randrange(3)]
    elif delta < 0:
        cells = [(r, c) for r in range(len(rows)) for c in range(len(rows[0]))
                 if rows[r][c] in ENEMY_TILES]
        for _ in range(min(-delta, len(cells))):
            pos = cells.pop(rng.randrange(len(cells)))
            rows[pos[0]][pos[1]] = FLOOR

    # 3. add or remove up to two inner walls, never breaking connectivity
    delta = rng.randint(-2, 2)
    if delta > 0:
        for _ in range(delta):
            free = _free_floor_cells(rows, avatar)
            rng.shuffle(free)
            for pos in free:
                rows[pos[0]][pos[1]] = WALL
                if is_solvable(_level_from(rows, avatar)):
                    break
                rows[pos[0]][pos[1]] = FLOOR
    elif delta < 0:
        inner = [(r, c) for r in range(1, len(rows) - 1)
                 for c in range(1, len(rows[0]) - 1) if rows[r][c] == WALL]
        for _ in range(min(-delta, len(inner))):
            pos = inner.pop(rng.randrange(len(inner)))
            rows[pos[0]][pos[1]] = FLOOR

    return _level_from(rows, avatar)
