from random import Random

import pytest

from oracles import bfs_path_length, bfs_solvable
from leveladapt.game import ENEMY_TILES, FLOOR, WALL
from leveladapt.levels import (BehaviorDescriptor, Level, LevelError,
                               _sample_shape, astar_path, behavior_descriptor,
                               is_solvable, parse_level, random_solution,
                               random_variation, validate_level)


class TestParsing:
    def test_round_trip(self):
        text = "wwwww\nw.1.w\nwA.+w\nw..gw\nwwwww"
        level = parse_level(text)
        assert level.to_text() == text
        assert parse_level(level.to_text()) == level

    def test_counts(self):
        level = parse_level("wwwww\nw.1.w\nwA.+w\nw.wgw\nwwwww")
        assert level.enemy_count == 1
        assert level.inner_wall_count == 1
        assert level.key_pos == (2, 3)
        assert level.goal_pos == (3, 3)
        assert level.avatar == (2, 1)

    @pytest.mark.parametrize("text,row,col", [
        ("wwwww\nwA+gw\nww.ww", 2, 2),   # hole in the bottom border
        ("w.www\nwA+gw\nwwwww", 0, 1),   # hole in the top border
        ("wwwww\n.A+gw\nwwwww", 1, 0),   # hole on the left
    ])
    def test_border_errors_carry_location(self, text, row, col):
        with pytest.raises(LevelError) as err:
            parse_level(text)
        assert err.value.row == row
        assert err.value.col == col

    def test_unknown_char_location(self):
        with pytest.raises(LevelError) as err:
            parse_level("wwwww\nwA?gw\nwwwww")
        assert (err.value.row, err.value.col) == (1, 2)

    def test_missing_pieces_rejected(self):
        with pytest.raises(LevelError):
            parse_level("wwwww\nwA.gw\nwwwww")  # no key
        with pytest.raises(LevelError):
            parse_level("wwwww\nwA+.w\nwwwww")  # no goal
        with pytest.raises(LevelError):
            parse_level("wwwwww\nwA+gAw\nwwwwww")  # two avatars

    def test_ragged_rows_rejected(self):
        with pytest.raises(LevelError) as err:
            parse_level("wwwww\nwA+gww\nwwwww")
        assert err.value.row == 1

    def test_unsolvable_is_parseable_but_invalid(self):
        level = parse_level("wwwww\nwAw+w\nwwwgw\nwwwww")
        with pytest.raises(LevelError):
            validate_level(level)


class TestAStar:
    def test_adjacent_cells_path_length_one(self):
        level = parse_level("wwwww\nwA+gw\nwwwww")
        path = astar_path(level.grid, (1, 1), (1, 2))
        assert path == [(1, 2)]

    def test_same_cell_empty_path(self):
        level = parse_level("wwwww\nwA+gw\nwwwww")
        assert astar_path(level.grid, (1, 1), (1, 1)) == []

    def test_disconnected_returns_none(self):
        level = parse_level("wwwww\nwAw+w\nwwwgw\nwwwww")
        assert astar_path(level.grid, (1, 1), (1, 3)) is None

    def test_open_7x7_corners_match_manhattan(self):
        rows = ["wwwwwww", "wA....w", "w.....w", "w.....w", "w.....w",
                "w...+gw", "wwwwwww"]
        level = parse_level("\n".join(rows))
        path = astar_path(level.grid, (1, 1), (5, 5))
        assert len(path) == 8
        assert len(path) == bfs_path_length(level.grid, (1, 1), (5, 5))

    def test_matches_bfs_on_random_levels(self):
        rng = Random(42)
        for _ in range(80):
            level = random_solution(rng)
            key, goal = level.key_pos, level.goal_pos
            for a, b in ((level.avatar, key), (key, goal), (level.avatar, goal)):
                path = astar_path(level.grid, a, b)
                oracle = bfs_path_length(level.grid, a, b)
                assert (path is None) == (oracle is None)
                if path is not None:
                    assert len(path) == oracle

    def test_enemies_are_passable(self):
        level = parse_level("wwwww\nwA1+w\nwwwgw\nwwwww")
        assert astar_path(level.grid, (1, 1), (1, 3)) == [(1, 2), (1, 3)]


class TestRandomSolution:
    def test_sampled_bounds(self):
        rng = Random(7)
        for _ in range(2000):
            w, h, e, i = _sample_shape(rng)
            assert 3 <= w <= 9 and 3 <= h <= 9
            m = min(w, h)
            assert m // 2 <= e <= m
            if m > 3:
                assert m // 2 <= i <= m
            else:
                assert i == 0

    def test_levels_always_solvable(self):
        rng = Random(3)
        for _ in range(400):
            level = random_solution(rng)
            assert bfs_solvable(level)

    def test_everything_fits(self):
        rng = Random(13)
        for _ in range(200):
            level = random_solution(rng)
            interior = (level.width - 2) * (level.height - 2)
            occupants = 3 + level.enemy_count + level.inner_wall_count
            assert occupants <= interior

    def test_structure_counts(self):
        rng = Random(99)
        for _ in range(100):
            level = random_solution(rng)
            # exactly one avatar/key/goal is enforced by the parser
            assert parse_level(level.to_text()) == level


class TestRandomVariation:
    def test_chain_stays_solvable(self):
        rng = Random(21)
        level = random_solution(rng)
        for _ in range(300):
            level = random_variation(level, rng)
            assert bfs_solvable(level)
            # avatar/key/goal survive every mutation
            assert parse_level(level.to_text()) == level

    def test_mutation_locality(self):
        rng = Random(31)
        level = random_solution(rng)
        for _ in range(200):
            before = level
            level = random_variation(level, rng)
            dw = level.width - before.width
            dh = level.height - before.height
            assert (dw, dh) in {(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)}
            if (dw, dh) == (0, 0):
                assert abs(level.enemy_count - before.enemy_count) <= 2
                assert abs(level.inner_wall_count - before.inner_wall_count) <= 2

    def test_min_size_never_violated(self):
        rng = Random(8)
        level = parse_level("wwww\nwA+w\nw.gw\nwwww")
        for _ in range(100):
            level = random_variation(level, rng)
            assert level.width >= 3 and level.height >= 3
            assert bfs_solvable(level)


class TestBehaviorDescriptor:
    def test_leniency_counts_enemies(self):
        level = parse_level("wwwwww\nwA1.2w\nw.3.+w\nw...gw\nwwwwww")
        assert behavior_descriptor(level).leniency == 3

    def test_minimal_reachability(self):
        level = parse_level("www\nwAw\nw+w\nwgw\nwww")
        d = behavior_descriptor(level)
        assert d.reachability == 2

    def test_coverage_open_5x5_interior(self):
        rows = ["wwwwwww", "wA....w", "w.....w", "w..+..w", "w.....w",
                "w....gw", "wwwwwww"]
        d = behavior_descriptor(parse_level("\n".join(rows)))
        assert d.coverage == pytest.approx(3 / 25)
        assert d.leniency == 0
        assert d.reachability == bfs_path_length(
            parse_level("\n".join(rows)).grid, (1, 1), (3, 3)) + bfs_path_length(
            parse_level("\n".join(rows)).grid, (3, 3), (5, 5))

    def test_coverage_in_unit_interval(self):
        rng = Random(17)
        for _ in range(100):
            d = behavior_descriptor(random_solution(rng))
            assert 0.0 <= d.coverage <= 1.0
            assert d.reachability >= 2
            assert d.leniency >= 0
