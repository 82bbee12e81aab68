from random import Random

import pytest

from oracles import replay_archive
from leveladapt.agents import make_agent
from leveladapt.archive import (Archive, ArchiveGrid, Elite, MapElitesParams,
                                difficulty_bands, evaluate_level, performance,
                                run_map_elites)
from leveladapt.game import BudgetSpec, GameConfig
from leveladapt.levels import BehaviorDescriptor, behavior_descriptor, parse_level

MICRO_GAME = GameConfig(max_ticks=100, budget=BudgetSpec("calls", 100))
TINY = parse_level("wwwww\nwA+gw\nwwwww")


class TestPerformanceFunction:
    def test_anchor_values(self):
        assert abs(performance(0.0) - 0.0) <= 1e-12
        assert abs(performance(0.6) - 1.0) <= 1e-12
        assert abs(performance(1.0) - 0.0) <= 1e-12
        assert abs(performance(0.8) - 0.75) <= 1e-12

    def test_branch_continuity_at_target(self):
        linear = (5.0 / 3.0) * 0.6
        quadratic = -6.25 * 0.6 * 0.6 + 7.5 * 0.6 - 1.25
        assert abs(linear - quadratic) <= 1e-12
        assert abs(performance(0.6) - 1.0) <= 1e-12

    def test_threshold_window_roots(self):
        # p(w) >= 0.75 exactly for w in [0.45, 0.8]
        assert abs(performance(0.45) - 0.75) <= 1e-12
        assert abs(performance(0.8) - 0.75) <= 1e-12
        assert performance(0.449) < 0.75
        assert performance(0.801) < 0.75
        assert performance(0.5) > 0.75

    def test_forty_rollout_target(self):
        assert performance(24 / 40) == pytest.approx(1.0, abs=1e-12)

    def test_bounded_and_validated(self):
        for i in range(101):
            assert 0.0 <= performance(i / 100) <= 1.0
        with pytest.raises(ValueError):
            performance(-0.01)
        with pytest.raises(ValueError):
            performance(1.01)


class TestEvaluateLevel:
    def test_do_nothing_is_zero(self):
        for n in (1, 5, 40):
            win_rate, perf = evaluate_level(TINY, make_agent("DoNothing"), n, 7,
                                            MICRO_GAME)
            assert (win_rate, perf) == (0.0, 0.0)

    def test_deterministic(self):
        a = evaluate_level(TINY, make_agent("Random"), 10, 3, MICRO_GAME)
        b = evaluate_level(TINY, make_agent("Random"), 10, 3, MICRO_GAME)
        assert a == b

    def test_seed_changes_estimate_source(self):
        tight = GameConfig(max_ticks=5, budget=BudgetSpec("calls", 100))
        values = {evaluate_level(TINY, make_agent("Random"), 10, s, tight)
                  for s in range(6)}
        assert len(values) > 1

    def test_sure_winner_scores_zero_performance(self):
        win_rate, perf = evaluate_level(TINY, make_agent("OSLA"), 10, 0, MICRO_GAME)
        assert win_rate == 1.0
        assert perf == 0.0

    def test_rollout_count_validated(self):
        with pytest.raises(ValueError):
            evaluate_level(TINY, make_agent("DoNothing"), 0, 0, MICRO_GAME)


class TestCellIndex:
    GRID = ArchiveGrid()

    def d(self, cov, len_, reach):
        return BehaviorDescriptor(coverage=cov, leniency=len_, reachability=reach)

    def test_range_minima(self):
        assert self.GRID.cell_index(self.d(0.0, 0, 2)) == (0, 0, 0)

    def test_range_maxima_clamp(self):
        assert self.GRID.cell_index(self.d(1.0, 9, 40)) == (9, 9, 9)

    def test_leniency_clamps_above_nine(self):
        assert self.GRID.cell_index(self.d(0.0, 12, 2))[1] == 9

    def test_leniency_one_bin_per_count(self):
        for count in range(10):
            assert self.GRID.cell_index(self.d(0.0, count, 2))[1] == count

    def test_out_of_range_reachability_clamps(self):
        assert self.GRID.cell_index(self.d(0.5, 3, 400))[2] == 9
        assert self.GRID.cell_index(self.d(0.5, 3, 1))[2] == 0

    def test_centroids(self):
        assert self.GRID.centroid((0, 0, 0)) == pytest.approx((0.05, 0.45, 3.9))
        assert self.GRID.normalized_centroid((9, 9, 9)) == pytest.approx(
            (0.95, 0.95, 0.95))


def _archive_with(win_rates):
    archive = Archive(ArchiveGrid(), "stub")
    for i, w in enumerate(win_rates):
        archive.cells[(i, 0, 0)] = Elite(TINY, w, performance(w), 1)
    return archive


class TestArchiveBookkeeping:
    def test_strict_improvement_rule(self):
        archive = Archive(ArchiveGrid(), "stub")
        cell = (1, 2, 3)
        first = Elite(TINY, 0.5, 0.8, 1)
        assert archive.add_if_better(cell, first)
        equal = Elite(TINY, 0.1, 0.8, 1)
        assert not archive.add_if_better(cell, equal)
        assert archive.cells[cell] is first
        better = Elite(TINY, 0.6, 0.9, 1)
        assert archive.add_if_better(cell, better)
        assert archive.cells[cell] is better

    def test_best_cell_tiebreak(self):
        archive = Archive(ArchiveGrid(), "stub")
        archive.cells[(3, 0, 0)] = Elite(TINY, 0.6, 1.0, 1)
        archive.cells[(1, 0, 0)] = Elite(TINY, 0.6, 1.0, 1)
        archive.cells[(2, 0, 0)] = Elite(TINY, 0.1, 0.2, 1)
        assert archive.best_cell() == (1, 0, 0)

    def test_round_trip_dict(self):
        archive = _archive_with([0.0, 0.45, 0.8])
        archive.config_fingerprint = "cafe"
        clone = Archive.from_dict(archive.to_dict())
        assert clone.agent_name == "stub"
        assert clone.config_fingerprint == "cafe"
        assert clone.occupied() == archive.occupied()
        for cell in archive.occupied():
            a, b = archive.cells[cell], clone.cells[cell]
            assert (a.win_rate, a.performance, a.eval_count) == \
                (b.win_rate, b.performance, b.eval_count)
            assert a.level == b.level

    def test_bad_format_rejected(self):
        with pytest.raises(ValueError):
            Archive.from_dict({"format": "something-else"})


class TestMapElites:
    PARAMS = MapElitesParams(n_generations=1, n_init=20, iters_per_gen=30,
                             rollouts=5)

    def test_replay_oracle_reproduces_archive(self):
        result = run_map_elites(make_agent("Random"), self.PARAMS, seed=5,
                                game=MICRO_GAME)
        expected = replay_archive(result.candidates)
        assert set(expected) == set(result.archive.cells)
        for cell, (perf, level_text) in expected.items():
            elite = result.archive.cells[cell]
            assert elite.performance == perf
            assert elite.level.to_text() == level_text

    def test_elites_map_to_their_own_cells(self):
        result = run_map_elites(make_agent("Random"), self.PARAMS, seed=6,
                                game=MICRO_GAME)
        for cell, elite in result.archive.cells.items():
            d = behavior_descriptor(elite.level)
            assert result.archive.grid.cell_index(d) == cell

    def test_candidate_stream_shape(self):
        result = run_map_elites(make_agent("Random"), self.PARAMS, seed=7,
                                game=MICRO_GAME)
        assert len(result.candidates) == self.PARAMS.total_candidates
        gens = [c.generation for c in result.candidates]
        assert gens[:20] == [0] * 20
        assert all(g >= 1 for g in gens[20:])
        assert all(0.0 <= c.win_rate <= 1.0 for c in result.candidates)

    def test_monotone_occupancy_and_performance(self):
        result = run_map_elites(make_agent("Random"), self.PARAMS, seed=8,
                                game=MICRO_GAME)
        best = {}
        occupancy = 0
        for cand in result.candidates:
            if cand.accepted:
                assert cand.cell not in best or best[cand.cell] < cand.performance
                best[cand.cell] = cand.performance
            occupancy = max(occupancy, len(best))
        assert occupancy == len(result.archive)

    def test_deterministic(self):
        a = run_map_elites(make_agent("Random"), self.PARAMS, seed=9, game=MICRO_GAME)
        b = run_map_elites(make_agent("Random"), self.PARAMS, seed=9, game=MICRO_GAME)
        assert a.archive.to_dict() == b.archive.to_dict()
        assert a.candidates == b.candidates


class TestDifficultyBands:
    def test_three_elites_example(self):
        archive = _archive_with([0.0, 0.6, 1.0])
        assert difficulty_bands(archive) == (1, 1, 0, 0, 1)

    def test_edges_belong_to_easier_band(self):
        archive = _archive_with([0.8, 0.6, 0.4, 0.2])
        assert difficulty_bands(archive) == (1, 1, 1, 1, 0)

    def test_empty_archive(self):
        archive = Archive(ArchiveGrid(), "stub")
        assert difficulty_bands(archive) == (0, 0, 0, 0, 0)

    def test_single_boundary_case(self):
        archive = _archive_with([0.6])
        assert difficulty_bands(archive) == (0, 1, 0, 0, 0)
