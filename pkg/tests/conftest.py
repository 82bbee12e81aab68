import pytest

from leveladapt.config import desk_scale_config


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "slow: desk-scale runs (minutes); deselect with -m 'not slow'")


@pytest.fixture(scope="session")
def desk_cfg():
    return desk_scale_config(seed=11)


@pytest.fixture(scope="session")
def desk_archives(desk_cfg):
    """Desk-scale archives for the agents the acceptance suite exercises.

    Evolved once per session; DoNothing/Random/OSLA are cheap, GTS dominates
    the wall-clock (full planning budget every tick).
    """
    from leveladapt.agents import make_agent
    from leveladapt.archive import run_map_elites
    from leveladapt.seeds import derive_seed

    archives = {}
    for name in ("DoNothing", "Random", "OSLA", "GTS"):
        result = run_map_elites(
            make_agent(name), desk_cfg.map_elites,
            derive_seed(desk_cfg.seed, "evolve", name),
            grid=desk_cfg.grid, game=desk_cfg.game, agent_name=name,
            config_fingerprint=desk_cfg.fingerprint(),
            game_fingerprint=desk_cfg.game_fingerprint())
        archives[name] = result
    return archives
