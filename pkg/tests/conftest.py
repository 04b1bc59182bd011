import pytest

from src.dither.dither_plan import DitherPlan
from src.game.quadratic_game import PlayerPayoff, QuadraticGame, duopoly_from_market
from src.sim.scenario import ScenarioConfig
from src.trigger.event_trigger import TriggerPolicy
from src.utils.scenario_loader import ScenarioLoader


@pytest.fixture
def benchmark_game():
    return duopoly_from_market(100, 0.2, 30, 10)


@pytest.fixture
def benchmark_config():
    return ScenarioLoader().load("benchmark")


@pytest.fixture
def decoupled_game():
    # theta* = (1, 2), J(theta*) = (0, 0), H = -I
    return QuadraticGame(
        p1=PlayerPayoff(own_quad=-1.0, other_quad=0.0, cross=0.0, lin_own=1.0, lin_other=0.0, offset=-0.5),
        p2=PlayerPayoff(own_quad=-1.0, other_quad=0.0, cross=0.0, lin_own=2.0, lin_other=0.0, offset=-2.0),
    )


@pytest.fixture
def decoupled_config(decoupled_game):
    return ScenarioConfig(
        game=decoupled_game,
        dither=DitherPlan(a=(0.1, 0.1), omega=(27, 22)),
        policy=TriggerPolicy(sigma=(0.5, 0.5)),
        gains=(1.0, 1.0),
        theta_hat0=(2.0, 1.0),
        dt=1e-3,
        t_final=20.0,
        record_stride=10,
        name="decoupled",
    )
