import numpy as np
import pytest

from conenav.world import DiscObstacle, Workspace, World, random_world


@pytest.fixture
def single_disc_world():
    return World(
        workspace=Workspace(10.0),
        obstacles=[DiscObstacle(id=1, center=np.array([3.0, 0.0]), radius=1.0)],
    )


@pytest.fixture
def chain_world():
    # two obstacles arranged so the deflection around the first one is
    # itself blocked by the second
    return World(
        workspace=Workspace(12.0),
        obstacles=[
            DiscObstacle(id=1, center=np.array([3.0, 0.0]), radius=1.0),
            DiscObstacle(id=2, center=np.array([6.0, 1.2]), radius=0.8),
        ],
    )


@pytest.fixture
def reference_world():
    return random_world(seed=42, m=5, r0=10.0, keep_clear=[((0.0, 0.0), 1.0)])
