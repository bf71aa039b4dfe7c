"""conenav: quasi-optimal cone-projection navigation in sphere worlds.

Feedback controllers that deflect a nominal attractive field along
obstacle-enclosing cones (map-based and LiDAR-based variants), a tangent
visibility graph shortest-path oracle, an equilibrium analyzer, and a
batch simulation harness. Hot loops run through an optional compiled
extension; a numpy fallback is selected automatically.
"""

from ._kernels import backend
from .controller_map import ControlParams, ControlOutput, control, single_obstacle_control, xi
from .controller_sensor import LidarSpec, UnicycleParams, sensor_control, unicycle_transform
from .simulator import SimConfig, Trajectory, batch, integrate
from .tvg import build_tvg, path_match, rld, shortest_path
from .world import DiscObstacle, World, Workspace, random_world, validate

__version__ = "0.1.0"

__all__ = [
    "ControlParams",
    "ControlOutput",
    "DiscObstacle",
    "LidarSpec",
    "SimConfig",
    "Trajectory",
    "UnicycleParams",
    "World",
    "Workspace",
    "backend",
    "batch",
    "build_tvg",
    "control",
    "integrate",
    "path_match",
    "random_world",
    "rld",
    "sensor_control",
    "shortest_path",
    "single_obstacle_control",
    "unicycle_transform",
    "validate",
    "xi",
    "__version__",
]
