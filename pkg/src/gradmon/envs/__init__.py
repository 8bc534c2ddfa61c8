from .robot_cell import (CellState, RobotCellEnv, N_ACTIONS, EMPTY, WP1, WP2,
                         action_applicable, detect_locked, enumerate_states,
                         station_index)
from .pendulum import PendulumEnv, PendulumParams

__all__ = [
    "CellState", "RobotCellEnv", "N_ACTIONS", "EMPTY", "WP1", "WP2",
    "action_applicable", "detect_locked", "enumerate_states", "station_index",
    "PendulumEnv", "PendulumParams",
]
