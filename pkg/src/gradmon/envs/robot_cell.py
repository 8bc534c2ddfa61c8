"""Two-robot manufacturing cell with three stations and two part routes.

Two part types flow from an input store through processing stations to an
output store. Type 1 is processed at station S1 and finished at S2; type 2
is processed at S3 and finished at S2. Both routes end at the shared S2, so
the cell has real contention and real dead ends: a type-1 part placed in S3
(or a type-2 part in S1) can never advance again and permanently occupies
the slot.

Both robots act every step, robot 1 first, robot 2 on the updated state; an
action whose precondition fails does nothing. The ten-action catalog per
robot:

    0..2  fetch a type-1 part from the input store into S1/S2/S3
    3..5  fetch a type-2 part from the input store into S1/S2/S3
    6     advance the type-1 part in S1 to S2
    7     advance the type-2 part in S3 to S2
    8     deliver the finished part in S2 to the output store
    9     do nothing

Rewards per step: -1 base; +50 per delivered part; +500 when both output
targets are met (ends the episode); -30 once if one type reaches 100% of its
target while the other is still below 75%; -100 on reaching a locked state
or on hitting the step limit without completion (both end the episode).

A state is locked when no action sequence can deliver another part. For
this route structure that is equivalent to "no action except do-nothing has
a satisfiable precondition": any satisfiable fetch, advance or deliver
implies a delivery is still reachable, because S2 can always be emptied by
delivering. `detect_locked` therefore scans the action catalog (the scan is
identical for both robots); the test suite checks it against a brute-force
reachability search over the whole state space.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import IO, List, Optional, Tuple

import numpy as np

EMPTY, WP1, WP2 = 0, 1, 2

N_ACTIONS = 10

ACTION_NAMES = (
    "fetch_wp1_s1", "fetch_wp1_s2", "fetch_wp1_s3",
    "fetch_wp2_s1", "fetch_wp2_s2", "fetch_wp2_s3",
    "advance_wp1", "advance_wp2", "deliver", "noop",
)

OBS_SIZE = 29


@dataclass
class CellState:
    """Full cell configuration; counters obey conservation per part type:
    input_remaining + parts in stations + output_done == target."""

    stations: List[int] = field(default_factory=lambda: [EMPTY, EMPTY, EMPTY])
    input_remaining: List[int] = field(default_factory=lambda: [20, 20])
    output_done: List[int] = field(default_factory=lambda: [0, 0])
    step_count: int = 0
    targets: Tuple[int, int] = (20, 20)

    def clone(self) -> "CellState":
        return CellState(list(self.stations), list(self.input_remaining),
                         list(self.output_done), self.step_count, self.targets)

    def completion(self, part: int) -> float:
        """Delivered fraction of the target for part type 1 or 2."""
        return self.output_done[part - 1] / self.targets[part - 1]

    def targets_met(self) -> bool:
        return (self.output_done[0] >= self.targets[0]
                and self.output_done[1] >= self.targets[1])

    def key(self) -> tuple:
        return (tuple(self.stations), tuple(self.input_remaining),
                tuple(self.output_done))


def station_index(stations) -> int:
    """Ordinal of a station triple in the 27-configuration enumeration."""
    s1, s2, s3 = stations
    return s1 * 9 + s2 * 3 + s3


def enumerate_states() -> List[Tuple[int, int, int]]:
    """All 27 station configurations, ordered by their index."""
    return [(a, b, c) for a in (EMPTY, WP1, WP2)
            for b in (EMPTY, WP1, WP2)
            for c in (EMPTY, WP1, WP2)]


def action_applicable(state: CellState, action: int) -> bool:
    """Whether the action's precondition holds (noop never counts)."""
    st = state.stations
    if 0 <= action <= 5:
        part = WP1 if action <= 2 else WP2
        target = action % 3
        return state.input_remaining[part - 1] > 0 and st[target] == EMPTY
    if action == 6:
        return st[0] == WP1 and st[1] == EMPTY
    if action == 7:
        return st[2] == WP2 and st[1] == EMPTY
    if action == 8:
        return st[1] != EMPTY
    if action == 9:
        return False
    raise ValueError(f"action out of range: {action}")


def apply_action(state: CellState, action: int) -> Optional[int]:
    """Apply one robot action in place; returns the delivered part type,
    if any. Failed preconditions degrade to a no-op."""
    if not action_applicable(state, action):
        return None
    st = state.stations
    if action <= 5:
        part = WP1 if action <= 2 else WP2
        st[action % 3] = part
        state.input_remaining[part - 1] -= 1
        return None
    if action == 6:
        st[0], st[1] = EMPTY, WP1
        return None
    if action == 7:
        st[2], st[1] = EMPTY, WP2
        return None
    part = st[1]
    st[1] = EMPTY
    state.output_done[part - 1] += 1
    return part


def detect_locked(state: CellState) -> bool:
    """True when no remaining action sequence can deliver another part.

    Scans every action of both robots' (identical) catalogs; see the module
    docstring for why one-step satisfiability decides reachability here.
    """
    if state.targets_met():
        return False
    return not any(action_applicable(state, a) for a in range(N_ACTIONS))


class RobotCellEnv:
    """The cell as an episodic two-agent environment with a shared reward.

    Observations are the 27-way one-hot of the station configuration plus
    the two delivered fractions (29 values, identical for both robots).
    """

    STEP_REWARD = -1.0
    DELIVER_REWARD = 50.0
    COMPLETE_REWARD = 500.0
    UNEQUAL_PENALTY = -30.0
    FAIL_PENALTY = -100.0
    UNEQUAL_FRACTION = 0.75

    def __init__(self, targets: Tuple[int, int] = (20, 20), max_steps: int = 1000,
                 trace_file: Optional[IO[str]] = None):
        if targets[0] < 1 or targets[1] < 1:
            raise ValueError("targets must be >= 1")
        if max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        self.targets = (int(targets[0]), int(targets[1]))
        self.max_steps = int(max_steps)
        self.trace_file = trace_file
        self._state: Optional[CellState] = None
        self._done = True
        self._unequal_fired = False

    @property
    def state(self) -> CellState:
        if self._state is None:
            raise RuntimeError("reset() has not been called")
        return self._state

    def reset(self, seed: Optional[int] = None) -> np.ndarray:
        """Fresh episode: empty stations, full input stores. The layout is
        deterministic; `seed` is accepted for interface uniformity."""
        del seed
        self._state = CellState(
            stations=[EMPTY, EMPTY, EMPTY],
            input_remaining=list(self.targets),
            output_done=[0, 0],
            step_count=0,
            targets=self.targets,
        )
        self._done = False
        self._unequal_fired = False
        return self.observation()

    def observation(self) -> np.ndarray:
        st = self.state
        obs = np.zeros(OBS_SIZE)
        obs[station_index(st.stations)] = 1.0
        obs[27] = st.completion(WP1)
        obs[28] = st.completion(WP2)
        return obs

    def step(self, action_1: int, action_2: int):
        """Apply both robots' actions; returns (obs, reward, done, info)."""
        if self._done:
            raise RuntimeError("episode finished; call reset()")
        st = self._state
        st.step_count += 1
        reward = self.STEP_REWARD
        events = {"delivered": [], "unequal": False, "completed": False,
                  "locked": False, "timeout": False}

        done = False
        for action in (action_1, action_2):
            part = apply_action(st, int(action))
            if part is not None:
                reward += self.DELIVER_REWARD
                events["delivered"].append(part)
                if not self._unequal_fired:
                    other = WP2 if part == WP1 else WP1
                    if st.completion(part) >= 1.0 and st.completion(other) < self.UNEQUAL_FRACTION:
                        reward += self.UNEQUAL_PENALTY
                        events["unequal"] = True
                        self._unequal_fired = True
            if st.targets_met():
                reward += self.COMPLETE_REWARD
                events["completed"] = True
                done = True
                break

        if not done:
            if detect_locked(st):
                reward += self.FAIL_PENALTY
                events["locked"] = True
                done = True
            elif st.step_count >= self.max_steps:
                reward += self.FAIL_PENALTY
                events["timeout"] = True
                done = True

        self._done = done
        obs = self.observation()
        if self.trace_file is not None:
            record = {
                "step": st.step_count,
                "state": station_index(st.stations),
                "actions": [int(action_1), int(action_2)],
                "reward": reward,
                "done": done,
                "events": events,
            }
            self.trace_file.write(json.dumps(record) + "\n")
        info = {
            "events": events,
            "outputs": tuple(st.output_done),
            "state_index": station_index(st.stations),
        }
        return obs, reward, done, info
