"""Standard episodic RL-environment binding over the babyworld core.

The bridge owns zero environment semantics: reset generates a mission
through the native level generators, observations are the native 7x7x3
integer tensors, and step delegates to the native transition, verifier and
reward. The API is the conventional five-tuple episodic interface with
separate terminated (success) and truncated (step budget) flags.
"""

from __future__ import annotations

from babyworld.levels import LEVEL_IDS, make_mission
from babyworld.missions import Episode
from babyworld.world import Action

__all__ = ["BridgeEnv", "ENV_IDS", "make"]

ENV_PREFIX = "BabyWorld-"
ENV_IDS = tuple(f"{ENV_PREFIX}{level}" for level in LEVEL_IDS)


class BridgeEnv:
    """One episodic environment bound to a single level.

    Observations are dicts {"image": uint8 array of shape (7, 7, 3),
    "mission": str}, bit-for-bit the native encoding.
    """

    action_space_n = len(Action)
    observation_shape = (7, 7, 3)

    def __init__(self, level_id: str):
        if level_id not in LEVEL_IDS:
            raise KeyError(f"unknown level {level_id!r}")
        self.level_id = level_id
        self._episode: Episode | None = None
        self.last_observation = None

    def _observe(self) -> dict:
        native = self._episode.observation()
        self.last_observation = {"image": native.grid_code,
                                 "mission": native.mission_text}
        return self.last_observation

    def reset(self, seed: int = 0) -> tuple[dict, dict]:
        """Generate the mission for (level, seed) and return the first
        observation plus an info dict with the episode's step budget."""
        mission = make_mission(self.level_id, seed)
        self._episode = Episode(mission)
        return self._observe(), {"max_steps": mission.max_steps,
                                 "seed": seed}

    def step(self, action_code: int) -> tuple[dict, float, bool, bool, dict]:
        if self._episode is None:
            raise RuntimeError("step before reset")
        if self._episode.done:
            raise RuntimeError("step after episode termination")
        code = int(action_code)
        if not 0 <= code < len(Action):
            raise ValueError(f"action code out of range: {action_code}")
        reward = self._episode.step(Action(code))
        return (self._observe(), reward, self._episode.terminated,
                self._episode.truncated, {})


def make(env_id: str) -> BridgeEnv:
    """Instantiate an environment from its registry name."""
    if not env_id.startswith(ENV_PREFIX) or env_id not in ENV_IDS:
        raise KeyError(f"unknown environment id {env_id!r}; "
                       f"registered: {', '.join(ENV_IDS)}")
    return BridgeEnv(env_id.removeprefix(ENV_PREFIX))
