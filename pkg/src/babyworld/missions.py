"""Missions and episodes: the immutable mission description, the live
episode state that everything steps through, and demo replay."""

from __future__ import annotations

from dataclasses import dataclass

from babyworld.language import Instruction, parse, to_text
from babyworld.verifier import SUCCESS, VerifierState
from babyworld.world import (
    DIR_NAMES, Action, AgentState, Observation, WorldGrid, WorldObject,
    apply_action, compute_reward, render_observation,
)


@dataclass
class Mission:
    """A level instance: initial world, instruction and step budget."""

    level_id: str
    seed: int
    grid: WorldGrid
    agent_start: AgentState
    instruction: Instruction
    max_steps: int
    # Solvability witness recorded at generation time; not serialized.
    witness: "DemoEpisode | None" = None

    @property
    def instruction_text(self) -> str:
        return to_text(self.instruction)


class Episode:
    """One rollout of a mission: working copies of grid and agent plus the
    verifier. The mission itself is never mutated and can be reused."""

    def __init__(self, mission: Mission):
        self.mission = mission
        self.grid = mission.grid.clone()
        self.agent = mission.agent_start.clone()
        self.text = mission.instruction_text
        self.verifier = VerifierState(mission.instruction, self.grid, self.agent)
        self.terminated = False
        self.truncated = False
        self.reward = 0.0

    @property
    def done(self) -> bool:
        return self.terminated or self.truncated

    @property
    def success(self) -> bool:
        return self.terminated

    def observation(self) -> Observation:
        return render_observation(self.grid, self.agent, self.text)

    def step(self, action: Action) -> float:
        """Apply one action; returns the reward earned this step."""
        assert not self.done, "step on a finished episode"
        apply_action(self.grid, self.agent, action)
        status = self.verifier.check_step(self.grid, self.agent, action)
        if status == SUCCESS:
            self.terminated = True
            self.reward = compute_reward(self.agent.step_count,
                                         self.mission.max_steps, True)
        elif self.agent.step_count >= self.mission.max_steps:
            self.truncated = True
        return self.reward if self.terminated else 0.0


@dataclass
class DemoEpisode:
    """A recorded (usually successful) trajectory for one mission."""

    level_id: str
    seed: int
    instruction_text: str
    actions: list[int]
    success: bool
    reward: float
    source_tag: str = "base"  # in-memory provenance, not serialized


def replay_demo(mission: Mission, actions: list[int]) -> tuple[bool, float]:
    """Re-run a recorded action sequence; returns (success, reward)."""
    ep = Episode(mission)
    for code in actions:
        ep.step(Action(code))
        if ep.done:
            break
    return ep.success, ep.reward


# --- mission (de)serialization ----------------------------------------------

def mission_to_json(mission: Mission) -> dict:
    """Plain-dict form of a mission; stable field order for golden output."""
    cells = []
    for x, y, obj in mission.grid.iter_objects():
        cells.append({"x": x, "y": y, "kind": obj.kind, "color": obj.color,
                      "state": obj.door_state})
    return {
        "level": mission.level_id,
        "seed": mission.seed,
        "width": mission.grid.width,
        "height": mission.grid.height,
        "max_steps": mission.max_steps,
        "instruction": mission.instruction_text,
        "agent": {
            "x": mission.agent_start.pos[0],
            "y": mission.agent_start.pos[1],
            "direction": DIR_NAMES[mission.agent_start.direction],
        },
        "cells": cells,
    }


def mission_from_json(data: dict) -> Mission:
    grid = WorldGrid(data["width"], data["height"])
    for cell in data["cells"]:
        grid.set(cell["x"], cell["y"],
                 WorldObject(cell["kind"], cell["color"], cell["state"]))
    agent = AgentState((data["agent"]["x"], data["agent"]["y"]),
                       DIR_NAMES.index(data["agent"]["direction"]))
    return Mission(
        level_id=data["level"],
        seed=data["seed"],
        grid=grid,
        agent_start=agent,
        instruction=parse(data["instruction"]),
        max_steps=data["max_steps"],
    )
