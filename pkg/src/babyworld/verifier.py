"""Online judge: watches the evolving environment state after every action
and decides when an instruction has been fulfilled.

Descriptors are resolved once, against the episode-start grid and agent
pose, so location phrases ("on your left") keep their meaning while the
agent moves. Clause completion is monotone and respects the ordering
imposed by the sequencing connectors.
"""

from __future__ import annotations

from babyworld.language import (
    BEHIND, FRONT, GOTO, LEFT, OPEN_VERB, PICKUP, PUT_NEXT, RIGHT, AfterNode,
    Clause, Descriptor, Instruction, ThenNode, clauses_of,
)
from babyworld.world import (
    DIR_VECTORS, OPEN, Action, AgentState, WorldGrid, WorldObject,
)

IN_PROGRESS, SUCCESS = "in_progress", "success"


class MalformedMissionError(ValueError):
    """A descriptor resolved to no object at mission start."""


def halfplane_contains(loc: str, origin: tuple[int, int], direction: int,
                       pos: tuple[int, int]) -> bool:
    """Whether pos lies strictly in the given half-plane of the origin pose."""
    vx, vy = pos[0] - origin[0], pos[1] - origin[1]
    if loc == FRONT:
        axis = DIR_VECTORS[direction]
    elif loc == BEHIND:
        dx, dy = DIR_VECTORS[direction]
        axis = (-dx, -dy)
    elif loc == RIGHT:
        axis = DIR_VECTORS[(direction + 1) % 4]
    elif loc == LEFT:
        axis = DIR_VECTORS[(direction - 1) % 4]
    else:
        raise ValueError(loc)
    return vx * axis[0] + vy * axis[1] > 0


def resolve_descriptor(d: Descriptor, grid: WorldGrid,
                       initial_pos: tuple[int, int],
                       initial_dir: int) -> set[WorldObject]:
    """All grid objects a descriptor may refer to, resolved at episode start."""
    matches = set()
    for x, y, obj in grid.iter_objects():
        if obj.kind != d.kind:
            continue
        if d.color is not None and obj.color != d.color:
            continue
        if d.loc is not None and not halfplane_contains(
                d.loc, initial_pos, initial_dir, (x, y)):
            continue
        matches.add(obj)
    return matches


class _ClauseTracker:
    __slots__ = ("clause", "targets", "anchors", "done_step")

    def __init__(self, clause: Clause, grid, pos, direction):
        self.clause = clause
        self.targets = resolve_descriptor(clause.target, grid, pos, direction)
        self.anchors = (resolve_descriptor(clause.anchor, grid, pos, direction)
                        if clause.anchor is not None else None)
        self.done_step: int | None = None
        if not self.targets or (self.anchors is not None and not self.anchors):
            raise MalformedMissionError(
                f"descriptor resolves to no object: {clause}")

    @property
    def done(self) -> bool:
        return self.done_step is not None


class VerifierState:
    """Per-episode judge; call check_step once after every applied action."""

    def __init__(self, instruction: Instruction, grid: WorldGrid,
                 agent: AgentState):
        self.instruction = instruction
        self.initial_pos = agent.pos
        self.initial_dir = agent.direction
        if isinstance(instruction, ThenNode):
            stage_clauses = [clauses_of(instruction.first),
                             clauses_of(instruction.second)]
        elif isinstance(instruction, AfterNode):
            # "A after you B" gates A on B.
            stage_clauses = [clauses_of(instruction.second),
                             clauses_of(instruction.first)]
        else:
            stage_clauses = [clauses_of(instruction)]
        self.stages = [
            [_ClauseTracker(c, grid, agent.pos, agent.direction) for c in stage]
            for stage in stage_clauses
        ]
        # Current positions of all episode-start objects; carried objects
        # have no position. Objects moved by the agent stay identity-tracked.
        self.object_pos: dict[WorldObject, tuple[int, int]] = {
            obj: (x, y) for x, y, obj in grid.iter_objects()}
        self.moved: set[WorldObject] = set()
        self._prev_carrying = agent.carrying
        self.finished = False

    def _update_bookkeeping(self, agent: AgentState) -> None:
        cur = agent.carrying
        if cur is self._prev_carrying:
            return
        if self._prev_carrying is None and cur is not None:
            self.moved.add(cur)
            self.object_pos.pop(cur, None)
        elif self._prev_carrying is not None and cur is None:
            # A drop lands on the cell the agent currently faces.
            self.object_pos[self._prev_carrying] = agent.front_pos
        self._prev_carrying = cur

    def _clause_holds(self, t: _ClauseTracker, grid: WorldGrid,
                      agent: AgentState, last_action: Action) -> bool:
        clause = t.clause
        if clause.verb == GOTO:
            fwd = agent.front_pos
            return any(self.object_pos.get(obj) == fwd for obj in t.targets)
        if clause.verb == PICKUP:
            return agent.carrying in t.targets
        if clause.verb == OPEN_VERB:
            if last_action != Action.toggle:
                return False
            fx, fy = agent.front_pos
            if not grid.in_bounds(fx, fy):
                return False
            obj = grid.get(fx, fy)
            return (obj is not None and obj in t.targets
                    and obj.door_state == OPEN)
        if clause.verb == PUT_NEXT:
            for a in t.targets & self.moved:
                pa = self.object_pos.get(a)
                if pa is None:
                    continue
                for b in t.anchors:
                    if b is a:
                        continue
                    pb = self.object_pos.get(b)
                    if pb is None:
                        continue
                    if abs(pa[0] - pb[0]) + abs(pa[1] - pb[1]) == 1:
                        return True
            return False
        raise ValueError(clause.verb)

    def check_step(self, grid: WorldGrid, agent: AgentState,
                   last_action: Action) -> str:
        """Update clause statuses after an action; returns success when all done."""
        assert not self.finished, "check_step called after success"
        self._update_bookkeeping(agent)
        step = agent.step_count
        for stage in self.stages:
            for tracker in stage:
                if not tracker.done and self._clause_holds(
                        tracker, grid, agent, last_action):
                    tracker.done_step = step
            if not all(tracker.done for tracker in stage):
                # Later stages stay gated until this one completes.
                break
        if all(t.done for stage in self.stages for t in stage):
            self.finished = True
            return SUCCESS
        return IN_PROGRESS

    def pre_satisfied_clauses(self, grid: WorldGrid,
                              agent: AgentState) -> list[Clause]:
        """Clauses whose goal condition already holds at step 0 (generator
        rejection test): a goto match in the forward cell, or a put-next
        target already adjacent to an anchor."""
        bad = []
        for stage in self.stages:
            for t in stage:
                clause = t.clause
                if clause.verb == GOTO:
                    fwd = agent.front_pos
                    if any(self.object_pos.get(o) == fwd for o in t.targets):
                        bad.append(clause)
                elif clause.verb == PUT_NEXT:
                    hit = False
                    for a in t.targets:
                        pa = self.object_pos.get(a)
                        if pa is None:
                            continue
                        for b in t.anchors:
                            if b is not a and self.object_pos.get(b) is not None:
                                pb = self.object_pos[b]
                                if abs(pa[0] - pb[0]) + abs(pa[1] - pb[1]) == 1:
                                    hit = True
                    if hit:
                        bad.append(clause)
        return bad
