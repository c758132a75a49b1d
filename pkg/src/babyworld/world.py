"""Grid world core: cell grid, agent state, the seven-action transition
function, egocentric partial observations, and the sparse shaped reward."""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

# Object kinds.
WALL, DOOR, KEY, BALL, BOX, GOAL = "wall", "door", "key", "ball", "box", "goal"
OBJECT_KINDS = (WALL, DOOR, KEY, BALL, BOX, GOAL)
CARRYABLE_KINDS = (KEY, BALL, BOX)

COLORS = ("red", "green", "blue", "purple", "yellow", "grey")

# Door states; "open" doubles as the canonical filler for non-door objects.
OPEN, CLOSED, LOCKED = "open", "closed", "locked"

# Stable integer codes used in observations, demo files and the agent protocol.
KIND_CODES = {
    "unseen": 0, "empty": 1,
    WALL: 2, DOOR: 3, KEY: 4, BALL: 5, BOX: 6, GOAL: 7,
}
COLOR_CODES = {color: i for i, color in enumerate(COLORS)}
STATE_CODES = {OPEN: 0, CLOSED: 1, LOCKED: 2}

# Directions, clockwise from north. Index arithmetic implements turning;
# y grows southward, so north is (0, -1).
NORTH, EAST, SOUTH, WEST = range(4)
DIR_VECTORS = ((0, -1), (1, 0), (0, 1), (-1, 0))
DIR_NAMES = ("north", "east", "south", "west")

VIEW_SIZE = 7
_AGENT_ROW, _AGENT_COL = VIEW_SIZE - 1, VIEW_SIZE // 2


class Action(IntEnum):
    """The seven actions; integer codes are stable for demo serialization."""

    turn_left = 0
    turn_right = 1
    move_forward = 2
    pickup = 3
    drop = 4
    toggle = 5
    done = 6


@dataclass(slots=True, eq=False)
class WorldObject:
    """One object occupying a grid cell (or the agent's hands).

    Instances compare by identity: two same-colored balls are distinct
    entities, which the verifier and bot rely on.
    """

    kind: str
    color: str
    door_state: str = OPEN

    def __post_init__(self) -> None:
        assert self.kind in OBJECT_KINDS, self.kind
        assert self.color in COLORS, self.color
        assert self.door_state in (OPEN, CLOSED, LOCKED), self.door_state
        if self.kind == WALL:
            assert self.color == "grey", "walls are always grey"
        if self.kind == GOAL:
            assert self.color == "green", "goal squares are always green"
        if self.kind != DOOR:
            assert self.door_state == OPEN, "non-doors use the open filler state"

    @property
    def see_through(self) -> bool:
        """Sight passes through everything except walls and shut doors."""
        if self.kind == WALL:
            return False
        if self.kind == DOOR:
            return self.door_state == OPEN
        return True

    @property
    def walkable(self) -> bool:
        """The agent may stand only on empty cells or open doors."""
        return self.kind == DOOR and self.door_state == OPEN

    def clone(self) -> "WorldObject":
        return WorldObject(self.kind, self.color, self.door_state)

    def encode(self) -> tuple[int, int, int]:
        return (KIND_CODES[self.kind], COLOR_CODES[self.color],
                STATE_CODES[self.door_state])


class WorldGrid:
    """Dense row-major grid of optional objects."""

    __slots__ = ("width", "height", "cells")

    def __init__(self, width: int, height: int):
        assert width >= 3 and height >= 3
        self.width = width
        self.height = height
        self.cells: list[WorldObject | None] = [None] * (width * height)

    def in_bounds(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height

    def get(self, x: int, y: int) -> WorldObject | None:
        assert self.in_bounds(x, y), (x, y)
        return self.cells[y * self.width + x]

    def set(self, x: int, y: int, obj: WorldObject | None) -> None:
        assert self.in_bounds(x, y), (x, y)
        self.cells[y * self.width + x] = obj

    def wall_rect(self, x0: int, y0: int, w: int, h: int) -> None:
        """Line the border of the given rectangle with grey walls."""
        for x in range(x0, x0 + w):
            self.set(x, y0, WorldObject(WALL, "grey"))
            self.set(x, y0 + h - 1, WorldObject(WALL, "grey"))
        for y in range(y0, y0 + h):
            self.set(x0, y, WorldObject(WALL, "grey"))
            self.set(x0 + w - 1, y, WorldObject(WALL, "grey"))

    def iter_objects(self):
        """Yield (x, y, obj) for every occupied cell."""
        i = 0
        for y in range(self.height):
            for x in range(self.width):
                obj = self.cells[i]
                if obj is not None:
                    yield x, y, obj
                i += 1

    def clone(self) -> "WorldGrid":
        g = WorldGrid(self.width, self.height)
        g.cells = [o.clone() if o is not None else None for o in self.cells]
        return g


@dataclass(slots=True)
class AgentState:
    """Agent pose, carried object and step counter."""

    pos: tuple[int, int]
    direction: int
    carrying: WorldObject | None = None
    step_count: int = 0

    @property
    def front_pos(self) -> tuple[int, int]:
        dx, dy = DIR_VECTORS[self.direction]
        return (self.pos[0] + dx, self.pos[1] + dy)

    def clone(self) -> "AgentState":
        return AgentState(self.pos, self.direction,
                          self.carrying.clone() if self.carrying else None,
                          self.step_count)


@dataclass(slots=True)
class Observation:
    """Egocentric 7x7x3 integer view plus the instruction string."""

    grid_code: np.ndarray
    mission_text: str


def apply_action(grid: WorldGrid, agent: AgentState,
                 action: Action) -> tuple[WorldGrid, AgentState]:
    """Advance the world by one action, in place.

    Illegal actions are silent no-ops; step_count always increments by one.
    Returns the same (grid, agent) pair for call-chaining.
    """
    assert 0 <= int(action) <= 6, action
    fx, fy = agent.front_pos
    fwd = grid.get(fx, fy) if grid.in_bounds(fx, fy) else WorldObject(WALL, "grey")

    if action == Action.turn_left:
        agent.direction = (agent.direction - 1) % 4
    elif action == Action.turn_right:
        agent.direction = (agent.direction + 1) % 4
    elif action == Action.move_forward:
        if fwd is None or fwd.walkable:
            agent.pos = (fx, fy)
    elif action == Action.pickup:
        if fwd is not None and fwd.kind in CARRYABLE_KINDS and agent.carrying is None:
            agent.carrying = fwd
            grid.set(fx, fy, None)
    elif action == Action.drop:
        if agent.carrying is not None and grid.in_bounds(fx, fy) and fwd is None:
            grid.set(fx, fy, agent.carrying)
            agent.carrying = None
    elif action == Action.toggle:
        if fwd is not None and fwd.kind == DOOR:
            if fwd.door_state == OPEN:
                fwd.door_state = CLOSED
            elif fwd.door_state == CLOSED:
                fwd.door_state = OPEN
            elif (agent.carrying is not None and agent.carrying.kind == KEY
                  and agent.carrying.color == fwd.color):
                # Unlocking does not consume the key.
                fwd.door_state = OPEN
    # Action.done: pure no-op.

    agent.step_count += 1
    return grid, agent


def crop_to_world(agent: AgentState, row: int, col: int) -> tuple[int, int]:
    """Map a 7x7 crop cell to world coordinates.

    The agent sits at crop (row 6, col 3) facing "up" the crop; columns
    right of center are to the agent's right hand.
    """
    fwd = _AGENT_ROW - row
    lat = col - _AGENT_COL
    fx, fy = DIR_VECTORS[agent.direction]
    rx, ry = DIR_VECTORS[(agent.direction + 1) % 4]
    return (agent.pos[0] + fwd * fx + lat * rx,
            agent.pos[1] + fwd * fy + lat * ry)


def _visibility_sweep(grid: WorldGrid, agent: AgentState):
    """One flood pass over the egocentric crop.

    A cell is visible iff some adjacent cell nearer the agent (same-row
    toward center, or the three cells of the next-nearer row) is visible
    and see-through. Walls and shut doors are visible themselves but stop
    the flood. Returns (mask, cells) where mask is the 7x7 boolean grid and
    cells lists (row, col, world_pos, obj) for visible in-bounds cells.
    """
    vis = [[False] * VIEW_SIZE for _ in range(VIEW_SIZE)]
    passes = [[False] * VIEW_SIZE for _ in range(VIEW_SIZE)]
    cells = []
    ax, ay = agent.pos
    fx, fy = DIR_VECTORS[agent.direction]
    rx, ry = DIR_VECTORS[(agent.direction + 1) % 4]
    width, height = grid.width, grid.height
    grid_get = grid.get  # the only content reads; subclasses may observe
    col_order = (3, 4, 5, 6, 2, 1, 0)
    for r in range(_AGENT_ROW, -1, -1):
        vis_r, passes_r = vis[r], passes[r]
        below = passes[r + 1] if r < _AGENT_ROW else None
        for c in col_order:
            if r == _AGENT_ROW and c == _AGENT_COL:
                ok = True
            else:
                ok = False
                if below is not None:
                    if below[c]:
                        ok = True
                    elif c > 0 and below[c - 1]:
                        ok = True
                    elif c < VIEW_SIZE - 1 and below[c + 1]:
                        ok = True
                if not ok and c > _AGENT_COL and passes_r[c - 1]:
                    ok = True
                if not ok and c < _AGENT_COL and passes_r[c + 1]:
                    ok = True
            if not ok:
                continue
            vis_r[c] = True
            fwd = _AGENT_ROW - r
            lat = c - _AGENT_COL
            wx = ax + fwd * fx + lat * rx
            wy = ay + fwd * fy + lat * ry
            if 0 <= wx < width and 0 <= wy < height:
                obj = grid_get(wx, wy)
                passes_r[c] = obj is None or obj.see_through
                cells.append((r, c, (wx, wy), obj))
    return vis, cells


def compute_visibility(grid: WorldGrid, agent: AgentState) -> list[list[bool]]:
    """7x7 visibility mask over the egocentric crop."""
    return _visibility_sweep(grid, agent)[0]


def visible_cells(grid: WorldGrid, agent: AgentState):
    """(row, col, world_pos, obj) for every visible in-bounds crop cell."""
    return _visibility_sweep(grid, agent)[1]


def render_observation(grid: WorldGrid, agent: AgentState,
                       mission_text: str) -> Observation:
    """Encode the visible crop as a 7x7x3 uint8 tensor; unseen cells are zero."""
    code = np.zeros((VIEW_SIZE, VIEW_SIZE, 3), dtype=np.uint8)
    for r, c, _, obj in visible_cells(grid, agent):
        if obj is None:
            code[r, c, 0] = KIND_CODES["empty"]
        else:
            code[r, c] = obj.encode()
    return Observation(code, mission_text)


def compute_reward(step_count: int, max_steps: int, success: bool) -> float:
    """Sparse shaped reward: 1 - 0.9 * (step_count / max_steps) on success."""
    assert max_steps > 0 and 0 <= step_count <= max_steps
    if not success:
        return 0.0
    return 1.0 - 0.9 * (step_count / max_steps)
