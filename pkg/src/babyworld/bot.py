"""Rule-based expert agent: a stack machine over six subgoal types.

The bot plans only on cells it has seen during the episode (its visibility
mask). Instructions decompose into GoNextTo/Pickup/Drop/Open chains;
execution may interrupt itself to explore unseen space, shuffle objects
that block a path, or fetch keys for locked doors, then resumes.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from babyworld.language import (
    GOTO, OPEN_VERB, PICKUP, AfterNode, AndNode, Clause, Descriptor,
    Instruction, ThenNode,
)
from babyworld.missions import DemoEpisode, Episode, Mission
from babyworld.verifier import halfplane_contains
from babyworld.world import (
    CARRYABLE_KINDS, CLOSED, DIR_VECTORS, DOOR, KEY, LOCKED, OPEN, WALL,
    Action, AgentState, WorldGrid, WorldObject, visible_cells,
)

EMPTY = "empty"  # marker for a seen, unoccupied cell in the bot's memory


class BotError(RuntimeError):
    """The planner cannot make progress (ill-formed or unsolvable mission)."""


# --- goal descriptions for GoNextTo -----------------------------------------

@dataclass
class ObjGoal:
    """Stand next to (and face) an object matching kind/color/loc, or a
    specific remembered object instance."""

    kind: str | None = None
    color: str | None = None
    loc: str | None = None
    specific: WorldObject | None = None

    @classmethod
    def from_descriptor(cls, d: Descriptor) -> "ObjGoal":
        return cls(kind=d.kind, color=d.color, loc=d.loc)


@dataclass
class CellGoal:
    """Stand next to (and face) a fixed cell, e.g. a door to open."""

    pos: tuple[int, int]


@dataclass
class DropGoal:
    """Face an empty cell suitable for dropping: outside `forbidden`, and
    4-adjacent to an object matching `anchor` when one is given."""

    anchor: ObjGoal | None = None
    forbidden: frozenset = frozenset()


# --- subgoals -----------------------------------------------------------------

@dataclass
class SgOpen:
    pass


@dataclass
class SgClose:
    pass


@dataclass
class SgPickup:
    # Kept so a full-handed pickup can stash and come back to its target.
    goal: "SgGoNextTo | None" = None


@dataclass
class SgDrop:
    pass


@dataclass
class SgGoNextTo:
    goal: ObjGoal | CellGoal | DropGoal
    # A pickup-producing goal is skippable when the right object is already
    # in hand (e.g. the put target was carried over from a previous clause).
    skip_with_carried_match: bool = False


@dataclass
class SgExplore:
    pass


Subgoal = SgOpen | SgClose | SgPickup | SgDrop | SgGoNextTo | SgExplore

_MAX_PROCESS_ITERATIONS = 60


class Bot:
    """Per-episode expert; call next_action once per step until success."""

    def __init__(self, mission: Mission, trace: bool = False):
        self.start_pos = mission.agent_start.pos
        self.start_dir = mission.agent_start.direction
        # Remembered contents of every cell seen so far this episode.
        self.known: dict[tuple[int, int], object] = {}
        # Where each object stood when first sighted (objects move only when
        # this bot moves them, so this equals its episode-start position).
        self.first_seen: dict[WorldObject, tuple[int, int]] = {}
        # Unknown cells adjacent to seen non-wall cells, kept incrementally.
        self._frontier: set[tuple[int, int]] = set()
        self.stack: list[Subgoal] = []
        self.trace: list | None = [] if trace else None
        self._build_stack(mission.instruction)

    # --- stack construction ---------------------------------------------------

    def _clause_subgoals(self, clause: Clause) -> list[Subgoal]:
        target = ObjGoal.from_descriptor(clause.target)
        if clause.verb == GOTO:
            return [SgGoNextTo(target)]
        if clause.verb == PICKUP:
            go = SgGoNextTo(target, skip_with_carried_match=True)
            return [go, SgPickup(goal=go)]
        if clause.verb == OPEN_VERB:
            return [SgGoNextTo(target), SgOpen()]
        go = SgGoNextTo(target, skip_with_carried_match=True)
        return [go, SgPickup(goal=go),
                SgGoNextTo(DropGoal(anchor=ObjGoal.from_descriptor(clause.anchor))),
                SgDrop()]

    def _body_clauses(self, body) -> list[Clause]:
        if isinstance(body, AndNode):
            return [body.first, body.second]
        return [body]

    def _build_stack(self, instruction: Instruction) -> None:
        if isinstance(instruction, ThenNode):
            ordered = (self._body_clauses(instruction.first)
                       + self._body_clauses(instruction.second))
        elif isinstance(instruction, AfterNode):
            # "A after you B": B executes first.
            ordered = (self._body_clauses(instruction.second)
                       + self._body_clauses(instruction.first))
        else:
            ordered = [instruction]
        sequence: list[Subgoal] = []
        for clause in ordered:
            sequence.extend(self._clause_subgoals(clause))
        for sg in reversed(sequence):
            self._push(sg)

    def _push(self, sg: Subgoal) -> None:
        if self.trace is not None:
            self.trace.append(("push", sg))
        self.stack.append(sg)

    def _push_sequence(self, subgoals: list[Subgoal]) -> None:
        """Push so that subgoals execute in the given order."""
        for sg in reversed(subgoals):
            self._push(sg)

    def _pop(self) -> Subgoal:
        sg = self.stack.pop()
        if self.trace is not None:
            self.trace.append(("pop", sg))
        return sg

    # --- visibility mask --------------------------------------------------------

    def _update_sight(self, grid: WorldGrid, agent: AgentState) -> None:
        known = self.known
        frontier = self._frontier
        for _, _, pos, obj in visible_cells(grid, agent):
            fresh = pos not in known
            known[pos] = obj if obj is not None else EMPTY
            if obj is not None and obj not in self.first_seen:
                self.first_seen[obj] = pos
            if fresh:
                frontier.discard(pos)
                if obj is None or obj.kind != WALL:
                    x, y = pos
                    for nxt in ((x, y - 1), (x + 1, y), (x, y + 1),
                                (x - 1, y)):
                        if nxt not in known:
                            frontier.add(nxt)

    # --- knowledge queries -------------------------------------------------------

    def _object_matches(self, goal: ObjGoal, obj: WorldObject) -> bool:
        if goal.specific is not None:
            return obj is goal.specific
        if obj.kind != goal.kind:
            return False
        if goal.color is not None and obj.color != goal.color:
            return False
        if goal.loc is not None and not halfplane_contains(
                goal.loc, self.start_pos, self.start_dir,
                self.first_seen[obj]):
            return False
        return True

    def _object_positions(self, goal: ObjGoal) -> list[tuple[int, int]]:
        out = [pos for pos, cell in self.known.items()
               if cell is not EMPTY and cell.kind != WALL
               and self._object_matches(goal, cell)]
        out.sort(key=lambda p: (p[1], p[0]))
        return out

    def _target_cells(self, goal, agent: AgentState) -> list[tuple[int, int]]:
        if isinstance(goal, ObjGoal):
            return self._object_positions(goal)
        if isinstance(goal, CellGoal):
            return [goal.pos]
        anchors = None
        if goal.anchor is not None:
            anchors = self._object_positions(goal.anchor)
            if not anchors:
                return []
        out = []
        for pos, cell in self.known.items():
            if cell is not EMPTY or pos in goal.forbidden:
                continue
            if anchors is not None and not any(
                    abs(pos[0] - a[0]) + abs(pos[1] - a[1]) == 1
                    for a in anchors):
                continue
            out.append(pos)
        out.sort(key=lambda p: (p[1], p[0]))
        return out

    def _carrying_matches(self, agent: AgentState, goal) -> bool:
        return (isinstance(goal, ObjGoal) and agent.carrying is not None
                and agent.carrying in self.first_seen
                and self._object_matches(goal, agent.carrying))

    def _goal_satisfied(self, sg: SgGoNextTo, agent: AgentState) -> bool:
        front = agent.front_pos
        cell = self.known.get(front)
        goal = sg.goal
        if isinstance(goal, ObjGoal):
            return (cell is not None and cell is not EMPTY
                    and cell.kind != WALL and self._object_matches(goal, cell))
        if isinstance(goal, CellGoal):
            return front == goal.pos
        return cell is EMPTY and front in self._drop_cells(goal)

    def _drop_cells(self, goal: DropGoal) -> set[tuple[int, int]]:
        return set(self._target_cells(goal, None))

    # --- path search ----------------------------------------------------------

    # Entering costs are packed as blockers * 4096 + steps so the search
    # minimizes blockers first, then walked distance.
    _BLOCK = 4096

    def _cell_cost(self, pos, carrying) -> int | None:
        """Cost of entering a seen cell, or None if it cannot be entered."""
        cell = self.known.get(pos)
        if cell is None:
            return None
        if cell is EMPTY:
            return 1
        if cell.kind == WALL:
            return None
        if cell.kind == DOOR:
            if cell.door_state == OPEN:
                return 1
            if cell.door_state == CLOSED:
                return 2  # toggle, then step through
            if (carrying is not None and carrying.kind == KEY
                    and carrying.color == cell.color):
                return 2
            return None
        return self._BLOCK + 1  # movable object: passable only by shuffling

    def shortest_path(self, agent: AgentState, targets,
                      allow_blockers: bool = False):
        """Deterministic shortest path to a standing cell 4-adjacent to any
        target cell.

        Returns (cells, face) where cells is the list of cells to walk
        (excluding the start) and face is the target cell to turn towards,
        or None when no seen route exists. Costs are (blockers, steps);
        without allow_blockers, cells holding movable objects are
        impassable, with it they are costed and the caller is expected to
        shuffle the first one and replan. Ties break on (row, col).
        """
        target_set = set(targets)
        if not target_set:
            return None

        # Standing cell -> the (row, col)-smallest adjacent target; writing
        # larger targets first lets smaller ones overwrite.
        face_for: dict[tuple[int, int], tuple[int, int]] = {}
        for t in sorted(target_set, key=lambda p: (p[1], p[0]), reverse=True):
            tx, ty = t
            face_for[(tx, ty - 1)] = t
            face_for[(tx + 1, ty)] = t
            face_for[(tx, ty + 1)] = t
            face_for[(tx - 1, ty)] = t

        inf = 1 << 40
        start = agent.pos
        known = self.known
        cell_cost = self._cell_cost
        carrying = agent.carrying
        best: dict[tuple[int, int], int] = {start: 0}
        parent: dict[tuple[int, int], tuple[int, int]] = {}
        heap = [(0, start[1], start[0])]
        while heap:
            cost, y, x = heapq.heappop(heap)
            pos = (x, y)
            if cost > best.get(pos, inf):
                continue
            cell = known.get(pos)
            blocked_here = (pos != start and cell is not EMPTY
                            and cell.kind in CARRYABLE_KINDS)
            if not blocked_here or allow_blockers:
                face = face_for.get(pos)
                if face is not None:
                    cells = []
                    while pos != start:
                        cells.append(pos)
                        pos = parent[pos]
                    cells.reverse()
                    return cells, face
            for nxt in ((x, y - 1), (x + 1, y), (x, y + 1), (x - 1, y)):
                step = cell_cost(nxt, carrying)
                if step is None:
                    continue
                if step >= self._BLOCK and not allow_blockers:
                    continue
                ncost = cost + step
                if ncost < best.get(nxt, inf):
                    best[nxt] = ncost
                    parent[nxt] = pos
                    heapq.heappush(heap, (ncost, nxt[1], nxt[0]))
        return None

    # --- movement emission -------------------------------------------------------

    def _turn_towards(self, agent: AgentState, needed: int) -> Action:
        delta = (needed - agent.direction) % 4
        return Action.turn_left if delta == 3 else Action.turn_right

    def _step_along(self, agent: AgentState, cell: tuple[int, int]) -> Action:
        dx, dy = cell[0] - agent.pos[0], cell[1] - agent.pos[1]
        needed = DIR_VECTORS.index((dx, dy))
        if agent.direction != needed:
            return self._turn_towards(agent, needed)
        obj = self.known.get(cell)
        if obj is not None and obj is not EMPTY and obj.kind == DOOR \
                and obj.door_state != OPEN:
            return Action.toggle
        return Action.move_forward

    def _face_cell(self, agent: AgentState, cell: tuple[int, int]) -> Action:
        dx, dy = cell[0] - agent.pos[0], cell[1] - agent.pos[1]
        needed = DIR_VECTORS.index((dx, dy))
        assert agent.direction != needed
        return self._turn_towards(agent, needed)

    # --- subgoal processing --------------------------------------------------------

    def _plannable(self, sg: SgGoNextTo, agent: AgentState) -> bool:
        """Mirror of _process_gonextto's decision: can it act without
        exploring? Explore pops exactly when this turns true."""
        if self._goal_satisfied(sg, agent):
            return True
        if sg.skip_with_carried_match and self._carrying_matches(agent, sg.goal):
            return True
        targets = self._target_cells(sg.goal, agent)
        if not targets:
            return False
        return self.shortest_path(agent, targets, allow_blockers=True) is not None

    def _process_gonextto(self, sg: SgGoNextTo, agent: AgentState):
        if sg.skip_with_carried_match and self._carrying_matches(agent, sg.goal):
            # The right object is already in hand: skip the walk and the
            # pickup that follows it.
            self._pop()
            if self.stack and isinstance(self.stack[-1], SgPickup):
                self._pop()
            return None
        if self._goal_satisfied(sg, agent):
            self._pop()
            return None
        targets = self._target_cells(sg.goal, agent)
        if not targets:
            self._push(SgExplore())
            return None
        clear = self.shortest_path(agent, targets, allow_blockers=False)
        if clear is not None:
            cells, face = clear
            if not cells:
                return self._face_cell(agent, face)
            return self._step_along(agent, cells[0])
        routed = self.shortest_path(agent, targets, allow_blockers=True)
        if routed is None:
            self._push(SgExplore())
            return None
        cells, _ = routed
        blocker_pos = next(p for p in cells
                           if self.known[p] is not EMPTY
                           and self.known[p].kind in CARRYABLE_KINDS)
        self._push_blocker_shuffle(agent, blocker_pos,
                                   frozenset(cells) | {agent.pos})
        return None

    def _push_blocker_shuffle(self, agent: AgentState,
                              blocker_pos: tuple[int, int],
                              path_cells: frozenset) -> None:
        """Move the object at blocker_pos off the planned route, stashing
        (and afterwards re-taking) anything currently carried."""
        blocker = self.known[blocker_pos]
        carried = agent.carrying
        seq: list[Subgoal] = []
        if carried is not None:
            seq += [SgGoNextTo(DropGoal(forbidden=path_cells)), SgDrop()]
        seq += [SgGoNextTo(ObjGoal(specific=blocker)), SgPickup(),
                SgGoNextTo(DropGoal(forbidden=path_cells)), SgDrop()]
        if carried is not None:
            seq += [SgGoNextTo(ObjGoal(specific=carried)), SgPickup()]
        self._push_sequence(seq)

    def _process_pickup(self, sg: SgPickup, agent: AgentState):
        if agent.carrying is not None:
            # Hands are full with the wrong object: stash it, then return
            # to the pickup target.
            seq: list[Subgoal] = [SgGoNextTo(DropGoal()), SgDrop()]
            if sg.goal is not None:
                seq.append(SgGoNextTo(sg.goal.goal))
            self._push_sequence(seq)
            return None
        self._pop()
        return Action.pickup

    def _process_open(self, agent: AgentState):
        front = agent.front_pos
        door = self.known.get(front)
        assert door is not None and door is not EMPTY and door.kind == DOOR, \
            "Open processed without a door ahead"
        if door.door_state == LOCKED and not (
                agent.carrying is not None and agent.carrying.kind == KEY
                and agent.carrying.color == door.color):
            seq: list[Subgoal] = []
            if agent.carrying is not None:
                stash_forbidden = frozenset(
                    (front[0] + dx, front[1] + dy) for dx, dy in DIR_VECTORS)
                seq += [SgGoNextTo(DropGoal(forbidden=stash_forbidden)),
                        SgDrop()]
            seq += [SgGoNextTo(ObjGoal(kind=KEY, color=door.color)),
                    SgPickup(), SgGoNextTo(CellGoal(front))]
            self._push_sequence(seq)
            return None
        if door.door_state == OPEN:
            # Came to open a door that is already open: cycle it so the
            # opening is this agent's own toggle.
            return Action.toggle
        self._pop()
        return Action.toggle

    def _process_close(self, agent: AgentState):
        self._pop()
        return Action.toggle

    def _process_drop(self, agent: AgentState):
        self._pop()
        return Action.drop

    def _frontier_cells(self) -> list[tuple[int, int]]:
        """Unknown cells adjacent to seen non-wall cells (shut doors count:
        their far side is reached by opening them and facing through)."""
        return sorted(self._frontier, key=lambda p: (p[1], p[0]))

    def _process_explore(self, agent: AgentState):
        below = self.stack[-2] if len(self.stack) >= 2 else None
        if isinstance(below, SgGoNextTo) and self._plannable(below, agent):
            self._pop()
            return None
        frontier = self._frontier_cells()
        if frontier:
            clear = self.shortest_path(agent, frontier, allow_blockers=False)
            if clear is not None:
                cells, face = clear
                if not cells:
                    return self._face_cell(agent, face)
                return self._step_along(agent, cells[0])
            routed = self.shortest_path(agent, frontier, allow_blockers=True)
            if routed is not None:
                cells, _ = routed
                blocker_pos = next(p for p in cells
                                   if self.known[p] is not EMPTY
                                   and self.known[p].kind in CARRYABLE_KINDS)
                self._push_blocker_shuffle(agent, blocker_pos,
                                           frozenset(cells) | {agent.pos})
                return None
        # Everything reachable is seen: the remaining unknown space must be
        # behind a locked door whose key we have seen.
        for door_pos, door in sorted(
                ((p, c) for p, c in self.known.items()
                 if c is not EMPTY and c.kind == DOOR
                 and c.door_state == LOCKED),
                key=lambda item: (item[0][1], item[0][0])):
            if self._object_positions(ObjGoal(kind=KEY, color=door.color)):
                seq: list[Subgoal] = []
                if agent.carrying is not None:
                    seq += [SgGoNextTo(DropGoal()), SgDrop()]
                seq += [SgGoNextTo(ObjGoal(kind=KEY, color=door.color)),
                        SgPickup(), SgGoNextTo(CellGoal(door_pos)), SgOpen()]
                self._push_sequence(seq)
                return None
        raise BotError("no reachable frontier and no unlockable door")

    # --- main entry point ---------------------------------------------------------

    def next_action(self, grid: WorldGrid, agent: AgentState) -> Action:
        """Observe, then run the stack machine until a subgoal emits an action."""
        self._update_sight(grid, agent)
        for _ in range(_MAX_PROCESS_ITERATIONS):
            if not self.stack:
                # Pre-satisfied trailing subgoals can drain the stack without
                # emitting; a no-op lets the verifier pass its verdict.
                return Action.done
            top = self.stack[-1]
            if isinstance(top, SgGoNextTo):
                action = self._process_gonextto(top, agent)
            elif isinstance(top, SgPickup):
                action = self._process_pickup(top, agent)
            elif isinstance(top, SgDrop):
                action = self._process_drop(agent)
            elif isinstance(top, SgOpen):
                action = self._process_open(agent)
            elif isinstance(top, SgClose):
                action = self._process_close(agent)
            else:
                action = self._process_explore(agent)
            if action is not None:
                return action
        raise BotError("subgoal stack failed to make progress")


def generate_demo(mission: Mission, bot: Bot | None = None) -> DemoEpisode:
    """Run the bot on a mission to success or the step budget."""
    ep = Episode(mission)
    bot = bot or Bot(mission)
    actions: list[int] = []
    while not ep.done:
        action = bot.next_action(ep.grid, ep.agent)
        ep.step(action)
        actions.append(int(action))
    return DemoEpisode(
        level_id=mission.level_id,
        seed=mission.seed,
        instruction_text=mission.instruction_text,
        actions=actions,
        success=ep.success,
        reward=ep.reward,
    )
