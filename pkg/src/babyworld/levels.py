"""The 19 mission generators.

Each level pairs a procedurally built world (single 6x6 room or a 3x3 maze
of 6x6 rooms) with an instruction drawn from the level's grammar subset.
Candidates are rejected until the expert bot demonstrates solvability and
no clause is satisfied at step 0; generation is deterministic in
(level_id, seed).
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from babyworld.bot import BotError, generate_demo
from babyworld.language import (
    GOTO, LOCATIONS, OPEN_VERB, PICKUP, PUT_NEXT, AfterNode, AndNode, Clause,
    Descriptor, GrammarShape, Instruction, ThenNode, clauses_of,
)
from babyworld.missions import DemoEpisode, Mission
from babyworld.verifier import (
    MalformedMissionError, VerifierState, halfplane_contains,
)
from babyworld.world import (
    BALL, BOX, CLOSED, COLORS, DOOR, KEY, LOCKED, AgentState, WorldGrid,
    WorldObject,
)

ROOM_SIZE = 6          # interior cells per room side
MAZE_SIDE = 3          # rooms per maze side
_SPAN = ROOM_SIZE + 1  # wall-to-wall stride

DISTRACTOR_KINDS = (BALL, BOX, KEY)

# Competency labels used by the level registry below.
C_ROOM, C_DISTR_BOX, C_DISTR, C_MAZE = "ROOM", "DISTR-BOX", "DISTR", "MAZE"
C_UNBLOCK, C_UNLOCK, C_IMP_UNLOCK = "UNBLOCK", "UNLOCK", "IMP-UNLOCK"
C_GOTO, C_OPEN, C_PICKUP, C_PUT, C_LOC, C_SEQ = (
    "GOTO", "OPEN", "PICKUP", "PUT", "LOC", "SEQ")


class GenerationError(RuntimeError):
    """Mission generation exhausted its retry budget."""


@dataclass(frozen=True)
class LevelSpec:
    """Static description of one level: competencies, layout, grammar
    subset, and distractor policy."""

    level_id: str
    competencies: frozenset[str]
    maze: bool
    shape: GrammarShape
    n_distractors: int = 0
    grey_box_distractors: bool = False   # DISTR-BOX levels
    allow_door_blocking: bool = False    # UNBLOCK levels
    fixed_instruction_red_ball: bool = False
    single_object: bool = False          # one object, no distractors
    locked_target_door: bool = False     # explicit unlock levels
    sealed_room_prob: float = 0.0        # implicit-unlock room seal
    seal_holds_target: bool = False      # goto target lives in sealed room
    goto_doors: bool = False             # "go to" may reference doors
    lock_open_target_prob: float = 0.0   # lock the open-clause door
    omit_color_prob: float = 0.0
    loc_prob: float = 0.0
    articles: tuple[str, ...] = ("the",)
    extra_door_prob: float = 0.2


def _shape(verbs, **kw) -> GrammarShape:
    return GrammarShape(verbs=tuple(verbs), **kw)


_BASE = dict(maze=True, n_distractors=18)

LEVELS: dict[str, LevelSpec] = {}


def _register(spec: LevelSpec) -> None:
    LEVELS[spec.level_id] = spec


_register(LevelSpec(
    "GoToObj", frozenset({C_ROOM}), maze=False,
    shape=_shape([GOTO]), single_object=True))
_register(LevelSpec(
    "GoToRedBallGrey", frozenset({C_ROOM, C_DISTR_BOX}), maze=False,
    shape=_shape([GOTO]), n_distractors=7, grey_box_distractors=True,
    fixed_instruction_red_ball=True))
_register(LevelSpec(
    "GoToRedBall", frozenset({C_ROOM, C_DISTR_BOX, C_DISTR}), maze=False,
    shape=_shape([GOTO]), n_distractors=7, fixed_instruction_red_ball=True))
_register(LevelSpec(
    "GoToLocal", frozenset({C_ROOM, C_DISTR_BOX, C_DISTR, C_GOTO}),
    maze=False, shape=_shape([GOTO]), n_distractors=7))
_register(LevelSpec(
    "PutNextLocal", frozenset({C_ROOM, C_DISTR_BOX, C_DISTR, C_PUT}),
    maze=False, shape=_shape([PUT_NEXT]), n_distractors=7))
_register(LevelSpec(
    "PickupLoc", frozenset({C_ROOM, C_DISTR_BOX, C_DISTR, C_PICKUP, C_LOC}),
    maze=False, shape=_shape([PICKUP], allow_loc=True), n_distractors=7,
    loc_prob=0.5))
_register(LevelSpec(
    "GoToObjMaze", frozenset({C_ROOM, C_MAZE}), maze=True,
    shape=_shape([GOTO]), single_object=True))
_register(LevelSpec(
    "GoTo", frozenset({C_ROOM, C_DISTR_BOX, C_DISTR, C_MAZE, C_GOTO}),
    shape=_shape([GOTO]), **_BASE))
_register(LevelSpec(
    "Pickup", frozenset({C_ROOM, C_DISTR_BOX, C_DISTR, C_MAZE, C_PICKUP}),
    shape=_shape([PICKUP]), **_BASE))
_register(LevelSpec(
    "UnblockPickup",
    frozenset({C_ROOM, C_DISTR_BOX, C_DISTR, C_MAZE, C_UNBLOCK, C_PICKUP}),
    shape=_shape([PICKUP]), allow_door_blocking=True, **_BASE))
_register(LevelSpec(
    "Open", frozenset({C_ROOM, C_DISTR_BOX, C_DISTR, C_MAZE, C_OPEN}),
    shape=_shape([OPEN_VERB]), **_BASE))
_register(LevelSpec(
    "Unlock",
    frozenset({C_ROOM, C_DISTR_BOX, C_DISTR, C_MAZE, C_UNLOCK, C_OPEN}),
    shape=_shape([OPEN_VERB]), locked_target_door=True, **_BASE))
_register(LevelSpec(
    "PutNext", frozenset({C_ROOM, C_DISTR_BOX, C_DISTR, C_MAZE, C_PUT}),
    shape=_shape([PUT_NEXT]), **_BASE))
_register(LevelSpec(
    "Synth",
    frozenset({C_ROOM, C_DISTR_BOX, C_DISTR, C_MAZE, C_UNBLOCK, C_UNLOCK,
               C_GOTO, C_OPEN, C_PICKUP, C_PUT}),
    shape=_shape([GOTO, PICKUP, OPEN_VERB, PUT_NEXT]),
    allow_door_blocking=True, goto_doors=True, lock_open_target_prob=0.5,
    articles=("the", "a"), **_BASE))
_register(LevelSpec(
    "SynthLoc",
    frozenset({C_ROOM, C_DISTR_BOX, C_DISTR, C_MAZE, C_UNBLOCK, C_UNLOCK,
               C_GOTO, C_OPEN, C_PICKUP, C_PUT, C_LOC}),
    shape=_shape([GOTO, PICKUP, OPEN_VERB, PUT_NEXT], allow_loc=True),
    allow_door_blocking=True, goto_doors=True, lock_open_target_prob=0.5,
    omit_color_prob=0.25, loc_prob=0.4, articles=("the", "a"), **_BASE))
_register(LevelSpec(
    "GoToSeq",
    frozenset({C_ROOM, C_DISTR_BOX, C_DISTR, C_MAZE, C_GOTO, C_SEQ}),
    shape=_shape([GOTO], allow_seq=True, allow_and=True),
    goto_doors=True, **_BASE))
_register(LevelSpec(
    "SynthSeq",
    frozenset({C_ROOM, C_DISTR_BOX, C_DISTR, C_MAZE, C_UNBLOCK, C_UNLOCK,
               C_GOTO, C_OPEN, C_PICKUP, C_PUT, C_LOC, C_SEQ}),
    shape=_shape([GOTO, PICKUP, OPEN_VERB, PUT_NEXT], allow_seq=True,
                 allow_and=True, allow_loc=True),
    allow_door_blocking=True, goto_doors=True, lock_open_target_prob=0.3,
    omit_color_prob=0.25, loc_prob=0.3, articles=("the", "a"), **_BASE))
_register(LevelSpec(
    "GoToImpUnlock",
    frozenset({C_ROOM, C_DISTR_BOX, C_DISTR, C_MAZE, C_IMP_UNLOCK, C_GOTO}),
    shape=_shape([GOTO]), sealed_room_prob=1.0, seal_holds_target=True,
    **_BASE))
_register(LevelSpec(
    "BossLevel",
    frozenset({C_ROOM, C_DISTR_BOX, C_DISTR, C_MAZE, C_UNBLOCK, C_UNLOCK,
               C_IMP_UNLOCK, C_GOTO, C_OPEN, C_PICKUP, C_PUT, C_LOC, C_SEQ}),
    shape=_shape([GOTO, PICKUP, OPEN_VERB, PUT_NEXT], allow_seq=True,
                 allow_and=True, allow_loc=True),
    allow_door_blocking=True, goto_doors=True, sealed_room_prob=0.5,
    lock_open_target_prob=0.0, omit_color_prob=0.25, loc_prob=0.3,
    articles=("the", "a"), **_BASE))

LEVEL_IDS = tuple(LEVELS)
assert len(LEVEL_IDS) == 19


def get_level(level_id: str) -> LevelSpec:
    try:
        return LEVELS[level_id]
    except KeyError:
        raise KeyError(f"unknown level {level_id!r}; known: "
                       f"{', '.join(LEVEL_IDS)}") from None


def max_steps_for(maze: bool, instruction: Instruction) -> int:
    """Step budget: 64 per clause in a single room, 576 per clause in a maze
    (one 8x8-cell room footprint, times the 9-room bound)."""
    per_clause = 64 * (MAZE_SIDE * MAZE_SIDE if maze else 1)
    return per_clause * len(clauses_of(instruction))


# --- world construction -------------------------------------------------------

@dataclass
class _Maze:
    grid: WorldGrid
    doors: list[dict]              # {pos, obj, rooms: ((i,j),(i,j))}
    sealed_room: tuple | None = None
    sealed_door: dict | None = None


def _room_cells(i: int, j: int) -> list[tuple[int, int]]:
    return [(x, y)
            for y in range(1 + _SPAN * j, 1 + _SPAN * j + ROOM_SIZE)
            for x in range(1 + _SPAN * i, 1 + _SPAN * i + ROOM_SIZE)]


def _build_single_room() -> WorldGrid:
    grid = WorldGrid(ROOM_SIZE + 2, ROOM_SIZE + 2)
    grid.wall_rect(0, 0, ROOM_SIZE + 2, ROOM_SIZE + 2)
    return grid


def _maze_edges():
    """Adjacent room pairs of the 3x3 lattice, in a fixed order."""
    edges = []
    for j in range(MAZE_SIDE):
        for i in range(MAZE_SIDE):
            if i + 1 < MAZE_SIDE:
                edges.append(((i, j), (i + 1, j)))
            if j + 1 < MAZE_SIDE:
                edges.append(((i, j), (i, j + 1)))
    return edges


def _door_position(rng, a, b) -> tuple[int, int]:
    (ai, aj), (bi, bj) = a, b
    if ai != bi:  # vertical wall between horizontally adjacent rooms
        x = _SPAN * max(ai, bi)
        y = rng.randrange(1 + _SPAN * aj, 1 + _SPAN * aj + ROOM_SIZE)
    else:
        y = _SPAN * max(aj, bj)
        x = rng.randrange(1 + _SPAN * ai, 1 + _SPAN * ai + ROOM_SIZE)
    return x, y


def _build_maze(rng: random.Random, spec: LevelSpec,
                agent_room: tuple) -> _Maze:
    side = MAZE_SIDE * _SPAN + 1
    grid = WorldGrid(side, side)
    for y in range(side):
        for x in range(side):
            if x % _SPAN == 0 or y % _SPAN == 0:
                grid.set(x, y, WorldObject("wall", "grey"))

    edges = _maze_edges()
    order = list(edges)
    rng.shuffle(order)
    parent = {room: room for j in range(MAZE_SIDE)
              for room in [(i, j) for i in range(MAZE_SIDE)]}

    def find(r):
        while parent[r] != r:
            parent[r] = parent[parent[r]]
            r = parent[r]
        return r

    tree, extras = [], []
    for a, b in order:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            tree.append((a, b))
        else:
            extras.append((a, b))

    sealed_room = sealed_door_edge = None
    if spec.sealed_room_prob and rng.random() < spec.sealed_room_prob:
        degree = {}
        for a, b in tree:
            degree[a] = degree.get(a, 0) + 1
            degree[b] = degree.get(b, 0) + 1
        leaves = sorted(r for r, d in degree.items()
                        if d == 1 and r != agent_room)
        sealed_room = leaves[rng.randrange(len(leaves))]
        sealed_door_edge = next(e for e in tree if sealed_room in e)

    doors = []
    maze = _Maze(grid, doors)
    chosen = list(tree)
    for e in extras:
        if sealed_room is not None and sealed_room in e:
            continue  # the sealed room keeps a single, locked entrance
        if rng.random() < spec.extra_door_prob:
            chosen.append(e)
    for a, b in chosen:
        pos = _door_position(rng, a, b)
        obj = WorldObject(DOOR, rng.choice(COLORS), CLOSED)
        grid.set(*pos, obj)
        entry = {"pos": pos, "obj": obj, "rooms": (a, b)}
        doors.append(entry)
        if (a, b) == sealed_door_edge:
            obj.door_state = LOCKED
            maze.sealed_door = entry
    maze.sealed_room = sealed_room
    return maze


def _rooms_reachable(doors, start, blocked_door=None):
    """Rooms connected to start via doors, optionally treating one door as
    impassable."""
    adjacency = {}
    for door in doors:
        if door is blocked_door or door["obj"].door_state == LOCKED:
            continue
        a, b = door["rooms"]
        adjacency.setdefault(a, []).append(b)
        adjacency.setdefault(b, []).append(a)
    seen = {start}
    queue = [start]
    while queue:
        room = queue.pop()
        for nxt in adjacency.get(room, ()):
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return seen


# --- object and instruction assembly --------------------------------------------

def _cell_pool(spec: LevelSpec, grid: WorldGrid, maze: _Maze | None,
               rng: random.Random) -> list[tuple[int, int]]:
    """Empty interior cells usable for placement, in shuffled order."""
    if maze is None:
        cells = [(x, y) for x, y in _room_cells(0, 0)]
    else:
        cells = [c for j in range(MAZE_SIDE) for i in range(MAZE_SIDE)
                 for c in _room_cells(i, j)]
    if not spec.allow_door_blocking and maze is not None:
        near_doors = set()
        for door in maze.doors:
            dx, dy = door["pos"]
            near_doors.update({(dx + 1, dy), (dx - 1, dy),
                               (dx, dy + 1), (dx, dy - 1)})
        cells = [c for c in cells if c not in near_doors]
    cells = [c for c in cells if grid.get(*c) is None]
    rng.shuffle(cells)
    return cells


def _place(grid, cells, obj) -> tuple[int, int]:
    pos = cells.pop()
    grid.set(*pos, obj)
    return pos


def _place_in_room(grid, cells, room, obj) -> tuple[int, int]:
    allowed = set(_room_cells(*room))
    for idx in range(len(cells) - 1, -1, -1):
        if cells[idx] in allowed:
            pos = cells.pop(idx)
            grid.set(*pos, obj)
            return pos
    raise MalformedMissionError(f"no free cell in room {room}")


def _random_object(rng, kinds=DISTRACTOR_KINDS, exclude=()) -> WorldObject:
    while True:
        kind = rng.choice(kinds)
        color = rng.choice(COLORS)
        if (kind, color) not in exclude:
            return WorldObject(kind, color)


def _descriptor_for(rng, spec: LevelSpec, obj: WorldObject,
                    pos: tuple[int, int], start_pos, start_dir,
                    force_color: bool = False) -> Descriptor:
    article = rng.choice(spec.articles)
    color = obj.color
    if not force_color and spec.omit_color_prob \
            and rng.random() < spec.omit_color_prob:
        color = None
    loc = None
    if spec.loc_prob and rng.random() < spec.loc_prob:
        fits = [l for l in LOCATIONS
                if halfplane_contains(l, start_pos, start_dir, pos)]
        if fits:
            loc = rng.choice(fits)
    return Descriptor(article, color, obj.kind, loc)


class _Binder:
    """Fills a sampled instruction skeleton with descriptors of objects that
    actually exist in the candidate world."""

    def __init__(self, rng, spec, start_pos, start_dir, objects, doors):
        self.rng = rng
        self.spec = spec
        self.start = (start_pos, start_dir)
        self.non_doors = objects           # [(pos, obj)] in placement order
        self.doors = doors                 # [(pos, obj)]
        self.open_doors_bound: list[tuple[tuple[int, int], WorldObject]] = []

    def _pick(self, pool):
        assert pool, "binder pool is empty"
        return pool[self.rng.randrange(len(pool))]

    def bind_clause(self, clause: Clause) -> Clause:
        rng, spec = self.rng, self.spec
        if clause.verb == GOTO:
            pool = self.non_doors + (self.doors if spec.goto_doors else [])
            pos, obj = self._pick(pool)
            return Clause(GOTO, _descriptor_for(rng, spec, obj, pos, *self.start))
        if clause.verb == PICKUP:
            pos, obj = self._pick(self.non_doors)
            return Clause(PICKUP,
                          _descriptor_for(rng, spec, obj, pos, *self.start))
        if clause.verb == OPEN_VERB:
            pos, obj = self._pick(self.doors)
            self.open_doors_bound.append((pos, obj))
            return Clause(OPEN_VERB,
                          _descriptor_for(rng, spec, obj, pos, *self.start))
        # put next: distinct (kind, color, loc) descriptors, anchor may be
        # anything describable.
        for _ in range(20):
            tpos, tobj = self._pick(self.non_doors)
            apool = self.non_doors + (self.doors if spec.goto_doors else [])
            apos, aobj = self._pick(apool)
            if aobj is tobj:
                continue
            target = _descriptor_for(rng, spec, tobj, tpos, *self.start)
            anchor = _descriptor_for(rng, spec, aobj, apos, *self.start)
            if (target.kind, target.color, target.loc) != \
                    (anchor.kind, anchor.color, anchor.loc):
                return Clause(PUT_NEXT, target, anchor)
        raise MalformedMissionError("no distinct put-next pair available")

    def bind(self, skeleton: Instruction) -> Instruction:
        if isinstance(skeleton, Clause):
            return self.bind_clause(skeleton)
        if isinstance(skeleton, AndNode):
            return AndNode(self.bind_clause(skeleton.first),
                           self.bind_clause(skeleton.second))
        if isinstance(skeleton, ThenNode):
            return ThenNode(self.bind(skeleton.first),
                            self.bind(skeleton.second))
        return AfterNode(self.bind(skeleton.first),
                         self.bind(skeleton.second))


def _sample_skeleton(rng, spec: LevelSpec) -> Instruction:
    """Structure-only draw: verbs and connector layout from the level shape;
    descriptors are placeholders, rebound afterwards."""
    shape = spec.shape
    form = rng.choice(["single", "then", "after"]) if shape.allow_seq \
        else "single"

    def body():
        if shape.allow_and and rng.random() < 0.5:
            return AndNode(_placeholder(rng, shape), _placeholder(rng, shape))
        return _placeholder(rng, shape)

    if form == "single":
        return _placeholder(rng, shape)
    if form == "then":
        return ThenNode(body(), body())
    return AfterNode(body(), body())


def _placeholder(rng, shape: GrammarShape) -> Clause:
    verb = rng.choice(shape.verbs)
    dummy = Descriptor("the", None, BALL if verb != OPEN_VERB else DOOR)
    if verb == PUT_NEXT:
        return Clause(verb, dummy, Descriptor("the", None, BALL))
    return Clause(verb, dummy)


# --- candidate assembly -----------------------------------------------------------

def _build_candidate(spec: LevelSpec, rng: random.Random) -> Mission:
    agent_room = (rng.randrange(MAZE_SIDE), rng.randrange(MAZE_SIDE)) \
        if spec.maze else (0, 0)
    maze = _build_maze(rng, spec, agent_room) if spec.maze else None
    grid = maze.grid if maze else _build_single_room()
    doors = maze.doors if maze else []

    cells = _cell_pool(spec, grid, maze, rng)
    room_cells = set(_room_cells(*agent_room)) if maze is not None else None
    agent_pos = next(c for c in reversed(cells)
                     if room_cells is None or c in room_cells)
    cells.remove(agent_pos)
    agent = AgentState(agent_pos, rng.randrange(4))

    placed: list[tuple[tuple[int, int], WorldObject]] = []
    exclude: set[tuple[str, str]] = set()
    instruction: Instruction | None = None

    if spec.locked_target_door:
        # Explicit unlock: one locked door with a unique color; its key is
        # reachable without crossing it.
        target_door = doors[rng.randrange(len(doors))]
        color = target_door["obj"].color
        for door in doors:
            if door is not target_door and door["obj"].color == color:
                door["obj"].color = rng.choice(
                    [c for c in COLORS if c != color])
        target_door["obj"].door_state = LOCKED
        reachable = sorted(_rooms_reachable(doors, agent_room,
                                            blocked_door=target_door))
        key_room = reachable[rng.randrange(len(reachable))]
        _place_in_room(grid, cells, key_room, WorldObject(KEY, color))
        exclude.add((KEY, color))
        instruction = Clause(OPEN_VERB, Descriptor(
            rng.choice(spec.articles), color, DOOR))

    if maze is not None and maze.sealed_room is not None:
        seal_color = maze.sealed_door["obj"].color
        outside = sorted(r for j in range(MAZE_SIDE)
                         for r in [(i, j) for i in range(MAZE_SIDE)]
                         if r != maze.sealed_room)
        key_room = outside[rng.randrange(len(outside))]
        _place_in_room(grid, cells, key_room, WorldObject(KEY, seal_color))
        if spec.seal_holds_target:
            target = _random_object(rng, exclude={(KEY, seal_color)})
            tpos = _place_in_room(grid, cells, maze.sealed_room, target)
            exclude.add((target.kind, target.color))
            instruction = Clause(GOTO, Descriptor(
                rng.choice(spec.articles), target.color, target.kind))

    if spec.fixed_instruction_red_ball:
        ball = WorldObject(BALL, "red")
        placed.append((_place(grid, cells, ball), ball))
        instruction = Clause(GOTO, Descriptor("the", "red", BALL))

    if spec.single_object:
        obj = _random_object(rng)
        placed.append((_place(grid, cells, obj), obj))
        instruction = Clause(GOTO, Descriptor("the", obj.color, obj.kind))

    for _ in range(spec.n_distractors):
        obj = (WorldObject(BOX, "grey") if spec.grey_box_distractors
               else _random_object(rng, exclude=exclude))
        placed.append((_place(grid, cells, obj), obj))

    if instruction is None:
        non_doors = sorted(((p, o) for p, o in placed
                            if o is not None and o.kind != DOOR),
                           key=lambda item: (item[0][1], item[0][0]))
        door_pool = sorted(((d["pos"], d["obj"]) for d in doors),
                           key=lambda item: (item[0][1], item[0][0]))
        binder = _Binder(rng, spec, agent.pos, agent.direction,
                         non_doors, door_pool)
        instruction = binder.bind(_sample_skeleton(rng, spec))
        if spec.lock_open_target_prob and binder.open_doors_bound \
                and rng.random() < spec.lock_open_target_prob:
            dpos, dobj = binder.open_doors_bound[0]
            entry = next(d for d in doors if d["obj"] is dobj)
            if dobj.door_state == CLOSED:
                dobj.door_state = LOCKED
                reachable = sorted(_rooms_reachable(doors, agent_room,
                                                    blocked_door=entry))
                key_room = reachable[rng.randrange(len(reachable))]
                _place_in_room(grid, cells, key_room,
                               WorldObject(KEY, dobj.color))

    return Mission(
        level_id=spec.level_id,
        seed=-1,  # filled by make_mission
        grid=grid,
        agent_start=agent,
        instruction=instruction,
        max_steps=max_steps_for(spec.maze, instruction),
    )


def validate_solvable(mission: Mission) -> DemoEpisode | None:
    """Run the bot; a successful demonstration witnesses solvability."""
    try:
        demo = generate_demo(mission)
    except BotError:
        return None
    return demo if demo.success else None


def make_mission(level_id: str, seed: int, max_attempts: int = 64) -> Mission:
    """Deterministically generate a solvable mission for (level_id, seed)."""
    spec = get_level(level_id)
    rng = random.Random(f"{level_id}:{seed}")
    for _ in range(max_attempts):
        try:
            mission = _build_candidate(spec, rng)
        except MalformedMissionError:
            continue
        try:
            verifier = VerifierState(mission.instruction, mission.grid,
                                     mission.agent_start)
        except MalformedMissionError:
            continue
        if verifier.pre_satisfied_clauses(mission.grid, mission.agent_start):
            continue
        demo = validate_solvable(mission)
        if demo is None:
            continue
        mission.seed = seed
        demo.seed = seed
        mission.witness = demo
        return mission
    raise GenerationError(
        f"no solvable {level_id} mission within {max_attempts} attempts "
        f"for seed {seed}")
