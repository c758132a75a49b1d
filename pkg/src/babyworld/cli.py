"""Operator surface: inspect missions, play interactively, generate and
verify demo datasets, evaluate external agents over a line-oriented JSON
protocol, run the sample-efficiency estimator, and benchmark throughput.

Exit codes: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import random
import select
import shlex
import subprocess
import sys
import time

from babyworld.bot import Bot
from babyworld.estimator import (
    NoCrossingError, NotEnoughDataError, estimate_levels, format_report,
    read_results_csv, write_report_csv,
)
from babyworld.harness import (
    AgentPort, evaluate, generate_dataset, save_demos, verify_demo_file,
)
from babyworld.language import count_instructions
from babyworld.levels import LEVEL_IDS, GenerationError, make_mission
from babyworld.missions import Episode, mission_to_json
from babyworld.world import (
    BALL, BOX, DOOR, GOAL, KEY, LOCKED, OPEN, WALL, Action, Observation,
)

_KIND_CHARS = {WALL: "#", KEY: "K", BALL: "O", BOX: "B", GOAL: "G"}
_AGENT_CHARS = "^>v<"
_PLAY_KEYS = {
    "a": Action.turn_left, "d": Action.turn_right, "w": Action.move_forward,
    "p": Action.pickup, "x": Action.drop, "t": Action.toggle,
    "n": Action.done,
}


def render_grid_ascii(grid, agent=None) -> str:
    """Two characters per cell: color initial + kind letter."""
    rows = []
    for y in range(grid.height):
        row = []
        for x in range(grid.width):
            if agent is not None and agent.pos == (x, y):
                row.append(_AGENT_CHARS[agent.direction] * 2)
                continue
            obj = grid.get(x, y)
            if obj is None:
                row.append("..")
            elif obj.kind == WALL:
                row.append("##")
            elif obj.kind == DOOR:
                glyph = {OPEN: "_", LOCKED: "L"}.get(obj.door_state, "D")
                row.append(obj.color[0] + glyph)
            else:
                row.append(obj.color[0] + _KIND_CHARS[obj.kind])
        rows.append("".join(row))
    return "\n".join(rows)


def render_observation_ascii(obs: Observation) -> str:
    color_chars = "rgbpyG"  # red green blue purple yellow Grey
    kind_chars = {4: "K", 5: "O", 6: "B", 7: "G"}
    rows = []
    for r in range(7):
        row = []
        for c in range(7):
            kind, color, state = (int(v) for v in obs.grid_code[r, c])
            if kind == 0:
                row.append("??")
            elif kind == 1:
                row.append("..")
            elif kind == 2:
                row.append("##")
            elif kind == 3:
                row.append(color_chars[color] + "_DL"[state])
            else:
                row.append(color_chars[color] + kind_chars[kind])
        rows.append("".join(row))
    return "\n".join(rows)


# --- subcommands ---------------------------------------------------------------

def cmd_mission(args) -> int:
    mission = make_mission(args.level, args.seed)
    if args.json:
        print(json.dumps(mission_to_json(mission), indent=2, sort_keys=True))
        return 0
    print(f"level: {mission.level_id}  seed: {mission.seed}  "
          f"max_steps: {mission.max_steps}")
    print(f"instruction: {mission.instruction_text}")
    print(render_grid_ascii(mission.grid, mission.agent_start))
    return 0


def cmd_play(args) -> int:
    mission = make_mission(args.level, args.seed)
    ep = Episode(mission)
    out = sys.stdout
    print(f"instruction: {mission.instruction_text}", file=out)
    print("keys: a=left d=right w=forward p=pickup x=drop t=toggle "
          "n=done q=quit", file=out)
    print(render_grid_ascii(ep.grid, ep.agent), file=out)
    for line in sys.stdin:
        for ch in line.strip():
            if ch == "q":
                print(f"quit: success=False reward=0.0", file=out)
                return 1
            action = _PLAY_KEYS.get(ch)
            if action is None:
                continue  # invalid key: ignored
            ep.step(action)
            print(render_grid_ascii(ep.grid, ep.agent), file=out)
            print("view:", file=out)
            print(render_observation_ascii(ep.observation()), file=out)
            if ep.done:
                print(f"done: success={ep.success} reward={ep.reward}",
                      file=out)
                return 0 if ep.success else 1
    print(f"end of input: success=False reward=0.0", file=out)
    return 1


def cmd_gen_demos(args) -> int:
    demos = generate_dataset(args.level, args.count, source="bot",
                             seed0=args.seed0, workers=args.workers)
    save_demos(demos, args.out)
    lengths = [len(ep.actions) for ep in demos.episodes]
    print(f"wrote {len(demos)} demos to {args.out} "
          f"(mean length {sum(lengths) / len(lengths):.2f})")
    return 0


def cmd_verify(args) -> int:
    ok, errors = verify_demo_file(args.path)
    if errors:
        for err in errors:
            print(f"FAIL {err}")
        print(f"{ok} verified, {len(errors)} failed")
        return 1
    print(f"all {ok} episodes verified")
    return 0


class SubprocessAgent(AgentPort):
    """Speaks the line-oriented JSON protocol with an external process:
    one observation JSON line out, one integer action code line back."""

    def __init__(self, command: str, timeout: float = 30.0):
        self.proc = subprocess.Popen(
            shlex.split(command), stdin=subprocess.PIPE,
            stdout=subprocess.PIPE, text=True, bufsize=1)
        self.timeout = timeout
        self.mission = None
        self.step_index = 0

    def reset(self, mission):
        self.mission = mission
        self.step_index = 0

    def act(self, obs: Observation) -> Action:
        message = json.dumps({
            "level": self.mission.level_id,
            "seed": self.mission.seed,
            "step": self.step_index,
            "mission": obs.mission_text,
            "grid_code": [int(v) for v in obs.grid_code.reshape(-1)],
        })
        self.proc.stdin.write(message + "\n")
        self.proc.stdin.flush()
        ready, _, _ = select.select([self.proc.stdout], [], [], self.timeout)
        if not ready:
            raise TimeoutError("agent did not answer within "
                               f"{self.timeout}s")
        reply = self.proc.stdout.readline()
        if not reply:
            raise RuntimeError("agent closed its stdout")
        self.step_index += 1
        return Action(int(reply.strip()))

    def close(self):
        if self.proc.poll() is None:
            self.proc.terminate()
        self.proc.wait()


def cmd_evaluate(args) -> int:
    agent = SubprocessAgent(args.agent_cmd, timeout=args.timeout)
    try:
        rate = evaluate(agent, args.level, args.episodes, seed0=args.seed0)
    finally:
        agent.close()
    print(f"success_rate {rate:.3f} over {args.episodes} episodes")
    return 0


def cmd_agent_bot(args) -> int:
    """The bundled protocol agent: regenerates the announced mission and
    answers with expert actions from its own lockstep simulation."""
    episode = bot = None
    for line in sys.stdin:
        if not line.strip():
            continue
        request = json.loads(line)
        if request["step"] == 0:
            mission = make_mission(request["level"], request["seed"])
            episode = Episode(mission)
            bot = Bot(mission)
        action = bot.next_action(episode.grid, episode.agent)
        if not episode.done:
            episode.step(action)
        print(int(action), flush=True)
    return 0


def cmd_estimate(args) -> int:
    by_level = read_results_csv(args.csv)
    try:
        estimates = estimate_levels(by_level, n_samples=args.samples)
    except (NotEnoughDataError, NoCrossingError) as err:
        print(f"error: {err}")
        return 1
    print(format_report(estimates))
    if args.out:
        write_report_csv(args.out, estimates)
    return 0


def cmd_count_language(args) -> int:
    total = count_instructions()
    print(f"{total:.3e} instructions")
    print(f"exact: {total}")
    return 0


def cmd_bench(args) -> int:
    mission = make_mission("GoToObj", 0)
    rng = random.Random(0)
    ep = Episode(mission)
    start = time.perf_counter()
    done = 0
    while done < args.steps:
        if ep.done:
            ep = Episode(mission)
        ep.observation()
        ep.step(Action(rng.randrange(7)))
        done += 1
    rate = done / (time.perf_counter() - start)
    print(f"{rate:.0f} steps/s over {done} random-action steps "
          "(observation rendered every step)")
    return 0


# --- argument parsing -------------------------------------------------------------

def _level_arg(value: str) -> str:
    if value not in LEVEL_IDS:
        raise argparse.ArgumentTypeError(
            f"unknown level {value!r}; choose from {', '.join(LEVEL_IDS)}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="babyworld",
        description="Gridworld platform with a compositional instruction "
                    "language, expert bot, and sample-efficiency tooling.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mission", help="print a generated mission")
    p.add_argument("level", type=_level_arg)
    p.add_argument("seed", type=int)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_mission)

    p = sub.add_parser("play", help="play a mission from the keyboard")
    p.add_argument("level", type=_level_arg)
    p.add_argument("seed", type=int)
    p.set_defaults(func=cmd_play)

    p = sub.add_parser("gen-demos", help="bulk-generate bot demonstrations")
    p.add_argument("level", type=_level_arg)
    p.add_argument("count", type=int)
    p.add_argument("out")
    p.add_argument("--seed0", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_gen_demos)

    p = sub.add_parser("verify", help="replay-verify a demo file")
    p.add_argument("path")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("evaluate", help="evaluate an external agent")
    p.add_argument("agent_cmd")
    p.add_argument("level", type=_level_arg)
    p.add_argument("episodes", type=int)
    p.add_argument("--seed0", type=int, default=0)
    p.add_argument("--timeout", type=float, default=30.0)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("agent-bot", help="run the bot as a protocol agent")
    p.set_defaults(func=cmd_agent_bot)

    p = sub.add_parser("estimate", help="sample-efficiency report from CSV")
    p.add_argument("csv")
    p.add_argument("--out")
    p.add_argument("--samples", type=int, default=100_000)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("count-language", help="count distinct instructions")
    p.set_defaults(func=cmd_count_language)

    p = sub.add_parser("bench", help="single-thread throughput benchmark")
    p.add_argument("--steps", type=int, default=30_000)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (GenerationError, OSError, ValueError, TimeoutError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
