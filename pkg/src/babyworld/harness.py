"""Dataset and evaluation tooling: bulk demo generation, the line-oriented
demo file format, replay verification, agent evaluation, and the
interactive dataset-growth protocol with a pluggable agent."""

from __future__ import annotations

import hashlib
import json
import logging
import multiprocessing
from dataclasses import dataclass, field

from babyworld.bot import Bot
from babyworld.levels import get_level, make_mission
from babyworld.missions import DemoEpisode, Episode, Mission, replay_demo
from babyworld.world import (
    Action, COLOR_CODES, KIND_CODES, Observation, STATE_CODES,
)

FORMAT_VERSION = "babyworld-demos v1"

logger = logging.getLogger(__name__)


def coding_hash() -> str:
    """Fingerprint of the integer coding tables demo files depend on."""
    blob = json.dumps([KIND_CODES, COLOR_CODES, STATE_CODES,
                       [a.name for a in Action]], sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


class DemoFormatError(ValueError):
    pass


class DatasetSourceError(RuntimeError):
    """The demonstration source succeeds too rarely to be usable."""


@dataclass
class DemoSet:
    level_id: str
    episodes: list[DemoEpisode] = field(default_factory=list)

    def __len__(self):
        return len(self.episodes)


class AgentPort:
    """Episodic decision interface for external agents."""

    def reset(self, mission: Mission) -> None:
        raise NotImplementedError

    def act(self, obs: Observation) -> Action:
        raise NotImplementedError


class BotAgent(AgentPort):
    """The expert bot behind the AgentPort interface.

    The bot plans on environment state, not observations, so this wrapper
    runs its own episode simulation in lockstep (the environment is
    deterministic, so the observed episode and the internal one agree).
    """

    def reset(self, mission: Mission) -> None:
        self._episode = Episode(mission)
        self._bot = Bot(mission)

    def act(self, obs: Observation) -> Action:
        action = self._bot.next_action(self._episode.grid, self._episode.agent)
        self._episode.step(action)
        return action


# --- demo files ----------------------------------------------------------------

def save_demos(demos: DemoSet, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{FORMAT_VERSION}\n")
        fh.write(f"level: {demos.level_id}\n")
        fh.write(f"coding: {coding_hash()}\n")
        fh.write(f"count: {len(demos.episodes)}\n")
        fh.write("---\n")
        for ep in demos.episodes:
            actions = "".join(str(code) for code in ep.actions)
            fh.write(f"{ep.seed}\t{int(ep.success)}\t{ep.reward!r}\t"
                     f"{actions}\t{ep.instruction_text}\n")


def load_demos(path: str) -> DemoSet:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != FORMAT_VERSION:
        raise DemoFormatError(f"not a {FORMAT_VERSION} file: {path}")
    header = {}
    body_at = None
    for i, line in enumerate(lines[1:], start=1):
        if line == "---":
            body_at = i + 1
            break
        key, _, value = line.partition(": ")
        header[key] = value
    if body_at is None or "level" not in header:
        raise DemoFormatError("missing header or separator")
    if header.get("coding") != coding_hash():
        raise DemoFormatError("demo file was written with different "
                              "integer coding tables")
    demos = DemoSet(header["level"])
    for line in lines[body_at:]:
        if not line:
            continue
        seed, success, reward, actions, text = line.split("\t", 4)
        demos.episodes.append(DemoEpisode(
            level_id=demos.level_id,
            seed=int(seed),
            instruction_text=text,
            actions=[int(ch) for ch in actions],
            success=success == "1",
            reward=float(reward),
        ))
    if "count" in header and int(header["count"]) != len(demos.episodes):
        raise DemoFormatError("episode count mismatch")
    return demos


def verify_demo_file(path: str) -> tuple[int, list[str]]:
    """Replay every stored episode; returns (ok_count, error descriptions)."""
    demos = load_demos(path)
    errors = []
    for ep in demos.episodes:
        mission = make_mission(demos.level_id, ep.seed)
        if mission.instruction_text != ep.instruction_text:
            errors.append(f"seed {ep.seed}: instruction mismatch")
            continue
        success, reward = replay_demo(mission, ep.actions)
        if success != ep.success or reward != ep.reward:
            errors.append(f"seed {ep.seed}: replay gave "
                          f"(success={success}, reward={reward})")
    return len(demos.episodes) - len(errors), errors


# --- dataset generation ------------------------------------------------------------

def _witness_for_seed(args) -> DemoEpisode:
    level_id, seed = args
    return make_mission(level_id, seed).witness


def generate_dataset(level_id: str, n: int, source="bot", seed0: int = 0,
                     success_floor: float = 0.1, min_probe: int = 50,
                     workers: int = 1) -> DemoSet:
    """n successful episodes over consecutive seeds starting at seed0.

    source is "bot" (the generator's witness demos) or an AgentPort; failed
    agent episodes are skipped. An agent whose success rate stays under
    success_floor after min_probe attempts aborts with statistics.
    """
    assert n >= 1
    get_level(level_id)
    demos = DemoSet(level_id)
    if source == "bot":
        seeds = [(level_id, seed0 + i) for i in range(n)]
        if workers > 1:
            with multiprocessing.Pool(workers) as pool:
                demos.episodes = pool.map(_witness_for_seed, seeds)
        else:
            demos.episodes = [_witness_for_seed(s) for s in seeds]
        return demos

    agent, attempts, skipped, seed = source, 0, 0, seed0
    while len(demos.episodes) < n:
        mission = make_mission(level_id, seed)
        episode = run_agent_episode(agent, mission)
        attempts += 1
        if episode.success:
            demos.episodes.append(episode)
        else:
            skipped += 1
            logger.info("skipping failed %s episode for seed %d "
                        "(%d skipped so far)", level_id, seed, skipped)
        if attempts >= min_probe and \
                len(demos.episodes) / attempts < success_floor:
            raise DatasetSourceError(
                f"source succeeded {len(demos.episodes)}/{attempts} times "
                f"(floor {success_floor:.0%})")
        seed += 1
    if skipped:
        logger.info("collected %d %s demos over %d attempts (%d failures "
                    "skipped)", n, level_id, attempts, skipped)
    return demos


def run_agent_episode(agent: AgentPort, mission: Mission) -> DemoEpisode:
    agent.reset(mission)
    ep = Episode(mission)
    actions = []
    while not ep.done:
        action = agent.act(ep.observation())
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


def evaluate(agent: AgentPort, level_id: str, n_episodes: int,
             seed0: int = 0) -> float:
    """Fraction of missions accomplished within the step budget."""
    assert n_episodes >= 1
    wins = 0
    for i in range(n_episodes):
        mission = make_mission(level_id, seed0 + i)
        if run_agent_episode(agent, mission).success:
            wins += 1
    return wins / n_episodes


# --- interactive dataset growth ------------------------------------------------------

@dataclass
class GrowthTrace:
    """(dataset_size, success_rate) per round, plus the final dataset."""

    points: list[tuple[int, float]] = field(default_factory=list)
    probes: int = 0
    final_dataset: DemoSet | None = None


def growth_schedule(base: int, factor: float, rounds: int) -> list[int]:
    return [round(base * factor ** i) for i in range(rounds)]


def interactive_growth(level_id: str, trainer, base: int = 2 ** 10,
                       factor: float = 2 ** 0.25, stop_rate: float = 0.99,
                       max_rounds: int = 24, eval_episodes: int = 256,
                       eval_seed0: int = 10_000_000,
                       probe_seed0: int = 20_000_000,
                       max_probes: int = 200_000) -> GrowthTrace:
    """Grow a demo set by collecting bot demos for missions the current
    agent fails, retraining from scratch each round."""
    demos = generate_dataset(level_id, base, source="bot", seed0=0)
    for ep in demos.episodes:
        ep.source_tag = "base"
    trace = GrowthTrace()
    probe_seed = probe_seed0
    for round_idx in range(max_rounds):
        agent = trainer(demos)  # a fresh agent every round
        rate = evaluate(agent, level_id, eval_episodes, eval_seed0)
        trace.points.append((len(demos.episodes), rate))
        if rate >= stop_rate:
            break
        target_size = round(base * factor ** (round_idx + 1))
        while len(demos.episodes) < target_size:
            if trace.probes >= max_probes:
                raise RuntimeError("probe budget exhausted while growing "
                                   f"dataset for {level_id}")
            mission = make_mission(level_id, probe_seed)
            probe_seed += 1
            trace.probes += 1
            if run_agent_episode(agent, mission).success:
                continue
            witness = mission.witness
            witness.source_tag = "failed-mission"
            demos.episodes.append(witness)
    trace.final_dataset = demos
    return trace


def smooth_success_curve(raw, window: int = 10) -> list[float]:
    """Trailing-window mean; the window is shorter at the head."""
    return [sum(raw[max(0, i - window + 1):i + 1]) / min(i + 1, window)
            for i in range(len(raw))]
