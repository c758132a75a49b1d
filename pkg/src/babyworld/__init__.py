"""BabyWorld: a partially observable gridworld with a compositional
instruction language, an automatic verifier, 19 procedurally generated
levels, a rule-based expert bot, demonstration tooling, and a
Gaussian-process sample-efficiency estimator."""

from babyworld.bot import Bot, BotError, generate_demo
from babyworld.harness import (
    AgentPort,
    BotAgent,
    DemoSet,
    evaluate,
    generate_dataset,
    interactive_growth,
    load_demos,
    save_demos,
    smooth_success_curve,
    verify_demo_file,
)
from babyworld.language import (
    GrammarShape,
    Instruction,
    count_instructions,
    parse,
    sample_instruction,
    to_text,
)
from babyworld.levels import (
    LEVEL_IDS,
    LEVELS,
    GenerationError,
    make_mission,
    max_steps_for,
    validate_solvable,
)
from babyworld.missions import (
    DemoEpisode,
    Episode,
    Mission,
    mission_from_json,
    mission_to_json,
    replay_demo,
)
from babyworld.estimator import (
    GPModel,
    KminPosterior,
    RunRecord,
    credible_interval,
    early_stopped_score,
    fit_gp,
    kmin_posterior,
    normal_time,
    rl_confidence_interval,
)
from babyworld.verifier import (
    IN_PROGRESS,
    SUCCESS,
    VerifierState,
    resolve_descriptor,
)
from babyworld.world import (
    Action,
    AgentState,
    Observation,
    WorldGrid,
    WorldObject,
    apply_action,
    compute_reward,
    render_observation,
)

__all__ = [
    "Action", "AgentPort", "AgentState", "Bot", "BotAgent", "BotError",
    "DemoEpisode", "DemoSet", "Episode", "GPModel", "GenerationError",
    "GrammarShape", "IN_PROGRESS", "Instruction", "KminPosterior",
    "LEVELS", "LEVEL_IDS", "Mission", "Observation", "RunRecord", "SUCCESS",
    "VerifierState", "WorldGrid", "WorldObject", "apply_action",
    "compute_reward", "count_instructions", "credible_interval",
    "early_stopped_score", "evaluate", "fit_gp", "generate_dataset",
    "generate_demo", "interactive_growth", "kmin_posterior", "load_demos",
    "make_mission", "max_steps_for", "mission_from_json", "mission_to_json",
    "normal_time", "parse", "render_observation", "replay_demo",
    "resolve_descriptor", "rl_confidence_interval", "sample_instruction",
    "save_demos", "smooth_success_curve", "to_text", "validate_solvable",
    "verify_demo_file",
]

__version__ = "0.1.0"
