import json
import subprocess
import sys
from pathlib import Path

import pytest

from babyworld.cli import main
from babyworld.estimator import RunRecord, write_results_csv
from babyworld.language import parse
from babyworld.missions import mission_from_json

DATA = Path(__file__).parent / "data"


def run_cli(*argv, **kw):
    return subprocess.run([sys.executable, "-m", "babyworld.cli", *argv],
                          capture_output=True, text=True, **kw)


def test_count_language_reports_expected_figure(capsys):
    assert main(["count-language"]) == 0
    out = capsys.readouterr().out
    assert "2.483e+19 instructions" in out
    exact = int(out.splitlines()[1].split(": ")[1])
    assert f"{exact:.2e}" == "2.48e+19"


def test_mission_stdout_deterministic(capsys):
    assert main(["mission", "GoToRedBall", "5"]) == 0
    first = capsys.readouterr().out
    assert main(["mission", "GoToRedBall", "5"]) == 0
    assert capsys.readouterr().out == first


@pytest.mark.parametrize("level,seed", [("GoToObj", 1), ("BossLevel", 2)])
def test_mission_stdout_matches_golden(capsys, level, seed):
    golden = (DATA / f"golden_mission_{level}_{seed}.txt").read_text()
    assert main(["mission", level, str(seed)]) == 0
    assert capsys.readouterr().out == golden


def test_mission_json_round_trips(capsys):
    assert main(["mission", "PutNextLocal", "3", "--json"]) == 0
    blob = json.loads(capsys.readouterr().out)
    mission = mission_from_json(blob)
    assert mission.level_id == "PutNextLocal"
    assert mission.instruction == parse(blob["instruction"])


def test_boss_mission_instruction_parses(capsys):
    assert main(["mission", "BossLevel", "11"]) == 0
    out = capsys.readouterr().out
    line = next(l for l in out.splitlines() if l.startswith("instruction: "))
    parse(line.removeprefix("instruction: "))


def test_unknown_level_is_usage_error():
    result = run_cli("mission", "NotALevel", "1")
    assert result.returncode == 2


def test_gen_demos_and_verify_round_trip(tmp_path, capsys):
    out = tmp_path / "demos.txt"
    assert main(["gen-demos", "GoToLocal", "12", str(out)]) == 0
    assert "wrote 12 demos" in capsys.readouterr().out
    assert main(["verify", str(out)]) == 0
    assert "all 12 episodes verified" in capsys.readouterr().out


def test_verify_flags_tampering(tmp_path, capsys):
    out = tmp_path / "demos.txt"
    assert main(["gen-demos", "GoToObj", "4", str(out)]) == 0
    capsys.readouterr()
    lines = out.read_text().splitlines()
    seed, success, reward, actions, text = lines[-1].split("\t", 4)
    lines[-1] = "\t".join([seed, success, "0.5", actions, text])
    out.write_text("\n".join(lines) + "\n")
    assert main(["verify", str(out)]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_estimate_produces_report(tmp_path, capsys):
    csv_path = tmp_path / "runs.csv"
    records = []
    for i in range(14):
        x = -2.0 + 0.35 * i
        records.append(RunRecord(k=int(round(4096 * 2 ** x)),
                                 s=99.0 + 0.9 * x, level="GoToRedBall",
                                 run_id=f"r{i}"))
    write_results_csv(csv_path, records)
    report_path = tmp_path / "report.csv"
    assert main(["estimate", str(csv_path), "--out", str(report_path),
                 "--samples", "20000"]) == 0
    out = capsys.readouterr().out
    assert "GoToRedBall" in out
    assert report_path.read_text().startswith("level,k_lo,k_hi,residual")


def test_estimate_insufficient_data_is_domain_error(tmp_path, capsys):
    csv_path = tmp_path / "runs.csv"
    write_results_csv(csv_path, [RunRecord(100, 50.0, "GoTo", "a"),
                                 RunRecord(200, 60.0, "GoTo", "b")])
    assert main(["estimate", str(csv_path)]) == 1


def test_bench_reports_rate(capsys):
    assert main(["bench", "--steps", "2000"]) == 0
    assert "steps/s" in capsys.readouterr().out


def test_play_scripted_win_and_quit():
    from babyworld.levels import make_mission
    mission = make_mission("GoToObj", 1)
    keymap = {0: "a", 1: "d", 2: "w", 3: "p", 4: "x", 5: "t", 6: "n"}
    keys = "".join(keymap[a] for a in mission.witness.actions)

    win = run_cli("play", "GoToObj", "1", input=keys + "\n")
    assert win.returncode == 0
    assert "success=True" in win.stdout
    expected = 1.0 - 0.9 * len(mission.witness.actions) / mission.max_steps
    assert f"reward={expected}" in win.stdout

    quit_run = run_cli("play", "GoToObj", "1", input="q\n")
    assert quit_run.returncode == 1
    assert "success=False reward=0.0" in quit_run.stdout

    noisy = run_cli("play", "GoToObj", "1", input="zz!!" + keys + "\n")
    assert noisy.returncode == 0  # invalid keys ignored


def test_evaluate_bot_agent_over_subprocess_protocol():
    agent_cmd = f"{sys.executable} -m babyworld.cli agent-bot"
    result = run_cli("evaluate", agent_cmd, "GoToRedBall", "6")
    assert result.returncode == 0, result.stderr
    assert "success_rate 1.000" in result.stdout
