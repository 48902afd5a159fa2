import json
from pathlib import Path

import pytest

from visprog3d.cli import main

GOLDEN = Path(__file__).parent / "golden"
OFFICE = GOLDEN / "scenes" / "office.json"
KEYBOARD = "BOX0 = LOC('keyboard')\nBOX1 = LOC('door')\nTARGET = CLOSEST(BOX0, BOX1)\n"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def program(tmp_path):
    path = tmp_path / "prog.txt"
    path.write_text(KEYBOARD)
    return path


def test_parse_valid(capsys, program):
    code, out, _ = run(capsys, "parse", program)
    assert code == 0 and json.loads(out)["statements"] == 3


def test_parse_pretty(capsys, tmp_path):
    path = tmp_path / "p.txt"
    path.write_text("box0=loc( 'door' )")
    code, out, _ = run(capsys, "parse", path, "--pretty")
    assert code == 0 and out == "BOX0 = LOC('door')\n"


def test_parse_unknown_op(capsys, tmp_path):
    path = tmp_path / "p.txt"
    path.write_text("A = TELEPORT('x')")
    code, _, err = run(capsys, "parse", path)
    assert code == 2 and "TELEPORT" in err and ":1:5:" in err


def test_parse_empty_file(capsys, tmp_path):
    path = tmp_path / "p.txt"
    path.write_text("")
    assert run(capsys, "parse", path)[0] == 2


def test_narrate(capsys):
    code, out, _ = run(capsys, "narrate", "--scene", OFFICE)
    lines = out.splitlines()
    assert code == 0 and len(lines) == 6
    assert lines[0] == "Object 1 is a keyboard located at (1.00, 0.50, 0.80) with sizes (0.40, 0.15, 0.05)."


def test_ground_with_program(capsys, program):
    code, out, _ = run(capsys, "ground", "It is the keyboard closest to the door", "--scene", OFFICE,
                       "--program", program)
    doc = json.loads(out)
    assert code == 0 and doc["outcome"]["target_id"] == 2 and len(doc["steps"]) == 3


def test_ground_pretty(capsys, program):
    code, out, _ = run(capsys, "ground", "q", "--scene", OFFICE, "--program", program, "--pretty")
    assert code == 0 and "target: object 2" in out


def test_ground_with_votes(capsys, tmp_path):
    fixture = tmp_path / "canned.json"
    fixture.write_text(json.dumps({"the keyboard": [
        KEYBOARD, "TARGET = LOC('keyboard')", KEYBOARD]}))
    code, out, _ = run(capsys, "ground", "the keyboard", "--scene", OFFICE,
                       "--backend", f"canned:{fixture}", "--votes", 3, "--jobs", 2)
    doc = json.loads(out)
    assert code == 0
    assert doc["vote"] == {"winner_object_id": 2, "tally": {"1": 1, "2": 2}, "runs": 3}
    assert len(doc["runs"]) == 3 and doc["outcome"]["target_id"] == 2


def test_ground_dialog_mode(capsys, tmp_path):
    fixture = tmp_path / "canned.json"
    fixture.write_text(json.dumps({"the door": "I think it is Object 3, the door."}))
    code, out, _ = run(capsys, "ground", "the door", "--scene", OFFICE, "--backend", f"canned:{fixture}",
                       "--mode", "dialog")
    assert code == 0 and json.loads(out)["outcome"]["target_id"] == 3


def test_ground_generation_failure_exit_code(capsys, tmp_path):
    fixture = tmp_path / "canned.json"
    fixture.write_text(json.dumps({"the door": "Sorry, I cannot help with that."}))
    code, out, _ = run(capsys, "ground", "the door", "--scene", OFFICE, "--backend", f"canned:{fixture}")
    assert code == 3 and json.loads(out)["outcome"]["failure_stage"] == "program-generation"


def test_ground_missing_scene(capsys, program):
    code, _, err = run(capsys, "ground", "q", "--scene", "/nonexistent/scene.json", "--program", program)
    assert code == 2 and "nonexistent" in err


def test_ground_needs_program_or_backend(capsys):
    assert run(capsys, "ground", "q", "--scene", OFFICE)[0] == 1


def test_remote_backend_needs_environment(capsys, monkeypatch):
    monkeypatch.delenv("LLM_ENDPOINT", raising=False)
    code, _, err = run(capsys, "ground", "q", "--scene", OFFICE, "--backend", "remote")
    assert code == 2 and "LLM_ENDPOINT" in err


def test_remote_backend_end_to_end(capsys, monkeypatch, json_server):
    server = json_server(lambda body: (200, {"text": "Program:\nTARGET = LOC('door')"}))
    monkeypatch.setenv("LLM_ENDPOINT", server.url)
    code, out, _ = run(capsys, "ground", "the door", "--scene", OFFICE, "--backend", "remote")
    assert code == 0 and json.loads(out)["outcome"]["target_id"] == 3


def test_unknown_subcommand_is_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 1


def test_eval_golden(capsys, tmp_path):
    out_path = tmp_path / "report.json"
    code, _, _ = run(capsys, "eval", "--dataset", GOLDEN / "dataset.json", "--scenes", GOLDEN / "scenes",
                     "--backend", f"canned:{GOLDEN / 'canned.json'}", "--out", out_path)
    rep = json.loads(out_path.read_text())["report"]
    assert code == 0
    assert rep["accuracy"] == {"0.25": 1.0, "0.5": 1.0} and rep["top1"] == 1.0


def test_eval_custom_thresholds(capsys):
    code, out, _ = run(capsys, "eval", "--dataset", GOLDEN / "dataset.json", "--scenes", GOLDEN / "scenes",
                       "--backend", f"canned:{GOLDEN / 'canned.json'}", "--iou", "0.1,0.75")
    assert code == 0 and set(json.loads(out)["report"]["accuracy"]) == {"0.1", "0.75"}


@pytest.mark.parametrize("iou", ["0.5,abc", "1.5", ""])
def test_eval_bad_thresholds(capsys, iou):
    assert run(capsys, "eval", "--dataset", GOLDEN / "dataset.json", "--scenes", GOLDEN / "scenes",
               "--backend", f"canned:{GOLDEN / 'canned.json'}", "--iou", iou)[0] == 1


def test_eval_unresolvable_gt_names_record(capsys, tmp_path):
    data = tmp_path / "data.json"
    data.write_text(json.dumps({"records": [
        {"scene_id": "office", "query": "the door", "gt_object_id": 3},
        {"scene_id": "office", "query": "the sofa", "gt_object_id": 42},
    ]}))
    code, _, err = run(capsys, "eval", "--dataset", data, "--scenes", GOLDEN / "scenes", "--backend", "echo")
    assert code == 2 and "record 1" in err and "the sofa" in err


def test_eval_missing_scene_file(capsys, tmp_path):
    data = tmp_path / "data.json"
    data.write_text(json.dumps({"records": [{"scene_id": "atlantis", "query": "x", "gt_object_id": 1}]}))
    code, _, err = run(capsys, "eval", "--dataset", data, "--scenes", GOLDEN / "scenes", "--backend", "echo")
    assert code == 2 and "atlantis" in err


def test_prompt_examples_flag(capsys):
    _, two, _ = run(capsys, "prompt", "the lamp", "--examples", 2)
    _, three, _ = run(capsys, "prompt", "the lamp", "--examples", 3)
    assert two.count("Description:") == 3 and three.count("Description:") == 4
    assert run(capsys, "prompt", "the lamp", "--examples", 999)[0] == 2


def test_prompt_dialog_needs_scene(capsys):
    assert run(capsys, "prompt", "the lamp", "--mode", "dialog")[0] == 1
    code, out, _ = run(capsys, "prompt", "the lamp", "--mode", "dialog", "--scene", OFFICE)
    assert code == 0 and "Query: the lamp" in out


def test_config_file(capsys, tmp_path, program):
    cfg = tmp_path / "engine.json"
    cfg.write_text(json.dumps({"relations": {"near_threshold": 0.5}, "verifier": "none"}))
    code, out, _ = run(capsys, "ground", "q", "--scene", OFFICE, "--program", program, "--config", cfg)
    assert code == 0 and json.loads(out)["outcome"]["target_id"] == 2
    cfg.write_text(json.dumps({"relations": {"nearness": 0.5}}))
    assert run(capsys, "ground", "q", "--scene", OFFICE, "--program", program, "--config", cfg)[0] == 2
