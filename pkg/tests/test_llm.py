import json

import pytest
from hypothesis import given, strategies as st

from visprog3d.llm import (
    BackendError, CannedBackend, DialogAnswerError, EchoBackend, PromptSpec, RemoteBackend,
    build_dialog_prompt, build_program_prompt, load_prompt_spec, parse_dialog_answer, prompt_subject, vote,
)
from visprog3d.program import SIGNATURES, extract_program, parse
from visprog3d.scene import Aabb, ObjectInstance, Scene, Vec3, narrate


def five_example_spec(n=5):
    examples = tuple((f"the thing number {i}", f"TARGET = LOC('thing {i}')") for i in range(5))
    return PromptSpec("Explain the task.", "LOC(x): ground x.", examples, "Keep it short.", n)


OFFICE = Scene("office", (
    ObjectInstance(1, "keyboard", Aabb(Vec3(1, 0, 0.8), Vec3(0.4, 0.15, 0.05))),
    ObjectInstance(2, "keyboard", Aabb(Vec3(4, 0, 0.8), Vec3(0.4, 0.15, 0.05))),
    ObjectInstance(7, "door", Aabb(Vec3(5, 0, 1), Vec3(1, 0.2, 2))),
))


def test_prompt_contains_requested_examples():
    prompt = build_program_prompt(five_example_spec(2), "the red chair")
    assert prompt.count("Description:") == 3
    assert "thing 0" in prompt and "thing 1" in prompt and "thing 2" not in prompt


def test_prompt_layout():
    prompt = build_program_prompt(five_example_spec(1), "the red chair")
    assert prompt == ("Explain the task.\n\nLOC(x): ground x.\n\n"
                      "Description: the thing number 0\nProgram:\nTARGET = LOC('thing 0')\n\n"
                      "Keep it short.\n\nDescription: the red chair\nProgram:")


def test_prompt_deterministic():
    spec = load_prompt_spec()
    assert build_program_prompt(spec, "the lamp") == build_program_prompt(load_prompt_spec(), "the lamp")


def test_too_many_examples():
    with pytest.raises(ValueError):
        five_example_spec(6)
    with pytest.raises(ValueError):
        load_prompt_spec().with_examples(100)


def test_prompt_length_strictly_grows():
    spec = load_prompt_spec()
    lengths = [len(build_program_prompt(spec.with_examples(n), "x")) for n in range(1, spec.num_examples + 1)]
    assert all(a < b for a, b in zip(lengths, lengths[1:]))


def test_bundled_examples_parse_and_cover_every_module():
    spec = load_prompt_spec()
    ops = set()
    for _, program in spec.in_context_examples:
        ops.update(s.op for s in parse(program).statements)
    assert ops == set(SIGNATURES)


def test_dialog_prompt_lists_objects_and_query():
    query = "It is the keyboard closest to the door"
    prompt = build_dialog_prompt(OFFICE, query)
    for line in narrate(OFFICE).splitlines():
        assert line in prompt
    assert f"Query: {query}" in prompt
    assert prompt_subject(prompt) == query


def test_dialog_prompt_single_object():
    scene = Scene("s", OFFICE.objects[:1])
    prompt = build_dialog_prompt(scene, "the keyboard")
    assert prompt.count("Object 1 is a keyboard") == 1


@pytest.mark.parametrize("raw, oid", [
    ("The answer is Object 7 because it is a door.", 7),
    ("Object 3 ... not Object 1", 1),
    ("object #2", 2),
    ("Object 1 first, then Object 2", 1),
])
def test_dialog_answer(raw, oid):
    assert parse_dialog_answer(raw, OFFICE) == oid


@pytest.mark.parametrize("raw", ["Object 99", "I cannot tell.", ""])
def test_dialog_answer_failure(raw):
    with pytest.raises(DialogAnswerError):
        parse_dialog_answer(raw, OFFICE)


def test_vote_examples():
    r = vote([3, 3, 5], 3)
    assert r.winner_object_id == 3 and r.tally == {3: 2, 5: 1} and r.runs == 3
    assert vote([4]).winner_object_id == 4
    assert vote([7, 2]).winner_object_id == 2


def test_vote_rejects_wrong_count():
    with pytest.raises(ValueError):
        vote([1, 2], 3)
    with pytest.raises(ValueError):
        vote([])


@given(st.lists(st.integers(0, 6), min_size=1, max_size=15))
def test_vote_matches_counting(ids):
    r = vote(ids)
    counts = {i: ids.count(i) for i in set(ids)}
    assert r.tally == counts
    best = max(counts.values())
    assert r.winner_object_id == min(i for i, c in counts.items() if c == best)


def test_canned_backend_keys_on_description(tmp_path):
    path = tmp_path / "canned.json"
    path.write_text(json.dumps({"the door": "TARGET = LOC('door')", "two": ["A = LOC('a')", "B = LOC('b')"]}))
    backend = CannedBackend.from_file(path)
    spec = load_prompt_spec()
    assert backend.generate(build_program_prompt(spec, "the door")) == "TARGET = LOC('door')"
    prompt = build_program_prompt(spec, "two")
    assert [backend.generate(prompt, run=i) for i in range(3)] == ["A = LOC('a')", "B = LOC('b')", "A = LOC('a')"]
    with pytest.raises(BackendError):
        backend.generate(build_program_prompt(spec, "missing"))


def test_echo_backend():
    text = EchoBackend().generate(build_program_prompt(load_prompt_spec(), "lamp"))
    assert extract_program(text) == parse("TARGET = LOC('lamp')")


def test_remote_backend(json_server):
    server = json_server(lambda body: (200, {"text": "TARGET = LOC('door')"}))
    backend = RemoteBackend.from_env({"LLM_ENDPOINT": server.url, "LLM_MODEL": "m1", "LLM_API_KEY": "k"})
    assert backend.generate("Description: the door\nProgram:") == "TARGET = LOC('door')"
    headers, body = server.requests[0]
    assert body == {"model": "m1", "prompt": "Description: the door\nProgram:"}
    assert headers["Authorization"] == "Bearer k"


@pytest.mark.parametrize("status, payload", [(500, {"text": "x"}), (200, {"nope": 1}), (200, "not json")])
def test_remote_backend_errors(json_server, status, payload):
    server = json_server(lambda body: (status, payload))
    with pytest.raises(BackendError):
        RemoteBackend(server.url, "m").generate("Description: x\nProgram:")


def test_remote_backend_needs_endpoint():
    with pytest.raises(BackendError):
        RemoteBackend.from_env({})
