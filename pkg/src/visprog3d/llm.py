"""Prompt assembly, text-generation backends and run voting."""
from __future__ import annotations

import json
import os
import re
import urllib.error
import urllib.request
from collections import Counter
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Optional, Protocol

from .scene import Scene, narrate

DESCRIPTION_MARK = "Description:"
PROGRAM_MARK = "Program:"
QUERY_MARK = "Query:"


class BackendError(RuntimeError):
    pass


class DialogAnswerError(ValueError):
    pass


@dataclass(frozen=True)
class PromptSpec:
    task_explanation: str
    function_definitions: str
    in_context_examples: tuple  # of (description, program) pairs
    tips: str
    num_examples: int

    def __post_init__(self):
        object.__setattr__(self, "in_context_examples",
                           tuple((str(d), str(p)) for d, p in self.in_context_examples))
        if not self.in_context_examples:
            raise ValueError("prompt spec needs at least one in-context example")
        if self.num_examples < 1:
            raise ValueError("num_examples must be >= 1")
        if self.num_examples > len(self.in_context_examples):
            raise ValueError(f"num_examples={self.num_examples} exceeds the "
                             f"{len(self.in_context_examples)} available examples")

    def with_examples(self, n: int) -> "PromptSpec":
        return replace(self, num_examples=n)


def load_prompt_spec(path: Optional[str | Path] = None) -> PromptSpec:
    """Read a prompt asset; the bundled one when ``path`` is None."""
    if path is None:
        text = resources.files("visprog3d").joinpath("assets/prompt_v1.json").read_text()
    else:
        text = Path(path).read_text()
    doc = json.loads(text)
    examples = doc["examples"]
    return PromptSpec(
        task_explanation=doc["task_explanation"],
        function_definitions=doc["function_definitions"],
        in_context_examples=tuple(tuple(e) for e in examples),
        tips=doc["tips"],
        num_examples=doc.get("num_examples", len(examples)),
    )


def build_program_prompt(spec: PromptSpec, description: str) -> str:
    blocks = [spec.task_explanation.strip(), spec.function_definitions.strip()]
    for desc, program in spec.in_context_examples[:spec.num_examples]:
        blocks.append(f"{DESCRIPTION_MARK} {desc}\n{PROGRAM_MARK}\n{program.strip()}")
    blocks.append(spec.tips.strip())
    blocks.append(f"{DESCRIPTION_MARK} {description.strip()}\n{PROGRAM_MARK}")
    return "\n\n".join(blocks)


DIALOG_FRAMING = (
    "You are an agent standing in a scanned indoor room. The room contains the "
    "objects listed below, each with its center position and its sizes in meters "
    "(z points up)."
)
DIALOG_INSTRUCTION = (
    "Identify the object the query refers to. Answer with \"Object <id>\" for the "
    "single best match, then explain your reasoning step by step."
)


def build_dialog_prompt(scene: Scene, description: str) -> str:
    return "\n\n".join([
        DIALOG_FRAMING,
        narrate(scene),
        f"{QUERY_MARK} {description.strip()}",
        DIALOG_INSTRUCTION,
    ])


_OBJECT_REF = re.compile(r"\bobject\s+#?(\d+)", re.IGNORECASE)


def parse_dialog_answer(raw: str, scene: Scene) -> int:
    for m in _OBJECT_REF.finditer(raw):
        oid = int(m.group(1))
        if oid in scene.by_id:
            return oid
    raise DialogAnswerError("no valid 'Object <id>' reference in the answer")


@dataclass(frozen=True)
class VoteResult:
    winner_object_id: int
    tally: dict
    runs: int

    def to_dict(self) -> dict:
        return {
            "winner_object_id": self.winner_object_id,
            "tally": {str(k): v for k, v in sorted(self.tally.items())},
            "runs": self.runs,
        }


def vote(run_outputs: list, k: Optional[int] = None) -> VoteResult:
    """Plurality vote over per-run object ids; ties go to the lowest id."""
    if not run_outputs:
        raise ValueError("cannot vote over zero runs")
    if k is not None and len(run_outputs) != k:
        raise ValueError(f"expected {k} run outputs, got {len(run_outputs)}")
    tally = Counter(run_outputs)
    top = max(tally.values())
    winner = min(oid for oid, n in tally.items() if n == top)
    return VoteResult(winner, dict(tally), len(run_outputs))


# -- backends -----------------------------------------------------------------

class LlmBackend(Protocol):
    def generate(self, prompt: str, *, run: int = 0) -> str: ...


def prompt_subject(prompt: str) -> str:
    """The description or query a prompt ends with."""
    for line in reversed(prompt.splitlines()):
        for mark in (DESCRIPTION_MARK, QUERY_MARK):
            if line.startswith(mark):
                return line[len(mark):].strip()
    raise BackendError("prompt carries no description line")


class CannedBackend:
    """Replays fixed responses keyed by the exact description.

    A fixture value may be a single response or a list; run ``i`` gets entry
    ``i % len(list)``, which lets voting tests script disagreeing runs.
    """

    def __init__(self, responses: dict):
        self.responses = dict(responses)

    @classmethod
    def from_file(cls, path: str | Path) -> "CannedBackend":
        return cls(json.loads(Path(path).read_text()))

    def generate(self, prompt: str, *, run: int = 0) -> str:
        key = prompt_subject(prompt)
        if key not in self.responses:
            raise BackendError(f"no canned response for {key!r}")
        value = self.responses[key]
        if isinstance(value, list):
            return value[run % len(value)]
        return value


class EchoBackend:
    """Fills ``{description}`` in a fixed template."""

    def __init__(self, template: str = "TARGET = LOC('{description}')"):
        self.template = template

    def generate(self, prompt: str, *, run: int = 0) -> str:
        return self.template.format(description=prompt_subject(prompt))


class RemoteBackend:
    """POSTs ``{"model", "prompt"}`` as JSON and reads the ``text`` field of the reply."""

    def __init__(self, endpoint: str, model: str, api_key: Optional[str] = None, timeout: float = 60.0):
        self.endpoint = endpoint
        self.model = model
        self.api_key = api_key
        self.timeout = timeout

    @classmethod
    def from_env(cls, environ=os.environ) -> "RemoteBackend":
        endpoint = environ.get("LLM_ENDPOINT")
        if not endpoint:
            raise BackendError("LLM_ENDPOINT is not set")
        return cls(endpoint, environ.get("LLM_MODEL", "default"), environ.get("LLM_API_KEY"))

    def generate(self, prompt: str, *, run: int = 0) -> str:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        body = json.dumps({"model": self.model, "prompt": prompt}).encode()
        req = urllib.request.Request(self.endpoint, data=body, headers=headers)
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                reply = json.loads(resp.read())
        except (urllib.error.URLError, OSError, json.JSONDecodeError) as exc:
            raise BackendError(f"LLM endpoint {self.endpoint}: {exc}") from exc
        if not isinstance(reply, dict) or not isinstance(reply.get("text"), str):
            raise BackendError("LLM reply has no 'text' field")
        return reply["text"]
