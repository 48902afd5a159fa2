"""End-to-end grounding: prompt -> generate -> extract -> execute -> vote."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from .executor import Outcome, Trace, execute, generation_failure
from .llm import (
    BackendError, DialogAnswerError, LlmBackend, PromptSpec, VoteResult,
    build_dialog_prompt, build_program_prompt, parse_dialog_answer, vote,
)
from .loc import DEFAULT_LOC, LocConfig, Verifier
from .program import ProgramGenerationError, extract_program
from .relations import DEFAULT_CONFIG, RelationConfig
from .scene import Scene


@dataclass
class GroundingResult:
    trace: Trace
    vote: Optional[VoteResult] = None
    runs: list = field(default_factory=list)

    def to_dict(self) -> dict:
        d = self.trace.to_dict()
        if self.vote is not None:
            d["vote"] = self.vote.to_dict()
            d["runs"] = [t.to_dict() for t in self.runs]
        return d


@dataclass
class Grounder:
    backend: LlmBackend
    prompt_spec: Optional[PromptSpec] = None
    verifier: Optional[Verifier] = None
    relation_cfg: RelationConfig = DEFAULT_CONFIG
    loc_cfg: LocConfig = DEFAULT_LOC
    mode: str = "program"  # or "dialog"

    def __post_init__(self):
        if self.mode not in ("program", "dialog"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "program" and self.prompt_spec is None:
            raise ValueError("program mode needs a prompt spec")

    def prompt(self, scene: Scene, description: str) -> str:
        if self.mode == "dialog":
            return build_dialog_prompt(scene, description)
        return build_program_prompt(self.prompt_spec, description)

    def run_once(self, scene: Scene, description: str, run: int = 0) -> Trace:
        prompt = self.prompt(scene, description)
        try:
            raw = self.backend.generate(prompt, run=run)
        except BackendError as exc:
            return generation_failure(description, str(exc))
        if self.mode == "dialog":
            return self._dialog_trace(scene, description, raw)
        try:
            program = extract_program(raw)
        except ProgramGenerationError as exc:
            return generation_failure(description, str(exc), raw)
        return execute(program, scene, self.verifier, self.relation_cfg, self.loc_cfg, query=description)

    @staticmethod
    def _dialog_trace(scene: Scene, description: str, raw: str) -> Trace:
        try:
            oid = parse_dialog_answer(raw, scene)
        except DialogAnswerError as exc:
            return generation_failure(description, str(exc), raw)
        return Trace(description, raw, [], Outcome("success", target_id=oid, box=scene.get(oid).box))

    def ground(self, scene: Scene, description: str, votes: int = 1, jobs: int = 1) -> GroundingResult:
        """Ground one description, voting over ``votes`` generations.

        Runs are collected in run order whatever ``jobs`` is, so the outcome
        only depends on the backend's answers.
        """
        if votes < 1:
            raise ValueError("votes must be >= 1")
        if jobs > 1 and votes > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                runs = list(pool.map(lambda i: self.run_once(scene, description, i), range(votes)))
        else:
            runs = [self.run_once(scene, description, i) for i in range(votes)]
        if votes == 1:
            return GroundingResult(runs[0], None, runs)
        ids = [t.target_id for t in runs if t.success]
        if not ids:
            return GroundingResult(runs[0], None, runs)
        result = vote(ids)
        chosen = next(t for t in runs if t.success and t.target_id == result.winner_object_id)
        return GroundingResult(chosen, result, runs)

