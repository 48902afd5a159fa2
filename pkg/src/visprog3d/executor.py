"""Interpret visual programs against a scene and record what happened."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from . import relations as rel
from .geometry import DegenerateCameraError
from .loc import DEFAULT_LOC, GroundingError, LocConfig, Verifier, loc
from .program import SIGNATURES, Num, Program, Statement, Str, Var, pretty
from .relations import DEFAULT_CONFIG, ObjectSet, RelationConfig, RelationError
from .scene import Aabb, Scene

GENERATION = "program-generation"
GROUNDING = "grounding"
RELATION = "relation"
EMPTY_RESULT = "empty-result"
FAILURE_STAGES = (GENERATION, GROUNDING, RELATION, EMPTY_RESULT)

Value = Union[ObjectSet, float]


class StepFailure(Exception):
    def __init__(self, stage: str, message: str):
        super().__init__(message)
        self.stage = stage


@dataclass
class Step:
    var: str
    op: str
    args: tuple
    result_ids: Optional[tuple] = None
    number: Optional[float] = None
    fallback: bool = False
    notes: tuple = ()
    error: Optional[str] = None

    def to_dict(self) -> dict:
        d = {
            "var": self.var,
            "op": self.op,
            "args": list(self.args),
            "result_ids": None if self.result_ids is None else list(self.result_ids),
            "fallback": self.fallback,
            "notes": list(self.notes),
        }
        if self.number is not None:
            d["number"] = self.number
        if self.error is not None:
            d["error"] = self.error
        return d


@dataclass
class Outcome:
    status: str
    target_id: Optional[int] = None
    box: Optional[Aabb] = None
    ambiguous: bool = False
    failure_stage: Optional[str] = None
    message: Optional[str] = None

    def to_dict(self) -> dict:
        if self.status == "success":
            return {
                "status": "success",
                "target_id": self.target_id,
                "box": {"center": list(self.box.center), "size": list(self.box.size)},
                "ambiguous": self.ambiguous,
            }
        return {"status": "failure", "failure_stage": self.failure_stage, "message": self.message}


@dataclass
class Trace:
    query: str
    program_text: str
    steps: list = field(default_factory=list)
    outcome: Outcome = field(default_factory=lambda: Outcome("failure", failure_stage=EMPTY_RESULT))

    @property
    def success(self) -> bool:
        return self.outcome.status == "success"

    @property
    def target_id(self) -> Optional[int]:
        return self.outcome.target_id

    @property
    def failure_stage(self) -> Optional[str]:
        return self.outcome.failure_stage

    def to_dict(self) -> dict:
        return {
            "query": self.query,
            "program_text": self.program_text,
            "steps": [s.to_dict() for s in self.steps],
            "outcome": self.outcome.to_dict(),
        }


def generation_failure(query: str, message: str, raw_text: str = "") -> Trace:
    return Trace(query, raw_text, [], Outcome("failure", failure_stage=GENERATION, message=message))


def _resolve(stmt: Statement, env: dict) -> list:
    sig = SIGNATURES[stmt.op]
    out = []
    for kind, arg in zip(sig, stmt.args):
        kind = kind.lstrip("?")
        if kind == "prop":
            out.append(arg.name)
        elif isinstance(arg, Var):
            value = env[arg.name]
            if not isinstance(value, ObjectSet):
                raise StepFailure(RELATION, f"{stmt.op} expects an object set in {arg.name}")
            out.append(value)
        elif isinstance(arg, Str):
            out.append(arg.value)
        elif isinstance(arg, Num):
            out.append(arg.value)
    return out


def _dispatch(op: str, a: list, scene: Scene, verifier, rcfg: RelationConfig, lcfg: LocConfig) -> Value:
    opt = a[1] if len(a) > 1 else None
    if op == "LOC":
        return loc(a[0], scene, verifier, lcfg)
    if op == "CLOSEST":
        return rel.closest(a[0], a[1])
    if op == "FARTHEST":
        return rel.farthest(a[0], a[1])
    if op in ("NEAR", "FAR"):
        fn = rel.near if op == "NEAR" else rel.far
        return fn(a[0], a[1], threshold=a[2] if len(a) > 2 else None, cfg=rcfg)
    if op == "ABOVE":
        return rel.above(a[0], a[1])
    if op == "BELOW":
        return rel.below(a[0], a[1])
    if op == "ON":
        return rel.on(a[0], a[1], cfg=rcfg)
    if op == "HIGHER":
        return rel.higher(a[0], opt)
    if op == "LOWER":
        return rel.lower(a[0], opt)
    if op == "MIDDLE":
        return rel.middle(a[0], opt)
    if op == "LEFT":
        return rel.left(a[0], opt, cfg=rcfg)
    if op == "RIGHT":
        return rel.right(a[0], opt, cfg=rcfg)
    if op == "FRONT":
        return rel.front(a[0], opt)
    if op == "BEHIND":
        return rel.behind(a[0], opt)
    if op == "BETWEEN":
        return rel.between(a[0], a[1], a[2], cfg=rcfg)
    if op == "LEFTMOST":
        return rel.leftmost(a[0])
    if op == "RIGHTMOST":
        return rel.rightmost(a[0])
    if op in ("MIN", "MAX"):
        return rel.extremal(a[0], op, a[1])
    raise StepFailure(RELATION, f"no implementation for {op}")


def run_statement(stmt: Statement, env: dict, scene: Scene, verifier=None,
                  rcfg: RelationConfig = DEFAULT_CONFIG, lcfg: LocConfig = DEFAULT_LOC) -> Value:
    stage = GROUNDING if stmt.op == "LOC" else RELATION
    args = _resolve(stmt, env)
    try:
        return _dispatch(stmt.op, args, scene, verifier, rcfg, lcfg)
    except StepFailure:
        raise
    except (GroundingError, RelationError, DegenerateCameraError, ValueError, KeyError) as exc:
        raise StepFailure(stage, str(exc)) from exc


def execute(program: Program, scene: Scene, verifier: Optional[Verifier] = None,
            relation_cfg: RelationConfig = DEFAULT_CONFIG, loc_cfg: LocConfig = DEFAULT_LOC,
            query: str = "") -> Trace:
    """Run every statement in order; errors end up in the trace, never raised."""
    trace = Trace(query, pretty(program))
    env: dict = {}
    for stmt in program.statements:
        step = Step(stmt.output_var, stmt.op, tuple(a.render() for a in stmt.args))
        if stmt.approximate:
            step.notes = (f"approximate relation {stmt.source_op} -> {stmt.op}",)
        trace.steps.append(step)
        try:
            value = run_statement(stmt, env, scene, verifier, relation_cfg, loc_cfg)
        except StepFailure as exc:
            step.error = str(exc)
            trace.outcome = Outcome("failure", failure_stage=exc.stage, message=f"{stmt.output_var}: {exc}")
            return trace
        env[stmt.output_var] = value
        if isinstance(value, ObjectSet):
            step.result_ids = value.ids
            step.fallback = value.fallback
            step.notes += value.notes
        else:
            step.number = float(value)

    result = env.get(program.result_var)
    if not isinstance(result, ObjectSet) or not result.members:
        trace.outcome = Outcome("failure", failure_stage=EMPTY_RESULT,
                                message=f"{program.result_var} holds no objects")
        return trace
    target = result.members[0]
    trace.outcome = Outcome("success", target_id=target.id, box=target.box, ambiguous=len(result) > 1)
    return trace


def predicted_box(trace: Trace) -> Aabb:
    if not trace.success:
        raise ValueError(f"trace failed at stage {trace.failure_stage!r}; no predicted box")
    return trace.outcome.box
