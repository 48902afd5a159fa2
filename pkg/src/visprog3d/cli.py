"""Command-line entry point.

    visprog3d parse PROGRAM_FILE
    visprog3d narrate --scene SCENE
    visprog3d prompt DESCRIPTION [--examples N]
    visprog3d ground --scene SCENE QUERY (--program FILE | --backend SPEC) [--votes K]
    visprog3d eval --dataset FILE --scenes DIR --backend SPEC [--iou 0.25,0.5] [--out FILE]

Exit codes: 0 success, 1 usage error, 2 input error, 3 grounding failure.
Remote credentials are read from LLM_ENDPOINT / LLM_API_KEY / LLM_MODEL and
VERIFIER_ENDPOINT only.
"""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

from .config import VERIFIER_CHOICES, ConfigError, EngineConfig, load_config, make_backend, make_verifier
from .evaluation import DatasetError, check_threshold, format_report, gt_box_for, load_dataset, report
from .executor import execute
from .llm import build_dialog_prompt, build_program_prompt, load_prompt_spec
from .pipeline import Grounder
from .program import ParseError, parse
from .scene import SceneFormatError, load_scene, narrate

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_GROUNDING = 0, 1, 2, 3


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _dump(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _engine_config(args) -> EngineConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else EngineConfig()
    overrides = {}
    for name in ("backend", "votes", "verifier"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    if getattr(args, "examples", None) is not None:
        overrides["num_examples"] = args.examples
    return replace(cfg, **overrides) if overrides else cfg


def _prompt_spec(cfg: EngineConfig):
    spec = load_prompt_spec(cfg.prompt_asset)
    if cfg.num_examples is not None:
        spec = spec.with_examples(cfg.num_examples)
    return spec


def _grounder(cfg: EngineConfig, mode: str) -> Grounder:
    if not cfg.backend:
        raise UsageError("a --backend (or --program) is required")
    return Grounder(
        backend=make_backend(cfg.backend),
        prompt_spec=_prompt_spec(cfg) if mode == "program" else None,
        verifier=make_verifier(cfg.verifier),
        relation_cfg=cfg.relations,
        loc_cfg=cfg.loc,
        mode=mode,
    )


# -- commands -----------------------------------------------------------------

def cmd_parse(args) -> int:
    text = _read(args.program_file).decode()
    try:
        program = parse(text)
    except ParseError as exc:
        print(f"{args.program_file}:{exc.line}:{exc.col}: {exc.message}", file=sys.stderr)
        return EXIT_INPUT
    if args.pretty:
        print(program)
    else:
        sys.stdout.write(_dump({"valid": True, "statements": len(program.statements), "program": str(program)}))
    return EXIT_OK


def cmd_narrate(args) -> int:
    scene = load_scene(_read(args.scene))
    print(narrate(scene))
    return EXIT_OK


def cmd_prompt(args) -> int:
    cfg = _engine_config(args)
    if args.mode == "dialog":
        if not args.scene:
            raise UsageError("dialog prompts need --scene")
        print(build_dialog_prompt(load_scene(_read(args.scene)), args.description))
    else:
        print(build_program_prompt(_prompt_spec(cfg), args.description))
    return EXIT_OK


def _pretty_trace(doc: dict) -> str:
    lines = [f"query: {doc['query']}"]
    for s in doc["steps"]:
        res = s["result_ids"] if s["result_ids"] is not None else s.get("error")
        flag = "  (fallback)" if s["fallback"] else ""
        lines.append(f"  {s['var']} = {s['op']}({', '.join(s['args'])}) -> {res}{flag}")
    out = doc["outcome"]
    if out["status"] == "success":
        amb = " (ambiguous)" if out["ambiguous"] else ""
        lines.append(f"target: object {out['target_id']}{amb}")
    else:
        lines.append(f"failed at {out['failure_stage']}: {out.get('message')}")
    if "vote" in doc:
        lines.append(f"vote: {doc['vote']['tally']} over {doc['vote']['runs']} runs")
    return "\n".join(lines)


def cmd_ground(args) -> int:
    cfg = _engine_config(args)
    scene = load_scene(_read(args.scene))
    if args.program:
        if cfg.votes > 1:
            raise UsageError("--votes needs a --backend; a supplied program runs once")
        try:
            program = parse(_read(args.program).decode())
        except ParseError as exc:
            raise InputError(f"{args.program}:{exc.line}:{exc.col}: {exc.message}") from exc
        trace = execute(program, scene, make_verifier(cfg.verifier), cfg.relations, cfg.loc, query=args.query)
        doc = trace.to_dict()
        success = trace.success
    else:
        result = _grounder(cfg, args.mode).ground(scene, args.query, votes=cfg.votes, jobs=args.jobs)
        doc = result.to_dict()
        success = result.trace.success
    sys.stdout.write(_pretty_trace(doc) + "\n" if args.pretty else _dump(doc))
    return EXIT_OK if success else EXIT_GROUNDING


def _load_scenes(records, scenes_dir: Path) -> dict:
    scenes = {}
    for i, rec in enumerate(records):
        if rec.scene_id in scenes:
            continue
        path = scenes_dir / f"{rec.scene_id}.json"
        if not path.exists():
            raise InputError(f"{rec.describe(i)}: scene file {path} not found")
        try:
            scenes[rec.scene_id] = load_scene(path.read_bytes())
        except SceneFormatError as exc:
            raise InputError(f"{path}: {exc}") from exc
    return scenes


def _thresholds(spec: str) -> tuple:
    try:
        values = tuple(float(v) for v in spec.split(",") if v.strip())
    except ValueError as exc:
        raise UsageError(f"bad --iou list {spec!r}") from exc
    if not values:
        raise UsageError("--iou needs at least one threshold")
    try:
        return tuple(check_threshold(v) for v in values)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_eval(args) -> int:
    cfg = _engine_config(args)
    thresholds = _thresholds(args.iou)
    records = load_dataset(_read(args.dataset))
    scenes = _load_scenes(records, Path(args.scenes))
    for i, rec in enumerate(records):
        gt_box_for(rec, scenes[rec.scene_id], i)
    grounder = _grounder(cfg, args.mode)

    def run(rec):
        return grounder.ground(scenes[rec.scene_id], rec.query, votes=cfg.votes).trace

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            traces = list(pool.map(run, records))
    else:
        traces = [run(r) for r in records]
    rep = report(records, traces, scenes, thresholds)
    doc = {"report": rep.to_dict(), "traces": [t.to_dict() for t in traces]}
    text = _dump(doc)
    if args.out:
        Path(args.out).write_text(text)
    if args.pretty:
        print(format_report(rep))
    elif not args.out:
        sys.stdout.write(text)
    return EXIT_OK


# -- argument parsing ---------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="visprog3d", description="Zero-shot 3D visual grounding with visual programs.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def engine_flags(sp, backend=True):
        sp.add_argument("--config", help="JSON engine configuration")
        if backend:
            sp.add_argument("--backend", help="canned:<fixture.json> | echo[:<template>] | remote")
            sp.add_argument("--votes", type=int, help="generation runs to vote over")
            sp.add_argument("--verifier", choices=VERIFIER_CHOICES)
            sp.add_argument("--mode", choices=("program", "dialog"), default="program")
            sp.add_argument("--jobs", type=int, default=1)
        sp.add_argument("--examples", type=int, help="number of in-context examples in the prompt")
        sp.add_argument("--pretty", action="store_true", help="human-readable output")

    sp = sub.add_parser("parse", help="validate a program file")
    sp.add_argument("program_file")
    sp.add_argument("--pretty", action="store_true")
    sp.set_defaults(func=cmd_parse)

    sp = sub.add_parser("narrate", help="print the textual scene narrative")
    sp.add_argument("--scene", required=True)
    sp.set_defaults(func=cmd_narrate)

    sp = sub.add_parser("prompt", help="print the generation prompt for a description")
    sp.add_argument("description")
    sp.add_argument("--scene", help="scene file (dialog mode)")
    sp.add_argument("--mode", choices=("program", "dialog"), default="program")
    engine_flags(sp, backend=False)
    sp.set_defaults(func=cmd_prompt)

    sp = sub.add_parser("ground", help="ground one query in one scene")
    sp.add_argument("query")
    sp.add_argument("--scene", required=True)
    sp.add_argument("--program", help="program file to run instead of generating one")
    engine_flags(sp)
    sp.set_defaults(func=cmd_ground)

    sp = sub.add_parser("eval", help="evaluate a dataset")
    sp.add_argument("--dataset", required=True)
    sp.add_argument("--scenes", required=True, help="directory of <scene_id>.json files")
    sp.add_argument("--iou", default="0.25,0.5", help="comma-separated IoU thresholds")
    sp.add_argument("--out", help="write the report document here")
    engine_flags(sp)
    sp.set_defaults(func=cmd_eval)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"visprog3d: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InputError, SceneFormatError, DatasetError, ConfigError, ParseError, ValueError) as exc:
        print(f"visprog3d: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
