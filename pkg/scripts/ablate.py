"""Sweep one knob over a dataset and print accuracy per setting.

Axes: ``examples`` (in-context examples in the prompt), ``votes`` (generation
runs per query) and ``verifier`` (attribute scoring inside LOC). The default
dataset is the golden suite; with the canned backend only the verifier axis
changes anything, so point ``--backend remote`` at a live model for the
other two.

    python scripts/ablate.py verifier
    python scripts/ablate.py examples --values 1,2,4,8 --backend remote
"""
import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from visprog3d.config import EngineConfig, make_backend, make_verifier
from visprog3d.evaluation import load_dataset, report
from visprog3d.llm import load_prompt_spec
from visprog3d.pipeline import Grounder
from visprog3d.scene import load_scene

GOLDEN = Path(__file__).resolve().parents[1] / "tests" / "golden"
DEFAULTS = {"examples": "1,2,4,8", "votes": "1,3,5", "verifier": "none,label,attribute"}


def evaluate(cfg, records, scenes, thresholds):
    spec = load_prompt_spec(cfg.prompt_asset)
    if cfg.num_examples is not None:
        spec = spec.with_examples(cfg.num_examples)
    grounder = Grounder(make_backend(cfg.backend), spec, make_verifier(cfg.verifier),
                        cfg.relations, cfg.loc)
    traces = [grounder.ground(scenes[r.scene_id], r.query, votes=cfg.votes).trace for r in records]
    return report(records, traces, scenes, thresholds)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("axis", choices=sorted(DEFAULTS))
    ap.add_argument("--values", help="comma-separated settings (default depends on the axis)")
    ap.add_argument("--dataset", default=str(GOLDEN / "dataset.json"))
    ap.add_argument("--scenes", default=str(GOLDEN / "scenes"))
    ap.add_argument("--backend", default=f"canned:{GOLDEN / 'canned.json'}")
    args = ap.parse_args(argv)

    records = load_dataset(Path(args.dataset).read_bytes())
    scenes = {sid: load_scene(Path(args.scenes, f"{sid}.json").read_bytes())
              for sid in sorted({r.scene_id for r in records})}
    thresholds = (0.25, 0.5)
    base = EngineConfig(backend=args.backend)
    field = {"examples": "num_examples", "votes": "votes", "verifier": "verifier"}[args.axis]

    for raw in (args.values or DEFAULTS[args.axis]).split(","):
        value = raw.strip() if args.axis == "verifier" else int(raw)
        rep = evaluate(replace(base, **{field: value}), records, scenes, thresholds)
        print(f"{args.axis}={value:<10} acc@0.25={rep.accuracy['0.25']:.3f}  "
              f"acc@0.5={rep.accuracy['0.5']:.3f}  errors={json.dumps(rep.error_breakdown)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
