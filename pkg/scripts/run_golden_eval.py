"""Run the golden end-to-end suite and print the report.

By default the canned fixtures replay the golden programs, so the run is
offline and deterministic. Pass ``--backend remote`` (with LLM_ENDPOINT set)
to let a live model write the programs instead.

    python scripts/run_golden_eval.py
    python scripts/run_golden_eval.py --backend remote --votes 3
"""
import argparse
import sys
from pathlib import Path

from visprog3d.cli import main as cli_main

GOLDEN = Path(__file__).resolve().parents[1] / "tests" / "golden"


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--backend", default=f"canned:{GOLDEN / 'canned.json'}")
    ap.add_argument("--votes", type=int, default=1)
    ap.add_argument("--mode", choices=("program", "dialog"), default="program")
    ap.add_argument("--verifier", default="attribute")
    ap.add_argument("--out", help="also write the full JSON report here")
    args = ap.parse_args(argv)
    cmd = ["eval", "--dataset", str(GOLDEN / "dataset.json"), "--scenes", str(GOLDEN / "scenes"),
           "--backend", args.backend, "--votes", str(args.votes), "--mode", args.mode,
           "--verifier", args.verifier, "--pretty"]
    if args.out:
        cmd += ["--out", args.out]
    return cli_main(cmd)


if __name__ == "__main__":
    sys.exit(main())
