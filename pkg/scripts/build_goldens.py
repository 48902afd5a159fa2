"""Write the golden end-to-end suite under tests/golden/.

Ground-truth ids come from the brute-force interpreter in tests/oracle.py,
never from the engine. Each query also records the object its author had in
mind; the build refuses to write anything if the oracle disagrees, which
catches scenes that do not say what the query claims.

    python scripts/build_goldens.py
"""
import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))

import oracle  # noqa: E402

OUT = ROOT / "tests" / "golden"
FLOOR = ("floor", (3, 2.5, -0.05), (6, 5, 0.1))

# scene id -> [(id, label, center, size, attributes)]
SCENES = {
    "office": [
        (1, "keyboard", (1, 0.5, 0.8), (0.4, 0.15, 0.05), ()),
        (2, "keyboard", (4, 0.5, 0.8), (0.4, 0.15, 0.05), ()),
        (3, "door", (5, 0, 1), (1, 0.2, 2), ()),
        (4, "desk", (1, 0.6, 0.4), (1.4, 0.7, 0.8), ()),
        (5, "desk", (4, 0.6, 0.4), (1.4, 0.7, 0.8), ()),
        (6, "monitor", (1, 0.8, 1.05), (0.5, 0.1, 0.4), ()),
    ],
    "cafe": [
        (1, "table", (1, 1, 0.375), (0.8, 0.8, 0.75), ("round", "wooden")),
        (2, "table", (4, 1, 0.375), (1.2, 0.8, 0.75), ("square",)),
        (3, "chair", (2, 1, 0.45), (0.5, 0.5, 0.9), ()),
        (4, "poster", (0.1, 1, 1.6), (0.05, 0.8, 0.6), ("blue", "yellow")),
        (5, "poster", (5, 0.1, 1.6), (0.8, 0.05, 0.6), ("red",)),
    ],
    "bedroom": [
        (1, "bed", (2, 2, 0.3), (2, 1.6, 0.6), ()),
        (2, "nightstand", (0.6, 2, 0.3), (0.5, 0.5, 0.6), ()),
        (3, "nightstand", (3.4, 2, 0.3), (0.5, 0.5, 0.6), ()),
        (4, "lamp", (0.6, 2, 0.8), (0.3, 0.3, 0.4), ()),
        (5, "lamp", (5, 2, 0.7), (0.4, 0.4, 1.4), ()),
    ],
    "kitchen": [
        (1, *FLOOR, ()),
        (2, "cabinet", (3, 4.7, 0.5), (1.2, 0.6, 1), ()),
        (3, "window", (1.5, 4.9, 1.5), (1, 0.1, 1), ()),
        (4, "window", (4.5, 4.9, 1.5), (1, 0.1, 1), ()),
        (5, "refrigerator", (5.5, 4.5, 0.9), (0.8, 0.8, 1.8), ()),
    ],
    "living": [
        (1, "sofa", (1, 2.5, 0.4), (0.9, 2, 0.8), ()),
        (2, "tv", (5, 2.5, 1.0), (0.1, 1.2, 0.7), ()),
        (3, "chair", (3, 2.4, 0.45), (0.5, 0.5, 0.9), ()),
        (4, "chair", (3, 0.5, 0.45), (0.5, 0.5, 0.9), ()),
        (5, "chair", (3, 4.6, 0.45), (0.5, 0.5, 0.9), ()),
    ],
    "classroom": [
        (1, "desk", (1, 1, 0.375), (1.2, 0.6, 0.75), ()),
        (2, "desk", (3, 1, 0.375), (1.6, 0.8, 0.75), ()),
        (3, "desk", (5, 1, 0.3), (1.0, 0.6, 0.6), ()),
        (4, "whiteboard", (3, 3, 1.5), (3, 0.05, 1.2), ()),
    ],
    "library": [
        (1, "shelf", (1, 3, 1.0), (1.0, 0.4, 2.0), ()),
        (2, "shelf", (3, 3, 0.6), (2.0, 0.4, 1.2), ()),
        (3, "shelf", (5, 3, 0.4), (0.8, 0.5, 0.8), ()),
        (4, "lamp", (3, 1, 0.3), (0.3, 0.3, 0.6), ()),
    ],
    "bathroom": [
        (1, "sink", (1, 0.3, 0.8), (0.6, 0.5, 0.2), ()),
        (2, "mirror", (1, 0.05, 1.5), (0.6, 0.05, 0.8), ()),
        (3, "toilet", (3, 0.4, 0.4), (0.4, 0.7, 0.8), ()),
        (4, "towel", (3.8, 0.1, 1.2), (0.5, 0.1, 0.8), ()),
        (5, "towel", (0.2, 2, 1.2), (0.1, 0.5, 0.8), ()),
    ],
    "lounge": [
        (1, *FLOOR, ()),
        (2, "table", (3, 3.5, 0.4), (1, 1, 0.8), ()),
        (3, "chair", (3, 2.2, 0.45), (0.5, 0.5, 0.9), ()),
        (4, "chair", (3, 4.6, 0.45), (0.5, 0.5, 0.9), ()),
    ],
    "studio": [
        (1, "box", (1, 1, 0.25), (0.4, 0.4, 0.5), ()),
        (2, "box", (2.5, 1, 0.2), (1.0, 0.3, 0.4), ()),
        (3, "box", (4, 1, 0.5), (1, 1, 1), ()),
        (4, "lamp", (2.5, 4, 0.8), (0.3, 0.3, 1.6), ()),
    ],
    "hall": [
        (1, "door", (0, 2, 1), (0.1, 1, 2), ()),
        (2, "ottoman", (2, 2, 0.2), (0.6, 0.6, 0.4), ("footstool", "leather")),
        (3, "bench", (4, 2, 0.25), (1.5, 0.4, 0.5), ("wooden",)),
        (4, "coat rack", (5.5, 0.5, 0.9), (0.4, 0.4, 1.8), ()),
    ],
    "conference": [
        (1, "table", (3, 2.5, 0.375), (3, 1.2, 0.75), ()),
        (2, "screen", (3, 4.9, 1.5), (2, 0.1, 1.2), ()),
        (3, "chair", (2, 1.5, 0.45), (0.5, 0.5, 0.9), ()),
        (4, "chair", (4, 1.5, 0.45), (0.5, 0.5, 0.9), ()),
        (5, "chair", (2, 3.5, 0.45), (0.5, 0.5, 0.9), ()),
        (6, "chair", (4, 3.5, 0.45), (0.5, 0.5, 0.9), ()),
    ],
}

# (scene, query, program, intended id). Some programs are wrapped in the
# kind of prose a language model adds, to exercise program extraction.
QUERIES = [
    ("office", "It is the keyboard closest to the door",
     "BOX0 = LOC('keyboard')\nBOX1 = LOC('door')\nTARGET = CLOSEST(BOX0, BOX1)", 2),
    ("office", "the keyboard farthest from the door",
     "BOX0 = LOC('keyboard')\nBOX1 = LOC('door')\nTARGET = FARTHEST(BOX0, BOX1)", 1),
    ("office", "the desk under the monitor",
     "BOX0 = LOC('desk')\nBOX1 = LOC('monitor')\nTARGET = UNDER(BOX0, BOX1)", 4),
    ("cafe", "The round cocktail table in the corner",
     "BOX0 = LOC('round cocktail table')\nBOX1 = LOC('blue and yellow poster')\nTARGET = CLOSEST(BOX0, BOX1)", 1),
    ("cafe", "the red poster", "TARGET = LOC('red poster')", 5),
    ("cafe", "the table next to the chair",
     "box0 = loc('table')\nbox1 = loc('chair')\ntarget = next_to(box0, box1)", 1),
    ("bedroom", "the lamp on the nightstand",
     "BOX0 = LOC('lamp')\nBOX1 = LOC('nightstand')\nTARGET = ON(BOX0, BOX1)", 4),
    ("bedroom", "the nightstand under the lamp",
     "BOX0 = LOC('nightstand')\nBOX1 = LOC('lamp')\nTARGET = BELOW(BOX0, BOX1)", 2),
    ("bedroom", "the lamp placed higher up", "BOX0 = LOC('lamp')\nTARGET = HIGHER(BOX0)", 4),
    ("bedroom", "the taller lamp", "BOX0 = LOC('lamp')\nTARGET = MAX(BOX0, HEIGHT)", 5),
    ("kitchen", "the window to the right of the cabinet",
     "BOX0 = LOC('window')\nBOX1 = LOC('cabinet')\nTARGET = RIGHT(BOX0, BOX1)", 4),
    ("kitchen", "the leftmost window", "BOX0 = LOC('window')\nTARGET = LEFTMOST(BOX0)", 3),
    ("living", "the chair between the sofa and the tv",
     "BOX0 = LOC('chair')\nBOX1 = LOC('sofa')\nBOX2 = LOC('tv')\nTARGET = BETWEEN(BOX0, BOX1, BOX2)", 3),
    ("living", "the chair in the middle of the room", "BOX0 = LOC('chair')\nTARGET = MIDDLE(BOX0)", 3),
    ("living", "the chair farthest from the tv",
     "BOX0 = LOC('chair')\nBOX1 = LOC('tv')\nTARGET = FARTHEST(BOX0, BOX1)", 5),
    ("classroom", "the largest desk", "BOX0 = LOC('desk')\nTARGET = MAX(BOX0, SIZE)", 2),
    ("classroom", "the shortest desk", "BOX0 = LOC('desk')\nTARGET = MIN(BOX0, HEIGHT)", 3),
    ("library", "the tallest bookshelf", "BOX0 = LOC('shelf')\nTARGET = MAX(BOX0, HEIGHT)", 1),
    ("library", "the lowest shelf", "BOX0 = LOC('shelf')\nTARGET = LOWER(BOX0)", 3),
    ("library", "the longest shelf", "BOX0 = LOC('shelf')\nTARGET = MAX(BOX0, LENGTH)", 2),
    ("bathroom", "the mirror above the sink",
     "BOX0 = LOC('mirror')\nBOX1 = LOC('sink')\nTARGET = ABOVE(BOX0, BOX1)", 2),
    ("bathroom", "the towel near the toilet",
     "BOX0 = LOC('towel')\nBOX1 = LOC('toilet')\nTARGET = NEAR(BOX0, BOX1)", 4),
    ("bathroom", "the towel far from the toilet",
     "BOX0 = LOC('towel')\nBOX1 = LOC('toilet')\nTARGET = FAR(BOX0, BOX1, 1.5)", 5),
    ("lounge", "the chair in front of the table",
     "BOX0 = LOC('chair')\nBOX1 = LOC('table')\nTARGET = FRONT(BOX0, BOX1)", 3),
    ("lounge", "the chair at the back of the table",
     "BOX0 = LOC('chair')\nBOX1 = LOC('table')\nTARGET = BACK(BOX0, BOX1)", 4),
    ("studio", "the narrowest box", "BOX0 = LOC('box')\nTARGET = MIN(BOX0, WIDTH)", 2),
    ("studio", "the smallest box", "BOX0 = LOC('box')\nTARGET = MIN(BOX0, SIZE)", 1),
    ("studio", "the box to the right of the lamp",
     "BOX0 = LOC('box')\nBOX1 = LOC('lamp')\nTARGET = RIGHT(BOX0, BOX1)", 3),
    ("hall", "the leather footstool", "TARGET = LOC('leather footstool')", 2),
    ("conference", "the rightmost chair near the screen",
     "BOX0 = LOC('chair')\nBOX1 = LOC('screen')\nBOX2 = NEAR(BOX0, BOX1, 2.5)\nTARGET = RIGHTMOST(BOX2)", 6),
]

VIEW_DEPENDENT = {"LEFT", "RIGHT", "FRONT", "BEHIND", "BACK", "BETWEEN", "LEFTMOST", "RIGHTMOST", "FACING"}


def wrap(i, program):
    if i % 5 == 1:
        return f"Here is the program:\n```\n{program}\n```\nIt grounds the described object."
    if i % 5 == 3:
        return f"Program:\n{program}\n\nThe last variable holds the answer."
    return program


def tags(scene, program, gt):
    ops = {line.split("=", 1)[1].split("(", 1)[0].strip().upper() for line in program.splitlines()}
    label = next(o[1] for o in scene if o[0] == gt)
    same = sum(1 for o in scene if o[1] == label)
    return sorted(["view_dep" if ops & VIEW_DEPENDENT else "view_indep", "hard" if same > 2 else "easy"])


def main():
    scenes = {sid: [oracle.obj(*o) for o in objs] for sid, objs in SCENES.items()}
    records, canned, mismatches = [], {}, []
    for i, (sid, query, program, intended) in enumerate(QUERIES):
        gt = oracle.run_program(scenes[sid], program)
        if gt != intended:
            mismatches.append(f"{sid}: {query!r} -> oracle {gt}, intended {intended}")
        records.append({"scene_id": sid, "query": query, "gt_object_id": gt,
                        "tags": tags(scenes[sid], program, gt)})
        canned[query] = wrap(i, program)
    if mismatches:
        sys.exit("golden scenes disagree with their queries:\n  " + "\n  ".join(mismatches))
    assert len(SCENES) == 12 and len(records) == 30 and len(canned) == 30

    (OUT / "scenes").mkdir(parents=True, exist_ok=True)
    for sid, objs in SCENES.items():
        doc = {"scene_id": sid, "up_axis": "z", "objects": [
            {"id": oid, "label": label, "center": list(c), "size": list(s),
             **({"attributes": sorted(a)} if a else {})}
            for oid, label, c, s, a in objs]}
        (OUT / "scenes" / f"{sid}.json").write_text(json.dumps(doc, indent=2) + "\n")
    (OUT / "dataset.json").write_text(json.dumps({"records": records}, indent=2) + "\n")
    (OUT / "canned.json").write_text(json.dumps(canned, indent=2) + "\n")
    print(f"wrote {len(SCENES)} scenes and {len(records)} records to {OUT}")


if __name__ == "__main__":
    main()
