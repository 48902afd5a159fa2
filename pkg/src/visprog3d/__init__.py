"""Zero-shot 3D visual grounding by interpreting visual programs over labeled boxes."""

from .scene import Aabb, ObjectInstance, Scene, Vec3, load_scene, narrate, room_center, save_scene
from .geometry import CameraPose, Intrinsics, Projection, center_distance, iou, lookat, project
from .program import Program, Statement, extract_program, parse, pretty
from .relations import ObjectSet, RelationConfig
from .loc import AttributeVerifier, LabelVerifier, LocConfig, Query, loc
from .executor import Trace, execute, predicted_box
from .llm import PromptSpec, VoteResult, build_dialog_prompt, build_program_prompt, load_prompt_spec, vote
from .pipeline import Grounder

__version__ = "0.1.0"
