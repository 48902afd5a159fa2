"""Language-object correlation: ground a noun phrase to scene objects.

Grounding runs in two stages. A closed-set label filter keeps the objects
whose label appears in the phrase ("round cocktail table" -> tables). A
pluggable verifier then scores each candidate against the full phrase; in a
real system this is a 2D image model, here it is any object with a
``score(query, obj)`` method.
"""
from __future__ import annotations

import json
import re
import urllib.error
import urllib.request
from dataclasses import dataclass
from typing import Iterable, Optional, Protocol

from .relations import ObjectSet, argbest
from .scene import ObjectInstance, Scene

_TOKEN = re.compile(r"[a-z0-9]+")


class GroundingError(RuntimeError):
    pass


class VerifierError(GroundingError):
    pass


def tokens(text: str) -> tuple:
    return tuple(_TOKEN.findall(text.lower()))


@dataclass(frozen=True)
class Query:
    raw: str
    normalized: tuple

    @classmethod
    def of(cls, raw: str) -> "Query":
        toks = tokens(raw)
        if not toks:
            raise GroundingError(f"query {raw!r} is empty after normalization")
        return cls(raw, toks)


class Verifier(Protocol):
    def score(self, query: Query, obj: ObjectInstance) -> float: ...


@dataclass(frozen=True)
class LocConfig:
    accept_threshold: float = 0.5
    label_vocabulary: Optional[frozenset] = None  # None: every label in the scene

    def __post_init__(self):
        if not 0.0 <= self.accept_threshold <= 1.0:
            raise ValueError(f"accept_threshold must lie in [0, 1], got {self.accept_threshold}")
        if self.label_vocabulary is not None:
            object.__setattr__(self, "label_vocabulary",
                               frozenset(l.strip().lower() for l in self.label_vocabulary))


DEFAULT_LOC = LocConfig()


def _contains(seq: tuple, sub: tuple) -> bool:
    n = len(sub)
    return n > 0 and any(seq[i:i + n] == sub for i in range(len(seq) - n + 1))


def matching_label(query: Query, labels: Iterable[str]) -> Optional[str]:
    """Longest label whose token sequence occurs in the query (ties: alphabetical)."""
    hits = [l for l in labels if _contains(query.normalized, tokens(l))]
    if not hits:
        return None
    return min(hits, key=lambda l: (-len(tokens(l)), -len(l), l))


def base_label_match(query: Query, scene: Scene, cfg: LocConfig = DEFAULT_LOC) -> ObjectSet:
    labels = scene.labels if cfg.label_vocabulary is None else scene.labels & cfg.label_vocabulary
    label = matching_label(query, labels)
    if label is None:
        return ObjectSet(scene, scene.objects, notes=("open-vocabulary",))
    return ObjectSet(scene, tuple(o for o in scene.objects if o.label == label),
                     notes=("closed-label",))


def accepted(scores: dict, threshold: float) -> list:
    """Ids whose score clears the threshold, before any fallback."""
    return [oid for oid, s in scores.items() if s >= threshold]


def verify(candidates: ObjectSet, query: Query, verifier: Optional[Verifier],
           cfg: LocConfig = DEFAULT_LOC) -> ObjectSet:
    if not candidates.members:
        raise GroundingError("no candidates to verify")
    if verifier is None:
        return candidates
    try:
        scores = {o.id: float(verifier.score(query, o)) for o in candidates}
    except GroundingError:
        raise
    except Exception as exc:
        raise VerifierError(f"verifier failed: {exc}") from exc
    keep = set(accepted(scores, cfg.accept_threshold))
    if keep:
        return ObjectSet(candidates.scene, tuple(o for o in candidates if o.id in keep),
                         notes=candidates.notes)
    best = argbest(candidates, lambda o: scores[o.id], maximize=True)
    return ObjectSet(candidates.scene, (best,), fallback=True, notes=candidates.notes)


def loc(query_text: str, scene: Scene, verifier: Optional[Verifier] = None,
        cfg: LocConfig = DEFAULT_LOC) -> ObjectSet:
    if not scene.objects:
        raise GroundingError(f"scene {scene.scene_id!r} is empty; nothing to ground")
    query = Query.of(query_text)
    return verify(base_label_match(query, scene, cfg), query, verifier, cfg)


def vqa_question(query_text: str) -> str:
    if not query_text.strip():
        raise ValueError("empty query")
    return f"Is there a {query_text}?"


def dynamic_vocabulary(query_text: str, base_label: str) -> list:
    if not query_text.strip() or not base_label.strip():
        raise ValueError("empty vocabulary term")
    return list(dict.fromkeys([query_text, base_label]))


# -- bundled verifiers --------------------------------------------------------

class LabelVerifier:
    """1 when the object's label occurs in the query, else 0."""

    def score(self, query: Query, obj: ObjectInstance) -> float:
        return 1.0 if _contains(query.normalized, tokens(obj.label)) else 0.0


class AttributeVerifier:
    """Fraction of the query's descriptive words found among the object's attributes.

    Descriptive words are the distinct query tokens that are not part of the
    object's label. A query with no such words scores 1.
    """

    def score(self, query: Query, obj: ObjectInstance) -> float:
        label = set(tokens(obj.label))
        extra = set(query.normalized) - label
        if not extra:
            return 1.0
        attrs = set()
        for a in obj.attributes:
            attrs.update(tokens(a))
        return min(1.0, len(extra & attrs) / len(extra))


class HttpVerifier:
    """Asks a remote multimodal model whether the object matches the query.

    Request body::

        {"question": "Is there a <query>?", "vocabulary": [<query>, <label>],
         "image_refs": [...], "object_id": <id>, "label": <label>}

    The reply must carry either ``"score"`` (a number in [0, 1]) or
    ``"answer"`` ("yes"/"no").
    """

    def __init__(self, endpoint: str, timeout: float = 30.0):
        self.endpoint = endpoint
        self.timeout = timeout

    def request_body(self, query: Query, obj: ObjectInstance) -> dict:
        return {
            "question": vqa_question(query.raw),
            "vocabulary": dynamic_vocabulary(query.raw, obj.label),
            "image_refs": list(obj.image_refs),
            "object_id": obj.id,
            "label": obj.label,
        }

    def score(self, query: Query, obj: ObjectInstance) -> float:
        data = json.dumps(self.request_body(query, obj)).encode()
        req = urllib.request.Request(self.endpoint, data=data,
                                     headers={"Content-Type": "application/json"})
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                reply = json.loads(resp.read())
        except (urllib.error.URLError, OSError, json.JSONDecodeError) as exc:
            raise VerifierError(f"verifier endpoint {self.endpoint}: {exc}") from exc
        return parse_verifier_reply(reply)


def parse_verifier_reply(reply) -> float:
    if isinstance(reply, dict):
        if "score" in reply:
            s = reply["score"]
            if isinstance(s, (int, float)) and not isinstance(s, bool):
                return min(1.0, max(0.0, float(s)))
        if "answer" in reply and isinstance(reply["answer"], str):
            ans = reply["answer"].strip().lower()
            if ans in ("yes", "no"):
                return 1.0 if ans == "yes" else 0.0
    raise VerifierError(f"unrecognized verifier reply: {reply!r}")


