"""Engine configuration and backend/verifier factories."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .llm import CannedBackend, EchoBackend, LlmBackend, RemoteBackend
from .loc import AttributeVerifier, HttpVerifier, LabelVerifier, LocConfig, Verifier
from .relations import RelationConfig

VERIFIER_CHOICES = ("none", "label", "attribute", "remote")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class EngineConfig:
    relations: RelationConfig = field(default_factory=RelationConfig)
    loc: LocConfig = field(default_factory=LocConfig)
    backend: Optional[str] = None
    prompt_asset: Optional[str] = None
    num_examples: Optional[int] = None
    votes: int = 1
    verifier: str = "attribute"

    def __post_init__(self):
        if self.votes < 1:
            raise ConfigError("votes must be >= 1")
        if self.verifier not in VERIFIER_CHOICES:
            raise ConfigError(f"verifier must be one of {VERIFIER_CHOICES}")


def _resolve(base: Path, value: Optional[str]) -> Optional[str]:
    if value is None:
        return None
    p = Path(value)
    if not p.is_absolute():
        p = base / p
    if not p.exists():
        raise ConfigError(f"configured path does not exist: {p}")
    return str(p)


def load_config(path: str | Path) -> EngineConfig:
    """Read a JSON engine configuration.

    Relative paths inside the document are resolved against its directory.
    Example::

        {"relations": {"near_threshold": 1.0},
         "loc": {"accept_threshold": 0.6},
         "backend": "canned:fixtures.json",
         "num_examples": 8, "votes": 3, "verifier": "attribute"}
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    base = path.parent
    backend = doc.get("backend")
    if isinstance(backend, str) and backend.startswith("canned:"):
        backend = "canned:" + _resolve(base, backend[len("canned:"):])
    loc_doc = dict(doc.get("loc") or {})
    if loc_doc.get("label_vocabulary") is not None:
        loc_doc["label_vocabulary"] = frozenset(loc_doc["label_vocabulary"])
    try:
        return EngineConfig(
            relations=RelationConfig(**(doc.get("relations") or {})),
            loc=LocConfig(**loc_doc),
            backend=backend,
            prompt_asset=_resolve(base, doc.get("prompt_asset")),
            num_examples=doc.get("num_examples"),
            votes=doc.get("votes", 1),
            verifier=doc.get("verifier", "attribute"),
        )
    except TypeError as exc:
        raise ConfigError(f"bad config field: {exc}") from exc


def make_backend(spec: str, environ=os.environ) -> LlmBackend:
    """Build a backend from ``canned:<path>``, ``echo[:<template>]`` or ``remote``."""
    kind, _, arg = spec.partition(":")
    if kind == "canned":
        if not arg:
            raise ConfigError("canned backend needs a fixture path: canned:<path>")
        try:
            return CannedBackend.from_file(arg)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot load canned fixtures {arg}: {exc}") from exc
    if kind == "echo":
        return EchoBackend(arg) if arg else EchoBackend()
    if kind == "remote":
        if not environ.get("LLM_ENDPOINT"):
            raise ConfigError("remote backend needs LLM_ENDPOINT in the environment")
        return RemoteBackend.from_env(environ)
    raise ConfigError(f"unknown backend {spec!r}")


def make_verifier(name: str, environ=os.environ) -> Optional[Verifier]:
    if name == "none":
        return None
    if name == "label":
        return LabelVerifier()
    if name == "attribute":
        return AttributeVerifier()
    if name == "remote":
        endpoint = environ.get("VERIFIER_ENDPOINT")
        if not endpoint:
            raise ConfigError("remote verifier needs VERIFIER_ENDPOINT in the environment")
        return HttpVerifier(endpoint)
    raise ConfigError(f"unknown verifier {name!r}")
