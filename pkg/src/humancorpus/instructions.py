"""Instruction-record emission and mixture assembly.

Instruction manifests are JSONL with ``{"image": ..., "conversations":
[{"from": role, "value": text}, ...]}`` and the placeholder ``<image>`` in
the first user turn.  Mixtures sample a target count from each source
manifest (seeded per source, so adding a source never changes the others'
samples) and shuffle the union with the master seed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path

from .manifest import read_jsonl
from .records import SampleRecord

IMAGE_TOKEN = "<image>"

TASK_KINDS = ("caption", "vqa", "grounding", "attribute")


class InstructionError(ValueError):
    pass


@dataclass(frozen=True)
class Turn:
    role: str
    content: str


@dataclass(frozen=True)
class InstructionRecord:
    image: str
    conversations: tuple[Turn, ...]

    def __post_init__(self):
        turns = self.conversations
        if not turns:
            raise InstructionError("conversation must be non-empty")
        start = 0
        if turns[0].role == "system":
            start = 1
        roles = [t.role for t in turns[start:]]
        if not roles or any(r not in ("user", "assistant") for r in roles):
            raise InstructionError(f"unexpected roles: {[t.role for t in turns]}")
        expected = ["user", "assistant"] * ((len(roles) + 1) // 2)
        if roles != expected[:len(roles)]:
            raise InstructionError("turns must alternate user/assistant")
        if roles.count("user") < 1 or roles.count("assistant") < 1:
            raise InstructionError("need at least one user and one assistant turn")
        token_count = sum(t.content.count(IMAGE_TOKEN) for t in turns)
        if token_count != 1:
            raise InstructionError(
                f"expected exactly one {IMAGE_TOKEN} placeholder, found {token_count}")
        first_user = next(t for t in turns if t.role == "user")
        if IMAGE_TOKEN not in first_user.content:
            raise InstructionError(
                f"the {IMAGE_TOKEN} placeholder must sit in the first user turn")

    def to_dict(self) -> dict:
        return {
            "image": self.image,
            "conversations": [
                {"from": t.role, "value": t.content} for t in self.conversations
            ],
        }


def instruction_from_dict(data: dict) -> InstructionRecord:
    try:
        turns = tuple(Turn(role=t["from"], content=t["value"])
                      for t in data["conversations"])
        return InstructionRecord(image=data.get("image", ""), conversations=turns)
    except (KeyError, TypeError) as exc:
        raise InstructionError(f"malformed instruction record: {exc}") from exc


_CAPTION_PROMPT = (f"{IMAGE_TOKEN}\nDescribe this image in detail, covering "
                   "the people and the scene.")
_ATTRIBUTE_PROMPT = (f"{IMAGE_TOKEN}\nWhich facial attributes of the person "
                     "are visible in this image?")


def emit_instruction_record(record: SampleRecord, task_kind: str,
                            ) -> InstructionRecord:
    """Build one instruction conversation from a pipeline record."""
    if task_kind not in TASK_KINDS:
        raise InstructionError(f"unknown task kind {task_kind!r}")
    if task_kind == "caption":
        if not record.caption:
            raise InstructionError(f"record {record.id!r} has no caption")
        turns = (Turn("user", _CAPTION_PROMPT), Turn("assistant", record.caption))
    elif task_kind == "vqa":
        question = record.extra.get("question")
        answer = record.extra.get("answer")
        if not question or not answer:
            raise InstructionError(
                f"record {record.id!r} lacks question/answer fields")
        turns = (Turn("user", f"{IMAGE_TOKEN}\n{question}"),
                 Turn("assistant", str(answer)))
    elif task_kind == "grounding":
        if not record.faces:
            raise InstructionError(f"record {record.id!r} has no face boxes")
        expr = record.extra.get("ref_expr", "the person's face")
        box = max(record.faces, key=lambda f: f.bbox[2] * f.bbox[3]).bbox
        coords = ", ".join(f"{v:g}" for v in box)
        turns = (Turn("user", f"{IMAGE_TOKEN}\nProvide the bounding box of {expr}."),
                 Turn("assistant", f"[{coords}]"))
    else:  # attribute
        if not record.attrs:
            raise InstructionError(f"record {record.id!r} has no attribute labels")
        names = ", ".join(a.name for a in record.attrs)
        turns = (Turn("user", _ATTRIBUTE_PROMPT), Turn("assistant", names))
    return InstructionRecord(image=record.image, conversations=turns)


@dataclass(frozen=True)
class MixtureSource:
    name: str
    path: str
    count: int

    def __post_init__(self):
        if not self.name:
            raise InstructionError("mixture source name must be non-empty")
        if self.count < 0:
            raise InstructionError(f"source {self.name!r}: negative target count")


@dataclass(frozen=True)
class MixtureSpec:
    sources: tuple[MixtureSource, ...]
    seed: int = 0

    def __post_init__(self):
        names = [s.name for s in self.sources]
        if len(set(names)) != len(names):
            raise InstructionError("duplicate dataset names in mixture spec")

    @classmethod
    def from_dict(cls, data: dict) -> "MixtureSpec":
        try:
            sources = tuple(
                MixtureSource(name=s["name"], path=s["path"], count=int(s["count"]))
                for s in data["sources"])
        except (KeyError, TypeError) as exc:
            raise InstructionError(f"malformed mixture spec: {exc}") from exc
        return cls(sources=sources, seed=int(data.get("seed", 0)))


def assemble_mixture(spec: MixtureSpec, base_dir: str | Path | None = None,
                     ) -> tuple[list[dict], dict[str, int]]:
    """Sample each source to its target count and shuffle the union.

    Sampling is without replacement; a source smaller than its target is an
    error.  The result is a pure function of (spec, source files).
    """
    base = Path(base_dir) if base_dir is not None else None
    combined: list[dict] = []
    counts: dict[str, int] = {}
    for source in spec.sources:
        path = Path(source.path)
        if base is not None and not path.is_absolute():
            path = base / path
        rows = read_jsonl(path)
        if len(rows) < source.count:
            raise InstructionError(
                f"source {source.name!r} has {len(rows)} records, "
                f"needs {source.count}")
        if len(rows) == source.count:
            picked = rows
        else:
            rng = random.Random(f"{spec.seed}:{source.name}")
            idx = sorted(rng.sample(range(len(rows)), source.count))
            picked = [rows[i] for i in idx]
        combined.extend(picked)
        counts[source.name] = len(picked)
    random.Random(f"{spec.seed}:shuffle").shuffle(combined)
    return combined, counts
