"""Canonical record types flowing through the pipeline.

Records are immutable; every stage produces updated copies via
``dataclasses.replace`` (wrapped by the helpers below), so records can be
handed to parallel workers without locking.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Any, Mapping

from .attributes import parse_attribute

# Machine-readable rejection reason codes.
FACE_TOO_SMALL = "face_too_small"
FACE_LOW_CONF = "face_low_conf"
TOO_FEW_ATTRS = "too_few_attrs"
SHORT_TEXT = "short_text"
REFUSAL = "refusal"
JUDGE_PARSE_FAIL = "judge_parse_fail"

REASON_CODES = (
    FACE_TOO_SMALL, FACE_LOW_CONF, TOO_FEW_ATTRS, SHORT_TEXT, REFUSAL,
    JUDGE_PARSE_FAIL,
)

# Caption-bearing fields a text gate or statistic may be pointed at.
TEXT_FIELDS = ("source_text", "global_caption", "facial_raw",
               "facial_caption", "caption")


class SchemaError(ValueError):
    """A record field violates its domain (names the offending field)."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"field {field_name!r}: {message}")
        self.field_name = field_name


class StatusError(ValueError):
    """A record was asked to move backward in the status order."""


class Status(str, enum.Enum):
    RAW = "raw"
    FACE_PASS = "face_pass"
    ATTR_PASS = "attr_pass"
    SYNTHESIZED = "synthesized"
    REWRITTEN = "rewritten"
    MERGED = "merged"
    CLEANED = "cleaned"
    REJECTED = "rejected"


_STATUS_ORDER = {s: i for i, s in enumerate(Status)}


@dataclass(frozen=True)
class AttributeLabel:
    name: str
    p: float

    def __post_init__(self):
        parse_attribute(self.name)
        if not isinstance(self.p, (int, float)) or not 0.0 <= self.p <= 1.0:
            raise SchemaError("p", f"probability must lie in [0, 1], got {self.p!r}")


@dataclass(frozen=True)
class FaceDetection:
    bbox: tuple[float, float, float, float]  # (x, y, w, h) in pixels
    conf: float

    def __post_init__(self):
        x, y, w, h = self.bbox
        if x < 0 or y < 0:
            raise SchemaError("bbox", f"origin must be non-negative, got ({x}, {y})")
        if w <= 0 or h <= 0:
            raise SchemaError("bbox", f"width/height must be positive, got ({w}, {h})")
        if not 0.0 <= self.conf <= 1.0:
            raise SchemaError("conf", f"confidence must lie in [0, 1], got {self.conf!r}")


@dataclass(frozen=True)
class SampleRecord:
    """One image-text unit, from raw web pair to final merged caption."""

    id: str
    image: str = ""
    width: int | None = None
    height: int | None = None
    faces: tuple[FaceDetection, ...] = ()
    attrs: tuple[AttributeLabel, ...] = ()
    source_text: str = ""
    global_caption: str = ""
    facial_raw: str = ""
    facial_caption: str = ""
    caption: str = ""
    status: Status = Status.RAW
    reason: str | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.id:
            raise SchemaError("id", "must be non-empty")
        if (self.status is Status.REJECTED) != (self.reason is not None):
            raise SchemaError("reason", "present iff status is rejected")
        if self.width is not None and self.height is not None:
            for f in self.faces:
                x, y, w, h = f.bbox
                if x + w > self.width or y + h > self.height:
                    raise SchemaError(
                        "bbox", f"face {f.bbox} exceeds image bounds "
                        f"{self.width}x{self.height}")

    def advanced(self, status: Status) -> "SampleRecord":
        """Copy with a forward status transition; backward moves raise."""
        if self.status is Status.REJECTED:
            raise StatusError(f"record {self.id!r} is rejected and cannot advance")
        if _STATUS_ORDER[status] < _STATUS_ORDER[self.status]:
            raise StatusError(
                f"record {self.id!r}: cannot move {self.status.value} -> {status.value}")
        if status is self.status:
            return self
        return replace(self, status=status)

    def rejected(self, reason: str) -> "SampleRecord":
        if reason not in REASON_CODES:
            raise SchemaError("reason", f"unknown reason code {reason!r}")
        if self.status is Status.REJECTED:
            return self
        return replace(self, status=Status.REJECTED, reason=reason)


# JSONL (de)serialization.  Unknown input keys land in ``extra`` and are
# written back verbatim.

_KNOWN_KEYS = (
    "id", "image", "width", "height", "faces", "attrs", "source_text",
    "global_caption", "facial_raw", "facial_caption", "caption", "status",
    "reason",
)


def record_to_dict(rec: SampleRecord) -> dict[str, Any]:
    out: dict[str, Any] = {"id": rec.id, "image": rec.image}
    if rec.width is not None:
        out["width"] = rec.width
    if rec.height is not None:
        out["height"] = rec.height
    if rec.faces:
        out["faces"] = [{"bbox": list(f.bbox), "conf": f.conf} for f in rec.faces]
    if rec.attrs:
        out["attrs"] = [{"name": a.name, "p": a.p} for a in rec.attrs]
    for key in ("source_text", "global_caption", "facial_raw",
                "facial_caption", "caption"):
        value = getattr(rec, key)
        if value:
            out[key] = value
    out["status"] = rec.status.value
    if rec.reason is not None:
        out["reason"] = rec.reason
    out.update(rec.extra)
    return out


def record_from_dict(data: Mapping[str, Any]) -> SampleRecord:
    if "id" not in data:
        raise SchemaError("id", "missing")
    try:
        faces = tuple(
            FaceDetection(bbox=tuple(f["bbox"]), conf=f["conf"])
            for f in data.get("faces", ()))
        attrs = tuple(
            AttributeLabel(name=a["name"], p=a["p"])
            for a in data.get("attrs", ()))
    except KeyError as exc:
        raise SchemaError(str(exc), "missing in face/attr entry") from exc
    status_raw = data.get("status", Status.RAW.value)
    try:
        status = Status(status_raw)
    except ValueError:
        raise SchemaError("status", f"unknown status {status_raw!r}") from None
    extra = {k: v for k, v in data.items() if k not in _KNOWN_KEYS}
    return SampleRecord(
        id=data["id"],
        image=data.get("image", ""),
        width=data.get("width"),
        height=data.get("height"),
        faces=faces,
        attrs=attrs,
        source_text=data.get("source_text", ""),
        global_caption=data.get("global_caption", ""),
        facial_raw=data.get("facial_raw", ""),
        facial_caption=data.get("facial_caption", ""),
        caption=data.get("caption", ""),
        status=status,
        reason=data.get("reason"),
        extra=extra,
    )
