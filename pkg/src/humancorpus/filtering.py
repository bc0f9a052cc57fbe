"""Selection gates and post-processing filters.

Face and attribute gates use strict inequalities by default (the thresholds
are exclusive); ``FilterConfig.strict = False`` switches every comparison
to inclusive.  Rejection is a value, not an error: gates return the updated
record plus an optional reason code.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Sequence

from .config import PipelineConfig
from .records import (
    FACE_LOW_CONF, FACE_TOO_SMALL, REFUSAL, SHORT_TEXT, TEXT_FIELDS,
    TOO_FEW_ATTRS, SampleRecord, Status,
)
from .textstats import word_count
from .util import parallel_map

STAGE_FACE = "face"
STAGE_ATTRS = "attrs"
STAGE_CLEAN = "clean"
ALL_STAGES = (STAGE_FACE, STAGE_ATTRS, STAGE_CLEAN)


@dataclass
class FilterReport:
    """Mergeable gate bookkeeping: input = pass + sum(rejections)."""

    input_count: int = 0
    pass_count: int = 0
    rejections: Counter = field(default_factory=Counter)

    def record_pass(self):
        self.input_count += 1
        self.pass_count += 1

    def record_reject(self, reason: str):
        self.input_count += 1
        self.rejections[reason] += 1

    def merge(self, other: "FilterReport") -> "FilterReport":
        merged = FilterReport(
            input_count=self.input_count + other.input_count,
            pass_count=self.pass_count + other.pass_count,
            rejections=self.rejections + other.rejections,
        )
        return merged

    def to_dict(self) -> dict:
        return {
            "input_count": self.input_count,
            "pass_count": self.pass_count,
            "rejections": dict(sorted(self.rejections.items())),
        }


def _exceeds(value: float, threshold: float, strict: bool) -> bool:
    return value > threshold if strict else value >= threshold


def face_gate(record: SampleRecord, config: PipelineConfig) -> str | None:
    """None if any face clears both size and confidence gates, else a reason.

    A record passes when at least one detected face has width and height
    beyond ``min_face_side`` and confidence beyond ``min_face_conf``.  The
    reason distinguishes whether size or confidence was the blocker.
    """
    fc = config.filter
    any_size_ok = False
    for face in record.faces:
        _, _, w, h = face.bbox
        size_ok = (_exceeds(w, fc.min_face_side, fc.strict)
                   and _exceeds(h, fc.min_face_side, fc.strict))
        if not size_ok:
            continue
        any_size_ok = True
        if _exceeds(face.conf, fc.min_face_conf, fc.strict):
            return None
    return FACE_LOW_CONF if any_size_ok else FACE_TOO_SMALL


def attribute_gate(record: SampleRecord,
                   config: PipelineConfig) -> tuple[SampleRecord, str | None]:
    """Drop low-probability labels; reject when too few survive.

    Returns the record with ``attrs`` replaced by the retained set, and a
    reason code when the retained count does not exceed ``min_valid_attrs``.
    """
    fc = config.filter
    kept = tuple(a for a in record.attrs
                 if _exceeds(a.p, fc.min_attr_prob, fc.strict))
    trimmed = record if kept == record.attrs else replace(record, attrs=kept)
    ok = len(kept) > fc.min_valid_attrs if fc.strict \
        else len(kept) >= fc.min_valid_attrs
    return trimmed, (None if ok else TOO_FEW_ATTRS)


def detect_refusal(text: str, patterns: Sequence[str]) -> bool:
    """Case-insensitive substring match against any refusal pattern."""
    if not patterns:
        raise ValueError("refusal pattern list must be non-empty")
    lowered = text.lower()
    return any(p.lower() in lowered for p in patterns)


def short_text_filter(text: str, min_words: int) -> bool:
    """True (keep) iff the text has at least ``min_words`` words."""
    return word_count(text) >= min_words


def sample_inspection(records: Sequence[SampleRecord], n: int,
                      seed: int) -> list[SampleRecord]:
    """Uniform sample without replacement; deterministic in the seed."""
    if n > len(records):
        raise ValueError(f"cannot sample {n} records from {len(records)}")
    return random.Random(seed).sample(list(records), n)


def apply_gates(record: SampleRecord, config: PipelineConfig,
                stages: Sequence[str] = ALL_STAGES,
                text_field: str | None = None) -> SampleRecord:
    """Run the requested gates in canonical order on one record."""
    if record.status is Status.REJECTED:
        return record
    field_name = text_field or config.clean.text_field
    if field_name not in TEXT_FIELDS:
        raise ValueError(f"unknown text field {field_name!r}")
    if STAGE_FACE in stages:
        reason = face_gate(record, config)
        if reason is not None:
            return record.rejected(reason)
        record = record.advanced(Status.FACE_PASS)
    if STAGE_ATTRS in stages:
        record, reason = attribute_gate(record, config)
        if reason is not None:
            return record.rejected(reason)
        record = record.advanced(Status.ATTR_PASS)
    if STAGE_CLEAN in stages:
        text = getattr(record, field_name)
        if detect_refusal(text, config.clean.refusal_patterns):
            return record.rejected(REFUSAL)
        if not short_text_filter(text, config.clean.min_caption_words):
            return record.rejected(SHORT_TEXT)
        record = record.advanced(Status.CLEANED)
    return record


def iter_filter(records: Iterable[SampleRecord], config: PipelineConfig,
                stages: Sequence[str] = ALL_STAGES,
                text_field: str | None = None,
                report: FilterReport | None = None,
                jobs: int = 1) -> Iterator[SampleRecord]:
    """Stream records through the gates, updating ``report`` as they pass.

    Output order equals input order for any ``jobs`` value; the report is
    complete once the iterator is exhausted.
    """
    bad = [s for s in stages if s not in ALL_STAGES]
    if bad:
        raise ValueError(f"unknown filter stages: {bad}")
    gate = lambda rec: apply_gates(rec, config, stages, text_field)
    if jobs <= 1:
        gated = map(gate, records)
    else:
        gated = iter(parallel_map(gate, list(records), jobs))
    for rec in gated:
        if report is not None:
            if rec.status is Status.REJECTED:
                report.record_reject(rec.reason)
            else:
                report.record_pass()
        yield rec


def run_filter(records: Iterable[SampleRecord], config: PipelineConfig,
               stages: Sequence[str] = ALL_STAGES,
               text_field: str | None = None,
               jobs: int = 1,
               ) -> tuple[list[SampleRecord], list[SampleRecord], FilterReport]:
    """Partition a stream into (passes, rejects) plus a consistent report."""
    report = FilterReport()
    passes: list[SampleRecord] = []
    rejects: list[SampleRecord] = []
    for rec in iter_filter(records, config, stages, text_field, report, jobs):
        (rejects if rec.status is Status.REJECTED else passes).append(rec)
    return passes, rejects, report
