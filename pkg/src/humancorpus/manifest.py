"""Streaming JSONL manifest reader/writer.

One record per line, UTF-8.  Malformed lines raise ``ManifestError`` with
the 1-based line number instead of being dropped.
"""

from __future__ import annotations

import io
import json
import sys
from pathlib import Path
from typing import IO, Iterable, Iterator

from .records import SampleRecord, SchemaError, record_from_dict, record_to_dict


class ManifestError(ValueError):
    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


def _open_in(path) -> IO[str]:
    if path == "-":
        return io.TextIOWrapper(sys.stdin.buffer, encoding="utf-8")
    return open(path, "r", encoding="utf-8")


def _open_out(path) -> IO[str]:
    if path == "-":
        return io.TextIOWrapper(sys.stdout.buffer, encoding="utf-8", write_through=True)
    return open(path, "w", encoding="utf-8")


def iter_manifest(path) -> Iterator[SampleRecord]:
    """Yield records in file order; ``path`` may be "-" for stdin."""
    fh = _open_in(path)
    try:
        yield from read_records(fh)
    finally:
        if path != "-":
            fh.close()


def read_records(fh: Iterable[str]) -> Iterator[SampleRecord]:
    for line_no, line in enumerate(fh, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            data = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ManifestError(f"invalid JSON: {exc.msg}", line_no) from exc
        if not isinstance(data, dict):
            raise ManifestError("line is not a JSON object", line_no)
        try:
            yield record_from_dict(data)
        except SchemaError as exc:
            raise ManifestError(str(exc), line_no) from exc


def read_manifest(path) -> list[SampleRecord]:
    """Materialized form of :func:`iter_manifest`."""
    return list(iter_manifest(path))


def record_to_line(rec: SampleRecord) -> str:
    return json.dumps(record_to_dict(rec), ensure_ascii=False, separators=(",", ":"))


def write_manifest(records: Iterable[SampleRecord], path) -> int:
    """Write records as JSONL; returns the count written.

    Duplicate ids within one manifest are an error (the manifest would no
    longer round-trip to the same record set).
    """
    seen: set[str] = set()
    count = 0
    fh = _open_out(path)
    try:
        for rec in records:
            if rec.id in seen:
                raise ManifestError(f"duplicate record id {rec.id!r}")
            seen.add(rec.id)
            fh.write(record_to_line(rec))
            fh.write("\n")
            count += 1
    finally:
        if path != "-":
            fh.close()
        else:
            fh.flush()
            fh.detach()
    return count


def write_jsonl(rows: Iterable[dict], path) -> int:
    """Plain JSONL writer for non-record payloads (reports, eval items)."""
    count = 0
    fh = _open_out(path)
    try:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False, separators=(",", ":")))
            fh.write("\n")
            count += 1
    finally:
        if path != "-":
            fh.close()
        else:
            fh.flush()
            fh.detach()
    return count


def read_jsonl(path) -> list[dict]:
    rows = []
    fh = _open_in(path)
    try:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise ManifestError(f"invalid JSON: {exc.msg}", line_no) from exc
    finally:
        if path != "-":
            fh.close()
    return rows


def dedupe_check(path: str | Path) -> None:
    """Validate id uniqueness of an existing manifest file."""
    seen: set[str] = set()
    for rec in iter_manifest(path):
        if rec.id in seen:
            raise ManifestError(f"duplicate record id {rec.id!r}")
        seen.add(rec.id)
