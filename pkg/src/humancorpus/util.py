"""Small shared helpers: deterministic seeds, digests, ordered parallel map."""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def stable_record_seed(seed: int, record_id: str) -> int:
    """64-bit per-record seed, independent of record order and parallelism."""
    digest = hashlib.sha256(f"{seed}:{record_id}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def sha256_file(path) -> str | None:
    if path == "-":
        return None
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def parallel_map(fn: Callable[[T], R], items: Sequence[T], jobs: int,
                 chunksize: int = 256) -> list[R]:
    """Order-preserving map; results are identical for any ``jobs`` value."""
    if jobs <= 1 or len(items) <= chunksize:
        return [fn(x) for x in items]
    chunks = [items[i:i + chunksize] for i in range(0, len(items), chunksize)]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        mapped = pool.map(lambda chunk: [fn(x) for x in chunk], chunks)
        return [r for chunk in mapped for r in chunk]


def chunked(items: Iterable[T], size: int) -> Iterable[list[T]]:
    chunk: list[T] = []
    for item in items:
        chunk.append(item)
        if len(chunk) >= size:
            yield chunk
            chunk = []
    if chunk:
        yield chunk
