"""Corpus text statistics: word counts, cumulative curves, distinct n-grams.

The word definition used everywhere in the toolkit: lowercase, split on
whitespace, strip leading/trailing non-alphanumeric characters, drop empty
results.  Internal punctuation (apostrophes, hyphens) is preserved.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence


def _strip_edges(token: str) -> str:
    start, end = 0, len(token)
    while start < end and not token[start].isalnum():
        start += 1
    while end > start and not token[end - 1].isalnum():
        end -= 1
    return token[start:end]


def tokenize(text: str) -> list[str]:
    tokens = []
    for raw in text.lower().split():
        tok = _strip_edges(raw)
        if tok:
            tokens.append(tok)
    return tokens


def word_count(text: str) -> int:
    return len(tokenize(text))


def sample_doc_indices(n_docs: int, sample_pct: float, seed: int) -> list[int]:
    """Seeded doc-level sample: first round(pct% * n) docs of a fixed shuffle.

    Prefix construction makes samples nested across percentages, so the
    distinct n-gram curve is non-decreasing in the sampled share.
    """
    if not 0.0 < sample_pct <= 100.0:
        raise ValueError("sample_pct must lie in (0, 100]")
    if sample_pct == 100.0:
        return list(range(n_docs))
    order = list(range(n_docs))
    random.Random(f"{seed}:doc-sample").shuffle(order)
    k = round(n_docs * sample_pct / 100.0)
    return sorted(order[:k])


def iter_ngrams(tokens: Sequence[str], n: int) -> Iterable[tuple[str, ...]]:
    for i in range(len(tokens) - n + 1):
        yield tuple(tokens[i:i + n])


def unique_ngrams(docs: Sequence[str], n: int, sample_pct: float = 100.0,
                  seed: int = 0) -> int:
    """Exact count of distinct n-token windows over the sampled doc subset."""
    if n < 1:
        raise ValueError("n must be >= 1")
    docs = list(docs)
    grams: set[tuple[str, ...]] = set()
    for i in sample_doc_indices(len(docs), sample_pct, seed):
        grams.update(iter_ngrams(tokenize(docs[i]), n))
    return len(grams)


class StatsAccumulator:
    """Associative, commutative accumulator for corpus statistics.

    Any sharding of a corpus across workers merges to the identical result;
    the distinct n-gram set is carried explicitly so merges stay exact.
    """

    def __init__(self, ngram_n: int = 4):
        if ngram_n < 1:
            raise ValueError("ngram_n must be >= 1")
        self.ngram_n = ngram_n
        self.doc_count = 0
        self.total_words = 0
        self.histogram: Counter = Counter()
        self.grams: set[tuple[str, ...]] = set()

    def add_text(self, text: str) -> None:
        tokens = tokenize(text)
        self.doc_count += 1
        self.total_words += len(tokens)
        self.histogram[len(tokens)] += 1
        self.grams.update(iter_ngrams(tokens, self.ngram_n))

    def merge(self, other: "StatsAccumulator") -> "StatsAccumulator":
        if other.ngram_n != self.ngram_n:
            raise ValueError("cannot merge accumulators with different n")
        merged = StatsAccumulator(self.ngram_n)
        merged.doc_count = self.doc_count + other.doc_count
        merged.total_words = self.total_words + other.total_words
        merged.histogram = self.histogram + other.histogram
        merged.grams = self.grams | other.grams
        return merged

    def finalize(self, sample_pct: float = 100.0) -> "CorpusTextStats":
        docs = self.doc_count
        mean = self.total_words / docs if docs else 0.0
        cumulative = []
        running = 0
        for k in sorted(self.histogram):
            running += self.histogram[k]
            cumulative.append((k, running / docs))
        return CorpusTextStats(
            doc_count=docs,
            total_words=self.total_words,
            mean_words=mean,
            histogram=dict(sorted(self.histogram.items())),
            cumulative=tuple(cumulative),
            unique_ngrams=len(self.grams),
            ngram_n=self.ngram_n,
            sample_pct=sample_pct,
        )


@dataclass(frozen=True)
class CorpusTextStats:
    doc_count: int
    total_words: int
    mean_words: float
    histogram: dict[int, int]
    cumulative: tuple[tuple[int, float], ...]  # (word count k, P(len <= k))
    unique_ngrams: int
    ngram_n: int
    sample_pct: float

    def to_dict(self) -> dict:
        return {
            "doc_count": self.doc_count,
            "total_words": self.total_words,
            "mean_words": self.mean_words,
            "histogram": {str(k): v for k, v in self.histogram.items()},
            "cumulative": [[k, p] for k, p in self.cumulative],
            "unique_ngrams": self.unique_ngrams,
            "ngram_n": self.ngram_n,
            "sample_pct": self.sample_pct,
        }


def corpus_stats(texts: Sequence[str], ngram_n: int = 4,
                 sample_pct: float = 100.0, seed: int = 0,
                 jobs: int = 1) -> CorpusTextStats:
    """Single-pass statistics over a text corpus.

    With ``jobs > 1`` the corpus is sharded and the partial accumulators
    merged; the result is bit-identical to the sequential pass.
    """
    texts = list(texts)
    picked = [texts[i] for i in sample_doc_indices(len(texts), sample_pct, seed)]
    if jobs <= 1 or len(picked) < 2:
        acc = StatsAccumulator(ngram_n)
        for text in picked:
            acc.add_text(text)
        return acc.finalize(sample_pct)
    shards = [picked[i::jobs] for i in range(jobs)]
    accs = []
    for shard in shards:
        acc = StatsAccumulator(ngram_n)
        for text in shard:
            acc.add_text(text)
        accs.append(acc)
    total = accs[0]
    for acc in accs[1:]:
        total = total.merge(acc)
    return total.finalize(sample_pct)


def ngram_percentage_table(docs: Sequence[str], n: int, seed: int,
                           percentages: Sequence[float] = tuple(range(10, 101, 10)),
                           ) -> list[tuple[float, int]]:
    """Distinct n-gram counts at growing sampled shares of the corpus."""
    return [(pct, unique_ngrams(docs, n, pct, seed)) for pct in percentages]


def field_texts(records, field: str) -> list[str]:
    """Pull one caption-bearing field out of a record stream."""
    from .records import TEXT_FIELDS
    if field not in TEXT_FIELDS:
        raise ValueError(f"unknown text field {field!r}; "
                         f"expected one of {TEXT_FIELDS}")
    return [getattr(rec, field) for rec in records]
