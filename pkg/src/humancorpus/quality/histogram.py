"""Score histograms: per-bin proportions over explicit edges."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class ScoreHistogram:
    edges: tuple[float, ...]
    counts: tuple[int, ...]
    proportions: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "edges": list(self.edges),
            "counts": list(self.counts),
            "proportions": list(self.proportions),
        }


def score_histogram(scores: Sequence[float], bin_edges: Sequence[float],
                    clamp: bool = False) -> ScoreHistogram:
    """Bin scores into [e0, e1), ..., [e_{n-1}, e_n] (last bin closed).

    Counts are conserved: out-of-range scores either raise or, with
    ``clamp``, land in the first/last bin.
    """
    values = np.asarray(list(scores), dtype=np.float64)
    if values.size == 0:
        raise ValueError("cannot histogram an empty score list")
    edges = np.asarray(list(bin_edges), dtype=np.float64)
    if edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise ValueError("bin edges must be strictly increasing, >= 2 of them")
    if clamp:
        values = np.clip(values, edges[0], edges[-1])
    elif values.min() < edges[0] or values.max() > edges[-1]:
        raise ValueError("scores fall outside the bin range (set clamp=True "
                         "to clip them)")
    counts, _ = np.histogram(values, bins=edges)
    total = int(counts.sum())
    assert total == values.size  # conservation
    proportions = counts / total
    return ScoreHistogram(
        edges=tuple(float(e) for e in edges),
        counts=tuple(int(c) for c in counts),
        proportions=tuple(float(p) for p in proportions),
    )


def equal_bins(lo: float, hi: float, n: int) -> tuple[float, ...]:
    if not lo < hi:
        raise ValueError("need lo < hi for histogram bins")
    return tuple(np.linspace(lo, hi, n + 1).tolist())
