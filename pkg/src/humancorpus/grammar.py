"""Weighted context-free grammar engine.

Productions carry positive weights that normalize to probabilities per
nonterminal.  Sampling a derivation records every production applied, so a
derivation's log-probability can be scored afterwards and checked against
empirical frequencies.

Rules file format, one production per line::

    NONTERM -> sym sym ... @ weight

Symbols are whitespace-separated; a symbol is a nonterminal iff it appears
on some left-hand side.  ``@ weight`` is optional (default 1).  Lines
starting with ``#`` are comments.  The first left-hand side is the start
symbol unless overridden.
"""

from __future__ import annotations

import math
import random
from bisect import bisect_right
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence


class GrammarError(ValueError):
    pass


@dataclass(frozen=True)
class Production:
    rhs: tuple[str, ...]
    weight: float

    def __post_init__(self):
        if not (self.weight > 0 and math.isfinite(self.weight)):
            raise GrammarError(f"production weight must be positive and finite, "
                               f"got {self.weight!r}")


# One derivation step: (nonterminal, index of the production applied).
Derivation = list[tuple[str, int]]


class Grammar:
    """Validated PCFG: every nonterminal is reachable and can terminate."""

    def __init__(self, productions: dict[str, Sequence[Production]], start: str):
        if start not in productions:
            raise GrammarError(f"start symbol {start!r} has no productions")
        self.start = start
        self.productions: dict[str, tuple[Production, ...]] = {
            nt: tuple(prods) for nt, prods in productions.items()
        }
        for nt, prods in self.productions.items():
            if not prods:
                raise GrammarError(f"nonterminal {nt!r} has no productions")
        self._probs: dict[str, tuple[float, ...]] = {}
        self._cum: dict[str, list[float]] = {}
        for nt, prods in self.productions.items():
            total = sum(p.weight for p in prods)
            probs = tuple(p.weight / total for p in prods)
            self._probs[nt] = probs
            cum, running = [], 0.0
            for pr in probs:
                running += pr
                cum.append(running)
            cum[-1] = 1.0
            self._cum[nt] = cum
        self._validate()

    @property
    def nonterminals(self) -> frozenset[str]:
        return frozenset(self.productions)

    @property
    def terminals(self) -> frozenset[str]:
        syms = {s for prods in self.productions.values()
                for p in prods for s in p.rhs}
        return frozenset(syms - self.nonterminals)

    def _validate(self):
        nts = self.nonterminals
        # Reachability from the start symbol.
        reachable = {self.start}
        frontier = [self.start]
        while frontier:
            nt = frontier.pop()
            for prod in self.productions[nt]:
                for sym in prod.rhs:
                    if sym in nts and sym not in reachable:
                        reachable.add(sym)
                        frontier.append(sym)
        unreachable = sorted(nts - reachable)
        if unreachable:
            raise GrammarError(f"unreachable nonterminals: {unreachable}")
        # Termination: least fixed point of "some production derives a
        # terminal-only string".
        terminating: set[str] = set()
        changed = True
        while changed:
            changed = False
            for nt in nts:
                if nt in terminating:
                    continue
                for prod in self.productions[nt]:
                    if all(s not in nts or s in terminating for s in prod.rhs):
                        terminating.add(nt)
                        changed = True
                        break
        dead = sorted(nts - terminating)
        if dead:
            raise GrammarError(f"non-terminating nonterminals: {dead}")

    def production_probs(self, symbol: str) -> tuple[float, ...]:
        return self._probs[symbol]

    def choose(self, symbol: str, rng: random.Random) -> int:
        """Sample one production index for ``symbol`` by weight."""
        cum = self._cum[symbol]
        idx = bisect_right(cum, rng.random())
        return min(idx, len(cum) - 1)

    def sample(self, symbol: str | None = None, rng: random.Random | None = None,
               max_expansions: int = 10_000) -> tuple[list[str], Derivation]:
        """Leftmost expansion from ``symbol`` (default: start).

        Returns the terminal token sequence and the derivation taken.
        Validation guarantees termination is possible, not certain; the
        expansion budget guards against unlikely runaway recursions.
        """
        symbol = self.start if symbol is None else symbol
        rng = rng if rng is not None else random.Random()
        if symbol not in self.productions:
            raise GrammarError(f"unknown nonterminal {symbol!r}")
        tokens: list[str] = []
        derivation: Derivation = []
        stack = [symbol]
        expansions = 0
        while stack:
            sym = stack.pop()
            if sym not in self.productions:
                tokens.append(sym)
                continue
            expansions += 1
            if expansions > max_expansions:
                raise GrammarError(
                    f"expansion budget exceeded ({max_expansions}); "
                    f"grammar is likely strongly recursive")
            idx = self.choose(sym, rng)
            derivation.append((sym, idx))
            stack.extend(reversed(self.productions[sym][idx].rhs))
        return tokens, derivation

    def derivation_logprob(self, derivation: Iterable[tuple[str, int]]) -> float:
        """Sum of log production probabilities along a derivation (<= 0)."""
        total = 0.0
        for sym, idx in derivation:
            if sym not in self._probs:
                raise GrammarError(f"derivation uses unknown nonterminal {sym!r}")
            probs = self._probs[sym]
            if not 0 <= idx < len(probs):
                raise GrammarError(
                    f"derivation step ({sym!r}, {idx}) not in grammar")
            total += math.log(probs[idx])
        return total


def parse_rules(text: str) -> dict[str, list[Production]]:
    productions: dict[str, list[Production]] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "->" not in line:
            raise GrammarError(f"line {line_no}: expected 'LHS -> rhs'")
        lhs, _, rest = line.partition("->")
        lhs = lhs.strip()
        if not lhs or " " in lhs:
            raise GrammarError(f"line {line_no}: invalid left-hand side {lhs!r}")
        weight = 1.0
        if "@" in rest:
            rest, _, wtext = rest.rpartition("@")
            try:
                weight = float(wtext.strip())
            except ValueError:
                raise GrammarError(
                    f"line {line_no}: invalid weight {wtext.strip()!r}") from None
        rhs = tuple(rest.split())
        if not rhs:
            raise GrammarError(f"line {line_no}: empty right-hand side")
        try:
            productions.setdefault(lhs, []).append(Production(rhs, weight))
        except GrammarError as exc:
            raise GrammarError(f"line {line_no}: {exc}") from None
    if not productions:
        raise GrammarError("no productions found")
    return productions


def load_rules(path: str | Path) -> dict[str, list[Production]]:
    return parse_rules(Path(path).read_text(encoding="utf-8"))
