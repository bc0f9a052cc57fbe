"""Scoring protocols: judged captions, VQA, attributes, grounding, preferences.

The two judge prompt variants ask for a 0-10 semantic similarity score in
the parseable ``{ score: value }`` format; the second variant additionally
directs attention to facial detail, body posture, and clothing.  Responses
that cannot be parsed are counted as failures and excluded from means, never
averaged in as zeros.
"""

from __future__ import annotations

import re
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

from .attributes import ATTRIBUTE_NAMES, parse_attribute
from .records import JUDGE_PARSE_FAIL
from .rewrite import ChatClient


class EvalError(ValueError):
    pass


JUDGE_PROMPTS = {
    "P1": (
        "The following two sentences are descriptions of the same picture; "
        "give them a semantic similarity score out of 10. Provide your score "
        "in the format { score: value } and include an explanation "
        "immediately afterward: 1.<prediction> 2.<label>."
    ),
    "P2": (
        "Analyze the following two sentences that describe the same picture "
        "and determine whether the `prediction' has successfully expressed "
        "the content depicted in the `label', particularly focusing on "
        "details of the human face and descriptions of body postures and "
        "clothing. Score their semantic similarity out of a total of 10. "
        "Present your score in the format of {`score': value } and "
        "immediately explain the reason behind your judgment: "
        "1.<prediction> 2.<label>."
    ),
}


@dataclass(frozen=True)
class JudgePrompt:
    variant: str
    prediction: str
    label: str
    text: str


def build_judge_prompt(prediction: str, label: str,
                       variant: str = "P1") -> JudgePrompt:
    """Render a judge prompt; the two slots are each substituted once."""
    if variant not in JUDGE_PROMPTS:
        raise EvalError(f"unknown judge prompt variant {variant!r}")
    if not prediction.strip() or not label.strip():
        raise EvalError("prediction and label must be non-empty")
    template = JUDGE_PROMPTS[variant]
    assert template.count("<prediction>") == 1 and template.count("<label>") == 1
    text = template.replace("<prediction>", prediction).replace("<label>", label)
    return JudgePrompt(variant=variant, prediction=prediction, label=label,
                       text=text)


@dataclass(frozen=True)
class JudgeScore:
    value: float | None
    raw: str
    status: str  # "ok" or judge_parse_fail

    @property
    def ok(self) -> bool:
        return self.status == "ok"


# First numeric value bound to a "score" key inside braces; quote style,
# spacing, and trailing prose are tolerated.
_SCORE_RE = re.compile(
    r"\{[^{}]*?[\"'`]?score[\"'`]?\s*[:=]\s*[\"']?([+-]?\d+(?:\.\d+)?)",
    re.IGNORECASE)


def parse_judge_score(response: str) -> JudgeScore:
    match = _SCORE_RE.search(response)
    if match is None:
        return JudgeScore(value=None, raw=response, status=JUDGE_PARSE_FAIL)
    value = min(10.0, max(0.0, float(match.group(1))))
    return JudgeScore(value=value, raw=response, status="ok")


@dataclass(frozen=True)
class JudgeReport:
    mean: float
    scores: tuple[tuple[str, float | None, str], ...]  # (id, value, status)
    failures: int

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "failures": self.failures,
            "scored": len(self.scores) - self.failures,
            "scores": [
                {"id": i, "score": v, "status": s} for i, v, s in self.scores
            ],
        }


def judge_captions(pairs: Sequence[tuple[str, str, str]], client: ChatClient,
                   variant: str = "P1", jobs: int | None = None) -> JudgeReport:
    """Judge (id, prediction, label) pairs; mean over parsed scores only."""
    items = []
    for item_id, prediction, label in pairs:
        prompt = build_judge_prompt(prediction, label, variant)
        items.append((item_id, [{"role": "user", "content": prompt.text}]))
    outcomes = client.map_chat(items, jobs=jobs)
    scores: list[tuple[str, float | None, str]] = []
    parsed: list[float] = []
    for item_id, _, _ in pairs:
        kind, payload = outcomes[item_id]
        if kind != "ok":
            scores.append((item_id, None, JUDGE_PARSE_FAIL))
            continue
        judged = parse_judge_score(payload)
        scores.append((item_id, judged.value, judged.status))
        if judged.ok:
            parsed.append(judged.value)
    if not parsed:
        raise EvalError("no judge response could be parsed")
    failures = sum(1 for _, _, s in scores if s != "ok")
    return JudgeReport(mean=sum(parsed) / len(parsed),
                       scores=tuple(scores), failures=failures)


@dataclass(frozen=True)
class VqaItem:
    question: str
    options: tuple[str, ...]  # exactly 4 closed-set, empty open-set
    gold: str
    prediction: str
    context: str = ""

    def __post_init__(self):
        if self.options and len(self.options) != 4:
            raise EvalError(f"closed-set item needs 4 options, "
                            f"got {len(self.options)}")


_LETTERS = "ABCD"
_LEADING_LETTER_RE = re.compile(r"^\s*\(?([A-Da-d])\)?(?:[\s.:,;)\]]|$)")
_PAREN_LETTER_RE = re.compile(r"\(([A-Da-d])\)")


def extract_choice(prediction: str, options: Sequence[str]) -> tuple[int | None, bool]:
    """Map a free-form prediction onto an option index.

    Tried in order: leading option letter, parenthesized letter anywhere,
    unique case-insensitive full-option-text match.  Returns
    (index or None, ambiguous-flag); two option texts matching makes the
    prediction ambiguous and therefore wrong.
    """
    match = _LEADING_LETTER_RE.match(prediction)
    if match:
        return _LETTERS.index(match.group(1).upper()), False
    match = _PAREN_LETTER_RE.search(prediction)
    if match:
        return _LETTERS.index(match.group(1).upper()), False
    lowered = prediction.lower()
    hits = [i for i, opt in enumerate(options) if opt.lower() in lowered]
    if len(hits) == 1:
        return hits[0], False
    return None, len(hits) > 1


def _gold_index(item: VqaItem) -> int:
    if len(item.gold) == 1 and item.gold.upper() in _LETTERS:
        return _LETTERS.index(item.gold.upper())
    for i, opt in enumerate(item.options):
        if opt == item.gold:
            return i
    raise EvalError(f"gold answer {item.gold!r} not among the options")


def closed_vqa_accuracy(items: Sequence[VqaItem]) -> tuple[float, dict]:
    """Fraction of items whose extracted choice equals the gold option."""
    if not items:
        raise EvalError("no VQA items")
    correct = 0
    ambiguous = 0
    unmatched = 0
    for item in items:
        if len(item.options) != 4:
            raise EvalError("closed-set scoring requires 4 options per item")
        gold = _gold_index(item)
        choice, is_ambiguous = extract_choice(item.prediction, item.options)
        if is_ambiguous:
            ambiguous += 1
        elif choice is None:
            unmatched += 1
        elif choice == gold:
            correct += 1
    details = {"total": len(items), "correct": correct,
               "ambiguous": ambiguous, "unmatched": unmatched}
    return correct / len(items), details


def contq_prompt(item: VqaItem) -> str:
    """Caption-as-context prompt: the model's caption precedes the question."""
    if not item.context.strip():
        raise EvalError("Cont.&Q needs a context caption")
    lines = [f"Context: {item.context.strip()}", "", f"Question: {item.question}"]
    if item.options:
        lines.append("Options:")
        lines.extend(f"{_LETTERS[i]}. {opt}" for i, opt in enumerate(item.options))
        lines.append("Answer with the option letter.")
    return "\n".join(lines)


def attribute_accuracy(predicted: Sequence[Iterable[str]],
                       gold: Sequence[Iterable[str]],
                       queried: Sequence[str] | None = None) -> dict:
    """Mean per-(item, attribute) binary accuracy over the queried names.

    Also reports exact-match and macro-F1 since the headline metric is a
    convention choice.
    """
    if len(predicted) != len(gold):
        raise EvalError("predicted and gold lists differ in length")
    if not predicted:
        raise EvalError("no items")
    names = tuple(queried) if queried is not None else ATTRIBUTE_NAMES
    for name in names:
        parse_attribute(name)
    pred_sets = [frozenset(parse_attribute(n) for n in p) for p in predicted]
    gold_sets = [frozenset(parse_attribute(n) for n in g) for g in gold]
    total = 0
    agree = 0
    exact = 0
    tp: Counter = Counter()
    fp: Counter = Counter()
    fn: Counter = Counter()
    for p, g in zip(pred_sets, gold_sets):
        item_ok = True
        for name in names:
            in_p, in_g = name in p, name in g
            total += 1
            if in_p == in_g:
                agree += 1
            else:
                item_ok = False
            if in_p and in_g:
                tp[name] += 1
            elif in_p:
                fp[name] += 1
            elif in_g:
                fn[name] += 1
        exact += item_ok
    f1s = []
    for name in names:
        denom = 2 * tp[name] + fp[name] + fn[name]
        if denom == 0:
            continue  # attribute never predicted nor present
        f1s.append(2 * tp[name] / denom)
    return {
        "accuracy": agree / total,
        "exact_match": exact / len(pred_sets),
        "macro_f1": sum(f1s) / len(f1s) if f1s else 0.0,
        "items": len(pred_sets),
        "queried": len(names),
    }


Box = tuple[float, float, float, float]


def iou(box_a: Box, box_b: Box) -> float:
    """Intersection over union of (x, y, w, h) boxes; 0 when disjoint."""
    ax, ay, aw, ah = box_a
    bx, by, bw, bh = box_b
    if aw < 0 or ah < 0 or bw < 0 or bh < 0:
        raise EvalError("box width/height must be non-negative")
    ix = max(ax, bx)
    iy = max(ay, by)
    ix2 = min(ax + aw, bx + bw)
    iy2 = min(ay + ah, by + bh)
    inter = max(0.0, ix2 - ix) * max(0.0, iy2 - iy)
    union = aw * ah + bw * bh - inter
    if union <= 0:
        return 0.0
    return inter / union


def grounding_accuracy(items: Sequence[tuple[Box, Box | None]],
                       threshold: float = 0.5) -> float:
    """Fraction of items with IoU(gold, pred) >= threshold; a missing
    prediction counts as wrong."""
    if not 0.0 < threshold <= 1.0:
        raise EvalError(f"threshold must lie in (0, 1], got {threshold}")
    if not items:
        raise EvalError("no grounding items")
    hits = 0
    for gold_box, pred_box in items:
        if gold_box[2] <= 0 or gold_box[3] <= 0:
            raise EvalError(f"degenerate gold box {gold_box}")
        if pred_box is None:
            continue
        if iou(gold_box, pred_box) >= threshold:
            hits += 1
    return hits / len(items)


VERDICTS = ("win", "tie", "lose")


def preference_tally(votes: Sequence[tuple[str, str, str]]) -> dict:
    """Tally (item, rater, verdict) votes.

    Proportions are over all votes; each item gets a majority verdict with
    deadlocks reported as "tie".  One verdict per (item, rater).
    """
    if not votes:
        raise EvalError("no votes")
    seen: set[tuple[str, str]] = set()
    counts: Counter = Counter()
    per_item: dict[str, Counter] = defaultdict(Counter)
    for item_id, rater, verdict in votes:
        if verdict not in VERDICTS:
            raise EvalError(f"unknown verdict {verdict!r}")
        key = (item_id, rater)
        if key in seen:
            raise EvalError(f"duplicate vote from rater {rater!r} on "
                            f"item {item_id!r}")
        seen.add(key)
        counts[verdict] += 1
        per_item[item_id][verdict] += 1
    total = len(votes)
    majorities = {}
    for item_id, tally in per_item.items():
        top = max(tally.values())
        leaders = [v for v in VERDICTS if tally[v] == top]
        majorities[item_id] = leaders[0] if len(leaders) == 1 else "tie"
    return {
        "proportions": {v: counts[v] / total for v in VERDICTS},
        "votes": total,
        "majorities": dict(sorted(majorities.items())),
    }


def open_vqa_pairs(items: Sequence[VqaItem]) -> list[tuple[str, str, str]]:
    """Open-set VQA as judged similarity: the question is prepended to both
    texts and the pair is scored with the caption judge."""
    pairs = []
    for i, item in enumerate(items):
        if item.options:
            raise EvalError("open-set items must not carry options")
        pairs.append((
            str(i),
            f"Q: {item.question}\nA: {item.prediction}",
            f"Q: {item.question}\nA: {item.gold}",
        ))
    return pairs
