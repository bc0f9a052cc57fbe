"""Attribute-conditioned caption synthesis and caption merging.

Each of the 40 attributes owns a small set of weighted phrase templates.
Templates become grammar terminals (one nonterminal per attribute), and a
synthesis run expands the nonterminal of every retained attribute exactly
once, grouped into one sentence per attribute cluster.  Output depends only
on (labels, grammar, seed), not on label order or parallelism.

Template slots: ``{S}`` subject pronoun, ``{O}`` object pronoun, ``{P}``
possessive, and ``{verb}`` for a base-form verb conjugated to agree with
the subject ("they have" / "he has").

Phrase table file format, one template per line::

    AttributeName | template text | weight
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .attributes import (
    ATTRIBUTE_CLUSTERS, ATTRIBUTE_NAMES, attribute_symbol, parse_attribute,
)
from .grammar import Derivation, Grammar, GrammarError, Production
from .records import AttributeLabel


class SynthesisError(ValueError):
    pass


@dataclass(frozen=True)
class SubjectForm:
    subject: str
    object: str
    possessive: str
    plural: bool


SUBJECT_FORMS = {
    "he": SubjectForm("he", "him", "his", plural=False),
    "she": SubjectForm("she", "her", "her", plural=False),
    "they": SubjectForm("they", "them", "their", plural=True),
}


def subject_form_for(names: Iterable[str], fallback: str = "they") -> SubjectForm:
    """"Male" among the retained labels selects he/him/his; otherwise the
    configured neutral fallback (default they/them/their)."""
    if fallback not in SUBJECT_FORMS:
        raise SynthesisError(f"unknown fallback pronoun {fallback!r}")
    return SUBJECT_FORMS["he"] if "Male" in set(names) else SUBJECT_FORMS[fallback]


_IRREGULAR_SINGULAR = {"be": "is", "have": "has", "do": "does", "is": "is",
                       "has": "has"}
_IRREGULAR_PLURAL = {"be": "are", "is": "are", "has": "have"}


def conjugate(base: str, form: SubjectForm) -> str:
    if form.plural:
        return _IRREGULAR_PLURAL.get(base, base)
    if base in _IRREGULAR_SINGULAR:
        return _IRREGULAR_SINGULAR[base]
    if base.endswith(("s", "x", "z", "ch", "sh")):
        return base + "es"
    if base.endswith("y") and len(base) > 1 and base[-2] not in "aeiou":
        return base[:-1] + "ies"
    return base + "s"


def realize_template(template: str, form: SubjectForm) -> str:
    """Substitute pronoun and verb slots for one subject form."""
    out: list[str] = []
    rest = template
    while "{" in rest:
        head, _, rest = rest.partition("{")
        out.append(head)
        slot, sep, rest = rest.partition("}")
        if not sep:
            raise SynthesisError(f"unbalanced slot braces in template {template!r}")
        if slot == "S":
            out.append(form.subject)
        elif slot == "O":
            out.append(form.object)
        elif slot == "P":
            out.append(form.possessive)
        else:
            out.append(conjugate(slot, form))
    out.append(rest)
    return "".join(out)


class PhraseTable:
    """AttributeName -> weighted phrase templates."""

    def __init__(self, mapping: dict[str, Sequence[tuple[str, float]]]):
        self.mapping: dict[str, tuple[tuple[str, float], ...]] = {}
        for name, templates in mapping.items():
            parse_attribute(name)
            if not templates:
                raise SynthesisError(f"attribute {name!r} has no templates")
            for text, weight in templates:
                if weight <= 0:
                    raise SynthesisError(
                        f"attribute {name!r}: non-positive weight {weight!r}")
            self.mapping[name] = tuple((t, float(w)) for t, w in templates)

    def missing_attributes(self) -> list[str]:
        return [n for n in ATTRIBUTE_NAMES if n not in self.mapping]

    @classmethod
    def parse(cls, text: str) -> "PhraseTable":
        mapping: dict[str, list[tuple[str, float]]] = {}
        for line_no, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split("|")]
            if len(parts) not in (2, 3):
                raise SynthesisError(
                    f"line {line_no}: expected 'Attribute | template | weight'")
            name, template = parts[0], parts[1]
            weight = 1.0
            if len(parts) == 3:
                try:
                    weight = float(parts[2])
                except ValueError:
                    raise SynthesisError(
                        f"line {line_no}: invalid weight {parts[2]!r}") from None
            mapping.setdefault(name, []).append((template, weight))
        return cls(mapping)

    @classmethod
    def load(cls, path: str | Path) -> "PhraseTable":
        return cls.parse(Path(path).read_text(encoding="utf-8"))


# Default templates.  Clause conventions: lowercase, no internal commas, no
# terminal punctuation; fixed third-person verbs are fine when the clause
# subject is a noun ("a smile lights up ...").
_DEFAULT_PHRASES: dict[str, Sequence[tuple[str, float]]] = {
    "Bald": (("{S} {be} bald", 2.0),
             ("{S} {have} a smooth bald head", 1.0),
             ("{S} {have} no hair on {P} head", 1.0)),
    "Bangs": (("{S} {have} bangs", 2.0),
              ("{P} hair falls in bangs over {P} forehead", 1.0),
              ("{S} {wear} bangs", 1.0)),
    "Black Hair": (("{S} {have} black hair", 2.0),
                   ("{P} hair is black", 2.0),
                   ("{P} hair is a deep black", 1.0)),
    "Blond Hair": (("{S} {have} blond hair", 2.0),
                   ("{P} hair is blond", 2.0),
                   ("{P} hair is a light blond shade", 1.0)),
    "Brown Hair": (("{S} {have} brown hair", 2.0),
                   ("{P} hair is brown", 2.0),
                   ("{P} hair is a warm brown", 1.0)),
    "Gray Hair": (("{S} {have} gray hair", 2.0),
                  ("{P} hair is gray", 2.0),
                  ("{P} hair has turned gray", 1.0)),
    "Receding Hairline": (("{S} {have} a receding hairline", 2.0),
                          ("{P} hairline is receding", 2.0)),
    "Straight Hair": (("{S} {have} straight hair", 2.0),
                      ("{P} hair is straight", 2.0),
                      ("{P} hair hangs straight", 1.0)),
    "Wavy Hair": (("{S} {have} wavy hair", 2.0),
                  ("{P} hair is wavy", 2.0),
                  ("{P} hair falls in waves", 1.0)),
    "Arched Eyebrows": (("{S} {have} arched eyebrows", 2.0),
                        ("{P} eyebrows are arched", 2.0),
                        ("{P} eyebrows form high arches", 1.0)),
    "Bags Under Eyes": (("{S} {have} bags under {P} eyes", 2.0),
                        ("there are bags under {P} eyes", 1.0)),
    "Bushy Eyebrows": (("{S} {have} bushy eyebrows", 2.0),
                       ("{P} eyebrows are bushy", 2.0),
                       ("{P} eyebrows are thick and bushy", 1.0)),
    "Narrow Eyes": (("{S} {have} narrow eyes", 2.0),
                    ("{P} eyes are narrow", 2.0)),
    "Big Lips": (("{S} {have} big lips", 2.0),
                 ("{P} lips are big", 1.0),
                 ("{P} lips are full", 1.0)),
    "Big Nose": (("{S} {have} a big nose", 2.0),
                 ("{P} nose is big", 1.0),
                 ("{P} nose is large", 1.0)),
    "Chubby": (("{S} {have} a chubby face", 2.0),
               ("{P} face is chubby", 1.0),
               ("{P} face looks round and chubby", 1.0)),
    "Double Chin": (("{S} {have} a double chin", 2.0),
                    ("a double chin is visible", 1.0)),
    "High Cheekbones": (("{S} {have} high cheekbones", 2.0),
                        ("{P} cheekbones are high", 2.0)),
    "Oval Face": (("{S} {have} an oval face", 2.0),
                  ("{P} face is oval", 2.0)),
    "Pale Skin": (("{S} {have} pale skin", 2.0),
                  ("{P} skin is pale", 2.0),
                  ("{P} complexion is pale", 1.0)),
    "Pointy Nose": (("{S} {have} a pointy nose", 2.0),
                    ("{P} nose is pointy", 2.0)),
    "Rosy Cheeks": (("{S} {have} rosy cheeks", 2.0),
                    ("{P} cheeks are rosy", 2.0)),
    "5'o Clock Shadow": (("{S} {have} a five o'clock shadow", 2.0),
                         ("a five o'clock shadow covers {P} jaw", 1.0),
                         ("{S} {show} the stubble of a five o'clock shadow", 1.0)),
    "Goatee": (("{S} {have} a goatee", 2.0),
               ("{S} {wear} a goatee", 1.0),
               ("a goatee frames {P} chin", 1.0)),
    "Mustache": (("{S} {have} a mustache", 2.0),
                 ("{S} {wear} a mustache", 1.0),
                 ("a mustache sits above {P} lip", 1.0)),
    "No Beard": (("{S} {have} no beard", 2.0),
                 ("{S} {be} clean-shaven", 2.0)),
    "Sideburns": (("{S} {have} sideburns", 2.0),
                  ("{S} {wear} sideburns", 1.0)),
    "Eyeglasses": (("{S} {wear} eyeglasses", 2.0),
                   ("{S} {have} glasses on", 1.0),
                   ("a pair of glasses rests on {P} nose", 1.0)),
    "Wearing Earrings": (("{S} {wear} earrings", 2.0),
                         ("earrings hang from {P} ears", 1.0)),
    "Wearing Hat": (("{S} {wear} a hat", 2.0),
                    ("a hat sits on {P} head", 1.0)),
    "Wearing Lipstick": (("{S} {wear} lipstick", 2.0),
                         ("{P} lips are painted with lipstick", 1.0)),
    "Wearing Necklace": (("{S} {wear} a necklace", 2.0),
                         ("a necklace hangs around {P} neck", 1.0)),
    "Wearing Necktie": (("{S} {wear} a necktie", 2.0),
                        ("a necktie is knotted at {P} collar", 1.0)),
    "Attractive": (("{S} {have} an attractive look", 2.0),
                   ("{S} {look} attractive", 2.0)),
    "Blurry": (("the photo is slightly blurry", 2.0),
               ("the image appears blurry", 1.0)),
    "Heavy Makeup": (("{S} {wear} heavy makeup", 2.0),
                     ("{P} face is covered in heavy makeup", 1.0)),
    "Male": (("{S} {be} male", 2.0),
             ("{S} {be} a man", 1.0)),
    "Mouth Slightly Open": (("{P} mouth is slightly open", 2.0),
                            ("{S} {hold} {P} mouth slightly open", 1.0)),
    "Smiling": (("{S} {be} smiling", 2.0),
                ("{S} {wear} a smile", 1.0),
                ("a smile lights up {P} face", 1.0)),
    "Young": (("{S} {look} young", 2.0),
              ("{S} {appear} young", 1.0),
              ("{S} {have} a youthful appearance", 1.0)),
}

START_SYMBOL = "START"


def default_phrase_table() -> PhraseTable:
    return PhraseTable(_DEFAULT_PHRASES)


def build_grammar(phrase_table: PhraseTable | None = None,
                  rules: dict[str, Sequence[Production]] | None = None,
                  start: str = START_SYMBOL) -> Grammar:
    """Compile a phrase table (plus optional extra rules) into a grammar.

    Every attribute becomes a nonterminal whose productions are its
    templates; the start symbol expands to any attribute, making all of
    them reachable.  A table not covering all 40 attributes is an error.
    """
    table = phrase_table if phrase_table is not None else default_phrase_table()
    missing = table.missing_attributes()
    if missing:
        raise GrammarError(f"phrase table missing attributes: {missing}")
    productions: dict[str, list[Production]] = {}
    for name, templates in table.mapping.items():
        sym = attribute_symbol(name)
        productions[sym] = [Production((text,), weight)
                            for text, weight in templates]
    productions[start] = [
        Production((attribute_symbol(n),), 1.0) for n in ATTRIBUTE_NAMES
    ]
    if rules:
        for lhs, prods in rules.items():
            productions[lhs] = list(prods)
    return Grammar(productions, start)


def _join_clauses(clauses: Sequence[str]) -> str:
    if len(clauses) == 1:
        body = clauses[0]
    elif len(clauses) == 2:
        body = f"{clauses[0]} and {clauses[1]}"
    else:
        body = ", ".join(clauses[:-1]) + ", and " + clauses[-1]
    return body[0].upper() + body[1:] + "."


def _label_names(labels: Iterable[AttributeLabel | str]) -> list[str]:
    names = []
    for label in labels:
        name = label.name if isinstance(label, AttributeLabel) else label
        names.append(parse_attribute(name))
    return names


def synthesize_with_derivation(labels: Iterable[AttributeLabel | str],
                               grammar: Grammar, seed: int,
                               fallback_pronoun: str = "they",
                               ) -> tuple[str, Derivation]:
    """Raw multi-sentence description plus the grammar derivation taken."""
    names = sorted(set(_label_names(labels)))
    if not names:
        raise SynthesisError("label set must be non-empty")
    uncovered = [n for n in names
                 if attribute_symbol(n) not in grammar.productions]
    if uncovered:
        raise SynthesisError(f"labels not covered by grammar: {uncovered}")
    form = subject_form_for(names, fallback_pronoun)
    rng = random.Random(seed)
    sentences: list[str] = []
    derivation: Derivation = []
    for _, cluster_names in ATTRIBUTE_CLUSTERS:
        present = [n for n in cluster_names if n in names]
        if not present:
            continue
        clauses = []
        for name in sorted(present):
            tokens, deriv = grammar.sample(attribute_symbol(name), rng)
            derivation.extend(deriv)
            clauses.append(realize_template(" ".join(tokens), form))
        sentences.append(_join_clauses(clauses))
    return " ".join(sentences), derivation


def synthesize_raw(labels: Iterable[AttributeLabel | str], grammar: Grammar,
                   seed: int, fallback_pronoun: str = "they") -> str:
    """Deterministic raw text: one sentence per attribute cluster, one
    phrase per retained attribute."""
    text, _ = synthesize_with_derivation(labels, grammar, seed, fallback_pronoun)
    return text


def template_realizations(name: str,
                          table: PhraseTable | None = None) -> list[str]:
    """All pronoun realizations of an attribute's templates (for coverage
    checks against synthesized text)."""
    table = table if table is not None else default_phrase_table()
    out = []
    for text, _ in table.mapping[parse_attribute(name)]:
        for form in SUBJECT_FORMS.values():
            out.append(realize_template(text, form))
    return out


def merge_captions(facial_caption: str, global_caption: str,
                   connective: str = "") -> str:
    """Deterministic merge: global scene first, then the facial description.

    Each segment gets exactly one terminal sentence mark; segments are
    joined by single spaces (plus the optional connective).  The repair is
    idempotent, so re-merging never stacks periods.
    """
    facial = facial_caption.strip()
    global_ = global_caption.strip()
    if not facial or not global_:
        raise SynthesisError("merge requires two non-empty captions")

    def repair(seg: str) -> str:
        seg = seg.rstrip()
        if seg[-1] in "!?":
            return seg
        return seg.rstrip(".") + "."

    parts = [repair(global_)]
    if connective:
        parts.append(connective)
    parts.append(repair(facial))
    return " ".join(parts)
