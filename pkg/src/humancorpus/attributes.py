"""The closed set of 40 facial appearance attributes and their grouping.

Attribute names are fixed strings; anything else is rejected at parse time.
The cluster grouping drives sentence structure during caption synthesis:
one sentence per cluster, attributes alphabetical within a cluster.
"""

from __future__ import annotations

# Fixed enumeration, row-major reading order of the canonical table.
ATTRIBUTE_NAMES: tuple[str, ...] = (
    "5'o Clock Shadow", "Arched Eyebrows", "Attractive", "Black Hair", "Blond Hair",
    "Blurry", "Goatee", "Gray Hair", "Heavy Makeup", "No Beard",
    "Oval Face", "Pale Skin", "Straight Hair", "Wavy Hair", "Wearing Earrings",
    "Bald", "Bangs", "Big Lips", "Bushy Eyebrows", "Chubby",
    "Double Chin", "Male", "Mouth Slightly Open", "Mustache", "Receding Hairline",
    "Rosy Cheeks", "Sideburns", "Wearing Lipstick", "Wearing Necklace", "Wearing Necktie",
    "Bags Under Eyes", "Brown Hair", "High Cheekbones", "Pointy Nose", "Wearing Hat",
    "Big Nose", "Eyeglasses", "Smiling", "Young", "Narrow Eyes",
)

ATTRIBUTE_SET = frozenset(ATTRIBUTE_NAMES)

# Cluster order is fixed so synthesized text is reproducible regardless of
# the order labels arrive in.
ATTRIBUTE_CLUSTERS: tuple[tuple[str, tuple[str, ...]], ...] = (
    ("hair", (
        "Bald", "Bangs", "Black Hair", "Blond Hair", "Brown Hair",
        "Gray Hair", "Receding Hairline", "Straight Hair", "Wavy Hair",
    )),
    ("eyes", (
        "Arched Eyebrows", "Bags Under Eyes", "Bushy Eyebrows", "Narrow Eyes",
    )),
    ("face", (
        "Big Lips", "Big Nose", "Chubby", "Double Chin", "High Cheekbones",
        "Oval Face", "Pale Skin", "Pointy Nose", "Rosy Cheeks",
    )),
    ("facial_hair", (
        "5'o Clock Shadow", "Goatee", "Mustache", "No Beard", "Sideburns",
    )),
    ("accessories", (
        "Eyeglasses", "Wearing Earrings", "Wearing Hat", "Wearing Lipstick",
        "Wearing Necklace", "Wearing Necktie",
    )),
    ("expression", (
        "Attractive", "Blurry", "Heavy Makeup", "Male",
        "Mouth Slightly Open", "Smiling", "Young",
    )),
)

CLUSTER_OF: dict[str, str] = {
    name: cluster for cluster, names in ATTRIBUTE_CLUSTERS for name in names
}


class UnknownAttributeError(ValueError):
    """Raised when a string is not one of the 40 attribute names."""


def parse_attribute(name: str) -> str:
    """Return the canonical attribute name, or raise for anything else."""
    if name not in ATTRIBUTE_SET:
        raise UnknownAttributeError(f"unknown attribute name: {name!r}")
    return name


def attribute_symbol(name: str) -> str:
    """Grammar nonterminal for an attribute (whitespace-free)."""
    parse_attribute(name)
    return "Attr_" + name.replace(" ", "_").replace("'", "")
