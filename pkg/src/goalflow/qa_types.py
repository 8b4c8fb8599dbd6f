"""The eight operational metadata object types and their noun lexicon.

Kept in a leaf module because both the question router and the
operational QA translator need it.
"""

from __future__ import annotations

OPERATIONAL_TYPES = (
    "attributes",
    "audiences",
    "dataflows",
    "datasets",
    "destinations",
    "journeys",
    "schemas",
    "sources",
)

# token (singular or plural) -> canonical table name
NOUN_TO_TYPE: dict[str, str] = {}
for _t in OPERATIONAL_TYPES:
    NOUN_TO_TYPE[_t] = _t
    NOUN_TO_TYPE[_t[:-1]] = _t  # journeys -> journey etc. all eight pluralize with s


def detect_object_type(tokens: list[str]) -> str | None:
    """Canonical type for the last type noun in the token list, if any."""
    found: str | None = None
    for token in tokens:
        if token in NOUN_TO_TYPE:
            found = NOUN_TO_TYPE[token]
    return found
