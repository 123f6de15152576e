"""Tokenization used at ingestion time.

Lower-case, split on whitespace, and peel terminal punctuation off into
separate tokens. Internal apostrophes and hyphens are kept, so
contractions stay single tokens.
"""

from __future__ import annotations

_TERMINAL_PUNCT = frozenset(".,!?;:\"'()[]")


def tokenize(text: str) -> tuple[str, ...]:
    out: list[str] = []
    for raw in text.lower().split():
        trailing: list[str] = []
        while raw and raw[-1] in _TERMINAL_PUNCT:
            trailing.append(raw[-1])
            raw = raw[:-1]
        while raw and raw[0] in _TERMINAL_PUNCT:
            out.append(raw[0])
            raw = raw[1:]
        if raw:
            out.append(raw)
        out.extend(reversed(trailing))
    return tuple(out)
