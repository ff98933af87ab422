"""Shared tokenization for indexes, stub gateways, and judges."""

from __future__ import annotations

import re

_WORD = re.compile(r"\w+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercased word tokens; every non-alphanumeric run is a separator."""
    return _WORD.findall(text.lower())
