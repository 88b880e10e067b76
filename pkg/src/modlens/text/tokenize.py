"""Whitespace tokenizer with edge punctuation detached.

Lowercases, splits on Unicode whitespace, and peels punctuation/symbol
runs off token edges into their own tokens. Punctuation *inside* a word
stays put, so obfuscations like "i..n..s..u..l..t" survive as one token.
"""

from __future__ import annotations

import re
import unicodedata

_CHUNK = re.compile(r"\S+")


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch)[0] in ("P", "S")


def tokenize_with_offsets(text: str) -> list[tuple[str, int, int]]:
    """Tokens with [start, end) character offsets into the original text.

    Token strings are lowercased; offsets always index the original
    (uncased) text, so highlight spans can be mapped back exactly.
    """
    out: list[tuple[str, int, int]] = []
    for m in _CHUNK.finditer(text):
        chunk, base = m.group(0), m.start()
        n = len(chunk)
        lead = 0
        while lead < n and _is_punct(chunk[lead]):
            lead += 1
        if lead == n:
            # Chunk is pure punctuation: keep it whole.
            out.append((chunk.lower(), base, base + n))
            continue
        trail = n
        while trail > lead and _is_punct(chunk[trail - 1]):
            trail -= 1
        if lead:
            out.append((chunk[:lead].lower(), base, base + lead))
        out.append((chunk[lead:trail].lower(), base + lead, base + trail))
        if trail < n:
            out.append((chunk[trail:].lower(), base + trail, base + n))
    return out


def tokenize(text: str) -> list[str]:
    """Lowercased tokens; empty text gives an empty list."""
    return [tok for tok, _, _ in tokenize_with_offsets(text)]
