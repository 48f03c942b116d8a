"""Identifier-aware tokenization shared by keyword extraction and retrieval."""

import keyword
import re

_WORD_RE = re.compile(r"[A-Za-z][A-Za-z0-9]*")
_CAMEL_RE = re.compile(r"(?<=[a-z0-9])(?=[A-Z])|(?<=[A-Z])(?=[A-Z][a-z])")

# Versioned in-repo: changing this list breaks golden keyword tests.
STOPWORDS = frozenset(
    """
    a an the and or not of to in on for with as is are was were be been being
    this that these those it its from by at into over under then else if
    true false none self print import return def class
    """.split()
)

_PYTHON_KEYWORDS = frozenset(keyword.kwlist)


def split_identifier(word: str) -> list[str]:
    """Split snake_case and camelCase identifiers into lowercase pieces."""
    pieces = []
    for chunk in word.split("_"):
        for piece in _CAMEL_RE.split(chunk):
            if piece:
                pieces.append(piece.lower())
    return pieces


def tokenize(text: str) -> list[str]:
    """Lowercased identifier pieces, language keywords and stopwords removed."""
    tokens = []
    for word in _WORD_RE.findall(text):
        for piece in split_identifier(word):
            if len(piece) < 2:
                continue
            if piece in _PYTHON_KEYWORDS or piece in STOPWORDS:
                continue
            tokens.append(piece)
    return tokens
