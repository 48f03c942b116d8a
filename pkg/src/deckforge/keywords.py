"""Per-cell keyword extraction for the notebook overview.

The LM path asks for ranked keywords in one budgeted request; the heuristic
path ranks identifier tokens by TF-IDF across the notebook's cells so the
overview works offline and deterministically.
"""

import math
import re
from collections import Counter
from dataclasses import dataclass, field

from . import lm
from .errors import BackendFailure, ReplayMiss, TransportFailure, UnparseableResponse
from .notebook import Notebook, NotebookCell, prompt_view
from .text import tokenize

MAX_KEYWORDS = 5

_LINE_RE = re.compile(r"^\s*cell\s+(\d+)\s*:\s*(.*?)\s*$")
_PLOT_CALL_RE = re.compile(r"\b(?:scatter|plot|hist|bar|boxplot|barh|pie|heatmap)\s*\(")
_STRING_LITERAL_RE = re.compile(r"""['"]([^'"]{1,60})['"]""")

KEYWORD_INSTRUCTION = (
    "Summarize every notebook cell below into at most 5 keywords ranked by how "
    "representative they are of the cell's content. Answer with one line per cell "
    "in the exact form: cell <index>: <keyword>; <keyword>; ..."
)


@dataclass
class KeywordList:
    cell_id: str
    keywords: list[str] = field(default_factory=list)


def _dedup_cap(words: list[str]) -> list[str]:
    seen = set()
    out = []
    for word in words:
        word = word.strip()
        if not word:
            continue
        folded = word.casefold()
        if folded in seen:
            continue
        seen.add(folded)
        out.append(word)
        if len(out) == MAX_KEYWORDS:
            break
    return out


def axis_label_tokens(cell: NotebookCell) -> list[str]:
    """Column names quoted in plotting calls, as extra keyword candidates."""
    if not any(item.kind == "chart" for item in cell.media):
        return []
    tokens = []
    for line in cell.source.splitlines():
        if _PLOT_CALL_RE.search(line):
            for literal in _STRING_LITERAL_RE.findall(line):
                tokens.extend(tokenize(literal))
    return tokens


def heuristic_keywords(notebook: Notebook) -> dict[str, KeywordList]:
    """TF-IDF over the notebook, cell = document; ties broken alphabetically."""
    docs = {cell.id: tokenize(cell.source) + axis_label_tokens(cell) for cell in notebook.cells}
    n_docs = len(docs)
    doc_freq: Counter = Counter()
    for tokens in docs.values():
        doc_freq.update(set(tokens))

    result = {}
    for cell in notebook.cells:
        counts = Counter(docs[cell.id])
        scored = sorted(
            counts.items(),
            key=lambda kv: (-(kv[1] * math.log(n_docs / doc_freq[kv[0]])), kv[0]),
        )
        result[cell.id] = KeywordList(cell.id, _dedup_cap([t for t, _ in scored]))
    return result


def parse_keyword_response(response: str, notebook: Notebook) -> dict[str, KeywordList]:
    by_index = {cell.index: cell.id for cell in notebook.cells}
    result = {cell.id: KeywordList(cell.id) for cell in notebook.cells}
    for line in response.splitlines():
        if not line.strip():
            continue
        match = _LINE_RE.match(line)
        if match is None:
            raise UnparseableResponse(f"bad keyword line: {line!r}")
        index = int(match.group(1))
        if index not in by_index:
            raise UnparseableResponse(f"keyword line for unknown cell index {index}")
        words = [w for w in match.group(2).split(";")]
        cell_id = by_index[index]
        result[cell_id] = KeywordList(cell_id, _dedup_cap(words))
    return result


def extract_keywords(notebook: Notebook, config: lm.LmConfig) -> dict[str, KeywordList]:
    """Map every cell id to its ranked keyword list (length <= 5)."""
    if not notebook.cells:
        return {}
    if config.backend_kind == "heuristic":
        return heuristic_keywords(notebook)
    parts = [(cell.id, prompt_view(cell, 600)) for cell in notebook.cells]
    request = lm.fit_to_budget(parts, KEYWORD_INSTRUCTION, config)
    try:
        response = lm.complete(request, config)
    except (TransportFailure, ReplayMiss) as exc:
        raise BackendFailure(str(exc))
    return parse_keyword_response(response, notebook)
