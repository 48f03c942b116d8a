"""Outline-unit to notebook-cell retrieval.

The LM path asks for scored cell indices per unit; the offline stand-in is
Okapi BM25 over the cells with raw scores squashed into [0, 1].
"""

import math
import re
from collections import Counter
from dataclasses import dataclass

from . import lm
from .errors import BackendFailure, EmptyQuery, ReplayMiss, TransportFailure, UnparseableResponse
from .notebook import Notebook, prompt_view
from .outline import SUBTOPIC, OutlineTree
from .text import tokenize

MAX_RESULTS = 5
BM25_K1 = 1.2
BM25_B = 0.75

_SCORE_LINE_RE = re.compile(r"^\s*cell\s+(\d+)\s*:\s*([0-9]*\.?[0-9]+)\s*$")

RETRIEVAL_INSTRUCTION = (
    "Given the outline unit below, pick at most 5 of the notebook cells most "
    "semantically relevant to it. Answer with one line per picked cell in the "
    "exact form: cell <index>: <score>, where score is a decimal between 0 and 1."
)


@dataclass(frozen=True)
class OutlineUnit:
    item_id: str
    item_text: str
    context_text: str = ""


@dataclass(frozen=True)
class ScoredCell:
    cell_id: str
    score: float


def flatten_outline(outline: OutlineTree) -> list[OutlineUnit]:
    """One unit per lowest-level item, in outline order; sub-topic units carry
    the parent topic's text as context."""
    units = []
    for item in outline.childless_items():
        context = ""
        if item.level == SUBTOPIC and item.parent:
            context = outline.items[item.parent].text
        units.append(OutlineUnit(item_id=item.id, item_text=item.text, context_text=context))
    return units


def bm25_scores(query_tokens: list[str], docs: list[list[str]]) -> list[float]:
    """Raw Okapi BM25 (k1=1.2, b=0.75) over tokenized documents."""
    n_docs = len(docs)
    if n_docs == 0:
        return []
    avgdl = sum(len(d) for d in docs) / n_docs
    doc_freq: Counter = Counter()
    for doc in docs:
        doc_freq.update(set(doc))
    scores = []
    for doc in docs:
        freqs = Counter(doc)
        norm = BM25_K1 * (1 - BM25_B + BM25_B * len(doc) / avgdl) if avgdl else BM25_K1
        score = 0.0
        for term in query_tokens:
            tf = freqs.get(term, 0)
            if tf == 0:
                continue
            df = doc_freq[term]
            idf = math.log(1 + (n_docs - df + 0.5) / (df + 0.5))
            score += idf * tf * (BM25_K1 + 1) / (tf + norm)
        scores.append(score)
    return scores


def normalize_score(raw: float) -> float:
    """Monotone squash of a non-negative raw score into [0, 1)."""
    return raw / (raw + 1.0)


def lexical_rank(query: str, notebook: Notebook) -> list[ScoredCell]:
    query_tokens = tokenize(query)
    if not query_tokens:
        raise EmptyQuery(f"query has no tokens: {query!r}")
    docs = [tokenize(cell.source) for cell in notebook.cells]
    raw = bm25_scores(query_tokens, docs)
    ranked = sorted(
        (
            ScoredCell(cell_id=cell.id, score=normalize_score(score))
            for cell, score in zip(notebook.cells, raw)
            if score > 0.0
        ),
        key=lambda sc: (-sc.score, notebook.cell_by_id(sc.cell_id).index),
    )
    return ranked


def parse_retrieval_response(response: str, notebook: Notebook) -> list[ScoredCell]:
    by_index = {cell.index: cell.id for cell in notebook.cells}
    scored = []
    for line in response.splitlines():
        if not line.strip():
            continue
        match = _SCORE_LINE_RE.match(line)
        if match is None:
            raise UnparseableResponse(f"bad retrieval line: {line!r}")
        index = int(match.group(1))
        if index not in by_index:
            continue
        score = min(1.0, max(0.0, float(match.group(2))))
        scored.append(ScoredCell(cell_id=by_index[index], score=score))
    return scored


def retrieve_cells(unit: OutlineUnit, notebook: Notebook, config: lm.LmConfig) -> list[ScoredCell]:
    """At most 5 cells, descending by score, ties broken by notebook order;
    zero-score results dropped. An empty result is a valid outcome."""
    if config.backend_kind == "heuristic":
        query = (unit.context_text + " " + unit.item_text).strip()
        try:
            scored = lexical_rank(query, notebook)
        except EmptyQuery:
            return []
    else:
        parts = [(cell.id, prompt_view(cell, 600)) for cell in notebook.cells]
        instruction = (
            f"{RETRIEVAL_INSTRUCTION}\n\nOutline unit: {unit.item_text}\n"
            f"Context: {unit.context_text or '(top level)'}"
        )
        request = lm.fit_to_budget(parts, instruction, config)
        try:
            response = lm.complete(request, config)
        except (TransportFailure, ReplayMiss) as exc:
            raise BackendFailure(str(exc))
        scored = sorted(
            (sc for sc in parse_retrieval_response(response, notebook) if sc.score > 0.0),
            key=lambda sc: (-sc.score, notebook.cell_by_id(sc.cell_id).index),
        )
    return scored[:MAX_RESULTS]
