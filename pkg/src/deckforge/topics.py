"""Topic candidate extraction and on-request outline recommendations."""

import re
from dataclasses import dataclass, field

from . import lm
from .errors import (
    BackendFailure,
    ReplayMiss,
    TransportFailure,
    UnknownItem,
    UnparseableResponse,
)
from .keywords import heuristic_keywords
from .notebook import Notebook, prompt_view
from .outline import SUBTOPIC, TOPIC, OutlineTree
from .text import tokenize

MAX_RECOMMENDATIONS = 10

_CANDIDATE_LINE_RE = re.compile(r"^\s*(topic|sub)\s*:\s*(.+?)\s*$")

CANDIDATE_INSTRUCTION = (
    "Extract presentation topics and relevant sub-topics from the notebook cells "
    "below. Answer with one line per entry: `topic: <title>` for a topic, then "
    "`sub: <title>` lines for its sub-topics."
)

RECOMMEND_INSTRUCTION = (
    "From the candidate topics below, pick the top 10 most relevant to the "
    "current outline context, ranked. Answer with one candidate title per line."
)


@dataclass
class TopicCandidateSet:
    topics: list[tuple[str, list[str]]] = field(default_factory=list)

    def all_titles(self) -> list[str]:
        titles = []
        for title, subs in self.topics:
            titles.append(title)
            titles.extend(subs)
        return titles


@dataclass(frozen=True)
class RecommendationContext:
    items: tuple[str, ...]
    level: str  # topic | subtopic


def _dedup_titles(titles: list[str]) -> list[str]:
    seen = set()
    out = []
    for title in titles:
        title = title.strip()
        if not title:
            continue
        folded = title.casefold()
        if folded in seen:
            continue
        seen.add(folded)
        out.append(title)
    return out


def parse_candidate_response(response: str) -> TopicCandidateSet:
    topics: list[tuple[str, list[str]]] = []
    seen_topics = set()
    for line in response.splitlines():
        if not line.strip():
            continue
        match = _CANDIDATE_LINE_RE.match(line)
        if match is None:
            raise UnparseableResponse(f"bad candidate line: {line!r}")
        kind, title = match.group(1), match.group(2)
        if kind == "topic":
            if title.casefold() in seen_topics:
                continue
            seen_topics.add(title.casefold())
            topics.append((title, []))
        else:
            if not topics:
                # stray sub-topic before any topic: promote it
                topics.append((title, []))
                seen_topics.add(title.casefold())
            else:
                subs = topics[-1][1]
                if title.casefold() not in {s.casefold() for s in subs}:
                    subs.append(title)
    return TopicCandidateSet(topics=topics)


def heuristic_candidates(notebook: Notebook) -> TopicCandidateSet:
    """Cluster cells by their top TF-IDF keyword; titles are title-cased
    keyword bigrams from each cluster's ranked keywords."""
    keyword_map = heuristic_keywords(notebook)
    clusters: dict[str, list[str]] = {}
    for cell in notebook.cells:
        words = keyword_map[cell.id].keywords
        if not words:
            continue
        clusters.setdefault(words[0], []).extend(words)

    topics: list[tuple[str, list[str]]] = []
    seen = set()
    for head in sorted(clusters):
        ranked = clusters[head]
        second = next((w for w in ranked if w != head), None)
        title = f"{head} {second}".title() if second else head.title()
        if title.casefold() in seen:
            continue
        seen.add(title.casefold())
        subs = _dedup_titles([w.title() for w in ranked if w != head])[:3]
        topics.append((title, subs))
    return TopicCandidateSet(topics=topics)


def extract_topic_candidates(notebook: Notebook, config: lm.LmConfig) -> TopicCandidateSet:
    if not notebook.cells:
        return TopicCandidateSet()
    if config.backend_kind == "heuristic":
        return heuristic_candidates(notebook)
    parts = [(cell.id, prompt_view(cell, 600)) for cell in notebook.cells]
    request = lm.fit_to_budget(parts, CANDIDATE_INSTRUCTION, config)
    try:
        response = lm.complete(request, config)
    except (TransportFailure, ReplayMiss) as exc:
        raise BackendFailure(str(exc))
    return parse_candidate_response(response)


def recommendation_context(outline: OutlineTree, target: str) -> RecommendationContext:
    item = outline.get(target)
    if item.level == SUBTOPIC and item.parent:
        parent = outline.items[item.parent]
        items = [parent.text] + [c.text for c in outline.children(parent.id)]
        return RecommendationContext(items=tuple(items), level=SUBTOPIC)
    items = [t.text for t in outline.topics()]
    return RecommendationContext(items=tuple(items), level=TOPIC)


def recommend_topics(
    candidates: TopicCandidateSet,
    context: RecommendationContext,
    config: lm.LmConfig,
    allow_duplicates: bool = False,
) -> list[str]:
    """At most 10 ranked candidate titles; titles already present in the
    context are excluded unless allow_duplicates."""
    pool = _dedup_titles(candidates.all_titles())
    if not allow_duplicates:
        present = {text.casefold() for text in context.items}
        pool = [title for title in pool if title.casefold() not in present]
    if not pool:
        return []

    if config.backend_kind in ("remote", "replay"):
        instruction = (
            f"{RECOMMEND_INSTRUCTION}\n\nOutline context: "
            + "; ".join(context.items)
        )
        parts = [(f"cand{i}", title) for i, title in enumerate(pool)]
        request = lm.fit_to_budget(parts, instruction, config)
        try:
            response = lm.complete(request, config)
        except (TransportFailure, ReplayMiss) as exc:
            raise BackendFailure(str(exc))
        by_fold = {title.casefold(): title for title in pool}
        ranked = []
        for line in response.splitlines():
            title = by_fold.get(line.strip().casefold())
            if title and title not in ranked:
                ranked.append(title)
        return ranked[:MAX_RECOMMENDATIONS]

    context_tokens = set()
    for text in context.items:
        context_tokens.update(tokenize(text))
    scored = sorted(
        pool,
        key=lambda title: (-len(set(tokenize(title)) & context_tokens), title.casefold()),
    )
    return scored[:MAX_RECOMMENDATIONS]
