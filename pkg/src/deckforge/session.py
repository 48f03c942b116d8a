"""Live authoring sessions: outline tree, deck, linkage maps, dirty flags.

Mutations are single-writer per session and append to an on-disk event log
(newline-delimited JSON `{revision, op, payload}`) with a full-state snapshot
every 100 events, so a service restart replays state.
"""

import base64
import json
import os
import threading
import uuid
from dataclasses import asdict, dataclass, field

from . import keywords as kw_mod
from . import lm, retrieval, topics
from .errors import (
    BackendFailure,
    DeckforgeError,
    EmptyCell,
    GeometryViolation,
    InvalidRestore,
    MalformedOutline,
    NoCellsSelected,
    UnknownCell,
    UnknownRef,
    UnknownSession,
    UnknownSlide,
)
from .notebook import (
    MediaItem,
    Notebook,
    NotebookCell,
    OverviewCard,
    build_overview,
    parse_notebook,
)
from .outline import SUBTOPIC, TOPIC, OutlineItem, OutlineTree
from .retrieval import OutlineUnit, ScoredCell
from .slides import Bullet, GenerationParams, Slide, generate_bullet, layout_slide

SNAPSHOT_EVERY = 100


# ---------------------------------------------------------------------------
# serialization helpers (event log + snapshots)

def _media_to_dict(item: MediaItem) -> dict:
    if isinstance(item.payload, bytes):
        payload = {"payload_b64": base64.b64encode(item.payload).decode("ascii")}
    else:
        payload = {"payload_text": item.payload}
    return {"kind": item.kind, "origin_cell": item.origin_cell, **payload}


def _media_from_dict(data: dict) -> MediaItem:
    if "payload_b64" in data:
        payload: bytes | str = base64.b64decode(data["payload_b64"])
    else:
        payload = data["payload_text"]
    return MediaItem(kind=data["kind"], payload=payload, origin_cell=data["origin_cell"])


def _notebook_to_dict(notebook: Notebook) -> dict:
    return {
        "cells": [
            {
                "id": c.id,
                "index": c.index,
                "kind": c.kind,
                "source": c.source,
                "media": [_media_to_dict(m) for m in c.media],
                "execution_count": c.execution_count,
            }
            for c in notebook.cells
        ]
    }


def _notebook_from_dict(data: dict) -> Notebook:
    return Notebook(
        cells=tuple(
            NotebookCell(
                id=c["id"],
                index=c["index"],
                kind=c["kind"],
                source=c["source"],
                media=tuple(_media_from_dict(m) for m in c["media"]),
                execution_count=c["execution_count"],
            )
            for c in data["cells"]
        )
    )


def slide_to_dict(slide: Slide) -> dict:
    return {
        "id": slide.id,
        "title": slide.title,
        "bullets": [asdict(b) for b in slide.bullets],
        "media": [_media_to_dict(m) for m in slide.media],
        "template": slide.template,
        "deleted": slide.deleted,
        "source_unit": slide.source_unit,
        "bound_cells": sorted(slide.bound_cells),
        "manual_cells": sorted(slide.manual_cells),
        "box_overrides": {ref: list(box) for ref, box in slide.box_overrides.items()},
    }


def _slide_from_dict(data: dict) -> Slide:
    return Slide(
        id=data["id"],
        title=data["title"],
        bullets=[Bullet(**b) for b in data["bullets"]],
        media=[_media_from_dict(m) for m in data["media"]],
        template=data["template"],
        deleted=data["deleted"],
        source_unit=data["source_unit"],
        bound_cells=set(data["bound_cells"]),
        manual_cells=set(data["manual_cells"]),
        box_overrides={ref: tuple(box) for ref, box in data["box_overrides"].items()},
    )


def outline_to_dict(outline: OutlineTree) -> dict:
    return {"items": [asdict(item) for item in outline.depth_first(include_deleted=True)]}


def outline_from_dict(data: dict) -> OutlineTree:
    tree = OutlineTree()
    for raw in data.get("items", []):
        item = OutlineItem(**raw)
        tree.items[item.id] = item
    tree.validate()
    return tree


def card_to_dict(card: OverviewCard) -> dict:
    return asdict(card)


# ---------------------------------------------------------------------------


@dataclass
class Session:
    session_id: str
    notebook: Notebook
    cards: list[OverviewCard]
    keywords: dict[str, list[str]]
    config: lm.LmConfig
    outline: OutlineTree = field(default_factory=OutlineTree)
    deck: list[Slide] = field(default_factory=list)
    params: GenerationParams = field(default_factory=GenerationParams)
    candidates: topics.TopicCandidateSet | None = None
    revision: int = 0
    warnings: list[dict] = field(default_factory=list)
    lock: threading.RLock = field(default_factory=threading.RLock, repr=False)
    _slide_seq: int = 0

    # -- lookups -----------------------------------------------------------

    def slide_by_id(self, slide_id: str) -> Slide:
        for slide in self.deck:
            if slide.id == slide_id:
                return slide
        raise UnknownSlide(f"no slide {slide_id}")

    def item_for_slide(self, slide_id: str) -> OutlineItem | None:
        for item in self.outline.items.values():
            if item.slide == slide_id:
                return item
        return None

    def visible_deck(self) -> list[Slide]:
        return [s for s in self.deck if not s.deleted]

    def _next_slide_id(self) -> str:
        self._slide_seq += 1
        return f"s{self._slide_seq}"

    # -- fallback-aware backends ------------------------------------------

    def _retrieve(self, unit: OutlineUnit) -> list[ScoredCell]:
        try:
            return retrieval.retrieve_cells(unit, self.notebook, self.config)
        except BackendFailure:
            heuristic = lm.LmConfig(backend_kind="heuristic")
            return retrieval.retrieve_cells(unit, self.notebook, heuristic)

    def _bullet(self, cell: NotebookCell) -> str:
        try:
            return generate_bullet(cell, self.params.detail_level, self.config)
        except BackendFailure:
            heuristic = lm.LmConfig(backend_kind="heuristic")
            return generate_bullet(cell, self.params.detail_level, heuristic)

    def candidate_set(self) -> topics.TopicCandidateSet:
        """Cached per session; recomputed only on notebook replacement."""
        if self.candidates is None:
            try:
                self.candidates = topics.extract_topic_candidates(self.notebook, self.config)
            except BackendFailure:
                heuristic = lm.LmConfig(backend_kind="heuristic")
                self.candidates = topics.extract_topic_candidates(self.notebook, heuristic)
        return self.candidates

    # -- slide (re)assembly ------------------------------------------------

    def _assemble(self, item: OutlineItem, old_slide: Slide | None) -> Slide:
        unit = OutlineUnit(
            item_id=item.id,
            item_text=item.text,
            context_text=(
                self.outline.items[item.parent].text
                if item.level == SUBTOPIC and item.parent
                else ""
            ),
        )
        scored = self._retrieve(unit)
        manual = set(old_slide.manual_cells) if old_slide else set()
        merged = [ScoredCell(cell_id=cid, score=1.0) for cid in sorted(manual)]
        merged.extend(sc for sc in scored if sc.cell_id not in manual)

        slide_id = old_slide.id if old_slide else self._next_slide_id()
        bullets: list[Bullet] = []
        for sc in sorted(
            merged, key=lambda sc: (-sc.score, self.notebook.cell_by_id(sc.cell_id).index)
        ):
            cell = self.notebook.cell_by_id(sc.cell_id)
            if cell is None or not cell.source.strip():
                continue
            bullets.append(Bullet(text=self._bullet(cell), source_cell=cell.id, relevance=sc.score))
            if len(bullets) == self.params.top_k:
                break
        if old_slide:
            preserved = {
                b.source_cell: b for b in old_slide.bullets if b.manually_edited
            }
            bullets = [preserved.get(b.source_cell, b) for b in bullets]

        bound = {b.source_cell for b in bullets}
        media = []
        for cell in self.notebook.cells:
            if cell.id in bound:
                media.extend(cell.media)
        if not bullets and not media:
            template = "one_column"
            self.warnings.append(
                {"code": "EmptyResult", "item_id": item.id, "item_text": item.text}
            )
        else:
            template = "two_column" if len(media) >= 2 else "one_column"
        return Slide(
            id=slide_id,
            title=item.text,
            bullets=bullets,
            media=media,
            template=template,
            source_unit=item.id,
            bound_cells=bound,
            manual_cells=manual & bound,
        )

    def _recompute_media(self, slide: Slide) -> None:
        media = []
        for cell in self.notebook.cells:
            if cell.id in slide.bound_cells:
                media.extend(cell.media)
        slide.media = media
        if slide.template in ("one_column", "two_column"):
            slide.template = "two_column" if len(media) >= 2 else "one_column"


def _outline_diff(old: OutlineTree, new: OutlineTree) -> dict:
    """Classify changes: added / modified / reordered / deleted item ids.
    Reordered items are those off the longest common subsequence of the
    surviving depth-first id sequences, so one move dirties one item."""
    old_ids = set(old.items)
    new_ids = set(new.items)
    added = sorted(new_ids - old_ids)
    deleted = sorted(old_ids - new_ids)
    modified = sorted(
        item_id
        for item_id in old_ids & new_ids
        if (old.items[item_id].text, old.items[item_id].level, old.items[item_id].parent)
        != (new.items[item_id].text, new.items[item_id].level, new.items[item_id].parent)
    )

    old_seq = [i.id for i in old.depth_first(include_deleted=True) if i.id in new_ids]
    new_seq = [i.id for i in new.depth_first(include_deleted=True) if i.id in old_ids]
    stable = _lcs(old_seq, new_seq)
    reordered = sorted(set(new_seq) - stable - set(modified))
    return {"added": added, "modified": modified, "reordered": reordered, "deleted": deleted}


def _lcs(a: list[str], b: list[str]) -> set[str]:
    n, m = len(a), len(b)
    table = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        for j in range(m - 1, -1, -1):
            if a[i] == b[j]:
                table[i][j] = table[i + 1][j + 1] + 1
            else:
                table[i][j] = max(table[i + 1][j], table[i][j + 1])
    out = set()
    i = j = 0
    while i < n and j < m:
        if a[i] == b[j]:
            out.add(a[i])
            i += 1
            j += 1
        elif table[i + 1][j] >= table[i][j + 1]:
            i += 1
        else:
            j += 1
    return out


class SessionStore:
    """Owns all sessions; persists an event log per session when given a
    data directory, replaying logs (snapshot + tail) on restart."""

    def __init__(self, data_dir: str | None = None, config: lm.LmConfig | None = None):
        self.data_dir = data_dir
        self.config = config or lm.LmConfig()
        self.sessions: dict[str, Session] = {}
        if data_dir:
            os.makedirs(data_dir, exist_ok=True)
            self._load_all()

    # -- persistence -------------------------------------------------------

    def _log_path(self, session_id: str) -> str:
        return os.path.join(self.data_dir, f"{session_id}.log")

    def _snapshot_path(self, session_id: str) -> str:
        return os.path.join(self.data_dir, f"{session_id}.snapshot.json")

    def _state_dict(self, session: Session) -> dict:
        return {
            "session_id": session.session_id,
            "notebook": _notebook_to_dict(session.notebook),
            "cards": [card_to_dict(c) for c in session.cards],
            "keywords": session.keywords,
            "outline": outline_to_dict(session.outline),
            "deck": [slide_to_dict(s) for s in session.deck],
            "params": asdict(session.params),
            "revision": session.revision,
            "slide_seq": session._slide_seq,
            "warnings": session.warnings,
        }

    def _session_from_state(self, state: dict) -> Session:
        session = Session(
            session_id=state["session_id"],
            notebook=_notebook_from_dict(state["notebook"]),
            cards=[OverviewCard(**c) for c in state["cards"]],
            keywords=state["keywords"],
            config=self.config,
            outline=outline_from_dict(state["outline"]),
            deck=[_slide_from_dict(s) for s in state["deck"]],
            params=GenerationParams(**state["params"]),
            revision=state["revision"],
            warnings=state.get("warnings", []),
        )
        session._slide_seq = state.get("slide_seq", 0)
        return session

    def _record(self, session: Session, op: str, payload: dict | None = None) -> None:
        if not self.data_dir:
            return
        state = self._state_dict(session)
        event = {"revision": session.revision, "op": op, "payload": payload or {}, "state": state}
        with open(self._log_path(session.session_id), "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event) + "\n")
        if session.revision % SNAPSHOT_EVERY == 0:
            with open(self._snapshot_path(session.session_id), "w", encoding="utf-8") as fh:
                json.dump(state, fh)

    def _load_all(self) -> None:
        for name in os.listdir(self.data_dir):
            if not name.endswith(".log"):
                continue
            session_id = name[: -len(".log")]
            state = None
            snap = self._snapshot_path(session_id)
            if os.path.exists(snap):
                with open(snap, encoding="utf-8") as fh:
                    state = json.load(fh)
            with open(self._log_path(session_id), encoding="utf-8") as fh:
                for line in fh:
                    if not line.strip():
                        continue
                    event = json.loads(line)
                    if state is None or event["revision"] > state["revision"]:
                        state = event["state"]
            if state:
                self.sessions[session_id] = self._session_from_state(state)

    # -- operations --------------------------------------------------------

    def get(self, session_id: str) -> Session:
        session = self.sessions.get(session_id)
        if session is None:
            raise UnknownSession(f"no session {session_id}")
        return session

    def create_session(self, notebook_bytes: bytes) -> Session:
        notebook = parse_notebook(notebook_bytes)
        # heuristic keywords immediately; refresh_keywords() may replace them
        # with LM output later without blocking session creation
        keyword_lists = kw_mod.heuristic_keywords(notebook)
        keywords = {cid: kl.keywords for cid, kl in keyword_lists.items()}
        cards = build_overview(notebook, keywords)
        session = Session(
            session_id=uuid.uuid4().hex,
            notebook=notebook,
            cards=cards,
            keywords=keywords,
            config=self.config,
        )
        session.revision = 1
        self.sessions[session.session_id] = session
        self._record(session, "create", {"cells": len(notebook.cells)})
        return session

    def replace_outline(self, session_id: str, new_outline: OutlineTree) -> dict:
        session = self.get(session_id)
        with session.lock:
            new_outline.validate()
            diff = _outline_diff(session.outline, new_outline)

            merged = new_outline.copy()
            for item in merged.items.values():
                old = session.outline.items.get(item.id)
                # linkage and prior dirty flags survive an outline replacement
                if old is not None:
                    item.slide = old.slide
                    item.dirty = old.dirty or item.dirty
                    item.deleted = old.deleted
                if item.id in diff["added"] or item.id in diff["modified"] or item.id in diff["reordered"]:
                    item.dirty = True
            merged.renumber()
            session.outline = merged

            # drop slides of removed items; propagate renames to titles
            live_slide_ids = {i.slide for i in session.outline.items.values() if i.slide}
            session.deck = [
                s
                for s in session.deck
                if s.source_unit is None or s.id in live_slide_ids
            ]
            for item in session.outline.items.values():
                if item.slide:
                    try:
                        slide = session.slide_by_id(item.slide)
                    except UnknownSlide:
                        item.slide = None
                        continue
                    if slide.title != item.text:
                        slide.title = item.text
            self._order_deck(session)

            session.revision += 1
            diff["dirty"] = sorted(
                i.id for i in session.outline.items.values() if i.dirty
            )
            self._record(session, "replace_outline", diff)
            return diff

    def _order_deck(self, session: Session) -> None:
        """Deck order follows outline childless-item order; slides without a
        surviving item keep their relative position at the end."""
        by_id = {s.id: s for s in session.deck}
        ordered = []
        for item in session.outline.childless_items(include_deleted=True):
            if item.slide and item.slide in by_id:
                ordered.append(by_id.pop(item.slide))
        ordered.extend(by_id.values())
        session.deck = ordered

    def generate_deck(self, session_id: str, params: GenerationParams | None = None) -> list[Slide]:
        session = self.get(session_id)
        with session.lock:
            if params is not None:
                session.params = params
            session.warnings = []
            new_deck: list[Slide] = []
            for item in session.outline.childless_items(include_deleted=True):
                old_slide = None
                if item.slide:
                    try:
                        old_slide = session.slide_by_id(item.slide)
                    except UnknownSlide:
                        old_slide = None
                if item.deleted and old_slide is not None:
                    new_deck.append(old_slide)
                    continue
                if old_slide is not None and old_slide.source_unit is None:
                    # manual slide: never regenerated from retrieval
                    new_deck.append(old_slide)
                    continue
                if old_slide is not None and not item.dirty:
                    new_deck.append(old_slide)
                    continue
                slide = session._assemble(item, old_slide)
                item.slide = slide.id
                new_deck.append(slide)
            for item in session.outline.items.values():
                item.dirty = False
            session.deck = new_deck
            session.revision += 1
            self._record(session, "generate", {"params": asdict(session.params)})
            return session.visible_deck()

    def bind_cells(self, session_id: str, slide_id: str, cell_ids: list[str], mode: str) -> Slide:
        session = self.get(session_id)
        with session.lock:
            if mode not in ("bind", "unbind"):
                raise ValueError(f"unknown bind mode {mode!r}")
            slide = session.slide_by_id(slide_id)
            cells = []
            for cell_id in cell_ids:
                cell = session.notebook.cell_by_id(cell_id)
                if cell is None:
                    raise UnknownCell(f"no cell {cell_id}")
                cells.append(cell)

            if mode == "bind":
                newly_bound = [c for c in cells if c.id not in slide.bound_cells]
                for cell in newly_bound:
                    slide.bound_cells.add(cell.id)
                    slide.manual_cells.add(cell.id)
                    if cell.source.strip():
                        slide.bullets.append(
                            Bullet(
                                text=session._bullet(cell),
                                source_cell=cell.id,
                                relevance=1.0,
                            )
                        )
                if newly_bound:
                    item = session.item_for_slide(slide_id)
                    if item is not None:
                        item.dirty = True
            else:
                removed = {c.id for c in cells}
                slide.bound_cells -= removed
                slide.manual_cells -= removed
                slide.bullets = [b for b in slide.bullets if b.source_cell not in removed]
            session._recompute_media(slide)
            session.revision += 1
            self._record(
                session, "bind_cells", {"slide": slide_id, "cells": cell_ids, "mode": mode}
            )
            return slide

    def add_manual_slide(
        self, session_id: str, cell_ids: list[str], insert_after: str | None = None
    ) -> tuple[Slide, OutlineItem]:
        session = self.get(session_id)
        with session.lock:
            if not cell_ids:
                raise NoCellsSelected("select at least one cell")
            cells = []
            for cell_id in cell_ids:
                cell = session.notebook.cell_by_id(cell_id)
                if cell is None:
                    raise UnknownCell(f"no cell {cell_id}")
                cells.append(cell)
            cells.sort(key=lambda c: c.index)

            title = self._manual_title(session, cells[0])
            slide_id = session._next_slide_id()
            bullets = [
                Bullet(text=session._bullet(c), source_cell=c.id, relevance=1.0)
                for c in cells
                if c.source.strip()
            ]
            media = []
            for cell in cells:
                media.extend(cell.media)
            slide = Slide(
                id=slide_id,
                title=title,
                bullets=bullets,
                media=media,
                template="two_column" if len(media) >= 2 else "one_column",
                source_unit=None,
                bound_cells={c.id for c in cells},
                manual_cells={c.id for c in cells},
            )

            item = OutlineItem(
                id=f"manual-{slide_id}",
                text=title,
                level=TOPIC,
                order=len(session.outline.topics(include_deleted=True)),
                slide=slide_id,
            )
            session.outline.items[item.id] = item
            if insert_after is not None:
                anchor = session.item_for_slide(insert_after)
                if anchor is not None:
                    anchor_topic = anchor if anchor.level == TOPIC else session.outline.items[anchor.parent]
                    for topic in session.outline.topics(include_deleted=True):
                        if topic.order > anchor_topic.order and topic.id != item.id:
                            topic.order += 1
                    item.order = anchor_topic.order + 1
            session.outline.renumber()

            deck_pos = len(session.deck)
            if insert_after is not None:
                for pos, existing in enumerate(session.deck):
                    if existing.id == insert_after:
                        deck_pos = pos + 1
                        break
            session.deck.insert(deck_pos, slide)
            self._order_deck(session)
            session.revision += 1
            self._record(
                session,
                "add_manual_slide",
                {"slide": slide_id, "cells": cell_ids, "insert_after": insert_after},
            )
            return slide, item

    def _manual_title(self, session: Session, first_cell: NotebookCell) -> str:
        if session.config.backend_kind in ("remote", "replay"):
            try:
                request = lm.fit_to_budget(
                    [(first_cell.id, first_cell.source)],
                    "Give a short presentation slide title (at most 6 words) for the "
                    "notebook cell below. Answer with the title only.",
                    session.config,
                )
                response = lm.complete(request, session.config)
                for line in response.splitlines():
                    if line.strip():
                        return line.strip()
            except DeckforgeError:
                pass
        words = session.keywords.get(first_cell.id) or []
        return words[0].title() if words else "Untitled"

    def apply_slide_edit(self, session_id: str, slide_id: str, edit: dict) -> Session:
        session = self.get(session_id)
        with session.lock:
            slide = session.slide_by_id(slide_id)
            kind = edit.get("kind")
            item = session.item_for_slide(slide_id)

            if kind == "rename":
                slide.title = edit["title"]
                if item is not None:
                    item.text = edit["title"]
                    item.dirty = True
            elif kind == "edit_bullet":
                index = edit["index"]
                if not 0 <= index < len(slide.bullets):
                    raise UnknownRef(f"no bullet {index} on slide {slide_id}")
                slide.bullets[index].text = edit["text"]
                slide.bullets[index].manually_edited = True
            elif kind == "reorder":
                self._reorder(session, slide, edit["to_index"])
                if item is not None:
                    item.dirty = True
            elif kind == "delete":
                if slide.deleted:
                    raise InvalidRestore(f"slide {slide_id} already deleted")
                slide.deleted = True
                if item is not None:
                    item.deleted = True
            elif kind == "restore":
                if not slide.deleted:
                    raise InvalidRestore(f"slide {slide_id} is not deleted")
                slide.deleted = False
                if item is not None:
                    item.deleted = False
            elif kind == "set_template":
                template = edit["template"]
                if template not in ("title", "one_column", "two_column"):
                    raise ValueError(f"unknown template {template!r}")
                slide.template = template
            elif kind == "move_box":
                ref = edit["ref"]
                previous = dict(slide.box_overrides)
                slide.box_overrides[ref] = (
                    float(edit["x"]),
                    float(edit["y"]),
                    float(edit["w"]),
                    float(edit["h"]),
                )
                try:
                    layout_slide(slide, session.params)
                except GeometryViolation:
                    slide.box_overrides = previous
                    raise
            else:
                raise ValueError(f"unknown edit kind {kind!r}")

            session.revision += 1
            self._record(session, "apply_slide_edit", {"slide": slide_id, "edit": kind})
            return session

    def _reorder(self, session: Session, slide: Slide, to_index: int) -> None:
        """Move a slide within the visible deck; the outline childless-item
        sequence permutes identically, the moved item adopting the parent of
        its new predecessor (or successor when moved to the front)."""
        item = session.item_for_slide(slide.id)
        if item is None:
            # manual slide unlinked from the outline: move in the deck only
            visible = session.visible_deck()
            visible.remove(slide)
            to_index = max(0, min(to_index, len(visible)))
            visible.insert(to_index, slide)
            hidden = [s for s in session.deck if s.deleted]
            session.deck = visible + hidden
            return

        seq = session.outline.childless_items()
        seq = [i for i in seq if i.id != item.id]
        to_index = max(0, min(to_index, len(seq)))
        seq.insert(to_index, item)

        prev_item = seq[to_index - 1] if to_index > 0 else None
        next_item = seq[to_index + 1] if to_index + 1 < len(seq) else None
        anchor = prev_item if prev_item is not None else next_item
        new_parent = anchor.parent if anchor is not None else None
        item.parent = new_parent
        item.level = SUBTOPIC if new_parent else TOPIC

        # rebuild topic / sibling orders from the new sequence
        topic_order: list[str] = []
        child_orders: dict[str, list[str]] = {}
        for entry in seq:
            if entry.parent is None:
                if entry.id not in topic_order:
                    topic_order.append(entry.id)
            else:
                if entry.parent not in topic_order:
                    topic_order.append(entry.parent)
                child_orders.setdefault(entry.parent, []).append(entry.id)
        # topics hidden from the childless sequence (deleted or with only
        # deleted children) keep their relative position at the end
        for topic in session.outline.topics(include_deleted=True):
            if topic.id not in topic_order:
                topic_order.append(topic.id)
        for order, topic_id in enumerate(topic_order):
            session.outline.items[topic_id].order = order
        for topic_id, child_ids in child_orders.items():
            for order, child_id in enumerate(child_ids):
                session.outline.items[child_id].order = order
            # hidden siblings follow the visible ones, keeping relative order
            hidden = [
                c
                for c in session.outline.children(topic_id, include_deleted=True)
                if c.id not in child_ids
            ]
            for offset, child in enumerate(hidden):
                child.order = len(child_ids) + offset
        session.outline.renumber()
        self._order_deck(session)

    def linkage(self, session_id: str, ref: str) -> dict:
        session = self.get(session_id)
        with session.lock:
            item = session.outline.items.get(ref)
            slide = None
            if item is None:
                try:
                    slide = session.slide_by_id(ref)
                    item = session.item_for_slide(ref)
                except UnknownSlide:
                    slide = None
            if item is None and slide is None:
                cell = session.notebook.cell_by_id(ref)
                if cell is None:
                    raise UnknownRef(f"{ref} is not an item, slide, or cell id")
                for candidate in session.deck:
                    if ref in candidate.bound_cells and not candidate.deleted:
                        slide = candidate
                        item = session.item_for_slide(candidate.id)
                        break
                if slide is None:
                    return {
                        "item_id": None,
                        "item_text": None,
                        "slide_id": None,
                        "cells": [],
                        "scroll_cell_index": None,
                    }
            if slide is None and item is not None and item.slide:
                try:
                    slide = session.slide_by_id(item.slide)
                except UnknownSlide:
                    slide = None

            cells = []
            if slide is not None:
                relevance = {b.source_cell: b.relevance for b in slide.bullets}
                for cell in session.notebook.cells:
                    if cell.id in slide.bound_cells:
                        cells.append(
                            {
                                "cell_id": cell.id,
                                "index": cell.index,
                                "score": relevance.get(cell.id, 1.0),
                            }
                        )
            return {
                "item_id": item.id if item else None,
                "item_text": item.text if item else None,
                "slide_id": slide.id if slide else None,
                "cells": cells,
                "scroll_cell_index": cells[0]["index"] if cells else None,
            }
