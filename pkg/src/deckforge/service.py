"""HTTP surface over deck sessions. Every mutating endpoint maps 1:1 to a
SessionStore operation; no business logic lives here."""

import os
from dataclasses import asdict

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import lm, topics
from .errors import (
    DeckforgeError,
    MalformedNotebook,
    MalformedOutline,
    NoCellsSelected,
    UnknownCell,
    UnknownItem,
    UnknownRef,
    UnknownSession,
    UnknownSlide,
)
from .export import export_html, export_pptx
from .outline import OutlineItem, OutlineTree
from .session import SessionStore, card_to_dict, outline_to_dict, slide_to_dict
from .slides import GenerationParams, layout_slide

_NOT_FOUND = (UnknownSession, UnknownItem, UnknownSlide, UnknownCell, UnknownRef)
_BAD_REQUEST = (MalformedNotebook, MalformedOutline, NoCellsSelected)


class OutlineItemBody(BaseModel):
    id: str
    text: str
    level: str
    parent: str | None = None
    order: int = 0


class OutlineBody(BaseModel):
    items: list[OutlineItemBody]


class ParamsBody(BaseModel):
    top_k: int = Field(default=3, ge=1, le=5)
    detail_level: str = "concise"
    page_numbers: bool = False


class RecommendBody(BaseModel):
    item_id: str


class BindBody(BaseModel):
    cell_ids: list[str]
    mode: str = "bind"


class ManualSlideBody(BaseModel):
    cell_ids: list[str]
    insert_after: str | None = None


class EditBody(BaseModel):
    edit: dict


def _session_view(session) -> dict:
    return {
        "session_id": session.session_id,
        "revision": session.revision,
        "outline": outline_to_dict(session.outline),
        "deck": [slide_to_dict(s) for s in session.deck],
        "params": asdict(session.params),
        "warnings": session.warnings,
    }


def create_app(store: SessionStore | None = None) -> FastAPI:
    if store is None:
        data_dir = os.environ.get("DECKFORGE_DATA_DIR")
        config = lm.config_from_env(
            lm.LmConfig(backend_kind=os.environ.get("DECKFORGE_LM_BACKEND", "heuristic"))
        )
        store = SessionStore(data_dir=data_dir, config=config)

    app = FastAPI(title="deckforge")
    app.state.store = store

    @app.exception_handler(DeckforgeError)
    async def _deckforge_error(request: Request, exc: DeckforgeError):
        status = 404 if isinstance(exc, _NOT_FOUND) else 400 if isinstance(exc, _BAD_REQUEST) else 422
        return JSONResponse(status_code=status, content={"error": exc.code, "detail": str(exc)})

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError):
        return JSONResponse(status_code=400, content={"error": "InvalidValue", "detail": str(exc)})

    @app.post("/sessions")
    async def create_session(request: Request):
        body = await request.body()
        session = store.create_session(body)
        return {
            "session_id": session.session_id,
            "revision": session.revision,
            "cards": [card_to_dict(c) for c in session.cards],
        }

    @app.get("/sessions/{session_id}/overview")
    async def overview(session_id: str):
        session = store.get(session_id)
        return {
            "revision": session.revision,
            "cards": [card_to_dict(c) for c in session.cards],
            "keywords": session.keywords,
        }

    @app.get("/sessions/{session_id}")
    async def session_state(session_id: str):
        return _session_view(store.get(session_id))

    @app.put("/sessions/{session_id}/outline")
    async def put_outline(session_id: str, body: OutlineBody):
        tree = OutlineTree()
        for raw in body.items:
            item = OutlineItem(
                id=raw.id, text=raw.text, level=raw.level, parent=raw.parent, order=raw.order
            )
            tree.items[item.id] = item
        diff = store.replace_outline(session_id, tree)
        return {"revision": store.get(session_id).revision, "diff": diff}

    @app.post("/sessions/{session_id}/recommend")
    async def recommend(session_id: str, body: RecommendBody):
        session = store.get(session_id)
        context = topics.recommendation_context(session.outline, body.item_id)
        ranked = topics.recommend_topics(session.candidate_set(), context, session.config)
        return {"topics": ranked}

    @app.post("/sessions/{session_id}/generate")
    async def generate(session_id: str, body: ParamsBody):
        params = GenerationParams(**body.model_dump())
        deck = store.generate_deck(session_id, params)
        session = store.get(session_id)
        return {
            "revision": session.revision,
            "deck": [slide_to_dict(s) for s in deck],
            "warnings": session.warnings,
        }

    @app.post("/sessions/{session_id}/slides/{slide_id}/cells")
    async def bind(session_id: str, slide_id: str, body: BindBody):
        slide = store.bind_cells(session_id, slide_id, body.cell_ids, body.mode)
        return {"revision": store.get(session_id).revision, "slide": slide_to_dict(slide)}

    @app.post("/sessions/{session_id}/slides:manual")
    async def manual_slide(session_id: str, body: ManualSlideBody):
        slide, item = store.add_manual_slide(session_id, body.cell_ids, body.insert_after)
        return {
            "revision": store.get(session_id).revision,
            "slide": slide_to_dict(slide),
            "item": asdict(item),
        }

    @app.patch("/sessions/{session_id}/slides/{slide_id}")
    async def edit_slide(session_id: str, slide_id: str, body: EditBody):
        session = store.apply_slide_edit(session_id, slide_id, body.edit)
        return _session_view(session)

    @app.get("/sessions/{session_id}/linkage")
    async def linkage(session_id: str, ref: str):
        return store.linkage(session_id, ref)

    @app.get("/sessions/{session_id}/export.pptx")
    async def get_pptx(session_id: str):
        session = store.get(session_id)
        visible = session.visible_deck()
        geometries = {s.id: layout_slide(s, session.params) for s in visible}
        data = export_pptx(visible, geometries, session.params)
        return Response(
            content=data,
            media_type="application/vnd.openxmlformats-officedocument.presentationml.presentation",
            headers={"Content-Disposition": 'attachment; filename="deck.pptx"'},
        )

    @app.get("/sessions/{session_id}/export.html")
    async def get_html(session_id: str, present: int = 0):
        session = store.get(session_id)
        visible = session.visible_deck()
        geometries = {s.id: layout_slide(s, session.params) for s in visible}
        data = export_html(visible, geometries, session.params, present_mode=bool(present))
        return Response(content=data, media_type="text/html")

    return app


app = create_app()
