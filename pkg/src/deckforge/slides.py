"""Slide content assembly and the three-band Parallel layout.

Canvas is 1280x720 abstract units; bands are title (y < 120), bullets
(from y = 140), media (remainder), with media boxes arranged left to right.
"""

import re
from collections import Counter
from dataclasses import dataclass, field

from . import lm
from .errors import (
    BackendFailure,
    EmptyCell,
    GeometryViolation,
    Overflow,
    ReplayMiss,
    TransportFailure,
)
from .notebook import MediaItem, Notebook, NotebookCell, prompt_view
from .retrieval import OutlineUnit, ScoredCell
from .text import tokenize

CANVAS_W = 1280
CANVAS_H = 720
MARGIN = 40
TITLE_TOP = 20
TITLE_HEIGHT = 80
BULLET_TOP = 140
BULLET_LINE_HEIGHT = 60
BULLET_BAND_CAP = 300
MEDIA_GAP = 20
MEDIA_MIN_WIDTH = 200
MAX_MEDIA = 5
PAGE_NUM_W = 60
PAGE_NUM_H = 30

CONCISE_WORDS = 15
DETAILED_WORDS = 40

_CALL_RE = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)\s*\(")
_STRING_RE = re.compile(r"""['"]([^'"]{1,60})['"]""")
_PLOT_CALLS = {"plot", "scatter", "hist", "bar", "barh", "boxplot", "pie", "heatmap"}
_TRAIN_CALLS = {"fit", "train"}


@dataclass
class GenerationParams:
    top_k: int = 3
    detail_level: str = "concise"  # concise | detailed
    page_numbers: bool = False

    def __post_init__(self):
        if not 1 <= self.top_k <= 5:
            raise ValueError(f"top_k must be in [1, 5], got {self.top_k}")
        if self.detail_level not in ("concise", "detailed"):
            raise ValueError(f"unknown detail_level {self.detail_level!r}")


@dataclass
class Bullet:
    text: str
    source_cell: str
    relevance: float
    manually_edited: bool = False


@dataclass
class Slide:
    id: str
    title: str
    bullets: list[Bullet] = field(default_factory=list)
    media: list[MediaItem] = field(default_factory=list)
    template: str = "one_column"  # title | one_column | two_column
    deleted: bool = False
    source_unit: str | None = None
    bound_cells: set[str] = field(default_factory=set)
    manual_cells: set[str] = field(default_factory=set)
    box_overrides: dict[str, tuple[float, float, float, float]] = field(default_factory=dict)


@dataclass(frozen=True)
class Box:
    ref: str
    x: float
    y: float
    w: float
    h: float


@dataclass(frozen=True)
class SlideGeometry:
    canvas: tuple[int, int]
    boxes: tuple[Box, ...]


def _word_limit(detail_level: str) -> int:
    return CONCISE_WORDS if detail_level == "concise" else DETAILED_WORDS


def _truncate_words(sentence: str, limit: int) -> str:
    words = sentence.split()
    return " ".join(words[:limit])


def _top_tokens(cell: NotebookCell, count: int = 2) -> list[str]:
    freqs = Counter(tokenize(cell.source))
    ranked = sorted(freqs.items(), key=lambda kv: (-kv[1], kv[0]))
    return [t for t, _ in ranked[:count]]


def heuristic_bullet(cell: NotebookCell) -> str:
    calls = _CALL_RE.findall(cell.source)
    call_counts = Counter(calls)
    ranked_calls = sorted(call_counts.items(), key=lambda kv: (-kv[1], calls.index(kv[0])))
    top_call = ranked_calls[0][0] if ranked_calls else ""

    if top_call.startswith("read_"):
        literals = _STRING_RE.findall(cell.source)
        target = literals[0] if literals else "the dataset"
        return f"Loads data from {target}"
    if top_call in _PLOT_CALLS:
        for line in cell.source.splitlines():
            if top_call + "(" in line.replace(" ", ""):
                literals = _STRING_RE.findall(line)
                if len(literals) >= 2:
                    return f"Plots {literals[0]} against {literals[1]}"
                if literals:
                    return f"Plots {literals[0]}"
        tokens = _top_tokens(cell)
        return "Plots " + " ".join(tokens) if tokens else "Plots the data"
    if top_call in _TRAIN_CALLS or any(c in _TRAIN_CALLS for c in calls):
        tokens = [t for t in _top_tokens(cell, 3) if t not in _TRAIN_CALLS]
        return "Trains a model using " + " ".join(tokens[:2]) if tokens else "Trains a model"
    tokens = _top_tokens(cell)
    if tokens:
        return "Runs " + " ".join(tokens)
    return "Runs this step"


def generate_bullet(cell: NotebookCell, detail_level: str, config: lm.LmConfig) -> str:
    """One-sentence summary of a cell; concise targets 15 words, detailed 40."""
    if not cell.source.strip():
        raise EmptyCell(f"cell {cell.id} has no source")
    limit = _word_limit(detail_level)
    if config.backend_kind in ("remote", "replay"):
        instruction = (
            f"Summarize the notebook cell below into one bullet point: a single "
            f"sentence of at most {limit} words."
        )
        request = lm.fit_to_budget([(cell.id, prompt_view(cell, 2000))], instruction, config)
        try:
            response = lm.complete(request, config)
        except (TransportFailure, ReplayMiss) as exc:
            raise BackendFailure(str(exc))
        for line in response.splitlines():
            if line.strip():
                return line.strip()
        raise BackendFailure("empty bullet response")
    return _truncate_words(heuristic_bullet(cell), limit)


def assemble_slide(
    unit: OutlineUnit,
    scored: list[ScoredCell],
    notebook: Notebook,
    params: GenerationParams,
    config: lm.LmConfig,
    slide_id: str = "",
) -> Slide:
    """Build a slide from the top-K retrieved cells: one bullet per cell in
    descending relevance, media pooled from kept cells in notebook order."""
    kept: list[tuple[NotebookCell, float]] = []
    for sc in scored:
        cell = notebook.cell_by_id(sc.cell_id)
        if cell is None or not cell.source.strip():
            continue
        kept.append((cell, sc.score))
        if len(kept) == params.top_k:
            break

    bullets = [
        Bullet(
            text=generate_bullet(cell, params.detail_level, config),
            source_cell=cell.id,
            relevance=score,
        )
        for cell, score in kept
    ]
    media = []
    for cell, _ in sorted(kept, key=lambda pair: pair[0].index):
        media.extend(cell.media)
    return Slide(
        id=slide_id or f"slide-{unit.item_id}",
        title=unit.item_text,
        bullets=bullets,
        media=media,
        template="two_column" if len(media) >= 2 else "one_column",
        source_unit=unit.item_id,
        bound_cells={cell.id for cell, _ in kept},
    )


def _boxes_overlap(a: Box, b: Box) -> bool:
    overlap_w = min(a.x + a.w, b.x + b.w) - max(a.x, b.x)
    overlap_h = min(a.y + a.h, b.y + b.h) - max(a.y, b.y)
    return overlap_w > 0 and overlap_h > 0


def validate_geometry(boxes: list[Box]) -> None:
    for box in boxes:
        if box.w <= 0 or box.h <= 0:
            raise GeometryViolation(f"box {box.ref} has non-positive size")
        if box.x < 0 or box.y < 0 or box.x + box.w > CANVAS_W or box.y + box.h > CANVAS_H:
            raise GeometryViolation(f"box {box.ref} leaves the canvas")
    for i, a in enumerate(boxes):
        for b in boxes[i + 1 :]:
            if _boxes_overlap(a, b):
                raise GeometryViolation(f"boxes {a.ref} and {b.ref} overlap")


def layout_slide(slide: Slide, params: GenerationParams) -> SlideGeometry:
    """Three vertical bands (title, bullets, media); media boxes equal-width,
    left to right; page number bottom-right when enabled."""
    if slide.deleted:
        raise ValueError(f"slide {slide.id} is deleted")

    boxes: list[Box] = []
    if slide.template == "title":
        boxes.append(Box("title", 140, 260, 1000, 200))
    else:
        boxes.append(Box("title", MARGIN, TITLE_TOP, CANVAS_W - 2 * MARGIN, TITLE_HEIGHT))
        bullet_h = 0
        if slide.bullets:
            bullet_h = min(BULLET_BAND_CAP, BULLET_LINE_HEIGHT * len(slide.bullets))
            boxes.append(Box("bullets", MARGIN, BULLET_TOP, CANVAS_W - 2 * MARGIN, bullet_h))

        n_media = len(slide.media)
        if n_media:
            if n_media > MAX_MEDIA:
                raise Overflow(
                    f"{n_media - MAX_MEDIA} media item(s) beyond the {MAX_MEDIA} that fit "
                    f"at minimum width {MEDIA_MIN_WIDTH}",
                    excess=list(range(MAX_MEDIA, n_media)),
                )
            media_top = BULLET_TOP + bullet_h + MEDIA_GAP if slide.bullets else BULLET_TOP
            media_bottom = CANVAS_H - MARGIN - (10 if params.page_numbers else 0)
            width = (CANVAS_W - MARGIN * (n_media + 1)) / n_media
            for i in range(n_media):
                x = MARGIN + i * (width + MARGIN)
                boxes.append(Box(f"media{i}", x, media_top, width, media_bottom - media_top))

    if params.page_numbers:
        boxes.append(Box("page", 1200, 680, PAGE_NUM_W, PAGE_NUM_H))

    if slide.box_overrides:
        boxes = [
            Box(b.ref, *slide.box_overrides[b.ref]) if b.ref in slide.box_overrides else b
            for b in boxes
        ]
    validate_geometry(boxes)
    return SlideGeometry(canvas=(CANVAS_W, CANVAS_H), boxes=tuple(boxes))
