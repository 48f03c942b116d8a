"""Notebook ingestion: nbformat-4 parsing, media extraction, overview cards."""

import base64
import binascii
import json
import math
import re
from dataclasses import dataclass, field

from .errors import MalformedNotebook, MissingKeywords

# content_weight saturates at this many source characters
_WEIGHT_SATURATION_CHARS = 2000

TRUNCATION_MARKER = "…[truncated]"
CHART_MARKER = "<chart>"

_TAG_RE = re.compile(r"<[^>]+>")
_TR_RE = re.compile(r"<tr[^>]*>(.*?)</tr>", re.IGNORECASE | re.DOTALL)
_CELL_TAG_RE = re.compile(r"<t[hd][^>]*>(.*?)</t[hd]>", re.IGNORECASE | re.DOTALL)


@dataclass(frozen=True)
class MediaItem:
    kind: str  # "chart" | "table"
    payload: bytes | str
    origin_cell: str


@dataclass(frozen=True)
class NotebookCell:
    id: str
    index: int
    kind: str  # "code" | "markdown"
    source: str
    media: tuple[MediaItem, ...] = ()
    execution_count: int | None = None


@dataclass(frozen=True)
class Notebook:
    cells: tuple[NotebookCell, ...]

    def __len__(self):
        return len(self.cells)

    def cell_by_id(self, cell_id: str) -> NotebookCell | None:
        for cell in self.cells:
            if cell.id == cell_id:
                return cell
        return None


@dataclass
class OverviewCard:
    cell_id: str
    keywords: list[str] = field(default_factory=list)
    content_weight: float = 0.0
    state: str = "default"  # default | focused | selected


def _join_source(source) -> str:
    if isinstance(source, list):
        return "".join(str(part) for part in source)
    if isinstance(source, str):
        return source
    return str(source)


def _extract_media(cell_id: str, outputs) -> list[MediaItem]:
    media: list[MediaItem] = []
    plain_fallback: list[str] = []
    for output in outputs or []:
        if not isinstance(output, dict):
            continue
        data = output.get("data")
        if not isinstance(data, dict):
            continue
        png = data.get("image/png")
        if png:
            if isinstance(png, list):
                png = "".join(png)
            try:
                payload = base64.b64decode(png, validate=False)
            except (binascii.Error, ValueError) as exc:
                raise MalformedNotebook(f"bad image/png payload in cell {cell_id}: {exc}")
            if payload:
                media.append(MediaItem(kind="chart", payload=payload, origin_cell=cell_id))
            continue
        html = data.get("text/html")
        if html:
            text = _join_source(html)
            if "<table" in text.lower():
                media.append(MediaItem(kind="table", payload=text, origin_cell=cell_id))
            continue
        plain = data.get("text/plain")
        if plain:
            plain_fallback.append(_join_source(plain))
    # text/plain only stands in when the cell produced nothing richer
    if not media and plain_fallback:
        media.append(MediaItem(kind="table", payload=plain_fallback[0], origin_cell=cell_id))
    return media


def parse_notebook(raw: bytes) -> Notebook:
    """Parse an nbformat-4 document into an ordered cell model."""
    try:
        doc = json.loads(raw)
    except (ValueError, UnicodeDecodeError) as exc:
        raise MalformedNotebook(f"not valid JSON: {exc}")
    if not isinstance(doc, dict):
        raise MalformedNotebook("document root is not an object")
    if doc.get("nbformat") != 4:
        raise MalformedNotebook(f"unsupported nbformat major version: {doc.get('nbformat')!r}")
    raw_cells = doc.get("cells")
    if not isinstance(raw_cells, list):
        raise MalformedNotebook("missing cells array")

    cells: list[NotebookCell] = []
    for raw_cell in raw_cells:
        if not isinstance(raw_cell, dict):
            raise MalformedNotebook("cell entry is not an object")
        cell_type = raw_cell.get("cell_type")
        if cell_type not in ("code", "markdown"):
            continue
        index = len(cells)
        cell_id = str(raw_cell.get("id") or f"c{index}")
        source = _join_source(raw_cell.get("source", ""))
        media = _extract_media(cell_id, raw_cell.get("outputs")) if cell_type == "code" else []
        execution_count = raw_cell.get("execution_count")
        if not isinstance(execution_count, int):
            execution_count = None
        cells.append(
            NotebookCell(
                id=cell_id,
                index=index,
                kind=cell_type,
                source=source,
                media=tuple(media),
                execution_count=execution_count,
            )
        )
    return Notebook(cells=tuple(cells))


def content_weight(char_count: int) -> float:
    """Log-scaled weight in [0, 1], saturating at 2000 characters."""
    if char_count <= 0:
        return 0.0
    weight = math.log(1 + char_count) / math.log(1 + _WEIGHT_SATURATION_CHARS)
    return min(1.0, weight)


def build_overview(notebook: Notebook, keywords: dict[str, list[str]]) -> list[OverviewCard]:
    """One card per cell, in notebook order."""
    cards = []
    for cell in notebook.cells:
        if cell.id not in keywords:
            raise MissingKeywords(f"no keywords for cell {cell.id}")
        cards.append(
            OverviewCard(
                cell_id=cell.id,
                keywords=list(keywords[cell.id])[:5],
                content_weight=content_weight(len(cell.source)),
            )
        )
    return cards


def table_text(markup: str) -> str:
    """Flatten a table fragment (HTML or plain text) into plain text rows."""
    rows = []
    for row_match in _TR_RE.finditer(markup):
        cells = [_TAG_RE.sub("", c).strip() for c in _CELL_TAG_RE.findall(row_match.group(1))]
        cells = [c for c in cells if c]
        if cells:
            rows.append(" | ".join(cells))
    if rows:
        return "\n".join(rows)
    return _TAG_RE.sub("", markup).strip()


def prompt_view(cell: NotebookCell, char_budget: int) -> str:
    """Render a cell as prompt text within a character budget.

    The budget covers the source and any appended table text; the `[cell N]`
    prefix, chart markers, and the truncation marker are constant overhead.
    """
    if char_budget < 16:
        raise ValueError(f"char_budget must be >= 16, got {char_budget}")
    source = cell.source
    truncated = False
    if len(source) > char_budget:
        source = source[:char_budget]
        truncated = True
    out = f"[cell {cell.index}] {source}"
    if truncated:
        out += TRUNCATION_MARKER

    remaining = char_budget - len(source)
    for item in cell.media:
        if item.kind == "table" and remaining > 0:
            text = table_text(str(item.payload))
            if text:
                text = text[:remaining]
                remaining -= len(text)
                out += "\n" + text
    for item in cell.media:
        if item.kind == "chart":
            out += "\n" + CHART_MARKER
    return out
