"""Self-contained HTML export: one absolutely positioned section per slide."""

import base64
import html
import re

from ..errors import EmptyDeck
from ..notebook import table_text
from ..slides import CANVAS_H, CANVAS_W, GenerationParams, Slide, SlideGeometry

_BOLD_RE = re.compile(r"\*\*(.+?)\*\*")
_ITALIC_RE = re.compile(r"(?<!\*)\*([^*]+)\*(?!\*)")
_CODE_RE = re.compile(r"`([^`]+)`")

_STYLE = """
body { margin: 0; background: #444; font-family: Calibri, 'Segoe UI', sans-serif; }
.slide { position: relative; width: %(w)dpx; height: %(h)dpx; background: #fff;
         margin: 24px auto; overflow: hidden; box-shadow: 0 2px 8px rgba(0,0,0,.4); }
.box { position: absolute; box-sizing: border-box; }
.title { font-size: 40px; font-weight: 600; }
.title.centered { text-align: center; display: flex; align-items: center; justify-content: center; }
.bullets ul { margin: 0; padding-left: 28px; font-size: 24px; }
.chart img { max-width: 100%%; max-height: 100%%; display: block; margin: 0 auto; }
.table table { width: 100%%; border-collapse: collapse; font-size: 16px; }
.table td { border: 1px solid #999; padding: 2px 6px; }
.page { font-size: 16px; text-align: right; color: #666; }
""" % {"w": CANVAS_W, "h": CANVAS_H}

_PRESENT_SCRIPT = """
<script>
(function () {
  var slides = Array.prototype.slice.call(document.querySelectorAll('.slide'));
  var current = 0;
  function fit() {
    var scale = Math.min(window.innerWidth / %(w)d, window.innerHeight / %(h)d);
    slides.forEach(function (s, i) {
      s.style.display = i === current ? 'block' : 'none';
      s.style.transformOrigin = 'top left';
      s.style.transform = 'scale(' + scale + ')';
      s.style.margin = '0';
    });
  }
  function go(delta) {
    current = Math.max(0, Math.min(slides.length - 1, current + delta));
    fit();
  }
  document.addEventListener('keydown', function (e) {
    if (e.key === 'ArrowRight' || e.key === 'PageDown' || e.key === ' ') go(1);
    if (e.key === 'ArrowLeft' || e.key === 'PageUp') go(-1);
  });
  window.addEventListener('resize', fit);
  fit();
})();
</script>
"""


def render_markdown_inline(text: str) -> str:
    """The bullet grammar subset: bold, italic, inline code."""
    out = html.escape(text)
    out = _BOLD_RE.sub(r"<strong>\1</strong>", out)
    out = _ITALIC_RE.sub(r"<em>\1</em>", out)
    out = _CODE_RE.sub(r"<code>\1</code>", out)
    return out


def _box_style(box) -> str:
    return (
        f"left:{box.x:g}px;top:{box.y:g}px;width:{box.w:g}px;height:{box.h:g}px"
    )


def _table_html(markup: str) -> str:
    rows = table_text(markup).splitlines()
    body = "".join(
        "<tr>" + "".join(f"<td>{html.escape(cell)}</td>" for cell in row.split(" | ")) + "</tr>"
        for row in rows
        if row.strip()
    )
    return f"<table>{body}</table>"


def export_html(
    deck: list[Slide],
    geometries: dict[str, SlideGeometry],
    params: GenerationParams,
    present_mode: bool = False,
) -> bytes:
    visible = [s for s in deck if not s.deleted]
    if not visible:
        raise EmptyDeck("no visible slides to export")

    sections = []
    for number, slide in enumerate(visible, start=1):
        geometry = geometries[slide.id]
        boxes = {box.ref: box for box in geometry.boxes}
        parts = []
        title_class = "box title centered" if slide.template == "title" else "box title"
        parts.append(
            f'<div class="{title_class}" style="{_box_style(boxes["title"])}">'
            f"{html.escape(slide.title)}</div>"
        )
        if "bullets" in boxes:
            items = "".join(f"<li>{render_markdown_inline(b.text)}</li>" for b in slide.bullets)
            parts.append(
                f'<div class="box bullets" style="{_box_style(boxes["bullets"])}">'
                f"<ul>{items}</ul></div>"
            )
        for i, item in enumerate(slide.media):
            box = boxes.get(f"media{i}")
            if box is None:
                continue
            if item.kind == "chart":
                data = base64.b64encode(item.payload).decode("ascii")
                parts.append(
                    f'<div class="box chart" style="{_box_style(box)}">'
                    f'<img src="data:image/png;base64,{data}" alt="chart"/></div>'
                )
            else:
                parts.append(
                    f'<div class="box table" style="{_box_style(box)}">'
                    f"{_table_html(str(item.payload))}</div>"
                )
        if params.page_numbers and "page" in boxes:
            parts.append(
                f'<div class="box page" style="{_box_style(boxes["page"])}">{number}</div>'
            )
        sections.append(f'<section class="slide" id="slide{number}">{"".join(parts)}</section>')

    script = _PRESENT_SCRIPT % {"w": CANVAS_W, "h": CANVAS_H} if present_mode else ""
    document = (
        "<!DOCTYPE html>\n"
        '<html><head><meta charset="utf-8"><title>Presentation</title>'
        f"<style>{_STYLE}</style></head>"
        f'<body>{"".join(sections)}{script}</body></html>'
    )
    return document.encode("utf-8")
