"""Minimal ECMA-376 .pptx writer.

One slide master, one layout, a compact theme; slide shapes are emitted from
the band geometry. Zip entry timestamps are pinned and part order is fixed so
identical decks export byte-identically.
"""

import io
import struct
import zipfile
from xml.sax.saxutils import escape

from ..errors import EmptyDeck, MediaEncodingFailure
from ..notebook import table_text
from ..slides import GenerationParams, Slide, SlideGeometry

EMU_PER_UNIT = 9525  # 1280x720 abstract units -> 12192000x6858000 EMU
SLIDE_CX = 1280 * EMU_PER_UNIT
SLIDE_CY = 720 * EMU_PER_UNIT

_ZIP_DATE = (1980, 1, 1, 0, 0, 0)

_NS_DECLS = (
    'xmlns:a="http://schemas.openxmlformats.org/drawingml/2006/main" '
    'xmlns:r="http://schemas.openxmlformats.org/officeDocument/2006/relationships" '
    'xmlns:p="http://schemas.openxmlformats.org/presentationml/2006/main"'
)

_THEME_XML = (
    '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
    '<a:theme xmlns:a="http://schemas.openxmlformats.org/drawingml/2006/main" name="Office">'
    "<a:themeElements>"
    '<a:clrScheme name="Office"><a:dk1><a:sysClr val="windowText" lastClr="000000"/></a:dk1>'
    '<a:lt1><a:sysClr val="window" lastClr="FFFFFF"/></a:lt1>'
    '<a:dk2><a:srgbClr val="44546A"/></a:dk2><a:lt2><a:srgbClr val="E7E6E6"/></a:lt2>'
    '<a:accent1><a:srgbClr val="4472C4"/></a:accent1><a:accent2><a:srgbClr val="ED7D31"/></a:accent2>'
    '<a:accent3><a:srgbClr val="A5A5A5"/></a:accent3><a:accent4><a:srgbClr val="FFC000"/></a:accent4>'
    '<a:accent5><a:srgbClr val="5B9BD5"/></a:accent5><a:accent6><a:srgbClr val="70AD47"/></a:accent6>'
    '<a:hlink><a:srgbClr val="0563C1"/></a:hlink><a:folHlink><a:srgbClr val="954F72"/></a:folHlink>'
    "</a:clrScheme>"
    '<a:fontScheme name="Office"><a:majorFont><a:latin typeface="Calibri Light"/>'
    '<a:ea typeface=""/><a:cs typeface=""/></a:majorFont>'
    '<a:minorFont><a:latin typeface="Calibri"/><a:ea typeface=""/><a:cs typeface=""/></a:minorFont>'
    "</a:fontScheme>"
    '<a:fmtScheme name="Office">'
    "<a:fillStyleLst><a:solidFill><a:schemeClr val=\"phClr\"/></a:solidFill>"
    '<a:solidFill><a:schemeClr val="phClr"/></a:solidFill>'
    '<a:solidFill><a:schemeClr val="phClr"/></a:solidFill></a:fillStyleLst>'
    '<a:lnStyleLst><a:ln w="6350"><a:solidFill><a:schemeClr val="phClr"/></a:solidFill></a:ln>'
    '<a:ln w="12700"><a:solidFill><a:schemeClr val="phClr"/></a:solidFill></a:ln>'
    '<a:ln w="19050"><a:solidFill><a:schemeClr val="phClr"/></a:solidFill></a:ln></a:lnStyleLst>'
    "<a:effectStyleLst><a:effectStyle><a:effectLst/></a:effectStyle>"
    "<a:effectStyle><a:effectLst/></a:effectStyle>"
    "<a:effectStyle><a:effectLst/></a:effectStyle></a:effectStyleLst>"
    "<a:bgFillStyleLst><a:solidFill><a:schemeClr val=\"phClr\"/></a:solidFill>"
    '<a:solidFill><a:schemeClr val="phClr"/></a:solidFill>'
    '<a:solidFill><a:schemeClr val="phClr"/></a:solidFill></a:bgFillStyleLst>'
    "</a:fmtScheme></a:themeElements></a:theme>"
)

_SLIDE_MASTER_XML = (
    '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
    f"<p:sldMaster {_NS_DECLS}>"
    "<p:cSld><p:spTree>"
    '<p:nvGrpSpPr><p:cNvPr id="1" name=""/><p:cNvGrpSpPr/><p:nvPr/></p:nvGrpSpPr>'
    "<p:grpSpPr/>"
    "</p:spTree></p:cSld>"
    "<p:clrMap bg1=\"lt1\" tx1=\"dk1\" bg2=\"lt2\" tx2=\"dk2\" accent1=\"accent1\" "
    'accent2="accent2" accent3="accent3" accent4="accent4" accent5="accent5" '
    'accent6="accent6" hlink="hlink" folHlink="folHlink"/>'
    '<p:sldLayoutIdLst><p:sldLayoutId id="2147483649" r:id="rId1"/></p:sldLayoutIdLst>'
    "</p:sldMaster>"
)

_SLIDE_LAYOUT_XML = (
    '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
    f'<p:sldLayout {_NS_DECLS} type="blank">'
    "<p:cSld><p:spTree>"
    '<p:nvGrpSpPr><p:cNvPr id="1" name=""/><p:cNvGrpSpPr/><p:nvPr/></p:nvGrpSpPr>'
    "<p:grpSpPr/>"
    "</p:spTree></p:cSld>"
    "</p:sldLayout>"
)


def _emu(value: float) -> int:
    return round(value * EMU_PER_UNIT)


def _rels(entries: list[tuple[str, str, str]]) -> str:
    body = "".join(
        f'<Relationship Id="{rid}" Type="{rtype}" Target="{target}"/>'
        for rid, rtype, target in entries
    )
    return (
        '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
        '<Relationships xmlns="http://schemas.openxmlformats.org/package/2006/relationships">'
        f"{body}</Relationships>"
    )


_REL_T = "http://schemas.openxmlformats.org/officeDocument/2006/relationships"


def _content_types(n_slides: int) -> str:
    overrides = "".join(
        f'<Override PartName="/ppt/slides/slide{i}.xml" '
        'ContentType="application/vnd.openxmlformats-officedocument.presentationml.slide+xml"/>'
        for i in range(1, n_slides + 1)
    )
    return (
        '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
        '<Types xmlns="http://schemas.openxmlformats.org/package/2006/content-types">'
        '<Default Extension="rels" ContentType="application/vnd.openxmlformats-package.relationships+xml"/>'
        '<Default Extension="xml" ContentType="application/xml"/>'
        '<Default Extension="png" ContentType="image/png"/>'
        '<Override PartName="/ppt/presentation.xml" '
        'ContentType="application/vnd.openxmlformats-officedocument.presentationml.presentation.main+xml"/>'
        '<Override PartName="/ppt/slideMasters/slideMaster1.xml" '
        'ContentType="application/vnd.openxmlformats-officedocument.presentationml.slideMaster+xml"/>'
        '<Override PartName="/ppt/slideLayouts/slideLayout1.xml" '
        'ContentType="application/vnd.openxmlformats-officedocument.presentationml.slideLayout+xml"/>'
        '<Override PartName="/ppt/theme/theme1.xml" '
        'ContentType="application/vnd.openxmlformats-officedocument.theme+xml"/>'
        f"{overrides}</Types>"
    )


def _presentation_xml(n_slides: int) -> str:
    slide_ids = "".join(
        f'<p:sldId id="{255 + i}" r:id="rId{1 + i}"/>' for i in range(1, n_slides + 1)
    )
    return (
        '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
        f"<p:presentation {_NS_DECLS}>"
        '<p:sldMasterIdLst><p:sldMasterId id="2147483648" r:id="rId1"/></p:sldMasterIdLst>'
        f"<p:sldIdLst>{slide_ids}</p:sldIdLst>"
        f'<p:sldSz cx="{SLIDE_CX}" cy="{SLIDE_CY}"/>'
        f'<p:notesSz cx="{SLIDE_CY}" cy="{SLIDE_CX}"/>'
        "</p:presentation>"
    )


def _xfrm(x: float, y: float, w: float, h: float) -> str:
    return (
        f'<a:xfrm><a:off x="{_emu(x)}" y="{_emu(y)}"/>'
        f'<a:ext cx="{_emu(w)}" cy="{_emu(h)}"/></a:xfrm>'
    )


def _textbox(shape_id: int, name: str, box, paragraphs: list[str], font_size: int, center=False) -> str:
    algn = ' algn="ctr"' if center else ""
    paras = "".join(
        f"<a:p><a:pPr{algn}/><a:r><a:rPr lang=\"en-US\" sz=\"{font_size * 100}\" dirty=\"0\"/>"
        f"<a:t>{escape(text)}</a:t></a:r></a:p>"
        for text in paragraphs
    ) or "<a:p/>"
    return (
        f'<p:sp><p:nvSpPr><p:cNvPr id="{shape_id}" name="{escape(name)}"/>'
        '<p:cNvSpPr><a:spLocks noGrp="1"/></p:cNvSpPr><p:nvPr/></p:nvSpPr>'
        f"<p:spPr>{_xfrm(box.x, box.y, box.w, box.h)}"
        '<a:prstGeom prst="rect"><a:avLst/></a:prstGeom></p:spPr>'
        f'<p:txBody><a:bodyPr wrap="square"/><a:lstStyle/>{paras}</p:txBody></p:sp>'
    )


def png_size(payload: bytes) -> tuple[int, int]:
    """Width and height from a PNG IHDR header."""
    if len(payload) < 24 or payload[:8] != b"\x89PNG\r\n\x1a\n":
        raise MediaEncodingFailure("chart payload is not a PNG")
    width, height = struct.unpack(">II", payload[16:24])
    if not width or not height:
        raise MediaEncodingFailure("PNG reports zero dimensions")
    return width, height


def fit_rect(box, aspect: float) -> tuple[float, float, float, float]:
    """Largest aspect-preserving rect centered in a box."""
    w, h = box.w, box.h
    if w / h > aspect:
        w = h * aspect
    else:
        h = w / aspect
    return box.x + (box.w - w) / 2, box.y + (box.h - h) / 2, w, h


def _picture(shape_id: int, rid: str, box, payload: bytes) -> str:
    width, height = png_size(payload)
    x, y, w, h = fit_rect(box, width / height)
    return (
        f'<p:pic><p:nvPicPr><p:cNvPr id="{shape_id}" name="chart{shape_id}"/>'
        '<p:cNvPicPr><a:picLocks noChangeAspect="1"/></p:cNvPicPr><p:nvPr/></p:nvPicPr>'
        f'<p:blipFill><a:blip r:embed="{rid}"/><a:stretch><a:fillRect/></a:stretch></p:blipFill>'
        f"<p:spPr>{_xfrm(x, y, w, h)}"
        '<a:prstGeom prst="rect"><a:avLst/></a:prstGeom></p:spPr></p:pic>'
    )


def _table(shape_id: int, box, markup: str) -> str:
    rows = [line.split(" | ") for line in table_text(markup).splitlines() if line.strip()]
    if not rows:
        rows = [[""]]
    n_cols = max(len(r) for r in rows)
    col_w = _emu(box.w) // n_cols
    row_h = max(1, _emu(box.h) // len(rows))
    grid = "".join(f'<a:gridCol w="{col_w}"/>' for _ in range(n_cols))
    body_rows = []
    for row in rows:
        cells = []
        for col in range(n_cols):
            text = escape(row[col]) if col < len(row) else ""
            cells.append(
                f'<a:tc><a:txBody><a:bodyPr/><a:lstStyle/><a:p><a:r><a:rPr lang="en-US" sz="1200"/>'
                f"<a:t>{text}</a:t></a:r></a:p></a:txBody><a:tcPr/></a:tc>"
            )
        body_rows.append(f'<a:tr h="{row_h}">{"".join(cells)}</a:tr>')
    return (
        f'<p:graphicFrame><p:nvGraphicFramePr><p:cNvPr id="{shape_id}" name="table{shape_id}"/>'
        "<p:cNvGraphicFramePr/><p:nvPr/></p:nvGraphicFramePr>"
        f'<p:xfrm><a:off x="{_emu(box.x)}" y="{_emu(box.y)}"/>'
        f'<a:ext cx="{_emu(box.w)}" cy="{_emu(box.h)}"/></p:xfrm>'
        '<a:graphic><a:graphicData uri="http://schemas.openxmlformats.org/drawingml/2006/table">'
        f'<a:tbl><a:tblPr firstRow="1" bandRow="1"/><a:tblGrid>{grid}</a:tblGrid>'
        f'{"".join(body_rows)}</a:tbl>'
        "</a:graphicData></a:graphic></p:graphicFrame>"
    )


def _slide_xml(
    slide: Slide,
    geometry: SlideGeometry,
    page_number: int | None,
    image_rids: dict[int, str],
) -> str:
    boxes = {box.ref: box for box in geometry.boxes}
    shapes = []
    shape_id = 2
    title_box = boxes["title"]
    centered = slide.template == "title"
    shapes.append(_textbox(shape_id, "Title", title_box, [slide.title], 32, center=centered))
    shape_id += 1
    if "bullets" in boxes:
        shapes.append(
            _textbox(shape_id, "Bullets", boxes["bullets"], [b.text for b in slide.bullets], 18)
        )
        shape_id += 1
    for i, item in enumerate(slide.media):
        box = boxes.get(f"media{i}")
        if box is None:
            continue
        if item.kind == "chart":
            shapes.append(_picture(shape_id, image_rids[i], box, item.payload))
        else:
            shapes.append(_table(shape_id, box, str(item.payload)))
        shape_id += 1
    if page_number is not None and "page" in boxes:
        shapes.append(_textbox(shape_id, "PageNumber", boxes["page"], [str(page_number)], 12))
        shape_id += 1
    return (
        '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
        f"<p:sld {_NS_DECLS}><p:cSld><p:spTree>"
        '<p:nvGrpSpPr><p:cNvPr id="1" name=""/><p:cNvGrpSpPr/><p:nvPr/></p:nvGrpSpPr>'
        "<p:grpSpPr/>"
        f'{"".join(shapes)}'
        "</p:spTree></p:cSld></p:sld>"
    )


def export_pptx(
    deck: list[Slide],
    geometries: dict[str, SlideGeometry],
    params: GenerationParams,
) -> bytes:
    """Serialize visible slides to a .pptx archive (bytes)."""
    visible = [s for s in deck if not s.deleted]
    if not visible:
        raise EmptyDeck("no visible slides to export")

    parts: list[tuple[str, bytes]] = []

    def add(name: str, data: str | bytes) -> None:
        parts.append((name, data.encode("utf-8") if isinstance(data, str) else data))

    add("[Content_Types].xml", _content_types(len(visible)))
    add("_rels/.rels", _rels([
        (
            "rId1",
            f"{_REL_T}/officeDocument",
            "ppt/presentation.xml",
        )
    ]))
    add("ppt/presentation.xml", _presentation_xml(len(visible)))
    pres_rels = [
        ("rId1", f"{_REL_T}/slideMaster", "slideMasters/slideMaster1.xml"),
    ]
    for i in range(1, len(visible) + 1):
        pres_rels.append((f"rId{1 + i}", f"{_REL_T}/slide", f"slides/slide{i}.xml"))
    add("ppt/_rels/presentation.xml.rels", _rels(pres_rels))
    add("ppt/slideMasters/slideMaster1.xml", _SLIDE_MASTER_XML)
    add("ppt/slideMasters/_rels/slideMaster1.xml.rels", _rels([
        ("rId1", f"{_REL_T}/slideLayout", "../slideLayouts/slideLayout1.xml"),
        ("rId2", f"{_REL_T}/theme", "../theme/theme1.xml"),
    ]))
    add("ppt/slideLayouts/slideLayout1.xml", _SLIDE_LAYOUT_XML)
    add("ppt/slideLayouts/_rels/slideLayout1.xml.rels", _rels([
        ("rId1", f"{_REL_T}/slideMaster", "../slideMasters/slideMaster1.xml"),
    ]))
    add("ppt/theme/theme1.xml", _THEME_XML)

    image_count = 0
    for number, slide in enumerate(visible, start=1):
        geometry = geometries[slide.id]
        rels = [("rId1", f"{_REL_T}/slideLayout", "../slideLayouts/slideLayout1.xml")]
        image_rids: dict[int, str] = {}
        for i, item in enumerate(slide.media):
            if item.kind != "chart":
                continue
            image_count += 1
            rid = f"rId{len(rels) + 1}"
            rels.append((rid, f"{_REL_T}/image", f"../media/image{image_count}.png"))
            image_rids[i] = rid
            if not isinstance(item.payload, bytes):
                raise MediaEncodingFailure(f"chart payload on slide {slide.id} is not bytes")
            add(f"ppt/media/image{image_count}.png", item.payload)
        page = number if params.page_numbers else None
        add(f"ppt/slides/slide{number}.xml", _slide_xml(slide, geometry, page, image_rids))
        add(f"ppt/slides/_rels/slide{number}.xml.rels", _rels(rels))

    buffer = io.BytesIO()
    with zipfile.ZipFile(buffer, "w", zipfile.ZIP_DEFLATED) as archive:
        for name, data in parts:
            info = zipfile.ZipInfo(name, date_time=_ZIP_DATE)
            info.compress_type = zipfile.ZIP_DEFLATED
            info.external_attr = 0o600 << 16
            archive.writestr(info, data)
    return buffer.getvalue()
