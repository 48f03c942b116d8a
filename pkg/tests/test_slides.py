import json

import pytest
from hypothesis import given, settings, strategies as st

from deckforge import lm
from deckforge.errors import EmptyCell, GeometryViolation, Overflow
from deckforge.notebook import MediaItem, NotebookCell, parse_notebook
from deckforge.retrieval import OutlineUnit, ScoredCell
from deckforge.slides import (
    CANVAS_H,
    CANVAS_W,
    Bullet,
    GenerationParams,
    Slide,
    assemble_slide,
    generate_bullet,
    heuristic_bullet,
    layout_slide,
)

HEURISTIC = lm.LmConfig(backend_kind="heuristic")


def make_nb(entries):
    cells = []
    for entry in entries:
        source, outputs = entry if isinstance(entry, tuple) else (entry, [])
        cells.append({"cell_type": "code", "source": source, "outputs": outputs})
    return parse_notebook(json.dumps({"cells": cells, "nbformat": 4}).encode())


def chart(cell_id="c0"):
    return MediaItem(kind="chart", payload=b"\x89PNG", origin_cell=cell_id)


class TestParams:
    @pytest.mark.parametrize("bad_k", [0, 6, 9])
    def test_top_k_range(self, bad_k):
        with pytest.raises(ValueError):
            GenerationParams(top_k=bad_k)

    def test_detail_level_values(self):
        with pytest.raises(ValueError):
            GenerationParams(detail_level="medium")


class TestGenerateBullet:
    def test_empty_cell_rejected(self):
        cell = NotebookCell(id="c0", index=0, kind="code", source="   ")
        with pytest.raises(EmptyCell):
            generate_bullet(cell, "concise", HEURISTIC)

    def test_read_csv_template(self):
        cell = NotebookCell(
            id="c0", index=0, kind="code", source="df = pd.read_csv('train.csv')"
        )
        out = generate_bullet(cell, "concise", HEURISTIC)
        assert out.startswith("Loads data from")

    def test_scatter_template_uses_columns(self):
        cell = NotebookCell(
            id="c0",
            index=0,
            kind="code",
            source="plt.scatter(train['LotFrontage'], train['SalePrice'])",
        )
        out = generate_bullet(cell, "concise", HEURISTIC)
        assert "LotFrontage" in out and "SalePrice" in out
        assert out.startswith("Plots")

    def test_train_template(self):
        cell = NotebookCell(id="c0", index=0, kind="code", source="model.fit(X_train, y_train)")
        assert generate_bullet(cell, "concise", HEURISTIC).startswith("Trains")

    def test_concise_word_cap(self):
        source = "\n".join(f"step_{i} = compute_{i}(value_{i})" for i in range(30))
        cell = NotebookCell(id="c0", index=0, kind="code", source=source)
        out = generate_bullet(cell, "concise", HEURISTIC)
        assert len(out.split()) <= 15

    def test_detailed_word_cap(self):
        cell = NotebookCell(id="c0", index=0, kind="code", source="a_thing = other_thing")
        out = generate_bullet(cell, "detailed", HEURISTIC)
        assert len(out.split()) <= 40

    def test_replay_fixture_bullet(self, house_notebook, replay_config):
        from conftest import SCATTER_BULLET, SCATTER_CELL_ID

        cell = house_notebook.cell_by_id(SCATTER_CELL_ID)
        assert generate_bullet(cell, "concise", replay_config) == SCATTER_BULLET


class TestAssembleSlide:
    def unit(self):
        return OutlineUnit(item_id="u1", item_text="Removing Outliers", context_text="")

    def test_top_k_caps_bullets(self):
        nb = make_nb([f"var_{i} = fn_{i}()" for i in range(5)])
        scored = [ScoredCell(cell_id=c.id, score=0.9 - 0.1 * i) for i, c in enumerate(nb.cells)]
        slide = assemble_slide(self.unit(), scored, nb, GenerationParams(top_k=2), HEURISTIC)
        assert len(slide.bullets) == 2

    def test_empty_scored_gives_title_only(self):
        nb = make_nb(["x = 1"])
        slide = assemble_slide(self.unit(), [], nb, GenerationParams(), HEURISTIC)
        assert slide.title == "Removing Outliers"
        assert slide.bullets == [] and slide.media == []

    def test_bullets_in_relevance_order_not_notebook_order(self):
        nb = make_nb(["early_cell = 1", "late_cell = 2"])
        scored = [
            ScoredCell(cell_id=nb.cells[1].id, score=0.9),
            ScoredCell(cell_id=nb.cells[0].id, score=0.4),
        ]
        slide = assemble_slide(self.unit(), scored, nb, GenerationParams(top_k=2), HEURISTIC)
        assert [b.relevance for b in slide.bullets] == [0.9, 0.4]
        assert slide.bullets[0].source_cell == nb.cells[1].id

    def test_title_equals_unit_text(self):
        nb = make_nb(["x = 1"])
        scored = [ScoredCell(cell_id=nb.cells[0].id, score=0.5)]
        slide = assemble_slide(self.unit(), scored, nb, GenerationParams(), HEURISTIC)
        assert slide.title == self.unit().item_text

    def test_two_media_switch_to_two_column(self, house_notebook):
        charts = [c for c in house_notebook.cells if c.media]
        scored = [ScoredCell(cell_id=c.id, score=0.8) for c in charts[:2]]
        slide = assemble_slide(
            self.unit(), scored, house_notebook, GenerationParams(top_k=2), HEURISTIC
        )
        assert len(slide.media) == 2
        assert slide.template == "two_column"


def overlap_area(a, b):
    w = min(a.x + a.w, b.x + b.w) - max(a.x, b.x)
    h = min(a.y + a.h, b.y + b.h) - max(a.y, b.y)
    return max(0, w) * max(0, h)


def assert_sound(geometry):
    for box in geometry.boxes:
        assert box.x >= 0 and box.y >= 0
        assert box.x + box.w <= CANVAS_W and box.y + box.h <= CANVAS_H
    for i, a in enumerate(geometry.boxes):
        for b in geometry.boxes[i + 1 :]:
            assert overlap_area(a, b) == 0


def slide_with(n_bullets=0, n_media=0, template="one_column"):
    return Slide(
        id="s1",
        title="T",
        bullets=[Bullet(text=f"b{i}", source_cell=f"c{i}", relevance=0.5) for i in range(n_bullets)],
        media=[chart(f"c{i}") for i in range(n_media)],
        template=template,
    )


class TestLayout:
    def test_no_media_no_media_boxes(self):
        geometry = layout_slide(slide_with(n_bullets=3), GenerationParams())
        refs = [b.ref for b in geometry.boxes]
        assert refs == ["title", "bullets"]
        assert_sound(geometry)

    def test_two_charts_get_580_wide_boxes(self):
        geometry = layout_slide(slide_with(n_bullets=1, n_media=2), GenerationParams())
        media_boxes = [b for b in geometry.boxes if b.ref.startswith("media")]
        assert [b.w for b in media_boxes] == [580, 580]
        assert media_boxes[0].x < media_boxes[1].x
        assert_sound(geometry)

    def test_title_band_bounds(self):
        geometry = layout_slide(slide_with(), GenerationParams())
        title = geometry.boxes[0]
        assert title.y >= 0 and title.y + title.h < 120

    def test_bullet_band_height_capped(self):
        geometry = layout_slide(slide_with(n_bullets=5), GenerationParams())
        bullets = next(b for b in geometry.boxes if b.ref == "bullets")
        assert bullets.y == 140
        assert bullets.h == 300

    def test_page_number_box(self):
        geometry = layout_slide(slide_with(n_bullets=1), GenerationParams(page_numbers=True))
        page = next(b for b in geometry.boxes if b.ref == "page")
        assert (page.w, page.h) == (60, 30)
        assert page.x + page.w <= CANVAS_W and page.y + page.h <= CANVAS_H
        assert_sound(geometry)

    def test_media_overflow_is_error(self):
        with pytest.raises(Overflow) as excinfo:
            layout_slide(slide_with(n_media=6), GenerationParams())
        assert excinfo.value.excess  # names the items that do not fit

    def test_five_media_fit_at_min_width(self):
        geometry = layout_slide(slide_with(n_media=5), GenerationParams())
        media_boxes = [b for b in geometry.boxes if b.ref.startswith("media")]
        assert len(media_boxes) == 5
        assert all(b.w >= 200 for b in media_boxes)
        assert_sound(geometry)

    def test_title_template_centered_only(self):
        geometry = layout_slide(slide_with(template="title"), GenerationParams())
        assert [b.ref for b in geometry.boxes] == ["title"]

    def test_box_override_validated(self):
        slide = slide_with(n_bullets=1)
        slide.box_overrides["bullets"] = (0, 0, 400, 300)  # collides with title
        with pytest.raises(GeometryViolation):
            layout_slide(slide, GenerationParams())

    @given(
        n_bullets=st.integers(min_value=0, max_value=8),
        n_media=st.integers(min_value=0, max_value=5),
        page_numbers=st.booleans(),
        template=st.sampled_from(["title", "one_column", "two_column"]),
    )
    @settings(max_examples=300)
    def test_layout_soundness_property(self, n_bullets, n_media, page_numbers, template):
        slide = slide_with(n_bullets=n_bullets, n_media=n_media, template=template)
        geometry = layout_slide(slide, GenerationParams(page_numbers=page_numbers))
        assert_sound(geometry)
