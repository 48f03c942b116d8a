import json
import math

import pytest
from hypothesis import given, strategies as st

from deckforge.errors import MalformedNotebook, MissingKeywords
from deckforge.notebook import (
    CHART_MARKER,
    TRUNCATION_MARKER,
    NotebookCell,
    MediaItem,
    build_overview,
    content_weight,
    parse_notebook,
    prompt_view,
)
from oracles import read_ipynb_independent


def make_nb(cells):
    return json.dumps({"cells": cells, "nbformat": 4, "nbformat_minor": 5}).encode()


def code_cell(source, outputs=None, **extra):
    return {"cell_type": "code", "source": source, "outputs": outputs or [], **extra}


class TestParseNotebook:
    def test_single_code_cell_no_outputs(self):
        nb = parse_notebook(make_nb([code_cell("print(1)")]))
        assert len(nb.cells) == 1
        cell = nb.cells[0]
        assert cell.kind == "code"
        assert cell.source == "print(1)"
        assert cell.media == ()

    def test_house_fixture_has_42_ordered_code_cells(self, house_bytes):
        nb = parse_notebook(house_bytes)
        assert len(nb.cells) == 42
        assert [c.index for c in nb.cells] == list(range(42))
        assert all(c.kind == "code" for c in nb.cells)

    def test_png_output_becomes_chart_media(self, house_bytes):
        nb = parse_notebook(house_bytes)
        independent = read_ipynb_independent(house_bytes)
        for cell, ref in zip(nb.cells, independent):
            charts = [m for m in cell.media if m.kind == "chart"]
            assert len(charts) == ref["pngs"]
            assert cell.source == ref["source"]
            assert cell.kind == ref["kind"]

    def test_html_table_output_becomes_table_media(self):
        out = {
            "output_type": "execute_result",
            "data": {"text/html": "<table><tr><td>1</td></tr></table>"},
        }
        nb = parse_notebook(make_nb([code_cell("df.head()", [out])]))
        assert [m.kind for m in nb.cells[0].media] == ["table"]

    def test_source_as_string_list(self):
        nb = parse_notebook(make_nb([code_cell(["a = 1\n", "b = 2"])]))
        assert nb.cells[0].source == "a = 1\nb = 2"

    def test_stable_ids_use_nbformat_id_else_position(self):
        nb = parse_notebook(make_nb([code_cell("x", id="abc"), code_cell("y")]))
        assert nb.cells[0].id == "abc"
        assert nb.cells[1].id == "c1"

    def test_markdown_cells_retained(self):
        nb = parse_notebook(
            make_nb([{"cell_type": "markdown", "source": "# Intro"}, code_cell("x")])
        )
        assert nb.cells[0].kind == "markdown"
        assert nb.cells[1].index == 1

    @pytest.mark.parametrize(
        "raw",
        [
            b"not json",
            json.dumps({"nbformat": 3, "cells": []}).encode(),
            json.dumps({"nbformat": 4}).encode(),
            b"[1, 2, 3]",
        ],
    )
    def test_malformed_documents_rejected(self, raw):
        with pytest.raises(MalformedNotebook):
            parse_notebook(raw)


class TestBuildOverview:
    def test_empty_notebook_gives_empty_cards(self):
        nb = parse_notebook(make_nb([]))
        assert build_overview(nb, {}) == []

    def test_weight_increases_with_content(self):
        nb = parse_notebook(make_nb([code_cell("x" * 40), code_cell("y" * 400)]))
        cards = build_overview(nb, {c.id: [] for c in nb.cells})
        assert cards[1].content_weight > cards[0].content_weight

    def test_weight_formula_40_chars(self):
        expected = math.log(41) / math.log(2001)
        assert content_weight(40) == pytest.approx(expected, abs=1e-12)
        assert round(expected, 4) == 0.4885

    def test_missing_keywords_raises(self):
        nb = parse_notebook(make_nb([code_cell("x")]))
        with pytest.raises(MissingKeywords):
            build_overview(nb, {})

    def test_card_states_default(self, house_notebook):
        keywords = {c.id: ["k"] for c in house_notebook.cells}
        cards = build_overview(house_notebook, keywords)
        assert len(cards) == 42
        assert all(card.state == "default" for card in cards)
        assert all(0.0 <= card.content_weight <= 1.0 for card in cards)


class TestPromptView:
    def test_short_source_untruncated(self):
        cell = NotebookCell(id="c0", index=0, kind="code", source="x = 1 + 2")
        out = prompt_view(cell, 100)
        assert out == "[cell 0] x = 1 + 2"
        assert TRUNCATION_MARKER not in out

    def test_long_source_truncated(self):
        cell = NotebookCell(id="c0", index=3, kind="code", source="a" * 500)
        out = prompt_view(cell, 100)
        assert out.endswith(TRUNCATION_MARKER)
        body = out[len("[cell 3] ") : -len(TRUNCATION_MARKER)]
        assert len(body) == 100

    def test_chart_marker_appears_once(self):
        media = (MediaItem(kind="chart", payload=b"\x89PNG", origin_cell="c0"),)
        cell = NotebookCell(id="c0", index=0, kind="code", source="plt.plot()", media=media)
        assert prompt_view(cell, 100).count(CHART_MARKER) == 1

    def test_table_rows_appended_within_budget(self):
        media = (
            MediaItem(
                kind="table",
                payload="<table><tr><td>a</td><td>b</td></tr></table>",
                origin_cell="c0",
            ),
        )
        cell = NotebookCell(id="c0", index=0, kind="code", source="df", media=media)
        assert "a | b" in prompt_view(cell, 200)

    def test_budget_below_minimum_rejected(self):
        cell = NotebookCell(id="c0", index=0, kind="code", source="x")
        with pytest.raises(ValueError):
            prompt_view(cell, 15)

    @given(
        source=st.text(max_size=2000),
        budget=st.integers(min_value=16, max_value=500),
    )
    def test_budget_bound_property(self, source, budget):
        cell = NotebookCell(id="c0", index=0, kind="code", source=source)
        out = prompt_view(cell, budget)
        overhead = len(f"[cell 0] ") + len(TRUNCATION_MARKER)
        assert len(out) <= budget + overhead
