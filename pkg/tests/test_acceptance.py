"""End-to-end acceptance suite. Each test covers one acceptance criterion and
prints a PASS line on success (visible with -s or in captured output)."""

import json
import random
import string
import time

import pytest

from deckforge import lm
from deckforge.export.pptx import export_pptx
from deckforge.keywords import heuristic_keywords
from deckforge.notebook import build_overview, parse_notebook, prompt_view
from deckforge.outline import parse_outline_text
from deckforge.retrieval import OutlineUnit, lexical_rank, retrieve_cells
from deckforge.session import SessionStore, slide_to_dict
from deckforge.slides import (
    CANVAS_H,
    CANVAS_W,
    Bullet,
    GenerationParams,
    Slide,
    layout_slide,
)
from deckforge.topics import RecommendationContext, TopicCandidateSet, recommend_topics
from conftest import SCATTER_BULLET, SCATTER_CELL_ID
from oracles import oracle_bm25, read_ipynb_independent, validate_pptx

HEURISTIC = lm.LmConfig(backend_kind="heuristic")

UNIT_TEXTS = [
    "Data Introduction",
    "Finding Important Features",
    "Removing Outliers",
    "Scaling",
    "Selecting Features",
    "Findings",
]


def ok(name):
    print(f"[acceptance] {name}: PASS")


def rand_word(rng, length=8):
    return "".join(rng.choice(string.ascii_lowercase) for _ in range(length))


def rand_source(rng):
    lines = []
    for _ in range(rng.randint(1, 4)):
        lines.append(f"{rand_word(rng)}_{rand_word(rng, 4)} = {rand_word(rng)}({rand_word(rng)})")
    return "\n".join(lines)


def rand_notebook(rng, n_cells):
    cells = [
        {"cell_type": "code", "source": rand_source(rng), "outputs": []}
        for _ in range(n_cells)
    ]
    return parse_notebook(json.dumps({"cells": cells, "nbformat": 4}).encode())


class TestIngestionFidelity:
    def test_42_cells_and_cards_under_one_second(self, house_bytes):
        start = time.perf_counter()
        notebook = parse_notebook(house_bytes)
        keyword_lists = heuristic_keywords(notebook)
        cards = build_overview(notebook, {c: kl.keywords for c, kl in keyword_lists.items()})
        elapsed = time.perf_counter() - start
        assert elapsed < 1.0, f"ingestion took {elapsed:.3f}s"
        assert len(notebook.cells) == 42
        assert len(cards) == 42
        assert [c.index for c in notebook.cells] == list(range(42))

        independent = read_ipynb_independent(house_bytes)
        assert len(independent) == len(notebook.cells)
        for ours, theirs in zip(notebook.cells, independent):
            assert ours.id == theirs["id"]
            assert ours.source == theirs["source"]
            assert ours.kind == theirs["kind"]
            assert sum(1 for m in ours.media if m.kind == "chart") == theirs["pngs"]
        ok("ingestion fidelity")


class TestCaps:
    def test_keywords_at_most_five_per_cell(self):
        rng = random.Random(101)
        checked = 0
        while checked < 1000:
            notebook = rand_notebook(rng, rng.randint(1, 6))
            for kw_list in heuristic_keywords(notebook).values():
                assert len(kw_list.keywords) <= 5
                checked += 1
        ok("cap: keywords <= 5 per cell (1000+ inputs)")

    def test_recommendations_at_most_ten(self):
        rng = random.Random(202)
        for _ in range(1000):
            titles = [rand_word(rng).title() for _ in range(rng.randint(0, 25))]
            context = tuple(rand_word(rng).title() for _ in range(rng.randint(1, 5)))
            got = recommend_topics(
                TopicCandidateSet(topics=[(t, []) for t in titles]),
                RecommendationContext(items=context, level="topic"),
                HEURISTIC,
            )
            assert len(got) <= 10
        ok("cap: recommendations <= 10 (1000 inputs)")

    def test_retrieval_at_most_five_scores_in_unit_interval(self):
        rng = random.Random(303)
        for _ in range(1000):
            notebook = rand_notebook(rng, rng.randint(1, 8))
            query_cell = rng.choice(notebook.cells)
            unit = OutlineUnit(
                item_id="u", item_text=query_cell.source[:40], context_text=""
            )
            got = retrieve_cells(unit, notebook, HEURISTIC)
            assert len(got) <= 5
            assert all(0.0 <= sc.score <= 1.0 for sc in got)
        ok("cap: retrieved cells <= 5, scores in [0,1] (1000 inputs)")


class TestRetrievalOracle:
    LABELS = {
        "Removing Outliers": 3,
        "Scaling": 4,
        "Selecting Features": 5,
        "Scatter Plot": 7,
    }

    def test_scores_match_brute_force_oracle(self, toy_notebook):
        sources = [c.source for c in toy_notebook.cells]
        for query in self.LABELS:
            raw = oracle_bm25(query, sources)
            ranked = lexical_rank(query, toy_notebook)
            by_id = {sc.cell_id: sc.score for sc in ranked}
            for cell, score in zip(toy_notebook.cells, raw):
                if score == 0:
                    assert cell.id not in by_id
                else:
                    assert by_id[cell.id] == pytest.approx(score / (score + 1), abs=1e-9)
        ok("retrieval oracle equivalence (1e-9)")

    def test_precision_at_one_for_labeled_items(self, toy_notebook):
        hits = 0
        for query, index in self.LABELS.items():
            got = retrieve_cells(
                OutlineUnit(item_id="u", item_text=query, context_text=""),
                toy_notebook,
                HEURISTIC,
            )
            assert got, f"no results for {query!r}"
            if toy_notebook.cell_by_id(got[0].cell_id).index == index:
                hits += 1
        assert hits / len(self.LABELS) == 1.0
        ok("retrieval precision@1 = 1.0 on hand labels")


class TestScenarioReplay:
    def test_six_slides_then_bind_scatter_cell(self, house_bytes, scenario_outline_text, replay_config):
        start = time.perf_counter()
        store = SessionStore(config=replay_config)
        session = store.create_session(house_bytes)
        store.replace_outline(session.session_id, parse_outline_text(scenario_outline_text))
        deck = store.generate_deck(session.session_id, GenerationParams(top_k=3))
        assert [s.title for s in deck] == UNIT_TEXTS

        target = next(s for s in deck if s.title == "Removing Outliers")
        bullets_before = len(target.bullets)
        charts_before = sum(1 for m in target.media if m.kind == "chart")
        updated = store.bind_cells(session.session_id, target.id, [SCATTER_CELL_ID], "bind")
        elapsed = time.perf_counter() - start

        assert len(updated.bullets) == bullets_before + 1
        new_bullets = [b for b in updated.bullets if b.source_cell == SCATTER_CELL_ID]
        assert len(new_bullets) == 1
        assert new_bullets[0].text == SCATTER_BULLET
        assert sum(1 for m in updated.media if m.kind == "chart") == charts_before + 1
        assert elapsed < 5.0, f"scenario took {elapsed:.3f}s"
        ok("scenario replay (6 slides, replay bullet, chart)")


class TestSyncInvariants:
    OUTLINE = "Load Data\nRemoving Outliers\nScaling\nScatter Plot\n"

    def run_sequence(self, rng, store, toy_bytes):
        session = store.create_session(toy_bytes)
        sid = session.session_id
        store.replace_outline(sid, parse_outline_text(self.OUTLINE))
        store.generate_deck(sid, GenerationParams(top_k=2))
        touched = set()

        def check(expected_revision):
            assert session.revision == expected_revision
            item_order = [
                i.slide for i in session.outline.childless_items() if i.slide is not None
            ]
            deck_order = [
                s.id
                for s in session.visible_deck()
                if any(i.slide == s.id for i in session.outline.items.values())
            ]
            assert deck_order == item_order, "deck order diverged from outline order"
            dirty = {i.id for i in session.outline.items.values() if i.dirty}
            assert dirty <= touched, "dirty flag on an untouched item"

        revision = session.revision
        for _ in range(rng.randint(3, 8)):
            visible = session.visible_deck()
            deleted = [s for s in session.deck if s.deleted]
            op = rng.choice(["rename", "reorder", "delete", "restore", "bind", "unbind"])
            if op == "restore" and not deleted:
                op = "rename"
            if op != "restore" and not visible:
                op = "restore" if deleted else None
            if op is None:
                break
            if op == "rename":
                slide = rng.choice(visible)
                original = slide.title
                store.apply_slide_edit(sid, slide.id, {"kind": "rename", "title": rand_word(rng).title()})
                touched.add(session.item_for_slide(slide.id).id)
                revision += 1
                check(revision)
                # round trip: renaming back restores both the slide and the item text
                store.apply_slide_edit(sid, slide.id, {"kind": "rename", "title": original})
                revision += 1
                assert slide.title == original
                assert session.item_for_slide(slide.id).text == original
                check(revision)
            elif op == "reorder":
                slide = rng.choice(visible)
                to_index = rng.randrange(len(visible))
                store.apply_slide_edit(sid, slide.id, {"kind": "reorder", "to_index": to_index})
                touched.add(session.item_for_slide(slide.id).id)
                revision += 1
                check(revision)
            elif op == "delete":
                slide = rng.choice(visible)
                store.apply_slide_edit(sid, slide.id, {"kind": "delete"})
                revision += 1
                check(revision)
            elif op == "restore":
                slide = rng.choice(deleted)
                store.apply_slide_edit(sid, slide.id, {"kind": "restore"})
                revision += 1
                check(revision)
            elif op == "bind":
                slide = rng.choice(visible)
                free = [c.id for c in session.notebook.cells if c.id not in slide.bound_cells]
                if not free:
                    continue
                store.bind_cells(sid, slide.id, [rng.choice(free)], "bind")
                touched.add(session.item_for_slide(slide.id).id)
                revision += 1
                check(revision)
            elif op == "unbind":
                slide = rng.choice(visible)
                if not slide.bound_cells:
                    continue
                store.bind_cells(sid, slide.id, [rng.choice(list(slide.bound_cells))], "unbind")
                revision += 1
                check(revision)

        store.generate_deck(sid)
        assert not any(i.dirty for i in session.outline.items.values())

    def test_500_randomized_edit_sequences(self, toy_bytes):
        rng = random.Random(404)
        store = SessionStore(config=HEURISTIC)
        for _ in range(500):
            self.run_sequence(rng, store, toy_bytes)
        ok("sync invariants over 500 randomized edit sequences")


def overlap_area(a, b):
    w = min(a.x + a.w, b.x + b.w) - max(a.x, b.x)
    h = min(a.y + a.h, b.y + b.h) - max(a.y, b.y)
    return max(0, w) * max(0, h)


class TestLayoutSoundness:
    def test_1000_randomized_slides(self):
        rng = random.Random(505)
        from deckforge.notebook import MediaItem

        for _ in range(1000):
            n_bullets = rng.randint(0, 8)
            n_media = rng.randint(0, 5)
            slide = Slide(
                id="s",
                title=rand_word(rng).title(),
                bullets=[
                    Bullet(text=rand_word(rng), source_cell=f"c{i}", relevance=0.5)
                    for i in range(n_bullets)
                ],
                media=[
                    MediaItem(kind="chart", payload=b"\x89PNG", origin_cell=f"c{i}")
                    for i in range(n_media)
                ],
                template=rng.choice(["title", "one_column", "two_column"]),
            )
            geometry = layout_slide(slide, GenerationParams(page_numbers=rng.random() < 0.5))
            for box in geometry.boxes:
                assert box.x >= 0 and box.y >= 0
                assert box.x + box.w <= CANVAS_W and box.y + box.h <= CANVAS_H
            for i, a in enumerate(geometry.boxes):
                for b in geometry.boxes[i + 1 :]:
                    assert overlap_area(a, b) == 0
        ok("layout soundness over 1000 randomized slides")

    def test_two_chart_width_is_580(self):
        from deckforge.notebook import MediaItem

        slide = Slide(
            id="s",
            title="T",
            bullets=[Bullet(text="b", source_cell="c0", relevance=0.5)],
            media=[
                MediaItem(kind="chart", payload=b"\x89PNG", origin_cell=f"c{i}")
                for i in range(2)
            ],
            template="two_column",
        )
        geometry = layout_slide(slide, GenerationParams())
        widths = [b.w for b in geometry.boxes if b.ref.startswith("media")]
        assert widths == [580, 580]
        ok("two-chart media width = 580 exactly")


class TestExportValidity:
    def deck_for(self, raw, outline_text, params):
        store = SessionStore(config=HEURISTIC)
        session = store.create_session(raw)
        store.replace_outline(session.session_id, parse_outline_text(outline_text))
        store.generate_deck(session.session_id, params)
        visible = session.visible_deck()
        return visible, {s.id: layout_slide(s, params) for s in visible}

    def test_corpus_reparse_and_reproducibility(self, house_bytes, toy_bytes, scenario_outline_text):
        cases = [
            (house_bytes, scenario_outline_text, GenerationParams(top_k=3, page_numbers=True)),
            (toy_bytes, "Load Data\nScaling\nScatter Plot\n", GenerationParams(top_k=2)),
        ]
        for raw, outline_text, params in cases:
            deck, geometries = self.deck_for(raw, outline_text, params)
            first = export_pptx(deck, geometries, params)
            report = validate_pptx(first)
            assert report["slide_count"] == len(deck)
            assert export_pptx(deck, geometries, params) == first
        ok("export validity (independent re-parse, byte-identical)")


class TestBudgetSafety:
    @pytest.mark.parametrize("n_cells", [50, 200, 500])
    def test_prompts_fit_budget(self, n_cells):
        rng = random.Random(606)
        cells = [
            {
                "cell_type": "code",
                "source": "\n".join(rand_source(rng) for _ in range(rng.randint(1, 40))),
                "outputs": [],
            }
            for _ in range(n_cells)
        ]
        notebook = parse_notebook(json.dumps({"cells": cells, "nbformat": 4}).encode())
        parts = [(cell.id, prompt_view(cell, 600)) for cell in notebook.cells]
        request = lm.fit_to_budget(parts, "Extract keywords for every cell.", HEURISTIC)
        assert lm.estimate_request(request) <= HEURISTIC.token_budget - 1000
        assert len(request.parts) == n_cells
        if n_cells == 500:
            ok("budget safety up to 500 cells")


class TestOfflineCompleteness:
    def test_pipeline_runs_with_network_disabled(
        self, monkeypatch, house_bytes, scenario_outline_text, replay_config
    ):
        import httpx

        def refuse(*args, **kwargs):
            raise AssertionError("network access attempted")

        monkeypatch.setattr(httpx, "post", refuse)
        for config in (HEURISTIC, replay_config):
            store = SessionStore(config=config)
            session = store.create_session(house_bytes)
            store.replace_outline(session.session_id, parse_outline_text(scenario_outline_text))
            deck = store.generate_deck(session.session_id, GenerationParams(top_k=3))
            assert len(deck) == 6
            params = session.params
            geometries = {s.id: layout_slide(s, params) for s in deck}
            assert validate_pptx(export_pptx(deck, geometries, params))["slide_count"] == 6
        ok("offline completeness (heuristic and replay, no network)")
