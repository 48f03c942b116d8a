"""One-shot batch pipeline: notebook + plain-text outline -> pptx / html.

Exit codes: 0 success, 2 malformed notebook, 3 malformed outline,
4 backend failure.
"""

import argparse
import json
import sys

from . import lm
from .errors import BackendFailure, MalformedNotebook, MalformedOutline
from .export import export_html, export_pptx
from .outline import parse_outline_text
from .session import SessionStore, outline_to_dict
from .slides import GenerationParams, layout_slide


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="deckforge")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate a deck from a notebook and an outline file")
    gen.add_argument("--notebook", required=True, help="path to a .ipynb file")
    gen.add_argument("--outline", required=True, help="plain-text outline (two-space sub-topics)")
    gen.add_argument("--top-k", type=int, default=3, choices=range(1, 6), metavar="1..5")
    gen.add_argument("--detail", choices=["concise", "detailed"], default="concise")
    gen.add_argument("--page-numbers", action="store_true")
    gen.add_argument("--backend", choices=["heuristic", "remote", "replay"], default="heuristic")
    gen.add_argument("--replay-fixtures", default="", help="replay fixture file (JSON)")
    gen.add_argument("--out-pptx", default=None)
    gen.add_argument("--out-html", default=None)
    return parser


def run_batch(args) -> int:
    config = lm.config_from_env(
        lm.LmConfig(backend_kind=args.backend, replay_path=args.replay_fixtures)
    )

    try:
        with open(args.notebook, "rb") as fh:
            notebook_bytes = fh.read()
    except OSError as exc:
        print(json.dumps({"error": "MalformedNotebook", "detail": str(exc)}))
        return 2
    try:
        with open(args.outline, encoding="utf-8") as fh:
            outline_text = fh.read()
    except OSError as exc:
        print(json.dumps({"error": "MalformedOutline", "detail": str(exc)}))
        return 3

    try:
        outline = parse_outline_text(outline_text)
        if not outline.items:
            raise MalformedOutline("outline file is empty")
    except MalformedOutline as exc:
        print(json.dumps({"error": "MalformedOutline", "detail": str(exc)}))
        return 3

    store = SessionStore(config=config)
    try:
        session = store.create_session(notebook_bytes)
    except MalformedNotebook as exc:
        print(json.dumps({"error": "MalformedNotebook", "detail": str(exc)}))
        return 2

    params = GenerationParams(
        top_k=args.top_k, detail_level=args.detail, page_numbers=args.page_numbers
    )
    try:
        store.replace_outline(session.session_id, outline)
        deck = store.generate_deck(session.session_id, params)
        geometries = {s.id: layout_slide(s, params) for s in deck}
        outputs = {}
        if args.out_pptx:
            with open(args.out_pptx, "wb") as fh:
                fh.write(export_pptx(deck, geometries, params))
            outputs["pptx"] = args.out_pptx
        if args.out_html:
            with open(args.out_html, "wb") as fh:
                fh.write(export_html(deck, geometries, params))
            outputs["html"] = args.out_html
    except BackendFailure as exc:
        print(json.dumps({"error": "BackendFailure", "detail": str(exc)}))
        return 4

    report = {
        "units": [
            {"item_id": i.id, "text": i.text}
            for i in session.outline.childless_items()
        ],
        "slides": [
            {"id": s.id, "title": s.title, "bullets": len(s.bullets), "media": len(s.media)}
            for s in deck
        ],
        "warnings": session.warnings,
        "outputs": outputs,
        "outline": outline_to_dict(session.outline),
    }
    print(json.dumps(report, indent=2))
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "generate":
        return run_batch(args)
    return 1


if __name__ == "__main__":
    sys.exit(main())
