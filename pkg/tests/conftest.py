import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from deckforge import lm
from deckforge.notebook import parse_notebook

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")

SCATTER_BULLET = "Plotting a scatter plot between LotFrontage and SalePrice"
SCATTER_CELL_ID = "hp23"


def fixture_path(name):
    return os.path.join(FIXTURES, name)


def fixture_bytes(name):
    with open(fixture_path(name), "rb") as fh:
        return fh.read()


@pytest.fixture(scope="session")
def house_bytes():
    return fixture_bytes("house_prices.ipynb")


@pytest.fixture(scope="session")
def house_notebook(house_bytes):
    return parse_notebook(house_bytes)


@pytest.fixture(scope="session")
def toy_bytes():
    return fixture_bytes("toy8.ipynb")


@pytest.fixture(scope="session")
def toy_notebook(toy_bytes):
    return parse_notebook(toy_bytes)


@pytest.fixture(scope="session")
def scenario_outline_text():
    with open(fixture_path("scenario_outline.txt"), encoding="utf-8") as fh:
        return fh.read()


def record_bullet_fixture(store, cell, detail_level, response, config):
    """Record a replay fixture for the bullet prompt of one cell."""
    from deckforge.notebook import prompt_view
    from deckforge.slides import CONCISE_WORDS, DETAILED_WORDS

    limit = CONCISE_WORDS if detail_level == "concise" else DETAILED_WORDS
    instruction = (
        f"Summarize the notebook cell below into one bullet point: a single "
        f"sentence of at most {limit} words."
    )
    request = lm.fit_to_budget([(cell.id, prompt_view(cell, 2000))], instruction, config)
    store.record(lm.assemble_prompt(request), response)


@pytest.fixture()
def replay_config(tmp_path, house_notebook):
    """Replay backend whose only fixture is the scatter-cell bullet."""
    path = str(tmp_path / "replay.json")
    config = lm.LmConfig(backend_kind="replay", replay_path=path)
    store = lm.ReplayStore(path)
    cell = house_notebook.cell_by_id(SCATTER_CELL_ID)
    record_bullet_fixture(store, cell, "concise", SCATTER_BULLET, config)
    store.save()
    lm._replay_cache.pop(path, None)
    return config
