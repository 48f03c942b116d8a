"""deckforge: outline-driven slide decks from computational notebooks."""

__version__ = "0.1.0"
