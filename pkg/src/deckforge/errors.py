"""Exception hierarchy shared across the package."""


class DeckforgeError(Exception):
    """Base class; `code` is the machine-readable name surfaced over HTTP."""

    code = "Error"

    def __init__(self, message=""):
        super().__init__(message or self.code)


class MalformedNotebook(DeckforgeError):
    code = "MalformedNotebook"


class MissingKeywords(DeckforgeError):
    code = "MissingKeywords"


class BudgetExceeded(DeckforgeError):
    code = "BudgetExceeded"


class TransportFailure(DeckforgeError):
    code = "TransportFailure"


class ReplayMiss(DeckforgeError):
    code = "ReplayMiss"


class HeuristicBackend(DeckforgeError):
    """Raised when a completion is requested from the heuristic backend;
    deterministic fallbacks live in the calling modules, not the gateway."""

    code = "HeuristicBackend"


class BackendFailure(DeckforgeError):
    code = "BackendFailure"


class UnparseableResponse(DeckforgeError):
    code = "UnparseableResponse"


class EmptyQuery(DeckforgeError):
    code = "EmptyQuery"


class EmptyCell(DeckforgeError):
    code = "EmptyCell"


class Overflow(DeckforgeError):
    code = "Overflow"

    def __init__(self, message="", excess=None):
        super().__init__(message)
        self.excess = list(excess or [])


class UnknownSession(DeckforgeError):
    code = "UnknownSession"


class UnknownItem(DeckforgeError):
    code = "UnknownItem"


class UnknownSlide(DeckforgeError):
    code = "UnknownSlide"


class UnknownCell(DeckforgeError):
    code = "UnknownCell"


class UnknownRef(DeckforgeError):
    code = "UnknownRef"


class MalformedOutline(DeckforgeError):
    code = "MalformedOutline"


class NoCellsSelected(DeckforgeError):
    code = "NoCellsSelected"


class InvalidRestore(DeckforgeError):
    code = "InvalidRestore"


class GeometryViolation(DeckforgeError):
    code = "GeometryViolation"


class EmptyDeck(DeckforgeError):
    code = "EmptyDeck"


class MediaEncodingFailure(DeckforgeError):
    code = "MediaEncodingFailure"
