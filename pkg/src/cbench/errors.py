"""Exception types shared across the workbench.

Every domain failure raises a subclass of CbenchError so the service layer
can map them to structured client errors instead of 500s.
"""

from __future__ import annotations


class CbenchError(Exception):
    """Base class for all domain errors."""

    code = "error"


class ParseError(CbenchError):
    """Malformed input data (CSV, edge list, model document)."""

    code = "parse_error"


class ColumnError(CbenchError):
    """A column is missing, duplicated, or of the wrong kind."""

    code = "column_error"


class DiscretizationError(CbenchError):
    """A discretization method failed on a column (ties, degenerate data)."""

    code = "discretization_error"

    def __init__(self, message: str, column: str | None = None):
        super().__init__(message)
        self.column = column


class CycleError(CbenchError):
    """An edit or import would create a directed cycle.

    ``cycle`` carries the offending node sequence so UIs can highlight it.
    """

    code = "cycle_error"

    def __init__(self, cycle: list[str]):
        self.cycle = list(cycle)
        super().__init__("arcs create the cycle: " + " -> ".join(self.cycle))


class ConstraintError(CbenchError):
    """Blacklist/whitelist sets are inconsistent with each other or a graph."""

    code = "constraint_error"


class EvidenceError(CbenchError):
    """Query evidence is impossible or unreachable under the model."""

    code = "evidence_error"


class ModelFormatError(CbenchError):
    """A persisted document has the wrong format or version."""

    code = "model_format_error"
