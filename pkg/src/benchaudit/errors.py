"""Exception taxonomy shared across the package.

Callers that need to distinguish failure modes catch these instead of
matching on message strings.
"""

from __future__ import annotations


class BenchAuditError(Exception):
    """Base class for all package-specific errors."""


class ArgumentError(BenchAuditError, ValueError):
    """A caller-supplied argument is out of contract (bad k, empty list, ...)."""


class IngestError(BenchAuditError):
    """A corpus / run / use-case file failed validation during ingestion.

    ``kind`` is one of ``duplicate``, ``parse``, ``metric``; ``line`` is the
    1-based line number when known.
    """

    def __init__(self, kind: str, message: str, line: int | None = None):
        self.kind = kind
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{kind}: {message}{where}")


class FormatError(BenchAuditError, ValueError):
    """A string failed grammar validation (shorthand and friends)."""


class RangeError(BenchAuditError, ValueError):
    """A numeric value lies outside its allowed interval."""


class CoverageError(BenchAuditError):
    """Models within one benchmark were not scored on identical item sets."""


class CapacityError(BenchAuditError, ValueError):
    """More items were requested than the population holds."""


class DimensionError(BenchAuditError, ValueError):
    """Vector dimensions disagree (or are zero)."""


class StateError(BenchAuditError):
    """An operation needs state the object does not carry (e.g. shorthands)."""


class GatewayError(BenchAuditError):
    """A remote model service failed after the configured retries."""


class TemplateError(BenchAuditError, ValueError):
    """A prompt template was dispatched with unbound placeholders."""


class ResponseFormatError(BenchAuditError):
    """A model response did not match the template's expected output format."""

    def __init__(self, template_id: str, message: str, text: str = ""):
        self.template_id = template_id
        self.text = text
        super().__init__(f"{template_id}: {message}")


class AnchorFormatError(BenchAuditError):
    """Anchor generation output stayed malformed after the single re-ask."""


class DegenerateError(BenchAuditError):
    """A statistic is undefined for the given input (all-tied margin etc.)."""


class ShapeError(BenchAuditError, ValueError):
    """A matrix argument has the wrong shape or inconsistent row sums."""
