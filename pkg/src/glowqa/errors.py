"""Exception hierarchy for the glowqa engine."""

from __future__ import annotations


class GlowError(Exception):
    """Base class for all engine errors."""


class ParseError(GlowError):
    """Malformed triple source line."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class SparqlSyntaxError(GlowError):
    """Query text outside the supported SPARQL subset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"offset {offset}: {message}")
        self.offset = offset


class UnknownPrefixError(SparqlSyntaxError):
    pass


class UnboundProjectionError(SparqlSyntaxError):
    pass


class EndpointError(GlowError):
    """Remote endpoint returned a non-success status."""

    def __init__(self, message: str, url: str, status: int | None = None):
        super().__init__(f"{message} ({url})")
        self.url = url
        self.status = status


class TransportError(GlowError):
    """Network-level failure after exhausting retries."""


class ProviderError(GlowError):
    """The LLM provider returned an error payload."""


class UnderstandingError(GlowError):
    """Question-understanding response missing a numbered field after retry."""


class LinkingError(GlowError):
    """Linking response does not resolve to a schema BGP."""


class EntityNotFoundError(GlowError):
    """Question entity has no matching node in the store."""


class UnanswerableTemplateError(GlowError):
    """The answer edge yields an empty candidate label set."""


class ModelNotFoundError(GlowError):
    """GNN inference service has no model for the requested key."""


class PromptBuildError(GlowError):
    """Prompt variant preconditions violated (missing RC or GNN candidates)."""


class SuiteBuildError(GlowError):
    """Not enough labeled nodes or labels to build the requested suite."""


class AggregationError(GlowError):
    """A run result references an unknown benchmark record."""


class ConfigError(GlowError):
    """Invalid or incomplete engine configuration."""
