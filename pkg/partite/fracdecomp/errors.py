"""Exceptions raised by partite.fracdecomp."""
from typing import Any, Optional


class FracDecompError(Exception):
    """Base class for errors raised by this package."""

    def __init__(self, message: str, *, stage: Optional[str] = None) -> None:
        super().__init__(message)
        self.stage = stage

    def add_stage(self, stage: str) -> "FracDecompError":
        """
        Record the pipeline stage that raised the error.

        Stages are prefixed, so an error from an inner stage keeps its
        own tag beneath the outer one, e.g. ``anchor:3/sweep:second``.

        :param stage: Name of the stage.
        :returns: The same error, for re-raising.
        """
        self.stage = stage if self.stage is None else f"{stage}/{self.stage}"
        return self

    def __str__(self) -> str:
        message = super().__str__()
        if self.stage is None:
            return message
        return f"[{self.stage}] {message}"


class DomainError(FracDecompError, ValueError):
    """An argument is outside the domain of the operation."""


class GraphFormatError(FracDecompError):
    """A graph file could not be parsed."""


class WeightingFormatError(FracDecompError):
    """A weighting file could not be parsed."""


class NoCliquesError(FracDecompError):
    """The graph has edges but no transversal r-cliques."""


class DivisibilityError(FracDecompError):
    """The graph is not K_r-divisible."""


class GadgetInfeasible(FracDecompError):
    """A gadget has no helper cliques to average over."""

    def __init__(self, message: str, spec: Any, *, stage: Optional[str] = None) -> None:
        super().__init__(message, stage=stage)
        self.spec = spec


class EmptyIntersectionError(FracDecompError):
    """No vertex of the target set can take the role of v'."""


class NotNeighbourRichError(FracDecompError):
    """A target set is not neighbour-rich."""


class IntermediateSetTooSmall(FracDecompError):
    """Too few eligible vertices for the intermediate set."""


class TransportInvariantError(FracDecompError):
    """An exact post-condition of a transport stage failed."""


class SizeLimitError(FracDecompError):
    """The instance exceeds the configured size limits."""


class IndexMismatchError(FracDecompError):
    """A weighting is not indexed by the expected clique index."""


class ConfigError(FracDecompError):
    """The run configuration is invalid."""


class TimeLimitExceeded(FracDecompError):
    """The wall-clock limit for the run expired."""


__all__ = [
    "ConfigError",
    "DivisibilityError",
    "DomainError",
    "EmptyIntersectionError",
    "FracDecompError",
    "GadgetInfeasible",
    "GraphFormatError",
    "IndexMismatchError",
    "IntermediateSetTooSmall",
    "NoCliquesError",
    "NotNeighbourRichError",
    "SizeLimitError",
    "TimeLimitExceeded",
    "TransportInvariantError",
    "WeightingFormatError",
]
