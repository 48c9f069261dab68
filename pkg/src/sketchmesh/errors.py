"""Exception types shared across the package."""

from __future__ import annotations


class SketchMeshError(Exception):
    """Base class for errors raised by this package."""


class EmptyMeshError(SketchMeshError):
    """An operation that needs geometry was given a mesh with no triangles."""


class BinsMismatchError(SketchMeshError):
    """Two quantized objects with different bin counts were combined."""

    def __init__(self, left: int, right: int):
        super().__init__(f"bin counts differ: {left} vs {right}")
        self.left = left
        self.right = right


class ObjParseError(SketchMeshError):
    """Malformed OBJ input. Carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class SequenceValidationError(SketchMeshError):
    """A token sequence failed validation.

    ``violations`` holds (token index, message) pairs; the first entry is
    the earliest offending token.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        index, message = self.violations[0]
        super().__init__(f"token {index}: {message}")


class SampleRejected(SketchMeshError):
    """Sample synthesis gave up after exhausting its retry budget."""
