"""Exception hierarchy.

Every error carries a short machine-readable ``code`` (the class name) so the
CLI can emit structured diagnostics.
"""

from __future__ import annotations


class LatticePDError(ValueError):
    """Base class for all validation and usage errors raised by the library."""

    @property
    def code(self) -> str:
        return type(self).__name__

    def to_dict(self) -> dict:
        return {"error": self.code, "message": str(self)}


class MalformedInput(LatticePDError):
    pass


# lattices
class NotAPoset(LatticePDError):
    pass


class NoMeetOrJoin(LatticePDError):
    pass


class BadMetric(LatticePDError):
    pass


class UnknownElement(LatticePDError, KeyError):
    def __str__(self) -> str:  # KeyError would quote the message
        return str(self.args[0]) if self.args else ""


class NotABoundedLatticeMap(LatticePDError):
    pass


# complexes
class EmptySimplex(LatticePDError):
    pass


class DuplicateVertexInSimplex(LatticePDError):
    pass


class NotASubcomplex(LatticePDError):
    pass


class DimensionMismatch(LatticePDError):
    pass


# filtrations and morphisms
class NotMonotone(LatticePDError):
    pass


class TopNotFull(LatticePDError):
    pass


class LatticeMismatch(LatticePDError):
    pass


class NotComposable(LatticePDError):
    pass


class MapNotLifted(LatticePDError):
    pass


class InvalidMorphism(LatticePDError):
    pass


# paths and distances
class InvalidStep(LatticePDError):
    pass


class BrokenChain(LatticePDError):
    pass


class NegativeMass(LatticePDError):
    pass


class NotTotallyOrdered(LatticePDError):
    pass


class NoEmbedding(LatticePDError):
    pass


class InvalidMatching(LatticePDError):
    pass


class InfiniteMixing(LatticePDError):
    pass


# classical pipeline
class NotIncreasing(LatticePDError):
    pass


class Empty(LatticePDError):
    pass


class NotClassicalIndex(LatticePDError):
    pass
