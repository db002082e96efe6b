"""Finite simplicial complexes, chain complexes over GF(p), cycles and boundaries.

Simplices are sorted vertex tuples.  All cycle and boundary bases are returned
in the ambient coordinates of ``C_i(K)`` so that subspaces of different
subcomplexes can be intersected directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from . import gf
from .errors import (
    DimensionMismatch,
    DuplicateVertexInSimplex,
    EmptySimplex,
    MalformedInput,
    NotASubcomplex,
)

Simplex = tuple  # sorted tuple of non-negative ints


def _canonical(raw: Iterable) -> Simplex:
    try:
        verts = [int(v) for v in raw]
    except (TypeError, ValueError):
        raise MalformedInput(f"simplex {raw!r} is not a list of integers") from None
    if not verts:
        raise EmptySimplex("simplices must be nonempty")
    if len(set(verts)) != len(verts):
        raise DuplicateVertexInSimplex(f"simplex {verts} repeats a vertex")
    if any(v < 0 for v in verts):
        raise MalformedInput(f"simplex {verts} has a negative vertex")
    return tuple(sorted(verts))


def closure(simplices: Iterable[Iterable]) -> frozenset[Simplex]:
    """All nonempty faces of the given simplices."""
    out: set[Simplex] = set()
    for raw in simplices:
        s = _canonical(raw)
        if s in out:
            continue
        for k in range(1, len(s) + 1):
            out.update(combinations(s, k))
    return frozenset(out)


def _sort_key(s: Simplex):
    return (len(s), s)


@dataclass(frozen=True)
class SimplicialComplex:
    simplices: frozenset

    @cached_property
    def by_dim(self) -> tuple[tuple[Simplex, ...], ...]:
        top = max((len(s) for s in self.simplices), default=0)
        groups: list[list[Simplex]] = [[] for _ in range(top)]
        for s in self.simplices:
            groups[len(s) - 1].append(s)
        return tuple(tuple(sorted(g)) for g in groups)

    @cached_property
    def vertices(self) -> tuple[int, ...]:
        return tuple(s[0] for s in self.simplices if len(s) == 1)

    @property
    def dim(self) -> int:
        return len(self.by_dim) - 1

    def simplices_of_dim(self, i: int) -> tuple[Simplex, ...]:
        return self.by_dim[i] if 0 <= i < len(self.by_dim) else ()

    def sorted(self) -> list[Simplex]:
        return sorted(self.simplices, key=_sort_key)

    def __len__(self) -> int:
        return len(self.simplices)

    def __contains__(self, s) -> bool:
        return s in self.simplices

    def subcomplex(self, simplices: Iterable[Iterable], *, closed: bool = True) -> frozenset:
        """Validated subcomplex as a simplex set.

        With ``closed=True`` the input is face-closed first (maximal simplices
        suffice); otherwise it must already be face-closed.
        """
        if closed:
            sub = closure(simplices)
        else:
            sub = frozenset(_canonical(s) for s in simplices)
        check_subcomplex(self, sub)
        return sub


def validate_complex(raw: Iterable[Iterable]) -> SimplicialComplex:
    """Face closure of a list of simplices (maximal simplices suffice)."""
    return SimplicialComplex(closure(raw))


def check_subcomplex(K: SimplicialComplex, A: Iterable[Simplex]) -> None:
    A = frozenset(A)
    extra = A - K.simplices
    if extra:
        raise NotASubcomplex(f"simplex {min(extra, key=_sort_key)} is not in the complex")
    for s in A:
        if len(s) > 1:
            for face in combinations(s, len(s) - 1):
                if face not in A:
                    raise NotASubcomplex(f"face {face} of {s} is missing")


@dataclass(frozen=True)
class FieldConfig:
    p: int = 2

    def __post_init__(self):
        if not gf.is_prime(self.p) or self.p > gf.MAX_PRIME:
            raise MalformedInput(f"field characteristic {self.p} must be a prime below 2**31")


@dataclass(frozen=True, eq=False)
class ChainContext:
    """Ordered simplex bases and boundary matrices of ``K`` over GF(p)."""

    complex: SimplicialComplex
    field: FieldConfig = field(default_factory=FieldConfig)

    @property
    def p(self) -> int:
        return self.field.p

    @cached_property
    def index(self) -> tuple[dict, ...]:
        return tuple({s: k for k, s in enumerate(g)} for g in self.complex.by_dim)

    def size(self, i: int) -> int:
        return len(self.complex.simplices_of_dim(i))

    @cached_property
    def _boundaries(self) -> dict[int, np.ndarray]:
        return {}

    def boundary(self, i: int) -> np.ndarray:
        """``∂_i : C_i -> C_{i-1}`` as a ``(n_{i-1}, n_i)`` matrix; ``∂_0`` has zero rows."""
        if i not in self._boundaries:
            cols = self.complex.simplices_of_dim(i)
            rows = self.complex.simplices_of_dim(i - 1) if i > 0 else ()
            D = np.zeros((len(rows), len(cols)), dtype=np.int64)
            if i > 0:
                row_index = self.index[i - 1]
                for c, s in enumerate(cols):
                    for j in range(len(s)):
                        face = s[:j] + s[j + 1 :]
                        D[row_index[face], c] = (-1) ** j % self.p
            D.setflags(write=False)
            self._boundaries[i] = D
        return self._boundaries[i]

    def _mask(self, A: frozenset, i: int) -> np.ndarray:
        return np.array([s in A for s in self.complex.simplices_of_dim(i)], dtype=bool)

    def cycle_basis(self, A: Iterable[Simplex], i: int) -> np.ndarray:
        """Columns spanning ``Z_i(A)`` inside ``C_i(K)``."""
        A = frozenset(A)
        check_subcomplex(self.complex, A)
        n = self.size(i)
        cols = np.flatnonzero(self._mask(A, i))
        if len(cols) == 0:
            return np.zeros((n, 0), dtype=np.int64)
        D = self.boundary(i)[:, cols]
        kernel = gf.nullspace(D, self.p) if D.shape[0] else np.eye(len(cols), dtype=np.int64)
        out = np.zeros((n, kernel.shape[1]), dtype=np.int64)
        out[cols] = kernel
        return out

    def boundary_basis(self, A: Iterable[Simplex], i: int) -> np.ndarray:
        """Columns forming a basis of ``B_i(A) = ∂_{i+1} C_{i+1}(A)`` inside ``C_i(K)``."""
        A = frozenset(A)
        check_subcomplex(self.complex, A)
        n = self.size(i)
        cols = np.flatnonzero(self._mask(A, i + 1))
        if len(cols) == 0 or n == 0:
            return np.zeros((n, 0), dtype=np.int64)
        return gf.column_basis(self.boundary(i + 1)[:, cols], self.p)


def cycle_basis(ctx: ChainContext, A: Iterable[Simplex], i: int) -> np.ndarray:
    return ctx.cycle_basis(A, i)


def boundary_basis(ctx: ChainContext, A: Iterable[Simplex], i: int) -> np.ndarray:
    return ctx.boundary_basis(A, i)


def dim_intersection(U: np.ndarray, V: np.ndarray, p: int = 2) -> int:
    """``dim(col U ∩ col V) = rank U + rank V - rank [U | V]`` over GF(p)."""
    U = np.asarray(U)
    V = np.asarray(V)
    if U.shape[0] != V.shape[0]:
        raise DimensionMismatch(f"ambient dimensions differ: {U.shape[0]} vs {V.shape[0]}")
    if U.shape[1] == 0 or V.shape[1] == 0:
        return 0
    return gf.rank(U, p) + gf.rank(V, p) - gf.rank(np.hstack([U, V]), p)


def complex_to_dict(K: SimplicialComplex | Sequence[Simplex]) -> dict:
    simplices = K.simplices if isinstance(K, SimplicialComplex) else K
    return {"simplices": [list(s) for s in maximal_simplices(simplices)]}


def maximal_simplices(simplices: Iterable[Simplex]) -> list[Simplex]:
    simplices = frozenset(simplices)
    faces = set()
    for s in simplices:
        for k in range(1, len(s)):
            faces.update(combinations(s, k))
    return sorted(simplices - faces, key=_sort_key)
