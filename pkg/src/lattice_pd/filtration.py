"""Lattice-indexed filtrations and filtration-preserving morphisms."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Hashable, Iterable, Mapping

from .complex import SimplicialComplex, check_subcomplex, closure, complex_to_dict, maximal_simplices
from .errors import (
    InvalidMorphism,
    LatticeMismatch,
    MalformedInput,
    NotComposable,
    NotMonotone,
    TopNotFull,
)
from .lattice import (
    BoundedLatticeMap,
    FiniteMetricLattice,
    compose,
    lattice_to_dict,
    point_lattice,
    terminal_map,
)


@dataclass(frozen=True)
class Report:
    """Outcome of a morphism or property check; ``violations`` lists every failure."""

    violations: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def to_dict(self) -> dict:
        return {"valid": self.ok, "violations": [dict(v) for v in self.violations]}


class Filtration:
    """A monotone assignment of subcomplexes of ``complex`` to elements of ``index``.

    Subcomplexes are stored as explicit face-closed simplex sets.
    """

    def __init__(
        self,
        index: FiniteMetricLattice,
        complex: SimplicialComplex,
        assignment: Mapping[Hashable, Iterable],
    ):
        self.index = index
        self.complex = complex
        stages = {}
        for a in index.elements:
            if a not in assignment:
                raise MalformedInput(f"filtration has no subcomplex for element {a!r}")
            sub = frozenset(assignment[a])
            check_subcomplex(complex, sub)
            stages[a] = sub
        self.stages = stages
        top = stages[index.top]
        if top != complex.simplices:
            missing = sorted(complex.simplices - top, key=lambda s: (len(s), s))
            raise TopNotFull(f"F(top) misses {len(missing)} simplices, e.g. {missing[0]}")
        L = index.leq
        for i, a in enumerate(index.elements):
            for j, b in enumerate(index.elements):
                if i != j and L[i, j] and not stages[a] <= stages[b]:
                    raise NotMonotone(f"{a!r} <= {b!r} but F({a!r}) is not contained in F({b!r})")

    def __call__(self, a) -> frozenset:
        return self.stages[self.index.elements[self.index.index(a)]]

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, Filtration):
            return NotImplemented
        return (
            self.index == other.index
            and self.complex == other.complex
            and all(self.stages[a] == other.stages[a] for a in self.index.elements)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"Filtration(|P|={len(self.index)}, |K|={len(self.complex)})"


def validate_filtration(
    index: FiniteMetricLattice,
    complex: SimplicialComplex,
    assignment: Mapping[Hashable, Iterable[Iterable]],
) -> Filtration:
    """Build a filtration from generating simplices per element (faces are added)."""
    return Filtration(index, complex, {a: closure(s) for a, s in assignment.items()})


def constant_filtration(index: FiniteMetricLattice, complex: SimplicialComplex) -> Filtration:
    return Filtration(index, complex, {a: complex.simplices for a in index.elements})


def check_filtration_morphism(F: Filtration, G: Filtration, alpha: BoundedLatticeMap) -> Report:
    """Check ``G(a) == F(max alpha^{-1}[bottom, a])`` for every ``a`` in the target lattice."""
    if alpha.source != F.index or alpha.target != G.index:
        raise LatticeMismatch("map does not run between the index lattices of the filtrations")
    if F.complex != G.complex:
        raise LatticeMismatch("filtrations are of different complexes")
    P = alpha.source
    violations = []
    for a, star in zip(G.index.elements, alpha.preimage_max_indices):
        a_star = P.elements[star]
        want = F.stages[a_star]
        have = G.stages[a]
        if have != want:
            violations.append(
                {
                    "element": a,
                    "preimage_max": a_star,
                    "missing": sorted(want - have),
                    "extra": sorted(have - want),
                }
            )
    return Report(tuple(violations))


def kan_extend(F: Filtration, alpha: BoundedLatticeMap) -> Filtration:
    """The filtration ``G(a) = F(max alpha^{-1}[bottom, a])`` over the target of ``alpha``."""
    if alpha.source != F.index:
        raise LatticeMismatch("map source is not the filtration's index lattice")
    P = alpha.source
    stages = {
        a: F.stages[P.elements[star]] for a, star in zip(alpha.target.elements, alpha.preimage_max_indices)
    }
    return Filtration(alpha.target, F.complex, stages)


def terminal_filtration(F: Filtration) -> Filtration:
    point = point_lattice()
    return Filtration(point, F.complex, {point.top: F.complex.simplices})


@dataclass(frozen=True, eq=False)
class FiltrationMorphism:
    source: Filtration
    target: Filtration
    map: BoundedLatticeMap
    check_on_init: bool = field(default=True, repr=False)

    def __post_init__(self):
        if self.check_on_init:
            report = self.check()
            if not report:
                raise InvalidMorphism(f"not a filtration-preserving morphism: {list(report.violations)[:3]}")

    def check(self) -> Report:
        return check_filtration_morphism(self.source, self.target, self.map)


def compose_filtration_morphisms(m1: FiltrationMorphism, m2: FiltrationMorphism) -> FiltrationMorphism:
    """``m2 ∘ m1``; valid whenever both parts are."""
    if m1.target != m2.source:
        raise NotComposable("target of the first morphism is not the source of the second")
    return FiltrationMorphism(m1.source, m2.target, compose(m2.map, m1.map))


def terminal_morphism(F: Filtration) -> FiltrationMorphism:
    omega = terminal_filtration(F)
    return FiltrationMorphism(F, omega, terminal_map(F.index, omega.index))


def filtration_to_dict(F: Filtration) -> dict[str, Any]:
    return {
        "lattice": lattice_to_dict(F.index),
        "complex": complex_to_dict(F.complex),
        "assignment": {
            str(a): [list(s) for s in maximal_simplices(F.stages[a])] for a in F.index.elements
        },
    }
