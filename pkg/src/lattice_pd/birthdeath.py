"""Integer functions on interval lattices and the birth-death functor."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from numbers import Integral
from typing import Any, Iterator, Mapping, Sequence

from .complex import ChainContext, FieldConfig, SimplicialComplex, dim_intersection
from .errors import InvalidMorphism, LatticeMismatch, MalformedInput, MapNotLifted
from .filtration import Filtration, Report
from .lattice import (
    BoundedLatticeMap,
    FiniteMetricLattice,
    Interval,
    base_of_lifted,
    lattice_to_dict,
    lift_map,
    point_lattice,
    terminal_map,
)


def _as_int(v) -> int:
    if isinstance(v, bool):
        raise MalformedInput(f"value {v!r} is not an integer")
    if isinstance(v, Integral):
        return int(v)
    if isinstance(v, float) and v.is_integer():
        return int(v)
    raise MalformedInput(f"value {v!r} is not an integer")


class IntervalFunction:
    """An integer-valued function on the interval lattice of ``base``.

    Values are plain Python ints, so sums never overflow.  Missing intervals
    default to 0.
    """

    def __init__(
        self,
        base: FiniteMetricLattice,
        values: Mapping[Any, int] | Sequence[int] | None = None,
        *,
        monotone: bool = False,
    ):
        self.base = base
        self.lattice = base.intervals
        n = len(self.lattice)
        if values is None:
            vals = [0] * n
        elif isinstance(values, Mapping):
            vals = [0] * n
            for key, v in values.items():
                vals[self.lattice.index(Interval(*key))] = _as_int(v)
        else:
            vals = [_as_int(v) for v in values]
            if len(vals) != n:
                raise MalformedInput(f"expected {n} values, got {len(vals)}")
        self.values = tuple(vals)
        self.monotone = monotone

    def __getitem__(self, key) -> int:
        return self.values[self.lattice.index(Interval(*key))]

    def items(self) -> Iterator[tuple[Interval, int]]:
        return zip(self.lattice.elements, self.values)

    def support(self) -> dict[Interval, int]:
        return {I: v for I, v in self.items() if v != 0}

    def total(self) -> int:
        return sum(self.values)

    def is_nonnegative(self) -> bool:
        return all(v >= 0 for v in self.values)

    def as_dict(self) -> dict[Interval, int]:
        return dict(self.items())

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, IntervalFunction):
            return NotImplemented
        if self.base != other.base:
            return False
        return all(other[I] == v for I, v in self.items())

    __hash__ = None

    def __repr__(self) -> str:
        body = ", ".join(f"{I}: {v}" for I, v in self.support().items())
        return f"IntervalFunction({{{body}}})"

    def to_dict(self, full: bool = False) -> dict:
        rows = [[str(I.lo), str(I.hi), v] for I, v in self.items() if full or v != 0]
        return {"lattice": lattice_to_dict(self.base), "values": rows}


def validate_interval_function(raw: Mapping[str, Any], base: FiniteMetricLattice) -> IntervalFunction:
    values = {}
    for row in raw.get("values", []):
        if len(row) != 3:
            raise MalformedInput("function values are [lo, hi, int] rows")
        lo, hi, v = row
        key = (str(lo), str(hi))
        if key in values:
            raise MalformedInput(f"interval [{lo},{hi}] listed twice")
        values[key] = v
    return IntervalFunction(base, values)


# ---------------------------------------------------------------------------
# birth-death functor


@lru_cache(maxsize=64)
def chain_context(K: SimplicialComplex, p: int = 2) -> ChainContext:
    return ChainContext(K, FieldConfig(p))


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("LATTICE_PD_THREADS", "1")))
    except ValueError:
        return 1


def bd(F: Filtration, i: int, field: FieldConfig | int = 2) -> IntervalFunction:
    """The ``i``-th birth-death function of ``F``.

    ``[a, b]`` with ``b`` not the top maps to ``dim(Z_i F(a) ∩ B_i F(b))``;
    ``[a, top]`` maps to ``dim Z_i F(a)``.
    """
    p = field.p if isinstance(field, FieldConfig) else int(field)
    ctx = chain_context(F.complex, p)
    P = F.index
    Z = {a: ctx.cycle_basis(F.stages[a], i) for a in P.elements}
    B = {b: ctx.boundary_basis(F.stages[b], i) for b in P.elements}
    top = P.top

    def value(I: Interval) -> int:
        if I.hi == top:
            return Z[I.lo].shape[1]
        return dim_intersection(Z[I.lo], B[I.hi], p)

    intervals = P.intervals.elements
    if _threads() > 1 and len(intervals) > 1:
        with ThreadPoolExecutor(max_workers=_threads()) as pool:
            vals = list(pool.map(value, intervals))
    else:
        vals = [value(I) for I in intervals]
    return IntervalFunction(P, vals, monotone=True)


def check_monotone(f: IntervalFunction) -> Report:
    """Every comparable pair ``I ⪯ J`` with ``f(I) > f(J)``."""
    L = f.lattice
    violations = []
    for i, I in enumerate(L.elements):
        for j, J in enumerate(L.elements):
            if i != j and L.leq[i, j] and f.values[i] > f.values[j]:
                violations.append({"kind": "not_monotone", "lower": I, "upper": J,
                                   "values": (f.values[i], f.values[j])})
    return Report(tuple(violations))


def require_lifted(alpha_bar: BoundedLatticeMap) -> BoundedLatticeMap:
    base = base_of_lifted(alpha_bar)
    if base is None:
        raise MapNotLifted("map between interval lattices is not induced by a map of the base lattices")
    return base


def _check_lattices(f: IntervalFunction, g: IntervalFunction, alpha_bar: BoundedLatticeMap) -> None:
    if alpha_bar.source != f.lattice or alpha_bar.target != g.lattice:
        raise LatticeMismatch("map does not run between the interval lattices of the two functions")
    require_lifted(alpha_bar)


def check_mon_morphism(f: IntervalFunction, g: IntervalFunction, alpha_bar: BoundedLatticeMap) -> Report:
    """Check ``g(I) == f(max alpha_bar^{-1}[bottom, I])`` for every ``I``, and monotonicity of both ends."""
    _check_lattices(f, g, alpha_bar)
    violations = [dict(v, side="source") for v in check_monotone(f).violations]
    violations += [dict(v, side="target") for v in check_monotone(g).violations]
    src = alpha_bar.source.elements
    for I, gv, star in zip(g.lattice.elements, g.values, alpha_bar.preimage_max_indices):
        fv = f.values[f.lattice.index(src[star])]
        if fv != gv:
            violations.append({"kind": "kan_axiom", "interval": I, "preimage_max": src[star],
                               "expected": fv, "found": gv})
    return Report(tuple(violations))


@dataclass(frozen=True, eq=False)
class MonMorphism:
    source: IntervalFunction
    target: IntervalFunction
    map: BoundedLatticeMap
    strict: bool = field(default=True, repr=False)

    def __post_init__(self):
        if self.strict and not self.check():
            raise InvalidMorphism("not a monotone-preserving morphism")

    @classmethod
    def from_base(cls, f, g, alpha: BoundedLatticeMap, strict: bool = True) -> MonMorphism:
        return cls(f, g, lift_map(alpha), strict)

    def check(self) -> Report:
        return check_mon_morphism(self.source, self.target, self.map)


def bd_morphism(m, i: int, field: FieldConfig | int = 2) -> MonMorphism:
    """Image of a filtration-preserving morphism under the birth-death functor."""
    return MonMorphism(bd(m.source, i, field), bd(m.target, i, field), lift_map(m.map))


def terminal_mon(f: IntervalFunction) -> MonMorphism:
    """The unique morphism to the one-point function ``e[*, *] = f[top, top]``."""
    point = point_lattice()
    e = IntervalFunction(point, [f[(f.base.top, f.base.top)]], monotone=True)
    return MonMorphism(f, e, lift_map(terminal_map(f.base, point)))
