"""Möbius inversion on interval lattices and charge-preserving morphisms."""

from __future__ import annotations

from dataclasses import dataclass, field

from .birthdeath import IntervalFunction, MonMorphism, _check_lattices, bd, require_lifted
from .errors import InvalidMorphism, LatticeMismatch, NotComposable
from .filtration import Report
from .lattice import BoundedLatticeMap, compose, lift_map, point_lattice, terminal_map


def mobius_invert(f: IntervalFunction) -> IntervalFunction:
    """The unique ``sigma`` with ``f(J) = sum(sigma(I) for I ⪯ J)``."""
    L = f.lattice
    sigma = [0] * len(L)
    for j in L.linear_extension:
        below = L.leq[:, j]
        acc = f.values[j]
        for i in map(int, below.nonzero()[0]):
            if i != j:
                acc -= sigma[i]
        sigma[j] = acc
    return IntervalFunction(f.base, sigma)


def mobius_sum(sigma: IntervalFunction) -> IntervalFunction:
    """Down-set sums ``f(J) = sum(sigma(I) for I ⪯ J)``."""
    L = sigma.lattice
    vals = [sum(sigma.values[i] for i in map(int, L.leq[:, j].nonzero()[0])) for j in range(len(L))]
    return IntervalFunction(sigma.base, vals)


def persistence_diagram(F, i: int, field=2) -> IntervalFunction:
    return mobius_invert(bd(F, i, field))


def pushforward(sigma: IntervalFunction, alpha_bar: BoundedLatticeMap) -> IntervalFunction:
    """``tau(I) = sum of sigma over alpha_bar^{-1}(I)``, on every interval including diagonals."""
    if alpha_bar.source != sigma.lattice:
        raise LatticeMismatch("map source is not the function's interval lattice")
    base = require_lifted(alpha_bar)
    src = alpha_bar.source.elements
    out = [0] * len(alpha_bar.target)
    for k, J in zip(alpha_bar.images, src):
        out[k] += sigma.values[sigma.lattice.index(J)]
    return IntervalFunction(base.target, out)


def check_charge_morphism(sigma: IntervalFunction, tau: IntervalFunction, alpha_bar: BoundedLatticeMap) -> Report:
    """Check the pushforward identity on every non-diagonal interval of the target."""
    _check_lattices(sigma, tau, alpha_bar)
    pushed = pushforward(sigma, alpha_bar)
    violations = []
    for I, v in tau.items():
        if I.lo == I.hi:
            continue
        w = pushed[I]
        if v != w:
            violations.append({"kind": "charge", "interval": I, "expected": w, "found": v})
    return Report(tuple(violations))


@dataclass(frozen=True, eq=False)
class ChargeMorphism:
    source: IntervalFunction
    target: IntervalFunction
    map: BoundedLatticeMap
    strict: bool = field(default=True, repr=False)

    def __post_init__(self):
        if self.strict and not self.check():
            raise InvalidMorphism("not a charge-preserving morphism")

    @classmethod
    def from_base(cls, sigma, tau, alpha: BoundedLatticeMap, strict: bool = True) -> ChargeMorphism:
        return cls(sigma, tau, lift_map(alpha), strict)

    def check(self) -> Report:
        return check_charge_morphism(self.source, self.target, self.map)


def mobius_morphism(m: MonMorphism) -> ChargeMorphism:
    """Image of a monotone-preserving morphism under Möbius inversion."""
    return ChargeMorphism(mobius_invert(m.source), mobius_invert(m.target), m.map)


def compose_charge_morphisms(m1: ChargeMorphism, m2: ChargeMorphism) -> ChargeMorphism:
    """``m2 ∘ m1``."""
    if m1.target != m2.source:
        raise NotComposable("target of the first morphism is not the source of the second")
    base = compose(require_lifted(m2.map), require_lifted(m1.map))
    return ChargeMorphism(m1.source, m2.target, lift_map(base))


def terminal_charge(sigma: IntervalFunction) -> ChargeMorphism:
    """Morphism to the one-point function carrying the total mass."""
    point = point_lattice()
    omega = IntervalFunction(point, [sigma.total()])
    return ChargeMorphism(sigma, omega, lift_map(terminal_map(sigma.base, point)))
