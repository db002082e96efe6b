"""One-parameter filtrations: the signed-sum diagram from ranks of induced maps.

Stages are the ordinals ``1 < ... < n < inf``; the real filtration values only
enter through the embedding coordinates.
"""

from __future__ import annotations

import math
from typing import Any, Mapping, Sequence

import numpy as np

from . import gf
from .birthdeath import IntervalFunction, bd, chain_context
from .complex import FieldConfig, SimplicialComplex, validate_complex
from .errors import Empty, MalformedInput, NotClassicalIndex, NotIncreasing
from .filtration import Filtration, Report, validate_filtration
from .lattice import FiniteMetricLattice, Interval, chain
from .mobius import mobius_invert

TOP = "inf"


def classical_lattice(values: Sequence[float]) -> FiniteMetricLattice:
    """Chain ``1 < ... < n < inf`` with ``d(a, b) = |r_a - r_b|`` and ``d(a, inf) = inf``."""
    rs = [float(v) for v in values]
    if not rs:
        raise Empty("need at least one filtration value")
    if any(not math.isfinite(r) for r in rs):
        raise NotIncreasing("filtration values must be finite")
    for k, (a, b) in enumerate(zip(rs, rs[1:]), start=1):
        if not a < b:
            raise NotIncreasing(f"value {k + 1} ({b}) does not exceed value {k} ({a})")
    names = [str(k) for k in range(1, len(rs) + 1)] + [TOP]
    return chain([r - rs[0] for r in rs] + [math.inf], names)


def _stages(P: FiniteMetricLattice) -> list:
    """Finite stages in order; raises unless ``P`` looks like a classical index."""
    if not P.is_chain or P.coords is None or len(P) < 2:
        raise NotClassicalIndex("index is not a chain 1 < ... < n < inf with coordinates")
    order = [P.elements[k] for k in P.linear_extension]
    *finite, top = order
    if not math.isinf(P.coords[top]) or any(math.isinf(P.coords[a]) for a in finite):
        raise NotClassicalIndex("only the top stage may sit at infinity")
    return finite


def classical_pd_signed(F: Filtration, i: int, field: FieldConfig | int = 2) -> IntervalFunction:
    """Signed sums of ranks ``rank H_i F(a <= b)`` on strict intervals.

    The rank is ``dim Z(a) - dim(Z(a) ∩ B(b))``; any index below the first
    stage stands for the empty complex.  Diagonal values are copied from the
    Möbius inversion of the birth-death function.
    """
    P = F.index
    stages = _stages(P)
    p = field.p if isinstance(field, FieldConfig) else int(field)
    ctx = chain_context(F.complex, p)
    Z = [ctx.cycle_basis(F.stages[a], i) for a in stages]
    B = [ctx.boundary_basis(F.stages[a], i) for a in stages]
    n = len(stages)

    def rk(a: int, b: int) -> int:
        # a, b are 0-based positions; a == -1 is the empty stage
        if a < 0:
            return 0
        z, bb = Z[a], B[b]
        if z.shape[1] == 0:
            return 0
        joint = gf.rank(np.hstack([z, bb]), p) if bb.shape[1] else z.shape[1]
        return joint - (gf.rank(bb, p) if bb.shape[1] else 0)

    values: dict[Interval, int] = {}
    for a in range(n):
        for b in range(a + 1, n):
            values[Interval(stages[a], stages[b])] = (
                rk(a, b - 1) - rk(a - 1, b - 1) - rk(a, b) + rk(a - 1, b)
            )
        values[Interval(stages[a], P.top)] = rk(a, n - 1) - rk(a - 1, n - 1)
    diag = mobius_invert(bd(F, i, p))
    for a in list(stages) + [P.top]:
        values[Interval(a, a)] = diag[(a, a)]
    return IntervalFunction(P, values)


def check_classical_equivalence(F: Filtration, i: int, field: FieldConfig | int = 2) -> Report:
    """Compare the signed-sum diagram with the Möbius diagram on every strict interval."""
    signed = classical_pd_signed(F, i, field)
    p = field.p if isinstance(field, FieldConfig) else int(field)
    mob = mobius_invert(bd(F, i, p))
    violations = tuple(
        {"interval": I, "signed": v, "mobius": mob[I]}
        for I, v in signed.items()
        if I.lo != I.hi and v != mob[I]
    )
    return Report(violations)


def validate_classical_filtration(raw: Mapping[str, Any], complex: SimplicialComplex | None = None) -> Filtration:
    """Read ``{"values", "complex", "assignment"}``; a missing ``inf`` stage is the full complex."""
    try:
        values = raw["values"]
        assignment = dict(raw["assignment"])
    except (KeyError, TypeError):
        raise MalformedInput("classical filtration needs 'values' and 'assignment'") from None
    P = classical_lattice(values)
    if complex is None:
        if "complex" not in raw:
            raise MalformedInput("classical filtration needs a 'complex'")
        complex = validate_complex(raw["complex"]["simplices"])
    assignment = {str(k): v for k, v in assignment.items()}
    assignment.setdefault(TOP, [list(s) for s in complex.simplices])
    unknown = set(assignment) - set(P.elements)
    if unknown:
        raise MalformedInput(f"assignment names unknown stages {sorted(unknown)}")
    return validate_filtration(P, complex, assignment)
