"""Persistence diagrams of filtrations indexed by finite metric lattices.

The pipeline runs filtration -> birth-death function -> Möbius inversion, and
every stage is functorial: morphisms of filtrations induce morphisms of
birth-death functions and of diagrams with the same distortion.
"""

from .birthdeath import (
    IntervalFunction,
    MonMorphism,
    bd,
    bd_morphism,
    check_mon_morphism,
    check_monotone,
    terminal_mon,
)
from .classical import check_classical_equivalence, classical_lattice, classical_pd_signed
from .complex import (
    ChainContext,
    FieldConfig,
    SimplicialComplex,
    boundary_basis,
    cycle_basis,
    dim_intersection,
    validate_complex,
)
from .distances import (
    Matching,
    MorphismPath,
    RealEmbedding,
    Step,
    bd_path,
    bottleneck,
    critical_points,
    edit_bounds,
    interpolate,
    matching_norm,
    mobius_path,
    morphism_to_matching,
    path_length,
    witness_path,
)
from .errors import LatticePDError
from .filtration import (
    Filtration,
    FiltrationMorphism,
    Report,
    check_filtration_morphism,
    compose_filtration_morphisms,
    kan_extend,
    terminal_morphism,
    validate_filtration,
)
from .lattice import (
    BoundedLatticeMap,
    FiniteMetricLattice,
    Interval,
    build_lattice,
    chain,
    compose,
    distortion,
    hasse_metric,
    identity,
    interval_lattice,
    lift_map,
    preimage_max,
    terminal_map,
    validate_lattice,
)
from .mobius import (
    ChargeMorphism,
    check_charge_morphism,
    compose_charge_morphisms,
    mobius_invert,
    mobius_morphism,
    mobius_sum,
    persistence_diagram,
    pushforward,
    terminal_charge,
)

from types import ModuleType as _Module

__all__ = [n for n, v in list(globals().items()) if not n.startswith("_") and not isinstance(v, _Module)]
