import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import gen
from lattice_pd.complex import closure, validate_complex
from lattice_pd.errors import InvalidMorphism, LatticeMismatch, NotComposable, NotMonotone, TopNotFull
from lattice_pd.filtration import (
    Filtration,
    FiltrationMorphism,
    check_filtration_morphism,
    compose_filtration_morphisms,
    constant_filtration,
    kan_extend,
    terminal_filtration,
    terminal_morphism,
    validate_filtration,
)
from lattice_pd.lattice import chain, compose, identity, point_lattice, terminal_map


def test_fig3_triple_is_valid(fig3):
    F, G, alpha = fig3
    assert check_filtration_morphism(F, G, alpha).ok
    FiltrationMorphism(F, G, alpha)


def test_kan_extension_reproduces_fig3(fig3):
    F, G, alpha = fig3
    assert kan_extend(F, alpha) == G
    assert kan_extend(F, identity(F.index)) == F


def test_kan_to_point_is_terminal(fig3):
    F, _, _ = fig3
    H = kan_extend(F, terminal_map(F.index, point_lattice()))
    assert H == terminal_filtration(F)
    assert H.stages["*"] == F.complex.simplices


def test_removed_simplex_reported(fig3):
    F, G, alpha = fig3
    broken = dict(G.stages)
    broken["r"] = closure([[0, 1], [1, 2], [0, 2]])
    with pytest.raises(TopNotFull):
        Filtration(G.index, G.complex, broken)
    # a non-top violation is reported element by element
    stages = dict(G.stages)
    stages["p"] = closure([[0, 1], [1, 2]])
    G2 = Filtration(G.index, G.complex, stages)
    report = check_filtration_morphism(F, G2, alpha)
    assert [v["element"] for v in report.violations] == ["p"]
    assert report.violations[0]["missing"] == [(0, 2)]
    with pytest.raises(InvalidMorphism):
        FiltrationMorphism(F, G2, alpha)


def test_constant_filtration_and_identity(fig3):
    F, _, _ = fig3
    C = constant_filtration(F.index, F.complex)
    assert check_filtration_morphism(C, C, identity(F.index)).ok
    assert check_filtration_morphism(F, F, identity(F.index)).ok


def test_swapped_chain_is_not_monotone():
    P = chain([0, 1, 2])
    K = validate_complex([[0, 1]])
    with pytest.raises(NotMonotone):
        validate_filtration(P, K, {"0": [[0, 1]], "1": [[0]], "2": [[0, 1]]})


def test_lattice_mismatch(fig3):
    F, G, alpha = fig3
    with pytest.raises(LatticeMismatch):
        check_filtration_morphism(G, F, alpha)


def test_composition(fig3):
    F, G, alpha = fig3
    m = FiltrationMorphism(F, G, alpha)
    both = compose_filtration_morphisms(m, terminal_morphism(G))
    assert both.check().ok
    ident = FiltrationMorphism(F, F, identity(F.index))
    assert compose_filtration_morphisms(ident, m).map == m.map
    with pytest.raises(NotComposable):
        compose_filtration_morphisms(m, m)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_kan_extensions(seed):
    rng = np.random.default_rng(seed)
    P = gen.random_lattice(rng, 7)
    K = gen.random_complex(rng, 14)
    F = gen.random_filtration(rng, P, K)
    m1 = gen.kan_morphism(rng, F)
    assert m1.check().ok
    assert m1.target.stages[m1.target.index.top] == K.simplices
    m2 = gen.kan_morphism(rng, m1.target)
    composite = compose_filtration_morphisms(m1, m2)
    assert check_filtration_morphism(F, m2.target, composite.map).ok
    assert kan_extend(m1.target, m2.map) == kan_extend(F, compose(m2.map, m1.map))
