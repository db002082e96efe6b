import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import gen
from lattice_pd.birthdeath import IntervalFunction, bd, bd_morphism
from lattice_pd.errors import InvalidMorphism, LatticeMismatch, NotComposable
from lattice_pd.filtration import FiltrationMorphism
from lattice_pd.lattice import Interval, chain, identity, lift_map, point_lattice, terminal_map
from lattice_pd.mobius import (
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


def test_fig3_diagram(fig3):
    F, _, _ = fig3
    sigma = persistence_diagram(F, 1)
    assert sigma.support() == {Interval("b", "d"): 1, Interval("c", "d"): 1, Interval("d", "d"): -1}


def test_fig6_diagram(fig6):
    sigma = persistence_diagram(fig6, 0)
    assert sigma.support() == {
        Interval("a", "d"): 1,
        Interval("b", "d"): 1,
        Interval("c", "c"): 1,
        Interval("d", "d"): -1,
    }


def test_zero_and_delta():
    P = chain([0, 1, 2])
    zero = IntervalFunction(P)
    assert mobius_invert(zero) == zero
    assert mobius_sum(zero) == zero
    delta = IntervalFunction(P, {(P.bottom, P.bottom): 1})
    assert set(mobius_sum(delta).values) == {1}


def test_fig4_round_trip(fig3):
    F, G, _ = fig3
    for f in (bd(F, 1), bd(G, 1), bd(F, 0)):
        assert mobius_sum(mobius_invert(f)) == f
        assert mobius_invert(mobius_sum(f)) == f


def test_fig5_charge_morphism(fig3):
    F, G, alpha = fig3
    sigma, tau = persistence_diagram(F, 1), persistence_diagram(G, 1)
    abar = lift_map(alpha)
    assert check_charge_morphism(sigma, tau, abar).ok
    pushed = pushforward(sigma, abar)
    assert all(pushed[I] == tau[I] for I, _ in tau.items() if I.lo != I.hi)
    m = mobius_morphism(bd_morphism(FiltrationMorphism(F, G, alpha), 1))
    assert m.source == sigma and m.target == tau


def test_pushforward_trivial_cases(fig3):
    F, _, _ = fig3
    sigma = persistence_diagram(F, 1)
    assert pushforward(sigma, lift_map(identity(F.index))) == sigma
    point = point_lattice()
    omega = pushforward(sigma, lift_map(terminal_map(F.index, point)))
    assert omega.values == (sigma.total(),) == (1,)
    with pytest.raises(LatticeMismatch):
        pushforward(IntervalFunction(chain([0, 1])), lift_map(identity(F.index)))


def test_perturbed_target_has_one_violation(fig3):
    F, G, alpha = fig3
    sigma, tau = persistence_diagram(F, 1), persistence_diagram(G, 1)
    bumped = tau.as_dict()
    bumped[Interval("p", "r")] += 1
    report = check_charge_morphism(sigma, IntervalFunction(G.index, bumped), lift_map(alpha))
    assert len(report.violations) == 1
    assert report.violations[0]["interval"] == Interval("p", "r")
    # diagonal targets are exempt
    diag = tau.as_dict()
    diag[Interval("q", "q")] += 5
    assert check_charge_morphism(sigma, IntervalFunction(G.index, diag), lift_map(alpha)).ok
    with pytest.raises(InvalidMorphism):
        ChargeMorphism(sigma, IntervalFunction(G.index, bumped), lift_map(alpha))


def test_composition(fig3):
    F, G, alpha = fig3
    sigma, tau = persistence_diagram(F, 1), persistence_diagram(G, 1)
    m = ChargeMorphism.from_base(sigma, tau, alpha)
    t = terminal_charge(tau)
    both = compose_charge_morphisms(m, t)
    assert both.check().ok and both.target.values == (tau.total(),)
    ident = ChargeMorphism.from_base(sigma, sigma, identity(F.index))
    assert compose_charge_morphisms(ident, m).map == m.map
    with pytest.raises(NotComposable):
        compose_charge_morphisms(m, m)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_round_trip_random(seed):
    rng = np.random.default_rng(seed)
    P = gen.random_lattice(rng, 8)
    f = gen.random_interval_function(rng, P)
    sigma = mobius_invert(f)
    assert mobius_sum(sigma) == f
    assert mobius_invert(mobius_sum(f)) == f
    assert sigma.total() == f[(P.top, P.top)]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 3]))
def test_functor_law_all_intervals(seed, p):
    rng = np.random.default_rng(seed)
    P = gen.random_lattice(rng, 6)
    K = gen.random_complex(rng, 12)
    F = gen.random_filtration(rng, P, K)
    m1 = gen.kan_morphism(rng, F)
    m2 = gen.kan_morphism(rng, m1.target)
    for i in range(K.dim + 1):
        c1 = mobius_morphism(bd_morphism(m1, i, p))
        c2 = mobius_morphism(bd_morphism(m2, i, p))
        assert pushforward(c1.source, c1.map) == c1.target
        assert compose_charge_morphisms(c1, c2).check().ok
        assert compose_charge_morphisms(c1, terminal_charge(c1.target)).check().ok
