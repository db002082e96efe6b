import math

import numpy as np
import pytest
from conftest import fixture
from hypothesis import given, settings
from hypothesis import strategies as st

import gen
from lattice_pd import io
from lattice_pd.birthdeath import IntervalFunction
from lattice_pd.distances import (
    Matching,
    MorphismPath,
    RealEmbedding,
    Step,
    bd_path,
    bottleneck,
    critical_points,
    edit_bounds,
    interpolate,
    interpolation_preimages,
    matching_from_dict,
    matching_norm,
    mobius_path,
    morphism_to_matching,
    path_length,
    witness_path,
)
from lattice_pd.errors import (
    BrokenChain,
    InfiniteMixing,
    InvalidMatching,
    InvalidStep,
    MalformedInput,
    NegativeMass,
    NoEmbedding,
    NotTotallyOrdered,
)
from lattice_pd.filtration import FiltrationMorphism, kan_extend
from lattice_pd.lattice import BoundedLatticeMap, Interval, chain, distortion, identity, lift_map
from lattice_pd.mobius import ChargeMorphism, mobius_invert, persistence_diagram

SIGMA = io.read_function(fixture("ex_matching_sigma.json"))
UPSILON = io.read_function(fixture("ex_matching_upsilon.json"))
TIGHT_SIGMA = io.read_function(fixture("ex_tight_sigma.json"))
TIGHT_TAU = io.read_function(fixture("ex_tight_tau.json"))


def example_matching() -> Matching:
    return matching_from_dict(io.Doc.load(fixture("ex_matching_gamma.json")).data, SIGMA, UPSILON)


def identity_matching(sigma):
    return Matching(sigma, sigma, {(I, I): v for I, v in sigma.items() if v})


# ---------------------------------------------------------------------------
# paths


def test_single_step_path_through_fig1_alpha():
    alpha = io.read_lattice_map(fixture("fig1_alpha.json"))
    zero_p, zero_q = IntervalFunction(alpha.source), IntervalFunction(alpha.target)
    path = MorphismPath("fnc", [Step(ChargeMorphism.from_base(zero_p, zero_q, alpha))])
    assert path_length(path) == 1
    back = MorphismPath("fnc", [Step(path.steps[0].morphism, "bwd")])
    assert back.start == zero_q and back.end == zero_p
    assert path_length(back) == 1


def test_empty_path_has_length_zero():
    assert path_length(MorphismPath("fnc", [], SIGMA)) == 0


def test_example_path_length_is_two():
    # the map collapses 1 and 2 (distance 1) onto 1.5, so each step costs 1
    path = io.read_path(fixture("ex_matching_path.json"))
    assert [distortion(s.morphism.map) for s in path.steps] == [1.0, 1.0]
    assert path_length(path) == 2
    assert path.start == SIGMA and path.end == UPSILON


@pytest.mark.xfail(strict=True, reason="claimed step distortion 0.5 is 1 for the given maps; see notes")
def test_example_path_claimed_length():
    assert path_length(io.read_path(fixture("ex_matching_path.json"))) == 1


def test_path_errors(fig3):
    F, G, alpha = fig3
    m = FiltrationMorphism(F, G, alpha)
    with pytest.raises(InvalidStep):
        path_length(MorphismPath("mon", [Step(m)]))
    with pytest.raises(BrokenChain):
        path_length(MorphismPath("fil", [Step(m), Step(m)], F))
    zero = mobius_invert(IntervalFunction(F.index))
    bad = ChargeMorphism.from_base(zero, IntervalFunction(G.index, {("p", "r"): 1}), alpha, strict=False)
    with pytest.raises(InvalidStep, match="step 0"):
        path_length(MorphismPath("fnc", [Step(bad)]))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_functor_images_keep_length(seed):
    rng = np.random.default_rng(seed)
    path = gen.random_fil_path(rng)
    length = path_length(path)
    for i in range(path.start.complex.dim + 1):
        mon = bd_path(path, i)
        fnc = mobius_path(mon)
        assert path_length(mon) == length == path_length(fnc)


# ---------------------------------------------------------------------------
# embeddings and matchings


def test_embedding_checks():
    with pytest.raises(NotTotallyOrdered):
        RealEmbedding.of(io.read_lattice(fixture("diamond.json")))
    C = chain([0, 1, 3])
    with pytest.raises(NoEmbedding):
        RealEmbedding(C, {"0": 0, "1": 2, "3": 3})
    with pytest.raises(NoEmbedding):
        RealEmbedding(C, {"0": 1, "1": 2, "3": 4})
    assert RealEmbedding.of(C).interval(Interval("1", "3")) == (1.0, 3.0)


def test_matching_marginals():
    with pytest.raises(InvalidMatching):
        Matching(SIGMA, UPSILON, {})
    with pytest.raises(InvalidMatching):
        Matching(SIGMA, UPSILON, {(("0", "1"), ("0", "2")): 2, (("2", "3"), ("1", "3")): 1})
    gamma = example_matching()
    assert matching_norm(gamma) == 1
    assert matching_norm(gamma.transpose()) == 1
    assert matching_norm(identity_matching(SIGMA)) == 0


def test_example_bottlenecks():
    assert bottleneck(SIGMA, UPSILON)[0] == 1
    assert bottleneck(SIGMA, SIGMA)[0] == 0
    value, gamma = bottleneck(TIGHT_SIGMA, TIGHT_TAU)
    assert value == 1
    assert gamma.entries == {(Interval("1", "2"), Interval("0", "3")): 1}


def test_bottleneck_rejects_bad_input():
    neg = IntervalFunction(SIGMA.base, {("0", "1"): -1})
    with pytest.raises(NegativeMass):
        bottleneck(neg, SIGMA)
    D = io.read_lattice(fixture("diamond.json"))
    with pytest.raises(NotTotallyOrdered):
        bottleneck(IntervalFunction(D), IntervalFunction(D))


def test_bottleneck_with_infinite_top():
    C = chain([0, 1, 2, math.inf])
    a = IntervalFunction(C, {("0", "inf"): 1, ("1", "2"): 1})
    b = IntervalFunction(C, {("1", "inf"): 1})
    assert bottleneck(a, b)[0] == 1
    # an unmatched essential bar can only be absorbed at infinite cost
    two = IntervalFunction(C, {("0", "inf"): 2})
    assert bottleneck(two, b)[0] == math.inf


def test_morphism_to_matching_tight_example():
    alpha = io.read_lattice_map(fixture("ex_tight_alpha.json"))
    m = ChargeMorphism.from_base(TIGHT_SIGMA, TIGHT_TAU, alpha)
    gamma = morphism_to_matching(m)
    assert gamma.entries == {(Interval("1", "2"), Interval("0", "3")): 1}
    assert matching_norm(gamma) == 1 and distortion(alpha) == 2
    ident = morphism_to_matching(ChargeMorphism.from_base(SIGMA, SIGMA, identity(SIGMA.base)))
    assert matching_norm(ident) == 0
    assert ident.entries == identity_matching(SIGMA).entries


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_lifted_map_sandwich(seed):
    rng = np.random.default_rng(seed)
    P, Q = gen.random_chain(rng, 6), gen.random_chain(rng, 6)
    maps = [m for m in (gen.search_maps(rng, P, Q) for _ in range(3)) if m is not None]
    ep, eq = RealEmbedding.of(P), RealEmbedding.of(Q)
    for alpha in maps:
        abar = lift_map(alpha)
        move = max(
            max(abs(ep(I.lo) - eq(J.lo)), abs(ep(I.hi) - eq(J.hi)))
            for I, J in zip(abar.source.elements, (abar(I) for I in abar.source.elements))
        )
        d = distortion(abar)
        assert move <= d + 1e-9
        assert d <= 2 * move + 1e-9


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_kan_morphisms_give_matchings(seed):
    rng = np.random.default_rng(seed)
    P = gen.random_chain(rng, 5)
    K = gen.random_complex(rng, 10)
    F = gen.random_filtration(rng, P, K)
    maps = [identity(P)]
    found = gen.search_maps(rng, P, gen.random_chain(rng, 5))
    if found is not None:
        maps.append(found)
    for beta in maps:
        G = kan_extend(F, beta)
        for i in range(K.dim + 1):
            sigma, tau = persistence_diagram(F, i), persistence_diagram(G, i)
            if not (sigma.is_nonnegative() and tau.is_nonnegative()):
                continue
            gamma = morphism_to_matching(ChargeMorphism.from_base(sigma, tau, beta))
            assert matching_norm(gamma) <= distortion(beta) + 1e-9


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_bottleneck_is_a_pseudometric(seed):
    rng = np.random.default_rng(seed)
    P = gen.random_chain(rng, 5)
    a, b, c = (gen.random_diagram(rng, P) for _ in range(3))
    ab, ba = bottleneck(a, b)[0], bottleneck(b, a)[0]
    assert ab == ba
    assert bottleneck(a, a)[0] == 0
    assert bottleneck(a, c)[0] <= ab + bottleneck(b, c)[0] + 1e-9


# ---------------------------------------------------------------------------
# interpolation


def test_example_interpolation():
    gamma = example_matching()
    assert critical_points(gamma) == [0.5]
    mid = interpolate(gamma, 0.5)
    assert {(mid.base.coords[I.lo], mid.base.coords[I.hi]): v for I, v in mid.support().items()} == {
        (0.0, 1.5): 1,
        (1.5, 3.0): 1,
    }
    ends = [interpolate(gamma, t) for t in (0.0, 1.0)]
    for f, g in zip(ends, (SIGMA, UPSILON)):
        emb = RealEmbedding.of(g.base)
        assert {(f.base.coords[I.lo], f.base.coords[I.hi]): v for I, v in f.support().items()} == {
            emb.interval(I): v for I, v in g.support().items()
        }


def test_critical_points_trivial_cases():
    assert critical_points(identity_matching(SIGMA)) == []
    assert critical_points(bottleneck(TIGHT_SIGMA, TIGHT_TAU)[1]) == []
    with pytest.raises(MalformedInput):
        interpolate(example_matching(), 1.5)


def test_infinite_mixing():
    C = chain([0, 2, math.inf])
    a = IntervalFunction(C, {("0", "inf"): 1})
    b = IntervalFunction(C, {("0", "2"): 1})
    gamma = Matching(a, b, {(Interval("0", "inf"), Interval("0", "2")): 1})
    assert matching_norm(gamma) == math.inf
    with pytest.raises(InfiniteMixing):
        interpolate(gamma, 0.5)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_unique_preimages_off_critical_points(seed):
    rng = np.random.default_rng(seed)
    top = float(rng.choice([1.0, 2.0, 3.0]))
    P, Q = gen.chain_with_top(rng, top), gen.chain_with_top(rng, top)
    gamma = bottleneck(gen.random_diagram(rng, P), gen.random_diagram(rng, Q))[1]
    crit = critical_points(gamma)
    for t in rng.uniform(0, 1, size=5):
        if any(abs(t - c) < 1e-6 for c in crit):
            continue
        for K, pairs in interpolation_preimages(gamma, float(t)).items():
            assert len(pairs) <= 1, (K, pairs)


# ---------------------------------------------------------------------------
# witness paths and bounds


def test_witness_for_first_example():
    bounds = edit_bounds(SIGMA, UPSILON)
    assert bounds.lower == 1
    assert bounds.upper == 2 == len(bounds.path)
    for step in bounds.path.steps:
        assert step.morphism.check().ok
    assert bounds.path.start == SIGMA and bounds.path.end == UPSILON


@pytest.mark.xfail(strict=True, reason="claimed edit distance 1 needs step distortion 0.5; see notes")
def test_witness_for_first_example_claimed_bounds():
    bounds = edit_bounds(SIGMA, UPSILON)
    assert (bounds.lower, bounds.upper) == (1, 1)


def test_witness_for_second_example():
    bounds = edit_bounds(TIGHT_SIGMA, TIGHT_TAU)
    assert (bounds.lower, bounds.upper) == (1, 2)
    assert bounds.top_gap == 0


def test_witness_for_identical_functions():
    bounds = edit_bounds(SIGMA, SIGMA)
    assert (bounds.lower, bounds.upper) == (0, 0)
    assert len(witness_path(SIGMA, SIGMA, identity_matching(SIGMA))) == 0


def test_different_tops_give_a_larger_lower_bound():
    # zero diagrams on [0,1] and [0,2]: no bars to match, yet every bounded map
    # between the chains moves the top by 1
    P, Q = chain([0, 1]), chain([0, 2])
    bounds = edit_bounds(IntervalFunction(P), IntervalFunction(Q))
    assert bounds.lower == 0 and bounds.top_gap == 1
    assert bounds.upper >= bounds.top_gap
    assert distortion(BoundedLatticeMap(P, Q, {"0": "0", "1": "2"})) == 1


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_sandwich_on_equal_tops(seed):
    rng = np.random.default_rng(seed)
    top = float(rng.choice([1.0, 2.0, 3.0, 4.0]))
    P, Q = gen.chain_with_top(rng, top), gen.chain_with_top(rng, top)
    sigma, tau = gen.random_diagram(rng, P), gen.random_diagram(rng, Q)
    bounds = edit_bounds(sigma, tau)
    assert bounds.lower <= bounds.upper + 1e-9
    assert bounds.upper <= 2 * bounds.lower + 1e-9
    assert all(step.morphism.check().ok for step in bounds.path.steps)
    assert bounds.path.start == sigma and bounds.path.end == tau
