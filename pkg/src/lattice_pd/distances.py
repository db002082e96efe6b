"""Edit-path lengths, bottleneck matchings and the matching interpolation.

Bottleneck and interpolation work on functions over totally ordered lattices
embedded isometrically in the reals with the bottom at 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence

import networkx as nx
import numpy as np

from .birthdeath import IntervalFunction, MonMorphism, bd, bd_morphism
from .complex import FieldConfig
from .errors import (
    BrokenChain,
    InfiniteMixing,
    InvalidMatching,
    InvalidMorphism,
    InvalidStep,
    MalformedInput,
    NegativeMass,
    NoEmbedding,
    NotTotallyOrdered,
)
from .filtration import FiltrationMorphism
from .lattice import (
    METRIC_RTOL,
    BoundedLatticeMap,
    FiniteMetricLattice,
    Interval,
    chain,
    distortion,
    ext_absdiff,
    format_coord,
)
from .mobius import ChargeMorphism, mobius_invert, mobius_morphism

# crossings of interpolated endpoints closer than this (in t) are merged
T_TOL = 1e-9
# slack when comparing float path lengths against matching norms
LENGTH_TOL = 1e-9

CATEGORIES = {"fil": FiltrationMorphism, "mon": MonMorphism, "fnc": ChargeMorphism}


# ---------------------------------------------------------------------------
# paths


@dataclass(frozen=True)
class Step:
    morphism: FiltrationMorphism | MonMorphism | ChargeMorphism
    direction: str = "fwd"

    def __post_init__(self):
        if self.direction not in ("fwd", "bwd"):
            raise MalformedInput(f"step direction must be 'fwd' or 'bwd', not {self.direction!r}")

    @property
    def tail(self):
        return self.morphism.source if self.direction == "fwd" else self.morphism.target

    @property
    def head(self):
        return self.morphism.target if self.direction == "fwd" else self.morphism.source


@dataclass
class MorphismPath:
    """A zigzag of morphisms in one category, starting at ``start``."""

    category: str
    steps: list[Step] = field(default_factory=list)
    start: object = None

    def __post_init__(self):
        if self.category not in CATEGORIES:
            raise MalformedInput(f"unknown category {self.category!r}")
        if self.start is None and self.steps:
            self.start = self.steps[0].tail

    @property
    def end(self):
        return self.steps[-1].head if self.steps else self.start

    def objects(self) -> list:
        return [self.start] + [s.head for s in self.steps]

    def __len__(self) -> int:
        return len(self.steps)


def _ext_sum(values) -> float:
    total = 0.0
    for v in values:
        total += v
    return total


def validate_path(path: MorphismPath) -> list[float]:
    """Check every step and the chaining of objects; return per-step distortions."""
    kind = CATEGORIES[path.category]
    current = path.start
    lengths = []
    for k, step in enumerate(path.steps):
        m = step.morphism
        if not isinstance(m, kind):
            raise InvalidStep(f"step {k} is a {type(m).__name__}, not a {path.category} morphism")
        report = m.check()
        if not report:
            raise InvalidStep(f"step {k} fails the {path.category} morphism check: {list(report.violations)[:3]}")
        if step.tail != current:
            raise BrokenChain(f"step {k} does not start at the object reached after step {k - 1}")
        current = step.head
        lengths.append(distortion(m.map))
    return lengths


def path_length(path: MorphismPath) -> float:
    """Sum of step distortions (``inf`` absorbs)."""
    return _ext_sum(validate_path(path))


def bd_path(path: MorphismPath, i: int, field: FieldConfig | int = 2) -> MorphismPath:
    """Apply the birth-death functor stepwise to a filtration path."""
    if path.category != "fil":
        raise MalformedInput("birth-death images need a filtration path")
    steps = [Step(bd_morphism(s.morphism, i, field), s.direction) for s in path.steps]
    start = bd(path.start, i, field) if path.start is not None else None
    return MorphismPath("mon", steps, start)


def mobius_path(path: MorphismPath) -> MorphismPath:
    """Apply Möbius inversion stepwise to a path of monotone functions."""
    if path.category != "mon":
        raise MalformedInput("Möbius images need a path in the monotone category")
    steps = [Step(mobius_morphism(s.morphism), s.direction) for s in path.steps]
    start = mobius_invert(path.start) if path.start is not None else None
    return MorphismPath("fnc", steps, start)


# ---------------------------------------------------------------------------
# embeddings and matchings


@dataclass(frozen=True, eq=False)
class RealEmbedding:
    """Isometric, strictly monotone embedding of a chain into the extended reals with bottom at 0."""

    lattice: FiniteMetricLattice
    coords: Mapping[Hashable, float]

    def __post_init__(self):
        P = self.lattice
        if not P.is_chain:
            raise NotTotallyOrdered("lattice is not totally ordered")
        try:
            x = np.array([float(self.coords[e]) for e in P.elements])
        except KeyError as exc:
            raise NoEmbedding(f"no coordinate for element {exc.args[0]!r}") from None
        if x[P.bottom_index] != 0:
            raise NoEmbedding(f"bottom {P.bottom!r} must sit at 0, not {x[P.bottom_index]}")
        order = list(P.linear_extension)
        if any(not x[a] < x[b] for a, b in zip(order, order[1:])):
            raise NoEmbedding("coordinates are not strictly increasing along the order")
        gap = ext_absdiff(ext_absdiff(x[:, None], x[None, :]), P.metric)
        scale = np.maximum(1.0, np.where(np.isinf(P.metric), 0.0, P.metric))
        if (gap > METRIC_RTOL * scale).any():
            i, j = np.argwhere(gap > METRIC_RTOL * scale)[0]
            raise NoEmbedding(
                f"embedding is not isometric at {P.elements[i]!r}, {P.elements[j]!r}"
            )

    @classmethod
    def of(cls, P: FiniteMetricLattice) -> RealEmbedding:
        """Use ``P.coords`` if present, otherwise numeric element names."""
        if not P.is_chain:
            raise NotTotallyOrdered("lattice is not totally ordered")
        if P.coords is not None:
            return cls(P, P.coords)
        coords = {}
        for e in P.elements:
            try:
                coords[e] = math.inf if str(e).strip().lower() in ("inf", "+inf") else float(e)
            except (TypeError, ValueError):
                raise NoEmbedding(f"element {e!r} has no coordinate") from None
        return cls(P, coords)

    def __call__(self, x) -> float:
        return float(self.coords[x])

    def interval(self, I: Interval) -> tuple[float, float]:
        return (self(I.lo), self(I.hi))

    @property
    def by_coord(self) -> dict[float, Hashable]:
        return {float(v): k for k, v in self.coords.items()}


def sup_distance(a: tuple[float, float], b: tuple[float, float]) -> float:
    return max(ext_absdiff(a[0], b[0]), ext_absdiff(a[1], b[1]))


def _diagonal_cost(I: tuple[float, float], points: Sequence[float]) -> tuple[float, float]:
    """Cheapest diagonal ``[q, q]`` for an interval, as ``(cost, q)``."""
    best = (math.inf, points[0])
    for q in points:
        c = sup_distance(I, (q, q))
        if c < best[0]:
            best = (c, q)
    return best


@dataclass(eq=False)
class Matching:
    """Non-negative integer pairing of intervals with marginals fixed off the diagonals."""

    source: IntervalFunction
    target: IntervalFunction
    entries: dict[tuple[Interval, Interval], int]
    source_embedding: RealEmbedding | None = None
    target_embedding: RealEmbedding | None = None

    def __post_init__(self):
        if self.source_embedding is None:
            self.source_embedding = RealEmbedding.of(self.source.base)
        if self.target_embedding is None:
            self.target_embedding = RealEmbedding.of(self.target.base)
        self.entries = {(Interval(*I), Interval(*J)): int(m) for (I, J), m in self.entries.items() if m}
        self.validate()

    def validate(self) -> None:
        out = {I: 0 for I in self.source.lattice.elements}
        into = {J: 0 for J in self.target.lattice.elements}
        for (I, J), m in self.entries.items():
            if m < 0:
                raise InvalidMatching(f"negative entry for {I} -> {J}")
            if I not in out or J not in into:
                raise InvalidMatching(f"entry {I} -> {J} is not between the two interval lattices")
            out[I] += m
            into[J] += m
        for I, v in self.source.items():
            if I.lo != I.hi and out[I] != v:
                raise InvalidMatching(f"source interval {I} carries {v} but is matched {out[I]} times")
        for J, v in self.target.items():
            if J.lo != J.hi and into[J] != v:
                raise InvalidMatching(f"target interval {J} carries {v} but is matched {into[J]} times")

    def cost(self, I: Interval, J: Interval) -> float:
        return sup_distance(self.source_embedding.interval(I), self.target_embedding.interval(J))

    def transpose(self) -> Matching:
        return Matching(
            self.target,
            self.source,
            {(J, I): m for (I, J), m in self.entries.items()},
            self.target_embedding,
            self.source_embedding,
        )


def matching_norm(gamma: Matching) -> float:
    return max((gamma.cost(I, J) for (I, J) in gamma.entries), default=0.0)


def _embedded_nonneg(sigma: IntervalFunction) -> RealEmbedding:
    if not sigma.is_nonnegative():
        bad = next(I for I, v in sigma.items() if v < 0)
        raise NegativeMass(f"function is negative on {bad}")
    return RealEmbedding.of(sigma.base)


def _flow_network(sigma, tau, es, et, eps):
    """Bipartite network; feasible iff its max flow saturates every supply."""
    A = {I: v for I, v in sigma.support().items() if I.lo != I.hi}
    B = {J: v for J, v in tau.support().items() if J.lo != J.hi}
    mass_a, mass_b = sum(A.values()), sum(B.values())
    big = mass_a + mass_b + 1
    q_points = [et(x) for x in tau.base.elements]
    p_points = [es(x) for x in sigma.base.elements]
    G = nx.DiGraph()
    G.add_edge("s", "DP", capacity=mass_b, weight=0)
    G.add_edge("DQ", "t", capacity=mass_a, weight=0)
    G.add_edge("DP", "DQ", capacity=big, weight=0)
    diag_choice = {}
    for I, v in A.items():
        G.add_edge("s", ("L", I), capacity=v, weight=0)
        ci = es.interval(I)
        c, q = _diagonal_cost(ci, q_points)
        if c <= eps:
            G.add_edge(("L", I), "DQ", capacity=big, weight=_w(c))
            diag_choice[("L", I)] = q
        for J in B:
            c = sup_distance(ci, et.interval(J))
            if c <= eps:
                G.add_edge(("L", I), ("R", J), capacity=big, weight=_w(c))
    for J, v in B.items():
        G.add_edge(("R", J), "t", capacity=v, weight=0)
        c, p = _diagonal_cost(et.interval(J), p_points)
        if c <= eps:
            G.add_edge("DP", ("R", J), capacity=big, weight=_w(c))
            diag_choice[("R", J)] = p
    return G, mass_a + mass_b, diag_choice


def _w(c: float) -> int:
    # integral weights for the min-cost tie-break; infinite costs never reach here at finite eps
    return int(round(c * 1_000_000)) if math.isfinite(c) else 10**15


def _candidates(sigma, tau, es, et) -> list[float]:
    A = [es.interval(I) for I, v in sigma.support().items() if I.lo != I.hi]
    B = [et.interval(J) for J, v in tau.support().items() if J.lo != J.hi]
    q_points = [et(x) for x in tau.base.elements]
    p_points = [es(x) for x in sigma.base.elements]
    cands = {0.0}
    cands.update(sup_distance(a, b) for a in A for b in B)
    cands.update(_diagonal_cost(a, q_points)[0] for a in A)
    cands.update(_diagonal_cost(b, p_points)[0] for b in B)
    return sorted(cands)


def _feasible(sigma, tau, es, et, eps) -> bool:
    G, need, _ = _flow_network(sigma, tau, es, et, eps)
    if need == 0:
        return True
    value, _ = nx.maximum_flow(G, "s", "t")
    return value == need


def bottleneck(sigma: IntervalFunction, tau: IntervalFunction) -> tuple[float, Matching]:
    """Minimal matching norm and an optimal matching.

    Thresholds are the finitely many pair and diagonal costs; the smallest
    feasible one is found by binary search with an integral max-flow check.
    Among optimal matchings the returned one minimises the summed costs.
    """
    es, et = _embedded_nonneg(sigma), _embedded_nonneg(tau)
    cands = _candidates(sigma, tau, es, et)
    lo, hi = 0, len(cands) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _feasible(sigma, tau, es, et, cands[mid]):
            hi = mid
        else:
            lo = mid + 1
    eps = cands[lo]
    G, need, diag_choice = _flow_network(sigma, tau, es, et, eps)
    entries: dict[tuple[Interval, Interval], int] = {}
    if need:
        flow = nx.max_flow_min_cost(G, "s", "t")
        for u, outs in flow.items():
            for v, amount in outs.items():
                if amount <= 0:
                    continue
                if isinstance(u, tuple) and u[0] == "L" and isinstance(v, tuple):
                    key = (u[1], v[1])
                elif isinstance(u, tuple) and u[0] == "L" and v == "DQ":
                    q = tau.base.elements[[et(x) for x in tau.base.elements].index(diag_choice[u])]
                    key = (u[1], Interval(q, q))
                elif u == "DP" and isinstance(v, tuple):
                    p = sigma.base.elements[[es(x) for x in sigma.base.elements].index(diag_choice[v])]
                    key = (Interval(p, p), v[1])
                else:
                    continue
                entries[key] = entries.get(key, 0) + amount
    gamma = Matching(sigma, tau, entries, es, et)
    return eps, gamma


def morphism_to_matching(m: ChargeMorphism) -> Matching:
    """The matching ``I -> alpha_bar(I)`` with multiplicity ``sigma(I)``."""
    sigma, tau, alpha_bar = m.source, m.target, m.map
    report = m.check()
    if not report:
        raise InvalidMorphism(f"not a charge-preserving morphism: {list(report.violations)[:3]}")
    _embedded_nonneg(sigma)
    _embedded_nonneg(tau)
    entries = {}
    for I, v in sigma.items():
        if v > 0:
            entries[(I, alpha_bar(I))] = v
    return Matching(sigma, tau, entries)


# ---------------------------------------------------------------------------
# interpolation

Line = tuple  # (value at t=0, value at t=1)


def _line_at(line: Line, t: float) -> float:
    x0, x1 = line
    if x0 == x1:
        return x0
    if math.isinf(x0) or math.isinf(x1):
        raise InfiniteMixing(f"endpoint trajectory from {x0} to {x1} mixes finite and infinite values")
    if t == 0:
        return x0
    if t == 1:
        return x1
    return (1 - t) * x0 + t * x1


def _pair_lines(gamma: Matching) -> dict[tuple[Interval, Interval], tuple[Line, Line]]:
    es, et = gamma.source_embedding, gamma.target_embedding
    out = {}
    for (I, J) in gamma.entries:
        a, b = es.interval(I)
        c, d = et.interval(J)
        for line in ((a, c), (b, d)):
            if math.isinf(line[0]) != math.isinf(line[1]):
                raise InfiniteMixing(f"matched pair {I} -> {J} moves a finite endpoint to infinity")
        out[(I, J)] = ((a, c), (b, d))
    return out


def _frame_lines(gamma: Matching) -> list[Line]:
    es, et = gamma.source_embedding, gamma.target_embedding
    P, Q = gamma.source.base, gamma.target.base
    bottom = (es(P.bottom), et(Q.bottom))
    top = (es(P.top), et(Q.top))
    if math.isinf(top[0]) != math.isinf(top[1]):
        raise InfiniteMixing("one top is infinite and the other finite")
    return [bottom, top]


def _meet_times(lines: Sequence[Line]) -> list[float]:
    finite = [l for l in set(lines) if not math.isinf(l[0])]
    times = []
    for k, (x0, x1) in enumerate(finite):
        for (y0, y1) in finite[k + 1 :]:
            denom = (x1 - x0) - (y1 - y0)
            if denom == 0:
                continue
            t = (y0 - x0) / denom
            if -T_TOL <= t <= 1 + T_TOL:
                times.append(min(1.0, max(0.0, t)))
    return _merge(times)


def _merge(times: Sequence[float]) -> list[float]:
    out: list[float] = []
    for t in sorted(times):
        if not out or t - out[-1] > T_TOL:
            out.append(t)
    return out


def critical_points(gamma: Matching) -> list[float]:
    """Parameters in ``[0, 1]`` where two distinct endpoint trajectories meet."""
    lines = [l for pair in _pair_lines(gamma).values() for l in pair]
    return _meet_times(lines)


def _clusters(lines: Sequence[Line], t: float) -> list[tuple[float, list[Line]]]:
    vals = sorted(((_line_at(l, t), l) for l in set(lines)), key=lambda vl: (vl[0], vl[1]))
    groups: list[tuple[float, list[Line]]] = []
    for v, l in vals:
        if groups:
            rep = groups[-1][0]
            same = (math.isinf(v) and math.isinf(rep)) or (
                not math.isinf(v) and not math.isinf(rep) and abs(v - rep) <= T_TOL * max(1.0, abs(rep))
            )
            if same:
                groups[-1][1].append(l)
                continue
        groups.append((v, [l]))
    return groups


@dataclass(eq=False)
class Snapshot:
    """The interpolated function at one parameter value."""

    t: float
    lattice: FiniteMetricLattice
    element_of: dict  # line -> lattice element
    function: IntervalFunction
    regular: bool


def _snapshot(gamma: Matching, t: float) -> Snapshot:
    pairs = _pair_lines(gamma)
    lines = _frame_lines(gamma) + [l for pair in pairs.values() for l in pair]
    groups = _clusters(lines, t)
    named = {}
    if t == 0:
        named = gamma.source_embedding.by_coord
    elif t == 1:
        named = gamma.target_embedding.by_coord
    coords = [v for v, _ in groups]
    names = [named.get(v, format_coord(v)) for v in coords]
    if len(set(names)) != len(names):
        names = [format_coord(v) for v in coords]
    S = chain(coords, names)
    element_of = {l: name for name, (_, ls) in zip(names, groups) for l in ls}
    values: dict[Interval, int] = {}
    for (I, J), m in gamma.entries.items():
        left, right = pairs[(I, J)]
        K = Interval(element_of[left], element_of[right])
        values[K] = values.get(K, 0) + m
    fn = IntervalFunction(S, values)
    regular = all(len(ls) == 1 for _, ls in groups)
    return Snapshot(t, S, element_of, fn, regular)


def interpolate(gamma: Matching, t: float) -> IntervalFunction:
    """The interpolated function at ``t``, over the chain of endpoint positions.

    The chain also keeps the trajectories of both bottoms and both tops so that
    it is bounded compatibly for every ``t``.
    """
    if not 0 <= t <= 1:
        raise MalformedInput(f"interpolation parameter {t} is outside [0, 1]")
    return _snapshot(gamma, float(t)).function


def interpolation_preimages(gamma: Matching, t: float) -> dict[Interval, list[tuple[Interval, Interval]]]:
    """For each interpolated interval at ``t``, the matched pairs landing on it."""
    snap = _snapshot(gamma, float(t))
    out: dict[Interval, list] = {}
    for (I, J), (left, right) in _pair_lines(gamma).items():
        K = Interval(snap.element_of[left], snap.element_of[right])
        out.setdefault(K, []).append((I, J))
    return out


def _interpolation_map(a: Snapshot, b: Snapshot) -> BoundedLatticeMap:
    """Send each endpoint at ``a.t`` along its trajectory to ``b.t``; needs ``a`` regular."""
    assignment = {}
    for line, x in a.element_of.items():
        y = b.element_of[line]
        if assignment.setdefault(x, y) != y:
            raise InvalidMorphism(f"parameter {a.t} is critical; trajectories through {x} split")
    return BoundedLatticeMap(a.lattice, b.lattice, assignment)


def _is_identity(alpha: BoundedLatticeMap) -> bool:
    return alpha.source == alpha.target and all(alpha(x) == x for x in alpha.source.elements)


def _inclusion(snap: Snapshot, f: IntervalFunction, emb: RealEmbedding) -> ChargeMorphism | None:
    """Morphism from an end snapshot into the original function's lattice, or ``None`` if identical."""
    if snap.lattice == f.base and snap.function == f:
        return None
    by_coord = emb.by_coord
    alpha = BoundedLatticeMap(snap.lattice, f.base, lambda x: by_coord[snap.lattice.coords[x]])
    return ChargeMorphism.from_base(snap.function, f, alpha)


def _segment_base(lo: float, hi: float, first: bool, last: bool, regular) -> float:
    if first and regular(lo):
        return lo
    if last and regular(hi):
        return hi
    t = (lo + hi) / 2
    a, b = lo, hi
    for _ in range(60):
        if regular(t):
            return t
        b = t
        t = (a + b) / 2
    raise InvalidMorphism(f"no regular parameter found in ({lo}, {hi})")


def witness_path(sigma: IntervalFunction, tau: IntervalFunction, gamma: Matching | None = None) -> MorphismPath:
    """A path of charge-preserving morphisms from ``sigma`` to ``tau`` built from a matching.

    Breakpoints are 0, 1 and every interior crossing of endpoint trajectories;
    inside each segment one regular parameter ``t`` is chosen and the
    interpolation maps from ``t`` to both segment ends are used.  The total
    length is at most twice the matching norm.
    """
    if gamma is None:
        gamma = bottleneck(sigma, tau)[1]
    pairs = _pair_lines(gamma)
    lines = _frame_lines(gamma) + [l for pair in pairs.values() for l in pair]
    crossings = _meet_times(lines)
    breaks = _merge([0.0, 1.0] + [t for t in crossings if T_TOL < t < 1 - T_TOL])

    cache: dict[float, Snapshot] = {}

    def snap(t: float) -> Snapshot:
        if t not in cache:
            cache[t] = _snapshot(gamma, t)
        return cache[t]

    def regular(t: float) -> bool:
        return all(abs(t - c) > T_TOL for c in crossings) and snap(t).regular

    steps: list[Step] = []
    first = _inclusion(snap(0.0), sigma, gamma.source_embedding)
    if first is not None:
        steps.append(Step(first, "bwd"))
    for k, (lo, hi) in enumerate(zip(breaks, breaks[1:])):
        t = _segment_base(lo, hi, k == 0, k == len(breaks) - 2, regular)
        base = snap(t)
        for end, direction in ((lo, "bwd"), (hi, "fwd")):
            if t == end:
                continue
            alpha = _interpolation_map(base, snap(end))
            if _is_identity(alpha) and base.function == snap(end).function:
                continue
            steps.append(Step(ChargeMorphism.from_base(base.function, snap(end).function, alpha), direction))
    last = _inclusion(snap(1.0), tau, gamma.target_embedding)
    if last is not None:
        steps.append(Step(last, "fwd"))
    return MorphismPath("fnc", steps, sigma)


@dataclass
class EditBounds:
    """``lower`` is the bottleneck distance and ``upper`` the witness path length.

    ``top_gap = |top_P - top_Q|`` is the distortion every bounded map between
    the two chains incurs on the pair (bottom, top), so it also bounds the
    edit distance from below.  With equal tops ``upper <= 2 * lower``.
    """

    lower: float
    upper: float
    matching: Matching
    path: MorphismPath
    top_gap: float = 0.0


def edit_bounds(sigma: IntervalFunction, tau: IntervalFunction) -> EditBounds:
    """Bottleneck distance and the length of the witness path on an optimal matching."""
    value, gamma = bottleneck(sigma, tau)
    path = witness_path(sigma, tau, gamma)
    gap = ext_absdiff(
        gamma.source_embedding(sigma.base.top), gamma.target_embedding(tau.base.top)
    )
    return EditBounds(value, path_length(path), gamma, path, float(gap))


def matching_from_dict(raw: Mapping, sigma: IntervalFunction, tau: IntervalFunction) -> Matching:
    entries = {}
    for row in raw.get("entries", []):
        if len(row) != 5:
            raise MalformedInput("matching entries are [loI, hiI, loJ, hiJ, count]")
        a, b, c, d, m = row
        key = (Interval(str(a), str(b)), Interval(str(c), str(d)))
        entries[key] = entries.get(key, 0) + int(m)
    return Matching(sigma, tau, entries)


def matching_to_dict(gamma: Matching) -> dict:
    rows = sorted(
        [str(I.lo), str(I.hi), str(J.lo), str(J.hi), m] for (I, J), m in gamma.entries.items()
    )
    return {"entries": rows}
