"""Finite metric lattices, bounded lattice maps and the interval-lattice functor."""

from __future__ import annotations

import math
from functools import cached_property
from typing import Any, Callable, Hashable, Iterable, Mapping, NamedTuple, Sequence

import numpy as np
from scipy.sparse.csgraph import shortest_path

from .errors import (
    BadMetric,
    MalformedInput,
    NoMeetOrJoin,
    NoEmbedding,
    NotABoundedLatticeMap,
    NotAPoset,
    NotComposable,
    UnknownElement,
)

INF = math.inf

# relative slack for float comparisons on metric values (triangle inequality, isometry)
METRIC_RTOL = 1e-9


class Interval(NamedTuple):
    lo: Any
    hi: Any

    def __str__(self) -> str:
        return f"[{self.lo},{self.hi}]"


def ext_absdiff(x, y):
    """``|x - y|`` on extended non-negative reals, with ``|inf - inf| = 0``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    both = np.isinf(x) & np.isinf(y) & (np.sign(x) == np.sign(y))
    with np.errstate(invalid="ignore"):
        out = np.abs(x - y)
    out = np.where(both, 0.0, out)
    return out if out.ndim else float(out)


def _transitive_closure(rel: np.ndarray) -> np.ndarray:
    closure = rel.copy()
    for k in range(len(closure)):
        closure |= np.outer(closure[:, k], closure[k, :])
    return closure


def _bound_table(leq: np.ndarray, elements: Sequence, kind: str) -> np.ndarray:
    """Meet (``kind='meet'``) or join table as element indices; raises if some pair lacks one."""
    n = len(leq)
    rel = leq if kind == "meet" else leq.T  # rel[x, a]: x is below a (dually above)
    down_size = rel.sum(axis=0)
    table = np.empty((n, n), dtype=np.intp)
    for a in range(n):
        common = rel[:, a][:, None] & rel  # column b: common lower (upper) bounds of a, b
        score = np.where(common, down_size[:, None], -1)
        best = score.argmax(axis=0)
        ok = ~np.any(common & ~rel[:, best], axis=0) & common[best, np.arange(n)]
        if not ok.all():
            b = int(np.flatnonzero(~ok)[0])
            raise NoMeetOrJoin(f"elements {elements[a]!r} and {elements[b]!r} have no unique {kind}")
        table[a] = best
    return table


class FiniteMetricLattice:
    """An immutable finite lattice equipped with an extended metric.

    ``leq[i, j]`` is True iff ``elements[i] <= elements[j]``.  ``metric`` holds
    distances as floats, ``inf`` allowed.  Meet and join tables are computed and
    checked on construction.
    """

    def __init__(
        self,
        elements: Sequence[Hashable],
        leq: np.ndarray,
        metric: np.ndarray,
        *,
        coords: Mapping[Hashable, float] | None = None,
        base: FiniteMetricLattice | None = None,
    ):
        self.elements = tuple(elements)
        if not self.elements:
            raise NotAPoset("a lattice needs at least one element")
        self._index = {x: i for i, x in enumerate(self.elements)}
        if len(self._index) != len(self.elements):
            raise MalformedInput("duplicate lattice elements")
        n = len(self.elements)

        leq = np.array(leq, dtype=bool)
        if leq.shape != (n, n):
            raise NotAPoset(f"order relation has shape {leq.shape}, expected {(n, n)}")
        if not leq.diagonal().all():
            raise NotAPoset("order relation is not reflexive")
        if (leq & leq.T & ~np.eye(n, dtype=bool)).any():
            i, j = np.argwhere(leq & leq.T & ~np.eye(n, dtype=bool))[0]
            raise NotAPoset(f"antisymmetry fails for {self.elements[i]!r} and {self.elements[j]!r}")
        if (_transitive_closure(leq) != leq).any():
            raise NotAPoset("order relation is not transitive")
        leq.setflags(write=False)
        self.leq = leq

        self.meet_table = _bound_table(leq, self.elements, "meet")
        self.join_table = _bound_table(leq, self.elements, "join")
        self.meet_table.setflags(write=False)
        self.join_table.setflags(write=False)
        self.bottom_index = _extreme(leq, bottom=True)
        self.top_index = _extreme(leq, bottom=False)

        metric = np.array(metric, dtype=float)
        _check_metric(metric, self.elements)
        metric.setflags(write=False)
        self.metric = metric

        self.coords = dict(coords) if coords is not None else None
        self.base = base

    # -- element access -------------------------------------------------
    def index(self, x: Hashable) -> int:
        try:
            return self._index[x]
        except (KeyError, TypeError):
            raise UnknownElement(f"{x!r} is not an element of the lattice") from None

    def __contains__(self, x) -> bool:
        try:
            return x in self._index
        except TypeError:
            return False

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __repr__(self) -> str:
        return f"FiniteMetricLattice({len(self)} elements, bottom={self.bottom!r}, top={self.top!r})"

    @property
    def bottom(self):
        return self.elements[self.bottom_index]

    @property
    def top(self):
        return self.elements[self.top_index]

    def le(self, a, b) -> bool:
        return bool(self.leq[self.index(a), self.index(b)])

    def meet(self, a, b):
        return self.elements[self.meet_table[self.index(a), self.index(b)]]

    def join(self, a, b):
        return self.elements[self.join_table[self.index(a), self.index(b)]]

    def d(self, a, b) -> float:
        return float(self.metric[self.index(a), self.index(b)])

    # -- derived structure ----------------------------------------------
    @cached_property
    def linear_extension(self) -> tuple[int, ...]:
        """Element indices sorted so that ``a < b`` implies ``a`` comes first."""
        down = self.leq.sum(axis=0)
        return tuple(int(i) for i in np.argsort(down, kind="stable"))

    @cached_property
    def covers(self) -> tuple[tuple[Any, Any], ...]:
        strict = self.leq & ~np.eye(len(self), dtype=bool)
        two_step = (strict.astype(np.int64) @ strict.astype(np.int64)) > 0
        cov = strict & ~two_step
        return tuple((self.elements[i], self.elements[j]) for i, j in np.argwhere(cov))

    @cached_property
    def is_chain(self) -> bool:
        return bool((self.leq | self.leq.T).all())

    @cached_property
    def intervals(self) -> FiniteMetricLattice:
        return interval_lattice(self)

    # -- comparison ------------------------------------------------------
    def _aligned(self, other: FiniteMetricLattice) -> np.ndarray | None:
        if len(self) != len(other) or set(self._index) != set(other._index):
            return None
        return np.array([other._index[x] for x in self.elements], dtype=np.intp)

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, FiniteMetricLattice):
            return NotImplemented
        perm = self._aligned(other)
        if perm is None:
            return False
        if not np.array_equal(self.leq, other.leq[np.ix_(perm, perm)]):
            return False
        return bool(np.all(ext_absdiff(self.metric, other.metric[np.ix_(perm, perm)]) == 0))

    def __hash__(self) -> int:
        return hash(frozenset(self._index))


def _extreme(leq: np.ndarray, bottom: bool) -> int:
    rows = leq.all(axis=1) if bottom else leq.all(axis=0)
    hits = np.flatnonzero(rows)
    if len(hits) != 1:
        raise NoMeetOrJoin("lattice has no unique " + ("bottom" if bottom else "top"))
    return int(hits[0])


def _check_metric(metric: np.ndarray, elements: Sequence) -> None:
    n = len(elements)
    if metric.shape != (n, n):
        raise BadMetric(f"metric has shape {metric.shape}, expected {(n, n)}")
    if np.isnan(metric).any():
        raise BadMetric("metric contains NaN")
    if (metric < 0).any():
        i, j = np.argwhere(metric < 0)[0]
        raise BadMetric(f"negative distance between {elements[i]!r} and {elements[j]!r}")
    if (metric.diagonal() != 0).any():
        i = int(np.flatnonzero(metric.diagonal() != 0)[0])
        raise BadMetric(f"d({elements[i]!r}, {elements[i]!r}) is not 0")
    if (ext_absdiff(metric, metric.T) > 0).any():
        i, j = np.argwhere(ext_absdiff(metric, metric.T) > 0)[0]
        raise BadMetric(f"metric is not symmetric at {elements[i]!r}, {elements[j]!r}")
    for k in range(n):
        via = metric[:, k][:, None] + metric[k, :][None, :]
        bad = metric > via + METRIC_RTOL * np.maximum(1.0, np.where(np.isinf(via), 0.0, via))
        if bad.any():
            i, j = np.argwhere(bad)[0]
            raise BadMetric(
                f"triangle inequality fails: d({elements[i]!r},{elements[j]!r}) > "
                f"d({elements[i]!r},{elements[k]!r}) + d({elements[k]!r},{elements[j]!r})"
            )


# ---------------------------------------------------------------------------
# constructors


def order_matrix(elements: Sequence[Hashable], pairs: Iterable[tuple[Any, Any]]) -> np.ndarray:
    """Reflexive-transitive closure of ``pairs`` (covers or a full relation)."""
    index = {x: i for i, x in enumerate(elements)}
    rel = np.eye(len(elements), dtype=bool)
    for a, b in pairs:
        try:
            rel[index[a], index[b]] = True
        except KeyError as exc:
            raise UnknownElement(f"order pair ({a!r}, {b!r}) names an unknown element") from exc
    closure = _transitive_closure(rel)
    cyc = closure & closure.T & ~np.eye(len(elements), dtype=bool)
    if cyc.any():
        i, j = np.argwhere(cyc)[0]
        raise NotAPoset(f"order pairs contain a cycle through {elements[i]!r} and {elements[j]!r}")
    return closure


def hasse_distances(leq: np.ndarray) -> np.ndarray:
    """Edge-count shortest paths in the undirected Hasse diagram."""
    n = len(leq)
    strict = leq & ~np.eye(n, dtype=bool)
    two_step = (strict.astype(np.int64) @ strict.astype(np.int64)) > 0
    cov = (strict & ~two_step).astype(float)
    return shortest_path(cov, directed=False, unweighted=True)


def build_lattice(
    elements: Sequence[Hashable],
    pairs: Iterable[tuple[Any, Any]],
    metric: str | Callable[[Any, Any], float] | Mapping | np.ndarray = "hasse",
    *,
    coords: Mapping[Hashable, float] | None = None,
) -> FiniteMetricLattice:
    """Build a lattice from order pairs.

    ``metric`` is ``"hasse"``, ``"embedding"`` (``|x - y|`` on ``coords``), a
    callable, a full matrix, or a mapping ``{(a, b): value}`` that is closed
    symmetrically; a missing off-diagonal pair is an error.
    """
    elements = tuple(elements)
    leq = order_matrix(elements, pairs)
    n = len(elements)
    if isinstance(metric, str):
        if metric == "hasse":
            dist = hasse_distances(leq)
        elif metric == "embedding":
            if coords is None:
                raise BadMetric("embedding metric needs coordinates")
            x = np.array([float(coords[e]) for e in elements])
            dist = ext_absdiff(x[:, None], x[None, :])
        else:
            raise BadMetric(f"unknown metric type {metric!r}")
    elif callable(metric):
        dist = np.array([[float(metric(a, b)) for b in elements] for a in elements])
    elif isinstance(metric, Mapping):
        dist = np.full((n, n), np.nan)
        np.fill_diagonal(dist, 0.0)
        index = {x: i for i, x in enumerate(elements)}
        for (a, b), v in metric.items():
            if a not in index or b not in index:
                raise UnknownElement(f"metric entry ({a!r}, {b!r}) names an unknown element")
            i, j = index[a], index[b]
            for (r, c) in ((i, j), (j, i)):
                if not np.isnan(dist[r, c]) and dist[r, c] != float(v) and r != c:
                    raise BadMetric(f"conflicting metric entries for {a!r}, {b!r}")
                dist[r, c] = float(v)
        if np.isnan(dist).any():
            i, j = np.argwhere(np.isnan(dist))[0]
            raise BadMetric(f"missing metric entry for {elements[i]!r}, {elements[j]!r}")
    else:
        dist = np.asarray(metric, dtype=float)
    return FiniteMetricLattice(elements, leq, dist, coords=coords)


def chain(coords: Sequence[float], names: Sequence[Hashable] | None = None) -> FiniteMetricLattice:
    """Totally ordered lattice on strictly increasing ``coords`` with metric ``|x - y|``."""
    xs = [float(c) for c in coords]
    if names is None:
        names = [format_coord(x) for x in xs]
    names = tuple(names)
    if any(not a < b for a, b in zip(xs, xs[1:])):
        raise NotAPoset("chain coordinates must be strictly increasing")
    n = len(xs)
    leq = np.triu(np.ones((n, n), dtype=bool))
    x = np.array(xs)
    dist = ext_absdiff(x[:, None], x[None, :])
    return FiniteMetricLattice(names, leq, dist, coords=dict(zip(names, xs)))


def format_coord(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if float(x).is_integer():
        return str(int(x))
    return repr(float(x))


def point_lattice(name: Hashable = "*") -> FiniteMetricLattice:
    return FiniteMetricLattice((name,), np.ones((1, 1), dtype=bool), np.zeros((1, 1)), coords={name: 0.0})


def hasse_metric(elements: Sequence[Hashable], pairs: Iterable[tuple[Any, Any]]) -> FiniteMetricLattice:
    return build_lattice(elements, pairs, "hasse")


def interval_lattice(P: FiniteMetricLattice) -> FiniteMetricLattice:
    """The lattice of intervals ``[a, b]``, ordered componentwise, with the sup metric."""
    pairs = np.argwhere(P.leq)  # rows (lo, hi), lexicographic in element index
    lo, hi = pairs[:, 0], pairs[:, 1]
    elements = [Interval(P.elements[a], P.elements[b]) for a, b in pairs]
    leq = P.leq[np.ix_(lo, lo)] & P.leq[np.ix_(hi, hi)]
    dist = np.maximum(P.metric[np.ix_(lo, lo)], P.metric[np.ix_(hi, hi)])
    return FiniteMetricLattice(elements, leq, dist, base=P)


# ---------------------------------------------------------------------------
# maps


class BoundedLatticeMap:
    """A map between finite lattices preserving meets, joins, bottom and top.

    Validated on construction; ``images[i]`` is the target index of
    ``source.elements[i]``.
    """

    def __init__(
        self,
        source: FiniteMetricLattice,
        target: FiniteMetricLattice,
        assignment: Mapping[Hashable, Hashable] | Callable[[Hashable], Hashable],
        *,
        base_map: BoundedLatticeMap | None = None,
    ):
        self.source = source
        self.target = target
        get = assignment if callable(assignment) else assignment.__getitem__
        images = []
        for x in source.elements:
            try:
                y = get(x)
            except KeyError:
                raise MalformedInput(f"map is not defined on {x!r}") from None
            images.append(target.index(y))
        self.images = np.array(images, dtype=np.intp)
        self.images.setflags(write=False)
        self.base_map = base_map
        self._validate()

    def _validate(self) -> None:
        P, Q, img = self.source, self.target, self.images
        if img[P.bottom_index] != Q.bottom_index:
            raise NotABoundedLatticeMap(f"bottom {P.bottom!r} is not sent to bottom {Q.bottom!r}")
        if img[P.top_index] != Q.top_index:
            raise NotABoundedLatticeMap(f"top {P.top!r} is not sent to top {Q.top!r}")
        for table, qtable, kind in ((P.meet_table, Q.meet_table, "meet"), (P.join_table, Q.join_table, "join")):
            bad = img[table] != qtable[np.ix_(img, img)]
            if bad.any():
                i, j = np.argwhere(bad)[0]
                raise NotABoundedLatticeMap(
                    f"{kind} of {P.elements[i]!r} and {P.elements[j]!r} is not preserved"
                )

    def __call__(self, x):
        return self.target.elements[self.images[self.source.index(x)]]

    def as_dict(self) -> dict:
        return {x: self.target.elements[i] for x, i in zip(self.source.elements, self.images)}

    def __repr__(self) -> str:
        return f"BoundedLatticeMap({len(self.source)} -> {len(self.target)} elements)"

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, BoundedLatticeMap):
            return NotImplemented
        return (
            self.source == other.source
            and self.target == other.target
            and all(self(x) == other(x) for x in self.source.elements)
        )

    __hash__ = None

    @cached_property
    def preimage_max_indices(self) -> np.ndarray:
        """For each target index ``a``, the source index of ``max alpha^{-1}[bottom, a]``."""
        P, Q = self.source, self.target
        out = np.empty(len(Q), dtype=np.intp)
        for a in range(len(Q)):
            members = np.flatnonzero(Q.leq[self.images, a])
            top = members[0]
            for x in members[1:]:
                top = P.join_table[top, x]
            if not Q.leq[self.images[top], a]:  # cannot happen for a valid map
                raise NotABoundedLatticeMap("preimage of a down-set has no maximum")
            out[a] = top
        out.setflags(write=False)
        return out

    @cached_property
    def lifted(self) -> BoundedLatticeMap:
        return lift_map(self)


def identity(P: FiniteMetricLattice) -> BoundedLatticeMap:
    return BoundedLatticeMap(P, P, lambda x: x)


def compose(beta: BoundedLatticeMap, alpha: BoundedLatticeMap) -> BoundedLatticeMap:
    """``beta ∘ alpha``."""
    if alpha.target != beta.source:
        raise NotComposable("target of the first map differs from the source of the second")
    return BoundedLatticeMap(alpha.source, beta.target, lambda x: beta(alpha(x)))


def terminal_map(P: FiniteMetricLattice, point: FiniteMetricLattice | None = None) -> BoundedLatticeMap:
    point = point if point is not None else point_lattice()
    return BoundedLatticeMap(P, point, lambda x: point.top)


def preimage_max(alpha: BoundedLatticeMap, a: Hashable):
    """The maximum of ``alpha^{-1}[bottom, a]``."""
    return alpha.source.elements[alpha.preimage_max_indices[alpha.target.index(a)]]


def lift_map(alpha: BoundedLatticeMap) -> BoundedLatticeMap:
    """The induced map ``[a, b] -> [alpha(a), alpha(b)]`` between interval lattices."""
    return BoundedLatticeMap(
        alpha.source.intervals,
        alpha.target.intervals,
        lambda I: Interval(alpha(I.lo), alpha(I.hi)),
        base_map=alpha,
    )


def distortion(alpha: BoundedLatticeMap) -> float:
    """``max |d_P(a, b) - d_Q(alpha a, alpha b)|`` under extended arithmetic."""
    img = alpha.images
    pulled = alpha.target.metric[np.ix_(img, img)]
    return float(np.max(ext_absdiff(alpha.source.metric, pulled)))


def base_of_lifted(alpha_bar: BoundedLatticeMap) -> BoundedLatticeMap | None:
    """Recover the base map of a map between interval lattices, or ``None`` if not induced by one."""
    if alpha_bar.base_map is not None:
        return alpha_bar.base_map
    P, Q = alpha_bar.source.base, alpha_bar.target.base
    if P is None or Q is None:
        return None
    assignment = {}
    for x in P.elements:
        image = alpha_bar(Interval(x, x))
        if image.lo != image.hi:
            return None
        assignment[x] = image.lo
    for I in alpha_bar.source.elements:
        if alpha_bar(I) != Interval(assignment[I.lo], assignment[I.hi]):
            return None
    try:
        return BoundedLatticeMap(P, Q, assignment)
    except NotABoundedLatticeMap:
        return None


# ---------------------------------------------------------------------------
# JSON


def _parse_value(v) -> float:
    if isinstance(v, str):
        if v.lower() in ("inf", "+inf", "infinity"):
            return INF
        raise BadMetric(f"metric value {v!r} is not a number or 'inf'")
    return float(v)


def validate_lattice(raw: Mapping[str, Any]) -> FiniteMetricLattice:
    """Parse and validate the JSON lattice description."""
    if not isinstance(raw, Mapping) or "elements" not in raw:
        raise MalformedInput("lattice description needs an 'elements' list")
    elements = [str(e) for e in raw["elements"]]
    if "covers" in raw and "leq" in raw:
        raise MalformedInput("give either 'covers' or 'leq', not both")
    pairs = [tuple(map(str, p)) for p in raw.get("covers", raw.get("leq", []))]
    if any(len(p) != 2 for p in pairs):
        raise MalformedInput("order pairs must have two entries")
    coords = raw.get("coords")
    if coords is not None:
        coords = {str(k): _parse_value(v) for k, v in coords.items()}
    spec = raw.get("metric", {"type": "hasse"})
    kind = spec.get("type")
    if kind == "hasse":
        metric: Any = "hasse"
    elif kind == "embedding":
        if coords is None:
            coords = _numeric_coords(elements)
        metric = "embedding"
    elif kind == "explicit":
        metric = {}
        for entry in spec.get("entries", []):
            if len(entry) != 3:
                raise MalformedInput("explicit metric entries are [a, b, value]")
            a, b, v = entry
            metric[(str(a), str(b))] = _parse_value(v)
    else:
        raise BadMetric(f"unknown metric type {kind!r}")
    return build_lattice(elements, pairs, metric, coords=coords)


def _numeric_coords(elements: Sequence[str]) -> dict:
    try:
        return {e: _parse_value(e) if e.lower().lstrip("+").startswith("inf") else float(e) for e in elements}
    except (ValueError, BadMetric):
        raise NoEmbedding("element names are not numeric; give a 'coords' map") from None


def lattice_to_dict(P: FiniteMetricLattice) -> dict:
    elements = [str(e) for e in P.elements]
    if len(set(elements)) != len(elements):
        raise MalformedInput("element names collide when written as strings")
    entries = []
    for i in range(len(P)):
        for j in range(i + 1, len(P)):
            v = float(P.metric[i, j])
            entries.append([elements[i], elements[j], "inf" if math.isinf(v) else v])
    out = {
        "elements": elements,
        "covers": [[str(a), str(b)] for a, b in P.covers],
        "metric": {"type": "explicit", "entries": entries},
    }
    if P.coords is not None:
        out["coords"] = {str(k): ("inf" if math.isinf(v) else v) for k, v in P.coords.items()}
    return out
