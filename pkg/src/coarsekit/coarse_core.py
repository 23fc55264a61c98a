"""Generalized box spaces and the relation algebra of controlled sets.

Points are global integers.  A :class:`ComponentLayout` splits ``0..N-1`` into
consecutive blocks ``X_0, X_1, ...``; every relation built here is
block-diagonal, i.e. pairs never cross components.

A pair ``(x, y)`` in a controlled set ``T`` is read the usual way:
``T[Y] = {x : (x, y) in T for some y in Y}``.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from functools import cached_property
from itertools import chain
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

PointSet = tuple  # sorted tuple of global point indices

UNREACHABLE = -1


def pointset(points: Iterable[int]) -> PointSet:
    return tuple(sorted(set(points)))


@dataclass(frozen=True)
class ComponentLayout:
    sizes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))
        if not self.sizes:
            raise ValueError("layout needs at least one component")
        if any(s < 1 for s in self.sizes):
            raise ValueError(f"component sizes must be >= 1, got {self.sizes}")

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        out = [0]
        for s in self.sizes:
            out.append(out[-1] + s)
        return tuple(out)

    @property
    def n_components(self) -> int:
        return len(self.sizes)

    @property
    def n_points(self) -> int:
        return self.offsets[-1]

    def component_of(self, x: int) -> int:
        if not 0 <= x < self.n_points:
            raise IndexError(f"point {x} outside layout of {self.n_points} points")
        return bisect.bisect_right(self.offsets, x) - 1

    def locate(self, x: int) -> tuple[int, int]:
        m = self.component_of(x)
        return m, x - self.offsets[m]

    def point(self, m: int, i: int) -> int:
        if not 0 <= i < self.sizes[m]:
            raise IndexError(f"local index {i} outside component {m}")
        return self.offsets[m] + i

    def points(self, m: int) -> range:
        return range(self.offsets[m], self.offsets[m + 1])


@dataclass(frozen=True)
class ControlledSet:
    """A finite block-diagonal relation in canonical (sorted, deduplicated) form.

    Build instances with :meth:`from_pairs`; the raw constructor trusts its input.
    """

    layout: ComponentLayout
    pairs: tuple[tuple[int, int], ...] = field(default=())

    @classmethod
    def from_pairs(cls, layout: ComponentLayout, pairs: Iterable[tuple[int, int]]) -> "ControlledSet":
        canon = sorted({(int(x), int(y)) for x, y in pairs})
        for x, y in canon:
            if layout.component_of(x) != layout.component_of(y):
                raise ValueError(f"pair {(x, y)} crosses components")
        return cls(layout, tuple(canon))

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def __contains__(self, pair):
        return pair in self.pair_set

    @cached_property
    def pair_set(self) -> frozenset:
        return frozenset(self.pairs)

    @cached_property
    def fibers(self) -> dict[int, tuple[int, ...]]:
        """``y -> T[y]`` for every y that has a nonempty fiber."""
        out: dict[int, list[int]] = {}
        for x, y in self.pairs:
            out.setdefault(y, []).append(x)
        return {y: tuple(sorted(xs)) for y, xs in out.items()}

    @cached_property
    def rows(self) -> dict[int, tuple[int, ...]]:
        """``x -> {y : (x, y) in T}``, i.e. the fibers of the inverse."""
        out: dict[int, list[int]] = {}
        for x, y in self.pairs:
            out.setdefault(x, []).append(y)
        return {x: tuple(ys) for x, ys in out.items()}

    def fiber(self, y: int) -> tuple[int, ...]:
        return self.fibers.get(y, ())

    def restrict(self, m: int) -> "ControlledSet":
        lo, hi = self.layout.offsets[m], self.layout.offsets[m + 1]
        return ControlledSet(self.layout, tuple(p for p in self.pairs if lo <= p[0] < hi))

    def contains_diagonal(self) -> bool:
        return all((x, x) in self.pair_set for x in range(self.layout.n_points))

    def issubset(self, other: "ControlledSet") -> bool:
        return self.pair_set <= other.pair_set

    def to_json(self) -> dict:
        lay = self.layout
        rows = []
        for x, y in self.pairs:
            m, i = lay.locate(x)
            rows.append([m, i, y - lay.offsets[m]])
        rows.sort()
        return {"sizes": list(lay.sizes), "pairs": rows}

    @classmethod
    def from_json(cls, doc: dict) -> "ControlledSet":
        layout = ComponentLayout(tuple(doc["sizes"]))
        pairs = ((layout.point(m, i), layout.point(m, j)) for m, i, j in doc["pairs"])
        return cls.from_pairs(layout, pairs)


def diagonal(layout: ComponentLayout) -> ControlledSet:
    return ControlledSet(layout, tuple((x, x) for x in range(layout.n_points)))


def full_block(layout: ComponentLayout) -> ControlledSet:
    pairs = []
    for m in range(layout.n_components):
        pts = layout.points(m)
        pairs.extend((x, y) for x in pts for y in pts)
    return ControlledSet(layout, tuple(pairs))


def _check_same_layout(*sets: ControlledSet):
    lay = sets[0].layout
    for t in sets[1:]:
        if t.layout != lay:
            raise ValueError("controlled sets live on different layouts")


def cs_inverse(T: ControlledSet) -> ControlledSet:
    return ControlledSet(T.layout, tuple(sorted((y, x) for x, y in T.pairs)))


def cs_union(*sets: ControlledSet) -> ControlledSet:
    _check_same_layout(*sets)
    return ControlledSet(sets[0].layout, tuple(sorted(set(chain.from_iterable(t.pairs for t in sets)))))


def cs_compose(T1: ControlledSet, T2: ControlledSet) -> ControlledSet:
    """``T1 o T2 = {(x, y) : (x, z) in T1 and (z, y) in T2 for some z}``."""
    _check_same_layout(T1, T2)
    out = set()
    fib1 = T1.fibers
    for z, y in T2.pairs:
        for x in fib1.get(z, ()):
            out.add((x, y))
    return ControlledSet(T1.layout, tuple(sorted(out)))


def cs_power(T: ControlledSet, n: int) -> ControlledSet:
    if n < 1:
        raise ValueError(f"power must be >= 1, got {n}")
    out = T
    for _ in range(n - 1):
        out = cs_compose(out, T)
    return out


def cs_image(T: ControlledSet, Y: Iterable[int]) -> PointSet:
    fib = T.fibers
    out = set()
    for y in Y:
        out.update(fib.get(y, ()))
    return tuple(sorted(out))


def bounded_witness(Y: Iterable[int], T: ControlledSet) -> int | None:
    """Smallest x with ``Y`` contained in ``T[x]``, or None."""
    Y = pointset(Y)
    if not Y:
        raise ValueError("bounded_witness needs a nonempty set")
    # x must satisfy (y, x) in T for every y in Y
    candidates = T.rows.get(Y[0], ())
    pairs = T.pair_set
    for x in sorted(candidates):
        if all((y, x) in pairs for y in Y):
            return x
    return None


def is_bounded(Y: Iterable[int], T: ControlledSet) -> bool:
    return bounded_witness(Y, T) is not None


def uniform_degree(T: ControlledSet) -> tuple[int, int]:
    """(max_x #T[x], max_x #T^{-1}[x])."""
    max_row = max((len(v) for v in T.fibers.values()), default=0)
    max_col = max((len(v) for v in T.rows.values()), default=0)
    return max_row, max_col


def is_symmetric(T: ControlledSet) -> bool:
    return all((y, x) in T.pair_set for x, y in T.pairs)


class ComponentMetric:
    """Integer graph metric on each component; ``UNREACHABLE`` marks infinite distance.

    Distances between different components are never stored.
    """

    def __init__(self, layout: ComponentLayout, dist: Sequence[np.ndarray]):
        if len(dist) != layout.n_components:
            raise ValueError("need one distance matrix per component")
        mats = []
        for m, d in enumerate(dist):
            d = np.asarray(d, dtype=np.int64)
            n = layout.sizes[m]
            if d.shape != (n, n):
                raise ValueError(f"component {m}: expected {(n, n)} matrix, got {d.shape}")
            if np.any(np.diag(d) != 0) or not np.array_equal(d, d.T):
                raise ValueError(f"component {m}: distance matrix must be symmetric with zero diagonal")
            mats.append(d)
        self.layout = layout
        self.dist = tuple(mats)

    @classmethod
    def from_graph(cls, layout: ComponentLayout, edges: Iterable[tuple[int, int]]) -> "ComponentMetric":
        """Shortest-path metric of an undirected graph given by global edges."""
        per_comp: list[list[tuple[int, int]]] = [[] for _ in layout.sizes]
        for x, y in edges:
            m, i = layout.locate(x)
            m2, j = layout.locate(y)
            if m != m2:
                raise ValueError(f"edge {(x, y)} crosses components")
            if i != j:
                per_comp[m].append((i, j))
        dist = []
        for m, n in enumerate(layout.sizes):
            es = per_comp[m]
            if es:
                r, c = zip(*es)
                adj = csr_matrix((np.ones(len(es)), (r, c)), shape=(n, n))
            else:
                adj = csr_matrix((n, n))
            d = shortest_path(adj, directed=False, unweighted=True)
            d = np.where(np.isinf(d), UNREACHABLE, d).astype(np.int64)
            dist.append(d)
        return cls(layout, dist)

    @classmethod
    def from_entourage(cls, T: ControlledSet) -> "ComponentMetric":
        """Word metric of the symmetrized relation ``T``."""
        return cls.from_graph(T.layout, T.pairs)

    def d(self, x: int, y: int) -> int | None:
        m, i = self.layout.locate(x)
        m2, j = self.layout.locate(y)
        if m != m2:
            return None
        v = int(self.dist[m][i, j])
        return None if v == UNREACHABLE else v

    def connected(self, m: int) -> bool:
        return not np.any(self.dist[m] == UNREACHABLE)

    def diameter(self, m: int) -> int | None:
        if not self.connected(m):
            return None
        return int(self.dist[m].max())

    def ball(self, x: int, R: int) -> PointSet:
        m, i = self.layout.locate(x)
        row = self.dist[m][i]
        local = np.nonzero((row >= 0) & (row <= R))[0]
        off = self.layout.offsets[m]
        return tuple(int(j) + off for j in local)

    def diam_of(self, Y: Iterable[int]) -> int | None:
        """Diameter of a point set; None if it is spread over unreachable points."""
        Y = pointset(Y)
        if not Y:
            return 0
        comps = {self.layout.component_of(y) for y in Y}
        if len(comps) > 1:
            return None
        m = comps.pop()
        off = self.layout.offsets[m]
        idx = np.array(Y) - off
        sub = self.dist[m][np.ix_(idx, idx)]
        if np.any(sub == UNREACHABLE):
            return None
        return int(sub.max())


def metric_entourage(d: ComponentMetric, R: int) -> ControlledSet:
    if R < 0:
        raise ValueError("R must be nonnegative")
    pairs = []
    for m, mat in enumerate(d.dist):
        off = d.layout.offsets[m]
        xs, ys = np.nonzero((mat >= 0) & (mat <= R))
        pairs.extend(zip((xs + off).tolist(), (ys + off).tolist()))
    return ControlledSet(d.layout, tuple(sorted(pairs)))


def neighborhood_R(d: ComponentMetric, Y: Iterable[int], R: int) -> PointSet:
    out = set()
    for y in Y:
        out.update(d.ball(y, R))
    return tuple(sorted(out))


def boundary_R(d: ComponentMetric, Y: Iterable[int], R: int) -> PointSet:
    Y = set(Y)
    return tuple(x for x in neighborhood_R(d, Y, R) if x not in Y)
