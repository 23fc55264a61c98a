"""Labels: splitting a controlled set into the diagonal plus partial bijections.

A pair ``(x, y)`` in a part means ``x = phi(y)``.  Off-diagonal pairs form a
bipartite graph (image side x, domain side y); a part is exactly a matching
in it, so a minimum label is a minimum proper edge colouring, which by
Koenig's theorem uses max-degree many colours.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .coarse_core import ComponentLayout, ControlledSet, PointSet

Word = tuple  # tuple of nonzero/zero ints; -i means the inverse of part i


@dataclass(frozen=True)
class PartialBijection:
    dom: tuple[int, ...]
    img: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "dom", tuple(int(v) for v in self.dom))
        object.__setattr__(self, "img", tuple(int(v) for v in self.img))
        if len(self.dom) != len(self.img):
            raise ValueError("dom and img must have equal length")

    @classmethod
    def from_mapping(cls, mapping: dict[int, int]) -> "PartialBijection":
        dom = tuple(sorted(mapping))
        return cls(dom, tuple(mapping[y] for y in dom))

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]]) -> "PartialBijection":
        """Pairs are (image, preimage), matching controlled-set orientation."""
        return cls.from_mapping({y: x for x, y in pairs})

    def validate(self) -> None:
        if any(a >= b for a, b in zip(self.dom, self.dom[1:])):
            raise ValueError("dom must be strictly increasing")
        if len(set(self.img)) != len(self.img):
            raise ValueError("partial bijection is not injective")

    def is_injective(self) -> bool:
        return len(set(self.img)) == len(self.img)

    @cached_property
    def mapping(self) -> dict[int, int]:
        return dict(zip(self.dom, self.img))

    def __call__(self, y: int) -> int | None:
        return self.mapping.get(y)

    def __len__(self):
        return len(self.dom)

    def pairs(self) -> list[tuple[int, int]]:
        return [(x, y) for y, x in zip(self.dom, self.img)]

    def inverse(self) -> "PartialBijection":
        return PartialBijection.from_mapping({x: y for y, x in zip(self.dom, self.img)})

    def compose(self, other: "PartialBijection") -> "PartialBijection":
        """``self o other`` on the largest domain where it makes sense."""
        f = self.mapping
        out = {}
        for y, z in zip(other.dom, other.img):
            if z in f:
                out[y] = f[z]
        return PartialBijection.from_mapping(out)

    def fixed_points(self) -> PointSet:
        return tuple(y for y, x in zip(self.dom, self.img) if x == y)

    def to_json(self) -> dict:
        return {"dom": list(self.dom), "img": list(self.img)}

    @classmethod
    def from_json(cls, doc: dict) -> "PartialBijection":
        return cls(doc["dom"], doc["img"])


def identity_bijection(n_points: int) -> PartialBijection:
    r = tuple(range(n_points))
    return PartialBijection(r, r)


@dataclass(frozen=True)
class Label:
    """``parts[0]`` is the diagonal, ``parts[1..k]`` the off-diagonal bijections."""

    layout: ComponentLayout
    parts: tuple[PartialBijection, ...]
    source: ControlledSet | None = None
    check: bool = True

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        if not self.parts:
            raise ValueError("a label needs at least the diagonal part")
        if self.check:
            if self.parts[0] != identity_bijection(self.layout.n_points):
                raise ValueError("part 0 must be the diagonal")
            for p in self.parts:
                p.validate()
            if self.source is not None:
                covered = set()
                for p in self.parts:
                    covered.update(p.pairs())
                if covered != self.source.pair_set:
                    raise ValueError("label parts do not cover the source relation exactly")

    @property
    def k(self) -> int:
        return len(self.parts) - 1

    def letter(self, i: int) -> PartialBijection:
        if not -self.k <= i <= self.k:
            raise ValueError(f"letter {i} outside [-{self.k}, {self.k}]")
        if i >= 0:
            return self.parts[i]
        return self._inverses[-i]

    @cached_property
    def _inverses(self) -> dict[int, PartialBijection]:
        return {i: self.parts[i].inverse() for i in range(1, self.k + 1)}

    def validate_word(self, g: Sequence[int]) -> Word:
        g = tuple(int(v) for v in g)
        if not g:
            raise ValueError("words are nonempty")
        for i in g:
            if not -self.k <= i <= self.k:
                raise ValueError(f"letter {i} outside [-{self.k}, {self.k}]")
        return g

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "sizes": list(self.layout.sizes),
            "parts": [p.to_json() for p in self.parts[1:]],
        }

    @classmethod
    def from_json(cls, doc: dict, check: bool = True) -> "Label":
        layout = ComponentLayout(tuple(doc["sizes"]))
        parts = [identity_bijection(layout.n_points)] + [PartialBijection.from_json(p) for p in doc["parts"]]
        if len(parts) - 1 != doc["k"]:
            raise ValueError("k does not match the number of parts")
        return cls(layout, tuple(parts), check=check)


def word_inverse(g: Sequence[int]) -> Word:
    return tuple(-i for i in reversed(g))


def word_concat(g: Sequence[int], h: Sequence[int]) -> Word:
    return tuple(g) + tuple(h)


def _koenig_coloring(edges: list[tuple[int, int]], n_colors: int) -> dict[tuple[int, int], int]:
    # at_left[x][c] = y with (x, y) coloured c; at_right[y][c] = x
    at_left: dict[int, list] = {}
    at_right: dict[int, list] = {}
    color: dict[tuple[int, int], int] = {}

    def slots(table, v):
        s = table.get(v)
        if s is None:
            s = table[v] = [None] * n_colors
        return s

    for x, y in edges:
        lx, ry = slots(at_left, x), slots(at_right, y)
        a = lx.index(None)
        if ry[a] is not None:
            b = ry.index(None)
            # walk the a/b alternating path from y and swap its colours
            path = []
            side, v, c = "R", y, a
            while True:
                if side == "R":
                    u = at_right[v][c]
                    if u is None:
                        break
                    path.append((u, v))
                    side, v = "L", u
                else:
                    u = at_left[v][c]
                    if u is None:
                        break
                    path.append((v, u))
                    side, v = "R", u
                c = b if c == a else a
            for e in path:
                old = color[e]
                at_left[e[0]][old] = None
                at_right[e[1]][old] = None
            for e in path:
                new = b if color[e] == a else a
                color[e] = new
                at_left[e[0]][new] = e[1]
                at_right[e[1]][new] = e[0]
        color[(x, y)] = a
        lx[a] = y
        ry[a] = x
    return color


def _bipartite_components(edges: list[tuple[int, int]]) -> list[list[tuple[int, int]]]:
    parent: dict = {}

    def find(v):
        while parent.setdefault(v, v) != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for x, y in edges:
        a, b = find(("L", x)), find(("R", y))
        if a != b:
            parent[max(a, b)] = min(a, b)
    groups: dict = {}
    for e in edges:
        groups.setdefault(find(("L", e[0])), []).append(e)
    return sorted(groups.values(), key=lambda es: es[0])


def _align_colors(edges, color, n_colors, layout: ComponentLayout) -> dict:
    """Permute colours inside each bipartite component so that colour classes
    agree on local index displacement ``x - y mod #X_m`` as far as possible.

    Colour classes of different bipartite components never touch, so any
    per-component permutation keeps every class a matching.  For Cayley-type
    relations this recovers the translation parts.
    """
    def disp(e):
        m, i = layout.locate(e[0])
        j = e[1] - layout.offsets[m]
        return m, (i - j) % layout.sizes[m]

    hist = [Counter() for _ in range(n_colors)]
    out = {}
    for comp in _bipartite_components(edges):
        classes = [[] for _ in range(n_colors)]
        for e in comp:
            classes[color[e]].append(disp(e))
        score = np.zeros((n_colors, n_colors))
        for c, ds in enumerate(classes):
            for g in range(n_colors):
                score[c, g] = sum(hist[g][d] for d in ds)
        rows, cols = linear_sum_assignment(-score)
        perm = dict(zip(rows.tolist(), cols.tolist()))
        for e in comp:
            out[e] = perm[color[e]]
        for c, ds in enumerate(classes):
            hist[perm[c]].update(ds)
    return out


def label_decompose(T: ControlledSet) -> Label:
    """Minimum label of a controlled set containing the diagonal.

    The number of parts equals the maximum off-diagonal row/column degree.
    """
    if not T.contains_diagonal():
        raise ValueError("label_decompose requires the diagonal inside T")
    layout = T.layout
    edges = [(x, y) for x, y in T.pairs if x != y]
    deg = Counter()
    for x, y in edges:
        deg[("L", x)] += 1
        deg[("R", y)] += 1
    k = max(deg.values(), default=0)
    parts = [identity_bijection(layout.n_points)]
    if k:
        color = _koenig_coloring(edges, k)
        color = _align_colors(edges, color, k, layout)
        buckets = [[] for _ in range(k)]
        for e, c in color.items():
            buckets[c].append(e)
        parts.extend(PartialBijection.from_pairs(b) for b in buckets)
    return Label(layout, tuple(parts), source=T)


def word_bijection(g: Sequence[int], L: Label) -> PartialBijection:
    """``phi(g(1)) o ... o phi(g(n))`` with the maximal valid domain."""
    g = L.validate_word(g)
    out = L.letter(g[-1])
    for i in reversed(g[:-1]):
        out = L.letter(i).compose(out)
    return out


def agreement_set(g: Sequence[int], h: Sequence[int], L: Label) -> PointSet:
    """Points where both ``phi(g)`` and ``phi(h)`` are defined and agree."""
    fg = word_bijection(g, L).mapping
    fh = word_bijection(h, L).mapping
    return tuple(sorted(x for x, v in fg.items() if fh.get(x, None) == v))
