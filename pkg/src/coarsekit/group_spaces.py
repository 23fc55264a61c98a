"""Box spaces built from finite quotients of residually finite groups.

Two towers are built in: cyclic quotients of Z (the amenable control case)
and SL(2, Z/p) quotients of SL(2, Z) with the elementary generators
``a = [[1,1],[0,1]]`` and ``b = [[1,0],[1,1]]``.  Arbitrary towers can be
loaded from the permutation JSON format.

Words are read as products ``g1 g2 ... gn`` acting on the left, so a word
sends a point x to ``g1(g2(...gn(x)))``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

from .coarse_core import (
    ComponentLayout,
    ControlledSet,
    PointSet,
    bounded_witness,
    cs_image,
    cs_power,
    pointset,
)

SL2_GENERATORS = {
    "a": (1, 1, 0, 1),
    "a-": (1, -1, 0, 1),
    "b": (1, 0, 1, 1),
    "b-": (1, 0, -1, 1),
    "e": (1, 0, 0, 1),
}
CYCLIC_GENERATORS = {"a": 1, "a-": -1, "e": 0}


@dataclass(frozen=True)
class FiniteQuotientAction:
    size: int
    generators: tuple[tuple[int, ...], ...]
    identity: int = 0

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(tuple(int(v) for v in g) for g in self.generators))
        ident = tuple(range(self.size))
        for g in self.generators:
            if sorted(g) != list(ident):
                raise ValueError("every generator must be a permutation of the component")
        perms = set(self.generators)
        if ident not in perms:
            raise ValueError("generator set must contain the identity permutation")
        for g in self.generators:
            if _perm_inverse(g) not in perms:
                raise ValueError("generator set must be closed under inverses")
        if not 0 <= self.identity < self.size:
            raise ValueError("identity index out of range")

    def act(self, word: Sequence[int], x: int) -> int:
        for i in reversed(word):
            x = self.generators[i][x]
        return x

    def word_permutation(self, word: Sequence[int]) -> tuple[int, ...]:
        return tuple(self.act(word, x) for x in range(self.size))

    @cached_property
    def point_words(self) -> tuple[tuple[int, ...], ...]:
        """Shortlex-least word reaching each point from the identity (None if unreachable)."""
        words: list = [None] * self.size
        words[self.identity] = ()
        frontier = [self.identity]
        order = _nontrivial_indices(self.generators)
        while frontier:
            nxt = []
            for gi in order:
                for x in frontier:
                    y = self.generators[gi][x]
                    if words[y] is None:
                        words[y] = (gi,) + words[x]
                        nxt.append(y)
            frontier = sorted(nxt, key=lambda v: words[v])
        return tuple(words)

    def is_connected(self) -> bool:
        return all(w is not None for w in self.point_words)

    def right_translate(self, Y, h: int) -> PointSet:
        """``{y h : y in Y}`` for a Cayley (regular left) action."""
        words = self.point_words
        return pointset(self.act(words[y], h) for y in Y)

    def inverse_point(self, x: int) -> int:
        w = self.point_words[x]
        inv = _generator_inverses(self.generators)
        return self.act(tuple(inv[i] for i in reversed(w)), self.identity)


def _perm_inverse(g: Sequence[int]) -> tuple[int, ...]:
    out = [0] * len(g)
    for x, y in enumerate(g):
        out[y] = x
    return tuple(out)


def _nontrivial_indices(gens) -> list[int]:
    return [i for i, g in enumerate(gens) if any(v != x for x, v in enumerate(g))]


def _generator_inverses(gens) -> list[int]:
    lookup = {g: i for i, g in reversed(list(enumerate(gens)))}
    return [lookup[_perm_inverse(g)] for g in gens]


@dataclass(frozen=True)
class BoxSpaceSpec:
    """A truncated tower ``G/H_1, ..., G/H_M`` with shared generator names.

    ``kind`` selects exact word arithmetic: ``"cyclic"`` (integers),
    ``"sl2"`` (integer matrices) or ``"perm"`` (evaluation in the
    ``reference`` component, assumed faithful at the radii asked for).
    """

    components: tuple[FiniteQuotientAction, ...]
    generator_names: tuple[str, ...]
    kind: str = "perm"
    params: tuple[int, ...] = ()
    reference: int = -1

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        object.__setattr__(self, "generator_names", tuple(self.generator_names))
        if not self.components:
            raise ValueError("a tower needs at least one component")
        ng = len(self.generator_names)
        for c in self.components:
            if len(c.generators) != ng:
                raise ValueError("all components must carry the same generator count")
        if self.kind not in ("cyclic", "sl2", "perm"):
            raise ValueError(f"unknown tower kind {self.kind!r}")
        if not -len(self.components) <= self.reference < len(self.components):
            raise ValueError(f"reference component {self.reference} out of range")

    @cached_property
    def layout(self) -> ComponentLayout:
        return ComponentLayout(tuple(c.size for c in self.components))

    @property
    def truncation_depth(self) -> int:
        return len(self.components)

    def identity_point(self, m: int) -> int:
        return self.layout.point(m, self.components[m].identity)

    def to_json(self) -> dict:
        doc = {
            "generators": list(self.generator_names),
            "kind": self.kind,
            "params": list(self.params),
            "components": [
                {"size": c.size, "perms": [list(g) for g in c.generators], "identity": c.identity}
                for c in self.components
            ],
        }
        if self.reference != -1:
            doc["reference"] = self.reference
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "BoxSpaceSpec":
        try:
            comps = tuple(
                FiniteQuotientAction(int(c["size"]), tuple(tuple(g) for g in c["perms"]), int(c.get("identity", 0)))
                for c in doc["components"]
            )
            names = tuple(doc["generators"])
            reference = int(doc.get("reference", -1))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed tower document: {exc}") from exc
        return cls(comps, names, doc.get("kind", "perm"), tuple(doc.get("params", ())), reference)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), sort_keys=True))

    @classmethod
    def load(cls, path) -> "BoxSpaceSpec":
        try:
            doc = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ValueError(f"malformed tower file {path}: {exc}") from exc
        return cls.from_json(doc)


def build_cyclic_tower(sizes: Sequence[int]) -> BoxSpaceSpec:
    sizes = [int(s) for s in sizes]
    if not sizes:
        raise ValueError("need at least one size")
    comps = []
    for n in sizes:
        if n < 2:
            raise ValueError(f"cyclic component size must be >= 2, got {n}")
        gens = tuple(tuple((x + s) % n for x in range(n)) for s in CYCLIC_GENERATORS.values())
        comps.append(FiniteQuotientAction(n, gens, 0))
    return BoxSpaceSpec(tuple(comps), tuple(CYCLIC_GENERATORS), "cyclic", tuple(sizes))


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % d for d in range(2, int(p ** 0.5) + 1))


def _matmul(x, y, mod=None):
    a, b, c, d = x
    e, f, g, h = y
    out = (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)
    if mod is not None:
        out = tuple(v % mod for v in out)
    return out


def sl2_elements(p: int) -> list[tuple[int, int, int, int]]:
    """SL(2, Z/p) in lexicographic order of (a, b, c, d)."""
    return [m for m in itertools.product(range(p), repeat=4) if (m[0] * m[3] - m[1] * m[2]) % p == 1]


def build_sl2_tower(primes: Sequence[int]) -> BoxSpaceSpec:
    primes = [int(p) for p in primes]
    if not primes:
        raise ValueError("need at least one prime")
    comps = []
    for p in primes:
        if p < 3 or not is_prime(p):
            raise ValueError(f"expected a prime >= 3, got {p}")
        elems = sl2_elements(p)
        index = {m: i for i, m in enumerate(elems)}
        gens = []
        for g in SL2_GENERATORS.values():
            gp = tuple(v % p for v in g)
            gens.append(tuple(index[_matmul(gp, x, p)] for x in elems))
        comps.append(FiniteQuotientAction(len(elems), tuple(gens), index[(1, 0, 0, 1)]))
    return BoxSpaceSpec(tuple(comps), tuple(SL2_GENERATORS), "sl2", tuple(primes))


def generator_relation(spec: BoxSpaceSpec) -> ControlledSet:
    """``T_K = {(g x, x) : g in K}`` over the whole tower."""
    lay = spec.layout
    pairs = set()
    for m, comp in enumerate(spec.components):
        off = lay.offsets[m]
        for g in comp.generators:
            pairs.update((g[x] + off, x + off) for x in range(comp.size))
    return ControlledSet(lay, tuple(sorted(pairs)))


def cayley_entourage(spec: BoxSpaceSpec, n: int) -> ControlledSet:
    if n < 1:
        raise ValueError("n must be >= 1")
    return cs_power(generator_relation(spec), n)


class _ExactGroup:
    """Exact multiplication in the ambient group G for a tower."""

    def __init__(self, spec: BoxSpaceSpec):
        self.spec = spec
        if spec.kind == "cyclic":
            self.gens = [CYCLIC_GENERATORS[n] for n in spec.generator_names]
            self.one = 0
            self.mul = lambda g, h: g + h
        elif spec.kind == "sl2":
            self.gens = [SL2_GENERATORS[n] for n in spec.generator_names]
            self.one = (1, 0, 0, 1)
            self.mul = _matmul
        else:
            ref = spec.components[spec.reference]
            self.gens = list(range(len(ref.generators)))
            self.one = ref.identity
            self.mul = lambda gi, x: ref.generators[gi][x]


@dataclass(frozen=True)
class FreeBall:
    """Group elements of word length <= radius with shortlex-least words."""

    radius: int
    elements: tuple
    words: tuple[tuple[int, ...], ...]
    points: dict = field(default_factory=dict, compare=False)  # m -> tuple of component points

    def __len__(self):
        return len(self.elements)


def free_ball(spec: BoxSpaceSpec, radius: int) -> FreeBall:
    grp = _ExactGroup(spec)
    gens = spec.components[0].generators
    order = _nontrivial_indices(gens)
    seen = {grp.one: ()}
    frontier = [grp.one]
    for _ in range(radius):
        nxt = []
        for gi in order:
            for e in frontier:
                new = grp.mul(grp.gens[gi], e)
                if new not in seen:
                    seen[new] = (gi,) + seen[e]
                    nxt.append(new)
        frontier = sorted(nxt, key=lambda v: seen[v])
    elems = sorted(seen, key=lambda v: (len(seen[v]), seen[v]))
    return FreeBall(radius, tuple(elems), tuple(seen[e] for e in elems))


def evaluate_ball(spec: BoxSpaceSpec, ball: FreeBall, m: int) -> tuple[int, ...]:
    """Global points ``q_m(g)`` for every element of the ball."""
    comp = spec.components[m]
    off = spec.layout.offsets[m]
    return tuple(comp.act(w, comp.identity) + off for w in ball.words)


def injectivity_check(spec: BoxSpaceSpec, m: int, n: int) -> bool:
    """Is ``q_m`` injective on the ball of radius n+1 in G?"""
    if n < 0:
        raise ValueError("radius must be >= 0")
    ball = free_ball(spec, n + 1)
    return len(set(evaluate_ball(spec, ball, m))) == len(ball)


@dataclass(frozen=True)
class PullbackResult:
    component: int
    translated: PointSet  # Y after moving its bounding centre to the identity
    elements: tuple  # F inside G
    words: tuple
    kf_size: int
    image_size: int  # #T_K[translated]

    @property
    def f_size(self) -> int:
        return len(self.elements)


def folner_pullback(spec: BoxSpaceSpec, m: int, Y, n: int) -> PullbackResult:
    """Lift a bounded set in ``G/H_m`` to ``F`` inside G with ``#KF = #T_K[Y]``.

    ``Y`` must be ``T_K^n``-bounded; if its ball is not centred at the
    identity it is right-translated first (right translation preserves
    ``#T_K[Y]`` for a left Cayley action).
    """
    Y = pointset(Y)
    lay = spec.layout
    if not Y or any(lay.component_of(y) != m for y in Y):
        raise ValueError("Y must be a nonempty subset of component m")
    if not injectivity_check(spec, m, n):
        raise ValueError(f"q_{m} is not injective on K^{n + 1}")
    TK = generator_relation(spec)
    Tn = cs_power(TK, n) if n >= 1 else None
    comp = spec.components[m]
    off = lay.offsets[m]
    ident = comp.identity + off
    ball_pts = cs_image(Tn, [ident]) if Tn is not None else (ident,)
    if not set(Y) <= set(ball_pts):
        centre = bounded_witness(Y, Tn) if Tn is not None else (Y[0] if len(Y) == 1 else None)
        if centre is None:
            raise ValueError(f"Y is not T_K^{n}-bounded")
        h = comp.inverse_point(centre - off)
        Y = tuple(sorted(v + off for v in comp.right_translate([y - off for y in Y], h)))
    ball = free_ball(spec, n)
    pts = evaluate_ball(spec, ball, m)
    lift = {p: i for i, p in enumerate(pts)}
    idx = [lift[y] for y in Y]
    F = [ball.elements[i] for i in idx]
    grp = _ExactGroup(spec)
    KF = {grp.mul(g, f) for g in grp.gens for f in F}
    return PullbackResult(
        component=m,
        translated=Y,
        elements=tuple(F),
        words=tuple(ball.words[i] for i in idx),
        kf_size=len(KF),
        image_size=len(cs_image(TK, Y)),
    )
