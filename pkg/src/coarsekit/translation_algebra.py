"""Finite-propagation operators on a single component.

Operators are stored sparsely as ``{(x, y): value}`` in local indices of
component ``m``; ``value`` is the matrix coefficient <a delta_y, delta_x>.
Word operators have integer entries, so every identity below is checked
exactly.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .coarse_core import ComponentLayout, ControlledSet
from .labels import Label, PartialBijection, word_bijection, word_concat, word_inverse

COMPLEX_TOL = 1e-12


class FinPropOperator:
    def __init__(self, layout: ComponentLayout, m: int, entries: Mapping[tuple[int, int], object]):
        self.layout = layout
        self.m = m
        n = layout.sizes[m]
        clean = {}
        for (x, y), v in entries.items():
            if not (0 <= x < n and 0 <= y < n):
                raise IndexError(f"entry {(x, y)} outside component {m}")
            if v != 0:
                clean[(x, y)] = v
        self.entries = dict(sorted(clean.items()))

    @property
    def size(self) -> int:
        return self.layout.sizes[self.m]

    def __eq__(self, other):
        if not isinstance(other, FinPropOperator):
            return NotImplemented
        return self.layout == other.layout and self.m == other.m and self.entries == other.entries

    def __repr__(self):
        return f"FinPropOperator(m={self.m}, nnz={len(self.entries)})"

    def allclose(self, other: "FinPropOperator", tol: float = COMPLEX_TOL) -> bool:
        keys = set(self.entries) | set(other.entries)
        return all(abs(self.entries.get(k, 0) - other.entries.get(k, 0)) <= tol for k in keys)

    @cached_property
    def support(self) -> ControlledSet:
        off = self.layout.offsets[self.m]
        return ControlledSet(self.layout, tuple(sorted((x + off, y + off) for x, y in self.entries)))

    @cached_property
    def _rows(self) -> dict[int, list[tuple[int, object]]]:
        rows: dict[int, list] = {}
        for (x, y), v in self.entries.items():
            rows.setdefault(x, []).append((y, v))
        return rows

    def is_diagonal(self) -> bool:
        return all(x == y for x, y in self.entries)

    def to_dense(self) -> np.ndarray:
        vals = list(self.entries.values())
        dtype = complex if any(isinstance(v, complex) for v in vals) else object
        out = np.zeros((self.size, self.size), dtype=dtype)
        for (x, y), v in self.entries.items():
            out[x, y] = v
        return out

    def to_json(self) -> dict:
        rows = []
        for (x, y), v in self.entries.items():
            if isinstance(v, complex):
                rows.append([x, y, repr(v.real), repr(v.imag)])
            else:
                rows.append([x, y, str(v), "0"])
        return {"m": self.m, "entries": rows}

    @classmethod
    def from_json(cls, layout: ComponentLayout, doc: dict) -> "FinPropOperator":
        entries = {}
        for x, y, re, im in doc["entries"]:
            if im in ("0", "0.0"):
                entries[(x, y)] = Fraction(re) if "/" in re else (int(re) if re.lstrip("-").isdigit() else float(re))
            else:
                entries[(x, y)] = complex(float(re), float(im))
        return cls(layout, doc["m"], entries)


@dataclass(frozen=True)
class DiagonalFunction:
    layout: ComponentLayout
    m: int
    values: tuple

    def __post_init__(self):
        if len(self.values) != self.layout.sizes[self.m]:
            raise ValueError("one value per point of the component")

    def as_operator(self) -> FinPropOperator:
        return FinPropOperator(self.layout, self.m, {(x, x): v for x, v in enumerate(self.values)})

    def support(self) -> tuple[int, ...]:
        off = self.layout.offsets[self.m]
        return tuple(x + off for x, v in enumerate(self.values) if v != 0)

    def is_projection(self) -> bool:
        return all(v == 0 or v == 1 for v in self.values)

    def __mul__(self, other: "DiagonalFunction") -> "DiagonalFunction":
        return DiagonalFunction(self.layout, self.m, tuple(a * b for a, b in zip(self.values, other.values)))


def identity_operator(layout: ComponentLayout, m: int) -> FinPropOperator:
    return FinPropOperator(layout, m, {(x, x): 1 for x in range(layout.sizes[m])})


def bijection_operator(phi: PartialBijection, layout: ComponentLayout, m: int) -> FinPropOperator:
    """0/1 matrix with ``a[phi(y)][y] = 1`` for y in the domain inside component m."""
    off, n = layout.offsets[m], layout.sizes[m]
    entries: dict = {}
    for y, x in zip(phi.dom, phi.img):
        if off <= y < off + n:
            key = (x - off, y - off)
            entries[key] = entries.get(key, 0) + 1
    return FinPropOperator(layout, m, entries)


def op_mul(a: FinPropOperator, b: FinPropOperator) -> FinPropOperator:
    if a.layout != b.layout or a.m != b.m:
        raise ValueError("operators live on different components")
    brows = b._rows
    out: dict = {}
    for (x, z), v in a.entries.items():
        for y, w in brows.get(z, ()):
            out[(x, y)] = out.get((x, y), 0) + v * w
    return FinPropOperator(a.layout, a.m, out)


def op_adjoint(a: FinPropOperator) -> FinPropOperator:
    return FinPropOperator(a.layout, a.m, {(y, x): v.conjugate() for (x, y), v in a.entries.items()})


def op_add(a: FinPropOperator, b: FinPropOperator) -> FinPropOperator:
    if a.layout != b.layout or a.m != b.m:
        raise ValueError("operators live on different components")
    out = dict(a.entries)
    for k, v in b.entries.items():
        out[k] = out.get(k, 0) + v
    return FinPropOperator(a.layout, a.m, out)


def _letter_operator(L: Label, i: int, m: int) -> FinPropOperator:
    if i == 0:
        return identity_operator(L.layout, m)
    base = bijection_operator(L.parts[abs(i)], L.layout, m)
    return base if i > 0 else op_adjoint(base)


def op_from_word(g: Sequence[int], L: Label, m: int) -> FinPropOperator:
    """``v(g) = v(g(1)) ... v(g(n))`` as a product of letter matrices."""
    g = L.validate_word(g)
    out = _letter_operator(L, g[0], m)
    for i in g[1:]:
        out = op_mul(out, _letter_operator(L, i, m))
    return out


def cond_expect(a: FinPropOperator) -> DiagonalFunction:
    return DiagonalFunction(a.layout, a.m, tuple(a.entries.get((x, x), 0) for x in range(a.size)))


def word_projection(g: Sequence[int], L: Label, m: int) -> DiagonalFunction:
    """``p(g) = E(v(g))``: indicator of the fixed points of ``phi(g)``."""
    return cond_expect(op_from_word(g, L, m))


def component_trace(a: FinPropOperator):
    """Normalised trace ``(1/#X_m) sum_x a[x][x]``."""
    s = sum(a.entries.get((x, x), 0) for x in range(a.size))
    if isinstance(s, complex):
        return s / a.size
    return Fraction(s, a.size)


# --- randomized identity suite ---------------------------------------------------

IDENTITIES = ("product", "adjoint", "expectation_projection", "expectation_factorization")


def random_word(rng: random.Random, k: int, max_len: int) -> tuple[int, ...]:
    n = rng.randint(1, max_len)
    return tuple(rng.randint(-k, k) for _ in range(n))


def relation_suite(
    L: Label, m: int, trials: int, *, seed: int = 0, max_len: int = 4, max_factors: int = 3
) -> dict:
    """Randomised check of the word-operator identities on component m.

    (i) ``v(g) v(h) = v(g*h)`` against the combinatorial partial bijection;
    (ii) ``v(g)* = v(g^-1)``; (iii) E of an alternating product
    ``v(g1) p(h1) ... v(gn) p(hn)`` is a 0/1 diagonal; (iv) for such a
    product v with concatenated word g, ``E(v) = p(g) v*v``.  Failures are
    counted, never raised.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = random.Random(seed)
    k = L.k
    counts = {name: {"pass": 0, "fail": 0} for name in IDENTITIES}
    first_failure: dict = {}

    def record(name, ok, detail):
        counts[name]["pass" if ok else "fail"] += 1
        if not ok and name not in first_failure:
            first_failure[name] = detail

    for _ in range(trials):
        g = random_word(rng, k, max_len)
        h = random_word(rng, k, max_len)
        vg, vh = op_from_word(g, L, m), op_from_word(h, L, m)
        gh = word_concat(g, h)
        record("product", op_mul(vg, vh) == bijection_operator(word_bijection(gh, L), L.layout, m),
               {"g": list(g), "h": list(h)})
        record("adjoint", op_adjoint(vg) == op_from_word(word_inverse(g), L, m), {"g": list(g)})

        nf = rng.randint(1, max_factors)
        gs = [random_word(rng, k, max_len) for _ in range(nf)]
        hs = [random_word(rng, k, max_len) for _ in range(nf)]
        v = identity_operator(L.layout, m)
        for gi, hi in zip(gs, hs):
            v = op_mul(v, op_from_word(gi, L, m))
            v = op_mul(v, word_projection(hi, L, m).as_operator())
        Ev = cond_expect(v)
        detail = {"g": [list(x) for x in gs], "h": [list(x) for x in hs]}
        record("expectation_projection", Ev.is_projection(), detail)
        vv = op_mul(op_adjoint(v), v)
        gcat = tuple(x for gi in gs for x in gi)
        ok = vv.is_diagonal() and Ev == word_projection(gcat, L, m) * cond_expect(vv)
        record("expectation_factorization", ok, detail)

    return {
        "component": m,
        "k": k,
        "trials": trials,
        "seed": seed,
        "max_len": max_len,
        "max_factors": max_factors,
        "identities": counts,
        "first_failure": first_failure,
        "all_pass": all(c["fail"] == 0 for c in counts.values()),
    }
