import itertools
import random

import hypothesis.strategies as st
import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp
import pytest

from coarsekit.coarse_core import ComponentLayout, ControlledSet


def cycle_relation(n, with_diagonal=True, layout=None, comp=0):
    """Delta u adjacency of the n-cycle, built directly from modular arithmetic."""
    layout = layout or ComponentLayout((n,))
    off = layout.offsets[comp]
    pairs = set()
    for x in range(n):
        for s in ((-1, 0, 1) if with_diagonal else (-1, 1)):
            pairs.add((off + (x + s) % n, off + x))
    return ControlledSet.from_pairs(layout, pairs)


def cycle_distance(n, x, y):
    d = abs(x - y) % n
    return min(d, n - d)


def brute_image(pairs, Y):
    return {x for x, y in pairs if y in Y}


def brute_compose(p1, p2):
    return {(x, y) for x, z in p1 for z2, y in p2 if z == z2}


def brute_min_ratio(pairs, B):
    """Reference minimum of #T[Y]/#Y over all nonempty subsets (fractions as tuples)."""
    from fractions import Fraction

    best = None
    for k in range(1, len(B) + 1):
        for Y in itertools.combinations(sorted(B), k):
            r = Fraction(len(brute_image(pairs, set(Y))), k)
            if best is None or r < best:
                best = r
    return best


def min_edge_colors(edges):
    """Exact chromatic index of a bipartite graph given as (left, right) edges.

    Decided by a 0/1 feasibility program per k (one colour per edge, each
    colour at most once per vertex), solved to optimality by branch and bound.
    """
    edges = sorted(set(edges))
    if not edges:
        return 0
    verts = sorted({("L", x) for x, _ in edges} | {("R", y) for _, y in edges})
    vidx = {v: i for i, v in enumerate(verts)}
    ne = len(edges)
    deg = [0] * len(verts)
    for x, y in edges:
        deg[vidx[("L", x)]] += 1
        deg[vidx[("R", y)]] += 1
    # a vertex of degree d needs d distinct colours, so the search starts there
    for k in range(max(deg), ne + 1):
        rows, lo, hi = [], [], []
        for e in range(ne):
            r = np.zeros(ne * k)
            r[e * k:(e + 1) * k] = 1
            rows.append(r), lo.append(1), hi.append(1)
        for v in range(len(verts)):
            inc = [e for e, (x, y) in enumerate(edges) if vidx[("L", x)] == v or vidx[("R", y)] == v]
            for c in range(k):
                r = np.zeros(ne * k)
                r[[e * k + c for e in inc]] = 1
                rows.append(r), lo.append(0), hi.append(1)
        res = milp(np.zeros(ne * k), constraints=LinearConstraint(np.array(rows), lo, hi),
                   integrality=np.ones(ne * k), bounds=Bounds(0, 1))
        if res.status == 0:
            return k
        assert res.status == 2, res.message  # 2: proven infeasible
    raise AssertionError("unreachable")


def random_relation(rng, sizes, max_deg=8, density=0.3, diagonal=True):
    """Random block-diagonal relation with all row/column degrees <= max_deg."""
    layout = ComponentLayout(tuple(sizes))
    pairs = set()
    for m, n in enumerate(sizes):
        off = layout.offsets[m]
        rowc, colc = [0] * n, [0] * n
        if diagonal:
            for x in range(n):
                pairs.add((off + x, off + x))
                rowc[x] += 1
                colc[x] += 1
        cand = [(x, y) for x in range(n) for y in range(n) if x != y]
        rng.shuffle(cand)
        for x, y in cand:
            if rng.random() < density and rowc[y] < max_deg and colc[x] < max_deg:
                pairs.add((off + x, off + y))
                rowc[y] += 1
                colc[x] += 1
    return ControlledSet.from_pairs(layout, pairs)


@st.composite
def relations(draw, max_comps=3, max_size=7, diagonal=None):
    sizes = draw(st.lists(st.integers(1, max_size), min_size=1, max_size=max_comps))
    layout = ComponentLayout(tuple(sizes))
    pairs = set()
    with_diag = draw(st.booleans()) if diagonal is None else diagonal
    for m, n in enumerate(sizes):
        off = layout.offsets[m]
        block = [(off + x, off + y) for x in range(n) for y in range(n)]
        pairs |= set(draw(st.lists(st.sampled_from(block), max_size=2 * n)))
        if with_diag:
            pairs |= {(off + x, off + x) for x in range(n)}
    return ControlledSet.from_pairs(layout, pairs)


@pytest.fixture
def rng():
    return random.Random(12345)
