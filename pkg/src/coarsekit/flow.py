"""s-t min-cut solvers for coverage objectives.

Every exact search in :mod:`coarsekit.expansion` reduces to

    min over Y subset of B of   sum_{v in T[Y]} c(v)  -  sum_{y in Y} w(y)

with nonnegative integer weights.  Network: source -> y (capacity w(y)),
y -> v for v in T[y] (infinite), v -> sink (capacity c(v)).  A cut with Y on
the source side costs ``sum_{y not in Y} w(y) + sum_{v in T[Y]} c(v)``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order, maximum_flow

_MAX_CAP = 2**31 - 1


def min_cover_cut(
    B: Sequence[int],
    images: Mapping[int, Sequence[int]],
    w: Mapping[int, int],
    c: Mapping[int, int] | None = None,
) -> tuple[int, tuple[int, ...]]:
    """Return ``(value, Y)`` with Y the inclusion-minimal minimizer.

    ``c`` defaults to 1 on every covered point; points missing from ``c``
    cost nothing.
    """
    B = list(B)
    targets = sorted({v for y in B for v in images[y]})
    if c is None:
        c = {v: 1 for v in targets}
    targets = [v for v in targets if c.get(v, 0) > 0]
    tindex = {v: i for i, v in enumerate(targets)}
    nb, nt = len(B), len(targets)
    src, snk = 0, nb + nt + 1
    inf = sum(w[y] for y in B) + sum(c[v] for v in targets) + 1
    if inf > _MAX_CAP:
        raise OverflowError("capacities exceed the int32 range of the flow solver")
    rows, cols, caps = [], [], []
    for i, y in enumerate(B):
        if w[y] > 0:
            rows.append(src)
            cols.append(1 + i)
            caps.append(w[y])
        for v in images[y]:
            j = tindex.get(v)
            if j is not None:
                rows.append(1 + i)
                cols.append(1 + nb + j)
                caps.append(inf)
    for j, v in enumerate(targets):
        rows.append(1 + nb + j)
        cols.append(snk)
        caps.append(c[v])
    n = nb + nt + 2
    cap = csr_matrix((np.array(caps, dtype=np.int32), (rows, cols)), shape=(n, n))
    cap.sum_duplicates()
    res = maximum_flow(cap, src, snk)
    resid = (cap - res.flow).tocsr()
    resid.data[resid.data < 0] = 0
    resid.eliminate_zeros()
    reach = breadth_first_order(resid, src, directed=True, return_predecessors=False)
    reach = set(reach.tolist())
    Y = tuple(sorted(B[i - 1] for i in reach if 1 <= i <= nb))
    return int(res.flow_value) - sum(w[y] for y in B), Y


def min_ratio_cover(
    B: Sequence[int], images: Mapping[int, Sequence[int]], max_iter: int | None = None
) -> tuple[Fraction, tuple[int, ...], int]:
    """Minimise ``#T[Y] / #Y`` over nonempty ``Y`` in ``B`` by Dinkelbach iteration.

    Returns ``(ratio, witness, iterations)``.  All arithmetic is exact.
    """
    B = sorted(B)
    if not B:
        raise ValueError("B must be nonempty")
    if max_iter is None:
        max_iter = 2 * len(B)

    def cover(Y):
        return len({v for y in Y for v in images[y]})

    Y = tuple(B)
    lam = Fraction(cover(Y), len(Y))
    for it in range(1, max_iter + 1):
        p, q = lam.numerator, lam.denominator
        # q * (#T[Y] - lam #Y) = sum_cover q - sum_Y p
        val, Ynew = min_cover_cut(B, images, {y: p for y in B}, {v: q for y in B for v in images[y]})
        if val >= 0:
            return lam, Y, it
        Y = Ynew
        lam = Fraction(cover(Y), len(Y))
    raise RuntimeError(f"Dinkelbach did not converge in {max_iter} iterations")
