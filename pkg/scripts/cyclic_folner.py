"""Følner witnesses and profile decay along a cyclic tower.

For each component Z/n prints the witness found by ``folner_search`` and the
profile minimum over ``T^d``-bounded sets for a few depths d; the minima
follow (2d + 3)/(2d + 1) until the ball wraps around.

    python scripts/cyclic_folner.py --sizes 25,50,100,200 --eps 1/10
"""

import argparse
import time
from dataclasses import dataclass, field
from fractions import Fraction

from coarsekit.coarse_core import cs_power
from coarsekit.expansion import expansion_profile, fmt_ratio, folner_search
from coarsekit.group_spaces import build_cyclic_tower, generator_relation


@dataclass
class Config:
    sizes: list = field(default_factory=lambda: [25, 50, 100, 200])
    eps: Fraction = Fraction(1, 10)
    radius_cap: int = 10
    depths: list = field(default_factory=lambda: [1, 2, 4, 8, 16])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="25,50,100,200")
    ap.add_argument("--eps", default="1/10")
    ap.add_argument("--radius-cap", type=int, default=10)
    ap.add_argument("--depths", default="1,2,4,8,16")
    a = ap.parse_args(argv)
    cfg = Config([int(s) for s in a.sizes.split(",")], Fraction(a.eps), a.radius_cap,
                 [int(d) for d in a.depths.split(",")])

    TK = generator_relation(build_cyclic_tower(cfg.sizes))
    t0 = time.perf_counter()
    found = folner_search(TK, cfg.eps, radius_cap=cfg.radius_cap)
    print(f"eps = {fmt_ratio(cfg.eps)}, radius cap {cfg.radius_cap}")
    for m, (n, w) in enumerate(zip(cfg.sizes, found)):
        if w is None:
            print(f"  Z/{n}: none within caps")
        else:
            print(f"  Z/{n}: #Y = {len(w.Y)}, #T[Y]/#Y = {fmt_ratio(w.ratio)} ({w.method})")

    print("profile minima by depth:")
    print("  n    " + "  ".join(f"d={d:<5}" for d in cfg.depths))
    profiles = [expansion_profile(TK, cs_power(TK, d)).minima() for d in cfg.depths]
    for m, n in enumerate(cfg.sizes):
        print(f"  {n:<4} " + "  ".join(f"{fmt_ratio(p[m]):<7}" for p in profiles))
    print(f"({time.perf_counter() - t0:.1f}s)")


if __name__ == "__main__":
    main()
