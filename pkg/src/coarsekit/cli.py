"""Command-line front door: ``coarsekit <command> [flags]``.

Exit status: 0 on success, 1 when the verdict is negative (no witness, a
failed condition, a failed identity), 2 on input errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import asdict, dataclass, field

from .coarse_core import ComponentMetric, cs_power
from .expansion import (
    component_adjacency,
    enumeration_cap,
    best_fiber,
    expander_check,
    expansion_profile,
    fmt_ratio,
    folner_search,
    parse_ratio,
    spectral_gap,
    ula_witness,
    weak_expander_report,
)
from .group_spaces import BoxSpaceSpec, build_cyclic_tower, build_sl2_tower, generator_relation
from .labels import label_decompose
from .translation_algebra import relation_suite

DEFAULT_SEED = 20240229

COMMANDS = ("gen", "label", "expansion", "weakexp", "folner", "spectrum", "expander-check", "fiber", "ula",
            "algebra-suite")


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    source: dict = field(default_factory=dict)
    depth: list = field(default_factory=lambda: [1])
    eps: str = "1/10"
    R: int = 1
    S: int = 4
    c: str = "1/10"
    cap: int = 20
    radius_cap: int = 5
    seed: int = DEFAULT_SEED
    trials: int = 1000
    method: str = "mincut"
    tail: int | None = None
    workers: int = 1
    out: str | None = None
    format: str = "json"

    def resolved(self) -> dict:
        # workers and output location do not influence results
        d = asdict(self)
        for key in ("workers", "out"):
            d.pop(key)
        return d


def _int_list(s: str) -> list[int]:
    try:
        return [int(v) for v in s.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}") from exc


def _ratio(s: str) -> str:
    try:
        r = parse_ratio(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"expected a rational p/q, got {s!r}") from exc
    return fmt_ratio(r)


def _positive(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _add_common(p: argparse.ArgumentParser):
    src = p.add_mutually_exclusive_group()
    src.add_argument("--tower", help="tower JSON file")
    src.add_argument("--sizes", type=_int_list, help="build a cyclic tower with these sizes")
    src.add_argument("--primes", type=_int_list, help="build an SL(2,Z/p) tower for these primes")
    p.add_argument("--depth", type=_int_list, default=[1], help="depth n or comma list")
    p.add_argument("--eps", type=_ratio, default="1/10")
    p.add_argument("--R", type=int, default=1)
    p.add_argument("--S", type=int, default=4)
    p.add_argument("--c", type=_ratio, default="1/10")
    p.add_argument("--cap", type=_positive, default=None, help="enumeration cap (env COARSEKIT_CAP)")
    p.add_argument("--radius-cap", type=_positive, default=5)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--trials", type=_positive, default=1000)
    p.add_argument("--method", choices=("mincut", "brute"), default="mincut")
    p.add_argument("--tail", type=int, default=None, help="first component of the liminf tail")
    p.add_argument("--workers", type=_positive, default=os.cpu_count() or 1)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("json", "csv"), default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coarsekit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True
    gen = sub.add_parser("gen", help="build or normalise a tower file")
    gen.add_argument("kind", choices=("cyclic", "sl2", "load"))
    _add_common(gen)
    helps = {
        "label": "minimum label of T_K^n",
        "expansion": "profile of T_K over T_K^n-bounded sets",
        "weakexp": "weak-expander profile matrix and verdict",
        "folner": "Følner witness search",
        "spectrum": "top adjacency eigenvalues per component",
        "expander-check": "expander-sequence conditions (1)-(4)",
        "fiber": "fiber extraction for F = T_K^n",
        "ula": "ULA witness search with W = each component",
        "algebra-suite": "randomised operator-identity suite",
    }
    for name, h in helps.items():
        _add_common(sub.add_parser(name, help=h))
    return parser


def config_from_args(args) -> RunConfig:
    if args.command == "gen" and args.kind == "cyclic" and not args.sizes:
        raise InputError("gen cyclic needs --sizes")
    if args.command == "gen" and args.kind == "sl2" and not args.primes:
        raise InputError("gen sl2 needs --primes")
    if args.tower:
        source = {"tower": args.tower}
    elif args.sizes:
        source = {"cyclic": args.sizes}
    elif args.primes:
        source = {"sl2": args.primes}
    else:
        raise InputError("give --tower, --sizes or --primes")
    if args.command == "gen":
        source["gen"] = args.kind
    cap = args.cap if args.cap is not None else enumeration_cap()
    return RunConfig(
        command=args.command, source=source, depth=args.depth, eps=args.eps, R=args.R, S=args.S, c=args.c,
        cap=cap, radius_cap=args.radius_cap, seed=args.seed, trials=args.trials, method=args.method,
        tail=args.tail, workers=args.workers, out=args.out, format=args.format,
    )


def load_tower(source: dict) -> BoxSpaceSpec:
    if "tower" in source:
        try:
            return BoxSpaceSpec.load(source["tower"])
        except OSError as exc:
            raise InputError(f"cannot read tower: {exc}") from exc
    if "cyclic" in source:
        return build_cyclic_tower(source["cyclic"])
    return build_sl2_tower(source["sl2"])


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def execute(cfg: RunConfig) -> tuple[dict | str, int]:
    """Run one command; returns (report, exit status)."""
    spec = load_tower(cfg.source)
    TK = generator_relation(spec)
    lay = spec.layout
    header = {"command": cfg.command, "config": cfg.resolved(), "truncation_depth": spec.truncation_depth,
              "generators": list(spec.generator_names), "tower_kind": spec.kind, "sizes": list(lay.sizes)}
    status = 0
    if cfg.command == "gen":
        return spec.to_json(), 0
    if cfg.format == "csv" and cfg.command not in ("expansion", "weakexp"):
        raise InputError("--format csv is only available for expansion and weakexp")
    if cfg.command in ("label", "expansion", "fiber", "algebra-suite") and len(cfg.depth) != 1:
        raise InputError(f"{cfg.command} takes a single --depth")
    n = cfg.depth[0]
    if n < 1:
        raise InputError("--depth must be >= 1")
    eps, c = parse_ratio(cfg.eps), parse_ratio(cfg.c)

    if cfg.command == "label":
        L = label_decompose(cs_power(TK, n))
        result = L.to_json()
    elif cfg.command == "expansion":
        prof = expansion_profile(TK, cs_power(TK, n), method=cfg.method, bound_name=f"T^{n}",
                                 workers=cfg.workers, cap=cfg.cap)
        if cfg.format == "csv":
            return _csv([(e.component, n, fmt_ratio(e.min)) for e in prof.entries], ["m", "n", "min"]), 0
        result = prof.to_json()
    elif cfg.command == "weakexp":
        rep = weak_expander_report(TK, cfg.depth, c, tail_start=cfg.tail, workers=cfg.workers)
        if cfg.format == "csv":
            rows = [(m, d, fmt_ratio(rep.minima[m][j])) for m in range(len(rep.minima))
                    for j, d in enumerate(rep.depths)]
            return _csv(rows, ["m", "n", "min"]), 0 if rep.consistent else 1
        result = rep.to_json()
        status = 0 if rep.consistent else 1
    elif cfg.command == "folner":
        found = folner_search(TK, eps, radius_cap=cfg.radius_cap)
        result = {"witnesses": [w.to_json() if w else None for w in found], "radius_cap": cfg.radius_cap,
                  "absent_means": "none found within caps"}
        status = 0 if any(found) else 1
    elif cfg.command == "spectrum":
        result = {"spectra": [spectral_gap(component_adjacency(TK, m), m).to_json()
                              for m in range(lay.n_components)]}
    elif cfg.command == "expander-check":
        # built-in towers are Cayley graphs; loaded permutation towers need not be transitive
        ec = expander_check(TK, c, vertex_transitive=spec.kind in ("cyclic", "sl2"))
        result = ec.to_json()
        status = 0 if all(result["conditions"][k] for k in ("connected", "regular", "cardinality_growth",
                                                             "expansion")) else 1
    elif cfg.command == "fiber":
        F = cs_power(TK, n)
        rows = []
        for m in range(lay.n_components):
            fr = best_fiber(F, TK, m)
            rows.append({"component": m, "y": fr.y, "fiber": list(fr.Y), "ratio": fmt_ratio(fr.ratio),
                         "relation_ratio": fmt_ratio(fr.relation_ratio)})
        result = {"fibers": rows}
    elif cfg.command == "ula":
        d = ComponentMetric.from_entourage(TK)
        rows = []
        for m in range(lay.n_components):
            w = ula_witness(d, lay.points(m), eps, cfg.R, cfg.S, component=m)
            rows.append(w.to_json() if w else None)
        result = {"witnesses": rows, "absent_means": "none found within caps"}
        status = 0 if any(rows) else 1
    elif cfg.command == "algebra-suite":
        L = label_decompose(cs_power(TK, n))
        suites = [relation_suite(L, m, cfg.trials, seed=cfg.seed) for m in range(lay.n_components)]
        result = {"suites": suites, "all_pass": all(s["all_pass"] for s in suites)}
        status = 0 if result["all_pass"] else 1
    else:
        raise InputError(f"unknown command {cfg.command}")
    return {**header, "result": result}, status


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = config_from_args(args)
        if cfg.command == "algebra-suite" and args.seed == DEFAULT_SEED:
            print(f"coarsekit: using default seed {DEFAULT_SEED}", file=sys.stderr)
        report, status = execute(cfg)
    except (InputError, ValueError) as exc:
        print(f"coarsekit: error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 2
    text = report if isinstance(report, str) else json.dumps(report, indent=2, sort_keys=True) + "\n"
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
