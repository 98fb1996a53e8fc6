"""Command-line surface.

Subcommands: fit, render, fw, check-conjecture, simulate, sensitivity,
project, stats. Every command is deterministic under a fixed seed and
writes machine-readable output (JSON, CSV, or SVG). Option precedence is
command line > TOML config file (--config) > built-in defaults, with the
environment variable TROPPCA_SEED as the seed fallback.

Exit codes: 0 success, 1 usage error, 2 Newick parse error, 3 numeric or
data infeasibility (non-equidistant input without --force-equidistant,
oversized Fermat-Weber instances, solver failures).
"""

import argparse
import json
import os
import sys
import time

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from .fermat_weber import fermat_weber, pull_into_hull
from .mcmc import McmcConfig, fit, fit_single_chain, objective, statistics
from .newick import (
    NewickError,
    NotEquidistantError,
    cophenetic,
    parse_newick,
    parse_newick_many,
    repair_equidistant,
    serialize_newick,
    tree_from_ultrametric,
)
from .polytope import TropicalPolytope
from .render import RenderSpec, render_svg
from .treesim import SimConfig, generate, manifest_path, mixture_experiment, write_dataset
from .rng import Rng
from .ultrametrics import Ultrametric

SENSITIVITY_LEAVES = (4, 5, 6, 7, 8, 9)
SENSITIVITY_TREES = (5, 25, 50, 100, 1000)
SENSITIVITY_ITERATIONS = (10, 100, 1000, 10000)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# option resolution

def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _resolve(args, cfg: dict, name: str, default):
    value = getattr(args, name.replace("-", "_"), None)
    if value is not None:
        return value
    if name in cfg:
        return cfg[name]
    return default


def _resolve_seed(args, cfg: dict) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("TROPPCA_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"TROPPCA_SEED must be an integer, got {env!r}")
    return int(cfg.get("seed", 0))


def _mcmc_config(args, cfg: dict) -> McmcConfig:
    return McmcConfig(
        n_vertices=int(_resolve(args, cfg, "vertices", 3)),
        iterations=int(_resolve(args, cfg, "iterations", 1000)),
        cooling_interval=int(_resolve(args, cfg, "cooling-interval", 100)),
        seed=_resolve_seed(args, cfg),
        chains=int(_resolve(args, cfg, "chains", 1)),
    )


# ---------------------------------------------------------------------------
# input handling

def _read_trees(path: str, force_equidistant: bool):
    """Parse a Newick file; returns (trees, repaired flag).

    Files with one tree per line get per-line error reporting; otherwise the
    whole text is parsed as a ';'-separated stream.
    """
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}")

    lines = text.splitlines()
    per_line = lines and all(not ln.strip() or ln.strip().endswith(";") for ln in lines)
    trees = []
    if per_line:
        errors = []
        for lineno, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            try:
                trees.append(parse_newick(line))
            except NewickError as exc:
                errors.append(f"{path}:{lineno}: {exc}")
        if errors:
            raise NewickError("; ".join(errors))
        if not trees:
            raise NewickError(f"{path}: empty input")
    else:
        try:
            trees = parse_newick_many(text)
        except NewickError as exc:
            line = 1 + text.count("\n", 0, exc.position or 0)
            raise NewickError(f"{path}:{line}: {exc}")

    repaired = False
    bad = [i for i, t in enumerate(trees, start=1) if not t.is_equidistant()]
    if bad:
        if not force_equidistant:
            raise NotEquidistantError(
                f"{path}: trees {bad[:10]} are not equidistant "
                "(rerun with --force-equidistant to rescale pendant edges)"
            )
        trees = [repair_equidistant(t) if i in set(bad) else t for i, t in enumerate(trees, start=1)]
        repaired = True
    return trees, repaired


def _as_sample(trees):
    sample = [cophenetic(t) for t in trees]
    labels = sample[0].labels
    for i, u in enumerate(sample[1:], start=2):
        if u.labels != labels:
            raise NotEquidistantError(
                f"tree {i} has leaf set {u.labels}, expected {labels}"
            )
    return sample


def _load_group_labels(args, input_path: str, n: int):
    manifest = getattr(args, "manifest", None) or manifest_path(input_path)
    if not os.path.exists(manifest):
        return None
    with open(manifest) as fh:
        data = json.load(fh)
    labels = data.get("labels")
    if labels is not None and len(labels) != n:
        raise UsageError(f"{manifest}: {len(labels)} labels for {n} trees")
    return labels


def _write_json(args, payload: dict) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if getattr(args, "output", None):
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_fit(path: str):
    with open(path) as fh:
        data = json.load(fh)
    if data.get("format") != "troppca-fit/1":
        raise UsageError(f"{path} is not a troppca fit file")
    return data


def _fit_polytope(data: dict) -> TropicalPolytope:
    return TropicalPolytope(np.asarray(data["vertices_vectors"], dtype=np.float64))


# ---------------------------------------------------------------------------
# subcommands

def cmd_fit(args) -> int:
    cfg = _load_config_file(args.config)
    config = _mcmc_config(args, cfg)
    threads = int(_resolve(args, cfg, "threads", 1))
    trees, repaired = _read_trees(args.input, args.force_equidistant)
    sample = _as_sample(trees)
    group_labels = _load_group_labels(args, args.input, len(sample))

    result = fit(sample, config, workers=threads)
    payload = result.to_json_dict(source=os.path.basename(args.input), group_labels=group_labels)
    payload["repaired"] = repaired
    _write_json(args, payload)
    if args.polytope_output:
        poly = TropicalPolytope([u.vector for u in result.vertices])
        with open(args.polytope_output, "w") as fh:
            json.dump(poly.to_json_dict(labels=result.labels), fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0


def cmd_render(args) -> int:
    data = _load_fit(args.input)
    if len(data["vertices_newick"]) != 3:
        raise UsageError("render requires 3 vertices")
    spec = RenderSpec(
        width=args.width,
        height=args.height,
        mode=args.mode,
        percentile=args.percentile,
    )
    svg = render_svg(
        np.asarray(data["lambdas"]),
        np.asarray(data["projections"]),
        spec,
        labels=data["labels"],
        group_labels=data.get("group_labels"),
    )
    with open(args.output, "w") as fh:
        fh.write(svg)
    return 0


def cmd_fw(args) -> int:
    trees, repaired = _read_trees(args.input, args.force_equidistant)
    sample = _as_sample(trees)
    vectors = np.vstack([u.vector for u in sample])
    result = fermat_weber(vectors, canonical=True)
    pulled = pull_into_hull(vectors, result.point)

    # restore the sample's height gauge before rendering the point as a tree
    shift = float(np.mean([v.mean() for v in vectors]) - pulled.mean())
    if (pulled + shift).min() < 0:
        shift = -float(pulled.min())
    u = Ultrametric(pulled + shift, sample[0].n_leaves, sample[0].labels)
    payload = {
        "objective": result.objective,
        "point": [float(x) for x in pulled],
        "newick": serialize_newick(tree_from_ultrametric(u)),
        "in_hull": True,
        "repaired": repaired,
        "n": len(sample),
    }
    _write_json(args, payload)
    return 0


def cmd_check_conjecture(args) -> int:
    cfg = _load_config_file(args.config)
    config = _mcmc_config(args, cfg)
    threads = int(_resolve(args, cfg, "threads", 1))
    trees, _ = _read_trees(args.input, args.force_equidistant)
    sample = _as_sample(trees)
    vectors = np.vstack([u.vector for u in sample])

    fw = fermat_weber(vectors, canonical=True)
    pulled = pull_into_hull(vectors, fw.point)
    result = fit(sample, config, workers=threads)
    poly = TropicalPolytope([u.vector for u in result.vertices])
    payload = {
        "note": "empirical evidence only",
        "fw_objective": fw.objective,
        "fw_point": [float(x) for x in pulled],
        "pca_r_squared": result.r_squared,
        "pca_pi_unexplained": result.pi_unexplained,
        "fw_in_pca": bool(poly.contains(pulled)),
        "fw_residual_against_pca": float(poly.residual(pulled)),
        "config": config.as_dict(),
    }
    _write_json(args, payload)
    return 0


def cmd_simulate(args) -> int:
    cfg = _load_config_file(args.config)
    seed = _resolve_seed(args, cfg)
    mode = {"caterpillar": "fixed-caterpillar", "coalescent": "random-coalescent"}.get(
        args.mode, args.mode
    )
    rng = Rng(seed)
    if mode == "mixture":
        config = SimConfig(args.m, args.n, "random-coalescent", seed)
        trees, labels = mixture_experiment(config, config, rng)
    else:
        config = SimConfig(args.m, args.n, mode, seed)
        trees = generate(config, rng)
        labels = None
    manifest = {
        "mode": mode,
        "seed": seed,
        "m": args.m,
        "n": len(trees),
        "labels": labels,
    }
    write_dataset(args.output, trees, manifest)
    return 0


def _sensitivity_cell(job):
    mode, m, n, iterations, chain, seed = job
    sim = SimConfig(m, n, mode, seed)
    sample = [cophenetic(t) for t in generate(sim)]
    config = McmcConfig(iterations=iterations, cooling_interval=100, seed=seed)
    start = time.perf_counter()
    result = fit_single_chain(sample, config, chain)
    runtime_ms = (time.perf_counter() - start) * 1000.0
    return {
        "topology_mode": "fixed" if mode == "fixed-caterpillar" else "random",
        "m": m,
        "n": n,
        "iterations": iterations,
        "chain": chain,
        "r_squared": result.r_squared,
        "pi": result.pi_unexplained,
        "runtime_ms": runtime_ms,
    }


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected a comma-separated integer list, got {text!r}")


def cmd_sensitivity(args) -> int:
    cfg = _load_config_file(args.config)
    seed = _resolve_seed(args, cfg)
    threads = int(_resolve(args, cfg, "threads", 1))
    leaves = _int_list(args.m_list)
    trees = _int_list(args.n_list)
    iterations = _int_list(args.iterations_list)
    for values, allowed, what in (
        (leaves, SENSITIVITY_LEAVES, "leaf counts"),
        (trees, SENSITIVITY_TREES, "tree counts"),
        (iterations, SENSITIVITY_ITERATIONS, "iteration counts"),
    ):
        bad = [v for v in values if v not in allowed]
        if bad:
            raise UsageError(f"{what} {bad} not in the study grid {allowed}")
    modes = {
        "fixed": ["fixed-caterpillar"],
        "random": ["random-coalescent"],
        "both": ["fixed-caterpillar", "random-coalescent"],
    }[args.mode]

    jobs = [
        (mode, m, n, iters, chain, seed)
        for mode in modes
        for m in leaves
        for n in trees
        for iters in iterations
        for chain in range(args.chains)
    ]
    if threads > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_sensitivity_cell, jobs))
    else:
        rows = [_sensitivity_cell(job) for job in jobs]

    import csv

    columns = ["topology_mode", "m", "n", "iterations", "chain", "r_squared", "pi", "runtime_ms"]
    out = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        writer = csv.DictWriter(out, fieldnames=columns)
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if args.output:
            out.close()
    return 0


def cmd_project(args) -> int:
    if bool(args.fit) == bool(args.polytope):
        raise UsageError("give exactly one of --fit or --polytope")
    if args.fit:
        poly = _fit_polytope(_load_fit(args.fit))
    else:
        with open(args.polytope) as fh:
            poly, _ = TropicalPolytope.from_json_dict(json.load(fh))
    trees, repaired = _read_trees(args.input, args.force_equidistant)
    sample = _as_sample(trees)
    records = []
    for u in sample:
        proj, lam = poly.project(u.vector)
        records.append(
            {
                "lambdas": [float(x) for x in lam],
                "projection": [float(x) for x in proj],
                "residual": float(poly.residual(u.vector)),
                "in_polytope": bool(poly.contains(u.vector)),
            }
        )
    _write_json(args, {"n": len(records), "repaired": repaired, "projections": records})
    return 0


def cmd_stats(args) -> int:
    data = _load_fit(args.fit)
    vertices = np.asarray(data["vertices_vectors"], dtype=np.float64)
    trees, repaired = _read_trees(args.input, args.force_equidistant)
    sample = _as_sample(trees)
    vectors = np.vstack([u.vector for u in sample])
    pi, s_reg, r2 = statistics(vertices, vectors)
    payload = {
        "n": len(sample),
        "repaired": repaired,
        "pi_unexplained": pi,
        "s_reg": s_reg,
        "r_squared": r2,
        "objective": objective(vertices, vectors),
    }
    _write_json(args, payload)
    return 0


# ---------------------------------------------------------------------------
# parser

def _add_common(sub, *, config=True, seed=True):
    if config:
        sub.add_argument("--config", help="TOML config file (flags win over it)")
    if seed:
        sub.add_argument("--seed", type=int, help="RNG seed (fallback: TROPPCA_SEED, then 0)")


def _add_mcmc_flags(sub):
    sub.add_argument("--vertices", type=int, help="number of polytope vertices (default 3)")
    sub.add_argument("--iterations", type=int, help="MCMC iterations per chain (default 1000)")
    sub.add_argument("--cooling-interval", type=int, help="iterations per k decrement (default 100)")
    sub.add_argument("--chains", type=int, help="independent chains, best kept (default 1)")
    sub.add_argument("--threads", type=int, help="worker processes (default 1)")


def build_parser() -> _Parser:
    parser = _Parser(prog="troppca", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("fit", help="fit a tropical PCA to a Newick file")
    p.add_argument("--input", required=True, help="Newick file of equidistant trees")
    p.add_argument("--output", help="fit JSON path (default: stdout)")
    p.add_argument("--polytope-output", help="also write the fitted polytope JSON here")
    p.add_argument("--manifest", help="dataset manifest with group labels")
    p.add_argument("--force-equidistant", action="store_true",
                   help="rescale pendant edges of non-equidistant trees instead of rejecting")
    _add_mcmc_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_fit)

    p = subs.add_parser("render", help="draw a fitted PCA as an SVG scatter")
    p.add_argument("--input", required=True, help="fit JSON from `troppca fit`")
    p.add_argument("--output", required=True, help="SVG path")
    p.add_argument("--mode", default="by-topology",
                   choices=["by-topology", "by-group", "lower-percentile-black"])
    p.add_argument("--percentile", type=float, default=5.0,
                   help="topologies at or below this sample share are black (default 5)")
    p.add_argument("--width", type=int, default=800)
    p.add_argument("--height", type=int, default=600)
    p.set_defaults(func=cmd_render)

    p = subs.add_parser("fw", help="tropical Fermat-Weber point of a tree sample")
    p.add_argument("--input", required=True)
    p.add_argument("--output", help="JSON path (default: stdout)")
    p.add_argument("--force-equidistant", action="store_true")
    p.set_defaults(func=cmd_fw)

    p = subs.add_parser(
        "check-conjecture",
        help="empirically test whether a Fermat-Weber point lands inside the fitted PCA",
    )
    p.add_argument("--input", required=True)
    p.add_argument("--output", help="JSON path (default: stdout)")
    p.add_argument("--force-equidistant", action="store_true")
    _add_mcmc_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_check_conjecture)

    p = subs.add_parser("simulate", help="generate random equidistant trees")
    p.add_argument("--m", type=int, required=True, help="number of leaves")
    p.add_argument("--n", type=int, required=True, help="trees per group")
    p.add_argument("--mode", default="coalescent",
                   choices=["caterpillar", "coalescent", "mixture"])
    p.add_argument("--output", required=True, help="Newick path (manifest written alongside)")
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = subs.add_parser("sensitivity", help="R-squared grid over the simulation study parameters")
    p.add_argument("--m-list", default="4", help="comma-separated leaf counts (from 4..9)")
    p.add_argument("--n-list", default="25", help="comma-separated tree counts (from 5,25,50,100,1000)")
    p.add_argument("--iterations-list", default="10,100",
                   help="comma-separated iteration counts (from 10,100,1000,10000)")
    p.add_argument("--chains", type=int, default=10)
    p.add_argument("--mode", default="fixed", choices=["fixed", "random", "both"])
    p.add_argument("--threads", type=int, help="worker processes (default 1)")
    p.add_argument("--output", help="CSV path (default: stdout)")
    _add_common(p)
    p.set_defaults(func=cmd_sensitivity)

    p = subs.add_parser("project", help="project trees onto a fitted polytope")
    p.add_argument("--fit", help="fit JSON from `troppca fit`")
    p.add_argument("--polytope", help="polytope JSON")
    p.add_argument("--input", required=True)
    p.add_argument("--output", help="JSON path (default: stdout)")
    p.add_argument("--force-equidistant", action="store_true")
    p.set_defaults(func=cmd_project)

    p = subs.add_parser("stats", help="recompute fit statistics for a tree sample")
    p.add_argument("--fit", required=True, help="fit JSON from `troppca fit`")
    p.add_argument("--input", required=True)
    p.add_argument("--output", help="JSON path (default: stdout)")
    p.add_argument("--force-equidistant", action="store_true")
    p.set_defaults(func=cmd_stats)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except NewickError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except (NotEquidistantError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
