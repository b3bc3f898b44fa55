"""Command-line driver.

Subcommands: project, coldstart, select, baseline, metrics, scatter, runs.
Exit codes: 0 success, 2 usage error (argparse), 1 data error. All
randomness flows from --seed, so identical flags on identical inputs give
byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io as cio
from .acquisition import acquisition_round, image_entropy, normalize_entropies
from .clustering import KSweepConfig, choose_k
from .cold_start import cold_start_select, kmeans_to_budget_select, random_select
from .errors import ColdselectError, CountMismatch, IoError
from .metrics import RunStats, coverage_radius, hd95, mean_dice
from .projection import TsneConfig, run_tsne
from .types import (DEFAULT_SEED, DEFAULT_SEEDS, RunConfig, ScoreBlend,
                    align)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coldselect",
        description="Budget-constrained sample selection for annotation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("project", help="embed the pool into 2D (coords.bin)")
    p.add_argument("--data", required=True, help="dataset directory")
    p.add_argument("--perplexity", type=float, default=None)
    p.add_argument("--iters", type=int, default=1000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)

    p = sub.add_parser("coldstart", help="medoid + farthest-point selection")
    p.add_argument("--data", required=True)
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--k-min", type=int, default=2)
    p.add_argument("--k-max", type=int, default=None,
                   help="default: min(budget, 10, N-1)")
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", default=None, help="default: <data>/manifest.json")

    p = sub.add_parser("select", help="entropy+diversity acquisition round")
    p.add_argument("--data", required=True)
    p.add_argument("--budget", type=int, required=True,
                   help="items to acquire this round")
    p.add_argument("--alpha", type=float, default=0.3)
    p.add_argument("--manifest", required=True, help="prior manifest to extend")
    p.add_argument("--probs", default=None, help="default: <data>/probs")
    p.add_argument("--out", default=None, help="default: overwrite --manifest")

    p = sub.add_parser("baseline", help="random or k-means-to-budget policy")
    p.add_argument("--data", required=True)
    p.add_argument("--policy", required=True,
                   choices=["random", "kmeans-to-budget"])
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", default=None, help="default: <data>/manifest.json")

    p = sub.add_parser("metrics", help="Dice / HD95 report over mask dirs")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--mode", choices=["per-class", "image"],
                   default="per-class")
    p.add_argument("--spacing", type=float, nargs=2, default=(1.0, 1.0),
                   metavar=("SY", "SX"))
    p.add_argument("--out", default=None, help="default: stdout")

    p = sub.add_parser("scatter", help="per-item CSV of the 2D layout")
    p.add_argument("--data", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", default=None, help="default: <data>/scatter.csv")

    p = sub.add_parser("runs", help="seeded policy comparison (seeds 43..53)")
    p.add_argument("--data", required=True)
    p.add_argument("--policy", required=True,
                   choices=["cold-start", "random", "kmeans-to-budget"])
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--k-min", type=int, default=2)
    p.add_argument("--k-max", type=int, default=None)
    p.add_argument("--out", default=None, help="default: stdout")

    return parser


def _load_pool(data_dir):
    """Items, full-pool projection, and the non-test subset with indices."""
    items = cio.read_items(data_dir)
    embeddings = cio.read_embeddings(data_dir)
    try:
        projection = cio.read_coords(data_dir, embeddings.ids)
    except FileNotFoundError:
        raise IoError(
            f"{data_dir}/coords.bin not found; run `coldselect project` first"
        ) from None
    align(projection, embeddings)
    pool_indices = [i for i, it in enumerate(items)
                    if it.split != cio.SPLIT_TEST]
    if not pool_indices:
        raise IoError("every item is marked as test; nothing to select from")
    return items, projection, projection.subset(pool_indices)


def _cmd_project(args) -> int:
    embeddings = cio.read_embeddings(args.data)
    config = TsneConfig(perplexity=args.perplexity, iterations=args.iters,
                        seed=args.seed)
    projection = run_tsne(embeddings, config)
    cio.write_coords(args.data, projection)
    cio.write_tsne_sidecar(args.data, config.to_dict(embeddings.n_items))
    print(f"projected {embeddings.n_items} items -> {args.data}/coords.bin")
    return 0


def _sweep_for(args, n_pool: int) -> KSweepConfig:
    k_max = args.k_max
    if k_max is None:
        k_max = min(args.budget, 10, n_pool - 1)
    return KSweepConfig(k_min=args.k_min, k_max=k_max, seed=args.seed,
                        restarts=getattr(args, "restarts", 10))


def _cmd_coldstart(args) -> int:
    _, _, pool = _load_pool(args.data)
    sweep = _sweep_for(args, pool.n_items)
    clustering = choose_k(pool, sweep)
    run_config = RunConfig(budget=args.budget, acquisition=0, alpha=None,
                           seed=args.seed, k_min=sweep.k_min,
                           k_max=sweep.k_max,
                           tsne=cio.read_tsne_sidecar(args.data))
    manifest = cold_start_select(pool, clustering, args.budget,
                                 run_config=run_config)
    out = args.out or str(Path(args.data) / "manifest.json")
    cio.write_manifest(manifest, out)
    print(f"selected {args.budget} items (k_hat={clustering.k_hat}) -> {out}")
    return 0


def _cmd_select(args) -> int:
    _, _, pool = _load_pool(args.data)
    prior = cio.read_manifest(args.manifest)
    id_to_pos = {item_id: i for i, item_id in enumerate(pool.ids)}
    missing = [i for i in prior.ids if i not in id_to_pos]
    if missing:
        raise CountMismatch(
            f"manifest ids not in the selection pool: {', '.join(missing)}"
        )
    selected = [id_to_pos[i] for i in prior.ids]
    candidates = [i for i in range(pool.n_items) if i not in set(selected)]

    probs_dir = Path(args.probs) if args.probs else Path(args.data) / "probs"
    paths = []
    for i in candidates:
        path = probs_dir / f"{pool.ids[i]}.prb"
        if not path.exists():
            raise IoError(f"missing probability map for candidate "
                          f"'{pool.ids[i]}': {path}")
        paths.append(path)
    maps = cio.load_probability_maps(paths)
    raw = [image_entropy(m) for m in maps]
    blend = ScoreBlend(alpha=args.alpha)
    table = normalize_entropies(raw, epsilon=blend.epsilon,
                                indices=candidates)
    entries = acquisition_round(pool, table, selected, args.budget, blend)

    rc = prior.run_config
    run_config = RunConfig(
        budget=rc.budget + args.budget,
        acquisition=rc.acquisition + args.budget,
        alpha=args.alpha, seed=rc.seed, k_min=rc.k_min, k_max=rc.k_max,
        tsne=rc.tsne,
    )
    manifest = prior.extended(entries, run_config)
    out = args.out or args.manifest
    cio.write_manifest(manifest, out)
    print(f"acquired {args.budget} items (alpha={args.alpha}) -> {out}")
    return 0


def _cmd_baseline(args) -> int:
    _, _, pool = _load_pool(args.data)
    run_config = RunConfig(budget=args.budget, seed=args.seed)
    if args.policy == "random":
        manifest = random_select(pool.ids, args.budget, args.seed,
                                 run_config=run_config)
    else:
        manifest = kmeans_to_budget_select(pool, args.budget, args.seed,
                                           run_config=run_config)
    out = args.out or str(Path(args.data) / "manifest.json")
    cio.write_manifest(manifest, out)
    print(f"{args.policy} selected {args.budget} items -> {out}")
    return 0


def _cmd_metrics(args) -> int:
    pred_dir, truth_dir = Path(args.pred), Path(args.truth)
    stems = sorted(
        {p.stem for p in pred_dir.glob("*.msk")}
        & {p.stem for p in truth_dir.glob("*.msk")}
    )
    if not stems:
        raise IoError("no matching .msk pairs between --pred and --truth")
    mode = "per_class_mean" if args.mode == "per-class" else "image_level"
    spacing = tuple(args.spacing)
    per_item = []
    for stem in stems:
        pred = cio.read_mask(pred_dir / f"{stem}.msk")
        truth = cio.read_mask(truth_dir / f"{stem}.msk")
        d = mean_dice(pred, truth, mode=mode)
        hds = []
        for c in range(1, truth.num_classes):
            if (pred.labels == c).any() and (truth.labels == c).any():
                hds.append(hd95(pred, truth, c, spacing=spacing))
        per_item.append({
            "id": stem,
            "dice": d,
            "hd95": float(np.mean(hds)) if hds else None,
        })
    dices = [r["dice"] for r in per_item]
    hd_vals = [r["hd95"] for r in per_item if r["hd95"] is not None]
    report = {
        "mode": args.mode,
        "count": len(per_item),
        "dice": {"mean": float(np.mean(dices)),
                 "std": float(np.std(dices)),
                 "median": float(np.median(dices))},
        "hd95": None if not hd_vals else {
            "mean": float(np.mean(hd_vals)),
            "std": float(np.std(hd_vals)),
            "median": float(np.median(hd_vals))},
        "items": per_item,
    }
    text = json.dumps(report, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_scatter(args) -> int:
    items, projection, pool = _load_pool(args.data)
    manifest = cio.read_manifest(args.manifest)
    rc = manifest.run_config
    clustering = None
    if rc.k_min is not None and rc.k_max is not None:
        sweep = KSweepConfig(k_min=rc.k_min, k_max=rc.k_max, seed=rc.seed)
        clustering = choose_k(pool, sweep)
    test_ids = [it.id for it in items if it.split == cio.SPLIT_TEST]
    out = args.out or str(Path(args.data) / "scatter.csv")
    cio.export_scatter(projection, clustering, manifest, out,
                       test_ids=test_ids)
    print(f"wrote {out}")
    return 0


def _cmd_runs(args) -> int:
    items = cio.read_items(args.data)
    embeddings = cio.read_embeddings(args.data)
    pool_indices = [i for i, it in enumerate(items)
                    if it.split != cio.SPLIT_TEST]
    values = []
    for seed in DEFAULT_SEEDS:
        # random init: the seed must re-randomize every stochastic stage,
        # and PCA-initialized projections would be seed-invariant
        config = TsneConfig(seed=seed, init="random-gaussian")
        projection = run_tsne(embeddings, config)
        pool = projection.subset(pool_indices)
        if args.policy == "random":
            manifest = random_select(pool.ids, args.budget, seed)
        elif args.policy == "kmeans-to-budget":
            manifest = kmeans_to_budget_select(pool, args.budget, seed)
        else:
            k_max = args.k_max or min(args.budget, 10, pool.n_items - 1)
            sweep = KSweepConfig(k_min=args.k_min, k_max=k_max, seed=seed)
            manifest = cold_start_select(pool, choose_k(pool, sweep),
                                         args.budget)
        pos = {item_id: i for i, item_id in enumerate(pool.ids)}
        selected = [pos[i] for i in manifest.ids]
        values.append(coverage_radius(selected, pool.coords))
    stats = RunStats.from_values(DEFAULT_SEEDS, values)
    report = {
        "policy": args.policy,
        "budget": args.budget,
        "metric": "coverage_radius",
        "seeds": list(stats.seeds),
        "values": list(stats.values),
        "mean": stats.mean,
        "std": stats.std,
        "median": stats.median,
    }
    text = json.dumps(report, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


_COMMANDS = {
    "project": _cmd_project,
    "coldstart": _cmd_coldstart,
    "select": _cmd_select,
    "baseline": _cmd_baseline,
    "metrics": _cmd_metrics,
    "scatter": _cmd_scatter,
    "runs": _cmd_runs,
}


def cli(argv) -> int:
    """Run one invocation; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return _COMMANDS[args.command](args)
    except (ColdselectError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
