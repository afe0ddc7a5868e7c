"""Command-line pipeline: shred images, solve bundles, score, benchmark.

Exit codes: 0 success, 2 bad input (unreadable image, corrupt bundle, bad
flags), 3 internal failure.
"""

from __future__ import annotations

import json
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import __version__
from .compat import build_table, load_table_cache, save_table_cache
from .engine import GaConfig, evolve
from .evaluate import score_solution
from .factory import (BundleError, bundle_checksum, chromosome_from_json,
                      chromosome_to_json, load_bundle, load_image, save_bundle,
                      scramble, shred, shred_two_sided)
from .model import PuzzleSpec, PuzzleType
from .render import render_chromosome

_INPUT_ERROR = 2
_INTERNAL_ERROR = 3


def _fail_input(message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(_INPUT_ERROR)


@click.group()
@click.version_option(__version__)
def main():
    """Genetic-algorithm jigsaw solver for Type 1, 2 and 4 puzzles."""


def _ga_options(f):
    for opt in reversed([
        click.option("--seed", type=int, default=0, show_default=True,
                     help="Master seed; fixes the whole run."),
        click.option("--population", type=int, default=1000, show_default=True),
        click.option("--generations", type=int, default=30, show_default=True),
        click.option("--elites", type=int, default=4, show_default=True),
        click.option("--mutation", type=float, default=0.05, show_default=True),
        click.option("--workers", type=int, default=1, show_default=True,
                     help="Crossover worker threads; never changes results."),
    ]):
        f = opt(f)
    return f


def _config(seed, population, generations, elites, mutation, workers) -> GaConfig:
    try:
        return GaConfig(population_size=population, generations=generations,
                        elite_count=elites, mutation_rate=mutation,
                        master_seed=seed, workers=workers)
    except ValueError as exc:
        _fail_input(str(exc))


@main.command("shred")
@click.argument("images", nargs=-1, required=True,
                type=click.Path(exists=True, dir_okay=False))
@click.option("--type", "puzzle_type", type=click.Choice(["1", "2", "4"]),
              default="2", show_default=True)
@click.option("--tile", type=int, default=28, show_default=True)
@click.option("--rows", type=int, required=True)
@click.option("--cols", type=int, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(file_okay=False), required=True)
def cmd_shred(images, puzzle_type, tile, rows, cols, seed, out):
    """Cut source image(s) into a scrambled puzzle bundle directory."""
    ptype = PuzzleType(int(puzzle_type))
    try:
        spec = PuzzleSpec(rows=rows, cols=cols, tile_size=tile, puzzle_type=ptype)
    except ValueError as exc:
        _fail_input(str(exc))
    try:
        if ptype is PuzzleType.TYPE4:
            if len(images) != 2:
                _fail_input("Type 4 needs exactly two images (front, back)")
            bundle = shred_two_sided(load_image(images[0]), load_image(images[1]),
                                     spec, seed=seed)
        else:
            if len(images) != 1:
                _fail_input("Types 1 and 2 take exactly one image")
            bundle = shred(load_image(images[0]), spec, seed=seed)
        bundle = scramble(bundle, seed=seed)
        save_bundle(bundle, out)
    except (BundleError, ValueError) as exc:
        _fail_input(str(exc))
    click.echo(f"wrote {spec.piece_count}-piece Type {int(ptype)} bundle to {out}")


def _solve_bundle(bundle_dir, config: GaConfig, out_dir: Path,
                  snapshots: bool, table_cache=None):
    bundle = load_bundle(bundle_dir)
    checksum = bundle_checksum(bundle_dir)
    table = None
    if table_cache is not None:
        table = load_table_cache(table_cache, checksum)
    t0 = time.perf_counter()
    if table is None:
        table = build_table(bundle.pieces, bundle.spec)
        if table_cache is not None:
            save_table_cache(table, table_cache, checksum)
    table_seconds = time.perf_counter() - t0

    out_dir.mkdir(parents=True, exist_ok=True)
    snapshot_files = []

    def on_generation(gen, best, stats):
        if not snapshots:
            return
        sides = ["front"] + (["back"] if bundle.spec.puzzle_type is PuzzleType.TYPE4 else [])
        for side in sides:
            img = render_chromosome(bundle, best, side=side)
            name = f"generation_{gen:03d}_{side}.png"
            from PIL import Image
            Image.fromarray(img).save(out_dir / name)
            snapshot_files.append(name)

    result = evolve(bundle, table, config, on_generation=on_generation)
    total_seconds = table_seconds + sum(h.seconds for h in result.history)

    solution_path = out_dir / "solution.json"
    solution_path.write_text(json.dumps(chromosome_to_json(result.best)))

    report = None
    if bundle.ground_truth is not None:
        report = score_solution(result.best, bundle.ground_truth, bundle.spec)

    manifest = {
        "tool_version": __version__,
        "command": sys.argv,
        "bundle": str(bundle_dir),
        "bundle_checksum": checksum,
        "spec": {"rows": bundle.spec.rows, "cols": bundle.spec.cols,
                 "tile_size": bundle.spec.tile_size,
                 "puzzle_type": int(bundle.spec.puzzle_type)},
        "config": {"population_size": config.population_size,
                   "generations": config.generations,
                   "elite_count": config.elite_count,
                   "mutation_rate": config.mutation_rate,
                   "master_seed": config.master_seed,
                   "workers": config.workers},
        "best_cost": result.best_cost,
        "history": result.history_rows(),
        "timing": {"table_seconds": table_seconds, "total_seconds": total_seconds},
        "score": None if report is None else report.to_json(),
        "solution": solution_path.name,
        "snapshots": snapshot_files,
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2))
    return bundle, result, report, total_seconds


@main.command("solve")
@click.argument("bundle_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--out", type=click.Path(file_okay=False), required=True)
@click.option("--snapshots", is_flag=True,
              help="Render the per-generation best assembly (per face).")
@click.option("--table-cache", type=click.Path(dir_okay=False), default=None,
              help="Binary cache file for the compatibility table.")
@_ga_options
def cmd_solve(bundle_dir, out, snapshots, table_cache,
              seed, population, generations, elites, mutation, workers):
    """Solve a puzzle bundle; writes solution.json, manifest.json, snapshots."""
    config = _config(seed, population, generations, elites, mutation, workers)
    try:
        bundle, result, report, secs = _solve_bundle(
            bundle_dir, config, Path(out), snapshots, table_cache)
    except (BundleError, ValueError) as exc:
        _fail_input(str(exc))
    line = f"best cost {result.best_cost:.6g} in {secs:.1f}s"
    if report is not None:
        line += (f"; direct {report.direct:.2%}, neighbor {report.neighbor:.2%}"
                 f"{', perfect' if report.perfect else ''}")
    click.echo(line)


@main.command("eval")
@click.argument("bundle_dir", type=click.Path(exists=True, file_okay=False))
@click.argument("solution", type=click.Path(exists=True, dir_okay=False))
def cmd_eval(bundle_dir, solution):
    """Score a solution file against a bundle's ground truth."""
    try:
        bundle = load_bundle(bundle_dir)
        if bundle.ground_truth is None:
            _fail_input(f"bundle {bundle_dir} has no ground truth")
        chromosome = chromosome_from_json(json.loads(Path(solution).read_text()))
        report = score_solution(chromosome, bundle.ground_truth, bundle.spec)
    except (BundleError, ValueError, KeyError, json.JSONDecodeError) as exc:
        _fail_input(str(exc))
    doc = report.to_json()
    Path(solution).with_suffix(".score.json").write_text(json.dumps(doc, indent=2))
    click.echo(json.dumps(doc))


@main.command("bench")
@click.argument("set_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--repeats", type=int, default=5, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Write the machine-readable report to this JSON file.")
@_ga_options
def cmd_bench(set_dir, repeats, out,
              seed, population, generations, elites, mutation, workers):
    """Run the solver repeatedly over a directory of bundles and aggregate.

    Reports per-image best/worst/average neighbor score over the repeats and
    set-level averages with the standard deviation, plus direct scores and
    perfect reconstruction counts.
    """
    if repeats < 1:
        _fail_input("--repeats must be >= 1")
    bundles = sorted(p for p in Path(set_dir).iterdir()
                     if (p / "manifest.json").is_file())
    if not bundles:
        _fail_input(f"no bundles found under {set_dir}")
    rows = []
    t_start = time.perf_counter()
    for i, bundle_dir in enumerate(bundles):
        try:
            bundle = load_bundle(bundle_dir)
        except BundleError as exc:
            _fail_input(str(exc))
        if bundle.ground_truth is None:
            _fail_input(f"bundle {bundle_dir} has no ground truth to score against")
        table = build_table(bundle.pieces, bundle.spec)
        run_rows = []
        for rep in range(repeats):
            run_seed = int(np.random.SeedSequence(
                [seed, 0xB0, i, rep]).generate_state(1, dtype=np.uint64)[0] >> 1)
            config = _config(run_seed, population, generations, elites,
                             mutation, workers)
            t0 = time.perf_counter()
            result = evolve(bundle, table, config)
            secs = time.perf_counter() - t0
            report = score_solution(result.best, bundle.ground_truth, bundle.spec)
            run_rows.append({"seed": run_seed, "seconds": secs,
                             "best_cost": result.best_cost,
                             "direct": report.direct,
                             "neighbor": report.neighbor,
                             "perfect": report.perfect})
        neigh = [r["neighbor"] for r in run_rows]
        rows.append({
            "bundle": bundle_dir.name,
            "pieces": bundle.spec.piece_count,
            "runs": run_rows,
            "neighbor_best": max(neigh),
            "neighbor_worst": min(neigh),
            "neighbor_avg": float(np.mean(neigh)),
            "neighbor_std": float(np.std(neigh)),
            "direct_best": max(r["direct"] for r in run_rows),
            "perfect_any": any(r["perfect"] for r in run_rows),
        })
        best = rows[-1]
        click.echo(f"{bundle_dir.name}: best {best['neighbor_best']:.2%} "
                   f"worst {best['neighbor_worst']:.2%} avg {best['neighbor_avg']:.2%}"
                   f"{' perfect' if best['perfect_any'] else ''}")
    summary = {
        "images": len(rows),
        "repeats": repeats,
        "avg_best_neighbor": float(np.mean([r["neighbor_best"] for r in rows])),
        "avg_worst_neighbor": float(np.mean([r["neighbor_worst"] for r in rows])),
        "avg_avg_neighbor": float(np.mean([r["neighbor_avg"] for r in rows])),
        "avg_std_neighbor": float(np.mean([r["neighbor_std"] for r in rows])),
        "avg_best_direct": float(np.mean([r["direct_best"] for r in rows])),
        "perfect_images": sum(r["perfect_any"] for r in rows),
        "total_seconds": time.perf_counter() - t_start,
    }
    click.echo(f"set: avg best {summary['avg_best_neighbor']:.2%} "
               f"avg worst {summary['avg_worst_neighbor']:.2%} "
               f"avg avg {summary['avg_avg_neighbor']:.2%} "
               f"avg std {summary['avg_std_neighbor']:.2%} "
               f"perfect {summary['perfect_images']}/{summary['images']}")
    if out:
        Path(out).write_text(json.dumps({"summary": summary, "images": rows}, indent=2))


if __name__ == "__main__":
    main()
