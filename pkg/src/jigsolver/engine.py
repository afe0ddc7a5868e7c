"""Generational GA loop: random population, fitness, roulette selection, elitism.

The objective is a cost (sum of seam dissimilarities over the whole grid,
both faces for two-sided puzzles), so roulette weights use the transform
``weight = (max_cost - cost) + 1e-6 * max_cost``, which keeps selection
pressure proportional while staying strictly positive.

Determinism contract: identical (bundle, config) produce bit-identical
populations, history and best chromosome for any worker count.  All random
streams derive from ``master_seed`` via numpy SeedSequence plus a per-child
64-bit seed consumed inside the compiled crossover.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernel
from .compat import CompatibilityTable
from .crossover import grids_to_chromosome, chromosome_to_grids, partner_matrix
from .factory import PuzzleBundle
from .model import Chromosome, PuzzleSpec, PuzzleType

_WEIGHT_EPS = 1e-6


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 1000
    generations: int = 30
    elite_count: int = 4
    mutation_rate: float = 0.05
    master_seed: int = 0
    workers: int = 1
    stop_at_zero: bool = True   # a zero-cost assembly cannot be improved

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if not 0 <= self.elite_count < self.population_size:
            raise ValueError("elite_count must be in [0, population_size)")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError("mutation_rate must be a probability")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class GenerationStats:
    best_cost: float
    mean_cost: float
    seconds: float


@dataclass
class EvolveResult:
    best: Chromosome
    best_cost: float
    history: list[GenerationStats]

    def history_rows(self) -> list[dict]:
        return [{"generation": i, "best_cost": h.best_cost,
                 "mean_cost": h.mean_cost, "seconds": h.seconds}
                for i, h in enumerate(self.history)]


def _label_grids(piece, rot, face, e, q):
    lat = _kernel.LABEL_AT.astype(np.int64)
    return piece.astype(np.int64) * e + lat[face.astype(np.int64), (q + rot.astype(np.int64)) % 4]


def population_costs(piece, rot, face, table: CompatibilityTable,
                     spec: PuzzleSpec) -> np.ndarray:
    """Vectorized chromosome cost over a (pop, R, C) population."""
    if piece.ndim == 2:
        piece, rot, face = piece[None], rot[None], face[None]
    e = table.edge_count
    li = _label_grids(piece[:, :, :-1], rot[:, :, :-1], face[:, :, :-1], e, 1)
    lj = _label_grids(piece[:, :, 1:], rot[:, :, 1:], face[:, :, 1:], e, 3)
    ui = _label_grids(piece[:, :-1, :], rot[:, :-1, :], face[:, :-1, :], e, 2)
    uj = _label_grids(piece[:, 1:, :], rot[:, 1:, :], face[:, 1:, :], e, 0)
    s = table.scores
    cost = s[li, lj].sum(axis=(1, 2)) + s[ui, uj].sum(axis=(1, 2))
    if spec.puzzle_type is PuzzleType.TYPE4:
        cost = cost + s[li ^ 4, lj ^ 4].sum(axis=(1, 2)) + s[ui ^ 4, uj ^ 4].sum(axis=(1, 2))
    return cost


def fitness_cost(chromosome: Chromosome, table: CompatibilityTable,
                 spec: PuzzleSpec) -> float:
    """Sum of seam dissimilarities; both faces count for Type 4."""
    if not chromosome.is_valid(spec):
        raise ValueError("chromosome is not a valid assembly for this spec")
    piece, rot, face = chromosome_to_grids(chromosome, table)
    return float(population_costs(piece, rot, face, table, spec)[0])


def selection_weights(costs: np.ndarray) -> np.ndarray:
    """Monotone cost-to-weight transform; uniform when all costs are equal."""
    costs = np.asarray(costs, dtype=np.float64)
    max_cost = costs.max(initial=0.0)
    if max_cost <= 0.0:
        return np.ones_like(costs)
    return (max_cost - costs) + _WEIGHT_EPS * max_cost


@dataclass
class EvaluatedPopulation:
    members: list[tuple[Chromosome, float, float]]   # (chromosome, raw_cost, weight)


def evaluate_population(chromosomes: list[Chromosome], table: CompatibilityTable,
                        spec: PuzzleSpec) -> EvaluatedPopulation:
    costs = np.array([fitness_cost(c, table, spec) for c in chromosomes])
    weights = selection_weights(costs)
    return EvaluatedPopulation(list(zip(chromosomes, costs.tolist(), weights.tolist())))


def select_parent(population: EvaluatedPopulation, rng: np.random.Generator) -> Chromosome:
    """Roulette-wheel draw: probability proportional to selection weight."""
    if not population.members:
        raise ValueError("cannot select from an empty population")
    weights = np.array([w for _, _, w in population.members], dtype=np.float64)
    total = weights.sum()
    if total <= 0.0:
        return population.members[rng.integers(len(weights))][0]
    cum = np.cumsum(weights)
    i = int(np.searchsorted(cum, rng.random() * total, side="right"))
    return population.members[min(i, len(weights) - 1)][0]


def random_chromosome(bundle: PuzzleBundle, rng: np.random.Generator) -> Chromosome:
    """Uniform random bijection of pieces to cells with legal random poses."""
    spec = bundle.spec
    ids = np.array([p.id for p in bundle.pieces], dtype=object)
    grid = ids[rng.permutation(spec.piece_count)].reshape(spec.rows, spec.cols)
    if spec.puzzle_type is PuzzleType.TYPE1:
        rot = np.zeros((spec.rows, spec.cols), dtype=np.int8)
    else:
        rot = rng.integers(0, 4, size=(spec.rows, spec.cols), dtype=np.int8)
    if spec.puzzle_type is PuzzleType.TYPE4:
        face = rng.integers(0, 2, size=(spec.rows, spec.cols), dtype=np.int8)
    else:
        face = np.zeros((spec.rows, spec.cols), dtype=np.int8)
    return Chromosome(grid, rot, face)


def _initial_population(n: int, rows: int, cols: int, spec: PuzzleSpec,
                        pop: int, rng: np.random.Generator):
    order = np.argsort(rng.random((pop, n)), axis=1, kind="stable")
    piece = order.reshape(pop, rows, cols).astype(np.int32)
    if spec.puzzle_type is PuzzleType.TYPE1:
        rot = np.zeros((pop, rows, cols), dtype=np.int8)
    else:
        rot = rng.integers(0, 4, size=(pop, rows, cols), dtype=np.int8)
    if spec.puzzle_type is PuzzleType.TYPE4:
        face = rng.integers(0, 2, size=(pop, rows, cols), dtype=np.int8)
    else:
        face = np.zeros((pop, rows, cols), dtype=np.int8)
    return piece, rot, face


def _roulette_indices(weights: np.ndarray, draws: np.ndarray) -> np.ndarray:
    cum = np.cumsum(weights)
    idx = np.searchsorted(cum, draws * cum[-1], side="right")
    return np.minimum(idx, len(weights) - 1)


def evolve(bundle: PuzzleBundle, table: CompatibilityTable, config: GaConfig,
           on_generation=None) -> EvolveResult:
    """Run the generational loop and return the best chromosome ever seen.

    ``on_generation(index, best_chromosome, stats)`` is called after each
    evaluation, including the final population's.
    """
    spec = bundle.spec
    n = spec.piece_count
    e = table.edge_count
    rows, cols = spec.rows, spec.cols
    type_code = int(spec.puzzle_type)
    two_sided = spec.puzzle_type is PuzzleType.TYPE4
    master = config.master_seed

    init_rng = np.random.default_rng(np.random.SeedSequence([master, 0x11]))
    piece, rot, face = _initial_population(n, rows, cols, spec,
                                           config.population_size, init_rng)

    history: list[GenerationStats] = []
    best_cost = np.inf
    best_grids = None
    t_prev = time.perf_counter()

    for gen in range(config.generations + 1):
        costs = population_costs(piece, rot, face, table, spec)
        gen_best = int(np.argmin(costs))
        now = time.perf_counter()
        stats = GenerationStats(best_cost=float(costs[gen_best]),
                                mean_cost=float(costs.mean()),
                                seconds=now - t_prev)
        t_prev = now
        history.append(stats)
        if costs[gen_best] < best_cost:
            best_cost = float(costs[gen_best])
            best_grids = (piece[gen_best].copy(), rot[gen_best].copy(),
                          face[gen_best].copy())
        if on_generation is not None:
            on_generation(gen, grids_to_chromosome(piece[gen_best], rot[gen_best],
                                                   face[gen_best], table), stats)
        if gen == config.generations or (config.stop_at_zero and best_cost == 0.0):
            break

        weights = selection_weights(costs)
        elite_idx = np.argsort(costs, kind="stable")[:config.elite_count]
        n_children = config.population_size - config.elite_count

        gen_rng = np.random.default_rng(np.random.SeedSequence([master, 0x22, gen]))
        draws = gen_rng.random((n_children, 2))
        parent_a = _roulette_indices(weights, draws[:, 0]).astype(np.int64)
        parent_b = _roulette_indices(weights, draws[:, 1]).astype(np.int64)
        child_seeds = np.random.SeedSequence([master, 0x33, gen]).generate_state(
            n_children, dtype=np.uint64)

        pop_partner = partner_matrix(piece, rot, face, e, two_sided)
        child_piece = np.empty((n_children, rows, cols), dtype=np.int32)
        child_rot = np.empty((n_children, rows, cols), dtype=np.int8)
        child_face = np.empty((n_children, rows, cols), dtype=np.int8)

        def run(lo, hi):
            return _kernel.grow_children_range(
                lo, hi, n, e, type_code, rows, cols,
                table.scores, table.sorted_partners, table.bb_partner,
                pop_partner, parent_a, parent_b, child_seeds,
                config.mutation_rate, child_piece, child_rot, child_face)

        if config.workers == 1 or n_children < 2 * config.workers:
            rc = run(0, n_children)
            if rc != 0:
                raise RuntimeError(f"crossover kernel failed with code {rc}")
        else:
            bounds = np.linspace(0, n_children, config.workers + 1, dtype=int)
            with ThreadPoolExecutor(max_workers=config.workers) as pool:
                futures = [pool.submit(run, int(lo), int(hi))
                           for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
                for fut in futures:
                    rc = fut.result()
                    if rc != 0:
                        raise RuntimeError(f"crossover kernel failed with code {rc}")

        next_piece = np.concatenate([piece[elite_idx], child_piece])
        next_rot = np.concatenate([rot[elite_idx], child_rot])
        next_face = np.concatenate([face[elite_idx], child_face])
        piece, rot, face = next_piece, next_rot, next_face

    assert best_grids is not None
    best = grids_to_chromosome(*best_grids, table)
    return EvolveResult(best=best, best_cost=best_cost, history=history)
