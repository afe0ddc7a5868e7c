"""Genetic-algorithm solver for square-piece jigsaw puzzles (Types 1, 2, 4)."""

from .model import (Chromosome, Piece, Placement, PuzzleSpec, PuzzleType,
                    Relation, apply_dihedral, make_relation, relation_of_adjacency)
from .factory import (BundleError, PuzzleBundle, load_bundle, save_bundle,
                      scramble, shred, shred_two_sided, srgb_to_normalized_lab)
from .compat import CompatibilityTable, build_table, dissimilarity
from .crossover import crossover, parent_relation_set
from .engine import (EvolveResult, GaConfig, evolve, fitness_cost,
                     random_chromosome, select_parent)
from .evaluate import (ScoreReport, direct_comparison, make_oracle_puzzle,
                       neighbor_comparison, score_solution)
from .render import render_chromosome

__version__ = "0.1.0"

__all__ = [
    "Chromosome", "Piece", "Placement", "PuzzleSpec", "PuzzleType", "Relation",
    "apply_dihedral", "make_relation", "relation_of_adjacency",
    "BundleError", "PuzzleBundle", "load_bundle", "save_bundle", "scramble",
    "shred", "shred_two_sided", "srgb_to_normalized_lab",
    "CompatibilityTable", "build_table", "dissimilarity",
    "crossover", "parent_relation_set",
    "EvolveResult", "GaConfig", "evolve", "fitness_cost", "random_chromosome",
    "select_parent",
    "ScoreReport", "direct_comparison", "make_oracle_puzzle",
    "neighbor_comparison", "score_solution",
    "render_chromosome",
    "__version__",
]
