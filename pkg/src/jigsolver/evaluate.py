"""Solution scoring against ground truth, plus synthetic oracle puzzles.

Direct comparison counts pieces whose cell, rotation and face all match the
truth, maximized over the legal global transforms of the puzzle type (the
solver legitimately reconstructs in any orientation, and for two-sided
puzzles possibly from the other side).  Neighbor comparison counts ground
truth seams whose relation appears in the solution and is invariant to those
transforms by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .compat import build_table
from .factory import PuzzleBundle, scramble, shred, shred_two_sided
from .model import (Chromosome, PuzzleSpec, PuzzleType, Relation,
                    apply_dihedral, dihedral_transforms, make_relation,
                    relation_of_adjacency)


@dataclass(frozen=True)
class ScoreReport:
    direct: float
    neighbor: float
    perfect: bool
    best_transform: tuple[int, bool]    # (quarter turns CCW, flipped)

    def to_json(self) -> dict:
        return {"direct": self.direct, "neighbor": self.neighbor,
                "perfect": self.perfect,
                "best_transform": {"quarter_turns": self.best_transform[0],
                                   "flip": self.best_transform[1]}}


def _check_same_pieces(solution: Chromosome, truth: Chromosome) -> None:
    if set(solution.pieces.ravel()) != set(truth.pieces.ravel()):
        raise ValueError("solution and truth cover different piece sets")


def direct_comparison(solution: Chromosome, truth: Chromosome,
                      spec: PuzzleSpec) -> tuple[float, tuple[int, bool]]:
    """Fraction of pieces in the correct absolute cell, pose and face."""
    _check_same_pieces(solution, truth)
    best = -1.0
    best_t = (0, False)
    for turns, flip in dihedral_transforms(spec):
        cand = apply_dihedral(solution, turns, flip, spec)
        if cand.shape != truth.shape:
            continue
        hits = ((cand.pieces == truth.pieces)
                & (cand.rotations == truth.rotations)
                & (cand.faces == truth.faces))
        frac = float(hits.mean())
        if frac > best:
            best, best_t = frac, (turns, flip)
    if best < 0.0:
        best, best_t = 0.0, (0, False)
    return best, best_t


def truth_seams(truth: Chromosome) -> list[Relation]:
    """One relation per physical seam of the truth (visible side only)."""
    rows, cols = truth.shape
    seams = []
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                seams.append(relation_of_adjacency(
                    truth.placement(r, c), truth.placement(r, c + 1), "horizontal"))
            if r + 1 < rows:
                seams.append(relation_of_adjacency(
                    truth.placement(r, c), truth.placement(r + 1, c), "vertical"))
    return seams


def neighbor_comparison(solution: Chromosome, truth: Chromosome,
                        spec: PuzzleSpec) -> float:
    """Fraction of truth seams present in the solution, counted per seam.

    The solution's relation set carries both faces of every seam for Type 4,
    so membership of the visible-side relation already requires the hidden
    side to match too.
    """
    _check_same_pieces(solution, truth)
    have = solution.relation_set(spec)
    seams = truth_seams(truth)
    return sum(rel in have for rel in seams) / len(seams)


def score_solution(solution: Chromosome, truth: Chromosome,
                   spec: PuzzleSpec) -> ScoreReport:
    direct, transform = direct_comparison(solution, truth, spec)
    neighbor = neighbor_comparison(solution, truth, spec)
    return ScoreReport(direct=direct, neighbor=neighbor,
                       perfect=(direct == 1.0), best_transform=transform)


# ---------------------------------------------------------------------------
# oracle puzzles: boundary-coded bundles where truth is the unique zero


def _oracle_image(spec: PuzzleSpec, rng: np.random.Generator) -> np.ndarray:
    """Random tiling whose true seams match exactly and outer edges shadow
    interior seam codes, so mutual best pairs are exactly the true seams."""
    n_r, n_c, w = spec.rows, spec.cols, spec.tile_size
    img = rng.integers(0, 256, size=(n_r * w, n_c * w, 3), dtype=np.uint8)

    seam_codes = []
    for _ in range(n_r * (n_c - 1) + n_c * (n_r - 1)):
        seam_codes.append(rng.integers(0, 256, size=(w, 3), dtype=np.uint8))

    def outer_code() -> np.ndarray:
        # near-copy of a random seam code: its nearest neighbors are that
        # seam's two edges, which are mutually closest to each other, so the
        # outer edge can never be part of a mutual best pair
        base = seam_codes[int(rng.integers(len(seam_codes)))].astype(np.int16)
        jitter = rng.integers(-2, 3, size=base.shape, dtype=np.int16)
        jitter[0, 0] = 3
        return np.clip(base + jitter, 0, 255).astype(np.uint8)

    for c in range(n_c):
        img[0, c * w:(c + 1) * w] = outer_code()
        img[-1, c * w:(c + 1) * w] = outer_code()
    for r in range(n_r):
        img[r * w:(r + 1) * w, 0] = outer_code()
        img[r * w:(r + 1) * w, -1] = outer_code()

    k = 0
    for r in range(n_r):            # vertical seams: duplicate the code on both sides
        for c in range(n_c - 1):
            code = seam_codes[k]; k += 1
            img[r * w:(r + 1) * w, (c + 1) * w - 1] = code
            img[r * w:(r + 1) * w, (c + 1) * w] = code
    for r in range(n_r - 1):        # horizontal seams
        for c in range(n_c):
            code = seam_codes[k]; k += 1
            img[(r + 1) * w - 1, c * w:(c + 1) * w] = code
            img[(r + 1) * w, c * w:(c + 1) * w] = code
    # seam crossings: the 2x2 pixel block spanning four pieces must agree
    for r in range(n_r - 1):
        for c in range(n_c - 1):
            img[(r + 1) * w - 1:(r + 1) * w + 1,
                (c + 1) * w - 1:(c + 1) * w + 1] = rng.integers(0, 256, size=3,
                                                                dtype=np.uint8)
    return img


def oracle_is_sound(bundle: PuzzleBundle) -> bool:
    """Exhaustively confirm zero scores and best buddies are exactly the truth."""
    spec = bundle.spec
    assert bundle.ground_truth is not None
    table = build_table(bundle.pieces, spec)
    truth_rels = bundle.ground_truth.relation_set(spec)
    e = table.edge_count
    zero_rows, zero_cols = np.nonzero(table.scores == 0.0)
    zero_rels = set()
    for a, b in zip(zero_rows, zero_cols):
        if a < b:
            zero_rels.add(make_relation(table.piece_ids[a // e], int(a % e),
                                        table.piece_ids[b // e], int(b % e)))
    if zero_rels != truth_rels:
        return False
    return table.best_buddies() == truth_rels


def make_oracle_puzzle(spec: PuzzleSpec, seed: int = 0,
                       max_attempts: int = 25) -> PuzzleBundle:
    """Synthesize a scrambled bundle whose ground truth is the unique
    zero-cost assembly and whose best-buddy set equals the truth seams.

    Constructed candidates are verified exhaustively; on (rare) failure the
    construction retries with a derived seed.
    """
    for attempt in range(max_attempts):
        rng = np.random.default_rng(np.random.SeedSequence([seed, 0x07, attempt]))
        sub = int(rng.integers(2 ** 31))
        if spec.puzzle_type is PuzzleType.TYPE4:
            front = _oracle_image(spec, rng)
            back = _oracle_image(spec, rng)
            bundle = shred_two_sided(front, back, spec, seed=sub)
        else:
            bundle = shred(_oracle_image(spec, rng), spec, seed=sub)
        bundle = scramble(bundle, seed=sub ^ 0x5A5A)
        if oracle_is_sound(bundle):
            return bundle
    raise RuntimeError(f"could not build a sound oracle puzzle in {max_attempts} tries")
