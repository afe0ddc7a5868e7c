"""Independent reference implementations used as test oracles.

Everything here is written directly against the geometric definitions with
whole-raster transforms (np.rot90 on full tiles) and deliberately shares no
code with the package's edge-sequence machinery.
"""

import numpy as np

from jigsolver.model import Chromosome, Piece, PuzzleSpec, PuzzleType

# label -> (face, position of that label on the face's raster at rotation 0)
_LABEL_HOME = {0: (0, 0), 1: (0, 1), 2: (0, 2), 3: (0, 3),
               4: (1, 0), 5: (1, 3), 6: (1, 2), 7: (1, 1)}


def _raster_with_label_at(piece: Piece, label: int, target_pos: int) -> np.ndarray:
    """Rotate the owning face's raster so ``label`` sits at ``target_pos``."""
    face, home = _LABEL_HOME[label]
    raster = piece.front if face == 0 else piece.back
    if raster is None:
        raise ValueError("label lives on a missing face")
    # rotating by k CCW moves the boundary at position p to position (p - k) % 4
    return np.rot90(raster, (home - target_pos) % 4)


def brute_dissimilarity(piece_i: Piece, label_i: int,
                        piece_j: Piece, label_j: int) -> float:
    """Abut labeled edges left-against-right and sum squared channel gaps."""
    left = _raster_with_label_at(piece_i, label_i, 1)
    right = _raster_with_label_at(piece_j, label_j, 3)
    diff = left[:, -1, :].astype(np.float64) - right[:, 0, :].astype(np.float64)
    return float(np.sqrt((diff * diff).sum()))


def brute_fitness(chromosome: Chromosome, pieces: dict[str, Piece],
                  spec: PuzzleSpec) -> float:
    """Chromosome cost from displayed rasters, no edge-label bookkeeping.

    Paints each cell's visible tile, sums seam gaps over the painted grid,
    and repeats on the flipped assembly for two-sided puzzles.
    """
    total = 0.0
    sides = [False, True] if spec.puzzle_type is PuzzleType.TYPE4 else [False]
    for flipped in sides:
        tiles = {}
        for r in range(spec.rows):
            for c in range(spec.cols):
                pl = chromosome.placement(r, c)
                face, rot, col = pl.face, pl.rotation, c
                if flipped:
                    # turning the whole assembly over shows each piece's other
                    # face, mirrors columns and reverses the rotation sense
                    face, rot, col = face ^ 1, (-rot) % 4, spec.cols - 1 - c
                raster = pieces[pl.piece].front if face == 0 else pieces[pl.piece].back
                tiles[(r, col)] = np.rot90(raster, rot)
        for r in range(spec.rows):
            for c in range(spec.cols):
                if c + 1 < spec.cols:
                    d = tiles[(r, c)][:, -1, :] - tiles[(r, c + 1)][:, 0, :]
                    total += float(np.sqrt((d * d).sum()))
                if r + 1 < spec.rows:
                    d = tiles[(r, c)][-1, :, :] - tiles[(r + 1, c)][0, :, :]
                    total += float(np.sqrt((d * d).sum()))
    return total
