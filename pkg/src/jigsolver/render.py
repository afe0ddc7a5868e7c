"""Rendering assembled chromosomes back into RGB images."""

from __future__ import annotations

import numpy as np

from .factory import PuzzleBundle
from .model import Chromosome, PuzzleType, apply_dihedral


def render_chromosome(bundle: PuzzleBundle, chromosome: Chromosome,
                      side: str = "front") -> np.ndarray:
    """Paint the visible tiles of an assembly into one uint8 raster.

    ``side='back'`` renders what you would see after physically flipping the
    whole assembly (Type 4 only).
    """
    if side == "back":
        if bundle.spec.puzzle_type is not PuzzleType.TYPE4:
            raise ValueError("only two-sided puzzles have a back side")
        chromosome = apply_dihedral(chromosome, 0, flip=True, spec=bundle.spec)
    elif side != "front":
        raise ValueError(f"unknown side {side!r}")
    w = bundle.spec.tile_size
    rows, cols = chromosome.shape
    pieces = bundle.piece_map()
    out = np.zeros((rows * w, cols * w, 3), dtype=np.uint8)
    for r in range(rows):
        for c in range(cols):
            piece = pieces[chromosome.pieces[r, c]]
            raster = piece.front_rgb if chromosome.faces[r, c] == 0 else piece.back_rgb
            if raster is None:
                raise ValueError(f"piece {piece.id} has no raster for that face")
            out[r * w:(r + 1) * w, c * w:(c + 1) * w] = np.rot90(
                raster, int(chromosome.rotations[r, c]))
    return out
