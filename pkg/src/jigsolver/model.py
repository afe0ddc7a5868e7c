"""Core domain types: puzzle specs, pieces, edge labels, relations, chromosomes.

Geometry conventions used throughout the package:

* Edge labels on the front face at rotation 0, clockwise: a=top, b=right,
  c=bottom, d=left (indices 0..3).  Primed labels a'..d' (indices 4..7) are
  the images of the unprimed ones under a horizontal flip of the piece, so
  b' is the *left* edge of the flipped face.  Each physical piece boundary
  therefore carries one unprimed and one primed label (a/a', b/b', ...).
* Rotations are counted in quarter turns, counterclockwise positive.  A
  placement with rotation r and face f displays ``np.rot90(raster(f), r)``.
* The stored back raster of a two-sided piece is what you see after flipping
  the piece about its vertical axis; the back face of the piece cut at front
  cell (r, c) is the horizontally mirrored tile (r, M-1-c) of the back image.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

EDGE_NAMES = ("a", "b", "c", "d", "a'", "b'", "c'", "d'")

# Boundary positions on a displayed tile, clockwise.
TOP, RIGHT, BOTTOM, LEFT = 0, 1, 2, 3


class PuzzleType(IntEnum):
    TYPE1 = 1   # unknown location
    TYPE2 = 2   # unknown location + orientation
    TYPE4 = 4   # unknown location + orientation + face (two-sided)

    @property
    def edge_count(self) -> int:
        return 8 if self is PuzzleType.TYPE4 else 4

    @property
    def two_sided(self) -> bool:
        return self is PuzzleType.TYPE4


@dataclass(frozen=True)
class PuzzleSpec:
    rows: int
    cols: int
    tile_size: int
    puzzle_type: PuzzleType

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1 or self.tile_size < 1:
            raise ValueError("rows, cols and tile_size must all be >= 1")
        object.__setattr__(self, "puzzle_type", PuzzleType(self.puzzle_type))

    @property
    def piece_count(self) -> int:
        return self.rows * self.cols

    @property
    def edge_count(self) -> int:
        return self.puzzle_type.edge_count

    @property
    def short_dim(self) -> int:
        return min(self.rows, self.cols)

    @property
    def long_dim(self) -> int:
        return max(self.rows, self.cols)


def check_face(pixels: np.ndarray, tile_size: int) -> None:
    """Validate a face image: W x W x 3, values normalized into [0, 1]."""
    if pixels.shape != (tile_size, tile_size, 3):
        raise ValueError(f"face image must be {tile_size}x{tile_size}x3, got {pixels.shape}")
    if pixels.min() < 0.0 or pixels.max() > 1.0:
        raise ValueError("face image values must lie in [0, 1]")


@dataclass(eq=False)
class Piece:
    """A square tile with one or two face images in normalized L*a*b* space.

    ``front``/``back`` are the L*a*b* rasters used for compatibility scoring;
    ``front_rgb``/``back_rgb`` keep the original 8-bit tiles so result images
    can be rendered without a lossy color round-trip.
    """

    id: str
    front: np.ndarray
    back: np.ndarray | None = None
    front_rgb: np.ndarray | None = None
    back_rgb: np.ndarray | None = None

    @property
    def two_sided(self) -> bool:
        return self.back is not None

    def face(self, which: int) -> np.ndarray:
        if which == 0:
            return self.front
        if self.back is None:
            raise ValueError(f"piece {self.id} has no back face")
        return self.back


def label_face(label: int) -> int:
    """0 for a..d (front), 1 for a'..d' (back)."""
    return label >> 2


def label_pos(label: int) -> int:
    """Boundary position (TOP/RIGHT/BOTTOM/LEFT) of a label on its own face raster.

    Unprimed labels sit at their own index; primed labels are mirrored left
    to right because the back raster is the flipped view.
    """
    if label < 4:
        return label
    return (4 - (label - 4)) % 4


def label_at(face: int, pos: int) -> int:
    """Label found at boundary position ``pos`` of the given face raster."""
    if face == 0:
        return pos
    return 4 + (4 - pos) % 4


def flip_label(label: int) -> int:
    """The other label on the same physical boundary (a <-> a', ...)."""
    return label ^ 4


@dataclass(frozen=True)
class Placement:
    piece: str
    rotation: int = 0       # quarter turns, CCW
    face: int = 0           # 0 front, 1 back

    def __post_init__(self):
        if not 0 <= self.rotation <= 3:
            raise ValueError("rotation must be 0..3 quarter turns")
        if self.face not in (0, 1):
            raise ValueError("face must be 0 or 1")

    def boundary_label(self, pos: int) -> int:
        """Edge label lying on boundary position ``pos`` of the displayed tile."""
        orig = (pos + self.rotation) % 4
        return label_at(self.face, orig)


# A Relation is the position-independent statement that labeled edge x of one
# piece abuts labeled edge y of another.  Canonical form: the (piece, label)
# pairs sorted, so it can live in sets and survive dihedral transforms.
Relation = tuple[tuple[str, int], tuple[str, int]]


def make_relation(piece_i: str, label_i: int, piece_j: str, label_j: int) -> Relation:
    if piece_i == piece_j:
        raise ValueError("a relation needs two distinct pieces")
    a, b = (piece_i, label_i), (piece_j, label_j)
    return (a, b) if a <= b else (b, a)


def relation_of_adjacency(left: Placement, right: Placement, direction: str) -> Relation:
    """Relation implied by two adjacent placements.

    ``direction``: 'horizontal' means ``right`` sits to the right of ``left``;
    'vertical' means ``right`` sits below ``left``.
    """
    if direction == "horizontal":
        pos_i, pos_j = RIGHT, LEFT
    elif direction == "vertical":
        pos_i, pos_j = BOTTOM, TOP
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return make_relation(
        left.piece, left.boundary_label(pos_i),
        right.piece, right.boundary_label(pos_j),
    )


def placement_for_pose(piece: str, face: int, orig_pos: int, shown_pos: int) -> Placement:
    """Placement showing ``face`` with boundary ``orig_pos`` at display position ``shown_pos``."""
    return Placement(piece, rotation=(orig_pos - shown_pos) % 4, face=face)


@dataclass(eq=False)
class Chromosome:
    """A complete candidate assembly: an R x C grid of placements.

    Stored as parallel arrays; ``pieces`` is an object array of piece ids.
    Grid shape is (N, M) or (M, N) -- the solver may reconstruct in either
    landscape or portrait orientation.
    """

    pieces: np.ndarray           # (R, C) object array of str
    rotations: np.ndarray        # (R, C) int
    faces: np.ndarray            # (R, C) int

    def __post_init__(self):
        self.pieces = np.asarray(self.pieces, dtype=object)
        self.rotations = np.asarray(self.rotations, dtype=np.int8)
        self.faces = np.asarray(self.faces, dtype=np.int8)
        if not (self.pieces.shape == self.rotations.shape == self.faces.shape):
            raise ValueError("grid arrays must share one shape")
        if self.pieces.ndim != 2:
            raise ValueError("chromosome grid must be two-dimensional")

    @property
    def shape(self) -> tuple[int, int]:
        return self.pieces.shape

    def placement(self, row: int, col: int) -> Placement:
        return Placement(self.pieces[row, col],
                         int(self.rotations[row, col]),
                         int(self.faces[row, col]))

    def is_valid(self, spec: PuzzleSpec) -> bool:
        """Bijection between pieces and cells, legal dims, legal poses."""
        if self.shape not in ((spec.rows, spec.cols), (spec.cols, spec.rows)):
            return False
        ids = self.pieces.ravel()
        if len(set(ids)) != spec.piece_count:
            return False
        if spec.puzzle_type is PuzzleType.TYPE1 and np.any(self.rotations != 0):
            return False
        if spec.puzzle_type is not PuzzleType.TYPE4 and np.any(self.faces != 0):
            return False
        return True

    def relation_set(self, spec: PuzzleSpec) -> set[Relation]:
        """All relations over grid adjacencies.

        For Type 4 each physical seam contributes both its visible-side and
        hidden-side relation, so the set is invariant under a global flip.
        """
        rels: set[Relation] = set()
        rows, cols = self.shape
        for r in range(rows):
            for c in range(cols):
                if c + 1 < cols:
                    rels.add(relation_of_adjacency(
                        self.placement(r, c), self.placement(r, c + 1), "horizontal"))
                if r + 1 < rows:
                    rels.add(relation_of_adjacency(
                        self.placement(r, c), self.placement(r + 1, c), "vertical"))
        if spec.puzzle_type is PuzzleType.TYPE4:
            rels |= {make_relation(a[0], flip_label(a[1]), b[0], flip_label(b[1]))
                     for a, b in rels}
        return rels

    def copy(self) -> "Chromosome":
        return Chromosome(self.pieces.copy(), self.rotations.copy(), self.faces.copy())


def apply_dihedral(chromosome: Chromosome, quarter_turns: int = 0,
                   flip: bool = False, spec: PuzzleSpec | None = None) -> Chromosome:
    """View the same physical assembly under a global transform.

    Rotates the whole grid by ``quarter_turns`` CCW, then optionally flips it
    about the vertical axis (legal only for two-sided puzzles).  All pairwise
    relations are preserved.
    """
    if flip and spec is not None and spec.puzzle_type is not PuzzleType.TYPE4:
        raise ValueError("global flip is only defined for Type 4 puzzles")
    pieces = chromosome.pieces
    rot = chromosome.rotations.astype(np.int16)
    faces = chromosome.faces
    k = quarter_turns % 4
    if k:
        pieces = np.rot90(pieces, k)
        faces = np.rot90(faces, k)
        rot = (np.rot90(rot, k) + k) % 4
    if flip:
        pieces = np.fliplr(pieces)
        faces = np.fliplr(faces) ^ 1
        rot = (-np.fliplr(rot)) % 4
    return Chromosome(pieces.copy(), rot.astype(np.int8), faces.copy())


def dihedral_transforms(spec: PuzzleSpec) -> list[tuple[int, bool]]:
    """Legal global transforms for comparing solutions of this puzzle type."""
    if spec.puzzle_type is PuzzleType.TYPE1:
        return [(0, False)]
    turns = [(k, False) for k in range(4)]
    if spec.puzzle_type is PuzzleType.TYPE4:
        turns += [(k, True) for k in range(4)]
    return turns
