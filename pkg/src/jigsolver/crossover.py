"""Kernel-growing crossover: public API over the compiled operator.

The operator is invariant to where and in which orientation segments sit in
the parents: it consumes only their relation sets (encoded as partner arrays
over flat edge indices), growing the child from a random seed piece with
strict phase priority -- an edge present in both parents, else a best-buddy
edge present in either parent, else the minimum-weight feasible edge.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernel
from .compat import CompatibilityTable
from .model import (Chromosome, Placement, PuzzleSpec, PuzzleType, Relation,
                    flip_label, label_at, label_pos, make_relation,
                    relation_of_adjacency)

_DIR = {0: (-1, 0), 1: (0, 1), 2: (1, 0), 3: (0, -1)}


def parent_relation_set(parent: Chromosome, spec: PuzzleSpec) -> set[Relation]:
    """Position- and orientation-independent inheritance currency of a parent."""
    return parent.relation_set(spec)


def chromosome_to_grids(ch: Chromosome, table: CompatibilityTable):
    """Index-space (piece, rot, face) grids for one chromosome."""
    idx = {pid: i for i, pid in enumerate(table.piece_ids)}
    piece = np.vectorize(idx.__getitem__, otypes=[np.int32])(ch.pieces)
    return piece, ch.rotations.astype(np.int8), ch.faces.astype(np.int8)


def grids_to_chromosome(piece: np.ndarray, rot: np.ndarray, face: np.ndarray,
                        table: CompatibilityTable) -> Chromosome:
    ids = np.array(table.piece_ids, dtype=object)
    return Chromosome(ids[piece], rot.astype(np.int8), face.astype(np.int8))


def partner_matrix(piece: np.ndarray, rot: np.ndarray, face: np.ndarray,
                   edge_count: int, two_sided: bool) -> np.ndarray:
    """Encode each chromosome's relation set as a flat-edge partner array.

    Input grids have shape (pop, R, C); output is (pop, n*E) int32 with -1
    for piece edges not on any seam.  Every piece edge of a chromosome sits
    on at most one seam, so the relation set is exactly a partial matching.
    """
    if piece.ndim == 2:
        piece, rot, face = piece[None], rot[None], face[None]
    pop = piece.shape[0]
    e = edge_count
    n_edges = int(piece.max() + 1) * e if piece.size else 0
    lat = _kernel.LABEL_AT.astype(np.int32)
    rot = rot.astype(np.int32)
    face = face.astype(np.int32)
    pieces32 = piece.astype(np.int32)

    def flats(sl_piece, sl_rot, sl_face, q):
        return sl_piece * e + lat[sl_face, (q + sl_rot) % 4]

    pairs = []
    # horizontal seams: left cell shows its RIGHT boundary, right cell its LEFT
    pairs.append((flats(pieces32[:, :, :-1], rot[:, :, :-1], face[:, :, :-1], 1),
                  flats(pieces32[:, :, 1:], rot[:, :, 1:], face[:, :, 1:], 3)))
    # vertical seams
    pairs.append((flats(pieces32[:, :-1, :], rot[:, :-1, :], face[:, :-1, :], 2),
                  flats(pieces32[:, 1:, :], rot[:, 1:, :], face[:, 1:, :], 0)))

    partner = np.full((pop, n_edges), -1, dtype=np.int32)
    for fi, fj in pairs:
        fi = fi.reshape(pop, -1)
        fj = fj.reshape(pop, -1)
        rows = np.repeat(np.arange(pop), fi.shape[1])
        partner[rows, fi.ravel()] = fj.ravel()
        partner[rows, fj.ravel()] = fi.ravel()
        if two_sided:
            partner[rows, fi.ravel() ^ 4] = fj.ravel() ^ 4
            partner[rows, fj.ravel() ^ 4] = fi.ravel() ^ 4
    return partner


@dataclass
class CrossoverTrace:
    """Per-placement instrumentation: phase codes and the selected relation."""

    phases: np.ndarray          # 0 seed, 1 shared, 2 best-buddy, 3 greedy, 4 mutation
    edges: list[Relation | None]


def crossover(parent1: Chromosome, parent2: Chromosome, table: CompatibilityTable,
              spec: PuzzleSpec, seed: int, mutation_rate: float = 0.0,
              with_trace: bool = False):
    """Produce one offspring chromosome; deterministic in ``seed``.

    Returns the child, or ``(child, CrossoverTrace)`` when ``with_trace``.
    """
    n = spec.piece_count
    e = spec.edge_count
    p1 = partner_matrix(*chromosome_to_grids(parent1, table), e, spec.puzzle_type is PuzzleType.TYPE4)[0]
    p2 = partner_matrix(*chromosome_to_grids(parent2, table), e, spec.puzzle_type is PuzzleType.TYPE4)[0]
    out_piece = np.empty((spec.rows, spec.cols), dtype=np.int32)
    out_rot = np.empty((spec.rows, spec.cols), dtype=np.int8)
    out_face = np.empty((spec.rows, spec.cols), dtype=np.int8)
    trace_phase = np.empty(n, dtype=np.int8)
    trace_a = np.empty(n, dtype=np.int32)
    trace_b = np.empty(n, dtype=np.int32)
    rc = _kernel.grow_child(
        n, e, int(spec.puzzle_type), spec.rows, spec.cols,
        table.scores, table.sorted_partners, table.bb_partner,
        p1, p2, float(mutation_rate), np.uint64(seed),
        out_piece, out_rot, out_face, trace_phase, trace_a, trace_b)
    if rc != 0:
        raise RuntimeError(f"crossover kernel failed with code {rc}")
    child = grids_to_chromosome(out_piece, out_rot, out_face, table)
    if not with_trace:
        return child
    edges: list[Relation | None] = []
    for k in range(n):
        if trace_a[k] < 0:
            edges.append(None)
        else:
            fa, fb = int(trace_a[k]), int(trace_b[k])
            edges.append(make_relation(table.piece_ids[fa // e], fa % e,
                                       table.piece_ids[fb // e], fb % e))
    return child, CrossoverTrace(phases=trace_phase.copy(), edges=edges)


# ---------------------------------------------------------------------------
# explicit kernel model: the feasibility rules, stated in domain terms


@dataclass
class Kernel:
    """A partial assembly growing on an unbounded plane."""

    spec: PuzzleSpec
    placed: dict[tuple[int, int], Placement] = field(default_factory=dict)
    used_piece_edges: set[tuple[str, int]] = field(default_factory=set)

    def pieces(self) -> set[str]:
        return {p.piece for p in self.placed.values()}

    def bounding_box(self) -> tuple[int, int, int, int]:
        rows = [rc[0] for rc in self.placed]
        cols = [rc[1] for rc in self.placed]
        return min(rows), max(rows), min(cols), max(cols)

    def seams_created(self, cell: tuple[int, int], placement: Placement):
        """(relation, kernel-side endpoint, candidate-side endpoint) per new seam."""
        r, c = cell
        out = []
        for q, (dr, dc) in _DIR.items():
            other = self.placed.get((r + dr, c + dc))
            if other is None:
                continue
            if q == 1:
                rel = relation_of_adjacency(placement, other, "horizontal")
            elif q == 3:
                rel = relation_of_adjacency(other, placement, "horizontal")
            elif q == 2:
                rel = relation_of_adjacency(placement, other, "vertical")
            else:
                rel = relation_of_adjacency(other, placement, "vertical")
            out.append(rel)
        return out

    def add(self, cell: tuple[int, int], placement: Placement) -> None:
        for rel in self.seams_created(cell, placement):
            self.used_piece_edges.update(rel)
        self.placed[cell] = placement


@dataclass(frozen=True)
class CandidateEdge:
    relation: Relation
    target_cell: tuple[int, int]
    implied_placement: Placement
    phase: int
    weight: float


def feasible(kernel: Kernel, candidate: CandidateEdge, spec: PuzzleSpec) -> bool:
    """All geometric constraints for adding one candidate edge to the kernel.

    1. candidate piece not already placed;
    2. the flexible frame: bounding-box extents stay within the long/short
       dimensions, and at most one axis may exceed the short dimension;
    3. no piece edge incident to a created seam is already used;
    4. Type 4 flip exclusion: a placed piece's face is fixed, so the
       flip-side counterparts of its seam edges can never be used;
    5. the implied placement agrees with every adjacent kernel cell.
    """
    placement = candidate.implied_placement
    if placement.piece in kernel.pieces():
        return False
    if candidate.target_cell in kernel.placed:
        return False

    r, c = candidate.target_cell
    minr, maxr, minc, maxc = kernel.bounding_box()
    rext = max(maxr, r) - min(minr, r) + 1
    cext = max(maxc, c) - min(minc, c) + 1
    if rext > spec.long_dim or cext > spec.long_dim:
        return False
    if rext > spec.short_dim and cext > spec.short_dim:
        return False

    seams = kernel.seams_created(candidate.target_cell, placement)
    if candidate.relation not in seams:
        return False
    for rel in seams:
        for endpoint in rel:
            if endpoint in kernel.used_piece_edges:
                return False
            if spec.puzzle_type is PuzzleType.TYPE4:
                if (endpoint[0], flip_label(endpoint[1])) in kernel.used_piece_edges:
                    return False
    return True


def implied_placement(piece: str, label: int, seam_position: int) -> Placement:
    """Pose putting ``label`` of ``piece`` at display position ``seam_position``."""
    return Placement(piece, rotation=(label_pos(label) - seam_position) % 4,
                     face=label >> 2)
