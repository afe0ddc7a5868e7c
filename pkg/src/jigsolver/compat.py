"""Pairwise edge dissimilarity, the dense compatibility table, best buddies.

The dissimilarity of two labeled piece edges is the L2 norm of the difference
between the two abutting boundary pixel rows in normalized L*a*b* space.
Boundary sequences are taken in each piece's own clockwise edge order; the
second sequence is reversed so geometrically coincident pixels line up.  For
the canonical right/left abutment (edge b against edge d at rotation 0) this
is exactly the classic root-of-summed-squared-differences seam measure.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .model import Piece, PuzzleSpec, PuzzleType, Relation, label_face, label_pos, make_relation

_CACHE_MAGIC = b"JSCT"
_CACHE_VERSION = 1


def edge_sequence(piece: Piece, label: int) -> np.ndarray:
    """Boundary pixels of a labeled edge, in clockwise order, shape (W, 3)."""
    raster = piece.face(label_face(label))
    pos = label_pos(label)
    if pos == 0:
        return raster[0, :, :]
    if pos == 1:
        return raster[:, -1, :]
    if pos == 2:
        return raster[-1, ::-1, :]
    return raster[::-1, 0, :]


def dissimilarity(piece_i: Piece, label_i: int, piece_j: Piece, label_j: int) -> float:
    """Seam dissimilarity for one labeled edge pair of two distinct pieces."""
    if piece_i.id == piece_j.id:
        raise ValueError("dissimilarity needs two distinct pieces")
    for piece, label in ((piece_i, label_i), (piece_j, label_j)):
        if label >= 4 and piece.back is None:
            raise ValueError(f"primed edge {label} on single-sided piece {piece.id}")
    a = edge_sequence(piece_i, label_i)
    b = edge_sequence(piece_j, label_j)[::-1]
    return float(np.sqrt(np.sum((a - b) ** 2)))


@dataclass(eq=False)
class CompatibilityTable:
    """All pairwise edge scores for one bundle, plus derived best buddies.

    ``scores`` is a dense (n*E, n*E) symmetric array indexed by flat edge
    index ``piece_index * E + label``; same-piece blocks hold +inf.  Piece
    order follows ``piece_ids`` (sorted), which also fixes all tie-breaking.
    """

    piece_ids: list[str]
    edge_count: int
    scores: np.ndarray
    _index: dict[str, int] = field(init=False, repr=False)
    _sorted_partners: np.ndarray | None = field(default=None, init=False, repr=False)
    _bb_partner: np.ndarray | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self._index = {pid: i for i, pid in enumerate(self.piece_ids)}

    @property
    def piece_count(self) -> int:
        return len(self.piece_ids)

    def flat(self, piece_id: str, label: int) -> int:
        return self._index[piece_id] * self.edge_count + label

    def score(self, piece_i: str, label_i: int, piece_j: str, label_j: int) -> float:
        return float(self.scores[self.flat(piece_i, label_i), self.flat(piece_j, label_j)])

    def score_relation(self, relation: Relation) -> float:
        (pi, li), (pj, lj) = relation
        return self.score(pi, li, pj, lj)

    @property
    def sorted_partners(self) -> np.ndarray:
        """Per flat edge: all partner edges ordered by ascending score.

        Stable sort, so equal scores fall back to (piece, label) order.
        """
        if self._sorted_partners is None:
            self._sorted_partners = np.argsort(
                self.scores, axis=1, kind="stable").astype(np.int32)
        return self._sorted_partners

    @property
    def bb_partner(self) -> np.ndarray:
        """Per flat edge: the mutual best partner's flat index, or -1."""
        if self._bb_partner is None:
            best = np.argmin(self.scores, axis=1).astype(np.int64)
            finite = np.isfinite(self.scores[np.arange(len(best)), best])
            mutual = (best[best] == np.arange(len(best))) & finite
            out = np.where(mutual, best, -1).astype(np.int32)
            self._bb_partner = out
        return self._bb_partner

    def best_buddies(self) -> set[Relation]:
        """Mutually-minimal edge pairings, as canonical relations."""
        out: set[Relation] = set()
        e = self.edge_count
        for flat_i, flat_j in enumerate(self.bb_partner):
            if flat_j >= 0 and flat_i < flat_j:
                out.add(make_relation(self.piece_ids[flat_i // e], flat_i % e,
                                      self.piece_ids[flat_j // e], flat_j % e))
        return out


def _edge_matrix(pieces: list[Piece], edge_count: int) -> np.ndarray:
    """Stacked clockwise edge sequences, shape (n*E, W*3)."""
    rows = [edge_sequence(piece, label).reshape(-1)
            for piece in pieces for label in range(edge_count)]
    return np.array(rows, dtype=np.float64)


def build_table(pieces: list[Piece], spec: PuzzleSpec,
                chunk_rows: int = 48) -> CompatibilityTable:
    """Compute all legal relation scores for a bundle.

    Differences are evaluated directly (no norm-expansion shortcuts) so small
    scores keep full floating-point accuracy; the upper triangle is mirrored
    to make symmetry exact.
    """
    if len(pieces) < 2:
        raise ValueError("a compatibility table needs at least 2 pieces")
    e = spec.edge_count
    if e == 8 and any(p.back is None for p in pieces):
        raise ValueError("Type 4 table requires two-sided pieces")
    order = sorted(range(len(pieces)), key=lambda i: pieces[i].id)
    ordered = [pieces[i] for i in order]
    ids = [p.id for p in ordered]
    seq = _edge_matrix(ordered, e)
    rev = _edge_matrix_reversed(seq, ordered[0].front.shape[0])
    n_edges = seq.shape[0]
    scores = np.empty((n_edges, n_edges), dtype=np.float64)
    for lo in range(0, n_edges, chunk_rows):
        hi = min(lo + chunk_rows, n_edges)
        diff = seq[lo:hi, None, :] - rev[None, :, :]
        np.sqrt(np.einsum("ijk,ijk->ij", diff, diff), out=scores[lo:hi])
    # exact symmetry: keep the upper triangle, mirror it down
    iu = np.triu_indices(n_edges, 1)
    scores[(iu[1], iu[0])] = scores[iu]
    # same-piece blocks are not relations
    for i in range(len(ids)):
        scores[i * e:(i + 1) * e, i * e:(i + 1) * e] = np.inf
    return CompatibilityTable(piece_ids=ids, edge_count=e, scores=scores)


def _edge_matrix_reversed(seq: np.ndarray, tile: int) -> np.ndarray:
    """Reverse each row's pixel order (keeping per-pixel band order)."""
    return seq.reshape(seq.shape[0], tile, 3)[:, ::-1, :].reshape(seq.shape[0], -1)


# ---------------------------------------------------------------------------
# optional binary cache (skips recomputation in benchmarks)


def save_table_cache(table: CompatibilityTable, path: str | Path, bundle_checksum: str) -> None:
    path = Path(path)
    key = bundle_checksum.encode()
    ids_blob = "\n".join(table.piece_ids).encode()
    header = _CACHE_MAGIC + struct.pack(
        "<HHIII", _CACHE_VERSION, table.edge_count, table.piece_count,
        len(key), len(ids_blob))
    with open(path, "wb") as f:
        f.write(header)
        f.write(key)
        f.write(ids_blob)
        f.write(np.ascontiguousarray(table.scores).tobytes())


def load_table_cache(path: str | Path, bundle_checksum: str) -> CompatibilityTable | None:
    """Load a cached table; returns None on any mismatch or corruption."""
    path = Path(path)
    if not path.is_file():
        return None
    blob = path.read_bytes()
    if len(blob) < 20 or blob[:4] != _CACHE_MAGIC:
        return None
    version, e, n, key_len, ids_len = struct.unpack("<HHIII", blob[4:20])
    if version != _CACHE_VERSION:
        return None
    off = 20
    if blob[off:off + key_len].decode(errors="replace") != bundle_checksum:
        return None
    off += key_len
    ids = blob[off:off + ids_len].decode().split("\n")
    off += ids_len
    n_edges = n * e
    expect = n_edges * n_edges * 8
    if len(ids) != n or len(blob) - off != expect:
        return None
    scores = np.frombuffer(blob[off:], dtype=np.float64).reshape(n_edges, n_edges).copy()
    return CompatibilityTable(piece_ids=ids, edge_count=e, scores=scores)
