"""Puzzle creation: image ingestion, shredding, scrambling, bundle persistence.

A puzzle bundle on disk is a directory with:

* ``manifest.json`` -- format version, spec fields, ordered piece-id list and
  a sha256 checksum per piece file;
* one PNG per piece face, named ``<id>.front.png`` / ``<id>.back.png``,
  storing the original 8-bit RGB tile (L*a*b* rasters are recomputed on load);
* optional ``truth.json`` -- the correct assembly, kept separate so solvers
  can run blind.
"""

from __future__ import annotations

import hashlib
import io
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .model import Chromosome, Piece, PuzzleSpec, PuzzleType

BUNDLE_FORMAT_VERSION = 1

# sRGB (D65, 2 degree observer) -> XYZ
_RGB2XYZ = np.array([
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
])
_WHITE = np.array([0.95047, 1.0, 1.08883])


class BundleError(Exception):
    """Raised for missing, inconsistent, or corrupt puzzle bundles."""


def srgb_to_normalized_lab(rgb: np.ndarray) -> np.ndarray:
    """Convert 8-bit sRGB to CIE L*a*b* scaled per channel into [0, 1].

    L* maps from [0, 100]; a* and b* are clamped from [-128, 127].
    Accepts any (..., 3) array of values in [0, 255].
    """
    c = np.asarray(rgb, dtype=np.float64) / 255.0
    lin = np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)
    xyz = lin @ _RGB2XYZ.T / _WHITE
    delta = 6.0 / 29.0
    f = np.where(xyz > delta ** 3, np.cbrt(xyz), xyz / (3 * delta ** 2) + 4.0 / 29.0)
    fx, fy, fz = f[..., 0], f[..., 1], f[..., 2]
    L = 116.0 * fy - 16.0
    a = 500.0 * (fx - fy)
    b = 200.0 * (fy - fz)
    out = np.stack([
        L / 100.0,
        (np.clip(a, -128.0, 127.0) + 128.0) / 255.0,
        (np.clip(b, -128.0, 127.0) + 128.0) / 255.0,
    ], axis=-1)
    return np.clip(out, 0.0, 1.0)


@dataclass(eq=False)
class PuzzleBundle:
    spec: PuzzleSpec
    pieces: list[Piece]
    ground_truth: Chromosome | None = None

    def __post_init__(self):
        ids = [p.id for p in self.pieces]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate piece ids in bundle")
        if len(self.pieces) != self.spec.piece_count:
            raise ValueError(
                f"bundle has {len(self.pieces)} pieces, spec wants {self.spec.piece_count}")

    def piece_map(self) -> dict[str, Piece]:
        return {p.id: p for p in self.pieces}


def _new_piece_ids(count: int, rng: np.random.Generator) -> list[str]:
    # random 64-bit tokens: ids must not leak position information
    while True:
        ids = [f"{v:016x}" for v in rng.integers(0, 2 ** 63, size=count, dtype=np.int64)]
        if len(set(ids)) == count:
            return ids


def _crop(image: np.ndarray, spec: PuzzleSpec) -> np.ndarray:
    h_need = spec.rows * spec.tile_size
    w_need = spec.cols * spec.tile_size
    if image.ndim != 3 or image.shape[2] != 3:
        raise ValueError("expected an H x W x 3 RGB raster")
    if image.shape[0] < h_need or image.shape[1] < w_need:
        raise ValueError(
            f"image {image.shape[1]}x{image.shape[0]} too small for "
            f"{spec.rows}x{spec.cols} tiles of {spec.tile_size}px")
    return image[:h_need, :w_need]


def _cut_tiles(image: np.ndarray, spec: PuzzleSpec) -> list[np.ndarray]:
    w = spec.tile_size
    return [np.ascontiguousarray(image[r * w:(r + 1) * w, c * w:(c + 1) * w])
            for r in range(spec.rows) for c in range(spec.cols)]


def _identity_truth(ids: list[str], spec: PuzzleSpec) -> Chromosome:
    grid = np.array(ids, dtype=object).reshape(spec.rows, spec.cols)
    zeros = np.zeros((spec.rows, spec.cols), dtype=np.int8)
    return Chromosome(grid, zeros.copy(), zeros.copy())


def shred(image: np.ndarray, spec: PuzzleSpec, seed: int = 0) -> PuzzleBundle:
    """Cut an RGB raster into a bundle of single-sided pieces, row-major.

    Excess pixels are cropped from the right and bottom edges.  Ground truth
    records the identity assembly under freshly randomized piece ids.
    """
    if spec.puzzle_type is PuzzleType.TYPE4:
        raise ValueError("Type 4 puzzles need shred_two_sided with two images")
    return _shred_impl(image, None, spec, seed)


def shred_two_sided(image_front: np.ndarray, image_back: np.ndarray,
                    spec: PuzzleSpec, seed: int = 0) -> PuzzleBundle:
    """Cut two RGB rasters into a two-sided bundle.

    The back face of the piece at front cell (r, c) is tile (r, M-1-c) of
    the back image: flipping the sheet horizontally mirrors column positions
    but the stored raster is what you see after flipping the piece itself.
    """
    if spec.puzzle_type is not PuzzleType.TYPE4:
        raise ValueError("two-sided shredding requires a Type 4 spec")
    front = _crop(np.asarray(image_front), spec)
    back = _crop(np.asarray(image_back), spec)
    if front.shape != back.shape:
        raise ValueError("front and back images must cover the same area")
    return _shred_impl(front, back, spec, seed)


def _shred_impl(image: np.ndarray, back_image: np.ndarray | None,
                spec: PuzzleSpec, seed: int) -> PuzzleBundle:
    front = _crop(np.asarray(image), spec)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x51]))
    ids = _new_piece_ids(spec.piece_count, rng)
    tiles = _cut_tiles(front, spec)
    back_tiles: list[np.ndarray | None] = [None] * spec.piece_count
    if back_image is not None:
        raw = np.asarray(back_image)
        m = spec.cols
        for r in range(spec.rows):
            for c in range(m):
                w = spec.tile_size
                src = raw[r * w:(r + 1) * w, (m - 1 - c) * w:(m - c) * w]
                back_tiles[r * m + c] = np.ascontiguousarray(src)
    pieces = []
    for pid, tile, back in zip(ids, tiles, back_tiles):
        pieces.append(Piece(
            id=pid,
            front=srgb_to_normalized_lab(tile),
            back=None if back is None else srgb_to_normalized_lab(back),
            front_rgb=tile.astype(np.uint8),
            back_rgb=None if back is None else back.astype(np.uint8),
        ))
    return PuzzleBundle(spec=spec, pieces=pieces, ground_truth=_identity_truth(ids, spec))


def scramble(bundle: PuzzleBundle, seed: int) -> PuzzleBundle:
    """Permute piece order and randomize each piece's stored pose.

    Type 2/4 pieces get pre-rotated by a random quarter turn; Type 4 pieces
    additionally get their faces swapped at random (a physical horizontal
    flip, so the stored rasters stay mutually consistent).  Ground truth is
    rewritten so it still denotes the correct assembly.  Deterministic in
    ``seed``.
    """
    spec = bundle.spec
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x5C]))
    n = spec.piece_count
    order = rng.permutation(n)
    if spec.puzzle_type is PuzzleType.TYPE1:
        turns = np.zeros(n, dtype=np.int64)
    else:
        turns = rng.integers(0, 4, size=n)
    if spec.puzzle_type is PuzzleType.TYPE4:
        flips = rng.integers(0, 2, size=n)
    else:
        flips = np.zeros(n, dtype=np.int64)

    new_pieces: dict[str, Piece] = {}
    pose: dict[str, tuple[int, int]] = {}   # id -> (extra rotation, face)
    for i, piece in enumerate(bundle.pieces):
        k, s = int(turns[i]), int(flips[i])
        front, back = piece.front, piece.back
        front_rgb, back_rgb = piece.front_rgb, piece.back_rgb
        if s:
            front, back = back, front
            front_rgb, back_rgb = back_rgb, front_rgb
        new_pieces[piece.id] = Piece(
            id=piece.id,
            front=np.ascontiguousarray(np.rot90(front, k)),
            back=None if back is None else np.ascontiguousarray(np.rot90(back, -k)),
            front_rgb=None if front_rgb is None else np.ascontiguousarray(np.rot90(front_rgb, k)),
            back_rgb=None if back_rgb is None else np.ascontiguousarray(np.rot90(back_rgb, -k)),
        )
        pose[piece.id] = (k, s)

    truth = None
    if bundle.ground_truth is not None:
        truth = bundle.ground_truth.copy()
        rows, cols = truth.shape
        for r in range(rows):
            for c in range(cols):
                pid = truth.pieces[r, c]
                k, s = pose[pid]
                face = int(truth.faces[r, c]) ^ s
                rot = int(truth.rotations[r, c]) + (k if face else -k)
                truth.rotations[r, c] = rot % 4
                truth.faces[r, c] = face
    ordered = [new_pieces[bundle.pieces[i].id] for i in order]
    return PuzzleBundle(spec=spec, pieces=ordered, ground_truth=truth)


# ---------------------------------------------------------------------------
# persistence


def _png_bytes(tile: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(tile, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def save_bundle(bundle: PuzzleBundle, path: str | Path) -> None:
    """Write a bundle directory; ground truth goes to a separate truth.json."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    checksums: dict[str, str] = {}
    for piece in bundle.pieces:
        if piece.front_rgb is None:
            raise BundleError(f"piece {piece.id} has no RGB raster to persist")
        files = {f"{piece.id}.front.png": _png_bytes(piece.front_rgb)}
        if piece.back_rgb is not None:
            files[f"{piece.id}.back.png"] = _png_bytes(piece.back_rgb)
        for name, blob in files.items():
            (path / name).write_bytes(blob)
            checksums[name] = hashlib.sha256(blob).hexdigest()
    spec = bundle.spec
    manifest = {
        "format_version": BUNDLE_FORMAT_VERSION,
        "puzzle_type": int(spec.puzzle_type),
        "rows": spec.rows,
        "cols": spec.cols,
        "tile_size": spec.tile_size,
        "piece_ids": [p.id for p in bundle.pieces],
        "checksums": checksums,
    }
    (path / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    if bundle.ground_truth is not None:
        (path / "truth.json").write_text(json.dumps(chromosome_to_json(bundle.ground_truth)))


def chromosome_to_json(ch: Chromosome) -> dict:
    rows, cols = ch.shape
    grid = [[{"piece": ch.pieces[r, c],
              "rotation": int(ch.rotations[r, c]),
              "face": int(ch.faces[r, c])}
             for c in range(cols)] for r in range(rows)]
    return {"rows": rows, "cols": cols, "grid": grid}


def chromosome_from_json(doc: dict) -> Chromosome:
    rows, cols = doc["rows"], doc["cols"]
    pieces = np.empty((rows, cols), dtype=object)
    rot = np.zeros((rows, cols), dtype=np.int8)
    face = np.zeros((rows, cols), dtype=np.int8)
    for r in range(rows):
        for c in range(cols):
            cell = doc["grid"][r][c]
            pieces[r, c] = cell["piece"]
            rot[r, c] = cell["rotation"]
            face[r, c] = cell["face"]
    return Chromosome(pieces, rot, face)


def bundle_checksum(path: str | Path) -> str:
    """Stable identity of a bundle on disk (hash of its manifest)."""
    blob = (Path(path) / "manifest.json").read_bytes()
    return hashlib.sha256(blob).hexdigest()


def load_bundle(path: str | Path) -> PuzzleBundle:
    """Load a bundle directory; ground truth is optional, checksums are not."""
    path = Path(path)
    manifest_path = path / "manifest.json"
    if not manifest_path.is_file():
        raise BundleError(f"no manifest.json under {path}")
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise BundleError(f"corrupt manifest: {exc}") from exc
    if manifest.get("format_version") != BUNDLE_FORMAT_VERSION:
        raise BundleError(f"unsupported bundle format {manifest.get('format_version')!r}")
    spec = PuzzleSpec(rows=manifest["rows"], cols=manifest["cols"],
                      tile_size=manifest["tile_size"],
                      puzzle_type=PuzzleType(manifest["puzzle_type"]))
    ids = manifest["piece_ids"]
    if len(ids) != spec.piece_count:
        raise BundleError(
            f"manifest lists {len(ids)} pieces, spec wants {spec.piece_count}")
    checksums = manifest["checksums"]
    two_sided = spec.puzzle_type is PuzzleType.TYPE4

    def read_tile(name: str) -> np.ndarray:
        f = path / name
        if not f.is_file():
            raise BundleError(f"missing piece file {name}")
        blob = f.read_bytes()
        if name not in checksums:
            raise BundleError(f"piece file {name} not listed in manifest")
        if hashlib.sha256(blob).hexdigest() != checksums[name]:
            raise BundleError(f"checksum mismatch for {name}")
        tile = np.asarray(Image.open(io.BytesIO(blob)).convert("RGB"))
        if tile.shape != (spec.tile_size, spec.tile_size, 3):
            raise BundleError(f"piece file {name} has wrong dimensions {tile.shape}")
        return tile

    pieces = []
    for pid in ids:
        front = read_tile(f"{pid}.front.png")
        back = read_tile(f"{pid}.back.png") if two_sided else None
        pieces.append(Piece(
            id=pid,
            front=srgb_to_normalized_lab(front),
            back=None if back is None else srgb_to_normalized_lab(back),
            front_rgb=front,
            back_rgb=back,
        ))
    truth = None
    truth_path = path / "truth.json"
    if truth_path.is_file():
        truth = chromosome_from_json(json.loads(truth_path.read_text()))
        if set(truth.pieces.ravel()) != set(ids):
            raise BundleError("truth.json does not cover the bundle's piece ids")
    return PuzzleBundle(spec=spec, pieces=pieces, ground_truth=truth)


def load_image(path: str | Path) -> np.ndarray:
    """Read a raster image (PNG, JPEG, ...) as an H x W x 3 uint8 array."""
    try:
        with Image.open(path) as img:
            return np.asarray(img.convert("RGB"))
    except (OSError, ValueError) as exc:
        raise BundleError(f"cannot read image {path}: {exc}") from exc
