import json

import numpy as np
import pytest
from skimage.color import rgb2lab

from jigsolver.compat import build_table
from jigsolver.engine import fitness_cost
from jigsolver.factory import (BundleError, bundle_checksum,
                               chromosome_from_json, chromosome_to_json,
                               load_bundle, save_bundle, scramble, shred,
                               shred_two_sided, srgb_to_normalized_lab)
from jigsolver.model import PuzzleSpec, PuzzleType

from conftest import textured_bundle
from texture import photo_texture


def test_lab_conversion_matches_reference():
    rng = np.random.default_rng(0)
    rgb = rng.integers(0, 256, size=(16, 16, 3), dtype=np.uint8)
    ours = srgb_to_normalized_lab(rgb)
    ref = rgb2lab(rgb / 255.0)
    expected = np.stack([ref[..., 0] / 100.0,
                         (ref[..., 1] + 128.0) / 255.0,
                         (ref[..., 2] + 128.0) / 255.0], axis=-1)
    assert np.allclose(ours, expected, atol=2e-4)
    assert ours.min() >= 0.0 and ours.max() <= 1.0


def test_lab_landmark_values():
    white = srgb_to_normalized_lab(np.array([[[255, 255, 255]]], dtype=np.uint8))[0, 0]
    black = srgb_to_normalized_lab(np.array([[[0, 0, 0]]], dtype=np.uint8))[0, 0]
    gray = srgb_to_normalized_lab(np.array([[[119, 119, 119]]], dtype=np.uint8))[0, 0]
    # neutral colors carry zero chroma, which lands on 128/255 after shifting
    assert np.allclose(white, [1.0, 128 / 255, 128 / 255], atol=1e-3)
    assert np.allclose(black, [0.0, 128 / 255, 128 / 255], atol=1e-3)
    assert gray[0] == pytest.approx(0.5, abs=0.01)


def test_lab_distances_are_perceptual_not_linear():
    # two dark greens closer than dark green vs saturated magenta
    a = srgb_to_normalized_lab(np.array([[[0, 90, 0]]], dtype=np.uint8))
    b = srgb_to_normalized_lab(np.array([[[0, 110, 0]]], dtype=np.uint8))
    c = srgb_to_normalized_lab(np.array([[[255, 0, 255]]], dtype=np.uint8))
    assert np.linalg.norm(a - b) < np.linalg.norm(a - c)


def test_shred_layout_and_truth():
    spec = PuzzleSpec(rows=3, cols=4, tile_size=8, puzzle_type=PuzzleType.TYPE2)
    img = photo_texture(5, 3 * 8 + 5, 4 * 8 + 3)    # excess pixels get cropped
    bundle = shred(img, spec, seed=9)
    assert len(bundle.pieces) == 12
    truth = bundle.ground_truth
    assert truth.is_valid(spec)
    pieces = bundle.piece_map()
    for r in range(3):
        for c in range(4):
            pl = truth.placement(r, c)
            assert pl.rotation == 0 and pl.face == 0
            assert np.array_equal(pieces[pl.piece].front_rgb,
                                  img[r * 8:(r + 1) * 8, c * 8:(c + 1) * 8])


def test_shred_rejects_small_images():
    spec = PuzzleSpec(rows=4, cols=4, tile_size=16, puzzle_type=PuzzleType.TYPE2)
    with pytest.raises(ValueError):
        shred(photo_texture(0, 32, 80), spec, seed=0)


def test_two_sided_shred_requires_type4():
    spec = PuzzleSpec(rows=2, cols=2, tile_size=8, puzzle_type=PuzzleType.TYPE2)
    img = photo_texture(0, 16, 16)
    with pytest.raises(ValueError):
        shred_two_sided(img, img, spec, seed=0)
    spec4 = PuzzleSpec(rows=2, cols=2, tile_size=8, puzzle_type=PuzzleType.TYPE4)
    with pytest.raises(ValueError):
        shred(img, spec4, seed=0)


def test_back_tiles_mirror_column_order():
    spec = PuzzleSpec(rows=2, cols=3, tile_size=8, puzzle_type=PuzzleType.TYPE4)
    front = photo_texture(1, 16, 24)
    back = photo_texture(2, 16, 24)
    bundle = shred_two_sided(front, back, spec, seed=0)
    pieces = bundle.piece_map()
    for r in range(2):
        for c in range(3):
            pl = bundle.ground_truth.placement(r, c)
            assert np.array_equal(pieces[pl.piece].back_rgb,
                                  back[r * 8:(r + 1) * 8, (2 - c) * 8:(3 - c) * 8])


@pytest.mark.parametrize("ptype", [PuzzleType.TYPE1, PuzzleType.TYPE2,
                                   PuzzleType.TYPE4])
def test_scramble_preserves_physical_cost(ptype):
    """Scrambling relabels poses but never changes the assembled picture."""
    bundle = textured_bundle(ptype, rows=3, cols=4, tile=8, seed=31)
    spec = bundle.spec
    table = build_table(bundle.pieces, spec)
    base_cost = fitness_cost(bundle.ground_truth, table, spec)
    for seed in (0, 7, 123):
        sc = scramble(bundle, seed=seed)
        t2 = build_table(sc.pieces, spec)
        assert sc.ground_truth.is_valid(spec)
        assert fitness_cost(sc.ground_truth, t2, spec) == pytest.approx(base_cost,
                                                                        rel=1e-9)
    if ptype is PuzzleType.TYPE1:
        # orientation is known for Type 1, so scrambling only permutes cells
        assert set(scramble(bundle, seed=1).ground_truth.rotations.ravel()) == {0}


def test_scramble_randomizes_poses():
    bundle = textured_bundle(PuzzleType.TYPE4, rows=4, cols=5, tile=8, seed=32)
    sc = scramble(bundle, seed=3)
    assert len(set(sc.ground_truth.rotations.ravel())) > 1
    assert len(set(sc.ground_truth.faces.ravel())) == 2


@pytest.mark.parametrize("ptype", [PuzzleType.TYPE2, PuzzleType.TYPE4])
def test_save_load_roundtrip(tmp_path, ptype):
    bundle = textured_bundle(ptype, rows=3, cols=4, tile=8, seed=33)
    out = tmp_path / "bundle"
    save_bundle(bundle, out)
    loaded = load_bundle(out)
    assert loaded.spec == bundle.spec
    orig = bundle.piece_map()
    for piece in loaded.pieces:
        assert np.array_equal(piece.front_rgb, orig[piece.id].front_rgb)
        assert np.allclose(piece.front, orig[piece.id].front)
        if ptype is PuzzleType.TYPE4:
            assert np.array_equal(piece.back_rgb, orig[piece.id].back_rgb)
    lt = loaded.ground_truth
    bt = bundle.ground_truth
    assert np.array_equal(lt.pieces, bt.pieces)
    assert np.array_equal(lt.rotations, bt.rotations)
    assert np.array_equal(lt.faces, bt.faces)


def test_checksum_is_stable_and_content_bound(tmp_path):
    b1 = textured_bundle(PuzzleType.TYPE2, rows=2, cols=3, tile=8, seed=34)
    b2 = textured_bundle(PuzzleType.TYPE2, rows=2, cols=3, tile=8, seed=35)
    save_bundle(b1, tmp_path / "a")
    save_bundle(b1, tmp_path / "a2")
    save_bundle(b2, tmp_path / "b")
    assert bundle_checksum(tmp_path / "a") == bundle_checksum(tmp_path / "a2")
    assert bundle_checksum(tmp_path / "a") != bundle_checksum(tmp_path / "b")


def test_load_without_truth_gives_blind_bundle(tmp_path):
    bundle = textured_bundle(PuzzleType.TYPE2, rows=2, cols=3, tile=8, seed=39)
    out = tmp_path / "bundle"
    save_bundle(bundle, out)
    (out / "truth.json").unlink()
    blind = load_bundle(out)
    assert blind.ground_truth is None
    assert len(blind.pieces) == 6


def test_load_detects_corruption(tmp_path):
    bundle = textured_bundle(PuzzleType.TYPE2, rows=2, cols=3, tile=8, seed=36)
    out = tmp_path / "bundle"
    save_bundle(bundle, out)
    victim = sorted(out.glob("*.front.png"))[0]
    other = sorted(out.glob("*.front.png"))[1]
    victim.write_bytes(other.read_bytes())
    with pytest.raises(BundleError):
        load_bundle(out)


def test_load_detects_missing_file(tmp_path):
    bundle = textured_bundle(PuzzleType.TYPE2, rows=2, cols=3, tile=8, seed=37)
    out = tmp_path / "bundle"
    save_bundle(bundle, out)
    sorted(out.glob("*.front.png"))[0].unlink()
    with pytest.raises(BundleError):
        load_bundle(out)


def test_load_rejects_bad_manifest(tmp_path):
    out = tmp_path / "bundle"
    out.mkdir()
    (out / "manifest.json").write_text("{not json")
    with pytest.raises(BundleError):
        load_bundle(out)


def test_chromosome_json_roundtrip():
    bundle = textured_bundle(PuzzleType.TYPE4, rows=3, cols=3, tile=8, seed=38)
    truth = bundle.ground_truth
    doc = json.loads(json.dumps(chromosome_to_json(truth)))
    back = chromosome_from_json(doc)
    assert np.array_equal(back.pieces, truth.pieces)
    assert np.array_equal(back.rotations, truth.rotations)
    assert np.array_equal(back.faces, truth.faces)
