import json

import numpy as np
import pytest
from click.testing import CliRunner
from PIL import Image

from jigsolver.cli import main
from jigsolver.factory import load_bundle

from texture import photo_texture


@pytest.fixture
def runner():
    return CliRunner()


def _write_image(path, seed, height, width):
    Image.fromarray(photo_texture(seed, height, width)).save(path)


def _shred(runner, tmp_path, *, ptype="2", rows=4, cols=5, tile=12, seed=3):
    imgs = [tmp_path / "front.png"]
    _write_image(imgs[0], 50, rows * tile, cols * tile)
    if ptype == "4":
        imgs.append(tmp_path / "back.png")
        _write_image(imgs[1], 51, rows * tile, cols * tile)
    out = tmp_path / "bundle"
    result = runner.invoke(main, ["shred", *map(str, imgs), "--type", ptype,
                                  "--tile", str(tile), "--rows", str(rows),
                                  "--cols", str(cols), "--seed", str(seed),
                                  "--out", str(out)])
    assert result.exit_code == 0, result.output
    return out


def test_shred_writes_loadable_bundle(runner, tmp_path):
    out = _shred(runner, tmp_path)
    bundle = load_bundle(out)
    assert bundle.spec.piece_count == 20
    assert bundle.ground_truth is not None


def test_shred_type4_needs_two_images(runner, tmp_path):
    img = tmp_path / "only.png"
    _write_image(img, 0, 48, 48)
    result = runner.invoke(main, ["shred", str(img), "--type", "4", "--tile",
                                  "12", "--rows", "4", "--cols", "4",
                                  "--out", str(tmp_path / "b")])
    assert result.exit_code == 2


def test_shred_rejects_undersized_image(runner, tmp_path):
    img = tmp_path / "small.png"
    _write_image(img, 0, 24, 24)
    result = runner.invoke(main, ["shred", str(img), "--tile", "12", "--rows",
                                  "4", "--cols", "4", "--out", str(tmp_path / "b")])
    assert result.exit_code == 2


def test_solve_outputs_and_manifest(runner, tmp_path):
    bundle_dir = _shred(runner, tmp_path)
    out = tmp_path / "run"
    result = runner.invoke(main, ["solve", str(bundle_dir), "--out", str(out),
                                  "--seed", "1", "--population", "80",
                                  "--generations", "10", "--snapshots"])
    assert result.exit_code == 0, result.output
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["population_size"] == 80
    assert manifest["score"]["neighbor"] == 1.0
    assert len(manifest["history"]) <= 11
    assert (out / "solution.json").is_file()
    snaps = sorted(out.glob("generation_*_front.png"))
    assert snaps and len(snaps) == len(manifest["history"])


def test_solve_deterministic_across_workers(runner, tmp_path):
    bundle_dir = _shred(runner, tmp_path, ptype="4", rows=4, cols=4)
    blobs = []
    for i, workers in enumerate(("1", "3")):
        out = tmp_path / f"run{i}"
        result = runner.invoke(main, ["solve", str(bundle_dir), "--out",
                                      str(out), "--seed", "9", "--population",
                                      "60", "--generations", "6",
                                      "--workers", workers])
        assert result.exit_code == 0, result.output
        blobs.append((out / "solution.json").read_bytes())
    assert blobs[0] == blobs[1]


def test_solve_uses_table_cache(runner, tmp_path):
    bundle_dir = _shred(runner, tmp_path)
    cache = tmp_path / "table.bin"
    for i in range(2):
        result = runner.invoke(main, ["solve", str(bundle_dir), "--out",
                                      str(tmp_path / f"r{i}"), "--population",
                                      "40", "--generations", "4",
                                      "--table-cache", str(cache)])
        assert result.exit_code == 0, result.output
    assert cache.is_file()


def test_solve_rejects_missing_bundle(runner, tmp_path):
    result = runner.invoke(main, ["solve", str(tmp_path / "nope"), "--out",
                                  str(tmp_path / "r")])
    assert result.exit_code != 0


def test_eval_scores_solution(runner, tmp_path):
    bundle_dir = _shred(runner, tmp_path)
    out = tmp_path / "run"
    assert runner.invoke(main, ["solve", str(bundle_dir), "--out", str(out),
                                "--population", "80", "--generations", "10"],
                         ).exit_code == 0
    result = runner.invoke(main, ["eval", str(bundle_dir),
                                  str(out / "solution.json")])
    assert result.exit_code == 0, result.output
    doc = json.loads(result.output)
    assert doc["neighbor"] == 1.0
    assert (out / "solution.score.json").is_file()


def test_bench_aggregates(runner, tmp_path):
    set_dir = tmp_path / "set"
    set_dir.mkdir()
    for i in range(2):
        sub = tmp_path / f"work{i}"
        sub.mkdir()
        bundle = _shred(runner, sub, rows=3, cols=4, seed=i)
        bundle.rename(set_dir / f"img{i}")
    report = tmp_path / "bench.json"
    result = runner.invoke(main, ["bench", str(set_dir), "--repeats", "2",
                                  "--population", "60", "--generations", "8",
                                  "--out", str(report)])
    assert result.exit_code == 0, result.output
    doc = json.loads(report.read_text())
    assert doc["summary"]["images"] == 2
    assert len(doc["images"][0]["runs"]) == 2
    assert doc["summary"]["avg_best_neighbor"] == 1.0


def test_bench_on_empty_dir_fails(runner, tmp_path):
    empty = tmp_path / "none"
    empty.mkdir()
    result = runner.invoke(main, ["bench", str(empty)])
    assert result.exit_code == 2
