import numpy as np
import pytest

from jigsolver.compat import build_table
from jigsolver.engine import random_chromosome
from jigsolver.evaluate import (direct_comparison, make_oracle_puzzle,
                                neighbor_comparison, oracle_is_sound,
                                score_solution, truth_seams)
from jigsolver.model import (PuzzleSpec, PuzzleType, apply_dihedral,
                             dihedral_transforms)


def test_direct_of_truth_is_one(t2_bundle):
    truth = t2_bundle.ground_truth
    frac, transform = direct_comparison(truth, truth, t2_bundle.spec)
    assert frac == 1.0 and transform == (0, False)


def test_direct_sees_through_global_transforms(t4_bundle):
    spec = t4_bundle.spec
    truth = t4_bundle.ground_truth
    for turns, flip in dihedral_transforms(spec):
        moved = apply_dihedral(truth, turns, flip, spec)
        frac, _ = direct_comparison(moved, truth, spec)
        assert frac == 1.0
    report = score_solution(apply_dihedral(truth, 1, True, spec), truth, spec)
    assert report.perfect


def test_direct_counts_partial_matches(t2_bundle):
    spec = t2_bundle.spec
    broken = t2_bundle.ground_truth.copy()
    a = broken.pieces[0, 0]
    broken.pieces[0, 0] = broken.pieces[0, 1]
    broken.pieces[0, 1] = a
    frac, _ = direct_comparison(broken, t2_bundle.ground_truth, spec)
    assert frac == pytest.approx(1.0 - 2 / spec.piece_count)


def test_neighbor_counts_seams(t2_bundle):
    spec = t2_bundle.spec
    truth = t2_bundle.ground_truth
    assert neighbor_comparison(truth, truth, spec) == 1.0
    n_seams = spec.rows * (spec.cols - 1) + spec.cols * (spec.rows - 1)
    assert len(truth_seams(truth)) == n_seams
    rng = np.random.default_rng(1)
    scrambled = random_chromosome(t2_bundle, rng)
    assert neighbor_comparison(scrambled, truth, spec) < 0.2


def test_neighbor_requires_matching_faces(t4_bundle):
    """Flipping one piece in place must break its seams, not just its cell."""
    spec = t4_bundle.spec
    truth = t4_bundle.ground_truth
    bent = truth.copy()
    bent.faces[2, 2] ^= 1
    n_seams = len(truth_seams(truth))
    assert neighbor_comparison(bent, truth, spec) == pytest.approx(
        (n_seams - 4) / n_seams)


def test_metrics_reject_foreign_pieces(t2_bundle):
    spec = t2_bundle.spec
    other = t2_bundle.ground_truth.copy()
    other.pieces[0, 0] = "not-a-piece"
    with pytest.raises(ValueError):
        direct_comparison(other, t2_bundle.ground_truth, spec)
    with pytest.raises(ValueError):
        neighbor_comparison(other, t2_bundle.ground_truth, spec)


@pytest.mark.parametrize("ptype", [PuzzleType.TYPE1, PuzzleType.TYPE2,
                                   PuzzleType.TYPE4])
def test_oracle_puzzles_are_sound(ptype):
    spec = PuzzleSpec(rows=4, cols=5, tile_size=8, puzzle_type=ptype)
    bundle = make_oracle_puzzle(spec, seed=11)
    assert oracle_is_sound(bundle)
    table = build_table(bundle.pieces, spec)
    truth_rels = bundle.ground_truth.relation_set(spec)
    assert table.best_buddies() == truth_rels


def test_oracle_is_deterministic():
    spec = PuzzleSpec(rows=3, cols=3, tile_size=8, puzzle_type=PuzzleType.TYPE2)
    b1 = make_oracle_puzzle(spec, seed=17)
    b2 = make_oracle_puzzle(spec, seed=17)
    assert [p.id for p in b1.pieces] == [p.id for p in b2.pieces]
    assert all(np.array_equal(p.front_rgb, q.front_rgb)
               for p, q in zip(b1.pieces, b2.pieces))


def test_oracle_truth_is_zero_cost():
    from jigsolver.engine import fitness_cost
    spec = PuzzleSpec(rows=4, cols=4, tile_size=8, puzzle_type=PuzzleType.TYPE4)
    bundle = make_oracle_puzzle(spec, seed=23)
    table = build_table(bundle.pieces, spec)
    assert fitness_cost(bundle.ground_truth, table, spec) == 0.0


def test_score_report_serializes(t2_bundle):
    report = score_solution(t2_bundle.ground_truth, t2_bundle.ground_truth,
                            t2_bundle.spec)
    doc = report.to_json()
    assert doc["direct"] == 1.0 and doc["perfect"] is True
    assert set(doc["best_transform"]) == {"quarter_turns", "flip"}
