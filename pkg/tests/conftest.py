import numpy as np
import pytest

from jigsolver.compat import build_table
from jigsolver.factory import scramble, shred, shred_two_sided
from jigsolver.model import PuzzleSpec, PuzzleType

from texture import photo_texture


def textured_bundle(puzzle_type: PuzzleType, rows: int = 5, cols: int = 6,
                    tile: int = 12, seed: int = 100):
    spec = PuzzleSpec(rows=rows, cols=cols, tile_size=tile, puzzle_type=puzzle_type)
    h, w = rows * tile, cols * tile
    if puzzle_type is PuzzleType.TYPE4:
        bundle = shred_two_sided(photo_texture(seed, h, w),
                                 photo_texture(seed + 1, h, w), spec, seed=seed)
    else:
        bundle = shred(photo_texture(seed, h, w), spec, seed=seed)
    return scramble(bundle, seed=seed + 2)


@pytest.fixture(scope="session")
def t1_bundle():
    return textured_bundle(PuzzleType.TYPE1)


@pytest.fixture(scope="session")
def t2_bundle():
    return textured_bundle(PuzzleType.TYPE2)


@pytest.fixture(scope="session")
def t4_bundle():
    return textured_bundle(PuzzleType.TYPE4)


@pytest.fixture(scope="session")
def t2_table(t2_bundle):
    return build_table(t2_bundle.pieces, t2_bundle.spec)


@pytest.fixture(scope="session")
def t4_table(t4_bundle):
    return build_table(t4_bundle.pieces, t4_bundle.spec)


@pytest.fixture(scope="session")
def t1_table(t1_bundle):
    return build_table(t1_bundle.pieces, t1_bundle.spec)


@pytest.fixture
def announce(capsys):
    """Print a line that survives pytest's output capture."""
    def _announce(line: str):
        with capsys.disabled():
            print(line, flush=True)
    return _announce
