import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from smoothlab.corpus import corpus_generate  # noqa: E402
from smoothlab.spectral import GridFunction  # noqa: E402


@pytest.fixture
def cosine():
    return GridFunction.from_callable(np.cos, 64)


@pytest.fixture
def trig_poly():
    """Random real trigonometric polynomial of degree 8 on N=64."""
    return corpus_generate("random_trig(8,3)", 64)


@pytest.fixture
def small_corpus():
    return {name: corpus_generate(name, 64) for name in ("abs_sin", "weierstrass(0.5)", "random_trig(8,1)")}
