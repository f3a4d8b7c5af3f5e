import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from chernum import PipelineConfig
from chernum.corpus import (
    CORPUS_SEEDS,
    determinantal_threefold,
    segre_section,
    twisted_cubic,
)


@pytest.fixture(scope="session")
def cubic():
    return twisted_cubic()


@pytest.fixture(scope="session")
def threefold():
    return determinantal_threefold(
        np.random.default_rng(CORPUS_SEEDS["determinantal_threefold"])
    )


@pytest.fixture(scope="session")
def segre():
    return segre_section(np.random.default_rng(CORPUS_SEEDS["segre_section"]))


@pytest.fixture(scope="session")
def cfg():
    return PipelineConfig()
