import os
from pathlib import Path

import numpy as np
import pytest

# Corpora and results are cached here across pytest sessions unless the
# caller already exported a data dir.
os.environ.setdefault("DYNABO_DATA_DIR", str(Path(__file__).resolve().parent.parent / ".dynabo-cache"))

from dynabo.objectives import get_objective  # noqa: E402
from dynabo.space import ConfigSpace, HyperparameterDef  # noqa: E402
from dynabo.synthesis import load_or_build_corpus  # noqa: E402

WORKERS = min(4, os.cpu_count() or 1)


@pytest.fixture(scope="session")
def workers():
    return WORKERS


@pytest.fixture(scope="session")
def branin_corpus():
    """Clustered corpus on normalized Branin with the generation defaults."""
    return load_or_build_corpus(get_objective("branin:norm"), workers=WORKERS)


@pytest.fixture(scope="session")
def hartmann6_corpus():
    return load_or_build_corpus(get_objective("hartmann6:norm"), workers=WORKERS)


@pytest.fixture()
def unit_space():
    return ConfigSpace([HyperparameterDef(name="x", kind="float", lower=0.0, upper=1.0)])


@pytest.fixture()
def mixed_space():
    return ConfigSpace(
        [
            HyperparameterDef(name="x", kind="float", lower=0.0, upper=10.0),
            HyperparameterDef(name="n", kind="int", lower=1, upper=8),
            HyperparameterDef(name="lr", kind="float", lower=1e-4, upper=1.0, log_scale=True),
            HyperparameterDef(name="kind", kind="categorical", categories=("a", "b", "c")),
            HyperparameterDef(
                name="child", kind="float", lower=0.0, upper=1.0, condition=("kind", "a")
            ),
        ]
    )


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
