import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for _brute

from didlab import corpus, scenarios


@pytest.fixture(scope="session")
def shipped():
    """name -> validated config, loaded once per session."""
    return {name: corpus.shipped_config(name) for name in corpus.shipped_names()}


@pytest.fixture(scope="session")
def shipped_joints(shipped):
    return {name: scenarios.build_joint(cfg) for name, cfg in shipped.items()}


@pytest.fixture(scope="session")
def seeds():
    return corpus.seed_corpus()
