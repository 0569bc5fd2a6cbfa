import sys
from pathlib import Path

import pytest

from rovmpc import default_params

REPO_ROOT = Path(__file__).resolve().parent.parent

sys.path.insert(0, str(Path(__file__).resolve().parent))


@pytest.fixture
def params():
    return default_params()


@pytest.fixture(scope="session")
def configs_dir():
    return REPO_ROOT / "configs"
