from pathlib import Path

import pytest

from refactormirror.config import DATA_DIR
from refactormirror.harness import load_dataset


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def sample_entries():
    return load_dataset(DATA_DIR / "sample_dataset.json")


@pytest.fixture
def entry(sample_entries):
    by_id = {e.id: e for e in sample_entries}
    return lambda entry_id: by_id[entry_id]
