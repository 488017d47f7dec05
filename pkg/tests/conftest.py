"""Shared fixtures; the project root goes on sys.path the same way run.py does it."""

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.numerics.bounded import working_precision  # noqa: E402
from src.records import repository  # noqa: E402
from src.records.repository import ArtifactStore  # noqa: E402


@pytest.fixture
def store(tmp_path):
    """Artifact store under a temporary directory, also installed as the default store."""
    original = repository._store
    repository._store = ArtifactStore(tmp_path)
    yield repository._store
    repository._store = original


@pytest.fixture
def precision():
    with working_precision(40) as digits:
        yield digits
