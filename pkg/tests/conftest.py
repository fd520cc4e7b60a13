import json
from pathlib import Path

import pytest

DATA_DIR = Path(__file__).resolve().parent / "data"
REPO_ROOT = Path(__file__).resolve().parent.parent


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def repo_root() -> Path:
    return REPO_ROOT


def load_jsonl(path):
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


@pytest.fixture(scope="session")
def fixture_records(data_dir):
    return load_jsonl(data_dir / "candidates.jsonl")


@pytest.fixture(scope="session")
def fixture_refs(data_dir):
    return {
        obj["image_id"]: obj["references"]
        for obj in load_jsonl(data_dir / "refs.jsonl")
    }
