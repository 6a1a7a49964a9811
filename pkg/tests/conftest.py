import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

REPO_ROOT = Path(__file__).resolve().parents[1]
PROBLEMS_DIR = REPO_ROOT / "problems"


@pytest.fixture(scope="session")
def problems_dir() -> Path:
    if not PROBLEMS_DIR.is_dir():
        pytest.skip("problems/ not generated; run `satguide gen-corpus`")
    return PROBLEMS_DIR


def load_group(group: str):
    from satguide.tptp import parse_problem

    files = sorted((PROBLEMS_DIR / group).glob("*.p"))
    return [(f.stem, parse_problem(f.read_text(), f.stem)) for f in files]
