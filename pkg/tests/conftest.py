from pathlib import Path

import pytest

from dcbound.dcp import parse_dcp
from dcbound.program import parse_program

DATA = Path(__file__).parent / "data"


def load_dcp(name: str):
    return parse_dcp((DATA / name).read_text())


def load_prog(name: str):
    return parse_program((DATA / name).read_text())


@pytest.fixture
def data_dir() -> Path:
    return DATA
