import pathlib

import pytest

from carefulsynth.arena import parse_arena

DATA = pathlib.Path(__file__).resolve().parent.parent / "data"


@pytest.fixture(scope="session")
def fig1_path() -> pathlib.Path:
    return DATA / "fig1.json"


@pytest.fixture(scope="session")
def fig1_text(fig1_path) -> str:
    return fig1_path.read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def fig1(fig1_text):
    return parse_arena(fig1_text)
