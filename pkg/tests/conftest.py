from importlib import resources

import pytest


def corpus_text(name: str) -> str:
    return resources.files("axver.corpus").joinpath(name).read_text(encoding="utf-8")


def corpus_path(name: str) -> str:
    return str(resources.files("axver.corpus").joinpath(name))


@pytest.fixture
def corpus():
    return corpus_text
