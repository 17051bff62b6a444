import functools
import os

import pytest

from trapver.syntax import load_system

CORPUS = os.path.join(os.path.dirname(__file__), os.pardir, "corpus")


def corpus_path(name: str) -> str:
    return os.path.join(CORPUS, name + ".cbs")


@functools.lru_cache(maxsize=None)
def corpus_system(name: str):
    return load_system(corpus_path(name))


CORPUS_NAMES = sorted(
    fn[:-4] for fn in os.listdir(CORPUS) if fn.endswith(".cbs"))


@pytest.fixture(scope="session")
def philosophers():
    return corpus_system("philosophers")


@pytest.fixture(scope="session")
def alternating():
    return corpus_system("alternating")
