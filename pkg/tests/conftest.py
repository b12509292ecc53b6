import numpy as np
import pytest

from qsextlib.codes import CodeSpec
from qsextlib.designs import build_design
from qsextlib.extract import ExtractorInstance
from qsextlib.settings import Budgets


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_budgets():
    return Budgets(enumeration=2**16, codeword_bits=2**10, list_decode_messages=2**10, design_verify_limit=64)


@pytest.fixture
def make_instance():
    def make(code: CodeSpec, m: int, kind: str = "disjoint") -> ExtractorInstance:
        return ExtractorInstance(design=build_design(kind, code.index_bits, m), code=code)

    return make


@pytest.fixture
def isolated_env(monkeypatch, tmp_path):
    """Run from an empty directory with no QSEXT_* variables set."""
    for name in ("QSEXT_WORKERS", "QSEXT_ENUMERATION_BUDGET", "QSEXT_CONFIG", "QSEXT_BENCH_K", "QSEXT_LOADING_MODE"):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.chdir(tmp_path)
    return tmp_path
