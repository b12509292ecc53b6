import os

from load_env import load_env


def test_missing_env_file(isolated_env):
    assert load_env() is False


def test_env_file_overrides_by_default(isolated_env, monkeypatch):
    monkeypatch.setenv("QSEXT_WORKERS", "1")
    (isolated_env / ".env").write_text("QSEXT_WORKERS=3\n")
    assert load_env() is True
    assert os.environ["QSEXT_WORKERS"] == "3"


def test_env_file_no_override(isolated_env, monkeypatch):
    monkeypatch.setenv("QSEXT_WORKERS", "5")
    monkeypatch.setenv("QSEXT_LOADING_MODE", "no-override")
    monkeypatch.setenv("QSEXT_BENCH_K", "2")
    path = isolated_env / "custom.env"
    path.write_text("QSEXT_WORKERS=3\nQSEXT_BENCH_K=6\n")
    load_env(path)
    assert os.environ["QSEXT_WORKERS"] == "5"
    assert os.environ["QSEXT_BENCH_K"] == "2"
