import pytest

import xpg_config
from xpg_config import XpgConfig


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in ("XPG_BRUTE_FORCE_CAP", "XPG_BENCH_WORKERS", "XPG_BENCH_SAMPLE_FRACTION",
                 "XPG_SAT_BACKEND", "XPG_LOG_LEVEL", "PORT"):
        monkeypatch.delenv(name, raising=False)


def test_defaults():
    config = XpgConfig()
    assert config.brute_force_cap == 10_000_000
    assert config.bench_workers == 1
    assert config.bench_sample_fraction == 0.3
    assert config.sat_backend == "dpll"
    assert config.log_level == "WARNING"


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("XPG_BRUTE_FORCE_CAP", "5000")
    monkeypatch.setenv("XPG_BENCH_WORKERS", "4")
    monkeypatch.setenv("XPG_LOG_LEVEL", "debug")
    config = XpgConfig()
    assert config.brute_force_cap == 5000
    assert config.bench_workers == 4
    assert config.log_level == "DEBUG"


def test_malformed_values_fall_back(monkeypatch, caplog):
    monkeypatch.setenv("XPG_BRUTE_FORCE_CAP", "lots")
    monkeypatch.setenv("XPG_BENCH_SAMPLE_FRACTION", "2.5")
    monkeypatch.setenv("XPG_SAT_BACKEND", "minisat")
    config = XpgConfig()
    assert config.brute_force_cap == 10_000_000
    assert config.bench_sample_fraction == 0.3
    assert config.sat_backend == "dpll"
    assert "XPG_BRUTE_FORCE_CAP" in caplog.text


def test_workers_at_least_one(monkeypatch):
    monkeypatch.setenv("XPG_BENCH_WORKERS", "0")
    assert XpgConfig().bench_workers == 1


def test_reload(monkeypatch):
    monkeypatch.setattr(xpg_config, "xpg_config", xpg_config.xpg_config)
    monkeypatch.setenv("PORT", "8080")
    assert xpg_config.reload_config().port == 8080
    assert xpg_config.get_config().port == 8080
