import os
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT))

from dl_compiler import parse_decision_list  # noqa: E402
from models import load_model  # noqa: E402
from xpg import build_xpg  # noqa: E402

DATA_DIR = ROOT / "data"

settings.register_profile("default", max_examples=100, deadline=None)
settings.register_profile("fast", max_examples=20, deadline=None)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "default"))

# 0-based: Age, Income, Student, CreditRating
HARDWARE_INSTANCE = ("O", "L", "Y", "P")
RGB_INSTANCE = (0, 1, 2)


@pytest.fixture
def data_dir():
    return DATA_DIR


@pytest.fixture
def hardware_dg():
    return load_model(DATA_DIR / "hardware_dt.json")


@pytest.fixture
def rgb_dg():
    return load_model(DATA_DIR / "rgb_omdd.json")


@pytest.fixture
def income_dg():
    return load_model(DATA_DIR / "income_thresholds.json")


@pytest.fixture
def hardware_xpg(hardware_dg):
    return build_xpg(hardware_dg, HARDWARE_INSTANCE)


@pytest.fixture
def rgb_xpg(rgb_dg):
    return build_xpg(rgb_dg, RGB_INSTANCE)


@pytest.fixture
def example_dl():
    return parse_decision_list((DATA_DIR / "example_dl.json").read_text(encoding="utf-8"))


@pytest.fixture
def rng():
    return np.random.default_rng(20240617)
