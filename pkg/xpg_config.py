import os
import logging
from dotenv import load_dotenv

# Load environment variables
load_dotenv()


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(float(raw))
    except ValueError:
        logging.warning(f"Ignoring malformed {name}={raw!r}, using {default}")
        return default


def _env_float(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return float(raw)
    except ValueError:
        logging.warning(f"Ignoring malformed {name}={raw!r}, using {default}")
        return default


class XpgConfig:
    SAT_BACKENDS = ("dpll", "pysat")

    def __init__(self):
        self.brute_force_cap = _env_int("XPG_BRUTE_FORCE_CAP", 10_000_000)
        self.brute_force_max_features = _env_int("XPG_BRUTE_FORCE_MAX_FEATURES", 16)
        self.bench_workers = max(1, _env_int("XPG_BENCH_WORKERS", 1))
        self.bench_sample_threshold = _env_int("XPG_BENCH_SAMPLE_THRESHOLD", 1000)
        self.bench_sample_fraction = _env_float("XPG_BENCH_SAMPLE_FRACTION", 0.3)
        self.random_seed = _env_int("XPG_RANDOM_SEED", 0)
        self.log_level = os.getenv("XPG_LOG_LEVEL", "WARNING").upper()
        self.port = _env_int("PORT", 10000)

        backend = os.getenv("XPG_SAT_BACKEND", "dpll").strip().lower()
        if backend not in self.SAT_BACKENDS:
            logging.warning(f"Unknown SAT backend {backend!r}, falling back to dpll")
            backend = "dpll"
        self.sat_backend = backend

        if not 0.0 < self.bench_sample_fraction <= 1.0:
            logging.warning(f"Bench sample fraction {self.bench_sample_fraction} out of range, using 0.3")
            self.bench_sample_fraction = 0.3

    def as_dict(self) -> dict:
        """Snapshot of the effective settings (used by /health)"""
        return {
            "brute_force_cap": self.brute_force_cap,
            "brute_force_max_features": self.brute_force_max_features,
            "sat_backend": self.sat_backend,
            "bench_workers": self.bench_workers,
            "bench_sample_threshold": self.bench_sample_threshold,
            "bench_sample_fraction": self.bench_sample_fraction,
            "random_seed": self.random_seed,
        }


# Global configuration instance
xpg_config = XpgConfig()


def get_config() -> XpgConfig:
    """Get the global configuration instance"""
    return xpg_config


def reload_config() -> XpgConfig:
    """Re-read the environment (tests and long-lived servers)"""
    global xpg_config
    xpg_config = XpgConfig()
    return xpg_config
