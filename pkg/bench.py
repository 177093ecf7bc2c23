"""Per-model explanation statistics over a dataset.

One row per model: sizes, how many AXps/CXps each instance has, how long
they are relative to the number of features, and enumeration runtimes.
"""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from enumeration import XpEnumerator
from errors import DomainError
from explainer import XpKind
from models import DecisionGraph, Instance, classify, load_instances
from xpg import build_xpg
from xpg_config import get_config

COLUMNS = ["model", "#F", "#TI", "#N", "#D", "%A", "XPs",
           "AXp Mx", "AXp m", "AXp avg", "AXp %L",
           "CXp Mx", "CXp m", "CXp avg", "CXp %L",
           "Tot", "Mx", "m", "avg"]


@dataclass
class InstanceStats:
    axp_lengths: List[int]
    cxp_lengths: List[int]
    runtime: float
    solve_calls: int


def prepare_dataset(dg: DecisionGraph, path: str, label_column: Optional[str] = None,
                    sample_threshold: Optional[int] = None, sample_fraction: Optional[float] = None,
                    seed: Optional[int] = None) -> Tuple[List[Instance], Optional[List[Any]]]:
    """Load, drop duplicate rows and, for large datasets, sample a fixed fraction."""
    config = get_config()
    threshold = sample_threshold if sample_threshold is not None else config.bench_sample_threshold
    fraction = sample_fraction if sample_fraction is not None else config.bench_sample_fraction
    seed = seed if seed is not None else config.random_seed

    instances, labels = load_instances(path, dg, label_column=label_column)
    names = [f.name for f in dg.features]
    frame = pd.DataFrame(instances, columns=names)
    if labels is not None:
        frame["__label"] = labels
    before = len(frame)
    frame = frame.drop_duplicates(subset=names).reset_index(drop=True)
    if len(frame) < before:
        logging.info(f"Filtered {before - len(frame)} duplicate rows from {path}")
    if len(frame) > threshold:
        size = max(1, int(round(len(frame) * fraction)))
        rng = np.random.default_rng(seed)
        picked = np.sort(rng.choice(len(frame), size=size, replace=False))
        frame = frame.iloc[picked].reset_index(drop=True)
        logging.info(f"Sampled {size} of {before} rows (fraction {fraction}, seed {seed})")
    kept = [tuple(row) for row in frame[names].itertuples(index=False, name=None)]
    kept_labels = list(frame["__label"]) if labels is not None else None
    return kept, kept_labels


def explain_instance(dg: DecisionGraph, v: Instance, **options) -> InstanceStats:
    started = time.perf_counter()
    x = build_xpg(dg, v)
    enumerator = XpEnumerator(x, **options)
    axps, cxps = [], []
    for xp in enumerator:
        (axps if xp.kind == XpKind.AXP else cxps).append(len(xp.features))
    runtime = time.perf_counter() - started
    logging.debug(f"Instance {v}: {len(axps)} AXps, {len(cxps)} CXps in {runtime:.4f}s")
    return InstanceStats(axps, cxps, runtime, enumerator.solve_calls)


def _length_percent(lengths: Sequence[int], m: int) -> float:
    if not lengths or not m:
        return 0.0
    return 100.0 * float(np.mean(lengths)) / m


def run_bench(dg: DecisionGraph, instances: Sequence[Instance], labels: Optional[Sequence[Any]] = None,
              name: str = "model", workers: Optional[int] = None, **options) -> Dict[str, Any]:
    """Statistics row for one model; instances may be explained concurrently, order is kept."""
    if not instances:
        raise DomainError("no instances")
    workers = workers if workers is not None else get_config().bench_workers
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            stats = list(pool.map(lambda v: explain_instance(dg, v, **options), instances))
    else:
        stats = [explain_instance(dg, v, **options) for v in instances]

    per_instance = pd.DataFrame({
        "n_axp": [len(s.axp_lengths) for s in stats],
        "n_cxp": [len(s.cxp_lengths) for s in stats],
        "runtime": [s.runtime for s in stats],
    })
    axp_lengths = [n for s in stats for n in s.axp_lengths]
    cxp_lengths = [n for s in stats for n in s.cxp_lengths]

    accuracy = None
    if labels is not None:
        hits = sum(str(classify(dg, v)) == str(label) for v, label in zip(instances, labels))
        accuracy = round(100.0 * hits / len(instances), 2)

    row = {
        "model": name,
        "#F": dg.m,
        "#TI": len(instances),
        "#N": dg.num_nodes,
        "#D": dg.depth,
        "%A": accuracy,
        "XPs": round(float((per_instance["n_axp"] + per_instance["n_cxp"]).mean()), 2),
        "AXp Mx": int(per_instance["n_axp"].max()),
        "AXp m": int(per_instance["n_axp"].min()),
        "AXp avg": round(float(per_instance["n_axp"].mean()), 2),
        "AXp %L": round(_length_percent(axp_lengths, dg.m), 2),
        "CXp Mx": int(per_instance["n_cxp"].max()),
        "CXp m": int(per_instance["n_cxp"].min()),
        "CXp avg": round(float(per_instance["n_cxp"].mean()), 2),
        "CXp %L": round(_length_percent(cxp_lengths, dg.m), 2),
        "Tot": round(float(per_instance["runtime"].sum()), 4),
        "Mx": round(float(per_instance["runtime"].max()), 4),
        "m": round(float(per_instance["runtime"].min()), 4),
        "avg": round(float(per_instance["runtime"].mean()), 4),
    }
    logging.info(f"Bench {name}: {len(instances)} instances, {row['XPs']} XPs on average, {row['Tot']}s total")
    return row


def render_table(rows: Sequence[Dict[str, Any]]) -> str:
    frame = pd.DataFrame(list(rows), columns=COLUMNS)
    # missing cells arrive as None in object columns, which na_rep leaves alone
    return frame.astype(object).where(frame.notna(), "-").to_string(index=False)
