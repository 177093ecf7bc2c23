import json
from itertools import product

import numpy as np
from hypothesis import given, strategies as st

from enumeration import enumerate_all
from models import classify, classify_path, dump_model, parse_model, representative_points, validate
from synthetic import random_dag, random_features, random_graph, random_instance
from xpg import build_xpg, evaluate, reach_zero, svector_to_free

seeds = st.integers(min_value=0, max_value=2**32 - 1)
families = st.sampled_from(["tree", "dag", "graph"])


def random_model(rng, family, m, max_domain=4, max_nodes=60):
    features = random_features(rng, m, max_domain, numeric=int(rng.integers(0, min(2, m) + 1)))
    if family == "dag":
        return random_dag(rng, max_domain=max_domain, max_nodes=max_nodes, features=features)
    share = 0.4 if family == "graph" else 0.0
    return random_graph(rng, max_domain=max_domain, max_nodes=max_nodes, features=features,
                        share_probability=share)


def random_xpg(seed, family, m_max=8):
    rng = np.random.default_rng(seed)
    dg = random_model(rng, family, int(rng.integers(1, m_max + 1)))
    return dg, build_xpg(dg, random_instance(rng, dg)), rng


@given(seeds, families)
def test_evaluation_is_monotone(seed, family):
    _, x, rng = random_xpg(seed, family)
    for _ in range(120):
        s = rng.integers(0, 2, size=x.m)
        s_up = np.maximum(s, rng.integers(0, 2, size=x.m))
        assert evaluate(x, tuple(int(b) for b in s)) <= evaluate(x, tuple(int(b) for b in s_up))


@given(seeds, families)
def test_extreme_assignments(seed, family):
    _, x, _ = random_xpg(seed, family)
    assert evaluate(x, (1,) * x.m) == 1
    if x.zero_terminals:
        assert evaluate(x, (0,) * x.m) == 0


@given(seeds, families)
def test_complement_law(seed, family):
    _, x, _ = random_xpg(seed, family, m_max=10)
    for s in product((0, 1), repeat=x.m):
        assert reach_zero(x, svector_to_free(s)) == 1 - evaluate(x, s)


@given(seeds, families)
def test_generated_models_are_valid_and_total(seed, family):
    dg, _, _ = random_xpg(seed, family, m_max=5)
    assert validate(dg).ok, validate(dg).errors
    points = representative_points(dg)
    for point in product(*points):
        assert classify(dg, point) in dg.classes


@given(seeds, families)
def test_every_terminal_is_reached_by_some_point(seed, family):
    dg, _, _ = random_xpg(seed, family, m_max=5)
    reached = {classify_path(dg, point)[-1] for point in product(*representative_points(dg))}
    assert reached == {p for p, node in enumerate(dg.nodes) if node.is_terminal}


@given(seeds, families)
def test_node_order_in_the_document_does_not_matter(seed, family):
    dg, _, rng = random_xpg(seed, family, m_max=5)
    doc = dump_model(dg)
    doc["nodes"] = [doc["nodes"][j] for j in rng.permutation(len(doc["nodes"]))]
    doc["edges"] = [doc["edges"][j] for j in rng.permutation(len(doc["edges"]))]
    shuffled = parse_model(json.dumps(doc))
    assert validate(shuffled).ok
    for point in product(*representative_points(dg)):
        assert classify(shuffled, point) == classify(dg, point)
    v = random_instance(rng, dg)
    assert enumerate_all(build_xpg(shuffled, v)) == enumerate_all(build_xpg(dg, v))


def test_shared_graphs_retest_features_below_merges():
    retested = 0
    for seed in range(40):
        rng = np.random.default_rng(seed)
        dg = random_graph(rng, m=3, max_domain=3, max_nodes=40, share_probability=0.5)
        report = validate(dg)
        assert report.ok, (seed, report.errors)
        if not dg.is_tree and any("tested again" in w for w in report.warnings):
            retested += 1
    assert retested > 0
