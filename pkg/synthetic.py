"""Seeded random decision trees, decision graphs, decision lists and datasets.

Every generator takes a numpy Generator so runs are reproducible from one seed.
Generated graphs always pass `validate`.
"""
import logging
from collections import deque
from functools import reduce
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from dl_compiler import DecisionList, Rule
from models import (INF, DecisionGraph, DomainKind, Edge, Feature, FeatureDomain, Instance, Interval, IntervalSet,
                    Literal, Node, ValueSet, classify)

# thresholds available to generated tests on numeric features
NUMERIC_GRID = (0.0, 1.0, 2.0, 3.0)

Context = Dict[int, ValueSet]


def random_features(rng: np.random.Generator, m: int, max_domain: int = 4, numeric: int = 0) -> List[Feature]:
    """m features; `numeric` of them, at random positions, are real-valued."""
    numeric_at = set()
    if numeric:
        numeric_at = {int(i) for i in rng.choice(m, size=min(numeric, m), replace=False)}
    features = []
    for i in range(m):
        if i in numeric_at:
            features.append(Feature(f"x{i + 1}", FeatureDomain(DomainKind.NUMERIC)))
            continue
        size = int(rng.integers(2, max_domain + 1))
        features.append(Feature(f"x{i + 1}", FeatureDomain(DomainKind.FINITE, tuple(range(size)))))
    return features


def _random_partition(rng: np.random.Generator, values: Sequence[Any]) -> List[List[Any]]:
    """Split `values` into 2..len(values) non-empty blocks."""
    values = list(values)
    k = int(rng.integers(2, len(values) + 1))
    shuffled = [values[j] for j in rng.permutation(len(values))]
    # first k values seed the blocks so none is empty
    blocks = [[v] for v in shuffled[:k]]
    for v in shuffled[k:]:
        blocks[int(rng.integers(0, k))].append(v)
    return blocks


def _numeric_pieces(cuts: Sequence[float]) -> List[IntervalSet]:
    bounds = [-INF] + sorted(cuts) + [INF]
    return [IntervalSet([Interval(lo, hi, False, True)]) for lo, hi in zip(bounds, bounds[1:])]


def _random_split(rng: np.random.Generator, feature: Feature, consistent: Sequence[ValueSet],
                  max_domain: int, attempts: int = 8) -> Optional[List[ValueSet]]:
    """Disjoint literals covering every set in `consistent`, each admitting a value of every set.

    None when no such split turns up.
    """
    domain = feature.domain
    if domain.is_numeric:
        # t-0.5 and t on either side of a cut at t
        cuts = [t for t in NUMERIC_GRID if all(s.contains(t) and s.contains(t - 0.5) for s in consistent)]
        if not cuts:
            return None
        k = int(rng.integers(1, min(len(cuts), max(max_domain - 1, 1)) + 1))
        return _numeric_pieces([float(t) for t in rng.choice(cuts, size=k, replace=False)])
    if any(len(s) < 2 for s in consistent):
        return None
    values = [v for v in domain.values if any(v in s for s in consistent)]
    for _ in range(attempts):
        blocks = [frozenset(b) for b in _random_partition(rng, values)]
        if len(consistent) == 1 or all(b & s for b in blocks for s in consistent):
            return blocks
    return None


def random_graph(rng: np.random.Generator, m: int = 6, max_domain: int = 4, max_nodes: int = 60,
                 num_classes: int = 2, features: Optional[List[Feature]] = None,
                 leaf_probability: float = 0.3, share_probability: float = 0.0) -> DecisionGraph:
    """Random decision graph grown breadth-first from the root.

    With `share_probability` > 0 an edge may point at a node still waiting to be
    expanded, so subgraphs are shared and a feature can be retested below a merge.
    Each node is expanded only once all its incoming paths are known; its literals
    then admit a value of every one of them and together cover them all.
    """
    features = features or random_features(rng, m, max_domain)
    classes = list(range(num_classes))
    nodes: List[Optional[Node]] = []
    edges: List[Edge] = []
    contexts: List[List[Context]] = []
    waiting: deque = deque()

    def new_node() -> int:
        nodes.append(None)
        contexts.append([])
        waiting.append(len(nodes) - 1)
        return len(nodes) - 1

    contexts[new_node()].append({})
    while waiting:
        k = waiting.popleft()
        ctxs = contexts[k]
        budget = max_nodes - len(nodes)
        split, i = None, None
        if budget >= 2 and not (k > 0 and rng.random() < leaf_probability):
            for i in (int(j) for j in rng.permutation(len(features))):
                domain = features[i].domain
                split = _random_split(rng, features[i], [c.get(i, domain.full()) for c in ctxs], max_domain)
                if split:
                    break
        if not split:
            nodes[k] = Node(k, label=classes[int(rng.integers(0, num_classes))])
            continue
        domain = features[i].domain
        if len(split) > budget:
            split = split[:budget - 1] + [reduce(domain.union, split[budget - 1:])]
        nodes[k] = Node(k, feature=i)
        targets = set()
        for block in split:
            shareable = [q for q in waiting if q not in targets]
            if share_probability and shareable and rng.random() < share_probability:
                target = shareable[int(rng.integers(0, len(shareable)))]
            else:
                target = new_node()
            targets.add(target)
            for c in ctxs:
                child = dict(c)
                child[i] = domain.intersect(block, c.get(i, domain.full()))
                if child not in contexts[target]:
                    contexts[target].append(child)
            edges.append(Edge(k, target, Literal(i, block)))
    return DecisionGraph(features, classes, nodes, edges, 0)


def random_tree(rng: np.random.Generator, m: int = 6, max_domain: int = 4, max_nodes: int = 60,
                num_classes: int = 2, features: Optional[List[Feature]] = None,
                leaf_probability: float = 0.3) -> DecisionGraph:
    """Random decision tree; a feature is retested only on values still consistent with the path."""
    return random_graph(rng, m, max_domain, max_nodes, num_classes, features, leaf_probability)


def random_dag(rng: np.random.Generator, m: int = 6, max_domain: int = 4, max_nodes: int = 60,
               num_classes: int = 2, width: int = 3, features: Optional[List[Feature]] = None) -> DecisionGraph:
    """Random ordered multi-valued decision diagram (each feature tested at most once per path).

    Built bottom-up over a random feature order, so nodes share children freely.
    """
    features = features or random_features(rng, m, max_domain)
    classes = list(range(num_classes))
    nodes: List[Node] = [Node(f"t{c}", label=c) for c in classes]
    edges: List[Tuple[int, int, int, ValueSet]] = []
    layer_order = [int(i) for i in rng.permutation(len(features))]
    below: List[int] = list(range(num_classes))
    for i in reversed(layer_order):
        domain = features[i].domain
        count = int(rng.integers(1, width + 1)) if i != layer_order[0] else 1
        if len(nodes) + count > max_nodes:
            count = max(1, max_nodes - len(nodes)) if i == layer_order[0] else max_nodes - len(nodes) - 1
        created = []
        for _ in range(max(count, 0)):
            k = len(nodes)
            nodes.append(Node(f"n{k}", feature=i))
            targets: Dict[int, List[ValueSet]] = {}
            for block in _random_split(rng, features[i], [domain.full()], max_domain):
                target = below[int(rng.integers(0, len(below)))]
                targets.setdefault(target, []).append(block)
            for target, blocks in targets.items():
                edges.append((k, target, i, reduce(domain.union, blocks)))
            created.append(k)
        below.extend(created)
    root = len(nodes) - 1

    # keep only what the root reaches
    out: Dict[int, List[Tuple[int, int, ValueSet]]] = {}
    for src, dst, i, admit in edges:
        out.setdefault(src, []).append((dst, i, admit))
    reachable, stack = {root}, [root]
    while stack:
        p = stack.pop()
        for dst, _, _ in out.get(p, []):
            if dst not in reachable:
                reachable.add(dst)
                stack.append(dst)
    keep = sorted(reachable)
    index = {old: new for new, old in enumerate(keep)}
    kept_edges = [Edge(index[src], index[dst], Literal(i, admit))
                  for src, dst, i, admit in edges if src in reachable]
    return DecisionGraph(features, classes, [nodes[k] for k in keep], kept_edges, index[root])


def random_instance(rng: np.random.Generator, dg: DecisionGraph) -> Instance:
    values = []
    for feat in dg.features:
        if feat.domain.is_numeric:
            # half the draws are integers, which is where generated thresholds sit
            if rng.random() < 0.5:
                values.append(float(rng.integers(-1, len(NUMERIC_GRID) + 1)))
            else:
                values.append(float(rng.uniform(-1.0, len(NUMERIC_GRID))))
        else:
            values.append(feat.domain.values[int(rng.integers(0, len(feat.domain.values)))])
    return tuple(values)


def random_decision_list(rng: np.random.Generator, n: int = 8, num_rules: int = 6,
                         max_literals: int = 3) -> DecisionList:
    rules = []
    for _ in range(num_rules):
        width = int(rng.integers(1, min(max_literals, n) + 1))
        variables = rng.choice(n, size=width, replace=False)
        literals = tuple(int(v + 1) * (1 if rng.random() < 0.5 else -1) for v in variables)
        rules.append(Rule(literals, int(rng.integers(0, 2))))
    rules.append(Rule((), int(rng.integers(0, 2))))
    return DecisionList(tuple(rules), tuple(f"x{i + 1}" for i in range(n)))


def random_dataset(rng: np.random.Generator, dg: DecisionGraph, rows: int = 100,
                   label_noise: float = 0.0, label_column: str = "class") -> pd.DataFrame:
    """Random instances labelled by the model, a fraction of labels flipped to another class."""
    data = [random_instance(rng, dg) for _ in range(rows)]
    labels = []
    for v in data:
        label = classify(dg, v)
        if label_noise and len(dg.classes) > 1 and rng.random() < label_noise:
            others = [c for c in dg.classes if c != label]
            label = others[int(rng.integers(0, len(others)))]
        labels.append(label)
    frame = pd.DataFrame(data, columns=[f.name for f in dg.features])
    frame[label_column] = labels
    logging.debug(f"Generated dataset with {rows} rows for {dg!r}")
    return frame
