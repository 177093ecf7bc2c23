"""Decision-graph classifiers: decision trees, OBDDs and OMDDs share one representation.

A DecisionGraph is immutable once built. Node and feature indices used by the
library are dense and 0-based; model documents use the original node ids and
1-based feature indices (or feature names).
"""
import io
import json
import math
import logging
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from pathlib import Path
from typing import Any, Dict, FrozenSet, Hashable, List, Mapping, Optional, Sequence, Tuple, Union

import pandas as pd

from errors import DomainError, InvariantViolation, ModelFormatError, ModelIOError

INF = math.inf

Instance = Tuple[Any, ...]


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    lo_open: bool = False
    hi_open: bool = False

    def __post_init__(self):
        # infinite endpoints are never attained
        if math.isinf(self.lo):
            object.__setattr__(self, "lo_open", True)
        if math.isinf(self.hi):
            object.__setattr__(self, "hi_open", True)

    def is_empty(self) -> bool:
        if self.lo > self.hi:
            return True
        if self.lo == self.hi:
            return self.lo_open or self.hi_open
        return False

    def contains(self, x: float) -> bool:
        if x < self.lo or x > self.hi:
            return False
        if x == self.lo and self.lo_open:
            return False
        if x == self.hi and self.hi_open:
            return False
        return True

    def lower_key(self):
        return (self.lo, 1 if self.lo_open else 0)

    def upper_key(self):
        return (self.hi, 0 if self.hi_open else 1)

    def __str__(self):
        left = "(" if self.lo_open else "["
        right = ")" if self.hi_open else "]"
        return f"{left}{_fmt_num(self.lo)},{_fmt_num(self.hi)}{right}"


def _fmt_num(x: float) -> str:
    if math.isinf(x):
        return "-inf" if x < 0 else "+inf"
    return f"{x:g}"


class IntervalSet:
    """Finite union of intervals, kept sorted, disjoint and merged."""

    __slots__ = ("intervals",)

    def __init__(self, intervals: Sequence[Interval] = ()):
        self.intervals: Tuple[Interval, ...] = self._normalize(intervals)

    @staticmethod
    def _normalize(intervals: Sequence[Interval]) -> Tuple[Interval, ...]:
        pieces = sorted((iv for iv in intervals if not iv.is_empty()), key=Interval.lower_key)
        merged: List[Interval] = []
        for iv in pieces:
            if merged:
                cur = merged[-1]
                touching = iv.lo < cur.hi or (iv.lo == cur.hi and not (cur.hi_open and iv.lo_open))
                if touching:
                    upper = cur if cur.upper_key() >= iv.upper_key() else iv
                    merged[-1] = Interval(cur.lo, upper.hi, cur.lo_open, upper.hi_open)
                    continue
            merged.append(iv)
        return tuple(merged)

    @classmethod
    def real_line(cls) -> "IntervalSet":
        return cls([Interval(-INF, INF, True, True)])

    def is_empty(self) -> bool:
        return not self.intervals

    def contains(self, x: float) -> bool:
        return any(iv.contains(x) for iv in self.intervals)

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet(self.intervals + other.intervals)

    def intersect(self, other: "IntervalSet") -> "IntervalSet":
        out = []
        for a in self.intervals:
            for b in other.intervals:
                low = a if a.lower_key() >= b.lower_key() else b
                high = a if a.upper_key() <= b.upper_key() else b
                out.append(Interval(low.lo, high.hi, low.lo_open, high.hi_open))
        return IntervalSet(out)

    def complement(self) -> "IntervalSet":
        out = []
        lo, lo_open = -INF, True
        for iv in self.intervals:
            out.append(Interval(lo, iv.lo, lo_open, not iv.lo_open))
            lo, lo_open = iv.hi, not iv.hi_open
        out.append(Interval(lo, INF, lo_open, True))
        return IntervalSet(out)

    def subtract(self, other: "IntervalSet") -> "IntervalSet":
        return self.intersect(other.complement())

    def endpoints(self) -> List[float]:
        points = []
        for iv in self.intervals:
            points.extend(p for p in (iv.lo, iv.hi) if not math.isinf(p))
        return points

    def __eq__(self, other):
        return isinstance(other, IntervalSet) and self.intervals == other.intervals

    def __hash__(self):
        return hash(self.intervals)

    def __repr__(self):
        return f"IntervalSet({' U '.join(str(iv) for iv in self.intervals) or 'empty'})"


ValueSet = Union[FrozenSet[Any], IntervalSet]


class DomainKind(str, Enum):
    FINITE = "finite"
    NUMERIC = "numeric"


@dataclass(frozen=True)
class FeatureDomain:
    kind: DomainKind
    values: Tuple[Any, ...] = ()

    def __post_init__(self):
        if self.kind == DomainKind.FINITE:
            if not self.values:
                raise ModelFormatError("finite domain must not be empty")
            if len(set(self.values)) != len(self.values):
                raise ModelFormatError(f"finite domain has duplicate values: {list(self.values)}")

    @property
    def is_numeric(self) -> bool:
        return self.kind == DomainKind.NUMERIC

    def full(self) -> ValueSet:
        if self.is_numeric:
            return IntervalSet.real_line()
        return frozenset(self.values)

    def admits(self, admit: ValueSet, value: Any) -> bool:
        if self.is_numeric:
            return admit.contains(float(value))
        return value in admit

    def intersect(self, a: ValueSet, b: ValueSet) -> ValueSet:
        return a.intersect(b) if self.is_numeric else a & b

    def union(self, a: ValueSet, b: ValueSet) -> ValueSet:
        return a.union(b) if self.is_numeric else a | b

    def subtract(self, a: ValueSet, b: ValueSet) -> ValueSet:
        return a.subtract(b) if self.is_numeric else a - b

    @staticmethod
    def is_empty(a: ValueSet) -> bool:
        return a.is_empty() if isinstance(a, IntervalSet) else not a

    def coerce(self, raw: Any) -> Any:
        """Map a raw (possibly textual) value onto this domain."""
        if self.is_numeric:
            try:
                value = float(raw)
            except (TypeError, ValueError):
                raise DomainError(f"value {raw!r} is not numeric")
            if math.isnan(value):
                raise DomainError("NaN is not a valid feature value")
            return value
        if raw in self.values:
            for value in self.values:
                if value == raw and type(value) is type(raw):
                    return value
        text = str(raw).strip()
        for value in self.values:
            if str(value) == text:
                return value
        raise DomainError(f"value {raw!r} not in domain {list(self.values)}")

    def describe(self, admit: ValueSet) -> str:
        if self.is_numeric:
            return " U ".join(str(iv) for iv in admit.intervals) or "{}"
        ordered = [v for v in self.values if v in admit]
        return "{" + ",".join(str(v) for v in ordered) + "}"


@dataclass(frozen=True)
class Feature:
    name: str
    domain: FeatureDomain


@dataclass(frozen=True)
class Literal:
    feature: int
    admit: ValueSet


@dataclass(frozen=True)
class Node:
    id: Hashable
    feature: Optional[int] = None
    label: Any = None

    @property
    def is_terminal(self) -> bool:
        return self.feature is None


@dataclass(frozen=True)
class Edge:
    source: int
    target: int
    literal: Literal


class DecisionGraph:
    """Rooted DAG classifier with literal-labelled edges and class-labelled terminals."""

    def __init__(self, features: Sequence[Feature], classes: Sequence[Any],
                 nodes: Sequence[Node], edges: Sequence[Edge], root: int):
        self.features: Tuple[Feature, ...] = tuple(features)
        self.classes: Tuple[Any, ...] = tuple(classes)
        self.nodes: Tuple[Node, ...] = tuple(nodes)
        self.edges: Tuple[Edge, ...] = tuple(edges)
        self.root = root

        out_edges: List[List[int]] = [[] for _ in self.nodes]
        in_degree = [0] * len(self.nodes)
        for k, edge in enumerate(self.edges):
            out_edges[edge.source].append(k)
            in_degree[edge.target] += 1
        self.out_edges: Tuple[Tuple[int, ...], ...] = tuple(tuple(ks) for ks in out_edges)
        self.in_degree: Tuple[int, ...] = tuple(in_degree)
        self._index = {node.id: k for k, node in enumerate(self.nodes)}
        self._topo = self._kahn()

    def _kahn(self) -> Optional[Tuple[int, ...]]:
        indeg = list(self.in_degree)
        queue = deque(k for k, d in enumerate(indeg) if d == 0)
        order = []
        while queue:
            p = queue.popleft()
            order.append(p)
            for k in self.out_edges[p]:
                r = self.edges[k].target
                indeg[r] -= 1
                if indeg[r] == 0:
                    queue.append(r)
        return tuple(order) if len(order) == len(self.nodes) else None

    @property
    def m(self) -> int:
        return len(self.features)

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def is_acyclic(self) -> bool:
        return self._topo is not None

    @property
    def topological_order(self) -> Tuple[int, ...]:
        if self._topo is None:
            raise InvariantViolation("decision graph contains a cycle")
        return self._topo

    @property
    def is_tree(self) -> bool:
        return self.is_acyclic and all(
            d == (0 if k == self.root else 1) for k, d in enumerate(self.in_degree))

    @property
    def depth(self) -> int:
        """Length (in edges) of the longest root-to-terminal path."""
        longest = [0] * self.num_nodes
        for p in reversed(self.topological_order):
            for k in self.out_edges[p]:
                longest[p] = max(longest[p], longest[self.edges[k].target] + 1)
        return longest[self.root]

    def index_of(self, node_id: Hashable) -> int:
        return self._index[node_id]

    def feature_index(self, ref: Union[int, str]) -> int:
        """Resolve a 1-based index or a feature name to the 0-based index."""
        if isinstance(ref, str):
            names = [f.name for f in self.features]
            if ref in names:
                return names.index(ref)
            if ref.strip().isdigit():
                ref = int(ref)
            else:
                raise DomainError(f"unknown feature {ref!r}")
        if not 1 <= ref <= self.m:
            raise DomainError(f"feature index {ref} outside 1..{self.m}")
        return ref - 1

    def __repr__(self):
        return f"DecisionGraph(features={self.m}, classes={len(self.classes)}, nodes={self.num_nodes}, edges={len(self.edges)})"


@dataclass
class ValidationReport:
    errors: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def as_dict(self) -> dict:
        return {"ok": self.ok, "errors": list(self.errors), "warnings": list(self.warnings)}


# ---------------------------------------------------------------------------
# parsing

def _load_document(doc: Union[str, bytes, Mapping]) -> Mapping:
    if isinstance(doc, (str, bytes)):
        try:
            doc = json.loads(doc)
        except (json.JSONDecodeError, UnicodeDecodeError) as e:
            raise ModelFormatError(f"malformed document: {e}")
    if not isinstance(doc, Mapping):
        raise ModelFormatError("model document must be an object")
    return doc


def _parse_endpoint(raw: Any, default: float) -> float:
    if raw is None:
        return default
    if isinstance(raw, str):
        text = raw.strip().lower()
        if text in ("-inf", "-infinity"):
            return -INF
        if text in ("inf", "+inf", "infinity"):
            return INF
    try:
        return float(raw)
    except (TypeError, ValueError):
        raise ModelFormatError(f"bad interval endpoint {raw!r}")


def _parse_domain(raw: Any, name: str) -> FeatureDomain:
    if not isinstance(raw, Mapping) or "kind" not in raw:
        raise ModelFormatError(f"feature {name!r}: domain must be an object with a 'kind'")
    kind = raw["kind"]
    if kind == "finite":
        values = raw.get("values")
        if not isinstance(values, list):
            raise ModelFormatError(f"feature {name!r}: finite domain needs a 'values' list")
        try:
            return FeatureDomain(DomainKind.FINITE, tuple(values))
        except ModelFormatError as e:
            raise ModelFormatError(f"feature {name!r}: {e}")
        except TypeError:
            raise ModelFormatError(f"feature {name!r}: domain values must be atomic")
    if kind == "numeric":
        return FeatureDomain(DomainKind.NUMERIC)
    raise ModelFormatError(f"feature {name!r}: unknown domain kind {kind!r}")


def _parse_literal(raw: Any, feature: int, features: Sequence[Feature], where: str) -> Literal:
    if not isinstance(raw, Mapping):
        raise ModelFormatError(f"{where}: literal must be an object")
    domain = features[feature].domain
    if "feature" in raw:
        declared = _resolve_feature(raw["feature"], features, where)
        if declared != feature:
            raise ModelFormatError(
                f"{where}: literal references feature {features[declared].name!r} "
                f"but the source node tests {features[feature].name!r}")
    if "values" in raw:
        if domain.is_numeric:
            raise ModelFormatError(f"{where}: value-set literal on numeric feature {features[feature].name!r}")
        admit = set()
        for value in raw["values"]:
            if value not in domain.values:
                raise ModelFormatError(f"{where}: value {value!r} not in domain of {features[feature].name!r}")
            admit.add(value)
        return Literal(feature, frozenset(admit))
    if "intervals" in raw:
        if not domain.is_numeric:
            raise ModelFormatError(f"{where}: interval literal on finite feature {features[feature].name!r}")
        intervals = []
        for item in raw["intervals"]:
            if not isinstance(item, (list, tuple)) or len(item) not in (2, 4):
                raise ModelFormatError(f"{where}: interval must be [lo, hi, loOpen, hiOpen]")
            lo = _parse_endpoint(item[0], -INF)
            hi = _parse_endpoint(item[1], INF)
            lo_open, hi_open = (bool(item[2]), bool(item[3])) if len(item) == 4 else (False, True)
            intervals.append(Interval(lo, hi, lo_open, hi_open))
        return Literal(feature, IntervalSet(intervals))
    raise ModelFormatError(f"{where}: literal needs 'values' or 'intervals'")


def _resolve_feature(ref: Any, features: Sequence[Feature], where: str) -> int:
    if isinstance(ref, bool):
        raise ModelFormatError(f"{where}: bad feature reference {ref!r}")
    if isinstance(ref, int):
        if not 1 <= ref <= len(features):
            raise ModelFormatError(f"{where}: feature index {ref} outside 1..{len(features)}")
        return ref - 1
    if isinstance(ref, str):
        for k, feat in enumerate(features):
            if feat.name == ref:
                return k
    raise ModelFormatError(f"{where}: unknown feature {ref!r}")


def parse_model(doc: Union[str, bytes, Mapping]) -> DecisionGraph:
    """Build a DecisionGraph from a model document (JSON text or decoded object)."""
    doc = _load_document(doc)
    for key in ("features", "classes", "root", "nodes", "edges"):
        if key not in doc:
            raise ModelFormatError(f"model document is missing '{key}'")

    features = []
    for k, raw in enumerate(doc["features"]):
        if not isinstance(raw, Mapping) or "name" not in raw:
            raise ModelFormatError(f"feature #{k + 1} needs a 'name'")
        name = str(raw["name"])
        features.append(Feature(name, _parse_domain(raw.get("domain"), name)))
    if len({f.name for f in features}) != len(features):
        raise ModelFormatError("feature names must be unique")

    classes = list(doc["classes"])
    if not classes:
        raise ModelFormatError("'classes' must not be empty")

    nodes, index = [], {}
    for raw in doc["nodes"]:
        if not isinstance(raw, Mapping) or "id" not in raw:
            raise ModelFormatError("every node needs an 'id'")
        node_id = raw["id"]
        if node_id in index:
            raise ModelFormatError(f"duplicate node id {node_id!r}")
        if "feature" in raw and "class" in raw:
            raise ModelFormatError(f"node {node_id!r} has both 'feature' and 'class'")
        if "feature" in raw:
            node = Node(node_id, feature=_resolve_feature(raw["feature"], features, f"node {node_id!r}"))
        elif "class" in raw:
            if raw["class"] not in classes:
                raise ModelFormatError(f"node {node_id!r}: unknown class {raw['class']!r}")
            node = Node(node_id, label=raw["class"])
        else:
            raise ModelFormatError(f"node {node_id!r} needs 'feature' or 'class'")
        index[node_id] = len(nodes)
        nodes.append(node)
    if not nodes:
        raise ModelFormatError("model has no nodes")

    edges = []
    for raw in doc["edges"]:
        if not isinstance(raw, Mapping) or "from" not in raw or "to" not in raw:
            raise ModelFormatError("every edge needs 'from' and 'to'")
        src, dst = raw["from"], raw["to"]
        for ref in (src, dst):
            if ref not in index:
                raise ModelFormatError(f"dangling node reference {ref!r}")
        where = f"edge {src!r}->{dst!r}"
        source = nodes[index[src]]
        if source.is_terminal:
            raise ModelFormatError(f"{where}: terminal node {src!r} cannot have outgoing edges")
        literal = _parse_literal(raw.get("literal"), source.feature, features, where)
        edges.append(Edge(index[src], index[dst], literal))

    root_id = doc["root"]
    if root_id not in index:
        raise ModelFormatError(f"dangling node reference {root_id!r} (root)")
    has_parent = {e.target for e in edges}
    sources = [nodes[k].id for k in range(len(nodes)) if k not in has_parent]
    if len(sources) > 1:
        raise ModelFormatError(f"multiple roots: {sources}")
    if index[root_id] in has_parent:
        raise ModelFormatError(f"root {root_id!r} has incoming edges")

    dg = DecisionGraph(features, classes, nodes, edges, index[root_id])
    logging.debug(f"Parsed {dg!r}")
    return dg


def load_model(path: Union[str, Path]) -> DecisionGraph:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ModelIOError(f"cannot read model file {path}: {e}")
    except UnicodeDecodeError as e:
        raise ModelFormatError(f"model file {path} is not UTF-8 text: {e}")
    return parse_model(text)


def _dump_admit(domain: FeatureDomain, admit: ValueSet) -> dict:
    if domain.is_numeric:
        return {"intervals": [
            [None if math.isinf(iv.lo) else iv.lo, None if math.isinf(iv.hi) else iv.hi, iv.lo_open, iv.hi_open]
            for iv in admit.intervals]}
    return {"values": [v for v in domain.values if v in admit]}


def dump_model(dg: DecisionGraph) -> dict:
    """Inverse of parse_model."""
    features = []
    for feat in dg.features:
        domain = {"kind": feat.domain.kind.value}
        if not feat.domain.is_numeric:
            domain["values"] = list(feat.domain.values)
        features.append({"name": feat.name, "domain": domain})
    nodes = []
    for node in dg.nodes:
        if node.is_terminal:
            nodes.append({"id": node.id, "class": node.label})
        else:
            nodes.append({"id": node.id, "feature": node.feature + 1})
    edges = [{
        "from": dg.nodes[e.source].id,
        "to": dg.nodes[e.target].id,
        "literal": _dump_admit(dg.features[e.literal.feature].domain, e.literal.admit),
    } for e in dg.edges]
    return {"features": features, "classes": list(dg.classes), "root": dg.nodes[dg.root].id,
            "nodes": nodes, "edges": edges}


# ---------------------------------------------------------------------------
# validation

PATH_CONTEXT_LIMIT = 1024


def _merge_context(into: Optional[Dict[int, ValueSet]], ctx: Dict[int, ValueSet],
                   features: Sequence[Feature]) -> Dict[int, ValueSet]:
    # absent key means "any value of the domain"
    if into is None:
        return dict(ctx)
    merged = {}
    for f in into.keys() & ctx.keys():
        merged[f] = features[f].domain.union(into[f], ctx[f])
    return merged


def validate(dg: DecisionGraph) -> ValidationReport:
    """Check the structural assumptions explanation algorithms depend on."""
    report = ValidationReport()
    name = lambda k: repr(dg.nodes[k].id)

    if not dg.is_acyclic:
        report.errors.append("cycle detected in decision graph")
        return report

    for p, node in enumerate(dg.nodes):
        outs = dg.out_edges[p]
        if node.is_terminal:
            if outs:
                report.errors.append(f"terminal node {name(p)} has outgoing edges")
            continue
        if not outs:
            report.errors.append(f"non-terminal node {name(p)} has no outgoing edges")
            continue
        domain = dg.features[node.feature].domain
        for k in outs:
            edge = dg.edges[k]
            if edge.literal.feature != node.feature:
                report.errors.append(f"edge {name(p)}->{name(edge.target)} literal tests the wrong feature")
            if domain.is_empty(edge.literal.admit):
                report.errors.append(f"empty literal on edge {name(p)}->{name(edge.target)}")
        for a, b in combinations(outs, 2):
            common = domain.intersect(dg.edges[a].literal.admit, dg.edges[b].literal.admit)
            if not domain.is_empty(common):
                report.errors.append(
                    f"overlapping literals at node {name(p)}: edges to {name(dg.edges[a].target)} "
                    f"and {name(dg.edges[b].target)} both admit {domain.describe(common)}")

    if report.errors:
        return report
    if dg.is_tree:
        _check_tree_paths(dg, report)
    else:
        _check_dag_paths(dg, report)
    for msg in report.warnings:
        logging.warning(f"validate: {msg}")
    return report


def _covered(dg: DecisionGraph, p: int, consistent: ValueSet) -> ValueSet:
    domain = dg.features[dg.nodes[p].feature].domain
    missing = consistent
    for k in dg.out_edges[p]:
        missing = domain.subtract(missing, dg.edges[k].literal.admit)
    return missing


def _check_tree_paths(dg: DecisionGraph, report: ValidationReport) -> None:
    stack = [(dg.root, {})]
    while stack:
        p, ctx = stack.pop()
        node = dg.nodes[p]
        if node.is_terminal:
            continue
        i = node.feature
        domain = dg.features[i].domain
        consistent = ctx.get(i, domain.full())
        missing = _covered(dg, p, consistent)
        if not domain.is_empty(missing):
            report.errors.append(
                f"incomplete literals at node {node.id!r}: values {domain.describe(missing)} "
                f"of {dg.features[i].name!r} have no outgoing edge")
        for k in dg.out_edges[p]:
            edge = dg.edges[k]
            restricted = domain.intersect(edge.literal.admit, consistent)
            if domain.is_empty(restricted):
                report.errors.append(
                    f"inconsistent path: edge {node.id!r}->{dg.nodes[edge.target].id!r} "
                    f"admits no value of {dg.features[i].name!r} consistent with the path")
                continue
            child_ctx = dict(ctx)
            child_ctx[i] = restricted
            stack.append((edge.target, child_ctx))


def _check_dag_paths(dg: DecisionGraph, report: ValidationReport) -> None:
    """Propagate the distinct per-path value restrictions down the graph.

    Coverage and consistency are then checked exactly on every path context.
    A node reached under more than PATH_CONTEXT_LIMIT distinct contexts falls
    back to their union, which can only certify what holds on all paths.
    """
    n = dg.num_nodes
    contexts: List[Dict[tuple, Dict[int, ValueSet]]] = [{} for _ in range(n)]
    merged: List[Optional[Dict[int, ValueSet]]] = [None] * n
    approximate = [False] * n
    tested: List[set] = [set() for _ in range(n)]
    contexts[dg.root][()] = {}
    merged[dg.root] = {}

    for p in dg.topological_order:
        node = dg.nodes[p]
        if node.is_terminal or merged[p] is None:
            continue
        i = node.feature
        feature = dg.features[i]
        domain = feature.domain
        ctxs = [merged[p]] if approximate[p] else list(contexts[p].values())

        if i in tested[p]:
            if approximate[p]:
                report.warnings.append(
                    f"cannot certify coverage at node {node.id!r}: feature {feature.name!r} is tested again "
                    f"below more than {PATH_CONTEXT_LIMIT} differently-constrained paths")
            else:
                report.warnings.append(
                    f"feature {feature.name!r} is tested again at node {node.id!r}; "
                    f"literals checked against {len(ctxs)} path contexts")

        missing = None
        for ctx in ctxs:
            gap = _covered(dg, p, ctx.get(i, domain.full()))
            missing = gap if missing is None else domain.union(missing, gap)
        if not domain.is_empty(missing):
            msg = (f"incomplete literals at node {node.id!r}: values {domain.describe(missing)} "
                   f"of {feature.name!r} have no outgoing edge")
            if approximate[p] and i in tested[p]:
                report.warnings.append(msg)
            else:
                report.errors.append(msg)

        for k in dg.out_edges[p]:
            edge = dg.edges[k]
            target = edge.target
            dead = False
            for ctx in ctxs:
                restricted = domain.intersect(edge.literal.admit, ctx.get(i, domain.full()))
                if domain.is_empty(restricted):
                    dead = True
                    continue
                child_ctx = dict(ctx)
                child_ctx[i] = restricted
                merged[target] = _merge_context(merged[target], child_ctx, dg.features)
                if approximate[p]:
                    approximate[target] = True
                elif not approximate[target]:
                    contexts[target][tuple(sorted(child_ctx.items(), key=lambda item: item[0]))] = child_ctx
                    if len(contexts[target]) > PATH_CONTEXT_LIMIT:
                        approximate[target] = True
                        contexts[target].clear()
            if dead:
                report.errors.append(
                    f"inconsistent path: edge {node.id!r}->{dg.nodes[target].id!r} admits no value of "
                    f"{feature.name!r} consistent with some path reaching {node.id!r}")
            tested[target] |= tested[p] | {i}


# ---------------------------------------------------------------------------
# evaluation

def classify_path(dg: DecisionGraph, v: Instance) -> List[int]:
    """Nodes visited from the root by the instance, terminal last."""
    if len(v) != dg.m:
        raise DomainError(f"instance has {len(v)} values, model has {dg.m} features")
    path = [dg.root]
    p = dg.root
    while not dg.nodes[p].is_terminal:
        node = dg.nodes[p]
        domain = dg.features[node.feature].domain
        value = v[node.feature]
        for k in dg.out_edges[p]:
            if domain.admits(dg.edges[k].literal.admit, value):
                p = dg.edges[k].target
                break
        else:
            raise DomainError(
                f"no admitting edge at node {node.id!r} for {dg.features[node.feature].name}={value!r}")
        path.append(p)
        if len(path) > dg.num_nodes:
            raise InvariantViolation("classification walked into a cycle")
    return path


def classify(dg: DecisionGraph, v: Instance) -> Any:
    return dg.nodes[classify_path(dg, v)[-1]].label


def representative_points(dg: DecisionGraph) -> List[List[Any]]:
    """Finite per-feature value lists covering every cell the model distinguishes."""
    endpoints: List[set] = [set() for _ in dg.features]
    for edge in dg.edges:
        if dg.features[edge.literal.feature].domain.is_numeric:
            endpoints[edge.literal.feature].update(edge.literal.admit.endpoints())
    points = []
    for i, feat in enumerate(dg.features):
        if not feat.domain.is_numeric:
            points.append(list(feat.domain.values))
            continue
        cuts = sorted(endpoints[i])
        if not cuts:
            points.append([0.0])
            continue
        reps = [cuts[0] - 1.0]
        for a, b in zip(cuts, cuts[1:]):
            reps.extend([a, (a + b) / 2.0])
        reps.extend([cuts[-1], cuts[-1] + 1.0])
        points.append(reps)
    return points


# ---------------------------------------------------------------------------
# instances

def coerce_instance(dg: DecisionGraph, raw: Sequence[Any]) -> Instance:
    if len(raw) != dg.m:
        raise DomainError(f"instance has {len(raw)} values, model has {dg.m} features")
    values = []
    for feat, value in zip(dg.features, raw):
        try:
            values.append(feat.domain.coerce(value))
        except DomainError as e:
            raise DomainError(f"feature {feat.name!r}: {e}")
    return tuple(values)


def parse_instance_text(dg: DecisionGraph, text: str) -> Instance:
    """Parse an inline vector such as 'O,L,Y,P'."""
    return coerce_instance(dg, [tok.strip() for tok in text.split(",")])


def load_instances(source: Union[str, Path], dg: DecisionGraph,
                   label_column: Optional[str] = None) -> Tuple[List[Instance], Optional[List[Any]]]:
    """Read instances from a CSV (header of feature names) or a JSON array.

    Returns the instances and, when `label_column` is present in a CSV, the labels.
    """
    path = Path(source)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ModelIOError(f"cannot read instance file {path}: {e}")
    except UnicodeDecodeError as e:
        raise ModelFormatError(f"instance file {path} is not UTF-8 text: {e}")

    if text.lstrip().startswith("["):
        try:
            rows = json.loads(text)
        except json.JSONDecodeError as e:
            raise ModelFormatError(f"malformed instance document: {e}")
        names = [f.name for f in dg.features]
        instances = []
        for n, row in enumerate(rows):
            if isinstance(row, Mapping):
                missing = [name for name in names if name not in row]
                if missing:
                    raise DomainError(f"row {n}: missing features {missing}")
                row = [row[name] for name in names]
            try:
                instances.append(coerce_instance(dg, row))
            except DomainError as e:
                raise DomainError(f"row {n}: {e}")
        return instances, None

    try:
        frame = pd.read_csv(io.StringIO(text), dtype=str, keep_default_na=False, skipinitialspace=True)
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ModelFormatError(f"malformed CSV {path}: {e}")
    frame.columns = [str(c).strip() for c in frame.columns]
    names = [f.name for f in dg.features]
    missing = [name for name in names if name not in frame.columns]
    if missing:
        raise DomainError(f"CSV {path} lacks columns for features {missing}")
    instances = []
    for n, row in enumerate(frame[names].itertuples(index=False, name=None)):
        try:
            instances.append(coerce_instance(dg, row))
        except DomainError as e:
            raise DomainError(f"row {n}: {e}")
    labels = None
    if label_column and label_column in frame.columns:
        labels = list(frame[label_column])
    return instances, labels
