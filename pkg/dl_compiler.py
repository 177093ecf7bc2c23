"""Decision lists compiled into reduced ordered BDDs, exported as decision graphs.

The compiled function is  OR_k (ant_k AND NOT ant_1 ... AND NOT ant_{k-1})
over the rules predicting 1, i.e. the first firing rule decides.
"""
import json
import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from errors import InvariantViolation, ModelFormatError
from models import DecisionGraph, DomainKind, Edge, Feature, FeatureDomain, Literal, Node

FALSE, TRUE = 0, 1


@dataclass(frozen=True)
class Rule:
    literals: Tuple[int, ...]  # signed, 1-based feature indices
    prediction: int

    def fires(self, x: Sequence[int]) -> bool:
        return all(bool(x[abs(lit) - 1]) == (lit > 0) for lit in self.literals)


@dataclass(frozen=True)
class DecisionList:
    rules: Tuple[Rule, ...]
    feature_names: Tuple[str, ...]

    def __post_init__(self):
        if not self.rules:
            raise ModelFormatError("decision list has no rules")
        defaults = [k for k, rule in enumerate(self.rules) if not rule.literals]
        if defaults != [len(self.rules) - 1]:
            raise ModelFormatError("decision list needs exactly one default rule, in last position")
        n = len(self.feature_names)
        for k, rule in enumerate(self.rules):
            if rule.prediction not in (0, 1):
                raise ModelFormatError(f"rule {k + 1}: class must be 0 or 1, got {rule.prediction!r}")
            for lit in rule.literals:
                if lit == 0 or abs(lit) > n:
                    raise ModelFormatError(f"rule {k + 1}: literal {lit} outside +-1..{n}")
                if -lit in rule.literals:
                    raise ModelFormatError(f"rule {k + 1}: contradictory literals {lit} and {-lit}")

    @property
    def num_features(self) -> int:
        return len(self.feature_names)


def parse_decision_list(doc: Union[str, bytes, Mapping, list]) -> DecisionList:
    if isinstance(doc, (str, bytes)):
        try:
            doc = json.loads(doc)
        except (json.JSONDecodeError, UnicodeDecodeError) as e:
            raise ModelFormatError(f"malformed decision list: {e}")
    raw_rules = doc if isinstance(doc, list) else doc.get("rules") if isinstance(doc, Mapping) else None
    if not isinstance(raw_rules, list):
        raise ModelFormatError("decision list must be a list of rules or an object with 'rules'")
    rules = []
    for k, raw in enumerate(raw_rules):
        if not isinstance(raw, Mapping) or "class" not in raw:
            raise ModelFormatError(f"rule {k + 1} needs 'literals' and 'class'")
        lits = raw.get("literals", [])
        if not all(isinstance(lit, int) and not isinstance(lit, bool) for lit in lits):
            raise ModelFormatError(f"rule {k + 1}: literals must be signed integers")
        rules.append(Rule(tuple(lits), raw["class"]))
    mentioned = max((abs(lit) for rule in rules for lit in rule.literals), default=0)
    names = None
    if isinstance(doc, Mapping):
        if "features" in doc:
            names = [str(name) for name in doc["features"]]
        elif "num_features" in doc:
            names = [f"x{i + 1}" for i in range(int(doc["num_features"]))]
    if names is None:
        names = [f"x{i + 1}" for i in range(max(mentioned, 1))]
    return DecisionList(tuple(rules), tuple(names))


def eval_dl(dl: DecisionList, x: Sequence[int]) -> int:
    """Prediction of the first rule whose antecedent holds."""
    for rule in dl.rules:
        if rule.fires(x):
            return rule.prediction
    raise InvariantViolation("no rule fired, the default rule is missing")


class BddManager:
    """Hash-consed node store for one compilation session.

    Node 0 is the constant 0, node 1 the constant 1; internal nodes are
    (level, lo, hi) triples where level is the variable's position in the order.
    """

    def __init__(self, order: Sequence[int]):
        self.order = tuple(order)
        self.level_of = {var: level for level, var in enumerate(self.order)}
        self.terminal_level = len(self.order)
        self.nodes: List[Tuple[int, int, int]] = [(self.terminal_level, FALSE, FALSE),
                                                  (self.terminal_level, TRUE, TRUE)]
        self.unique: Dict[Tuple[int, int, int], int] = {}
        self.memo: Dict[Tuple[str, int, int], int] = {}

    def level(self, u: int) -> int:
        return self.nodes[u][0]

    def mk(self, level: int, lo: int, hi: int) -> int:
        if lo == hi:
            return lo
        key = (level, lo, hi)
        node = self.unique.get(key)
        if node is None:
            node = len(self.nodes)
            self.nodes.append(key)
            self.unique[key] = node
        return node

    def literal(self, lit: int) -> int:
        var = abs(lit) - 1
        if var not in self.level_of:
            raise ValueError(f"variable order does not cover feature {var + 1}")
        level = self.level_of[var]
        return self.mk(level, FALSE, TRUE) if lit > 0 else self.mk(level, TRUE, FALSE)

    def neg(self, u: int) -> int:
        if u <= TRUE:
            return 1 - u
        key = ("not", u, u)
        if key not in self.memo:
            level, lo, hi = self.nodes[u]
            self.memo[key] = self.mk(level, self.neg(lo), self.neg(hi))
        return self.memo[key]

    def apply(self, op: str, u: int, v: int) -> int:
        if op == "and":
            if u == FALSE or v == FALSE:
                return FALSE
            if u == TRUE:
                return v
            if v == TRUE or u == v:
                return u
        elif op == "or":
            if u == TRUE or v == TRUE:
                return TRUE
            if u == FALSE:
                return v
            if v == FALSE or u == v:
                return u
        else:
            raise ValueError(f"unknown operator {op!r}")
        if u > v:
            u, v = v, u
        key = (op, u, v)
        if key in self.memo:
            return self.memo[key]
        lu, lv = self.level(u), self.level(v)
        top = min(lu, lv)
        u_lo, u_hi = (self.nodes[u][1], self.nodes[u][2]) if lu == top else (u, u)
        v_lo, v_hi = (self.nodes[v][1], self.nodes[v][2]) if lv == top else (v, v)
        result = self.mk(top, self.apply(op, u_lo, v_lo), self.apply(op, u_hi, v_hi))
        self.memo[key] = result
        return result

    def export(self, root: int, num_features: int) -> "Obdd":
        """Copy the nodes reachable from `root` with canonical numbering."""
        renumber = {FALSE: FALSE, TRUE: TRUE}
        table: List[Optional[Tuple[int, int, int]]] = [None, None]
        stack = [(root, False)]
        while stack:
            u, expanded = stack.pop()
            if u in renumber:
                continue
            level, lo, hi = self.nodes[u]
            if not expanded:
                stack.append((u, True))
                stack.append((hi, False))
                stack.append((lo, False))
                continue
            renumber[u] = len(table)
            table.append((self.order[level], renumber[lo], renumber[hi]))
        return Obdd(self.order, num_features, tuple(table), renumber[root])


@dataclass(frozen=True)
class Obdd:
    order: Tuple[int, ...]
    num_features: int
    table: Tuple[Optional[Tuple[int, int, int]], ...]  # (feature, lo, hi); None for the two terminals
    root: int

    @property
    def is_constant(self) -> bool:
        return self.root <= TRUE

    @property
    def size(self) -> int:
        return len(self.table) - 2

    def evaluate(self, x: Sequence[int]) -> int:
        u = self.root
        while u > TRUE:
            var, lo, hi = self.table[u]
            u = hi if x[var] else lo
        return u

    def signature(self) -> Tuple:
        return (self.order, self.root, self.table[2:])

    def check(self) -> None:
        """Raise InvariantViolation unless the diagram is ordered and reduced."""
        level_of = {var: level for level, var in enumerate(self.order)}
        seen = set()
        for u in range(2, len(self.table)):
            var, lo, hi = self.table[u]
            if lo == hi:
                raise InvariantViolation(f"redundant node {u}: both children are {lo}")
            if (var, lo, hi) in seen:
                raise InvariantViolation(f"duplicate node triple {(var, lo, hi)}")
            seen.add((var, lo, hi))
            for child in (lo, hi):
                if child > TRUE and level_of[self.table[child][0]] <= level_of[var]:
                    raise InvariantViolation(f"node {u} breaks the variable order")


def compile_dl(dl: DecisionList, order: Optional[Sequence[int]] = None) -> Obdd:
    """Reduced OBDD of the decision list under `order` (0-based features, default ascending)."""
    order = list(range(dl.num_features)) if order is None else list(order)
    if sorted(set(order)) != sorted(order):
        raise ValueError("variable order repeats a feature")
    mentioned = {abs(lit) - 1 for rule in dl.rules for lit in rule.literals}
    missing = mentioned - set(order)
    if missing:
        raise ValueError(f"variable order misses features {sorted(i + 1 for i in missing)}")
    mgr = BddManager(order)
    f, covered = FALSE, FALSE
    for rule in dl.rules:
        antecedent = TRUE
        for lit in rule.literals:
            antecedent = mgr.apply("and", antecedent, mgr.literal(lit))
        if rule.prediction == 1:
            f = mgr.apply("or", f, mgr.apply("and", antecedent, mgr.neg(covered)))
        covered = mgr.apply("or", covered, antecedent)
    obdd = mgr.export(f, dl.num_features)
    obdd.check()
    logging.info(f"Compiled decision list with {len(dl.rules)} rules into an OBDD of {obdd.size} nodes")
    return obdd


def obdd_to_dg(b: Obdd, feature_names: Optional[Sequence[str]] = None) -> DecisionGraph:
    names = list(feature_names) if feature_names else [f"x{i + 1}" for i in range(b.num_features)]
    boolean = FeatureDomain(DomainKind.FINITE, (0, 1))
    features = [Feature(name, boolean) for name in names]
    reachable = sorted({b.root} | {child for entry in b.table[2:] for child in entry[1:]})
    index = {u: k for k, u in enumerate(reachable)}
    nodes, edges = [], []
    for u in reachable:
        if u <= TRUE:
            nodes.append(Node(u, label=u))
        else:
            nodes.append(Node(u, feature=b.table[u][0]))
    for u in reachable:
        if u > TRUE:
            var, lo, hi = b.table[u]
            edges.append(Edge(index[u], index[lo], Literal(var, frozenset({0}))))
            edges.append(Edge(index[u], index[hi], Literal(var, frozenset({1}))))
    return DecisionGraph(features, [0, 1], nodes, edges, index[b.root])
