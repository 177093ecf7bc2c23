"""Explanation graphs (XpGs): a decision graph specialised to one instance.

Edges are labelled 1 when their literal is consistent with the instance,
terminals are labelled 1 when they carry the predicted class. Selector
variable s_i = 1 fixes feature i to its instance value, s_i = 0 frees it.
"""
import logging
from collections import deque
from typing import Any, Collection, Dict, Hashable, List, Optional, Sequence, Tuple

from errors import InvariantViolation
from models import DecisionGraph, Instance, classify_path

SVector = Tuple[int, ...]
FreeSet = Collection[int]


class XpG:
    """Immutable explanation graph.

    `children[p]` lists `(child, edge_label)` pairs; `var_of[p]` is the selector
    (0-based feature index) of non-terminal p and None for terminals;
    `terminal_label[q]` is 0/1 for terminals and None otherwise.
    """

    def __init__(self, m: int, root: int, children: Sequence[Sequence[Tuple[int, int]]],
                 var_of: Sequence[Optional[int]], terminal_label: Sequence[Optional[int]],
                 node_ids: Optional[Sequence[Hashable]] = None, source_class: Any = None,
                 feature_names: Optional[Sequence[str]] = None):
        self.m = m
        self.root = root
        self.children: Tuple[Tuple[Tuple[int, int], ...], ...] = tuple(tuple(c) for c in children)
        self.var_of: Tuple[Optional[int], ...] = tuple(var_of)
        self.terminal_label: Tuple[Optional[int], ...] = tuple(terminal_label)
        self.node_ids = tuple(node_ids) if node_ids is not None else tuple(range(len(self.children)))
        self.source_class = source_class
        self.feature_names = tuple(feature_names) if feature_names else tuple(f"x{i + 1}" for i in range(m))

        n = len(self.children)
        if not (len(self.var_of) == len(self.terminal_label) == len(self.node_ids) == n):
            raise InvariantViolation("XpG node tables have inconsistent sizes")
        self.parents: Tuple[Tuple[Tuple[int, int], ...], ...] = self._parents()
        self.order = self._topological_order()
        self.zero_terminals = tuple(q for q in range(n)
                                    if self.var_of[q] is None and self.terminal_label[q] == 0)
        # selectors no node tests; fixing or freeing them never matters
        self.untested = frozenset(range(m)) - frozenset(v for v in self.var_of if v is not None)

    def _parents(self):
        parents: List[List[Tuple[int, int]]] = [[] for _ in self.children]
        for p, kids in enumerate(self.children):
            for r, label in kids:
                parents[r].append((p, label))
        return tuple(tuple(ps) for ps in parents)

    def _topological_order(self) -> Tuple[int, ...]:
        indeg = [len(ps) for ps in self.parents]
        queue = deque(k for k, d in enumerate(indeg) if d == 0)
        order = []
        while queue:
            p = queue.popleft()
            order.append(p)
            for r, _ in self.children[p]:
                indeg[r] -= 1
                if indeg[r] == 0:
                    queue.append(r)
        if len(order) != len(self.children):
            raise InvariantViolation("XpG contains a cycle")
        return tuple(order)

    @property
    def num_nodes(self) -> int:
        return len(self.children)

    @property
    def num_edges(self) -> int:
        return sum(len(kids) for kids in self.children)

    @property
    def is_tree(self) -> bool:
        return all(len(ps) == (0 if k == self.root else 1) for k, ps in enumerate(self.parents))

    def check(self) -> None:
        """Raise InvariantViolation unless XpG properties (i) and (ii) hold."""
        roots = [k for k, ps in enumerate(self.parents) if not ps]
        if roots != [self.root]:
            raise InvariantViolation(f"XpG must have exactly one root, found {[self.node_ids[k] for k in roots]}")
        for p, kids in enumerate(self.children):
            is_terminal = self.var_of[p] is None
            if is_terminal and kids:
                raise InvariantViolation(f"terminal {self.node_ids[p]!r} has children")
            if not is_terminal and not kids:
                raise InvariantViolation(f"non-terminal {self.node_ids[p]!r} has no children")
            if is_terminal and self.terminal_label[p] not in (0, 1):
                raise InvariantViolation(f"terminal {self.node_ids[p]!r} is not labelled 0/1")
            if not is_terminal and not 0 <= self.var_of[p] < self.m:
                raise InvariantViolation(f"node {self.node_ids[p]!r} maps to selector {self.var_of[p]} outside 0..{self.m - 1}")
            if sum(1 for _, label in kids if label == 1) > 1:
                raise InvariantViolation(f"node {self.node_ids[p]!r} has more than one 1-labelled edge")
        p = self.root
        while self.var_of[p] is not None:
            ones = [r for r, label in self.children[p] if label == 1]
            if not ones:
                raise InvariantViolation(f"1-path from the root stops at non-terminal {self.node_ids[p]!r}")
            p = ones[0]
        if self.terminal_label[p] != 1:
            raise InvariantViolation(f"1-path from the root ends at 0-labelled terminal {self.node_ids[p]!r}")

    def __repr__(self):
        return f"XpG(m={self.m}, nodes={self.num_nodes}, edges={self.num_edges}, zero_terminals={len(self.zero_terminals)})"


def build_xpg(dg: DecisionGraph, v: Instance) -> XpG:
    """Specialise `dg` to instance `v`; the predicted class becomes terminal label 1."""
    path = classify_path(dg, v)
    c = dg.nodes[path[-1]].label
    children: List[List[Tuple[int, int]]] = [[] for _ in dg.nodes]
    for p in range(dg.num_nodes):
        node = dg.nodes[p]
        if node.is_terminal:
            continue
        domain = dg.features[node.feature].domain
        for k in dg.out_edges[p]:
            edge = dg.edges[k]
            label = 1 if domain.admits(edge.literal.admit, v[node.feature]) else 0
            children[p].append((edge.target, label))
    var_of = [node.feature for node in dg.nodes]
    terminal_label = [None if node.feature is not None else int(node.label == c) for node in dg.nodes]
    x = XpG(dg.m, dg.root, children, var_of, terminal_label,
            node_ids=[node.id for node in dg.nodes], source_class=c,
            feature_names=[f.name for f in dg.features])
    x.check()
    logging.debug(f"Built {x!r} for class {c!r}")
    return x


def activations(x: XpG, s: SVector) -> List[int]:
    """Activation value of every node (indexed like x.children) under assignment s."""
    if len(s) != x.m:
        raise ValueError(f"assignment has {len(s)} bits, XpG has {x.m} selectors")
    eps = [0] * x.num_nodes
    eps[x.root] = 1
    for p in x.order:
        if not eps[p]:
            continue
        var = x.var_of[p]
        if var is None:
            continue
        free = not s[var]
        for r, label in x.children[p]:
            if label == 1 or free:
                eps[r] = 1
    return eps


def evaluate(x: XpG, s: SVector) -> int:
    """1 iff no 0-labelled terminal is activated, i.e. the prediction cannot change."""
    eps = activations(x, s)
    return 0 if any(eps[q] for q in x.zero_terminals) else 1


def reach_zero(x: XpG, free: FreeSet) -> int:
    """1 iff some 0-labelled terminal is reachable when the features in `free` are unset.

    Single marked traversal, linear in the size of the XpG.
    """
    is_free = [False] * x.m
    for i in free:
        is_free[i] = True
    visited = bytearray(x.num_nodes)
    visited[x.root] = 1
    stack = [x.root]
    while stack:
        p = stack.pop()
        var = x.var_of[p]
        if var is None:
            if x.terminal_label[p] == 0:
                return 1
            continue
        open_all = is_free[var]
        for r, label in x.children[p]:
            if (label == 1 or open_all) and not visited[r]:
                visited[r] = 1
                stack.append(r)
    return 0


def free_to_svector(m: int, free: FreeSet) -> SVector:
    free = set(free)
    return tuple(0 if i in free else 1 for i in range(m))


def svector_to_free(s: SVector) -> frozenset:
    return frozenset(i for i, bit in enumerate(s) if not bit)


def to_dot(x: XpG) -> str:
    """Graphviz rendering: non-terminals show their selector, terminals their 0/1 label."""
    lines = ["digraph xpg {", '  node [fontname="Helvetica"];']
    for p in range(x.num_nodes):
        ident = x.node_ids[p]
        if x.var_of[p] is None:
            lines.append(f'  n{p} [shape=box, label="{ident}: {x.terminal_label[p]}"];')
        else:
            lines.append(f'  n{p} [shape=ellipse, label="{ident}: s{x.var_of[p] + 1}"];')
    for p, kids in enumerate(x.children):
        for r, label in kids:
            style = "solid" if label == 1 else "dashed"
            lines.append(f'  n{p} -> n{r} [label="{label}", style={style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def activation_table(x: XpG, s: SVector) -> Dict[Hashable, int]:
    """Activations keyed by the original node ids (diagnostics)."""
    eps = activations(x, s)
    return {x.node_ids[k]: eps[k] for k in range(x.num_nodes)}
