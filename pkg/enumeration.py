"""Enumeration of all AXps and CXps of an XpG.

Explanations alternate through a SAT oracle on the formula H: each model
is either extended into an AXp (blocked with a negative clause) or shrunk
into a CXp (hit with a positive clause). One oracle call per explanation
plus the final unsatisfiable one.
"""
import logging
import time
from typing import Collection, FrozenSet, Iterable, Iterator, List, Optional, Set, Tuple

from errors import InvariantViolation, TreeRequiredError
from explainer import DeletionOrder, Explanation, XpKind, assert_explanation, find_axp, find_cxp
from sat_oracle import Clause, ClauseDB, Polarity
from xpg import XpG, reach_zero


class XpEnumerator:
    """One enumeration session over one XpG; iterate to stream explanations."""

    def __init__(self, x: XpG, order: DeletionOrder = "asc", polarity: Polarity = Polarity.PREFER_1,
                 limit: Optional[int] = None, budget: Optional[float] = None,
                 backend: Optional[str] = None, recheck: bool = False):
        self.x = x
        self.order = order
        self.polarity = polarity
        self.limit = limit
        self.budget = budget
        self.recheck = recheck
        self.db = ClauseDB(x.m, backend=backend)
        self.emitted = 0
        self.complete = False

    @property
    def solve_calls(self) -> int:
        return self.db.solve_calls

    def __iter__(self) -> Iterator[Explanation]:
        x = self.x
        started = time.perf_counter()
        try:
            while True:
                if self.limit is not None and self.emitted >= self.limit:
                    logging.info(f"Enumeration stopped after {self.emitted} explanations (limit)")
                    return
                if self.budget is not None and time.perf_counter() - started >= self.budget:
                    logging.info(f"Enumeration stopped after {self.emitted} explanations (budget {self.budget}s)")
                    return
                tick = time.perf_counter()
                model = self.db.solve(self.polarity)
                if model is None:
                    self.complete = True
                    logging.debug(f"Enumeration complete: {self.emitted} explanations, {self.solve_calls} oracle calls")
                    return
                fixed = [i for i, bit in enumerate(model) if bit]
                free = [i for i, bit in enumerate(model) if not bit]
                if not reach_zero(x, free):
                    xp = find_axp(x, fixed, self.order)
                    self.db.add_clause(Clause.negative(xp.features))
                else:
                    xp = find_cxp(x, free, self.order)
                    self.db.add_clause(Clause.positive(xp.features))
                if self.recheck:
                    assert_explanation(x, xp)
                self.emitted += 1
                elapsed = time.perf_counter() - tick
                logging.debug(f"{xp.kind.value} #{self.emitted}: {sorted(xp.features)} ({elapsed:.6f}s)")
                yield Explanation(xp.kind, xp.features, elapsed)
        finally:
            self.db.close()


def enumerate_xps(x: XpG, **options) -> Iterator[Explanation]:
    """Stream every AXp and CXp of `x` (see XpEnumerator for options)."""
    return iter(XpEnumerator(x, **options))


def enumerate_all(x: XpG, **options) -> Tuple[Set[FrozenSet[int]], Set[FrozenSet[int]]]:
    axps, cxps = set(), set()
    for xp in enumerate_xps(x, **options):
        (axps if xp.kind == XpKind.AXP else cxps).add(xp.features)
    return axps, cxps


def enumerate_tree_cxps(x: XpG) -> Set[Explanation]:
    """All CXps of a tree XpG in polynomial time: one candidate per 0-labelled leaf."""
    if not x.is_tree:
        raise TreeRequiredError("tree XpG required")
    candidates: Set[FrozenSet[int]] = set()
    for leaf in x.zero_terminals:
        blocked = set()
        r = leaf
        while r != x.root:
            (p, label), = x.parents[r]
            if label == 0:
                blocked.add(x.var_of[p])
            r = p
        if not blocked:
            raise InvariantViolation(f"0-labelled leaf {x.node_ids[leaf]!r} is reachable on the instance's own path")
        candidates.add(frozenset(blocked))
    ordered = sorted(candidates, key=len)
    kept: List[FrozenSet[int]] = []
    for cand in ordered:
        if not any(smaller < cand for smaller in kept):
            kept.append(cand)
    return {Explanation(XpKind.CXP, c) for c in kept}


def membership(x: XpG, feature: int, kind: Optional[XpKind] = None, **options) -> bool:
    """Is `feature` in some explanation (of `kind`, or either kind when None)?

    Polynomial on tree XpGs. On general XpGs this falls back to enumeration
    and may take exponential time in the worst case.
    """
    if not 0 <= feature < x.m:
        raise ValueError(f"feature {feature} outside 0..{x.m - 1}")
    if x.is_tree:
        # AXp and CXp memberships coincide by duality
        return any(feature in xp.features for xp in enumerate_tree_cxps(x))
    for xp in enumerate_xps(x, **options):
        if feature in xp.features and (kind is None or xp.kind == kind):
            return True
    return False


def _is_minimal_hitting_set(candidate: FrozenSet[int], family: Collection[FrozenSet[int]]) -> bool:
    if any(not (candidate & member) for member in family):
        return False
    for e in candidate:
        # e must be the only hit of some member, otherwise it is redundant
        if not any(candidate & member == {e} for member in family):
            return False
    return True


def check_duality(axps: Iterable[Collection[int]], cxps: Iterable[Collection[int]]) -> bool:
    """True iff every AXp is a minimal hitting set of the CXps and vice versa."""
    axps = [frozenset(a) for a in axps]
    cxps = [frozenset(c) for c in cxps]
    return (all(_is_minimal_hitting_set(a, cxps) for a in axps)
            and all(_is_minimal_hitting_set(c, axps) for c in cxps))
