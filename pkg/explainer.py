"""Deletion-based extraction of one AXp or one CXp from a seed.

Both procedures rely on the evaluation function of an XpG being monotone,
so one pass over the seed suffices and costs O(m * |XpG|).
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Collection, FrozenSet, Iterable, List, Optional, Sequence, Union

from errors import InvariantViolation, SeedError
from xpg import XpG, reach_zero

DeletionOrder = Union[str, Sequence[int]]


class XpKind(str, Enum):
    AXP = "AXp"
    CXP = "CXp"


@dataclass(frozen=True)
class Explanation:
    kind: XpKind
    features: FrozenSet[int]
    elapsed: float = field(default=0.0, compare=False)

    def sorted_features(self) -> List[int]:
        return sorted(self.features)

    def sort_key(self):
        return (self.kind.value, len(self.features), self.sorted_features())


def deletion_sequence(seed: Collection[int], order: DeletionOrder = "asc") -> List[int]:
    """Seed members in the order they are tried for deletion."""
    if isinstance(order, str):
        if order == "asc":
            return sorted(seed)
        if order == "desc":
            return sorted(seed, reverse=True)
        raise ValueError(f"unknown deletion order {order!r}")
    order = list(order)
    if len(set(order)) != len(order):
        raise ValueError("deletion order repeats a feature")
    missing = set(seed) - set(order)
    if missing:
        raise ValueError(f"deletion order does not mention seed features {sorted(missing)}")
    members = set(seed)
    return [i for i in order if i in members]


def _check_seed(x: XpG, seed: Iterable[int]) -> FrozenSet[int]:
    seed = frozenset(seed)
    bad = [i for i in seed if not 0 <= i < x.m]
    if bad:
        raise SeedError(f"seed mentions features outside 0..{x.m - 1}: {sorted(bad)}")
    return seed


def find_axp(x: XpG, seed: Optional[Iterable[int]] = None, order: DeletionOrder = "asc") -> Explanation:
    """Shrink a sufficient set of fixed features to a subset-minimal one."""
    fixed = set(_check_seed(x, range(x.m) if seed is None else seed))
    free = set(range(x.m)) - fixed
    if reach_zero(x, free):
        raise SeedError("seed is not an implicant")
    for i in deletion_sequence(fixed, order):
        free.add(i)
        if i in x.untested:
            fixed.discard(i)
        elif reach_zero(x, free):
            free.discard(i)
        else:
            fixed.discard(i)
    return Explanation(XpKind.AXP, frozenset(fixed))


def find_cxp(x: XpG, seed: Optional[Iterable[int]] = None, order: DeletionOrder = "asc") -> Explanation:
    """Shrink a set of free features that can change the prediction to a subset-minimal one."""
    free = set(_check_seed(x, range(x.m) if seed is None else seed))
    if not reach_zero(x, free):
        raise SeedError("seed cannot change prediction")
    for j in deletion_sequence(free, order):
        free.discard(j)
        if j not in x.untested and not reach_zero(x, free):
            free.add(j)
    return Explanation(XpKind.CXP, frozenset(free))


def is_axp(x: XpG, features: Collection[int]) -> bool:
    fixed = set(features)
    free = set(range(x.m)) - fixed
    if reach_zero(x, free):
        return False
    return all(reach_zero(x, free | {i}) for i in fixed)


def is_cxp(x: XpG, features: Collection[int]) -> bool:
    free = set(features)
    if not reach_zero(x, free):
        return False
    return all(not reach_zero(x, free - {j}) for j in free)


def assert_explanation(x: XpG, xp: Explanation) -> None:
    """Re-check an extracted explanation; a failure means a bug, not bad input."""
    ok = is_axp(x, xp.features) if xp.kind == XpKind.AXP else is_cxp(x, xp.features)
    if not ok:
        logging.error(f"Extracted {xp.kind.value} {sorted(xp.features)} failed its re-check")
        raise InvariantViolation(f"{xp.kind.value} {sorted(xp.features)} is not subset-minimal")
