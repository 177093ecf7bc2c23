"""Brute-force AXp/CXp oracle straight from the definitions.

Works on the DecisionGraph, not the XpG, so it independently confirms the
explanation-graph algorithms on desk-scale models. Numeric features are
swept over their representative points.
"""
import logging
from itertools import combinations, product
from math import prod
from typing import Collection, FrozenSet, List, Optional, Set

from errors import BruteForceLimitError
from models import DecisionGraph, Instance, classify, representative_points
from xpg_config import get_config


def _axes(dg: DecisionGraph, v: Instance, free: Collection[int], cap: Optional[int]) -> List[list]:
    cap = cap if cap is not None else get_config().brute_force_cap
    reps = representative_points(dg)
    axes = []
    for i in range(dg.m):
        if i in free:
            values = list(reps[i])
            if v[i] not in values:
                values.append(v[i])
            axes.append(values)
        else:
            axes.append([v[i]])
    size = prod(len(a) for a in axes)
    if size > cap:
        raise BruteForceLimitError(f"instance too large for brute force ({size} points > cap {cap})")
    return axes


def is_sufficient(dg: DecisionGraph, v: Instance, features: Collection[int], cap: Optional[int] = None) -> bool:
    """Does fixing `features` to their values in v entail the prediction?"""
    fixed = set(features)
    c = classify(dg, v)
    axes = _axes(dg, v, set(range(dg.m)) - fixed, cap)
    return all(classify(dg, point) == c for point in product(*axes))


def can_change(dg: DecisionGraph, v: Instance, features: Collection[int], cap: Optional[int] = None) -> bool:
    """Can freeing `features` (all others fixed to v) change the prediction?"""
    c = classify(dg, v)
    axes = _axes(dg, v, set(features), cap)
    return any(classify(dg, point) != c for point in product(*axes))


def counterexample_masks(dg: DecisionGraph, v: Instance, cap: Optional[int] = None) -> List[int]:
    """Subset-minimal disagreement masks of the points classified differently from v.

    Bit i of a mask is set when the point differs from v on feature i.
    """
    c = classify(dg, v)
    axes = _axes(dg, v, set(range(dg.m)), cap)
    masks: Set[int] = set()
    for point in product(*axes):
        if classify(dg, point) != c:
            masks.add(sum(1 << i for i in range(dg.m) if point[i] != v[i]))
    minimal = []
    for mask in sorted(masks, key=lambda b: bin(b).count("1")):
        if not any(small & mask == small for small in minimal):
            minimal.append(mask)
    return minimal


def _check_width(dg: DecisionGraph, max_features: Optional[int]) -> None:
    limit = max_features if max_features is not None else get_config().brute_force_max_features
    if dg.m > limit:
        raise BruteForceLimitError(f"instance too large for brute force ({dg.m} features > cap {limit})")


def _sweep(m: int, accept) -> Set[FrozenSet[int]]:
    # increasing cardinality; supersets of accepted sets cannot be minimal
    found: List[int] = []
    for k in range(m + 1):
        for combo in combinations(range(m), k):
            bits = sum(1 << i for i in combo)
            if any(f & bits == f for f in found):
                continue
            if accept(bits):
                found.append(bits)
    return {frozenset(i for i in range(m) if bits >> i & 1) for bits in found}


def brute_force_axps(dg: DecisionGraph, v: Instance, cap: Optional[int] = None,
                     max_features: Optional[int] = None) -> Set[FrozenSet[int]]:
    _check_width(dg, max_features)
    masks = counterexample_masks(dg, v, cap)
    # sufficient iff every counterexample disagrees with v on some fixed feature
    axps = _sweep(dg.m, lambda bits: all(mask & bits for mask in masks))
    logging.debug(f"Brute force: {len(axps)} AXps over {len(masks)} counterexample masks")
    return axps


def brute_force_cxps(dg: DecisionGraph, v: Instance, cap: Optional[int] = None,
                     max_features: Optional[int] = None) -> Set[FrozenSet[int]]:
    _check_width(dg, max_features)
    masks = counterexample_masks(dg, v, cap)
    cxps = _sweep(dg.m, lambda bits: any(mask & bits == mask for mask in masks))
    logging.debug(f"Brute force: {len(cxps)} CXps over {len(masks)} counterexample masks")
    return cxps
