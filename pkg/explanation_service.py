import logging
import math
import time
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Union

from bench import prepare_dataset, run_bench
from brute_force import brute_force_axps, brute_force_cxps
from dl_compiler import compile_dl, obdd_to_dg, parse_decision_list
from enumeration import XpEnumerator, enumerate_tree_cxps, membership
from errors import DomainError, InvariantViolation, ModelFormatError, ModelIOError
from explainer import DeletionOrder, Explanation, XpKind, find_axp, find_cxp
from models import (DecisionGraph, Instance, classify_path, coerce_instance, dump_model, load_model,
                    parse_instance_text, parse_model, validate)
from sat_oracle import Polarity
from xpg import build_xpg

ModelSource = Union[str, Path, Mapping, DecisionGraph]

EXPLAIN_MODES = ("axp", "cxp", "enumerate", "cxps-tree")


def format_value(value: Any) -> str:
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if value.is_integer():
            return str(int(value))
        return f"{value:g}"
    return str(value)


def parse_order(order: Union[None, str, Sequence[int]], dg: DecisionGraph) -> DeletionOrder:
    """'asc', 'desc', 'perm:3,1,2' or a list of 1-based indices / names -> library order."""
    if order is None:
        return "asc"
    if isinstance(order, str):
        text = order.strip()
        if text in ("asc", "desc"):
            return text
        if not text.startswith("perm:"):
            raise DomainError(f"unknown deletion order {order!r}; use asc, desc or perm:<list>")
        order = [tok.strip() for tok in text[len("perm:"):].split(",") if tok.strip()]
    resolved = [dg.feature_index(ref) for ref in order]
    if len(set(resolved)) != len(resolved):
        raise DomainError("deletion order repeats a feature")
    if len(resolved) != dg.m:
        raise DomainError(f"deletion order must list all {dg.m} features")
    return resolved


class ExplanationService:
    """Facade shared by the command line and the HTTP app.

    Feature references coming in are 1-based indices or names; feature
    lists going out are 1-based.
    """

    def load_model(self, source: ModelSource) -> DecisionGraph:
        if isinstance(source, DecisionGraph):
            return source
        if isinstance(source, Mapping):
            return parse_model(source)
        return load_model(source)

    def resolve_instance(self, dg: DecisionGraph, instance: Any) -> Instance:
        """Inline text ('O,L,Y,P'), a list of values or an object keyed by feature name."""
        if isinstance(instance, str):
            return parse_instance_text(dg, instance)
        if isinstance(instance, Mapping):
            names = [f.name for f in dg.features]
            missing = [name for name in names if name not in instance]
            if missing:
                raise DomainError(f"instance lacks features {missing}")
            return coerce_instance(dg, [instance[name] for name in names])
        if isinstance(instance, (list, tuple)):
            return coerce_instance(dg, instance)
        raise DomainError(f"cannot read an instance from {type(instance).__name__}")

    def _features(self, dg: DecisionGraph, refs: Optional[Sequence[Any]]) -> Optional[List[int]]:
        if refs is None:
            return None
        if isinstance(refs, str):
            refs = [tok.strip() for tok in refs.split(",") if tok.strip()]
        return [dg.feature_index(ref) for ref in refs]

    def record(self, dg: DecisionGraph, v: Instance, xp: Explanation) -> Dict[str, Any]:
        features = xp.sorted_features()
        names = [dg.features[i].name for i in features]
        return {
            "kind": xp.kind.value,
            "features": [i + 1 for i in features],
            "names": names,
            "literals": " ∧ ".join(f"{name}={format_value(v[i])}" for name, i in zip(names, features)),
            "elapsed": round(xp.elapsed, 6),
        }

    def validate(self, source: ModelSource) -> Dict[str, Any]:
        dg = self.load_model(source)
        report = validate(dg)
        result = report.as_dict()
        result.update({"features": dg.m, "nodes": dg.num_nodes, "tree": dg.is_tree})
        return result

    def load_valid_model(self, source: ModelSource) -> DecisionGraph:
        """The parsed model, or DomainError listing why `validate` rejects it."""
        dg = self.load_model(source)
        report = validate(dg)
        if not report.ok:
            raise DomainError("invalid model: " + "; ".join(report.errors))
        return dg

    def classify(self, source: ModelSource, instance: Any) -> Dict[str, Any]:
        dg = self.load_valid_model(source)
        v = self.resolve_instance(dg, instance)
        path = classify_path(dg, v)
        return {"prediction": dg.nodes[path[-1]].label, "path": [dg.nodes[p].id for p in path]}

    def explain(self, source: ModelSource, instance: Any, mode: str = "enumerate",
                seed_axp: Optional[Sequence[Any]] = None, seed_cxp: Optional[Sequence[Any]] = None,
                order: Union[None, str, Sequence[Any]] = None, limit: Optional[int] = None,
                budget: Optional[float] = None, verify: bool = False, dimacs: bool = False,
                polarity: Polarity = Polarity.PREFER_1) -> Dict[str, Any]:
        if mode not in EXPLAIN_MODES:
            raise DomainError(f"unknown mode {mode!r}; expected one of {', '.join(EXPLAIN_MODES)}")
        dg = self.load_valid_model(source)
        v = self.resolve_instance(dg, instance)
        x = build_xpg(dg, v)
        deletion_order = parse_order(order, dg)
        result: Dict[str, Any] = {"prediction": x.source_class, "mode": mode}

        if mode == "axp":
            started = time.perf_counter()
            xp = find_axp(x, self._features(dg, seed_axp), deletion_order)
            xps = [Explanation(xp.kind, xp.features, time.perf_counter() - started)]
        elif mode == "cxp":
            started = time.perf_counter()
            xp = find_cxp(x, self._features(dg, seed_cxp), deletion_order)
            xps = [Explanation(xp.kind, xp.features, time.perf_counter() - started)]
        elif mode == "cxps-tree":
            started = time.perf_counter()
            found = sorted(enumerate_tree_cxps(x), key=lambda e: e.sort_key())
            elapsed = (time.perf_counter() - started) / max(len(found), 1)
            xps = [Explanation(e.kind, e.features, elapsed) for e in found]
        else:
            enumerator = XpEnumerator(x, order=deletion_order, polarity=polarity, limit=limit, budget=budget)
            xps = list(enumerator)
            result["solve_calls"] = enumerator.solve_calls
            result["complete"] = enumerator.complete
            if dimacs:
                result["dimacs"] = enumerator.db.to_dimacs()

        if limit is not None and mode != "enumerate":
            xps = xps[:limit]
        result["records"] = [self.record(dg, v, xp) for xp in xps]
        if verify:
            complete_kinds = set()
            if result.get("complete"):
                complete_kinds = {XpKind.AXP, XpKind.CXP}
            elif mode == "cxps-tree" and limit is None:
                complete_kinds = {XpKind.CXP}
            self._verify(dg, v, xps, complete_kinds)
            result["verified"] = True
        return result

    def _verify(self, dg: DecisionGraph, v: Instance, xps: Sequence[Explanation], complete_kinds: set) -> None:
        expected = {XpKind.AXP: brute_force_axps(dg, v), XpKind.CXP: brute_force_cxps(dg, v)}
        for kind, truth in expected.items():
            got = {xp.features for xp in xps if xp.kind == kind}
            bad = got - truth
            if bad:
                raise InvariantViolation(
                    f"brute force rejects {kind.value}s {[sorted(i + 1 for i in s) for s in bad]}")
            if kind in complete_kinds and got != truth:
                missed = [sorted(i + 1 for i in s) for s in truth - got]
                raise InvariantViolation(f"enumeration missed {kind.value}s {missed}")
        logging.info(f"Verified {len(xps)} explanations against brute force")

    def membership(self, source: ModelSource, instance: Any, feature: Any) -> Dict[str, Any]:
        dg = self.load_valid_model(source)
        v = self.resolve_instance(dg, instance)
        i = dg.feature_index(feature)
        x = build_xpg(dg, v)
        # a feature is in some AXp iff it is in some CXp
        member = membership(x, i)
        return {"feature": i + 1, "name": dg.features[i].name, "in_axp": member, "in_cxp": member}

    def compile_dl(self, source: Union[str, Path, Mapping, list],
                   order: Optional[Sequence[Any]] = None) -> Dict[str, Any]:
        """Model document of the OBDD compiled from a decision list."""
        if isinstance(source, (str, Path)) and not str(source).lstrip().startswith(("{", "[")):
            try:
                source = Path(source).read_text(encoding="utf-8")
            except OSError as e:
                raise ModelIOError(f"cannot read decision list {source}: {e}")
            except UnicodeDecodeError as e:
                raise ModelFormatError(f"decision list {source} is not UTF-8 text: {e}")
        dl = parse_decision_list(source)
        var_order = None
        if order is not None:
            if isinstance(order, str):
                order = [tok.strip() for tok in order.split(",") if tok.strip()]
            var_order = []
            for ref in order:
                if isinstance(ref, str) and ref in dl.feature_names:
                    var_order.append(dl.feature_names.index(ref))
                else:
                    try:
                        k = int(ref)
                    except ValueError:
                        raise DomainError(f"unknown feature {ref!r} in variable order")
                    if not 1 <= k <= dl.num_features:
                        raise DomainError(f"feature index {k} outside 1..{dl.num_features}")
                    var_order.append(k - 1)
        try:
            obdd = compile_dl(dl, var_order)
        except ValueError as e:
            raise DomainError(str(e))
        return dump_model(obdd_to_dg(obdd, dl.feature_names))

    def bench(self, source: ModelSource, dataset: Union[str, Path], label_column: Optional[str] = None,
              workers: Optional[int] = None, name: Optional[str] = None, **options) -> Dict[str, Any]:
        dg = self.load_valid_model(source)
        instances, labels = prepare_dataset(dg, dataset, label_column=label_column)
        if name is None:
            name = Path(source).stem if isinstance(source, (str, Path)) else "model"
        return run_bench(dg, instances, labels, name=name, workers=workers, **options)


# Global service instance
xpg_service = ExplanationService()
