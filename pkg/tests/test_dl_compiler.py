from itertools import product

import numpy as np
import pytest

from dl_compiler import (BddManager, DecisionList, Rule, compile_dl, eval_dl, obdd_to_dg,
                         parse_decision_list)
from errors import InvariantViolation, ModelFormatError
from models import classify, dump_model, parse_model, validate
from synthetic import random_decision_list


class TestParse:
    def test_example(self, example_dl):
        assert example_dl.feature_names == ("x1", "x2")
        assert len(example_dl.rules) == 3
        assert example_dl.rules[0] == Rule((1, 2), 1)

    def test_bare_list_infers_features(self):
        dl = parse_decision_list([{"literals": [3], "class": 1}, {"class": 0}])
        assert dl.feature_names == ("x1", "x2", "x3")

    def test_num_features(self):
        dl = parse_decision_list({"num_features": 5, "rules": [{"literals": [], "class": 0}]})
        assert dl.num_features == 5

    @pytest.mark.parametrize("doc, match", [
        ("{not json", "malformed"),
        ({"rules": "x"}, "list of rules"),
        ([{"literals": [1]}], "needs 'literals' and 'class'"),
        ([{"literals": ["a"], "class": 1}, {"class": 0}], "signed integers"),
        ([{"literals": [1], "class": 1}], "default rule"),
        ([{"class": 0}, {"literals": [1], "class": 1}], "default rule"),
        ([{"literals": [1], "class": 2}, {"class": 0}], "class must be 0 or 1"),
        ([{"literals": [1, -1], "class": 1}, {"class": 0}], "contradictory"),
        ({"features": ["a"], "rules": [{"literals": [2], "class": 1}, {"class": 0}]}, "outside"),
    ])
    def test_rejects(self, doc, match):
        with pytest.raises(ModelFormatError, match=match):
            parse_decision_list(doc)


class TestEval:
    @pytest.mark.parametrize("x, expected", [((1, 1), 1), ((0, 1), 0), ((1, 0), 0), ((0, 0), 0)])
    def test_first_firing_rule_decides(self, example_dl, x, expected):
        assert eval_dl(example_dl, x) == expected


class TestCompile:
    def test_example_is_a_conjunction(self, example_dl):
        b = compile_dl(example_dl)
        assert b.size == 2
        assert b.table[2] == (1, 0, 1)
        assert b.table[3] == (0, 0, 2)
        assert b.root == 3
        for x in product((0, 1), repeat=2):
            assert b.evaluate(x) == eval_dl(example_dl, x) == int(x[0] and x[1])

    def test_default_only(self):
        b = compile_dl(parse_decision_list([{"literals": [], "class": 1}]))
        assert b.is_constant
        assert b.root == 1
        assert b.size == 0

    def test_shadowed_rule_contributes_nothing(self):
        dl = parse_decision_list({"features": ["a", "b"], "rules": [
            {"literals": [1], "class": 0},
            {"literals": [1, 2], "class": 1},
            {"literals": [], "class": 0},
        ]})
        assert compile_dl(dl).is_constant

    def test_equivalent_lists_share_a_diagram(self, example_dl):
        direct = parse_decision_list([{"literals": [1, 2], "class": 1}, {"class": 0}])
        negated = parse_decision_list([{"literals": [-1], "class": 0}, {"literals": [-2], "class": 0},
                                       {"class": 1}])
        signature = compile_dl(example_dl).signature()
        assert compile_dl(direct).signature() == signature
        assert compile_dl(negated).signature() == signature

    def test_order_changes_the_diagram_not_the_function(self, example_dl):
        b = compile_dl(example_dl, order=[1, 0])
        assert b.table[b.root][0] == 1
        for x in product((0, 1), repeat=2):
            assert b.evaluate(x) == eval_dl(example_dl, x)

    @pytest.mark.parametrize("order, match", [([0, 0], "repeats"), ([0], "misses")])
    def test_bad_order(self, example_dl, order, match):
        with pytest.raises(ValueError, match=match):
            compile_dl(example_dl, order=order)

    def test_random_lists_agree_exhaustively(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            n = int(rng.integers(1, 13))
            dl = random_decision_list(rng, n=n, num_rules=int(rng.integers(1, 12)), max_literals=4)
            order = [int(i) for i in rng.permutation(n)]
            b = compile_dl(dl, order=order)
            b.check()
            for x in product((0, 1), repeat=n):
                assert b.evaluate(x) == eval_dl(dl, x)

    def test_check_flags_unreduced_tables(self, example_dl):
        b = compile_dl(example_dl)
        broken = type(b)(b.order, b.num_features, b.table + ((0, 2, 2),), 4)
        with pytest.raises(InvariantViolation, match="redundant"):
            broken.check()


class TestManager:
    def test_hash_consing(self):
        mgr = BddManager([0, 1])
        assert mgr.literal(1) == mgr.literal(1)
        assert mgr.neg(mgr.neg(mgr.literal(2))) == mgr.literal(2)

    def test_unknown_operator(self):
        mgr = BddManager([0])
        with pytest.raises(ValueError):
            mgr.apply("xor", mgr.literal(1), mgr.literal(-1))


class TestDecisionGraphExport:
    def test_round_trip_classifies_like_the_list(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            dl = random_decision_list(rng, n=6, num_rules=5)
            dg = obdd_to_dg(compile_dl(dl), dl.feature_names)
            assert validate(dg).ok
            reloaded = parse_model(dump_model(dg))
            for x in product((0, 1), repeat=6):
                assert classify(reloaded, x) == eval_dl(dl, x)

    def test_constant_list_is_a_single_terminal(self):
        dl = DecisionList((Rule((), 0),), ("a",))
        dg = obdd_to_dg(compile_dl(dl), dl.feature_names)
        assert dg.num_nodes == 1
        assert classify(dg, (1,)) == 0
