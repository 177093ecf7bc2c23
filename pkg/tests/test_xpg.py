from itertools import product

import pytest

from errors import InvariantViolation
from xpg import (XpG, activation_table, activations, build_xpg, evaluate, free_to_svector, reach_zero,
                 svector_to_free, to_dot)


def hardware_equations(s):
    """Activation equations of the running-example tree's XpG, written out by hand.

    s is 0-based: s[0] Age, s[1] Income, s[2] Student, s[3] CreditRating.
    """
    s1, s2, s3, s4 = (bool(b) for b in s)
    e = {1: True}
    e[2] = e[1] and not s3
    e[3] = e[1]
    e[4] = e[2]
    e[5] = e[2] and not s1
    e[6] = e[3] and not s4
    e[7] = e[3]
    e[8] = e[5] and not s2
    e[9] = e[5]
    e[10] = e[7]
    e[11] = e[7] and not s1
    e[12] = e[8] and not s1
    e[13] = e[8] and not s1
    e[14] = e[11] and not s2
    e[15] = e[11]
    return {k: int(v) for k, v in e.items()}


class TestBuild:
    def test_edge_and_terminal_labels(self, hardware_xpg):
        x = hardware_xpg
        ids = x.node_ids
        labelled = {(ids[p], ids[r]): label for p, kids in enumerate(x.children) for r, label in kids}
        assert labelled[(1, 3)] == 1
        assert labelled[(1, 2)] == 0
        assert labelled[(7, 10)] == 1
        assert labelled[(11, 15)] == 1
        zero = {ids[q] for q in x.zero_terminals}
        assert zero == {6, 9, 12, 13, 15}
        assert x.source_class == "T"
        assert x.is_tree

    def test_omdd(self, rgb_xpg):
        assert rgb_xpg.source_class == "R"
        assert {rgb_xpg.node_ids[q] for q in rgb_xpg.zero_terminals} == {7, 8}
        assert not rgb_xpg.is_tree

    def test_numeric_edges_follow_intervals(self, income_dg):
        x = build_xpg(income_dg, (30000.0, "yes"))
        ids = x.node_ids
        ones = {(ids[p], ids[r]) for p, kids in enumerate(x.children) for r, label in kids if label}
        assert ones == {("a", "b"), ("b", "grant")}


class TestEvaluation:
    def test_activations_match_hand_equations(self, hardware_xpg):
        for s in product((0, 1), repeat=4):
            assert activation_table(hardware_xpg, s) == hardware_equations(s)

    @pytest.mark.parametrize("s, expected", [
        ((1, 1, 1, 1), 1),
        ((0, 0, 0, 0), 0),
        ((1, 0, 0, 1), 1),
        ((1, 1, 1, 0), 0),
    ])
    def test_evaluate(self, hardware_xpg, s, expected):
        assert evaluate(hardware_xpg, s) == expected

    @pytest.mark.parametrize("free, expected", [
        (set(), 0),
        ({3}, 1),
        ({1, 2}, 0),
        ({0}, 1),
    ])
    def test_reach_zero(self, hardware_xpg, free, expected):
        assert reach_zero(hardware_xpg, free) == expected

    def test_complement_law_exhaustive(self, hardware_xpg, rgb_xpg):
        for x in (hardware_xpg, rgb_xpg):
            for s in product((0, 1), repeat=x.m):
                assert reach_zero(x, svector_to_free(s)) == 1 - evaluate(x, s)

    def test_extremes(self, rgb_xpg):
        assert evaluate(rgb_xpg, (1, 1, 1)) == 1
        assert evaluate(rgb_xpg, (0, 0, 0)) == 0

    def test_assignment_length(self, rgb_xpg):
        with pytest.raises(ValueError):
            activations(rgb_xpg, (1, 1))

    def test_svector_conversion(self):
        assert free_to_svector(4, {1, 3}) == (1, 0, 1, 0)
        assert svector_to_free((1, 0, 1, 0)) == frozenset({1, 3})


class TestCheck:
    def test_two_one_edges(self):
        x = XpG(1, 0, [[(1, 1), (2, 1)], [], []], [0, None, None], [None, 1, 0])
        with pytest.raises(InvariantViolation, match="more than one"):
            x.check()

    def test_one_path_ends_at_zero(self):
        x = XpG(1, 0, [[(1, 0), (2, 1)], [], []], [0, None, None], [None, 1, 0])
        with pytest.raises(InvariantViolation, match="0-labelled terminal"):
            x.check()

    def test_second_root(self):
        x = XpG(1, 0, [[(1, 1)], [], []], [0, None, None], [None, 1, 0])
        with pytest.raises(InvariantViolation, match="exactly one root"):
            x.check()

    def test_cycle(self):
        with pytest.raises(InvariantViolation, match="cycle"):
            XpG(1, 0, [[(1, 1)], [(0, 1)]], [0, 0], [None, None])

    def test_hand_built_ok(self):
        x = XpG(1, 0, [[(1, 1), (2, 0)], [], []], [0, None, None], [None, 1, 0])
        x.check()
        assert reach_zero(x, {0}) == 1
        assert reach_zero(x, set()) == 0


def test_dot_dump(rgb_xpg):
    dot = to_dot(rgb_xpg)
    assert dot.startswith("digraph xpg {")
    assert dot.count("->") == rgb_xpg.num_edges
    assert "style=dashed" in dot
