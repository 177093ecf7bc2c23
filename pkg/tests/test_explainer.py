import pytest

from errors import InvariantViolation, SeedError
from explainer import (Explanation, XpKind, assert_explanation, deletion_sequence, find_axp, find_cxp,
                       is_axp, is_cxp)
from xpg import XpG, build_xpg


class TestFindAxp:
    def test_running_example_tree(self, hardware_xpg):
        xp = find_axp(hardware_xpg)
        assert xp.kind == XpKind.AXP
        assert xp.features == frozenset({0, 3})

    def test_running_example_omdd(self, rgb_xpg):
        assert find_axp(rgb_xpg).features == frozenset({0})

    def test_seed_already_minimal(self, hardware_xpg):
        assert find_axp(hardware_xpg, {0, 3}).features == frozenset({0, 3})

    def test_seed_not_sufficient(self, hardware_xpg):
        with pytest.raises(SeedError, match="not an implicant"):
            find_axp(hardware_xpg, {1, 2})

    def test_seed_out_of_range(self, hardware_xpg):
        with pytest.raises(SeedError):
            find_axp(hardware_xpg, {0, 9})

    @pytest.mark.parametrize("order", ["asc", "desc", [3, 2, 1, 0], [1, 0, 3, 2]])
    def test_every_order_gives_an_axp(self, hardware_xpg, order):
        xp = find_axp(hardware_xpg, order=order)
        assert is_axp(hardware_xpg, xp.features)

    def test_numeric_model(self, income_dg):
        x = build_xpg(income_dg, (60000.0, "no"))
        assert find_axp(x).features == frozenset({0})
        x = build_xpg(income_dg, (30000.0, "yes"))
        assert find_axp(x).features == frozenset({0, 1})


class TestFindCxp:
    def test_running_example_tree(self, hardware_xpg):
        xp = find_cxp(hardware_xpg, {0, 1, 2, 3})
        assert xp.kind == XpKind.CXP
        assert xp.features == frozenset({3})

    def test_descending_order_finds_the_other_one(self, hardware_xpg):
        assert find_cxp(hardware_xpg, order="desc").features == frozenset({0})

    def test_running_example_omdd(self, rgb_xpg):
        assert find_cxp(rgb_xpg, {0, 1, 2}).features == frozenset({0})

    def test_seed_cannot_change(self, hardware_xpg):
        with pytest.raises(SeedError, match="cannot change prediction"):
            find_cxp(hardware_xpg, {1, 2})

    def test_constant_classifier(self):
        x = XpG(2, 0, [[(1, 1), (2, 0)], [], []], [0, None, None], [None, 1, 1])
        with pytest.raises(SeedError):
            find_cxp(x)
        assert find_axp(x).features == frozenset()

    def test_features_no_node_tests_are_dropped(self):
        # node 0 tests x1, node 1 tests x3; x2 appears nowhere
        x = XpG(3, 0, [[(1, 1), (3, 0)], [(2, 1), (3, 0)], [], []], [0, 2, None, None], [None, None, 1, 0])
        assert x.untested == frozenset({1})
        assert find_axp(x).features == frozenset({0, 2})
        assert find_cxp(x).features == frozenset({2})
        assert find_cxp(x, order="desc").features == frozenset({0})


class TestChecks:
    def test_is_axp(self, hardware_xpg):
        assert is_axp(hardware_xpg, {0, 3})
        assert not is_axp(hardware_xpg, {0, 1, 3})
        assert not is_axp(hardware_xpg, {3})

    def test_is_cxp(self, hardware_xpg):
        assert is_cxp(hardware_xpg, {0})
        assert is_cxp(hardware_xpg, {3})
        assert not is_cxp(hardware_xpg, {0, 3})
        assert not is_cxp(hardware_xpg, {2})

    def test_assert_explanation(self, hardware_xpg):
        assert_explanation(hardware_xpg, Explanation(XpKind.AXP, frozenset({0, 3})))
        with pytest.raises(InvariantViolation):
            assert_explanation(hardware_xpg, Explanation(XpKind.CXP, frozenset({0, 3})))


class TestDeletionSequence:
    def test_named_orders(self):
        assert deletion_sequence({2, 0, 1}, "asc") == [0, 1, 2]
        assert deletion_sequence({2, 0, 1}, "desc") == [2, 1, 0]

    def test_permutation_filters_to_seed(self):
        assert deletion_sequence({0, 2}, [2, 1, 0]) == [2, 0]

    def test_bad_orders(self):
        with pytest.raises(ValueError):
            deletion_sequence({0}, "random")
        with pytest.raises(ValueError):
            deletion_sequence({0, 1}, [1, 1, 0])
        with pytest.raises(ValueError):
            deletion_sequence({0, 3}, [0, 1])


def test_elapsed_does_not_affect_equality():
    a = Explanation(XpKind.AXP, frozenset({1}), 0.5)
    b = Explanation(XpKind.AXP, frozenset({1}), 0.0)
    assert a == b
    assert len({a, b}) == 1
