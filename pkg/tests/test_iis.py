"""Inconsistent-list filtering: the worked five-constraint example, filter
contracts on random lists, reset accounting, and reason reduction."""

import random

import pytest

from casp.core import (
    ArithConstraint,
    AtomTable,
    BinOp,
    Const,
    F,
    GammaMap,
    Relation,
    T,
    VarRef,
)
from casp.csp import SpaceBuilder
from casp.iis import (
    FILTERS,
    FILTER_LETTERS,
    ConsistencyOracle,
    FilterError,
    backward_filtering,
    cc_filtering,
    cc_range_filtering,
    conflict_nogood,
    deletion_filtering,
    forward_filtering,
    range_filtering,
    reason_nogood,
    simple_filtering,
)

from conftest import (
    check_irreducible_inconsistent,
    is_consistent,
    random_inconsistent_list,
    scheduling_conflict_items,
    scheduling_oracle,
)


class TestWorkedExample:
    """items = [eq, john, smith, sum, diff]; the culprit pair is {eq, diff}."""

    def setup_method(self):
        self.items = scheduling_conflict_items()
        self.eq, self.john, self.smith, self.sum, self.diff = self.items

    def run(self, fn):
        oracle = scheduling_oracle()
        return fn(self.items, oracle), oracle

    def test_simple_returns_everything(self):
        out, _ = self.run(simple_filtering)
        assert out == self.items

    def test_deletion_finds_the_pair(self):
        out, oracle = self.run(deletion_filtering)
        assert out == [self.eq, self.diff]
        assert oracle.rebuilds == 5

    def test_forward_finds_the_pair_last_culprit_first(self):
        out, oracle = self.run(forward_filtering)
        assert out == [self.diff, self.eq]
        assert oracle.rebuilds == 1

    def test_backward_scans_reversed(self):
        out, oracle = self.run(backward_filtering)
        assert out == [self.eq, self.diff]
        assert oracle.rebuilds == 1

    def test_range_keeps_whole_reversed_list(self):
        out, _ = self.run(range_filtering)
        assert out == list(reversed(self.items))

    def test_cc_skips_unconnected_constraints(self):
        out, oracle = self.run(cc_filtering)
        assert out == [self.eq, self.diff]
        assert oracle.rebuilds == 2

    def test_cc_range_returns_connected_suffix(self):
        out, _ = self.run(cc_range_filtering)
        assert out == [self.diff, self.sum, self.eq]

    def test_nogood_construction(self):
        table = AtomTable()
        gamma = GammaMap(table)
        lits = [gamma.register(c) for c in self.items]
        out, _ = self.run(cc_filtering)
        ng = conflict_nogood(out, gamma)
        assert ng == frozenset({lits[0], lits[4]})


class TestContracts:
    def test_consistent_input_raises_for_searching_filters(self):
        x = VarRef("x")
        items = [ArithConstraint(x, Relation.GE, Const(1))]
        for fn in (forward_filtering, backward_filtering, range_filtering,
                   cc_filtering, cc_range_filtering):
            oracle = ConsistencyOracle(SpaceBuilder(["x"], (0, 9)))
            with pytest.raises(FilterError):
                fn(items, oracle)

    def test_deletion_passes_consistent_input_through(self):
        x = VarRef("x")
        items = [ArithConstraint(x, Relation.GE, Const(1))]
        oracle = ConsistencyOracle(SpaceBuilder(["x"], (0, 9)))
        assert deletion_filtering(items, oracle) == items

    def test_registry_names_and_letters(self):
        assert set(FILTERS) == {
            "simple", "deletion", "forward", "backward", "range", "cc", "ccrange",
        }
        assert FILTER_LETTERS["ccrange"] == "o"
        assert FILTER_LETTERS["backward"] == "b"

    def test_outputs_are_input_members(self):
        rng = random.Random(11)
        for _ in range(25):
            items = random_inconsistent_list(rng)
            for name, fn in FILTERS.items():
                oracle = ConsistencyOracle(
                    SpaceBuilder(["x", "y", "z"], (0, 4))
                )
                out = fn(items, oracle)
                assert all(any(c is i for i in items) for c in out), name

    def test_irreducible_filters_on_random_lists(self):
        rng = random.Random(23)
        for _ in range(40):
            items = random_inconsistent_list(rng)
            for name in ("deletion", "forward", "backward", "cc"):
                oracle = ConsistencyOracle(
                    SpaceBuilder(["x", "y", "z"], (0, 4))
                )
                out = FILTERS[name](items, oracle)
                assert check_irreducible_inconsistent(out), (
                    f"{name}: {[c.render() for c in items]}"
                )

    def test_approximate_filters_stay_inconsistent(self):
        rng = random.Random(37)
        for _ in range(40):
            items = random_inconsistent_list(rng)
            for name in ("range", "ccrange"):
                oracle = ConsistencyOracle(
                    SpaceBuilder(["x", "y", "z"], (0, 4))
                )
                out = FILTERS[name](items, oracle)
                assert not is_consistent(out), name


class TestBaseGroupClosure:
    """Constraints linked only through an ambient base constraint must count
    as connected during the variable scan."""

    def test_cc_crosses_base_links(self):
        x, y = VarRef("x"), VarRef("y")
        link = ArithConstraint(BinOp("+", x, y), Relation.EQ, Const(5))
        builder = SpaceBuilder(["x", "y"], (0, 9), base=[link])
        # x==1 forces y==4 through the base link; y==2 contradicts that.
        items = [
            ArithConstraint(x, Relation.EQ, Const(1)),
            ArithConstraint(y, Relation.EQ, Const(2)),
        ]
        oracle = ConsistencyOracle(builder)
        out = cc_filtering(items, oracle)
        assert set(map(id, out)) == set(map(id, items))

    def test_cc_range_crosses_base_links(self):
        x, y, z = VarRef("x"), VarRef("y"), VarRef("z")
        link = ArithConstraint(x, Relation.EQ, y)
        builder = SpaceBuilder(["x", "y", "z"], (0, 9), base=[link])
        items = [
            ArithConstraint(x, Relation.GE, Const(5)),
            ArithConstraint(z, Relation.EQ, Const(0)),  # unrelated
            ArithConstraint(y, Relation.LE, Const(2)),
        ]
        oracle = ConsistencyOracle(builder)
        out = cc_range_filtering(items, oracle)
        assert items[1] not in out
        assert items[0] in out and items[2] in out

    def test_behaviour_matches_without_base(self):
        # with an empty base the closure is the identity: same results as
        # a plain variable scan on the worked example
        items = scheduling_conflict_items()
        oracle = scheduling_oracle()
        assert oracle.builder.base == []
        out = cc_filtering(items, oracle)
        assert out == [items[0], items[4]]


class TestReasonReduction:
    """Posted [john==0, diff] propagates F(eq); the reduced reason keeps
    only diff plus the complement of the propagated literal."""

    def setup_method(self):
        lea, adam, john = (
            VarRef("work(lea)"),
            VarRef("work(adam)"),
            VarRef("work(john)"),
        )
        self.john0 = ArithConstraint(john, Relation.EQ, Const(0))
        self.diff = ArithConstraint(BinOp("-", lea, adam), Relation.EQ, Const(1))
        self.eq = ArithConstraint(lea, Relation.EQ, adam)
        table = AtomTable()
        self.gamma = GammaMap(table)
        self.l_john = self.gamma.register(self.john0)
        self.l_diff = self.gamma.register(self.diff)
        self.l_eq = self.gamma.register(self.eq)

    def oracle(self):
        names = ["work(lea)", "work(adam)", "work(john)"]
        return ConsistencyOracle(SpaceBuilder(names, (0, 10)))

    def test_two_literal_reason_for_each_irreducible_filter(self):
        prefix = [self.john0, self.diff]
        propagated = self.l_eq.neg()
        expected = frozenset({self.l_diff, self.l_eq})
        for fn in (deletion_filtering, forward_filtering,
                   backward_filtering, cc_filtering):
            got = reason_nogood(prefix, propagated, self.gamma, self.oracle(), fn)
            assert got == expected, fn.__name__

    def test_simple_reason_keeps_whole_prefix(self):
        prefix = [self.john0, self.diff]
        got = reason_nogood(
            prefix, self.l_eq.neg(), self.gamma, self.oracle(), simple_filtering
        )
        assert got == frozenset({self.l_john, self.l_diff, self.l_eq})

    def test_complement_of_propagated_literal_always_survives(self):
        x = VarRef("x")
        table = AtomTable()
        gamma = GammaMap(table)
        prefix = [ArithConstraint(x, Relation.LE, Const(2))]
        gamma.register(prefix[0])
        lit = gamma.register(ArithConstraint(x, Relation.LT, Const(4)))
        oracle = ConsistencyOracle(SpaceBuilder(["x"], (0, 9)))
        got = reason_nogood(prefix, lit, gamma, oracle, forward_filtering)
        assert lit.neg() in got
