"""The theory propagator: mirroring, entailment propagation, filtered
conflicts and reasons, root absorption, and the suffix-chain fast path."""

import random

import pytest

from casp.bridge import TheoryConfig, TheoryPropagator, _SuffixChain, initial_lookahead
from casp.core import ArithConstraint, AtomTable, Const, GammaMap, Lit, Relation, VarRef
from casp.csp import SpaceBuilder
from casp.driver import SolverConfig, solve_text
from casp.grounder import ground_text
from casp.iis import ConsistencyOracle, FILTERS, cc_range_filtering, reason_nogood
from casp.semantics import oracle_model_set
from casp.translate import translate

from conftest import random_constraint, small_builder

ALL_FILTERS = tuple(FILTERS)


def pairs(text, **kw):
    result = solve_text(text, SolverConfig(max_models=0, **kw))
    return {
        (frozenset(m.atoms), frozenset(m.constraint_atoms))
        for m in result.models
    }


def run(text, **kw):
    return solve_text(text, SolverConfig(max_models=0, **kw))


CONFLICT_HEAVY = """\
$domain(0..4).
{a}. {b}. {c}.
x $< 2 :- a.
x $> 2 :- b.
x $== 2 :- c.
y $+ x $== 4 :- a, c.
:- a, not b, not c, not x $== 0.
"""

CATOM_FACTS = """\
$domain(0..5).
x $>= 2.
{a}. {b}.
x $<= 3 :- a.
x $>= 4 :- b.
:- a, b.
"""


class TestTheoryPropagation:
    def test_entailed_literals_are_set_by_the_theory(self):
        text = "$domain(0..10).\n{a}.\nx $> 7 :- a.\n{b}.\nb :- x $> 5.\n"
        result = run(text)
        assert result.stats.theory_propagations >= 1
        assert pairs(text) == oracle_model_set(ground_text(text))

    def test_total_check_catches_conflicts_when_delayed(self):
        result = run(CONFLICT_HEAVY, delay=0)
        assert result.stats.theory_conflicts >= 1
        assert pairs(CONFLICT_HEAVY, delay=0) == oracle_model_set(
            ground_text(CONFLICT_HEAVY)
        )

    def test_delay_values_do_not_change_the_answer_sets(self):
        expected = oracle_model_set(ground_text(CONFLICT_HEAVY))
        for delay in (0, 1, 2, 10):
            assert pairs(CONFLICT_HEAVY, delay=delay) == expected, delay

    def test_snapshotting_is_transparent(self):
        expected = pairs(CONFLICT_HEAVY, snapshot=True)
        assert pairs(CONFLICT_HEAVY, snapshot=False) == expected

    def test_probe_entailment_decides_hull_blind_cases(self):
        text = (
            "$domain(0..2).\nx $!= 1. y $!= 1.\n{a}.\na :- x $+ y $== 1.\n"
        )
        expected = oracle_model_set(ground_text(text))
        probing = run(text, probe_entail=True)
        assert pairs(text, probe_entail=True) == expected
        assert pairs(text, probe_entail=False) == expected
        assert probing.stats.theory_propagations >= 1


class TestFilterChoicesAgree:
    def test_reason_filters_preserve_models(self):
        expected = oracle_model_set(ground_text(CONFLICT_HEAVY))
        for name in ALL_FILTERS:
            assert pairs(CONFLICT_HEAVY, reason_filter=name) == expected, name

    def test_conflict_filters_preserve_models(self):
        expected = oracle_model_set(ground_text(CONFLICT_HEAVY))
        for name in ALL_FILTERS:
            assert pairs(CONFLICT_HEAVY, conflict_filter=name) == expected, name

    def test_filter_statistics_recorded(self):
        result = run(
            CONFLICT_HEAVY, conflict_filter="backward", reason_filter="ccrange"
        )
        stats = result.stats
        assert stats.conflict_filter_calls == stats.theory_conflicts
        assert stats.oracle_checks >= 0
        assert stats.filter_time >= 0.0


class TestRootAbsorption:
    def test_root_level_catoms_move_into_the_base(self):
        compiled = translate(ground_text(CATOM_FACTS))
        cfg = TheoryConfig(reason_filter="ccrange", conflict_filter="backward")
        bridge = TheoryPropagator(compiled, cfg)
        base_before = len(bridge.builder.base)
        from casp.driver import Solver

        solver = Solver(CATOM_FACTS, SolverConfig(
            max_models=0, reason_filter="ccrange", conflict_filter="backward"
        ))
        solver.run()
        assert len(solver.bridge.builder.base) > len(
            solver.program.global_constraints
        )
        assert base_before == len(compiled.program.global_constraints)

    def test_models_unchanged_by_absorption(self):
        expected = oracle_model_set(ground_text(CATOM_FACTS))
        for reason in ("simple", "ccrange", "backward"):
            got = pairs(
                CATOM_FACTS, reason_filter=reason, conflict_filter="backward"
            )
            assert got == expected, reason

    def test_no_absorption_without_decisions(self):
        text = "$domain(0..5).\nx $>= 2.\nx $<= 3.\n"
        from casp.driver import Solver

        solver = Solver(text, SolverConfig(max_models=0))
        solver.run()
        assert len(solver.bridge.builder.base) == len(
            solver.program.global_constraints
        )


class TestSuffixChain:
    def grow_consistent_prefix(self, rng, builder):
        space = builder.fresh()
        prefix = []
        for _ in range(rng.randint(1, 6)):
            c = random_constraint(rng)
            if space.copy().post(c):
                space.post(c)
                prefix.append(c)
        return space, prefix

    def test_matches_the_direct_scan(self):
        rng = random.Random(77)
        compared = 0
        for _ in range(2000):
            builder = small_builder()
            space, prefix = self.grow_consistent_prefix(rng, builder)
            if not prefix:
                continue
            cand = random_constraint(rng)
            val = space.entail(cand)
            if val is None:
                continue
            gamma = GammaMap(AtomTable())
            lits = [gamma.register(c) for c in prefix]
            clit = gamma.register(cand)
            lit = clit if val else clit.neg()
            chain = _SuffixChain(builder, prefix, lits)
            fast = chain.reason(gamma.gamma(lit.neg()), lit)
            if fast is None:
                continue
            direct = reason_nogood(
                prefix, lit, gamma, ConsistencyOracle(builder), cc_range_filtering
            )
            assert fast == direct
            compared += 1
        assert compared >= 40

    def test_bails_out_when_closure_misses_prefix_variables(self):
        x, z = VarRef("x"), VarRef("z")
        builder = small_builder()
        prefix = [
            ArithConstraint(z, Relation.EQ, Const(0)),
            ArithConstraint(x, Relation.LE, Const(2)),
        ]
        gamma = GammaMap(AtomTable())
        lits = [gamma.register(c) for c in prefix]
        lit = gamma.register(ArithConstraint(x, Relation.LE, Const(3)))
        chain = _SuffixChain(builder, prefix, lits)
        assert chain.reason(gamma.gamma(lit.neg()), lit) is None


class TestInitialLookahead:
    def test_emitted_nogoods_do_not_change_the_models(self):
        for text in (
            CONFLICT_HEAVY,
            "$domain(0..3).\n{a}. {b}.\nx $< 1 :- a.\nx $> 2 :- b.\n",
        ):
            assert pairs(text, lookahead=True) == pairs(text, lookahead=False)

    def test_probing_finds_binary_implications(self):
        text = "$domain(0..3).\n{a}. {b}.\nx $< 1 :- a.\nx $> 2 :- b.\n"
        compiled = translate(ground_text(text))
        nogoods = initial_lookahead(compiled)
        lt = compiled.gamma.gamma_inverse(
            ArithConstraint(VarRef("x"), Relation.LT, Const(1))
        )
        gt = compiled.gamma.gamma_inverse(
            ArithConstraint(VarRef("x"), Relation.GT, Const(2))
        )
        assert frozenset({lt, gt}) in {frozenset(ng) for ng in nogoods}

    def test_root_inconsistent_catom_yields_unary_nogood(self):
        text = "$domain(0..3).\n{a}.\na :- x $> 9.\n"
        compiled = translate(ground_text(text))
        nogoods = initial_lookahead(compiled)
        impossible = compiled.gamma.gamma_inverse(
            ArithConstraint(VarRef("x"), Relation.GT, Const(9))
        )
        assert frozenset({impossible}) in {frozenset(ng) for ng in nogoods}


class TestWitnesses:
    def test_total_assignment_produces_a_witness(self):
        result = run("$domain(1..3).\n:- not x $< 3.\n")
        (model,) = result.models
        assert model.assignment["x"] in (1, 2)

    def test_pure_boolean_program_has_empty_witness(self):
        result = run("{a}.")
        assert all(m.assignment == {} for m in result.models)
