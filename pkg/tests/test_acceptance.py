"""Acceptance suite: one test per release criterion.

Each test prints its measured evidence; the pytest verdict line is the
pass/fail record for that criterion.  Random suites use fixed seed ranges
so reruns are reproducible.
"""

import random
import statistics
import time

import pytest

from casp.bench import (
    MATRIX_FILTERS,
    choice_encoding,
    csp_distinct_encoding,
    csp_pairwise_encoding,
    quasigroup_board,
    run_instance,
)
from casp.bridge import initial_lookahead
from casp.core import ArithConstraint, AtomTable, BinOp, Const, GammaMap, Relation, VarRef
from casp.csp import SpaceBuilder
from casp.driver import OPTIMUM_FOUND, SolverConfig, solve_text
from casp.grounder import ground_text
from casp.iis import (
    ConsistencyOracle,
    backward_filtering,
    cc_filtering,
    cc_range_filtering,
    deletion_filtering,
    forward_filtering,
    range_filtering,
    reason_nogood,
    simple_filtering,
)
from casp.semantics import oracle_model_set
from casp.translate import translate

from conftest import (
    CURATED_SUITE,
    SCHEDULING,
    SQUARE_MINIMIZE,
    check_irreducible_inconsistent,
    is_consistent,
    random_inconsistent_list,
    random_tight_program,
    scheduling_conflict_items,
    scheduling_oracle,
    small_builder,
)


def model_pairs(text, **kw):
    result = solve_text(text, SolverConfig(max_models=0, **kw))
    return {
        (frozenset(m.atoms), frozenset(m.constraint_atoms)) for m in result.models
    }


def test_criterion_01_conflict_filters_match_the_worked_example():
    items = scheduling_conflict_items()
    eq, john, smith, total, diff = items
    start = time.perf_counter()
    results = {
        fn.__name__: fn(list(items), scheduling_oracle())
        for fn in (
            deletion_filtering,
            forward_filtering,
            backward_filtering,
            cc_filtering,
            range_filtering,
            cc_range_filtering,
        )
    }
    elapsed = time.perf_counter() - start
    culprit = {eq, diff}
    for name in (
        "deletion_filtering",
        "forward_filtering",
        "backward_filtering",
        "cc_filtering",
    ):
        assert set(results[name]) == culprit, name
        assert len(results[name]) == 2, name
    assert set(results["range_filtering"]) == set(items)
    assert set(results["cc_range_filtering"]) == {diff, total, eq}
    print(f"criterion 1: six filters reproduced the worked example in {elapsed:.3f}s")
    assert elapsed < 1.0


def test_criterion_02_oracle_rebuild_counts_are_exact():
    items = scheduling_conflict_items()
    forward_oracle = scheduling_oracle()
    forward_filtering(list(items), forward_oracle)
    deletion_oracle = scheduling_oracle()
    deletion_filtering(list(items), deletion_oracle)
    print(
        "criterion 2: forward rebuilds="
        f"{forward_oracle.rebuilds} deletion rebuilds={deletion_oracle.rebuilds}"
    )
    assert forward_oracle.rebuilds == 1
    assert deletion_oracle.rebuilds == 5


def test_criterion_03_reason_filtering_reduces_to_two_literals():
    lea, adam, john = VarRef("work(lea)"), VarRef("work(adam)"), VarRef("work(john)")
    john0 = ArithConstraint(john, Relation.EQ, Const(0))
    diff = ArithConstraint(BinOp("-", lea, adam), Relation.EQ, Const(1))
    eq = ArithConstraint(lea, Relation.EQ, adam)
    gamma = GammaMap(AtomTable())
    gamma.register(john0)
    l_diff = gamma.register(diff)
    l_eq = gamma.register(eq)
    propagated = l_eq.neg()
    expected = frozenset({l_diff, propagated.neg()})
    for fn in (deletion_filtering, forward_filtering, backward_filtering, cc_filtering):
        oracle = ConsistencyOracle(
            SpaceBuilder(["work(lea)", "work(adam)", "work(john)"], (0, 10))
        )
        got = reason_nogood([john0, diff], propagated, gamma, oracle, fn)
        assert got == expected, fn.__name__
        assert len(got) == 2
    print("criterion 3: reduced reason is {T diff, T eq} for all four filters")


def test_criterion_04_optimization_trace_on_the_square_program():
    start = time.perf_counter()
    result = solve_text(SQUARE_MINIMIZE, SolverConfig(max_models=0))
    elapsed = time.perf_counter() - start
    assert result.status == OPTIMUM_FOUND
    assert [m.assignment["x"] for m in result.models] == [5, 1]
    assert [m.objective for m in result.models] == [[5], [1]]
    assert result.optimum == [1]
    print(f"criterion 4: witnesses x=5 then x=1, optimum 1, in {elapsed:.3f}s")
    assert elapsed < 1.0


def test_criterion_05_initial_lookahead_finds_the_displayed_implications():
    compiled = translate(ground_text(SCHEDULING))
    emitted = {frozenset(ng) for ng in initial_lookahead(compiled)}
    gamma = compiled.gamma

    def lit(constraint):
        return gamma.gamma_inverse(constraint)

    smith, adam, lea = VarRef("work(smith)"), VarRef("work(adam)"), VarRef("work(lea)")
    first = frozenset(
        {
            lit(ArithConstraint(smith, Relation.EQ, Const(0))),
            lit(ArithConstraint(BinOp("-", smith, adam), Relation.EQ, Const(1))),
        }
    )
    second = frozenset(
        {
            lit(ArithConstraint(lea, Relation.EQ, adam)),
            lit(ArithConstraint(BinOp("-", lea, adam), Relation.EQ, Const(1))),
        }
    )
    binary = {ng for ng in emitted if len(ng) == 2}
    print(
        f"criterion 5: lookahead emitted {len(emitted)} nogoods; "
        "both displayed implications present"
    )
    assert first in binary
    assert second in binary


def test_criterion_06_ground_expansions_match_the_printed_ones():
    lines = ground_text(SCHEDULING).to_text().splitlines()
    for mate in ("smith", "lea", "john"):
        assert f"work(adam)$+work({mate})$>6 :- team(adam,{mate})." in lines, mate
    (count_line,) = [l for l in lines if l.startswith("$count")]
    inner = count_line[len("$count[") : count_line.index("]")]
    assert sorted(inner.split(",")) == sorted(
        f"work({p})$==8" for p in ("adam", "smith", "lea", "john")
    )
    assert count_line.endswith("]$==fulltime.")
    print("criterion 6: team rule and count statement ground exactly as printed")


def test_criterion_07_solver_matches_brute_force_on_random_programs():
    start = time.perf_counter()
    programs = [random_tight_program(random.Random(10_000 + i)) for i in range(1000)]
    mismatches = 0
    expectations = []
    for text in programs:
        expected = oracle_model_set(ground_text(text))
        expectations.append(expected)
        if model_pairs(text) != expected:
            mismatches += 1
    config_mismatches = 0
    for text, expected in zip(programs[:50], expectations[:50]):
        for reason in MATRIX_FILTERS:
            for conflict in MATRIX_FILTERS:
                got = model_pairs(text, reason_filter=reason, conflict_filter=conflict)
                if got != expected:
                    config_mismatches += 1
    elapsed = time.perf_counter() - start
    print(
        f"criterion 7: 1000 programs, 50x36 configurations, "
        f"{mismatches}+{config_mismatches} mismatches, {elapsed:.1f}s"
    )
    assert mismatches == 0
    assert config_mismatches == 0
    assert elapsed < 300.0


def test_criterion_08_filter_outputs_are_irreducible_or_inconsistent():
    builder = small_builder()
    irreducible_violations = 0
    consistency_violations = 0
    for i in range(500):
        items = random_inconsistent_list(random.Random(20_000 + i), max_len=8)
        for fn in (
            deletion_filtering,
            forward_filtering,
            backward_filtering,
            cc_filtering,
        ):
            out = fn(list(items), ConsistencyOracle(builder))
            if not check_irreducible_inconsistent(out):
                irreducible_violations += 1
        for fn in (range_filtering, cc_range_filtering):
            out = fn(list(items), ConsistencyOracle(builder))
            if is_consistent(out):
                consistency_violations += 1
    print(
        "criterion 8: 500 lists, violations "
        f"irreducible={irreducible_violations} consistent={consistency_violations}"
    )
    assert irreducible_violations == 0
    assert consistency_violations == 0


def test_criterion_09_filtering_lowers_conflict_size_and_median_time():
    seeds = range(1000, 1020)
    size_wins = 0
    baseline_times = []
    filtered_times = []
    for seed in seeds:
        text = choice_encoding(10, quasigroup_board(10, 0.3, seed=seed))
        baseline = run_instance(text, "simple", "simple", timeout=25.0)
        filtered = run_instance(text, "ccrange", "backward", timeout=25.0)
        if filtered.conflict_size < baseline.conflict_size:
            size_wins += 1
        baseline_times.append(baseline.time)
        filtered_times.append(filtered.time)
        print(
            f"  seed {seed}: conflict size {baseline.conflict_size:7.1f} -> "
            f"{filtered.conflict_size:7.1f}  time {baseline.time:6.2f}s -> "
            f"{filtered.time:6.2f}s"
        )
    baseline_median = statistics.median(baseline_times)
    filtered_median = statistics.median(filtered_times)
    print(
        f"criterion 9: size wins {size_wins}/20, median time "
        f"{baseline_median:.2f}s (s/s) vs {filtered_median:.2f}s (o/b)"
    )
    assert size_wins >= 16, f"conflict-size leg: only {size_wins}/20 strict wins"
    assert filtered_median < baseline_median, (
        "median-time leg: o/b median "
        f"{filtered_median:.2f}s is not below s/s median {baseline_median:.2f}s"
    )


def test_criterion_10_global_distinct_beats_the_decomposition():
    n = 10
    distinct_times = []
    pairwise_times = []
    distinct_atoms = pairwise_atoms = None
    for seed in range(1000, 1020):
        board = quasigroup_board(n, 0.3, seed=seed)
        lean = csp_distinct_encoding(n, board)
        fat = csp_pairwise_encoding(n, board)
        if distinct_atoms is None:
            count = lambda text: sum(
                1 for a in ground_text(text).atoms if a.is_constraint
            )
            distinct_atoms = count(lean)
            pairwise_atoms = count(fat)
        for text, bucket in ((lean, distinct_times), (fat, pairwise_times)):
            start = time.perf_counter()
            result = solve_text(text, SolverConfig(max_models=1, timeout=25.0))
            bucket.append(time.perf_counter() - start)
            assert result.status == "SATISFIABLE"
    lean_median = statistics.median(distinct_times)
    fat_median = statistics.median(pairwise_times)
    print(
        f"criterion 10: constraint atoms {distinct_atoms} vs {pairwise_atoms}, "
        f"median time {lean_median:.3f}s vs {fat_median:.3f}s"
    )
    assert distinct_atoms == 30  # prefilled cells only
    assert pairwise_atoms == 30 + n * n * (n - 1)  # plus n^2(n-1) disequalities
    assert distinct_atoms * 10 < pairwise_atoms
    assert lean_median <= fat_median


def test_criterion_11_model_counts_are_invariant_across_configurations():
    checked = 0
    for text in CURATED_SUITE:
        expected = len(oracle_model_set(ground_text(text)))
        counts = set()
        for reason in MATRIX_FILTERS:
            for conflict in MATRIX_FILTERS:
                for lookahead in (False, True):
                    for delay in (0, 1, 10):
                        result = solve_text(
                            text,
                            SolverConfig(
                                max_models=0,
                                reason_filter=reason,
                                conflict_filter=conflict,
                                lookahead=lookahead,
                                delay=delay,
                            ),
                        )
                        counts.add(len(result.models))
                        checked += 1
        assert counts == {expected}, (text, counts, expected)
    print(
        f"criterion 11: {checked} runs over {len(CURATED_SUITE)} programs, "
        "every configuration agrees with the enumeration oracle"
    )
