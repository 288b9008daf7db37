"""Completion-style nogood translation of ground programs."""

from casp.core import F, Lit, T
from casp.grounder import ground_text
from casp.translate import translate


def compile_text(text):
    return translate(ground_text(text))


def atom_id(comp, name):
    got = comp.atoms.lookup(name)
    assert got is not None, f"no atom named {name!r}"
    return got


class TestRegularPart:
    def test_fact_forces_truth(self):
        comp = compile_text("a.")
        a = atom_id(comp, "a")
        assert frozenset({F(a)}) in comp.nogoods

    def test_derived_fact_chain_simplifies(self):
        comp = compile_text("b :- a. a.")
        assert frozenset({F(atom_id(comp, "a"))}) in comp.nogoods
        assert frozenset({F(atom_id(comp, "b"))}) in comp.nogoods

    def test_choice_atom_is_unconstrained(self):
        comp = compile_text("{a}.")
        assert comp.nogoods == []

    def test_integrity_over_choice_atoms(self):
        comp = compile_text("{a}. {b}. :- a, b.")
        a, b = atom_id(comp, "a"), atom_id(comp, "b")
        assert frozenset({T(a), T(b)}) in comp.nogoods

    def test_identical_bodies_share_one_auxiliary(self):
        comp = compile_text("{a}. {b}. c :- a, b. d :- a, b.")
        aux = [a for a in comp.atoms if a.synthetic]
        assert len(aux) == 1

    def test_contradictory_facts_flag_unsat(self):
        comp = compile_text("a. :- a.")
        assert comp.unsat

    def test_cardinality_introduces_counters(self):
        comp = compile_text("1{a;b}1.")
        aux = [a for a in comp.atoms if a.synthetic]
        assert len(aux) == 2
        assert comp.nogoods  # bounds are enforced through the counters


class TestConstraintAtoms:
    def test_catom_registered_and_marked(self):
        comp = compile_text("$domain(0..1). {a}. :- a, not x $== 1.")
        c = atom_id(comp, "x$==1")
        assert comp.atoms.is_constraint(c)
        assert c in comp.gamma.atoms()
        assert comp.gamma.forward(c).render().replace(" ", "") == "x$==1"

    def test_integrity_mixes_regular_and_constraint(self):
        comp = compile_text("$domain(0..1). {a}. :- a, not x $== 1.")
        a, c = atom_id(comp, "a"), atom_id(comp, "x$==1")
        assert frozenset({T(a), F(c)}) in comp.nogoods

    def test_constraint_head_becomes_implication(self):
        comp = compile_text("$domain(0..1). {a}. x $== 1 :- a.")
        a, c = atom_id(comp, "a"), atom_id(comp, "x$==1")
        # a true may not combine with the constraint atom false
        assert frozenset({T(a), F(c)}) in comp.nogoods

    def test_complementary_catoms_share_one_atom(self):
        comp = compile_text(
            "$domain(0..4). {a}. {b}. a :- x $< 2. b :- x $>= 2."
        )
        catoms = [at for at in comp.atoms if at.is_constraint]
        assert len(catoms) == 1

    def test_catom_fact_forced_true(self):
        comp = compile_text("$domain(0..1). x $== 1.")
        c = atom_id(comp, "x$==1")
        assert frozenset({F(c)}) in comp.nogoods


class TestAtomBudget:
    def test_every_nogood_is_over_known_atoms(self):
        comp = compile_text(
            "$domain(0..2). {a}. b :- a, x $< 2. :- b, not x $== 0."
        )
        n = len(comp.atoms)
        for ng in comp.nogoods:
            assert all(isinstance(l, Lit) and 0 <= l.atom < n for l in ng)
