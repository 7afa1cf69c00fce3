"""Tests for graded signatures, degrees, balance, and multi-steps."""

import random
from fractions import Fraction

import pytest

from qtrw.graded import (
    CONSTANT_UNIT,
    IDENTITY,
    GradedError,
    GradedSystem,
    Sensitivity,
    balanced_check,
    context_degree,
    degree_at_position,
    degree_of_variable,
    graded_one_step,
    multi_step,
    multistep_diamond_probe,
    multistep_targets,
    orthogonality_check,
    substitution_lemma_probe,
)
from qtrw.quantale import LAWVERE
from qtrw.qtrs import Rule, RewriteSystem, SymbolFamily, one_step
from qtrw.systems import (
    make_graded_combinators,
    make_linearity_example,
    make_nat,
    nat_term,
)
from qtrw.term import Application, Symbol, Variable, context_at, term_key


def _app(a, b):
    return Application(Symbol("app", 2), (a, b))


def _bang(n, t):
    return Application(Symbol("!", 1, (Fraction(n),)), (t,))


def _c(name):
    return Application(Symbol(name, 0), ())


# ---------------------------------------------------------------------------
# sensitivities and degrees


def test_sensitivity_algebra():
    two, three = Sensitivity(Fraction(2)), Sensitivity(Fraction(3))
    assert two.compose(three).scalar == Fraction(6)
    assert two.tensor(three).scalar == Fraction(5)
    assert IDENTITY.compose(two) == two
    assert CONSTANT_UNIT.tensor(two) == two
    assert two.apply(LAWVERE, Fraction(1, 2)) == Fraction(1)
    assert CONSTANT_UNIT.apply(LAWVERE, Fraction(7)) == LAWVERE.unit


def test_degrees_in_nested_bang_term():
    gsys = make_graded_combinators()
    sig = gsys.signature
    x = Variable("x")
    t = _bang(3, _app(x, _bang(2, _app(_c("I"), x))))
    assert degree_at_position(sig, t, (1, 1)) == Sensitivity(Fraction(3))
    assert degree_at_position(sig, t, (1, 2, 1, 2)) == Sensitivity(Fraction(6))
    assert degree_of_variable(sig, t, "x") == Sensitivity(Fraction(9))
    assert degree_of_variable(sig, t, "absent") == CONSTANT_UNIT
    ctx = context_at(t, (1, 2))
    assert context_degree(sig, ctx) == Sensitivity(Fraction(3))


# ---------------------------------------------------------------------------
# balance


def test_graded_combinators_balanced():
    gsys = make_graded_combinators()
    entries = balanced_check(gsys)
    assert entries and all(e.balanced for e in entries)
    assert gsys.balanced


def test_duplicating_rule_is_unbalanced():
    gsys = GradedSystem(make_linearity_example())
    bad = [e for e in balanced_check(gsys) if not e.balanced]
    assert bad
    entry = bad[0]
    assert entry.rule_id == "collapse" and entry.variable == "x"
    assert entry.lhs_degree == Sensitivity(Fraction(2))
    assert entry.rhs_degree == Sensitivity(Fraction(1))
    assert not gsys.balanced
    with pytest.raises(GradedError):
        multi_step(gsys, _c("e"))


# ---------------------------------------------------------------------------
# orthogonality


def test_orthogonality():
    ok, evidence = orthogonality_check(make_graded_combinators())
    assert ok
    assert evidence["critical_pairs"] == 0 and evidence["left_linear"]
    ok, evidence = orthogonality_check(GradedSystem(make_linearity_example()))
    assert not ok and not evidence["left_linear"]


# ---------------------------------------------------------------------------
# graded steps


def test_graded_one_step_scales_by_context_degree():
    sys = RewriteSystem(
        name="amplifier",
        quantale=LAWVERE,
        signature=(
            SymbolFamily("g", 1, grades=(Fraction(2),)),
            SymbolFamily("a", 0),
            SymbolFamily("b", 0),
        ),
        rules=(Rule("step", _c("a"), _c("b"), Fraction(1)),),
    )
    gsys = GradedSystem(sys)
    t = Application(Symbol("g", 1), (Application(Symbol("g", 1), (_c("a"),)),))
    (step,) = graded_one_step(gsys, t)
    assert step.position == (1, 1)
    assert step.weight == Fraction(4)  # two nested contexts of grade 2
    (plain,) = one_step(sys, t)
    assert plain.weight == Fraction(1)


def test_trivial_grades_agree_with_plain_steps():
    sys = make_nat()
    gsys = GradedSystem(sys)
    rng = random.Random("trivial-grades")
    f = lambda a, b: Application(Symbol("A", 2), (a, b))
    for _ in range(25):
        t = f(nat_term(rng.randrange(4)), nat_term(rng.randrange(4)))
        plain = {(s.position, s.rule_id, term_key(s.target)): s.weight
                 for s in one_step(sys, t)}
        graded = {(s.position, s.rule_id, term_key(s.target)): s.weight
                  for s in graded_one_step(gsys, t)}
        assert plain == graded


# ---------------------------------------------------------------------------
# multi-steps


def test_multi_step_enumeration():
    gsys = make_graded_combinators()
    # two disjoint redexes: D!1(I) on both sides of an application
    redex = _app(_c("D"), _bang(1, _c("I")))
    t = _app(redex, redex)
    steps = multi_step(gsys, t, width_budget=4)
    by_key = multistep_targets(steps, gsys.system.quantale)
    assert term_key(t) in by_key                       # the empty multi-step
    assert by_key[term_key(t)].nredex == 0
    both = by_key[term_key(_app(_c("I"), _c("I")))]
    assert both.nredex == 2                            # contracted in parallel
    assert max(s.nredex for s in steps) <= 4


def test_multistep_diamond_probe_small():
    gsys = make_graded_combinators()
    t = _app(_app(_c("D"), _bang(1, _c("I"))), _app(_c("D"), _bang(1, _c("I"))))
    report = multistep_diamond_probe(gsys, t, width_budget=4)
    assert report.holds
    assert report.peaks_checked == report.peaks_closed > 0


def test_diamond_probe_rejects_non_orthogonal():
    with pytest.raises(GradedError):
        multistep_diamond_probe(GradedSystem(make_linearity_example()), _c("e"))


def test_substitution_lemma_probe():
    gsys = make_graded_combinators()
    x = Variable("x")
    body = _bang(2, x)
    component = _app(_c("D"), _bang(1, _c("I")))
    report = substitution_lemma_probe(gsys, [(body, {"x": component})])
    assert report.holds and report.cases_checked > 0
