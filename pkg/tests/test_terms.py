"""Term language: structural bounds, evaluation, truth, canonical text."""

from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rwlab.parser import parse_statement
from rwlab.terms import (
    DEFAULT_LIMITS,
    EnumerationLimitError,
    Add,
    Hyp,
    LanguageError,
    Limits,
    Lit,
    Mul,
    Neg,
    Pow,
    PVar,
    Relation,
    Statement,
    Sub,
    Term,
    Var,
    VarDecl,
    assignments,
    decide_truth,
    eval_relation,
    eval_term,
    free_vars,
    indexed_subterms,
    is_ground,
    node_count,
    pattern_vars,
    positions,
    render_term,
    replace_at,
    statement_text,
    subterm_at,
    term_depth,
    validate_relation,
    validate_statement,
    validate_term,
)

X = Var("x")
Y = Var("y")


def leaf_terms():
    return st.one_of(
        st.integers(min_value=-50, max_value=50).map(Lit),
        st.sampled_from([X, Y]),
    )


def terms(max_leaves: int = 12):
    return st.recursive(
        leaf_terms(),
        lambda inner: st.one_of(
            st.tuples(inner, inner).map(lambda ab: Add(*ab)),
            st.tuples(inner, inner).map(lambda ab: Sub(*ab)),
            st.tuples(inner, inner).map(lambda ab: Mul(*ab)),
            inner.map(Neg),
            st.tuples(inner, st.integers(min_value=0, max_value=4)).map(
                lambda te: Pow(*te)
            ),
        ),
        max_leaves=max_leaves,
    )


# --- structural bounds -------------------------------------------------------


def test_literal_bounds():
    validate_term(Lit(10**6))
    validate_term(Lit(-(10**6)))
    with pytest.raises(LanguageError):
        validate_term(Lit(10**6 + 1))
    with pytest.raises(LanguageError):
        validate_term(Lit(-(10**6) - 1))


def test_exponent_bounds():
    validate_term(Pow(X, 4))
    with pytest.raises(LanguageError):
        validate_term(Pow(X, 5))
    with pytest.raises(LanguageError):
        validate_term(Pow(X, -1))


def test_depth_and_node_bounds():
    t = X
    for _ in range(11):
        t = Neg(t)
    assert term_depth(t) == 12
    validate_term(t)
    with pytest.raises(LanguageError):
        validate_term(Neg(t))  # depth 13

    # A bushy tree keeps depth small while the node count crosses the cap.
    bushy = Lit(1)
    for _ in range(5):
        bushy = Add(bushy, bushy)  # doubles nodes + 1: 1, 3, 7, 15, 31, 63
    assert node_count(bushy) == 63
    validate_term(bushy)
    with pytest.raises(LanguageError):
        validate_term(Add(bushy, Lit(1)))  # 65 nodes


def test_pattern_vars_only_in_rules():
    with pytest.raises(LanguageError):
        validate_term(PVar("a"))
    validate_term(PVar("a"), allow_patterns=True)
    assert pattern_vars(Add(PVar("a"), X)) == {"a"}


def test_custom_limits():
    tight = Limits(literal_min=0, literal_max=9, max_exponent=2)
    with pytest.raises(LanguageError):
        validate_term(Lit(-1), tight)
    with pytest.raises(LanguageError):
        validate_term(Pow(X, 3), tight)


# --- evaluation ----------------------------------------------------------------


def test_eval_term_worked_examples():
    env = {"x": 3, "y": 2}
    assert eval_term(Mul(Lit(2), Lit(3)), {}) == 6
    assert eval_term(Sub(X, Y), env) == 1
    assert eval_term(Neg(Add(X, Lit(1))), env) == -4
    assert eval_term(Pow(Y, 3), env) == 8
    assert eval_term(Pow(X, 0), env) == 1


def test_eval_relation():
    assert eval_relation(Relation("eq", Mul(Lit(2), Lit(3)), Lit(6)), {})
    assert eval_relation(Relation("le", Lit(6), Lit(6)), {})
    assert not eval_relation(Relation("lt", Lit(6), Lit(6)), {})


def test_free_vars_and_ground():
    t = Add(Mul(X, Y), Lit(2))
    assert free_vars(t) == {"x", "y"}
    assert not is_ground(t)
    assert is_ground(Add(Lit(1), Neg(Lit(2))))


# --- positions -----------------------------------------------------------------


def test_positions_and_subterms():
    t = Add(Mul(X, Lit(2)), Y)
    paths = list(positions(t))
    assert paths == [(), (0,), (0, 0), (0, 1), (1,)]
    assert subterm_at(t, (0, 1)) == Lit(2)
    assert dict(indexed_subterms(t))[(1,)] == Y
    with pytest.raises(LanguageError):
        subterm_at(t, (2,))


def test_replace_at():
    t = Add(X, Y)
    assert replace_at(t, (1,), Lit(5)) == Add(X, Lit(5))
    assert replace_at(t, (), Lit(5)) == Lit(5)
    with pytest.raises(LanguageError):
        replace_at(t, (3,), Lit(5))


@given(terms(max_leaves=8))
def test_replace_roundtrip(t):
    # Putting a subterm back where it came from is a no-op.
    for path, sub in indexed_subterms(t):
        assert replace_at(t, path, sub) == t


# --- truth oracle ----------------------------------------------------------------


def stmt(text: str) -> Statement:
    return parse_statement(text)


def test_decide_truth_symmetry():
    assert decide_truth(stmt("thm a (x:0..3) (h0: x + 1 = 3) : 3 = x + 1"))


def test_decide_truth_by_enumeration():
    # Over x in {0,1,2,3} only x=2 satisfies x+1=3, and 2=2 holds.
    assert decide_truth(stmt("thm a (x:0..3) (h0: x + 1 = 3) : x = 2"))


def test_decide_truth_counterexample():
    # x=3 violates the goal.
    assert not decide_truth(stmt("thm a (x:0..3) : x <= 2"))


def test_decide_truth_vacuous():
    # x+1 ranges over 1..4, never 9, so no assignment satisfies the
    # hypothesis and the claim holds vacuously.
    assert decide_truth(stmt("thm a (x:0..3) (h0: x + 1 = 9) : x = 5"))


def test_decide_truth_ground():
    assert decide_truth(stmt("thm b : 2 * 3 = 6"))
    assert not decide_truth(stmt("thm b : 2 * 3 = 7"))


def test_decide_truth_brute_force_agreement():
    # Independent oracle: re-enumerate assignments with itertools and
    # evaluate both sides by hand, for a mix of true and false claims.
    cases = [
        "thm a (x:0..3) (h0: x + 1 = 3) : x = 2",
        "thm b (x:0..5) (y:0..5) : x + y = y + x",
        "thm c (x:0..5) (y:0..5) (h0: x < y) : x + 1 <= y",
        "thm d (x:0..5) (y:0..5) : x - y <= x",
        "thm e (x:0..3) : x * x <= 8",
        "thm f (x:0..7) (h0: x = 2) : x ^ 2 = 5",
    ]
    for text in cases:
        s = stmt(text)
        domains = [range(v.lo, v.hi + 1) for v in s.vars]
        names = [v.name for v in s.vars]
        expected = True
        for values in itertools.product(*domains):
            env = dict(zip(names, values))
            if all(eval_relation(h.relation, env) for h in s.hyps):
                if not eval_relation(s.goal, env):
                    expected = False
                    break
        assert decide_truth(s) == expected, text


def test_assignment_enumeration_limit():
    big = Statement(
        "big",
        tuple(VarDecl(f"v{i}", 0, 99) for i in range(4)),  # 10^8 assignments
        (),
        Relation("eq", Lit(0), Lit(0)),
    )
    with pytest.raises(EnumerationLimitError):
        list(assignments(big))
    with pytest.raises(EnumerationLimitError):
        decide_truth(big)


# --- canonical text ---------------------------------------------------------------


def test_render_is_fully_parenthesized():
    assert render_term(Add(X, Mul(Y, Lit(2)))) == "(x + (y * 2))"
    assert render_term(Neg(X)) == "(neg x)"
    assert render_term(Pow(X, 2)) == "(x ^ 2)"


@settings(max_examples=300)
@given(terms(), terms())
def test_render_injective(a, b):
    # Canonical text is injective: equal text iff structurally equal.
    assert (render_term(a) == render_term(b)) == (a == b)


def test_statement_text_shape():
    s = stmt("thm a (x:0..3) (h0: x + 1 = 3) : 3 = x + 1")
    assert statement_text(s) == "thm a (x:0..3) (h0: (x + 1) = 3) : 3 = (x + 1)"


# --- statement validation ---------------------------------------------------------


def test_validate_statement_catches_undeclared_vars():
    s = Statement("a", (VarDecl("x", 0, 3),), (), Relation("eq", Y, Lit(0)))
    with pytest.raises(LanguageError, match="undeclared"):
        validate_statement(s)


def test_validate_statement_catches_empty_domain():
    s = Statement("a", (VarDecl("x", 3, 0),), (), Relation("eq", Lit(0), Lit(0)))
    with pytest.raises(LanguageError, match="empty domain"):
        validate_statement(s)


def test_validate_statement_catches_duplicates():
    dup_var = Statement(
        "a",
        (VarDecl("x", 0, 3), VarDecl("x", 0, 3)),
        (),
        Relation("eq", Lit(0), Lit(0)),
    )
    with pytest.raises(LanguageError, match="duplicate variable"):
        validate_statement(dup_var)
    rel = Relation("eq", Lit(0), Lit(0))
    dup_hyp = Statement("a", (), (Hyp("h0", rel), Hyp("h0", rel)), rel)
    with pytest.raises(LanguageError, match="duplicate hypothesis"):
        validate_statement(dup_hyp)


def test_validate_relation_kind():
    with pytest.raises(LanguageError):
        validate_relation(Relation("ge", Lit(0), Lit(0)))
