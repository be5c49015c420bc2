"""Statement grammar: worked parses, error positions, round trips."""

from __future__ import annotations

import pytest

from rwlab.corpus import CorpusConfig, generate_corpus
from rwlab.parser import (
    ParseError,
    load_corpus,
    parse_corpus,
    parse_relation,
    parse_statement,
    parse_term,
)
from rwlab.terms import (
    Add,
    Lit,
    Mul,
    Neg,
    Pow,
    PVar,
    Relation,
    Var,
    render_term,
    statement_text,
)


# --- worked examples ---------------------------------------------------------


def test_parse_statement_with_hypothesis():
    s = parse_statement("thm a (x:0..3) (h0: x + 1 = 3) : 3 = x + 1")
    assert s.name == "a"
    assert len(s.vars) == 1 and s.vars[0].name == "x"
    assert (s.vars[0].lo, s.vars[0].hi) == (0, 3)
    assert len(s.hyps) == 1 and s.hyps[0].name == "h0"
    assert s.goal == Relation("eq", Lit(3), Add(Var("x"), Lit(1)))


def test_parse_ground_statement():
    s = parse_statement("thm b : 2 * 3 = 6")
    assert s.vars == () and s.hyps == ()
    assert s.goal == Relation("eq", Mul(Lit(2), Lit(3)), Lit(6))


def test_parse_dangling_operator():
    with pytest.raises(ParseError) as err:
        parse_statement("thm c (x:0..3) : x +")
    assert err.value.line == 1
    assert err.value.col == 21  # just past the dangling +


def test_parse_error_positions():
    with pytest.raises(ParseError) as err:
        parse_statement("thm a (x:0..3) :\nx + (1 = 3")
    assert err.value.line == 2


def test_parse_undeclared_variable():
    with pytest.raises(ParseError, match="undeclared"):
        parse_statement("thm a (x:0..3) : y = 1")


def test_parse_exponent_too_large():
    with pytest.raises(ParseError, match="exponent"):
        parse_statement("thm a (x:0..3) : x ^ 5 = 0")


def test_parse_reserved_words():
    with pytest.raises(ParseError):
        parse_statement("thm thm : 1 = 1")


# --- term grammar -------------------------------------------------------------


def test_precedence():
    # * binds tighter than +, neg tighter than *, ^ tightest.
    assert parse_term("1 + 2 * 3") == Add(Lit(1), Mul(Lit(2), Lit(3)))
    assert parse_term("neg 2 * 3") == Mul(Neg(Lit(2)), Lit(3))
    assert parse_term("neg x ^ 2") == Neg(Pow(Var("x"), 2))
    assert parse_term("(1 + 2) * 3") == Mul(Add(Lit(1), Lit(2)), Lit(3))


def test_subtraction_is_left_associative():
    t = parse_term("5 - 2 - 1")
    assert render_term(t) == "((5 - 2) - 1)"


def test_negative_literals():
    assert parse_term("-3") == Lit(-3)
    assert parse_term("1 - -3") == parse_term("1 - (-3)")


def test_pattern_variables_gated():
    assert parse_term("?a + 1", allow_patterns=True) == Add(PVar("a"), Lit(1))
    with pytest.raises(ParseError):
        parse_term("?a + 1")


def test_parse_relation_kinds():
    assert parse_relation("1 = 1").kind == "eq"
    assert parse_relation("1 <= 2").kind == "le"
    assert parse_relation("1 < 2").kind == "lt"


# --- round trips ----------------------------------------------------------------


def test_roundtrip_of_generated_corpus():
    # parse(print(s)) = s across a generated corpus.
    statements = generate_corpus(CorpusConfig(size=40, seed=7))
    for s in statements:
        assert parse_statement(statement_text(s)) == s


def test_canonical_text_is_fixed_point():
    s = parse_statement("thm a (x:0..3) (h0: x + 1 = 3) : 3 = x + 1")
    text = statement_text(s)
    assert statement_text(parse_statement(text)) == text


# --- corpus files ----------------------------------------------------------------


def test_parse_corpus_with_comments():
    text = """
# a comment line
thm a : 1 = 1

thm b (x:0..3) : x <= 3  # trailing comment
"""
    statements = parse_corpus(text)
    assert [s.name for s in statements] == ["a", "b"]


def test_parse_corpus_reports_offending_line():
    with pytest.raises(ParseError) as err:
        parse_corpus("thm a : 1 = 1\nthm b : 2 =\n")
    assert err.value.line == 2


def test_load_corpus_roundtrip(tmp_path):
    statements = generate_corpus(CorpusConfig(size=5, seed=3))
    path = tmp_path / "corpus.txt"
    path.write_text(
        "# header\n" + "\n".join(statement_text(s) for s in statements) + "\n",
        encoding="utf-8",
    )
    assert load_corpus(str(path)) == statements
