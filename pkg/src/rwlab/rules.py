"""Rewrite rules over terms and relations.

A rule has an identifier, a left and right pattern over pattern variables
(``?a``), and a direction flag.  Term-scope rules rewrite a subterm at a
position inside one side of a relation; relation-scope rules (their
patterns contain a relation symbol) rewrite a whole relation at once.

Rules are semantics-preserving and are checked for it when loaded, by
substituting random integers for the pattern variables and comparing the
two instances.  Bidirectional rules must use the same pattern variables on
both sides so they can be inverted.

File format, one rule per line::

    add_comm: ?a + ?b <-> ?b + ?a      # bidirectional
    drop_mul_zero: ?a * 0 -> 0         # one-directional
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Iterator, Mapping

from . import rng
from .parser import ParseError, Parser, Token, tokenize
from .terms import (
    DEFAULT_LIMITS,
    LanguageError,
    Limits,
    Lit,
    Relation,
    Term,
    eval_relation,
    eval_term,
    indexed_subterms,
    pattern_vars,
    replace_at,
    subterm_at,
    render_relation,
    render_term,
    validate_relation,
    validate_term,
)

DIRECTIONS = ("fwd", "bwd")
SIDES = ("lhs", "rhs")

RULE_CHECK_SEED = 2026
RULE_CHECK_SAMPLES = 64


class RuleError(ValueError):
    """A rule file line is malformed or a rule fails its load checks."""


class RewriteFailure(Exception):
    """A rule application does not apply where requested."""

    def __init__(self, reason: str, detail: str = ""):
        super().__init__(f"{reason}: {detail}" if detail else reason)
        self.reason = reason


@dataclass(frozen=True)
class RewriteRule:
    rule_id: str
    scope: str  # "term" or "relation"
    lhs: Term | Relation
    rhs: Term | Relation
    bidirectional: bool = True


def render_rule(rule: RewriteRule) -> str:
    arrow = "<->" if rule.bidirectional else "->"
    if rule.scope == "term":
        left, right = render_term(rule.lhs), render_term(rule.rhs)  # type: ignore[arg-type]
    else:
        left, right = render_relation(rule.lhs), render_relation(rule.rhs)  # type: ignore[arg-type]
    return f"{rule.rule_id}: {left} {arrow} {right}"


# --- matching and substitution -------------------------------------------


@functools.lru_cache(maxsize=None)
def _match_fresh(pattern: Term, t: Term) -> tuple[tuple[str, Term], ...] | None:
    """Bindings for a match with no prior bindings, cached per (pattern, term)."""
    bound: dict[str, Term] = {}

    def walk(p: Term, u: Term) -> bool:
        if p.kind == "pvar":
            name = str(p.value)
            if name in bound:
                return bound[name] == u
            bound[name] = u
            return True
        if p.kind != u.kind or p.value != u.value or len(p.args) != len(u.args):
            return False
        return all(walk(pa, ua) for pa, ua in zip(p.args, u.args))

    return tuple(sorted(bound.items())) if walk(pattern, t) else None


def match_term(pattern: Term, t: Term, bindings: dict[str, Term] | None = None) -> dict[str, Term] | None:
    """Bindings extending `bindings` that make the pattern equal t, or None."""
    if not bindings:
        found = _match_fresh(pattern, t)
        return dict(found) if found is not None else None

    bound = dict(bindings)

    def walk(p: Term, u: Term) -> bool:
        if p.kind == "pvar":
            name = str(p.value)
            if name in bound:
                return bound[name] == u
            bound[name] = u
            return True
        if p.kind != u.kind or p.value != u.value or len(p.args) != len(u.args):
            return False
        return all(walk(pa, ua) for pa, ua in zip(p.args, u.args))

    return bound if walk(pattern, t) else None


def match_relation(pattern: Relation, rel: Relation) -> dict[str, Term] | None:
    if pattern.kind != rel.kind:
        return None
    bound = match_term(pattern.lhs, rel.lhs)
    if bound is None:
        return None
    return match_term(pattern.rhs, rel.rhs, bound)


def subst_term(pattern: Term, bindings: Mapping[str, Term]) -> Term:
    if pattern.kind == "pvar":
        name = str(pattern.value)
        if name not in bindings:
            raise RuleError(f"unbound pattern variable ?{name}")
        return bindings[name]
    if not pattern.args:
        return pattern
    return Term(pattern.kind, tuple(subst_term(a, bindings) for a in pattern.args), pattern.value)


def subst_relation(pattern: Relation, bindings: Mapping[str, Term]) -> Relation:
    return Relation(pattern.kind, subst_term(pattern.lhs, bindings), subst_term(pattern.rhs, bindings))


# --- applying a rule to a relation ----------------------------------------


def rule_sides(rule: RewriteRule, direction: str) -> tuple[Term | Relation, Term | Relation]:
    if direction == "fwd":
        return rule.lhs, rule.rhs
    if direction == "bwd":
        if not rule.bidirectional:
            raise RewriteFailure("direction", f"{rule.rule_id} is one-directional")
        return rule.rhs, rule.lhs
    raise RewriteFailure("direction", f"unknown direction {direction!r}")


def rewrite_relation(
    rel: Relation,
    rule: RewriteRule,
    direction: str,
    side: str,
    path: tuple[int, ...],
    limits: Limits = DEFAULT_LIMITS,
) -> Relation:
    """Apply one rule at one site of a relation, or raise RewriteFailure.

    Relation-scope rules use the canonical site side="lhs", path=().
    The result is checked against the absolute structural limits.
    """
    src, dst = rule_sides(rule, direction)
    if rule.scope == "relation":
        if side != "lhs" or path != ():
            raise RewriteFailure("position", "relation rules apply only at the root site")
        bound = match_relation(src, rel)  # type: ignore[arg-type]
        if bound is None:
            raise RewriteFailure("no-match", rule.rule_id)
        out = subst_relation(dst, bound)  # type: ignore[arg-type]
    else:
        if side not in SIDES:
            raise RewriteFailure("position", f"unknown side {side!r}")
        target = rel.lhs if side == "lhs" else rel.rhs
        try:
            at = subterm_at(target, path)
        except Exception:
            raise RewriteFailure("position", f"no subterm at {path}")
        bound = match_term(src, at)  # type: ignore[arg-type]
        if bound is None:
            raise RewriteFailure("no-match", rule.rule_id)
        new_side = replace_at(target, path, subst_term(dst, bound))  # type: ignore[arg-type]
        out = Relation(rel.kind, new_side, rel.rhs) if side == "lhs" else Relation(rel.kind, rel.lhs, new_side)
    try:
        validate_relation(out, limits)
    except Exception as e:
        raise RewriteFailure("growth-limit", str(e))
    return out


@functools.lru_cache(maxsize=None)
def relation_sites(
    rel: Relation,
    rule: RewriteRule,
    direction: str,
    limits: Limits = DEFAULT_LIMITS,
) -> tuple[tuple[str, tuple[int, ...], Relation], ...]:
    """All (side, path, result) sites where the rule applies, cached.

    Hypotheses rarely change while goals are rewritten, and the same goals
    recur across search branches, so site lists are memoized per relation.
    """
    try:
        src, dst = rule_sides(rule, direction)
    except RewriteFailure:
        return ()
    if rule.scope == "relation":
        try:
            return (("lhs", (), rewrite_relation(rel, rule, direction, "lhs", (), limits)),)
        except RewriteFailure:
            return ()
    found: list[tuple[str, tuple[int, ...], Relation]] = []
    for side, term in (("lhs", rel.lhs), ("rhs", rel.rhs)):
        for path, sub in indexed_subterms(term):
            bound = match_term(src, sub)  # type: ignore[arg-type]
            if bound is None:
                continue
            new_side = replace_at(term, path, subst_term(dst, bound))  # type: ignore[arg-type]
            out = (
                Relation(rel.kind, new_side, rel.rhs)
                if side == "lhs"
                else Relation(rel.kind, rel.lhs, new_side)
            )
            try:
                validate_relation(out, limits)
            except LanguageError:
                continue
            found.append((side, path, out))
    return tuple(found)


def iter_relation_sites(
    rel: Relation,
    rule: RewriteRule,
    direction: str,
    limits: Limits = DEFAULT_LIMITS,
) -> Iterator[tuple[str, tuple[int, ...], Relation]]:
    """All (side, path, result) sites where the rule applies to the relation."""
    yield from relation_sites(rel, rule, direction, limits)


# --- load-time checks ------------------------------------------------------


def check_rule(rule: RewriteRule, limits: Limits = DEFAULT_LIMITS, samples: int = RULE_CHECK_SAMPLES) -> None:
    """Validate structure, invertibility, and semantics preservation."""
    if rule.scope == "term":
        lhs_vars = pattern_vars(rule.lhs)  # type: ignore[arg-type]
        rhs_vars = pattern_vars(rule.rhs)  # type: ignore[arg-type]
        validate_term(rule.lhs, limits, allow_patterns=True)  # type: ignore[arg-type]
        validate_term(rule.rhs, limits, allow_patterns=True)  # type: ignore[arg-type]
    elif rule.scope == "relation":
        lhs_vars = pattern_vars(rule.lhs.lhs) | pattern_vars(rule.lhs.rhs)  # type: ignore[union-attr]
        rhs_vars = pattern_vars(rule.rhs.lhs) | pattern_vars(rule.rhs.rhs)  # type: ignore[union-attr]
        validate_relation(rule.lhs, limits, allow_patterns=True)  # type: ignore[arg-type]
        validate_relation(rule.rhs, limits, allow_patterns=True)  # type: ignore[arg-type]
    else:
        raise RuleError(f"{rule.rule_id}: unknown scope {rule.scope!r}")
    if rule.bidirectional and lhs_vars != rhs_vars:
        raise RuleError(f"{rule.rule_id}: bidirectional rules need equal variable sets on both sides")
    if not rule.bidirectional and not rhs_vars <= lhs_vars:
        raise RuleError(f"{rule.rule_id}: right side uses variables missing on the left")

    names = sorted(lhs_vars | rhs_vars)
    for i in range(samples):
        r = rng.child_rng(RULE_CHECK_SEED, rule.rule_id, i)
        env = {n: Lit(r.randint(-20, 20)) for n in names}
        if rule.scope == "term":
            a = eval_term(subst_term(rule.lhs, env), {})  # type: ignore[arg-type]
            b = eval_term(subst_term(rule.rhs, env), {})  # type: ignore[arg-type]
        else:
            a = eval_relation(subst_relation(rule.lhs, env), {})  # type: ignore[arg-type]
            b = eval_relation(subst_relation(rule.rhs, env), {})  # type: ignore[arg-type]
        if a != b:
            raise RuleError(
                f"{rule.rule_id}: not semantics-preserving under "
                f"{{{', '.join(f'?{n}={render_term(v)}' for n, v in env.items())}}}"
            )


# --- rule files -------------------------------------------------------------


def _parse_side(tokens: list[Token], limits: Limits) -> Term | Relation:
    p = Parser(tokens + [Token("end", "", 0, 0)], limits)
    t = p.parse_term(allow_patterns=True)
    if p.peek().text in ("=", "<=", "<") and p.peek().kind == "sym":
        kind = {"=": "eq", "<=": "le", "<": "lt"}[p.take("sym").text]
        rhs = p.parse_term(allow_patterns=True)
        p.expect_end()
        return Relation(kind, t, rhs)
    p.expect_end()
    return t


def parse_rule_line(line: str, limits: Limits = DEFAULT_LIMITS, lineno: int = 1) -> RewriteRule:
    tokens = tokenize(line, lineno)[:-1]
    if len(tokens) < 2 or tokens[0].kind != "ident" or tokens[1].text != ":":
        raise RuleError(f"line {lineno}: expected '<id>: <pattern> <-> <pattern>'")
    rule_id = tokens[0].text
    arrows = [i for i, t in enumerate(tokens) if t.text in ("<->", "->")]
    if len(arrows) != 1:
        raise RuleError(f"line {lineno}: expected exactly one '<->' or '->'")
    cut = arrows[0]
    try:
        left = _parse_side(tokens[2:cut], limits)
        right = _parse_side(tokens[cut + 1 :], limits)
    except ParseError as e:
        raise RuleError(f"line {lineno}: {e}") from e
    if isinstance(left, Relation) != isinstance(right, Relation):
        raise RuleError(f"line {lineno}: {rule_id}: both sides must be terms, or both relations")
    scope = "relation" if isinstance(left, Relation) else "term"
    return RewriteRule(rule_id, scope, left, right, tokens[cut].text == "<->")


def parse_rules(text: str, limits: Limits = DEFAULT_LIMITS, *, check: bool = True) -> dict[str, RewriteRule]:
    """Parse a rule file into an ordered {id: rule} table."""
    out: dict[str, RewriteRule] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        rule = parse_rule_line(raw, limits, lineno)
        if rule.rule_id in out:
            raise RuleError(f"line {lineno}: duplicate rule id {rule.rule_id!r}")
        if check:
            check_rule(rule, limits)
        out[rule.rule_id] = rule
    return out


def load_rules(path: str, limits: Limits = DEFAULT_LIMITS, *, check: bool = True) -> dict[str, RewriteRule]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_rules(fh.read(), limits, check=check)


DEFAULT_RULES_TEXT = """\
# Shipped rewrite rules.  All bidirectional.
add_comm: ?a + ?b <-> ?b + ?a
mul_comm: ?a * ?b <-> ?b * ?a
add_assoc: (?a + ?b) + ?c <-> ?a + (?b + ?c)
mul_assoc: (?a * ?b) * ?c <-> ?a * (?b * ?c)
add_zero: ?a + 0 <-> ?a
mul_one: ?a * 1 <-> ?a
eq_comm: ?a = ?b <-> ?b = ?a
sub_intro: ?a - ?b = ?c <-> ?a = ?c + ?b
"""

DEFAULT_RULES = parse_rules(DEFAULT_RULES_TEXT)


def clear_rule_caches() -> None:
    """Release the memoized pattern matches and rewrite-site tables."""
    _match_fresh.cache_clear()
    relation_sites.cache_clear()
