"""A bounded integer term language and its decidable statement semantics.

Terms are integer arithmetic expressions (literals, variables, +, -, *,
unary negation, and powers with a small natural exponent) over finite
variable domains.  A statement names a goal relation, an ordered list of
hypothesis relations, and the domain of every free variable, so truth is
decidable by enumerating all assignments.

The canonical text of a term is fully parenthesized, which makes it
injective: two terms render equally iff they are structurally equal.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from typing import Iterator, Mapping

BINARY_KINDS = ("add", "sub", "mul")
TERM_KINDS = ("int", "var", "pvar", "add", "sub", "mul", "neg", "pow")
RELATION_KINDS = ("eq", "le", "lt")

_OP_SYMBOL = {"add": "+", "sub": "-", "mul": "*"}
_REL_SYMBOL = {"eq": "=", "le": "<=", "lt": "<"}


class LanguageError(ValueError):
    """A term, relation, or statement violates the language rules."""


class EnumerationLimitError(RuntimeError):
    """A truth check would enumerate more assignments than allowed."""


@dataclass(frozen=True)
class Limits:
    """Structural bounds shared by everything that builds terms."""

    literal_min: int = -(10**6)
    literal_max: int = 10**6
    max_exponent: int = 4
    max_depth: int = 12
    max_nodes: int = 64
    max_assignments: int = 10**6
    domain_min: int = 0
    domain_max: int = 7


DEFAULT_LIMITS = Limits()


@dataclass(frozen=True)
class Term:
    """One node of a term tree.

    kind "int" stores the literal in value; "var" and "pvar" store the
    name; "pow" stores the natural exponent in value with the base as the
    only child.  "pvar" nodes are pattern variables and may appear only in
    rewrite-rule patterns, never in statements.
    """

    kind: str
    args: tuple["Term", ...] = ()
    value: int | str | None = None

    def __hash__(self) -> int:
        # Terms are dict keys everywhere; cache the recursive hash per node.
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((self.kind, self.args, self.value))
            object.__setattr__(self, "_hash", h)
        return h


def Lit(value: int) -> Term:
    return Term("int", (), value)


def Var(name: str) -> Term:
    return Term("var", (), name)


def PVar(name: str) -> Term:
    return Term("pvar", (), name)


def Add(a: Term, b: Term) -> Term:
    return Term("add", (a, b))


def Sub(a: Term, b: Term) -> Term:
    return Term("sub", (a, b))


def Mul(a: Term, b: Term) -> Term:
    return Term("mul", (a, b))


def Neg(a: Term) -> Term:
    return Term("neg", (a,))


def Pow(base: Term, exponent: int) -> Term:
    return Term("pow", (base,), exponent)


@functools.lru_cache(maxsize=None)
def render_term(t: Term) -> str:
    """Canonical, fully parenthesized text of a term."""
    if t.kind == "int":
        return str(t.value)
    if t.kind == "var":
        return str(t.value)
    if t.kind == "pvar":
        return "?" + str(t.value)
    if t.kind in BINARY_KINDS:
        a, b = t.args
        return f"({render_term(a)} {_OP_SYMBOL[t.kind]} {render_term(b)})"
    if t.kind == "neg":
        return f"(neg {render_term(t.args[0])})"
    if t.kind == "pow":
        return f"({render_term(t.args[0])} ^ {t.value})"
    raise LanguageError(f"unknown term kind {t.kind!r}")


@functools.lru_cache(maxsize=None)
def node_count(t: Term) -> int:
    return 1 + sum(node_count(a) for a in t.args)


@functools.lru_cache(maxsize=None)
def term_depth(t: Term) -> int:
    if not t.args:
        return 1
    return 1 + max(term_depth(a) for a in t.args)


def free_vars(t: Term) -> frozenset[str]:
    if t.kind == "var":
        return frozenset((str(t.value),))
    if not t.args:
        return frozenset()
    out: frozenset[str] = frozenset()
    for a in t.args:
        out |= free_vars(a)
    return out


def pattern_vars(t: Term) -> frozenset[str]:
    if t.kind == "pvar":
        return frozenset((str(t.value),))
    out: frozenset[str] = frozenset()
    for a in t.args:
        out |= pattern_vars(a)
    return out


def is_ground(t: Term) -> bool:
    if t.kind in ("var", "pvar"):
        return False
    return all(is_ground(a) for a in t.args)


def positions(t: Term) -> Iterator[tuple[int, ...]]:
    """All paths into a term, root first, in left-to-right preorder."""
    yield ()
    for i, a in enumerate(t.args):
        for rest in positions(a):
            yield (i,) + rest


@functools.lru_cache(maxsize=None)
def indexed_subterms(t: Term) -> tuple[tuple[tuple[int, ...], "Term"], ...]:
    """All (path, subterm) pairs in preorder, cached per node."""
    out: list[tuple[tuple[int, ...], Term]] = [((), t)]
    for i, a in enumerate(t.args):
        out.extend(((i,) + path, sub) for path, sub in indexed_subterms(a))
    return tuple(out)


def subterm_at(t: Term, path: tuple[int, ...]) -> Term:
    for i in path:
        if i < 0 or i >= len(t.args):
            raise LanguageError(f"no subterm at path {path}")
        t = t.args[i]
    return t


def replace_at(t: Term, path: tuple[int, ...], new: Term) -> Term:
    if not path:
        return new
    i = path[0]
    if i < 0 or i >= len(t.args):
        raise LanguageError(f"no subterm at path {path}")
    args = list(t.args)
    args[i] = replace_at(t.args[i], path[1:], new)
    return Term(t.kind, tuple(args), t.value)


@functools.lru_cache(maxsize=None)
def _node_fault(t: Term, limits: Limits, allow_patterns: bool) -> str | None:
    """First per-node bound violation in the tree, or None; cached per subtree."""
    if t.kind == "int":
        v = t.value
        if not isinstance(v, int) or not (limits.literal_min <= v <= limits.literal_max):
            return f"literal {v!r} outside {limits.literal_min}..{limits.literal_max}"
    elif t.kind == "pow":
        e = t.value
        if not isinstance(e, int) or not (0 <= e <= limits.max_exponent):
            return f"exponent {e!r} outside 0..{limits.max_exponent}"
    elif t.kind == "pvar" and not allow_patterns:
        return "pattern variable outside a rewrite rule"
    elif t.kind not in TERM_KINDS:
        return f"unknown term kind {t.kind!r}"
    for a in t.args:
        fault = _node_fault(a, limits, allow_patterns)
        if fault is not None:
            return fault
    return None


def validate_term(t: Term, limits: Limits = DEFAULT_LIMITS, *, allow_patterns: bool = False) -> None:
    """Raise LanguageError unless the term obeys the structural bounds."""
    if term_depth(t) > limits.max_depth:
        raise LanguageError(f"term depth {term_depth(t)} exceeds {limits.max_depth}")
    if node_count(t) > limits.max_nodes:
        raise LanguageError(f"term size {node_count(t)} exceeds {limits.max_nodes}")
    fault = _node_fault(t, limits, allow_patterns)
    if fault is not None:
        raise LanguageError(fault)


def eval_term(t: Term, env: Mapping[str, int]) -> int:
    if t.kind == "int":
        return int(t.value)  # type: ignore[arg-type]
    if t.kind == "var":
        return env[str(t.value)]
    if t.kind == "add":
        return eval_term(t.args[0], env) + eval_term(t.args[1], env)
    if t.kind == "sub":
        return eval_term(t.args[0], env) - eval_term(t.args[1], env)
    if t.kind == "mul":
        return eval_term(t.args[0], env) * eval_term(t.args[1], env)
    if t.kind == "neg":
        return -eval_term(t.args[0], env)
    if t.kind == "pow":
        return eval_term(t.args[0], env) ** int(t.value)  # type: ignore[arg-type]
    raise LanguageError(f"cannot evaluate term kind {t.kind!r}")


@dataclass(frozen=True)
class Relation:
    """A binary relation between two terms: =, <=, or <."""

    kind: str
    lhs: Term
    rhs: Term

    def __hash__(self) -> int:
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((self.kind, self.lhs, self.rhs))
            object.__setattr__(self, "_hash", h)
        return h

    def sides(self) -> tuple[Term, Term]:
        return (self.lhs, self.rhs)


def render_relation(r: Relation) -> str:
    return f"{render_term(r.lhs)} {_REL_SYMBOL[r.kind]} {render_term(r.rhs)}"


def eval_relation(r: Relation, env: Mapping[str, int]) -> bool:
    a = eval_term(r.lhs, env)
    b = eval_term(r.rhs, env)
    if r.kind == "eq":
        return a == b
    if r.kind == "le":
        return a <= b
    if r.kind == "lt":
        return a < b
    raise LanguageError(f"unknown relation kind {r.kind!r}")


@functools.lru_cache(maxsize=None)
def _relation_fault(r: Relation, limits: Limits, allow_patterns: bool) -> str | None:
    if r.kind not in RELATION_KINDS:
        return f"unknown relation kind {r.kind!r}"
    try:
        validate_term(r.lhs, limits, allow_patterns=allow_patterns)
        validate_term(r.rhs, limits, allow_patterns=allow_patterns)
    except LanguageError as exc:
        return str(exc)
    return None


def validate_relation(r: Relation, limits: Limits = DEFAULT_LIMITS, *, allow_patterns: bool = False) -> None:
    fault = _relation_fault(r, limits, allow_patterns)
    if fault is not None:
        raise LanguageError(fault)


@dataclass(frozen=True)
class VarDecl:
    """A variable with an inclusive integer domain."""

    name: str
    lo: int
    hi: int

    def domain(self) -> range:
        return range(self.lo, self.hi + 1)


@dataclass(frozen=True)
class Hyp:
    name: str
    relation: Relation


@dataclass(frozen=True)
class Statement:
    """A named claim: under the declared domains, hypotheses imply the goal."""

    name: str
    vars: tuple[VarDecl, ...] = ()
    hyps: tuple[Hyp, ...] = ()
    goal: Relation = field(default_factory=lambda: Relation("eq", Lit(0), Lit(0)))

    def __hash__(self) -> int:
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((self.name, self.vars, self.hyps, self.goal))
            object.__setattr__(self, "_hash", h)
        return h


@functools.lru_cache(maxsize=1 << 18)
def statement_text(s: Statement) -> str:
    """Canonical one-line rendering; injective on valid statements."""
    parts = [f"thm {s.name}"]
    parts.extend(f"({v.name}:{v.lo}..{v.hi})" for v in s.vars)
    parts.extend(f"({h.name}: {render_relation(h.relation)})" for h in s.hyps)
    parts.append(f": {render_relation(s.goal)}")
    return " ".join(parts)


def statement_vars(s: Statement) -> dict[str, VarDecl]:
    return {v.name: v for v in s.vars}


def validate_statement(s: Statement, limits: Limits = DEFAULT_LIMITS) -> None:
    """Raise LanguageError unless the statement is closed and well-formed."""
    seen_vars: set[str] = set()
    for v in s.vars:
        if v.name in seen_vars:
            raise LanguageError(f"duplicate variable {v.name!r}")
        if v.lo > v.hi:
            raise LanguageError(f"empty domain for {v.name!r}: {v.lo}..{v.hi}")
        seen_vars.add(v.name)
    seen_hyps: set[str] = set()
    for h in s.hyps:
        if h.name in seen_hyps:
            raise LanguageError(f"duplicate hypothesis {h.name!r}")
        seen_hyps.add(h.name)
        validate_relation(h.relation, limits)
    validate_relation(s.goal, limits)
    used = free_vars(s.goal.lhs) | free_vars(s.goal.rhs)
    for h in s.hyps:
        used |= free_vars(h.relation.lhs) | free_vars(h.relation.rhs)
    undeclared = used - seen_vars
    if undeclared:
        raise LanguageError(f"undeclared variables: {sorted(undeclared)}")


def assignments(s: Statement, limits: Limits = DEFAULT_LIMITS) -> Iterator[dict[str, int]]:
    """Every assignment of the declared variables, in domain order."""
    total = 1
    for v in s.vars:
        total *= v.hi - v.lo + 1
        if total > limits.max_assignments:
            raise EnumerationLimitError(
                f"assignment space exceeds {limits.max_assignments} for {s.name!r}"
            )
    names = [v.name for v in s.vars]
    for values in itertools.product(*(v.domain() for v in s.vars)):
        yield dict(zip(names, values))


def decide_truth(s: Statement, limits: Limits = DEFAULT_LIMITS) -> bool:
    """True iff the goal holds under every assignment satisfying the hypotheses.

    Vacuously true when no assignment satisfies them.
    """
    for env in assignments(s, limits):
        if all(eval_relation(h.relation, env) for h in s.hyps):
            if not eval_relation(s.goal, env):
                return False
    return True


def clear_term_caches() -> None:
    """Release every memoized per-term and per-relation computation.

    Purely a memory valve: all the cached functions are deterministic, so
    clearing never changes a result, only the cost of recomputing it.
    """
    for cached in (
        render_term,
        node_count,
        term_depth,
        indexed_subterms,
        _node_fault,
        _relation_fault,
        statement_text,
    ):
        cached.cache_clear()
