"""Synthetic statement corpora, true by construction.

Every generated statement starts from a core that is true for a structural
reason — a reflexive goal, a goal that repeats a hypothesis, a ground
identity, or a goal made reflexive by substituting along an equality
hypothesis — then gets dressed up with extra random hypotheses and a short
chain of random semantics-preserving rewrites.  Extra hypotheses only
restrict the assignments that matter and rewrites preserve decidable
truth, so the result stays true; the generator still checks each one by
enumeration before emitting it.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from . import rng as rnglib
from .category import RewritingCategory
from .terms import (
    DEFAULT_LIMITS,
    Hyp,
    Limits,
    Lit,
    Mul,
    Neg,
    Pow,
    Relation,
    Statement,
    Term,
    Var,
    VarDecl,
    decide_truth,
    eval_term,
    free_vars,
    is_ground,
    positions,
    replace_at,
    statement_text,
    subterm_at,
    validate_statement,
)

FAMILIES = ("refl", "hyp", "ground", "subst")


@dataclass(frozen=True)
class CorpusConfig:
    size: int = 200
    seed: int = 0
    name_prefix: str = "t"
    max_extra_hyps: int = 2
    max_disguise: int = 2


def _random_term(rand: random.Random, var_names: list[str], depth: int) -> Term:
    """A small random term over the given variables."""
    if depth <= 0 or rand.random() < 0.35:
        if var_names and rand.random() < 0.6:
            return Var(rand.choice(var_names))
        return Lit(rand.randint(0, 9))
    roll = rand.random()
    if roll < 0.42:
        return Term("add", (_random_term(rand, var_names, depth - 1), _random_term(rand, var_names, depth - 1)))
    if roll < 0.62:
        return Term("sub", (_random_term(rand, var_names, depth - 1), _random_term(rand, var_names, depth - 1)))
    if roll < 0.88:
        return Mul(_random_term(rand, var_names, depth - 1), _random_term(rand, var_names, depth - 1))
    if roll < 0.95:
        return Neg(_random_term(rand, var_names, depth - 1))
    return Pow(_random_term(rand, var_names, depth - 1), rand.randint(1, 2))


def _random_relation(rand: random.Random, var_names: list[str]) -> Relation:
    kind = rand.choices(["eq", "le", "lt"], weights=[0.6, 0.25, 0.15])[0]
    return Relation(kind, _random_term(rand, var_names, 2), _random_term(rand, var_names, 2))


def _core_statement(rand: random.Random, name: str) -> Statement:
    """A statement that is true before any disguise is applied."""
    n_vars = rand.randint(1, 2)
    var_names = [chr(ord("x") + i) for i in range(n_vars)]
    decls = tuple(VarDecl(v, 0, rand.choice([3, 7])) for v in var_names)
    family = rand.choice(FAMILIES)

    if family == "refl":
        t = _random_term(rand, var_names, 2)
        return Statement(name, decls, (), Relation("eq", t, t))

    if family == "hyp":
        rel = _random_relation(rand, var_names)
        return Statement(name, decls, (Hyp("h0", rel),), rel)

    if family == "ground":
        t = _random_term(rand, [], 2)
        value = eval_term(t, {})
        if rand.random() < 0.7:
            goal = Relation("eq", t, Lit(value))
        else:
            goal = Relation("le", t, Lit(value + rand.randint(0, 3)))
        return Statement(name, decls, (), goal)

    # subst: goal is a reflexive equation with one occurrence replaced by a
    # fresh term, justified by an equality hypothesis.
    t = _random_term(rand, var_names, 2)
    spots = list(positions(t))
    path = rand.choice(spots)
    original = subterm_at(t, path)
    replacement = _random_term(rand, var_names, 1)
    lhs = replace_at(t, path, replacement)
    hyp = Hyp("h0", Relation("eq", replacement, original))
    return Statement(name, decls, (hyp,), Relation("eq", lhs, t))


def _add_extra_hyps(rand: random.Random, s: Statement, cfg: CorpusConfig) -> Statement:
    extra = rand.randint(0, cfg.max_extra_hyps)
    if not extra:
        return s
    var_names = [v.name for v in s.vars]
    hyps = list(s.hyps)
    for _ in range(extra):
        hyps.append(Hyp(f"h{len(hyps)}", _random_relation(rand, var_names)))
    return Statement(s.name, s.vars, tuple(hyps), s.goal)


def _disguise(rand: random.Random, s: Statement, category: RewritingCategory, cfg: CorpusConfig) -> Statement:
    for _ in range(rand.randint(0, cfg.max_disguise)):
        options = list(category.expansions(s))
        if not options:
            break
        _, s = rand.choice(options)
    return s


def generate_statement(
    name: str, rand: random.Random, category: RewritingCategory, cfg: CorpusConfig
) -> Statement:
    s = _core_statement(rand, name)
    s = _add_extra_hyps(rand, s, cfg)
    s = _disguise(rand, s, category, cfg)
    validate_statement(s, category.limits)
    return s


def generate_corpus(cfg: CorpusConfig, category: RewritingCategory | None = None) -> list[Statement]:
    """cfg.size statements, each verified true by enumeration before emission.

    Deterministic in cfg.seed: statement i draws from its own child stream,
    so corpora are stable under re-runs and extensions.
    """
    cat = category or RewritingCategory()
    out: list[Statement] = []
    seen: set[str] = set()
    i = 0
    attempt = 0
    while len(out) < cfg.size:
        name = f"{cfg.name_prefix}{i:04d}"
        rand = rnglib.child_rng(cfg.seed, "corpus", i, attempt)
        s = generate_statement(name, rand, cat, cfg)
        attempt += 1
        if statement_text(s).split(" ", 2)[2] in seen:
            continue  # body duplicate; redraw with the same name
        if not decide_truth(s, cat.limits):
            raise AssertionError(f"generator produced a false statement: {statement_text(s)}")
        seen.add(statement_text(s).split(" ", 2)[2])
        out.append(s)
        i += 1
        attempt = 0
    return out


def save_corpus(path: str, statements: list[Statement], header: str = "") -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            for line in header.splitlines():
                fh.write(f"# {line}\n")
        for s in statements:
            fh.write(statement_text(s) + "\n")
