"""Proof states and total tactics.

A proof state is Open (hypotheses, goal, variable domains), Empty
(proved), or Error.  Empty and Error are absorbing: every tactic maps
them to themselves.  Tactics are total functions on states — a tactic
that does not apply where requested yields Error rather than raising.

A proof is a tactic sequence; it verifies a statement when some prefix,
replayed from the compiled statement, reaches Empty.
"""

from __future__ import annotations

import functools
import re
from dataclasses import dataclass
from typing import Mapping, Union

from .rules import (
    DEFAULT_RULES,
    RewriteFailure,
    RewriteRule,
    clear_rule_caches,
    relation_sites,
    rewrite_relation,
)
from .terms import (
    DEFAULT_LIMITS,
    Hyp,
    LanguageError,
    Limits,
    Lit,
    Relation,
    Statement,
    Term,
    VarDecl,
    clear_term_caches,
    eval_relation,
    eval_term,
    indexed_subterms,
    is_ground,
    render_relation,
    replace_at,
    subterm_at,
    validate_relation,
)


@dataclass(frozen=True)
class ProofState:
    status: str  # "open", "empty", or "error"
    hyps: tuple[Relation, ...] = ()
    goal: Relation | None = None
    vars: tuple[VarDecl, ...] = ()

    def __hash__(self) -> int:
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((self.status, self.hyps, self.goal, self.vars))
            object.__setattr__(self, "_hash", h)
        return h

    def is_open(self) -> bool:
        return self.status == "open"


EMPTY = ProofState("empty")
ERROR = ProofState("error")


def Open(hyps: tuple[Relation, ...], goal: Relation, vars: tuple[VarDecl, ...]) -> ProofState:
    return ProofState("open", hyps, goal, vars)


def compile_statement(s: Statement) -> ProofState:
    """The initial state of a statement; drops the name, keeps everything else."""
    return Open(tuple(h.relation for h in s.hyps), s.goal, s.vars)


def decompile_state(state: ProofState, name: str = "t") -> Statement:
    if not state.is_open():
        raise LanguageError(f"cannot decompile a {state.status} state")
    hyps = tuple(Hyp(f"h{i}", r) for i, r in enumerate(state.hyps))
    assert state.goal is not None
    return Statement(name, state.vars, hyps, state.goal)


@functools.lru_cache(maxsize=1 << 18)
def state_text(state: ProofState) -> str:
    """Canonical name-free rendering; equal texts iff equal states."""
    if not state.is_open():
        return state.status
    parts = [f"({v.name}:{v.lo}..{v.hi})" for v in state.vars]
    parts.extend(f"(h{i}: {render_relation(r)})" for i, r in enumerate(state.hyps))
    assert state.goal is not None
    parts.append(f"|- {render_relation(state.goal)}")
    return " ".join(parts)


# --- tactics ----------------------------------------------------------------


@dataclass(frozen=True)
class RewriteGoal:
    rule_id: str
    direction: str
    side: str
    path: tuple[int, ...]


@dataclass(frozen=True)
class RewriteHyp:
    hyp: int
    rule_id: str
    direction: str
    side: str
    path: tuple[int, ...]


@dataclass(frozen=True)
class UseHyp:
    """Rewrite the goal with an equality hypothesis.

    fwd replaces an occurrence of the hypothesis' left side by its right
    side; bwd goes the other way.
    """

    hyp: int
    direction: str
    side: str
    path: tuple[int, ...]


@dataclass(frozen=True)
class CloseRefl:
    pass


@dataclass(frozen=True)
class CloseEval:
    pass


@dataclass(frozen=True)
class CloseHyp:
    hyp: int


@dataclass(frozen=True)
class Fold:
    pass


@dataclass(frozen=True)
class Skip:
    pass


Tactic = Union[RewriteGoal, RewriteHyp, UseHyp, CloseRefl, CloseEval, CloseHyp, Fold, Skip]
TacticSequence = tuple[Tactic, ...]


def _render_path(path: tuple[int, ...]) -> str:
    return "[" + ",".join(str(i) for i in path) + "]"


@functools.lru_cache(maxsize=None)
def render_tactic(t: Tactic) -> str:
    if isinstance(t, RewriteGoal):
        return f"rewrite_goal {t.rule_id} {t.direction} {t.side} {_render_path(t.path)}"
    if isinstance(t, RewriteHyp):
        return f"rewrite_hyp {t.hyp} {t.rule_id} {t.direction} {t.side} {_render_path(t.path)}"
    if isinstance(t, UseHyp):
        return f"use_hyp {t.hyp} {t.direction} {t.side} {_render_path(t.path)}"
    if isinstance(t, CloseRefl):
        return "close_refl"
    if isinstance(t, CloseEval):
        return "close_eval"
    if isinstance(t, CloseHyp):
        return f"close_hyp {t.hyp}"
    if isinstance(t, Fold):
        return "fold"
    if isinstance(t, Skip):
        return "skip"
    raise LanguageError(f"unknown tactic {t!r}")


def render_proof(proof: TacticSequence) -> str:
    return "; ".join(render_tactic(t) for t in proof)


_PATH_RE = re.compile(r"^\[(\d+(,\d+)*)?\]$")


def _parse_path(text: str) -> tuple[int, ...]:
    if not _PATH_RE.match(text):
        raise LanguageError(f"bad path {text!r}")
    inner = text[1:-1]
    return tuple(int(x) for x in inner.split(",")) if inner else ()


def parse_tactic(text: str) -> Tactic:
    words = text.split()
    if not words:
        raise LanguageError("empty tactic")
    head, rest = words[0], words[1:]
    try:
        if head == "rewrite_goal":
            return RewriteGoal(rest[0], rest[1], rest[2], _parse_path(rest[3]))
        if head == "rewrite_hyp":
            return RewriteHyp(int(rest[0]), rest[1], rest[2], rest[3], _parse_path(rest[4]))
        if head == "use_hyp":
            return UseHyp(int(rest[0]), rest[1], rest[2], _parse_path(rest[3]))
        if head == "close_refl" and not rest:
            return CloseRefl()
        if head == "close_eval" and not rest:
            return CloseEval()
        if head == "close_hyp":
            return CloseHyp(int(rest[0]))
        if head == "fold" and not rest:
            return Fold()
        if head == "skip" and not rest:
            return Skip()
    except (IndexError, ValueError) as e:
        raise LanguageError(f"bad tactic {text!r}") from e
    raise LanguageError(f"unknown tactic {text!r}")


def parse_proof(text: str) -> TacticSequence:
    text = text.strip()
    if not text:
        return ()
    return tuple(parse_tactic(part) for part in text.split(";"))


# --- applying tactics --------------------------------------------------------


class _Overflow(Exception):
    pass


def fold_ground(t: Term, limits: Limits) -> Term:
    """Replace every maximal ground subterm with its literal value."""
    if t.kind == "int" or not t.args:
        return t
    if is_ground(t):
        v = eval_term(t, {})
        if not (limits.literal_min <= v <= limits.literal_max):
            raise _Overflow()
        return Lit(v)
    return Term(t.kind, tuple(fold_ground(a, limits) for a in t.args), t.value)


def apply_tactic(
    state: ProofState,
    tactic: Tactic,
    rules: Mapping[str, RewriteRule] = DEFAULT_RULES,
    limits: Limits = DEFAULT_LIMITS,
) -> ProofState:
    """Total transition function; Empty and Error absorb every tactic."""
    if not state.is_open():
        return state
    goal = state.goal
    assert goal is not None

    if isinstance(tactic, Skip):
        return state

    if isinstance(tactic, RewriteGoal):
        rule = rules.get(tactic.rule_id)
        if rule is None:
            return ERROR
        try:
            new_goal = rewrite_relation(goal, rule, tactic.direction, tactic.side, tactic.path, limits)
        except RewriteFailure:
            return ERROR
        return Open(state.hyps, new_goal, state.vars)

    if isinstance(tactic, RewriteHyp):
        rule = rules.get(tactic.rule_id)
        if rule is None or not (0 <= tactic.hyp < len(state.hyps)):
            return ERROR
        try:
            new_hyp = rewrite_relation(
                state.hyps[tactic.hyp], rule, tactic.direction, tactic.side, tactic.path, limits
            )
        except RewriteFailure:
            return ERROR
        hyps = list(state.hyps)
        hyps[tactic.hyp] = new_hyp
        return Open(tuple(hyps), goal, state.vars)

    if isinstance(tactic, UseHyp):
        if not (0 <= tactic.hyp < len(state.hyps)):
            return ERROR
        h = state.hyps[tactic.hyp]
        if h.kind != "eq" or tactic.direction not in ("fwd", "bwd") or tactic.side not in ("lhs", "rhs"):
            return ERROR
        src, dst = (h.lhs, h.rhs) if tactic.direction == "fwd" else (h.rhs, h.lhs)
        target = goal.lhs if tactic.side == "lhs" else goal.rhs
        try:
            if subterm_at(target, tactic.path) != src:
                return ERROR
            new_side = replace_at(target, tactic.path, dst)
        except LanguageError:
            return ERROR
        new_goal = (
            Relation(goal.kind, new_side, goal.rhs)
            if tactic.side == "lhs"
            else Relation(goal.kind, goal.lhs, new_side)
        )
        try:
            validate_relation(new_goal, limits)
        except LanguageError:
            return ERROR
        return Open(state.hyps, new_goal, state.vars)

    if isinstance(tactic, CloseRefl):
        if goal.kind == "eq" and goal.lhs == goal.rhs:
            return EMPTY
        return ERROR

    if isinstance(tactic, CloseEval):
        if is_ground(goal.lhs) and is_ground(goal.rhs) and eval_relation(goal, {}):
            return EMPTY
        return ERROR

    if isinstance(tactic, CloseHyp):
        if 0 <= tactic.hyp < len(state.hyps) and state.hyps[tactic.hyp] == goal:
            return EMPTY
        return ERROR

    if isinstance(tactic, Fold):
        try:
            new_goal = Relation(goal.kind, fold_ground(goal.lhs, limits), fold_ground(goal.rhs, limits))
        except _Overflow:
            return ERROR
        return Open(state.hyps, new_goal, state.vars)

    return ERROR


def run_proof(
    s: Statement,
    proof: TacticSequence,
    rules: Mapping[str, RewriteRule] = DEFAULT_RULES,
    limits: Limits = DEFAULT_LIMITS,
) -> list[ProofState]:
    """The state trace of a proof, starting at the compiled statement."""
    state = compile_statement(s)
    trace = [state]
    for t in proof:
        state = apply_tactic(state, t, rules, limits)
        trace.append(state)
    return trace


def verify_proof(
    s: Statement,
    proof: TacticSequence,
    rules: Mapping[str, RewriteRule] = DEFAULT_RULES,
    limits: Limits = DEFAULT_LIMITS,
) -> bool:
    """True iff some prefix of the proof reaches Empty from the statement."""
    state = compile_statement(s)
    for t in proof:
        state = apply_tactic(state, t, rules, limits)
        if state.status == "empty":
            return True
    return state.status == "empty"


# --- tactic enumeration -------------------------------------------------------


def enumerate_tactics(
    state: ProofState,
    rules: Mapping[str, RewriteRule] = DEFAULT_RULES,
    limits: Limits = DEFAULT_LIMITS,
) -> list[Tactic]:
    """Every tactic that applies to the state without producing Error, plus Skip.

    On Empty and Error only Skip remains.  Fold is listed only when it
    would actually change the goal.  The listing is deterministic: sorted
    by rendered tactic text.
    """
    if not state.is_open():
        return [Skip()]
    goal = state.goal
    assert goal is not None
    found: list[Tactic] = [Skip()]

    for rule_id, rule in rules.items():
        for direction in ("fwd", "bwd") if rule.bidirectional else ("fwd",):
            for side, path, _ in relation_sites(goal, rule, direction, limits):
                found.append(RewriteGoal(rule_id, direction, side, path))
            for i, h in enumerate(state.hyps):
                for side, path, _ in relation_sites(h, rule, direction, limits):
                    found.append(RewriteHyp(i, rule_id, direction, side, path))

    for i, h in enumerate(state.hyps):
        if h.kind != "eq":
            continue
        for direction in ("fwd", "bwd"):
            src = h.lhs if direction == "fwd" else h.rhs
            for side, target in (("lhs", goal.lhs), ("rhs", goal.rhs)):
                for path, sub in indexed_subterms(target):
                    if sub != src:
                        continue
                    t = UseHyp(i, direction, side, path)
                    if apply_tactic(state, t, rules, limits).status != "error":
                        found.append(t)

    if goal.kind == "eq" and goal.lhs == goal.rhs:
        found.append(CloseRefl())
    if is_ground(goal.lhs) and is_ground(goal.rhs) and eval_relation(goal, {}):
        found.append(CloseEval())
    for i, h in enumerate(state.hyps):
        if h == goal:
            found.append(CloseHyp(i))
    folded = apply_tactic(state, Fold(), rules, limits)
    if folded.is_open() and folded.goal != goal:
        found.append(Fold())

    return sorted(found, key=render_tactic)


def clear_language_caches() -> None:
    """Release every package-level memo table (terms, rules, renderings).

    Long studies walk very many distinct statements; dropping the tables
    between independent work items keeps memory flat without changing any
    result, since everything cached is a pure function.
    """
    clear_term_caches()
    clear_rule_caches()
    state_text.cache_clear()
    render_tactic.cache_clear()
