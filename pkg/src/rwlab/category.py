"""Statements connected by semantics-preserving rewrites.

An arrow records an ordered list of rewrite steps from a source statement
to a destination statement; replaying the steps from the source always
reproduces the destination, and every step preserves decidable truth.
Arrows compose by concatenation; when every step is invertible (all rules
bidirectional), reversing the steps and flipping their directions gives
the inverse arrow.

Steps are either rule applications (a rewrite rule at a site inside the
goal or a hypothesis) or hypothesis rewrites (the goal rewritten with an
equality hypothesis).  Each step maps one-for-one onto a tactic, so a
proof of the destination lifts to a proof of the source by prepending the
realized steps.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Iterator, Mapping, Union

from .rules import DEFAULT_RULES, RewriteFailure, RewriteRule, iter_relation_sites, rewrite_relation
from .states import RewriteGoal, RewriteHyp, Tactic, TacticSequence, UseHyp, apply_tactic, compile_statement
from .terms import (
    DEFAULT_LIMITS,
    Hyp,
    Limits,
    Relation,
    Statement,
    node_count,
    statement_text,
    term_depth,
)

DEFAULT_CLASS_CAP = 10_000


class ApplyError(Exception):
    """A rewrite step does not apply to a statement."""

    def __init__(self, reason: str, detail: str = ""):
        super().__init__(f"{reason}: {detail}" if detail else reason)
        self.reason = reason


class CompositionError(Exception):
    pass


class InversionError(Exception):
    pass


class ClassSizeError(Exception):
    pass


class LiftError(Exception):
    pass


@dataclass(frozen=True)
class RuleApplication:
    """One rewrite-rule step: rule and direction, applied at a site of the
    goal (target="goal") or of hypothesis `hyp` (target="hyp")."""

    rule_id: str
    direction: str
    target: str
    hyp: int = 0
    side: str = "lhs"
    path: tuple[int, ...] = ()


@dataclass(frozen=True)
class HypRewrite:
    """A goal rewrite that cites equality hypothesis `hyp` instead of a rule."""

    hyp: int
    direction: str
    side: str
    path: tuple[int, ...]


Step = Union[RuleApplication, HypRewrite]


def render_step(step: Step) -> str:
    path = "[" + ",".join(str(i) for i in step.path) + "]"
    if isinstance(step, RuleApplication):
        where = "goal" if step.target == "goal" else f"hyp {step.hyp}"
        return f"apply {step.rule_id} {step.direction} {where} {step.side} {path}"
    return f"use {step.hyp} {step.direction} {step.side} {path}"


@dataclass(frozen=True)
class Arrow:
    src: Statement
    dst: Statement
    steps: tuple[Step, ...]

    def __len__(self) -> int:
        return len(self.steps)


def relation_size(rel: Relation) -> int:
    return node_count(rel.lhs) + node_count(rel.rhs)


def relation_depth(rel: Relation) -> int:
    return max(term_depth(rel.lhs), term_depth(rel.rhs))


def statement_size(s: Statement) -> int:
    return relation_size(s.goal) + sum(relation_size(h.relation) for h in s.hyps)


def realize_step(step: Step) -> Tactic:
    if isinstance(step, RuleApplication):
        if step.target == "goal":
            return RewriteGoal(step.rule_id, step.direction, step.side, step.path)
        if step.target == "hyp":
            return RewriteHyp(step.hyp, step.rule_id, step.direction, step.side, step.path)
        raise LiftError(f"unknown step target {step.target!r}")
    return UseHyp(step.hyp, step.direction, step.side, step.path)


def invert_step(step: Step) -> Step:
    flipped = "bwd" if step.direction == "fwd" else "fwd"
    return dataclasses.replace(step, direction=flipped)


class RewritingCategory:
    """A rule set plus structural limits, with arrows between statements.

    growth="strict" makes neighbor enumeration discard rewrites whose
    rewritten relation gets deeper or larger than it was; "loose" keeps
    everything within the absolute limits.  Replaying recorded arrows only
    ever enforces the absolute limits, so composition and inversion are
    unaffected by the growth filter.
    """

    def __init__(
        self,
        rules: Mapping[str, RewriteRule] = DEFAULT_RULES,
        limits: Limits = DEFAULT_LIMITS,
        growth: str = "strict",
        class_cap: int = DEFAULT_CLASS_CAP,
    ):
        if growth not in ("strict", "loose"):
            raise ValueError(f"unknown growth mode {growth!r}")
        self.rules = dict(rules)
        self.limits = limits
        self.growth = growth
        self.class_cap = class_cap

    # --- single steps ------------------------------------------------------

    def apply_step(self, s: Statement, step: Step) -> Statement:
        """Apply one step, or raise ApplyError.  Absolute limits only."""
        if isinstance(step, RuleApplication):
            rule = self.rules.get(step.rule_id)
            if rule is None:
                raise ApplyError("unknown-rule", step.rule_id)
            if step.target == "goal":
                new_goal = self._rewrite(s.goal, rule, step)
                return dataclasses.replace(s, goal=new_goal)
            if step.target == "hyp":
                if not (0 <= step.hyp < len(s.hyps)):
                    raise ApplyError("position", f"no hypothesis {step.hyp}")
                old = s.hyps[step.hyp]
                new_rel = self._rewrite(old.relation, rule, step)
                hyps = list(s.hyps)
                hyps[step.hyp] = Hyp(old.name, new_rel)
                return dataclasses.replace(s, hyps=tuple(hyps))
            raise ApplyError("position", f"unknown target {step.target!r}")
        # Hypothesis rewrite: same semantics as the UseHyp tactic.
        state = apply_tactic(compile_statement(s), realize_step(step), {}, self.limits)
        if state.status != "open":
            raise ApplyError("no-match", render_step(step))
        assert state.goal is not None
        return dataclasses.replace(s, goal=state.goal)

    def _rewrite(self, rel: Relation, rule: RewriteRule, step: RuleApplication) -> Relation:
        try:
            return rewrite_relation(rel, rule, step.direction, step.side, step.path, self.limits)
        except RewriteFailure as e:
            raise ApplyError(e.reason, render_step(step)) from e

    # --- arrows --------------------------------------------------------------

    def arrow(self, src: Statement, steps: tuple[Step, ...] | list[Step]) -> Arrow:
        """Build an arrow by replaying steps from src."""
        here = src
        for step in steps:
            here = self.apply_step(here, step)
        return Arrow(src, here, tuple(steps))

    def identity(self, s: Statement) -> Arrow:
        return Arrow(s, s, ())

    def compose(self, a: Arrow, b: Arrow) -> Arrow:
        """First a, then b; defined when a ends where b starts."""
        if statement_text(a.dst) != statement_text(b.src):
            raise CompositionError(
                f"cannot compose: {statement_text(a.dst)!r} != {statement_text(b.src)!r}"
            )
        return Arrow(a.src, b.dst, a.steps + b.steps)

    def invert(self, a: Arrow) -> Arrow:
        for step in a.steps:
            if isinstance(step, RuleApplication):
                rule = self.rules.get(step.rule_id)
                if rule is None or not rule.bidirectional:
                    raise InversionError(f"step not invertible: {render_step(step)}")
        steps = tuple(invert_step(s) for s in reversed(a.steps))
        out = self.arrow(a.dst, steps)
        if statement_text(out.dst) != statement_text(a.src):
            raise InversionError("inverse replay did not return to the source")
        return out

    def realize(self, a: Arrow) -> TacticSequence:
        return tuple(realize_step(s) for s in a.steps)

    def lift_proof(self, a: Arrow, proof: TacticSequence) -> TacticSequence:
        """Turn a proof of a.dst into a proof of a.src."""
        return self.realize(a) + tuple(proof)

    # --- neighborhoods --------------------------------------------------------

    def expansions(self, s: Statement) -> Iterator[tuple[RuleApplication, Statement]]:
        """Every valid single rule application, with its result.

        Deterministic order: rules in table order, fwd before bwd, goal
        before hypotheses, left side before right, positions preorder.
        Honors the growth mode.
        """
        targets = [("goal", 0, s.goal)] + [("hyp", i, h.relation) for i, h in enumerate(s.hyps)]
        for rule_id, rule in self.rules.items():
            for direction in ("fwd", "bwd") if rule.bidirectional else ("fwd",):
                for target, hyp_i, rel in targets:
                    for side, path, new_rel in iter_relation_sites(rel, rule, direction, self.limits):
                        if self.growth == "strict" and (
                            relation_size(new_rel) > relation_size(rel)
                            or relation_depth(new_rel) > relation_depth(rel)
                        ):
                            continue
                        step = RuleApplication(rule_id, direction, target, hyp_i, side, path)
                        if target == "goal":
                            yield step, dataclasses.replace(s, goal=new_rel)
                        else:
                            hyps = list(s.hyps)
                            hyps[hyp_i] = Hyp(hyps[hyp_i].name, new_rel)
                            yield step, dataclasses.replace(s, hyps=tuple(hyps))

    def neighbors(self, s: Statement, breadth: int | None = None) -> list[Statement]:
        """Distinct single-step rewrites of s, ranked small-and-lexicographic.

        Results equal to s itself are dropped, duplicates keep one entry,
        and the list is cut to `breadth` best when given.
        """
        return [t for _, t in self.neighbor_arrows(s, breadth)]

    def neighbor_arrows(
        self, s: Statement, breadth: int | None = None
    ) -> list[tuple[RuleApplication, Statement]]:
        own = statement_text(s)
        seen: dict[str, tuple[RuleApplication, Statement]] = {}
        for step, result in self.expansions(s):
            text = statement_text(result)
            if text == own or text in seen:
                continue
            seen[text] = (step, result)
        ranked = sorted(seen.items(), key=lambda kv: (statement_size(kv[1][1]), kv[0]))
        out = [kv[1] for kv in ranked]
        if breadth is not None:
            out = out[:breadth]
        return out

    # --- equivalence classes ----------------------------------------------------

    def class_with_arrows(self, seed: Statement, depth: int) -> "ClassResult":
        """BFS closure of neighbors to the given depth, with an arrow per member."""
        seed_text = statement_text(seed)
        arrows: dict[str, Arrow] = {seed_text: self.identity(seed)}
        members = [seed]
        frontier = [seed]
        closed = False
        for _ in range(depth):
            if not frontier:
                closed = True
                break
            next_frontier: list[Statement] = []
            for stmt in frontier:
                base = arrows[statement_text(stmt)]
                for step, result in self.expansions(stmt):
                    text = statement_text(result)
                    if text in arrows:
                        continue
                    if len(arrows) >= self.class_cap:
                        raise ClassSizeError(f"class of {seed.name!r} exceeds {self.class_cap} members")
                    arrows[text] = Arrow(seed, result, base.steps + (step,))
                    members.append(result)
                    next_frontier.append(result)
            frontier = next_frontier
        if not frontier:
            closed = True
        return ClassResult(seed, members, arrows, closed)

    def equivalence_class(self, seed: Statement, depth: int) -> list[Statement]:
        """All statements reachable from seed in at most `depth` rewrites."""
        return self.class_with_arrows(seed, depth).members


@dataclass
class ClassResult:
    seed: Statement
    members: list[Statement]  # BFS discovery order; seed first
    arrows: dict[str, Arrow]  # canonical text -> arrow from seed
    closed: bool  # True when the BFS saturated before the depth ran out

    def arrow_to(self, member: Statement) -> Arrow:
        return self.arrows[statement_text(member)]
