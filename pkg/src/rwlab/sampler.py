"""Sampling rewritten variants of a statement.

Variants are produced in three stages.  Explore rewrites each part of the
statement (every hypothesis, and the goal) independently: per part, the
top-b single-step rewrites, recursively to depth d, filtered so candidate
relations never outgrow the one being rewritten (in strict mode) and
deduplicated.  Combine then draws one variant index per part — index i
gets weight proportional to 1/(i+1), where index 0 is the unrewritten
part — and assembles the chosen parts into a statement together with the
arrow that replays the per-part rewrites in part order (hypotheses first,
then the goal).  Select scores every distinct candidate with a surprise
model (average negative log-likelihood per token under a small n-gram
model of the corpus), sorts ascending — least surprising first, canonical
text breaking ties — and keeps K of them, by default the seed plus the
K-1 best others.

An exhaustive sampler is also provided: uniform draws without replacement
from the whole bounded-depth equivalence class, for studies that need
full coverage rather than a heuristic pool.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from typing import Iterable, Mapping

from . import rng as rnglib
from .category import Arrow, RewritingCategory, RuleApplication, relation_depth, relation_size, render_step
from .parser import tokenize
from .rules import iter_relation_sites
from .terms import Relation, Statement, render_relation, statement_text

DEFAULT_BREADTH = 15
DEFAULT_DEPTH = 2
DEFAULT_DRAWS = 20
DEFAULT_KEEP = 8


@dataclass(frozen=True)
class SamplerConfig:
    breadth: int = DEFAULT_BREADTH
    depth: int = DEFAULT_DEPTH
    draws: int = DEFAULT_DRAWS
    keep: int = DEFAULT_KEEP
    include_seed: bool = True
    growth: str = "strict"
    seed: int = 0


@dataclass(frozen=True)
class PartVariant:
    """One rewritten version of a single part, with the steps that made it."""

    relation: Relation
    steps: tuple[RuleApplication, ...]


@dataclass(frozen=True)
class VariantEntry:
    statement: Statement
    arrow: Arrow
    surprise: float | None = None


@dataclass(frozen=True)
class VariantSet:
    seed: Statement
    entries: tuple[VariantEntry, ...]
    short: bool = False

    def statements(self) -> list[Statement]:
        return [e.statement for e in self.entries]


def _part_category(category: RewritingCategory, cfg: SamplerConfig) -> RewritingCategory:
    if category.growth == cfg.growth:
        return category
    return RewritingCategory(category.rules, category.limits, cfg.growth, category.class_cap)


def explore(
    category: RewritingCategory, s: Statement, cfg: SamplerConfig
) -> dict[tuple[str, int], list[PartVariant]]:
    """Ranked rewrite variants per part, keyed by ("hyp", i) / ("goal", 0).

    Breadth-first to cfg.depth; each expansion keeps its cfg.breadth best
    single-step rewrites (smaller relation first, text as tiebreak); the
    original part is not listed (it is index 0 implicitly).
    """
    cat = _part_category(category, cfg)
    parts: list[tuple[tuple[str, int], Relation]] = [
        (("hyp", i), h.relation) for i, h in enumerate(s.hyps)
    ]
    parts.append((("goal", 0), s.goal))

    out: dict[tuple[str, int], list[PartVariant]] = {}
    for (kind, idx), original in parts:
        target = "goal" if kind == "goal" else "hyp"
        seen: dict[str, PartVariant] = {render_relation(original): PartVariant(original, ())}
        ranked: list[PartVariant] = []
        frontier: list[PartVariant] = [seen[render_relation(original)]]
        for _ in range(cfg.depth):
            next_frontier: list[PartVariant] = []
            for pv in frontier:
                batch: list[tuple[int, str, PartVariant]] = []
                for step, new_rel in _expand_relation(cat, pv.relation, target, idx):
                    text = render_relation(new_rel)
                    if text in seen:
                        continue
                    batch.append((relation_size(new_rel), text, PartVariant(new_rel, pv.steps + (step,))))
                batch.sort(key=lambda row: (row[0], row[1]))
                for _, text, candidate in batch[: cfg.breadth]:
                    if text in seen:
                        continue
                    seen[text] = candidate
                    ranked.append(candidate)
                    next_frontier.append(candidate)
            frontier = next_frontier
        out[(kind, idx)] = ranked
    return out


def _expand_relation(
    category: RewritingCategory, rel: Relation, target: str, hyp_i: int
) -> Iterable[tuple[RuleApplication, Relation]]:
    """Single-step rewrites of one relation, tagged for the owning part."""
    for rule_id, rule in category.rules.items():
        for direction in ("fwd", "bwd") if rule.bidirectional else ("fwd",):
            for side, path, new_rel in iter_relation_sites(rel, rule, direction, category.limits):
                if category.growth == "strict" and (
                    relation_size(new_rel) > relation_size(rel)
                    or relation_depth(new_rel) > relation_depth(rel)
                ):
                    continue
                yield RuleApplication(rule_id, direction, target, hyp_i, side, path), new_rel


def _assemble(
    category: RewritingCategory,
    s: Statement,
    chosen: Mapping[tuple[str, int], PartVariant | None],
) -> tuple[Statement, Arrow]:
    """Build the combined statement and its replayed arrow from the seed."""
    steps: list[RuleApplication] = []
    for i in range(len(s.hyps)):
        pv = chosen.get(("hyp", i))
        if pv is not None:
            steps.extend(pv.steps)
    pv = chosen.get(("goal", 0))
    if pv is not None:
        steps.extend(pv.steps)
    arrow = category.arrow(s, tuple(steps))
    return arrow.dst, arrow


def combine(
    category: RewritingCategory,
    s: Statement,
    parts: Mapping[tuple[str, int], list[PartVariant]],
    cfg: SamplerConfig,
    rand: random.Random,
) -> list[tuple[Statement, Arrow]]:
    """cfg.draws weighted draws over per-part variant indices, deduplicated.

    Index i in 0..n per part carries weight 1/(i+1) (0 = leave the part
    alone); a draw of all zeros reproduces the seed with the identity arrow.
    """
    keys = [("hyp", i) for i in range(len(s.hyps))] + [("goal", 0)]
    weights: dict[tuple[str, int], list[float]] = {}
    for key in keys:
        n = len(parts.get(key, []))
        raw = [1.0 / (i + 1) for i in range(n + 1)]
        total = sum(raw)
        weights[key] = [w / total for w in raw]

    out: dict[str, tuple[Statement, Arrow]] = {}
    for _ in range(cfg.draws):
        chosen: dict[tuple[str, int], PartVariant | None] = {}
        for key in keys:
            probs = weights[key]
            r = rand.random()
            acc = 0.0
            pick = len(probs) - 1
            for i, p in enumerate(probs):
                acc += p
                if r < acc:
                    pick = i
                    break
            chosen[key] = None if pick == 0 else parts[key][pick - 1]
        stmt, arrow = _assemble(category, s, chosen)
        out.setdefault(statement_text(stmt), (stmt, arrow))
    return list(out.values())


# --- surprise -----------------------------------------------------------------


def statement_tokens(s: Statement) -> list[str]:
    """Token stream of the statement body (name left out, it is arbitrary)."""
    body = statement_text(s).split(" ", 2)[2]
    return [t.text for t in tokenize(body)[:-1]]


class SurpriseModel:
    """Additively smoothed n-gram scorer over statement-body tokens.

    The score of a statement is the average negative log-likelihood per
    token.  An untrained model with vocabulary size V scores every
    statement exactly log V per token.
    """

    BOS = "<s>"
    UNK = "<unk>"

    def __init__(self, order: int = 3, alpha: float = 0.1, vocab: Iterable[str] = ()):
        if order < 1:
            raise ValueError("order must be at least 1")
        if alpha <= 0:
            raise ValueError("smoothing must be positive")
        self.order = order
        self.alpha = alpha
        self.vocab = sorted(set(vocab) | {self.UNK})
        self._vocab_set = set(self.vocab)
        self.counts: dict[tuple[str, ...], dict[str, int]] = {}

    def train(self, corpus: Iterable[Statement]) -> "SurpriseModel":
        tokens_per = [statement_tokens(s) for s in corpus]
        for toks in tokens_per:
            self._vocab_set.update(toks)
        self.vocab = sorted(self._vocab_set | {self.UNK})
        self._vocab_set = set(self.vocab)
        for toks in tokens_per:
            padded = [self.BOS] * (self.order - 1) + toks
            for i in range(self.order - 1, len(padded)):
                ctx = tuple(padded[i - self.order + 1 : i])
                slot = self.counts.setdefault(ctx, {})
                slot[padded[i]] = slot.get(padded[i], 0) + 1
        return self

    def _norm(self, token: str) -> str:
        return token if token in self._vocab_set else self.UNK

    def log_prob(self, context: tuple[str, ...], token: str) -> float:
        v = len(self.vocab)
        slot = self.counts.get(context, {})
        token = self._norm(token)
        num = slot.get(token, 0) + self.alpha
        den = sum(slot.values()) + self.alpha * v
        return math.log(num / den)

    def score(self, s: Statement) -> float:
        toks = statement_tokens(s)
        if not toks:
            return 0.0
        padded = [self.BOS] * (self.order - 1) + [self._norm(t) for t in toks]
        total = 0.0
        for i in range(self.order - 1, len(padded)):
            total += self.log_prob(tuple(padded[i - self.order + 1 : i]), padded[i])
        return -total / len(toks)

    def to_dict(self) -> dict:
        return {
            "version": 1,
            "order": self.order,
            "alpha": self.alpha,
            "vocab": list(self.vocab),
            "counts": {" ".join(ctx): dict(sorted(slot.items())) for ctx, slot in sorted(self.counts.items())},
        }

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True, indent=1)

    @classmethod
    def from_dict(cls, data: Mapping) -> "SurpriseModel":
        if data.get("version") != 1:
            raise ValueError(f"unsupported surprise model version {data.get('version')!r}")
        model = cls(int(data["order"]), float(data["alpha"]), data["vocab"])
        model.counts = {
            tuple(ctx.split(" ")) if ctx else (): {t: int(n) for t, n in slot.items()}
            for ctx, slot in data["counts"].items()
        }
        return model

    @classmethod
    def load(cls, path: str) -> "SurpriseModel":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def surprise(model: SurpriseModel, s: Statement) -> float:
    return model.score(s)


# --- selection ------------------------------------------------------------------


def select(
    category: RewritingCategory,
    s: Statement,
    cfg: SamplerConfig,
    model: SurpriseModel,
) -> VariantSet:
    """Explore, combine, score, and keep cfg.keep variants.

    With include_seed the seed occupies the first slot and the K-1 least
    surprising distinct non-seed candidates follow; otherwise the K least
    surprising candidates are kept.  Deterministic given cfg.seed.
    """
    rand = rnglib.child_rng(cfg.seed, "select", statement_text(s))
    parts = explore(category, s, cfg)
    candidates = combine(category, s, parts, cfg, rand)
    seed_text = statement_text(s)
    scored = [
        VariantEntry(stmt, arrow, model.score(stmt))
        for stmt, arrow in candidates
        if statement_text(stmt) != seed_text
    ]
    scored.sort(key=lambda e: (e.surprise, statement_text(e.statement)))

    entries: list[VariantEntry]
    if cfg.include_seed:
        entries = [VariantEntry(s, category.identity(s), model.score(s))]
        entries.extend(scored[: max(cfg.keep - 1, 0)])
    else:
        entries = list(scored[: cfg.keep])
    return VariantSet(s, tuple(entries), short=len(entries) < cfg.keep)


def exhaustive_sample(
    category: RewritingCategory,
    s: Statement,
    keep: int,
    depth: int,
    rand: random.Random,
    include_seed: bool = False,
) -> VariantSet:
    """Uniform draws without replacement from the bounded-depth class.

    keep >= class size returns the whole class.  With include_seed the
    seed always takes the first slot and the rest are drawn uniformly
    from the other members.
    """
    result = category.class_with_arrows(s, depth)
    ordered = sorted(result.members, key=statement_text)
    texts = {statement_text(m): m for m in ordered}
    seed_text = statement_text(s)

    if include_seed:
        others = [m for m in ordered if statement_text(m) != seed_text]
        take = min(max(keep - 1, 0), len(others))
        picked = [s] + (rand.sample(others, take) if take else [])
    else:
        take = min(keep, len(ordered))
        picked = rand.sample(ordered, take) if take < len(ordered) else list(ordered)

    entries = tuple(
        VariantEntry(m, result.arrows[statement_text(m)], None) for m in picked
    )
    return VariantSet(s, entries, short=len(entries) < keep)


def variant_set_to_dict(vs: VariantSet) -> dict:
    """JSON-ready rendering used for run artifacts and golden files."""
    return {
        "seed": statement_text(vs.seed),
        "short": vs.short,
        "entries": [
            {
                "statement": statement_text(e.statement),
                "steps": [render_step(step) for step in e.arrow.steps],
                "surprise": e.surprise,
            }
            for e in vs.entries
        ],
    }
