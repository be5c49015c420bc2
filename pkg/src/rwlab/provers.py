"""Provers: sampleable distributions over fixed-length tactic sequences.

A menu prover draws, at each of exactly L steps, one tactic from a finite
weighted menu (every applicable tactic plus skip, each with positive
probability after smoothing).  A sampled sequence proves the statement if
some prefix of it reaches the Empty state.

Two menu provers ship here.  The text-conditioned prover computes one menu
from the statement it was handed and samples all L steps from it, so its
sequence distribution depends on the surface form of the statement and on
nothing else.  The next-tactic prover recomputes the menu from the current
proof state at every step, so the distribution it induces is a product of
per-state factors; statements with equal compiled states get identical
distributions, exactly.

The synthetic prover does not produce tactic sequences at all: it is a
stand-in success oracle (hash- or table-valued success probability) used
to exercise ensemble mathematics at scale.
"""

from __future__ import annotations

import math
import random
from typing import Mapping, Sequence

from . import rng as rnglib
from .distributions import ProofDistribution
from .rules import DEFAULT_RULES, RewriteRule
from .states import (
    CloseEval,
    CloseHyp,
    CloseRefl,
    Fold,
    ProofState,
    RewriteGoal,
    RewriteHyp,
    Skip,
    Tactic,
    TacticSequence,
    UseHyp,
    apply_tactic,
    compile_statement,
    enumerate_tactics,
    render_tactic,
    state_text,
    verify_proof,
)
from .terms import DEFAULT_LIMITS, Limits, Statement, statement_text

DEFAULT_PROOF_LEN = 3
DEFAULT_EPSILON = 1e-6
DEFAULT_ENUMERATION_BOUND = 10**7

Menu = list[tuple[Tactic, float]]

TACTIC_KIND = {
    RewriteGoal: "rewrite_goal",
    RewriteHyp: "rewrite_hyp",
    UseHyp: "use_hyp",
    CloseRefl: "close_refl",
    CloseEval: "close_eval",
    CloseHyp: "close_hyp",
    Fold: "fold",
    Skip: "skip",
}

KIND_WEIGHTS = {
    "close_refl": 2.0,
    "close_eval": 2.0,
    "close_hyp": 2.0,
    "use_hyp": 0.5,
    "fold": 0.5,
    "rewrite_goal": 0.0,
    "rewrite_hyp": -0.25,
    "skip": -1.0,
}


class EnumerationBoundError(RuntimeError):
    """An exact computation would expand more nodes than allowed."""


def smooth(weights: list[float], epsilon: float) -> list[float]:
    """Normalize, add epsilon everywhere, renormalize.

    Guarantees every entry at least epsilon / (1 + n*epsilon) of the mass,
    so every length-L sequence over the menus keeps positive probability.
    """
    total = sum(weights)
    if total <= 0:
        raise ValueError("menu weights must have positive mass")
    normed = [w / total + epsilon for w in weights]
    total = sum(normed)
    return [w / total for w in normed]


class Prover:
    """Shared contract: a success oracle plus (for menu provers) sampling."""

    name = "prover"
    proof_len: int

    def tactic_menu(self, state: ProofState) -> Menu:
        raise NotImplementedError

    def sample_proof(self, s: Statement, rand: random.Random) -> TacticSequence:
        raise NotImplementedError

    def attempt(self, s: Statement, rand: random.Random) -> tuple[bool, TacticSequence | None]:
        proof = self.sample_proof(s, rand)
        return self.verify(s, proof), proof

    def verify(self, s: Statement, proof: TacticSequence) -> bool:
        raise NotImplementedError

    def success_probability(self, s: Statement) -> float:
        raise NotImplementedError

    def reset(self) -> None:
        """Drop any internal memo tables; results are unaffected."""


class MenuProver(Prover):
    """A prover that samples each of L steps from a weighted tactic menu."""

    def __init__(
        self,
        rules: Mapping[str, RewriteRule] = DEFAULT_RULES,
        limits: Limits = DEFAULT_LIMITS,
        proof_len: int = DEFAULT_PROOF_LEN,
        epsilon: float = DEFAULT_EPSILON,
        seed: int = 0,
    ):
        self.rules = dict(rules)
        self.limits = limits
        self.proof_len = proof_len
        self.epsilon = epsilon
        self.seed = seed
        self._menus: dict[ProofState, Menu] = {}
        self._transitions: dict[tuple[ProofState, Tactic], ProofState] = {}

    # Menu construction.  Subclasses provide the raw (pre-smoothing) scores.

    def _scores(self, state: ProofState, tactics: Sequence[Tactic]) -> list[float]:
        raise NotImplementedError

    def _score(self, state: ProofState, tactic: Tactic) -> float:
        return self._scores(state, (tactic,))[0]

    def tactic_menu(self, state: ProofState) -> Menu:
        menu = self._menus.get(state)
        if menu is None:
            tactics = enumerate_tactics(state, self.rules, self.limits)
            raw = [math.exp(x) for x in self._scores(state, tactics)]
            probs = smooth(raw, self.epsilon)
            menu = list(zip(tactics, probs))
            self._menus[state] = menu
        return menu

    def step_menu(self, s: Statement, state: ProofState) -> Menu:
        """The menu used for one sampling step; overridden by the text prover."""
        return self.tactic_menu(state)

    def apply(self, state: ProofState, tactic: Tactic) -> ProofState:
        key = (state, tactic)
        out = self._transitions.get(key)
        if out is None:
            out = apply_tactic(state, tactic, self.rules, self.limits)
            self._transitions[key] = out
        return out

    def reset(self) -> None:
        self._menus.clear()
        self._transitions.clear()

    def sample_proof(self, s: Statement, rand: random.Random) -> TacticSequence:
        state = compile_statement(s)
        proof: list[Tactic] = []
        for _ in range(self.proof_len):
            menu = self.step_menu(s, state)
            r = rand.random()
            acc = 0.0
            chosen = menu[-1][0]
            for tactic, p in menu:
                acc += p
                if r < acc:
                    chosen = tactic
                    break
            proof.append(chosen)
            state = self.apply(state, chosen)
        return tuple(proof)

    def verify(self, s: Statement, proof: TacticSequence) -> bool:
        return verify_proof(s, proof, self.rules, self.limits)

    def success_probability(self, s: Statement, bound: int = DEFAULT_ENUMERATION_BOUND) -> float:
        return success_probability_exact(self, s, bound=bound)


class RandomizedSearchProver(MenuProver):
    """Text-conditioned: one menu per statement, reused for every step.

    Menu weights mix per-kind preferences with a deterministic hash of the
    statement's surface features against each tactic, so statements that
    differ only by a semantics-preserving rewrite get genuinely different
    sequence distributions.
    """

    name = "text"

    def __init__(self, *args, text_noise: float = 2.0, **kwargs):
        super().__init__(*args, **kwargs)
        self.text_noise = text_noise

    def _features(self, state: ProofState) -> int:
        """A fingerprint of surface form: per-side operator and literal
        layout of the goal, plus the hypothesis list in order."""
        if not state.is_open():
            return rnglib.hash64(state.status)
        parts: list[str] = []
        assert state.goal is not None
        for tag, rel in [("goal", state.goal)] + [(f"h{i}", r) for i, r in enumerate(state.hyps)]:
            for side_name, term in (("lhs", rel.lhs), ("rhs", rel.rhs)):
                ops: dict[str, int] = {}
                lits: list[str] = []
                stack = [term]
                while stack:
                    t = stack.pop()
                    if t.kind == "int":
                        lits.append(str(t.value))
                    elif t.args:
                        ops[t.kind] = ops.get(t.kind, 0) + 1
                    stack.extend(t.args)
                parts.append(
                    f"{tag}.{side_name} root={term.kind}/{term.value} "
                    f"ops={sorted(ops.items())} lits={sorted(lits)}"
                )
            parts.append(f"{tag}.rel={rel.kind}")
        return rnglib.hash64(*parts)

    def _scores(self, state: ProofState, tactics: Sequence[Tactic]) -> list[float]:
        prefix = rnglib.prefix_hasher(self.seed, self._features(state))
        return [
            KIND_WEIGHTS[TACTIC_KIND[type(t)]]
            + self.text_noise
            * rnglib.unit_from_hash(rnglib.hash64_from(prefix, render_tactic(t)))
            for t in tactics
        ]

    def step_menu(self, s: Statement, state: ProofState) -> Menu:
        # All L steps reuse the menu of the statement's own initial state.
        return self.tactic_menu(compile_statement(s))


class NextTacticSequentialProver(MenuProver):
    """State-conditioned: the menu is recomputed from the current state.

    The induced sequence distribution factorizes step by step over states,
    so any two statements that compile to the same state draw identical
    proofs — and pushing the distribution forward along a rewrite arrow
    lands exactly on the rewritten statement's own distribution.
    """

    name = "sequential"

    def __init__(self, *args, state_noise: float = 1.0, **kwargs):
        super().__init__(*args, **kwargs)
        self.state_noise = state_noise

    def _scores(self, state: ProofState, tactics: Sequence[Tactic]) -> list[float]:
        prefix = rnglib.prefix_hasher(self.seed, state_text(state))
        return [
            KIND_WEIGHTS[TACTIC_KIND[type(t)]]
            + self.state_noise
            * rnglib.unit_from_hash(rnglib.hash64_from(prefix, render_tactic(t)))
            for t in tactics
        ]


class SyntheticProver(Prover):
    """A success oracle with no tactics behind it.

    mode="hash": success probability is a uniform-looking deterministic
    function of the statement's canonical text and the seed.
    mode="table": explicit {canonical text: probability} lookups.
    Attempts are Bernoulli draws; no proof object is ever produced.
    """

    name = "synthetic"

    def __init__(
        self,
        mode: str = "hash",
        seed: int = 0,
        table: Mapping[str, float] | None = None,
        proof_len: int = DEFAULT_PROOF_LEN,
    ):
        if mode not in ("hash", "table"):
            raise ValueError(f"unknown synthetic mode {mode!r}")
        if mode == "table" and table is None:
            raise ValueError("table mode needs a table")
        self.mode = mode
        self.seed = seed
        self.table = dict(table) if table else {}
        self.proof_len = proof_len

    def success_probability(self, s: Statement) -> float:
        text = statement_text(s)
        if self.mode == "table":
            if text not in self.table:
                raise KeyError(f"no synthetic success rate for {text!r}")
            return self.table[text]
        return rnglib.unit_from_hash(rnglib.hash64(text) ^ (self.seed & 0xFFFFFFFFFFFFFFFF))

    def attempt(self, s: Statement, rand: random.Random) -> tuple[bool, TacticSequence | None]:
        return rand.random() < self.success_probability(s), None

    def sample_proof(self, s: Statement, rand: random.Random) -> TacticSequence:
        raise NotImplementedError("synthetic provers do not produce tactic sequences")

    def tactic_menu(self, state: ProofState) -> Menu:
        raise NotImplementedError("synthetic provers have no tactic menus")

    def verify(self, s: Statement, proof: TacticSequence) -> bool:
        raise NotImplementedError("synthetic provers have no proofs to verify")


# --- exact and estimated success probabilities ------------------------------


def success_probability_exact(
    prover: MenuProver, s: Statement, bound: int = DEFAULT_ENUMERATION_BOUND
) -> float:
    """P(some prefix of a sampled length-L sequence reaches Empty), exactly.

    Linear recursion over (state, steps-left) with memoization; raises
    EnumerationBoundError if more than `bound` menu edges would be expanded.
    """
    budget = bound
    memo: dict[tuple[ProofState, int], float] = {}

    def go(state: ProofState, steps: int) -> float:
        nonlocal budget
        if state.status == "empty":
            return 1.0
        if state.status == "error" or steps == 0:
            return 0.0
        key = (state, steps)
        if key in memo:
            return memo[key]
        menu = prover.step_menu(s, state)
        budget -= len(menu)
        if budget < 0:
            raise EnumerationBoundError(f"exact success enumeration exceeds {bound} edges")
        total = 0.0
        if steps == 1:
            # Only close tactics can reach Empty in one step, so the last
            # step needs no recursion; each closer is still applied (cheap,
            # memoized) because a hand-built menu may offer one that fails.
            for tactic, p in menu:
                if isinstance(tactic, (CloseRefl, CloseEval, CloseHyp)):
                    if prover.apply(state, tactic).status == "empty":
                        total += p
        else:
            for tactic, p in menu:
                total += p * go(prover.apply(state, tactic), steps - 1)
        memo[key] = total
        return total

    return go(compile_statement(s), prover.proof_len)


def success_probability_mc(
    prover: Prover, s: Statement, n: int, rand: random.Random
) -> tuple[float, float]:
    """Monte Carlo estimate of the success probability, with its standard error."""
    if n <= 0:
        raise ValueError("need at least one trial")
    wins = 0
    for _ in range(n):
        ok, _ = prover.attempt(s, rand)
        wins += ok
    p = wins / n
    return p, math.sqrt(p * (1.0 - p) / n)


def proof_distribution(
    prover: MenuProver,
    s: Statement,
    length: int | None = None,
    bound: int = DEFAULT_ENUMERATION_BOUND,
) -> ProofDistribution:
    """The full distribution over length-L sampled sequences, enumerated."""
    L = prover.proof_len if length is None else length
    masses: dict[TacticSequence, float] = {}
    budget = bound

    def walk(state: ProofState, prefix: TacticSequence, mass: float, steps: int) -> None:
        nonlocal budget
        if steps == 0:
            masses[prefix] = mass
            return
        menu = prover.step_menu(s, state)
        budget -= len(menu)
        if budget < 0:
            raise EnumerationBoundError(f"distribution enumeration exceeds {bound} edges")
        for tactic, p in menu:
            walk(prover.apply(state, tactic), prefix + (tactic,), mass * p, steps - 1)

    walk(compile_statement(s), (), 1.0, L)
    return ProofDistribution(masses, L)


# --- configuration -----------------------------------------------------------


def prover_from_config(
    cfg: Mapping[str, str],
    rules: Mapping[str, RewriteRule] = DEFAULT_RULES,
    limits: Limits = DEFAULT_LIMITS,
) -> Prover:
    """Build a prover from a flat key-value section (all values strings)."""
    kind = cfg.get("kind", "sequential")
    proof_len = int(cfg.get("length", DEFAULT_PROOF_LEN))
    seed = int(cfg.get("seed", 0))
    epsilon = float(cfg.get("epsilon", DEFAULT_EPSILON))
    if kind == "text":
        return RandomizedSearchProver(
            rules, limits, proof_len, epsilon, seed, text_noise=float(cfg.get("text_noise", 2.0))
        )
    if kind == "sequential":
        return NextTacticSequentialProver(
            rules, limits, proof_len, epsilon, seed, state_noise=float(cfg.get("state_noise", 1.0))
        )
    if kind == "synthetic-hash":
        return SyntheticProver("hash", seed, proof_len=proof_len)
    if kind == "synthetic-table":
        table: dict[str, float] = {}
        path = cfg.get("table", "")
        if path:
            with open(path, "r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line or line.startswith("#"):
                        continue
                    text, _, value = line.rpartition("\t")
                    table[text] = float(value)
        return SyntheticProver("table", seed, table=table, proof_len=proof_len)
    raise ValueError(f"unknown prover kind {kind!r}")
