"""Ensemble evaluation: split a fixed attempt budget across variants.

An ensemble run takes K variant statements of one seed and gives each
floor(N/K) independent proof attempts; leftover budget (N mod K) is
discarded unless explicitly routed to the seed.  The first successful
proof is lifted along the variant's arrow and re-verified against the
seed, so a reported proof is always a proof of the seed statement.

The exact expected success rate of this scheme, for a known per-variant
success map and a known distribution over variant subsets, is

    1 - E_subsets[ prod_i (1 - s(T_i))^floor(N/K) ]

and when per-variant success rates are drawn independently from a prior S,

    1 - E[(1 - S)^floor(N/K)]^K.

The latter is non-decreasing in K (for divisors of N) by a power-mean
inequality, strictly when S is not a point mass; check_holder evaluates
one instance of that inequality numerically.  PASS@k estimators for pools
of recorded attempt counts round out the module.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from . import rng as rnglib
from .category import Arrow, realize_step
from .provers import Prover
from .sampler import VariantSet
from .states import TacticSequence, render_proof
from .terms import Statement, statement_text

PROB_TOL = 1e-12
HOLDER_TOL = 1e-12
MAX_SUBSETS = 200_000


class EnsembleError(ValueError):
    pass


# --- priors -------------------------------------------------------------------


@dataclass(frozen=True)
class Prior:
    """A finite distribution over success probabilities."""

    atoms: tuple[tuple[float, float], ...]  # (value, weight)

    def __post_init__(self) -> None:
        if not self.atoms:
            raise EnsembleError("prior needs at least one atom")
        for v, w in self.atoms:
            if not (0.0 <= v <= 1.0):
                raise EnsembleError(f"success value {v!r} outside [0, 1]")
            if w <= 0.0:
                raise EnsembleError(f"nonpositive weight {w!r}")
        total = math.fsum(w for _, w in self.atoms)
        if abs(total - 1.0) > PROB_TOL:
            raise EnsembleError(f"weights sum to {total!r}, not 1")

    @classmethod
    def point(cls, value: float) -> "Prior":
        return cls(((value, 1.0),))

    @classmethod
    def uniform(cls, values: Sequence[float]) -> "Prior":
        if not values:
            raise EnsembleError("prior needs at least one atom")
        w = 1.0 / len(values)
        return cls(tuple((v, w) for v in values))

    def failure_moment(self, power: int) -> float:
        """E[(1 - S)^power]."""
        return math.fsum(w * (1.0 - v) ** power for v, w in self.atoms)

    def non_constant(self) -> bool:
        return len({v for v, _ in self.atoms}) > 1


def prior_expected_success(prior: Prior, ensemble_size: int, budget: int) -> float:
    """1 - E[(1-S)^floor(N/K)]^K for iid prior draws across the K variants."""
    if ensemble_size < 1:
        raise EnsembleError("ensemble size must be at least 1")
    if budget < ensemble_size:
        raise EnsembleError("budget must cover at least one attempt per variant")
    attempts = budget // ensemble_size
    return 1.0 - prior.failure_moment(attempts) ** ensemble_size


@dataclass(frozen=True)
class HolderCheck:
    """One instance of the K-monotonicity inequality, evaluated."""

    budget: int
    k_small: int
    k_large: int
    lhs: float  # failure term at k_large
    rhs: float  # failure term at k_small
    passed: bool  # lhs <= rhs + tolerance
    expect_strict: bool  # prior non-constant and k_small < k_large
    gap: float  # rhs - lhs

    @property
    def strict_ok(self) -> bool:
        return (not self.expect_strict) or self.gap > 0.0


def check_holder(prior: Prior, budget: int, k_small: int, k_large: int) -> HolderCheck:
    """Evaluate E[X^(N/k_large)]^k_large <= E[X^(N/k_small)]^k_small, X = 1-S.

    Both ensemble sizes must divide the budget; k_small <= k_large.
    """
    if k_small < 1 or k_large < k_small:
        raise EnsembleError("need 1 <= k_small <= k_large")
    if budget % k_small or budget % k_large:
        raise EnsembleError("ensemble sizes must divide the budget")
    lhs = prior.failure_moment(budget // k_large) ** k_large
    rhs = prior.failure_moment(budget // k_small) ** k_small
    return HolderCheck(
        budget,
        k_small,
        k_large,
        lhs,
        rhs,
        lhs <= rhs + HOLDER_TOL,
        prior.non_constant() and k_small < k_large,
        rhs - lhs,
    )


# --- exact expected success over explicit subset distributions ------------------


def uniform_subsets(texts: Sequence[str], size: int) -> list[tuple[tuple[str, ...], float]]:
    """All size-subsets of the pool, equally weighted."""
    pool = sorted(texts)
    if not (1 <= size <= len(pool)):
        raise EnsembleError(f"cannot draw {size} of {len(pool)} variants")
    count = math.comb(len(pool), size)
    if count > MAX_SUBSETS:
        raise EnsembleError(f"{count} subsets exceed the {MAX_SUBSETS} cap")
    p = 1.0 / count
    return [(combo, p) for combo in itertools.combinations(pool, size)]


def seeded_subsets(texts: Sequence[str], seed_text: str, size: int) -> list[tuple[tuple[str, ...], float]]:
    """All size-subsets that contain the seed, equally weighted."""
    pool = sorted(texts)
    if seed_text not in pool:
        raise EnsembleError("seed is not in the pool")
    others = [t for t in pool if t != seed_text]
    if not (1 <= size <= len(others) + 1):
        raise EnsembleError(f"cannot draw {size} of {len(pool)} variants")
    count = math.comb(len(others), size - 1)
    if count > MAX_SUBSETS:
        raise EnsembleError(f"{count} subsets exceed the {MAX_SUBSETS} cap")
    p = 1.0 / count
    return [
        (tuple(sorted((seed_text,) + combo)), p)
        for combo in itertools.combinations(others, size - 1)
    ]


def expected_success_exact(
    success: Mapping[str, float],
    subsets: Sequence[tuple[tuple[str, ...], float]],
    ensemble_size: int,
    budget: int,
) -> float:
    """1 - E_subsets[prod (1-s)^floor(N/K)] with everything given explicitly."""
    if ensemble_size < 1 or budget < ensemble_size:
        raise EnsembleError("need budget >= ensemble size >= 1")
    total_p = math.fsum(p for _, p in subsets)
    if abs(total_p - 1.0) > PROB_TOL:
        raise EnsembleError(f"subset probabilities sum to {total_p!r}, not 1")
    attempts = budget // ensemble_size
    failure = 0.0
    for subset, p in subsets:
        prod = 1.0
        for text in subset:
            if text not in success:
                raise EnsembleError(f"no success rate for {text!r}")
            prod *= (1.0 - success[text]) ** attempts
        failure += p * prod
    return 1.0 - failure


# --- PASS@k ---------------------------------------------------------------------


def pass_at_k(attempts: int, successes: int, k: int) -> float:
    """P(at least one success among k of the recorded attempts), unbiased."""
    if not (0 <= successes <= attempts):
        raise EnsembleError(f"successes {successes} outside 0..{attempts}")
    if not (1 <= k <= attempts):
        raise EnsembleError(f"k={k} outside 1..{attempts}")
    return 1.0 - math.comb(attempts - successes, k) / math.comb(attempts, k)


def pass_ens_at_k(per_variant: Sequence[tuple[int, int]], k: int) -> float:
    """PASS@k for a K-variant ensemble splitting k evenly across variants.

    per_variant lists (attempts, successes) per variant; k must be a
    positive multiple of the number of variants, with k/K at most each
    variant's recorded attempts.
    """
    size = len(per_variant)
    if size < 1:
        raise EnsembleError("need at least one variant")
    if k < size or k % size:
        raise EnsembleError(f"k={k} is not a positive multiple of the ensemble size {size}")
    share = k // size
    num = 1
    den = 1
    for attempts, successes in per_variant:
        if not (0 <= successes <= attempts):
            raise EnsembleError(f"successes {successes} outside 0..{attempts}")
        if share > attempts:
            raise EnsembleError(f"per-variant share {share} exceeds {attempts} recorded attempts")
        num *= math.comb(attempts - successes, share)
        den *= math.comb(attempts, share)
    return 1.0 - num / den


# --- running an ensemble ----------------------------------------------------------


@dataclass(frozen=True)
class EnsembleConfig:
    ensemble_size: int = 4  # K
    budget: int = 16  # N
    seed: int = 0
    route_leftover_to_seed: bool = False

    def __post_init__(self) -> None:
        if self.ensemble_size < 1:
            raise EnsembleError("ensemble size must be at least 1")
        if self.budget < self.ensemble_size:
            raise EnsembleError("budget must cover at least one attempt per variant")


@dataclass(frozen=True)
class VariantOutcome:
    statement: str
    attempts: int
    successes: int


@dataclass(frozen=True)
class EnsembleReport:
    seed_statement: str
    ensemble_size: int
    budget: int
    attempts_per_variant: int
    leftover: int
    leftover_routed: bool
    outcomes: tuple[VariantOutcome, ...]
    solved: bool
    winning_variant: str | None
    proof: str | None  # rendered proof of the SEED statement, when one exists
    total_successes: int


def run_ensemble(variants: VariantSet, prover: Prover, config: EnsembleConfig) -> EnsembleReport:
    """Give each variant floor(N/K) attempts; lift and re-verify the first win.

    Attempt randomness is keyed by (config seed, variant index, attempt
    index), so runs are reproducible and independent across slots.  The
    leftover N - K*floor(N/K) is dropped unless routed to the seed.
    """
    seed_stmt = variants.seed
    attempts_per = config.budget // config.ensemble_size
    leftover = config.budget - config.ensemble_size * attempts_per
    if len(variants.entries) > config.ensemble_size:
        raise EnsembleError(
            f"{len(variants.entries)} variants exceed the configured ensemble size {config.ensemble_size}"
        )

    outcomes: list[VariantOutcome] = []
    solved = False
    winner: str | None = None
    lifted_text: str | None = None
    total = 0

    def run_slot(stmt: Statement, arrow: Arrow | None, count: int, label: object) -> int:
        nonlocal solved, winner, lifted_text
        wins = 0
        for a in range(count):
            rand = rnglib.child_rng(config.seed, "attempt", label, a)
            ok, proof = prover.attempt(stmt, rand)
            if not ok:
                continue
            wins += 1
            if not solved:
                solved = True
                winner = statement_text(stmt)
                if proof is not None:
                    lifted = _lift(arrow, proof)
                    if not prover.verify(seed_stmt, lifted):
                        raise EnsembleError("lifted proof failed to verify against the seed statement")
                    lifted_text = render_proof(lifted)
        return wins

    for v, entry in enumerate(variants.entries):
        wins = run_slot(entry.statement, entry.arrow, attempts_per, v)
        total += wins
        outcomes.append(VariantOutcome(statement_text(entry.statement), attempts_per, wins))

    routed = bool(config.route_leftover_to_seed and leftover)
    if routed:
        wins = run_slot(seed_stmt, None, leftover, "leftover")
        total += wins
        outcomes.append(VariantOutcome(statement_text(seed_stmt), leftover, wins))

    return EnsembleReport(
        seed_statement=statement_text(seed_stmt),
        ensemble_size=config.ensemble_size,
        budget=config.budget,
        attempts_per_variant=attempts_per,
        leftover=leftover,
        leftover_routed=routed,
        outcomes=tuple(outcomes),
        solved=solved,
        winning_variant=winner,
        proof=lifted_text,
        total_successes=total,
    )


def _lift(arrow: Arrow | None, proof: TacticSequence) -> TacticSequence:
    if arrow is None:
        return tuple(proof)
    return tuple(realize_step(s) for s in arrow.steps) + tuple(proof)
