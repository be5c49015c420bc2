"""Distributions over truncated tactic sequences, and their transport.

A proof distribution assigns positive mass to finitely many tactic
sequences of length at most its truncation L, summing to one.  Rewrite
arrows act on distributions by prefix conditioning: realize the arrow as
a tactic sequence t, keep the sequences that start with t, strip the
prefix, and renormalize.  Conditioning along an empty prefix changes
nothing, and conditioning along t followed by t' equals conditioning
along their concatenation — checked numerically here because everything
downstream leans on it.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Mapping, MutableMapping

from .states import TacticSequence
from .terms import Statement, statement_text

if TYPE_CHECKING:  # pragma: no cover
    from .provers import Prover

NORMALIZATION_TOL = 1e-12


class DistributionError(ValueError):
    pass


class ProofDistribution:
    """Finite positive masses on tactic sequences of length <= truncation."""

    def __init__(self, masses: Mapping[TacticSequence, float], truncation: int):
        if truncation < 0:
            raise DistributionError("truncation must be nonnegative")
        for seq, p in masses.items():
            if len(seq) > truncation:
                raise DistributionError(f"sequence of length {len(seq)} exceeds truncation {truncation}")
            if not (p > 0.0):
                raise DistributionError(f"nonpositive mass {p!r}")
        total = math.fsum(masses.values())
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise DistributionError(f"masses sum to {total!r}, not 1")
        self._masses = dict(masses)
        self.truncation = truncation

    def mass(self, seq: TacticSequence) -> float:
        return self._masses.get(tuple(seq), 0.0)

    def items(self) -> Iterable[tuple[TacticSequence, float]]:
        return self._masses.items()

    def support(self) -> list[TacticSequence]:
        return list(self._masses.keys())

    def __len__(self) -> int:
        return len(self._masses)

    def linf(self, other: "ProofDistribution") -> float:
        keys = set(self._masses) | set(other._masses)
        return max((abs(self.mass(k) - other.mass(k)) for k in keys), default=0.0)


def pushforward(dist: ProofDistribution, prefix: TacticSequence) -> ProofDistribution:
    """Condition on the prefix and strip it; truncation drops by its length."""
    prefix = tuple(prefix)
    m = len(prefix)
    if m > dist.truncation:
        raise DistributionError(f"prefix of length {m} exceeds truncation {dist.truncation}")
    kept: dict[TacticSequence, float] = {}
    for seq, p in dist.items():
        if seq[:m] == prefix:
            kept[seq[m:]] = kept.get(seq[m:], 0.0) + p
    total = math.fsum(kept.values())
    if total <= 0.0:
        raise DistributionError("prefix carries no mass")
    return ProofDistribution({k: v / total for k, v in kept.items()}, dist.truncation - m)


def check_functoriality(
    dist: ProofDistribution, first: TacticSequence, second: TacticSequence
) -> tuple[float, float]:
    """(identity deviation, composition deviation), both in sup norm.

    Identity: conditioning on the empty prefix must change nothing.
    Composition: conditioning on first ++ second must equal conditioning
    on first and then on second.
    """
    identity_dev = pushforward(dist, ()).linf(dist)
    both = pushforward(dist, tuple(first) + tuple(second))
    stepwise = pushforward(pushforward(dist, first), second)
    return identity_dev, both.linf(stepwise)


def check_proof_equivariance(
    prover,
    category,
    arrow,
    length: int | None = None,
    bound: int | None = None,
    cache: MutableMapping[tuple[str, int], "ProofDistribution"] | None = None,
) -> float:
    """Sup-norm gap between transporting the source distribution along the
    arrow and the destination's own distribution.

    Zero (to rounding) for provers whose menus depend only on the state;
    macroscopic for provers conditioned on statement surface text.  `cache`,
    when given, memoizes enumerated distributions across calls, keyed by
    (canonical statement text, truncation); use one cache per prover.
    """
    from .provers import DEFAULT_ENUMERATION_BOUND, proof_distribution

    b = DEFAULT_ENUMERATION_BOUND if bound is None else bound
    L = prover.proof_len if length is None else length
    t = category.realize(arrow)
    if len(t) > L:
        raise DistributionError(f"arrow realization of length {len(t)} exceeds truncation {L}")

    def enumerate_dist(s, trunc: int) -> "ProofDistribution":
        if cache is None:
            return proof_distribution(prover, s, trunc, b)
        key = (statement_text(s), trunc)
        dist = cache.get(key)
        if dist is None:
            dist = proof_distribution(prover, s, trunc, b)
            cache[key] = dist
        return dist

    transported = pushforward(enumerate_dist(arrow.src, L), t)
    direct = enumerate_dist(arrow.dst, L - len(t))
    return transported.linf(direct)


@dataclass(frozen=True)
class SpreadResult:
    """Success probabilities across one equivalence class."""

    values: tuple[tuple[str, float], ...]  # (canonical text, probability)
    lo: float
    hi: float
    spread: float
    argmax: str

    def by_text(self) -> dict[str, float]:
        return dict(self.values)


def invariance_spread(
    prover: "Prover",
    members: Iterable[Statement],
    mode: str = "exact",
    trials: int = 10_000,
    rand: random.Random | None = None,
) -> SpreadResult:
    """min/max/range of the prover's success rate over class members.

    mode="exact" uses the prover's exact success probability; mode="mc"
    estimates it from `trials` attempts per member.
    """
    from .provers import success_probability_mc

    rows: list[tuple[str, float]] = []
    for s in members:
        if mode == "exact":
            p = prover.success_probability(s)
        elif mode == "mc":
            if rand is None:
                raise ValueError("mc mode needs a random source")
            p, _ = success_probability_mc(prover, s, trials, rand)
        else:
            raise ValueError(f"unknown mode {mode!r}")
        rows.append((statement_text(s), p))
    if not rows:
        raise ValueError("empty class")
    lo = min(p for _, p in rows)
    hi = max(p for _, p in rows)
    argmax = min(text for text, p in rows if p == hi)
    return SpreadResult(tuple(rows), lo, hi, hi - lo, argmax)
