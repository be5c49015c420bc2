"""Repeatable studies over statement corpora.

Each runner is pure given its inputs: it takes statements, provers, and a
rewriting category, and returns a StudyReport holding CSV-ready tables, a
JSON-ready summary, and an overall pass flag.  File writing and manifests
live in the CLI layer so tests can call these directly.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

from . import rng as rnglib
from .category import Arrow, ClassSizeError, RewritingCategory
from .distributions import (
    DistributionError,
    check_functoriality,
    check_proof_equivariance,
    invariance_spread,
)
from .ensemble import (
    Prior,
    check_holder,
    expected_success_exact,
    pass_at_k,
    prior_expected_success,
    seeded_subsets,
)
from .provers import MenuProver, Prover, proof_distribution
from .sampler import SamplerConfig, SurpriseModel, exhaustive_sample, select
from .states import clear_language_caches, compile_statement
from .terms import Statement, statement_text

DEFAULT_BUDGETS = (8, 32, 64)


@dataclass
class StudyReport:
    kind: str
    tables: dict[str, tuple[tuple[str, ...], list[tuple]]] = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    passed: bool = False

    def table(self, name: str) -> list[tuple]:
        return self.tables[name][1]


def _release_memory(provers: Iterable[Prover]) -> None:
    """Between independent work items: drop prover memos and language caches.

    Everything dropped is a pure-function memo, so results never change;
    studies that walk hundreds of classes would otherwise grow without bound.
    """
    for p in provers:
        p.reset()
    clear_language_caches()


# --- limit of exhaustive ensembles -------------------------------------------------


def run_limit_invariance(
    statements: Sequence[Statement],
    prover: Prover,
    category: RewritingCategory,
    *,
    depth: int = 2,
    gap_tol: float = 1e-9,
    max_members: int = 16,
) -> StudyReport:
    """Seed-dependence of ensemble success as the ensemble covers its class.

    For each saturated class, every member plays the seed role: the ensemble
    draws K variants including that seed, with budget n(K) = K*K so the
    per-variant attempt count grows with K.  At K = 1 different seeds give
    visibly different success rates; at K = |class| every seed draws the
    whole class and the gap collapses to zero.
    """
    rows: list[tuple] = []
    finals: list[tuple] = []
    skipped: list[tuple] = []
    k1_gaps: list[float] = []

    for s in statements:
        text = statement_text(s)
        try:
            result = category.class_with_arrows(s, depth)
        except ClassSizeError:
            skipped.append((text, "class exceeds the size cap"))
            continue
        if not result.closed:
            skipped.append((text, "class not saturated at this depth"))
            continue
        texts = sorted(statement_text(m) for m in result.members)
        if len(texts) < 2:
            skipped.append((text, "singleton class"))
            continue
        if len(texts) > max_members:
            skipped.append((text, f"class of {len(texts)} exceeds max_members={max_members}"))
            continue
        by_text = {statement_text(m): m for m in result.members}
        success = {t: prover.success_probability(by_text[t]) for t in texts}
        size = len(texts)
        final_gap = math.nan
        for k in range(1, size + 1):
            budget = k * k
            values = [
                expected_success_exact(success, seeded_subsets(texts, t, k), k, budget)
                for t in texts
            ]
            gap = max(values) - min(values)
            rows.append((text, size, k, budget, min(values), max(values), gap))
            if k == 1:
                k1_gaps.append(gap)
            if k == size:
                final_gap = gap
        finals.append((text, size, final_gap))
        _release_memory([prover])

    max_final = max((g for _, _, g in finals), default=math.inf)
    summary = {
        "classes": len(finals),
        "skipped": len(skipped),
        "max_final_gap": max_final if finals else None,
        "max_k1_gap": max(k1_gaps) if k1_gaps else None,
        "gap_tol": gap_tol,
    }
    return StudyReport(
        kind="limit-invariance",
        tables={
            "gaps": (("statement", "class_size", "ensemble_size", "budget", "lo", "hi", "gap"), rows),
            "finals": (("statement", "class_size", "final_gap"), finals),
            "skipped": (("statement", "reason"), skipped),
        },
        summary=summary,
        passed=bool(finals) and max_final <= gap_tol,
    )


# --- budget-split monotonicity ------------------------------------------------------


def _divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


def run_monotonicity(
    priors: Mapping[str, Prior],
    budgets: Sequence[int] = (8, 12, 24, 64),
) -> StudyReport:
    """Finer budget splits never hurt the prior expected success.

    For each prior and budget N, walks the divisor chain K_1 < K_2 < ... of N
    and checks the power-mean inequality between adjacent splits, expecting
    strict improvement whenever the prior is non-constant.
    """
    check_rows: list[tuple] = []
    success_rows: list[tuple] = []
    all_passed = True
    all_strict = True

    for name in sorted(priors):
        prior = priors[name]
        for budget in budgets:
            divisors = _divisors(budget)
            for k in divisors:
                success_rows.append(
                    (name, budget, k, budget // k, prior_expected_success(prior, k, budget))
                )
            for k_small, k_large in zip(divisors, divisors[1:]):
                check = check_holder(prior, budget, k_small, k_large)
                check_rows.append(
                    (
                        name,
                        budget,
                        k_small,
                        k_large,
                        check.lhs,
                        check.rhs,
                        check.gap,
                        check.passed,
                        check.expect_strict,
                        check.strict_ok,
                    )
                )
                all_passed = all_passed and check.passed
                all_strict = all_strict and check.strict_ok

    summary = {
        "priors": len(priors),
        "budgets": list(budgets),
        "checks": len(check_rows),
        "all_passed": all_passed,
        "all_strict": all_strict,
    }
    return StudyReport(
        kind="monotonicity",
        tables={
            "checks": (
                (
                    "prior",
                    "budget",
                    "k_small",
                    "k_large",
                    "lhs",
                    "rhs",
                    "gap",
                    "passed",
                    "expect_strict",
                    "strict_ok",
                ),
                check_rows,
            ),
            "success": (("prior", "budget", "ensemble_size", "attempts", "success"), success_rows),
        },
        summary=summary,
        passed=all_passed and all_strict,
    )


# --- invariance spreads --------------------------------------------------------------


def bounded_class(
    category: RewritingCategory, s: Statement, depth: int, cap: int
) -> tuple[list[Statement], bool]:
    """Breadth-first class members up to `cap`, stopping the walk early.

    Unlike the category's own class enumeration this never raises on large
    classes; it returns what it has plus a flag saying the cap was hit.
    """
    seen = {statement_text(s)}
    members = [s]
    frontier = [s]
    for _ in range(depth):
        next_frontier: list[Statement] = []
        for stmt in frontier:
            for _, result in category.expansions(stmt):
                text = statement_text(result)
                if text in seen:
                    continue
                if len(members) >= cap:
                    return members, True
                seen.add(text)
                members.append(result)
                next_frontier.append(result)
        frontier = next_frontier
    return members, False


def _renamed(s: Statement) -> Statement:
    return replace(s, name=s.name + "x")


def run_invariance_study(
    statements: Sequence[Statement],
    provers: Mapping[str, Prover],
    category: RewritingCategory,
    *,
    depth: int = 2,
    max_members: int = 24,
    rename_checks: int = 10,
) -> StudyReport:
    """Success-probability spread across rewrite classes, per prover.

    Rewrite classes change the proof state, so every prover may score their
    members differently; renaming a statement leaves the state untouched, so
    there the spread must vanish exactly.  Large classes are clipped to the
    max_members smallest members (the seed always stays in).
    """
    rows: list[tuple] = []
    rename_rows: list[tuple] = []
    skipped: list[tuple] = []
    spreads: dict[str, list[float]] = {name: [] for name in provers}

    for s in statements:
        text = statement_text(s)
        members, clipped = bounded_class(category, s, depth, max_members)
        if len(members) < 2:
            skipped.append((text, "singleton class"))
            continue
        for name in sorted(provers):
            spread = invariance_spread(provers[name], members)
            spreads[name].append(spread.spread)
            rows.append(
                (text, name, len(members), clipped, spread.lo, spread.hi, spread.spread, spread.argmax)
            )
        _release_memory(provers.values())

    for s in statements[: max(rename_checks, 0)]:
        pair = [s, _renamed(s)]
        for name in sorted(provers):
            spread = invariance_spread(provers[name], pair)
            rename_rows.append((statement_text(s), name, spread.lo, spread.hi, spread.spread))

    per_prover = {}
    for name in sorted(provers):
        values = spreads[name]
        per_prover[name] = {
            "classes": len(values),
            "median_spread": statistics.median(values) if values else None,
            "max_spread": max(values) if values else None,
            "zero_share": (sum(1 for v in values if v == 0.0) / len(values)) if values else None,
            "max_rename_spread": max(
                (row[4] for row in rename_rows if row[1] == name), default=None
            ),
        }

    rename_ok = all(row[4] == 0.0 for row in rename_rows)
    summary = {
        "provers": per_prover,
        "skipped": len(skipped),
        "rename_checks": len(rename_rows),
        "rename_ok": rename_ok,
    }
    passed = bool(rows) and rename_ok
    return StudyReport(
        kind="invariance",
        tables={
            "spreads": (
                ("statement", "prover", "members", "clipped", "lo", "hi", "spread", "argmax"),
                rows,
            ),
            "rename": (("statement", "prover", "lo", "hi", "spread"), rename_rows),
            "skipped": (("statement", "reason"), skipped),
        },
        summary=summary,
        passed=passed,
    )


# --- category, functor, and equivariance laws ---------------------------------------


def harvest_arrows(
    category: RewritingCategory,
    statements: Sequence[Statement],
    want: int,
    max_steps: int = 2,
) -> list[Arrow]:
    """Up to `want` arrows with 1..max_steps steps, in deterministic order."""
    arrows: list[Arrow] = []
    for s in statements:
        if len(arrows) >= want:
            break
        for step, result in category.neighbor_arrows(s):
            if len(arrows) >= want:
                break
            a = Arrow(s, result, (step,))
            arrows.append(a)
            if max_steps < 2:
                continue
            for next_step, next_result in category.neighbor_arrows(a.dst, breadth=2):
                if len(arrows) >= want:
                    break
                arrows.append(category.compose(a, Arrow(a.dst, next_result, (next_step,))))
    return arrows


def run_equivariance_audit(
    statements: Sequence[Statement],
    category: RewritingCategory,
    provers: Mapping[str, MenuProver],
    *,
    equivariant: Sequence[str] = ("sequential",),
    n_arrows: int = 50,
    length: int = 3,
    tol: float = 1e-10,
    law_checks: int = 100,
    seed: int = 0,
    support_cap: int = 50_000,
) -> StudyReport:
    """Category laws, pushforward functor laws, and prover equivariance.

    Category laws are checked by exact text equality; functor laws and the
    equivariance of the provers named in `equivariant` must hold within tol.
    Deviations of the other provers are recorded as evidence, not asserted.

    Distribution checks enumerate every length-`length` sequence, so they
    are restricted to statements whose initial menu keeps that enumeration
    under `support_cap` sequences; with none small enough, the single
    lightest statement is used.
    """
    law_rows: list[tuple] = []
    functor_rows: list[tuple] = []
    equi_rows: list[tuple] = []
    rand = rnglib.child_rng(seed, "audit")

    names = sorted(provers)
    base_prover = provers[names[0]]

    def menu_size(s: Statement) -> int:
        return len(base_prover.step_menu(s, compile_statement(s)))

    light = [s for s in statements if menu_size(s) ** length <= support_cap]
    if not light:
        light = [min(statements, key=menu_size)]

    arrows = harvest_arrows(category, light, max(n_arrows, law_checks), max_steps=2)
    if not arrows:
        raise ValueError("no arrows could be harvested from the given statements")

    # Category laws: identity neutrality, associativity, inversion round trips.
    laws_ok = True
    for i in range(law_checks):
        a = arrows[i % len(arrows)]
        ident_src = category.identity(a.src)
        ident_dst = category.identity(a.dst)
        left = category.compose(ident_src, a)
        right = category.compose(a, ident_dst)
        ok_ident = left.steps == a.steps and right.steps == a.steps
        continuations = category.neighbor_arrows(a.dst, breadth=2)
        ok_assoc = True
        if continuations:
            step_b, result_b = continuations[i % len(continuations)]
            b = Arrow(a.dst, result_b, (step_b,))
            tails = category.neighbor_arrows(b.dst, breadth=2)
            if tails:
                step_c, result_c = tails[i % len(tails)]
                c = Arrow(b.dst, result_c, (step_c,))
                ab_c = category.compose(category.compose(a, b), c)
                a_bc = category.compose(a, category.compose(b, c))
                ok_assoc = (
                    ab_c.steps == a_bc.steps
                    and statement_text(ab_c.dst) == statement_text(a_bc.dst)
                )
        back = category.invert(a)
        round_trip = category.compose(a, back)
        ok_invert = statement_text(round_trip.dst) == statement_text(a.src)
        ok = ok_ident and ok_assoc and ok_invert
        laws_ok = laws_ok and ok
        law_rows.append(
            (statement_text(a.src), statement_text(a.dst), len(a.steps), ok_ident, ok_assoc, ok_invert)
        )

    # Functor laws on sampled-proof distributions and on perturbed copies.
    functor_ok = True
    dist_caches: dict[str, dict] = {name: {} for name in names}
    base_cache = dist_caches[names[0]]
    for i in range(law_checks):
        s = light[i % len(light)]
        key = (statement_text(s), length)
        dist = base_cache.get(key)
        if dist is None:
            dist = proof_distribution(base_prover, s, length)
            base_cache[key] = dist
        support = dist.support()
        seq = support[rand.randrange(len(support))]
        cut_a = rand.randint(0, len(seq))
        cut_b = rand.randint(cut_a, len(seq))
        first, second = seq[:cut_a], seq[cut_a:cut_b]
        identity_dev, comp_dev = check_functoriality(dist, first, second)
        functor_rows.append((statement_text(s), "prover", len(first), len(second), identity_dev, comp_dev))
        functor_ok = functor_ok and identity_dev <= tol and comp_dev <= tol
        perturbed_masses = {k: v * (0.5 + rand.random()) for k, v in dist.items()}
        total = math.fsum(perturbed_masses.values())
        perturbed = type(dist)({k: v / total for k, v in perturbed_masses.items()}, dist.truncation)
        identity_dev, comp_dev = check_functoriality(perturbed, first, second)
        functor_rows.append((statement_text(s), "perturbed", len(first), len(second), identity_dev, comp_dev))
        functor_ok = functor_ok and identity_dev <= tol and comp_dev <= tol

    # Equivariance: exact transport for state-driven provers, recorded gap for the rest.
    equi_ok = True
    max_dev: dict[str, float] = {}
    usable = [a for a in arrows if len(a.steps) <= length][:n_arrows]
    for a in usable:
        for name in names:
            try:
                dev = check_proof_equivariance(
                    provers[name], category, a, length, cache=dist_caches[name]
                )
            except DistributionError:
                # The realized arrow carries no mass under this prover, so
                # the transported distribution is undefined: the largest
                # possible gap, and itself proof of non-equivariance.
                if name in equivariant:
                    raise
                dev = 1.0
            max_dev[name] = max(max_dev.get(name, 0.0), dev)
            must_hold = name in equivariant
            ok = dev <= tol if must_hold else True
            equi_ok = equi_ok and ok
            equi_rows.append(
                (statement_text(a.src), statement_text(a.dst), len(a.steps), name, dev, must_hold, ok)
            )

    summary = {
        "arrows": len(usable),
        "law_checks": len(law_rows),
        "functor_checks": len(functor_rows),
        "laws_ok": laws_ok,
        "functor_ok": functor_ok,
        "equivariance_ok": equi_ok,
        "max_deviation": max_dev,
        "tol": tol,
    }
    return StudyReport(
        kind="equivariance",
        tables={
            "laws": (("src", "dst", "steps", "identity_ok", "assoc_ok", "invert_ok"), law_rows),
            "functor": (("statement", "distribution", "first", "second", "identity_dev", "composition_dev"), functor_rows),
            "equivariance": (("src", "dst", "steps", "prover", "deviation", "must_hold", "ok"), equi_rows),
        },
        summary=summary,
        passed=laws_ok and functor_ok and equi_ok,
    )


# --- ensemble evaluation -------------------------------------------------------------


def _pow2_at_most(n: int) -> int:
    p = 1
    while p * 2 <= n:
        p *= 2
    return p


def _record_attempts(prover: Prover, stmt: Statement, attempts: int, seed: int) -> int:
    rand = rnglib.child_rng(seed, "attempts", statement_text(stmt))
    wins = 0
    for _ in range(attempts):
        ok, _ = prover.attempt(stmt, rand)
        wins += ok
    return wins


def run_ensemble_eval(
    statements: Sequence[Statement],
    prover: Prover,
    category: RewritingCategory,
    sampler_cfg: SamplerConfig,
    model: SurpriseModel,
    *,
    budgets: Sequence[int] = DEFAULT_BUDGETS,
    attempts: int = 64,
    selections: int = 2000,
    ensemble_size: int = 8,
    pool_depth: int = 1,
    pool_keep: int = 24,
    seed: int = 0,
) -> StudyReport:
    """PASS@N for seed-only, random-rewrite, controlled, and test-time modes.

    Per statement, attempt outcomes are recorded once per distinct variant
    (n = attempts each); the modes then recombine those records.  Random
    draws one class member per selection, controlled draws a K-subset of
    the class pool, test-time uses the surprise-selected variant set.  K is
    clipped to the largest power of two the pool supports so every budget
    in `budgets` splits evenly.
    """
    for budget in budgets:
        if budget > attempts:
            raise ValueError(f"budget {budget} exceeds the {attempts} recorded attempts")

    rows: list[tuple] = []
    stmt_rows: list[tuple] = []
    sums: dict[tuple[str, int], float] = {}
    counts_by_mode: dict[tuple[str, int], int] = {}

    for s in statements:
        text = statement_text(s)
        pool_rand = rnglib.child_rng(seed, "pool", text)
        pool_vs = exhaustive_sample(category, s, pool_keep, pool_depth, pool_rand, include_seed=True)
        pool = {statement_text(e.statement): e.statement for e in pool_vs.entries}

        tt_cfg = replace(sampler_cfg, keep=ensemble_size, include_seed=True, seed=seed)
        tt_vs = select(category, s, tt_cfg, model)
        tt_texts = [statement_text(e.statement) for e in tt_vs.entries]

        variants = dict(pool)
        for e in tt_vs.entries:
            variants.setdefault(statement_text(e.statement), e.statement)

        wins = {t: _record_attempts(prover, stmt, attempts, seed) for t, stmt in variants.items()}

        pool_texts = sorted(pool)
        k_ctrl = _pow2_at_most(min(ensemble_size, len(pool_texts)))
        k_tt = _pow2_at_most(len(tt_texts))
        sel_rand = rnglib.child_rng(seed, "selections", text)

        for budget in budgets:
            # Precompute single-variant PASS@budget and per-share failure ratios.
            single = {t: pass_at_k(attempts, wins[t], budget) for t in pool_texts}
            share = budget // k_ctrl
            ratio = {
                t: math.comb(attempts - wins[t], share) / math.comb(attempts, share)
                for t in pool_texts
            }

            seed_value = pass_at_k(attempts, wins[text], budget)

            random_values = [single[sel_rand.choice(pool_texts)] for _ in range(selections)]
            controlled_values = []
            for _ in range(selections):
                chosen = sel_rand.sample(pool_texts, k_ctrl)
                failure = 1.0
                for t in chosen:
                    failure *= ratio[t]
                controlled_values.append(1.0 - failure)
            tt_value = (
                1.0
                - math.prod(
                    math.comb(attempts - wins[t], budget // k_tt)
                    / math.comb(attempts, budget // k_tt)
                    for t in tt_texts[:k_tt]
                )
            )

            per_mode = {
                "seed": (seed_value, 0.0, 1),
                "random": (
                    statistics.fmean(random_values),
                    statistics.pstdev(random_values),
                    1,
                ),
                "controlled": (
                    statistics.fmean(controlled_values),
                    statistics.pstdev(controlled_values),
                    k_ctrl,
                ),
                "test-time": (tt_value, 0.0, k_tt),
            }
            for mode, (mean, std, k_used) in per_mode.items():
                stmt_rows.append((text, mode, budget, k_used, mean, std))
                key = (mode, budget)
                sums[key] = sums.get(key, 0.0) + mean
                counts_by_mode[key] = counts_by_mode.get(key, 0) + 1
        _release_memory([prover])

    means = {key: sums[key] / counts_by_mode[key] for key in sums}
    for (mode, budget), mean in sorted(means.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        rows.append((mode, budget, counts_by_mode[(mode, budget)], mean))

    ok = True
    for budget in budgets:
        base = means.get(("random", budget), 0.0)
        ok = ok and means.get(("controlled", budget), 0.0) >= base
        ok = ok and means.get(("test-time", budget), 0.0) >= base

    summary = {
        "statements": len(statements),
        "attempts_per_variant": attempts,
        "selections": selections,
        "budgets": list(budgets),
        "means": {f"{mode}@{budget}": mean for (mode, budget), mean in sorted(means.items())},
        "ensembles_beat_random": ok,
    }
    return StudyReport(
        kind="ensemble-eval",
        tables={
            "corpus": (("mode", "budget", "statements", "mean_pass"), rows),
            "statements": (("statement", "mode", "budget", "ensemble_size", "mean", "std"), stmt_rows),
        },
        summary=summary,
        passed=ok and bool(statements),
    )


# --- report output -------------------------------------------------------------------


def write_report(report: StudyReport, writer) -> None:
    """Write a StudyReport through a manifest.RunWriter."""
    for name in sorted(report.tables):
        header, rows = report.tables[name]
        writer.write_csv(f"{report.kind}-{name}.csv", header, rows)
    summary = dict(report.summary)
    summary["passed"] = report.passed
    writer.write_json(f"{report.kind}-summary.json", summary)
