"""Command-line entry point.

Subcommands: gen-corpus, rewrite, prove, ensemble, simulate, report.  Every
run (except report) writes a fresh timestamped directory under --out with a
manifest and deterministic result files.  Exit codes: 0 on success, 1 when a
check or proof attempt fails, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import json
import os
import sys

from . import __version__
from . import rng as rnglib
from .category import RewritingCategory, render_step
from .corpus import CorpusConfig, generate_corpus, save_corpus
from .ensemble import EnsembleConfig, EnsembleError, Prior, run_ensemble
from .experiments import (
    run_ensemble_eval,
    run_equivariance_audit,
    run_invariance_study,
    run_limit_invariance,
    run_monotonicity,
    write_report,
)
from .manifest import MANIFEST_NAME, RunWriter, create_run_dir, sha256_file
from .parser import ParseError, load_corpus, parse_statement
from .provers import prover_from_config
from .rules import DEFAULT_RULES, RuleError, load_rules
from .sampler import SamplerConfig, SurpriseModel, select, variant_set_to_dict
from .states import render_proof
from .terms import DEFAULT_LIMITS, LanguageError, statement_text

SIMULATE_KINDS = ("limit-invariance", "monotonicity", "invariance", "equivariance", "ensemble-eval")

DEFAULT_CONFIG = """
[corpus]
size = 200
seed = 0
prefix = t
max_extra_hyps = 2
max_disguise = 2

[category]
growth = strict
class_cap = 10000
rules =

[prover]
kind = sequential
length = 3
epsilon = 1e-6
seed = 0
text_noise = 2.0
state_noise = 1.0

[sampler]
breadth = 15
depth = 2
draws = 20
keep = 8
include_seed = true
growth = strict
seed = 0

[surprise]
order = 3
alpha = 0.1

[ensemble]
size = 4
budget = 16
seed = 0
route_leftover = false

[simulate]
seed = 0
statements = 24
extra_hyps = 0
disguise = 0
depth = 2
budgets = 8,32,64
attempts = 64
selections = 2000
ensemble_size = 8
pool_depth = 1
pool_keep = 24
arrows = 50
law_checks = 100
support_cap = 50000
gap_tol = 1e-9
tol = 1e-10
max_members = 12
rename_checks = 10
limit_rules = add_comm,mul_comm,eq_comm
monotonicity_budgets = 8,12,24,64
"""


class UsageError(Exception):
    pass


def load_config(path: str | None) -> configparser.ConfigParser:
    cfg = configparser.ConfigParser()
    cfg.read_string(DEFAULT_CONFIG)
    if path:
        if not os.path.exists(path):
            raise UsageError(f"config file not found: {path}")
        cfg.read(path)
    return cfg


def config_snapshot(cfg: configparser.ConfigParser) -> dict:
    return {section: dict(cfg.items(section)) for section in cfg.sections()}


def apply_seed_override(cfg: configparser.ConfigParser, seed: int | None) -> None:
    if seed is None:
        return
    for section in ("corpus", "prover", "sampler", "ensemble", "simulate"):
        cfg.set(section, "seed", str(seed))


def build_category(cfg: configparser.ConfigParser, rule_names: str | None = None) -> RewritingCategory:
    section = cfg["category"]
    rules_path = section.get("rules", "").strip()
    rules = dict(load_rules(rules_path)) if rules_path else dict(DEFAULT_RULES)
    if rule_names:
        wanted = [name.strip() for name in rule_names.split(",") if name.strip()]
        missing = [name for name in wanted if name not in rules]
        if missing:
            raise UsageError(f"unknown rule ids: {', '.join(missing)}")
        rules = {name: rules[name] for name in wanted}
    return RewritingCategory(
        rules,
        DEFAULT_LIMITS,
        growth=section.get("growth", "strict"),
        class_cap=section.getint("class_cap", 10_000),
    )


def build_prover(cfg: configparser.ConfigParser, category: RewritingCategory, kind: str | None = None):
    section = dict(cfg.items("prover"))
    if kind:
        section["kind"] = kind
    return prover_from_config(section, category.rules, category.limits)


def build_sampler_config(cfg: configparser.ConfigParser) -> SamplerConfig:
    section = cfg["sampler"]
    return SamplerConfig(
        breadth=section.getint("breadth"),
        depth=section.getint("depth"),
        draws=section.getint("draws"),
        keep=section.getint("keep"),
        include_seed=section.getboolean("include_seed"),
        growth=section.get("growth"),
        seed=section.getint("seed"),
    )


def corpus_config(cfg: configparser.ConfigParser, size: int | None = None) -> CorpusConfig:
    section = cfg["corpus"]
    return CorpusConfig(
        size=size if size is not None else section.getint("size"),
        seed=section.getint("seed"),
        name_prefix=section.get("prefix"),
        max_extra_hyps=section.getint("max_extra_hyps"),
        max_disguise=section.getint("max_disguise"),
    )


def study_corpus_config(cfg: configparser.ConfigParser) -> CorpusConfig:
    """Corpus for the class-walking studies: fewer decorations, smaller menus."""
    sim = cfg["simulate"]
    return dataclasses.replace(
        corpus_config(cfg, sim.getint("statements")),
        seed=sim.getint("seed"),
        max_extra_hyps=sim.getint("extra_hyps"),
        max_disguise=sim.getint("disguise"),
    )


def load_statements(args, category: RewritingCategory, ccfg: CorpusConfig):
    """Statements from --statement, --corpus, or a generated corpus, in that order."""
    if getattr(args, "statement", None):
        return [parse_statement(args.statement)]
    if getattr(args, "corpus", None):
        if not os.path.exists(args.corpus):
            raise UsageError(f"corpus file not found: {args.corpus}")
        return load_corpus(args.corpus)
    return generate_corpus(ccfg, category)


def pick_statement(statements, index: int):
    if not (0 <= index < len(statements)):
        raise UsageError(f"statement index {index} outside 0..{len(statements) - 1}")
    return statements[index]


def train_model(cfg: configparser.ConfigParser, statements) -> SurpriseModel:
    section = cfg["surprise"]
    model = SurpriseModel(order=section.getint("order"), alpha=section.getfloat("alpha"))
    return model.train(statements)


def int_list(text: str) -> list[int]:
    return [int(part) for part in text.split(",") if part.strip()]


# --- subcommands -----------------------------------------------------------------


def cmd_gen_corpus(args, cfg) -> int:
    category = build_category(cfg)
    ccfg = corpus_config(cfg, args.size)
    statements = generate_corpus(ccfg, category)
    writer = _writer(args, cfg, "gen-corpus")
    path = writer.path("corpus.txt")
    save_corpus(path, statements, header=f"generated corpus: size={ccfg.size} seed={ccfg.seed}")
    writer.manifest.results["corpus.txt"] = sha256_file(path)
    writer.write_json(
        "corpus-summary.json",
        {"size": len(statements), "seed": ccfg.seed, "names": [s.name for s in statements]},
    )
    writer.finish(passed=True)
    print(f"wrote {len(statements)} statements to {path}")
    return 0


def cmd_rewrite(args, cfg) -> int:
    category = build_category(cfg)
    statements = load_statements(args, category, corpus_config(cfg, cfg["simulate"].getint("statements")))
    s = pick_statement(statements, args.index)
    result = category.class_with_arrows(s, args.depth)
    members = sorted(statement_text(m) for m in result.members)
    writer = _writer(args, cfg, "rewrite")
    writer.write_json(
        "class.json",
        {
            "seed": statement_text(s),
            "depth": args.depth,
            "closed": result.closed,
            "members": members,
            "arrows": {
                text: [render_step(step) for step in result.arrows[text].steps]
                for text in members
            },
        },
    )
    writer.finish(passed=True)
    print(f"class of {s.name}: {len(members)} members (closed={result.closed})")
    for text in members:
        print(f"  {text}")
    return 0


def cmd_prove(args, cfg) -> int:
    category = build_category(cfg)
    prover = build_prover(cfg, category, args.prover)
    statements = load_statements(args, category, corpus_config(cfg, cfg["simulate"].getint("statements")))
    s = pick_statement(statements, args.index)

    proof = None
    used = 0
    for a in range(args.attempts):
        used = a + 1
        ok, candidate = prover.attempt(s, rnglib.child_rng(cfg["prover"].getint("seed"), "prove", a))
        if ok:
            proof = candidate
            break

    writer = _writer(args, cfg, "prove")
    writer.write_json(
        "proof.json",
        {
            "statement": statement_text(s),
            "solved": proof is not None,
            "attempts": used,
            "proof": render_proof(proof) if proof is not None else None,
        },
    )
    writer.finish(passed=proof is not None)
    if proof is None:
        print(f"no proof of {s.name} in {used} attempts")
        return 1
    print(f"proved {s.name} in {used} attempts: {render_proof(proof)}")
    return 0


def cmd_ensemble(args, cfg) -> int:
    category = build_category(cfg)
    prover = build_prover(cfg, category, args.prover)
    statements = load_statements(args, category, corpus_config(cfg, cfg["simulate"].getint("statements")))
    s = pick_statement(statements, args.index)
    model = train_model(cfg, statements)

    scfg = build_sampler_config(cfg)
    esec = cfg["ensemble"]
    ecfg = EnsembleConfig(
        ensemble_size=esec.getint("size"),
        budget=esec.getint("budget"),
        seed=esec.getint("seed"),
        route_leftover_to_seed=esec.getboolean("route_leftover"),
    )
    scfg = dataclasses.replace(scfg, keep=ecfg.ensemble_size)
    variants = select(category, s, scfg, model)
    report = run_ensemble(variants, prover, ecfg)

    writer = _writer(args, cfg, "ensemble")
    writer.write_json("variants.json", variant_set_to_dict(variants))
    writer.write_json(
        "ensemble.json",
        {
            "seed_statement": report.seed_statement,
            "ensemble_size": report.ensemble_size,
            "budget": report.budget,
            "attempts_per_variant": report.attempts_per_variant,
            "leftover": report.leftover,
            "leftover_routed": report.leftover_routed,
            "solved": report.solved,
            "winning_variant": report.winning_variant,
            "proof": report.proof,
            "total_successes": report.total_successes,
            "outcomes": [
                {"statement": o.statement, "attempts": o.attempts, "successes": o.successes}
                for o in report.outcomes
            ],
        },
    )
    writer.finish(passed=report.solved)
    status = "solved" if report.solved else "unsolved"
    print(f"{status}: {report.total_successes} successes across {len(report.outcomes)} slots")
    return 0 if report.solved else 1


def cmd_simulate(args, cfg) -> int:
    sim = cfg["simulate"]
    category = build_category(cfg)
    n = sim.getint("statements")

    if args.kind == "monotonicity":
        priors = {
            "point-half": Prior.point(0.5),
            "two-point": Prior.uniform([0.1, 0.9]),
            "three-point": Prior.uniform([0.0, 0.5, 1.0]),
        }
        report = run_monotonicity(priors, budgets=int_list(sim.get("monotonicity_budgets")))
    elif args.kind == "limit-invariance":
        limit_category = build_category(cfg, rule_names=sim.get("limit_rules"))
        prover = build_prover(cfg, limit_category)
        statements = load_statements(args, limit_category, study_corpus_config(cfg))
        report = run_limit_invariance(
            statements,
            prover,
            limit_category,
            depth=sim.getint("depth"),
            gap_tol=sim.getfloat("gap_tol"),
            max_members=sim.getint("max_members"),
        )
    elif args.kind == "invariance":
        statements = load_statements(args, category, study_corpus_config(cfg))
        provers = {
            "text": build_prover(cfg, category, "text"),
            "sequential": build_prover(cfg, category, "sequential"),
        }
        report = run_invariance_study(
            statements,
            provers,
            category,
            depth=sim.getint("depth"),
            max_members=sim.getint("max_members"),
            rename_checks=sim.getint("rename_checks"),
        )
    elif args.kind == "equivariance":
        statements = load_statements(args, category, study_corpus_config(cfg))
        provers = {
            "sequential": build_prover(cfg, category, "sequential"),
            "text": build_prover(cfg, category, "text"),
        }
        report = run_equivariance_audit(
            statements,
            category,
            provers,
            equivariant=("sequential",),
            n_arrows=sim.getint("arrows"),
            tol=sim.getfloat("tol"),
            law_checks=sim.getint("law_checks"),
            seed=sim.getint("seed"),
            support_cap=sim.getint("support_cap"),
        )
    elif args.kind == "ensemble-eval":
        statements = load_statements(args, category, corpus_config(cfg, n))
        prover = build_prover(cfg, category, "text")
        model = train_model(cfg, statements)
        report = run_ensemble_eval(
            statements,
            prover,
            category,
            build_sampler_config(cfg),
            model,
            budgets=tuple(int_list(sim.get("budgets"))),
            attempts=sim.getint("attempts"),
            selections=sim.getint("selections"),
            ensemble_size=sim.getint("ensemble_size"),
            pool_depth=sim.getint("pool_depth"),
            pool_keep=sim.getint("pool_keep"),
            seed=sim.getint("seed"),
        )
    else:
        raise UsageError(f"unknown simulation kind {args.kind!r}")

    writer = _writer(args, cfg, f"simulate-{args.kind}")
    write_report(report, writer)
    writer.finish(passed=report.passed)
    print(f"{args.kind}: {'PASS' if report.passed else 'FAIL'} ({writer.run_dir})")
    for key, value in sorted(report.summary.items()):
        print(f"  {key}: {value}")
    return 0 if report.passed else 1


def cmd_report(args, cfg) -> int:
    manifest_path = os.path.join(args.run, MANIFEST_NAME)
    if not os.path.exists(manifest_path):
        raise UsageError(f"no {MANIFEST_NAME} in {args.run}")
    with open(manifest_path, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    print(f"command:  {manifest.get('command')}")
    print(f"version:  {manifest.get('version')}")
    print(f"seed:     {manifest.get('seed')}")
    print(f"started:  {manifest.get('started')}")
    print(f"finished: {manifest.get('finished')}")
    print(f"passed:   {manifest.get('passed')}")
    results = manifest.get("results", {})
    print(f"results:  {len(results)} file(s)")
    for name in sorted(results):
        print(f"  {name}  sha256={results[name]}")
        if name.endswith("-summary.json"):
            with open(os.path.join(args.run, name), "r", encoding="utf-8") as fh:
                summary = json.load(fh)
            for key in sorted(summary):
                print(f"    {key}: {summary[key]}")
    return 0


# --- wiring ----------------------------------------------------------------------


def _writer(args, cfg, command: str) -> RunWriter:
    run_dir = create_run_dir(args.out, command)
    snapshot = config_snapshot(cfg)
    snapshot["jobs"] = str(args.jobs)
    seed = args.seed if args.seed is not None else cfg["simulate"].getint("seed")
    return RunWriter(run_dir, command, snapshot, seed, __version__)


def build_argparser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="rwlab",
        description="A desk-scale lab for rewriting-aware theorem proving.",
    )
    ap.add_argument("--config", help="INI config file overriding the built-in defaults")
    ap.add_argument("--seed", type=int, default=None, help="override every configured seed")
    ap.add_argument("--out", default="runs", help="root directory for run outputs")
    ap.add_argument(
        "--jobs", type=int, default=1, help="worker hint recorded in the manifest (runs are single-threaded)"
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-corpus", help="generate a true-by-construction statement corpus")
    p.add_argument("--size", type=int, default=None, help="number of statements")
    p.set_defaults(fn=cmd_gen_corpus)

    p = sub.add_parser("rewrite", help="enumerate a statement's rewrite class")
    p.add_argument("--statement", help="statement text")
    p.add_argument("--corpus", help="corpus file to pick from")
    p.add_argument("--index", type=int, default=0, help="statement index in the corpus")
    p.add_argument("--depth", type=int, default=2, help="rewrite depth")
    p.set_defaults(fn=cmd_rewrite)

    p = sub.add_parser("prove", help="attempt a proof with a sampling prover")
    p.add_argument("--statement", help="statement text")
    p.add_argument("--corpus", help="corpus file to pick from")
    p.add_argument("--index", type=int, default=0, help="statement index in the corpus")
    p.add_argument("--prover", choices=("text", "sequential"), default=None)
    p.add_argument("--attempts", type=int, default=16, help="independent sampling attempts")
    p.set_defaults(fn=cmd_prove)

    p = sub.add_parser("ensemble", help="run a rewrite ensemble on one statement")
    p.add_argument("--statement", help="statement text")
    p.add_argument("--corpus", help="corpus file to pick from")
    p.add_argument("--index", type=int, default=0, help="statement index in the corpus")
    p.add_argument("--prover", choices=("text", "sequential"), default=None)
    p.set_defaults(fn=cmd_ensemble)

    p = sub.add_parser("simulate", help="run one of the repeatable studies")
    p.add_argument("kind", choices=SIMULATE_KINDS)
    p.add_argument("--statement", help="statement text")
    p.add_argument("--corpus", help="corpus file with the study statements")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("report", help="print the manifest and summaries of a run directory")
    p.add_argument("--run", required=True, help="run directory")
    p.set_defaults(fn=cmd_report)

    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_argparser()
    args = ap.parse_args(argv)
    if args.jobs < 1:
        ap.error("--jobs must be at least 1")
    try:
        cfg = load_config(args.config)
        apply_seed_override(cfg, args.seed)
        return args.fn(args, cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (ParseError, RuleError, LanguageError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except EnsembleError as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
