"""A desk-scale lab for rewriting-aware theorem proving.

A tiny verifiable language of bounded integer statements, rewrite rules
with replayable rewrite arrows, sampling provers over tactic menus, and
the ensemble machinery to study how rewriting a statement before proving
it changes success rates — all exactly computable at desk scale.
"""

__version__ = "0.1.0"

from .category import (
    Arrow,
    ClassResult,
    HypRewrite,
    RewritingCategory,
    RuleApplication,
    realize_step,
    render_step,
)
from .corpus import CorpusConfig, generate_corpus, save_corpus
from .distributions import (
    ProofDistribution,
    SpreadResult,
    check_functoriality,
    check_proof_equivariance,
    invariance_spread,
    pushforward,
)
from .ensemble import (
    EnsembleConfig,
    EnsembleReport,
    Prior,
    check_holder,
    expected_success_exact,
    pass_at_k,
    pass_ens_at_k,
    prior_expected_success,
    run_ensemble,
    seeded_subsets,
    uniform_subsets,
)
from .parser import (
    ParseError,
    load_corpus,
    parse_corpus,
    parse_relation,
    parse_statement,
    parse_term,
)
from .provers import (
    MenuProver,
    NextTacticSequentialProver,
    Prover,
    RandomizedSearchProver,
    SyntheticProver,
    proof_distribution,
    prover_from_config,
    success_probability_exact,
    success_probability_mc,
)
from .rules import DEFAULT_RULES, RewriteRule, check_rule, load_rules, parse_rules
from .sampler import (
    SamplerConfig,
    SurpriseModel,
    VariantEntry,
    VariantSet,
    exhaustive_sample,
    select,
    surprise,
)
from .states import (
    EMPTY,
    ERROR,
    ProofState,
    apply_tactic,
    compile_statement,
    enumerate_tactics,
    parse_proof,
    parse_tactic,
    render_proof,
    render_tactic,
    run_proof,
    state_text,
    verify_proof,
)
from .terms import (
    DEFAULT_LIMITS,
    LanguageError,
    Limits,
    Relation,
    Statement,
    Term,
    decide_truth,
    render_relation,
    render_term,
    statement_text,
)

__all__ = [name for name in dir() if not name.startswith("_")]
