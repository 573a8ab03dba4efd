"""Quality assurance and evaluation of dependency-syntax treebank annotation.

Modules
-------
treebank    data model, TSV reader/writer, tree validation, diffs
lint        declarative consistency rules and their checker
metrics     UAS / LAS / FULL attachment scores against gold
agreement   unlabeled, labeled and full Cohen's kappa
stats       bootstrap standard deviation, Monte Carlo permutation test
experiment  balanced design, timing ledger, cost extrapolation, adjudication
report      consolidated report over an experiment bundle
synthetic   random well-formed annotations for tests and simulations
"""

from .agreement import (AgreementResult, full_kappa, labeled_kappa, pairwise_agreement,
                        unlabeled_kappa)
from .experiment import (DesignTable, TimingLedger, adjudication_bundle, extrapolate_hours,
                         extrapolate_setups, generate_design, time_summary, verify_design)
from .lint import Finding, RuleSet, default_ruleset, explain_finding, load_ruleset, run_checks
from .metrics import ScoreReport, attachment_scores, average_scores
from .stats import SentenceStat, bootstrap_stddev, permutation_test
from .synthetic import perturb, random_document, setup_stats
from .treebank import (DEFAULT_INVENTORY, AffixSet, AfunInventory, AnnotatedSentence, Document,
                       Label, ParseError, Token, diff_annotations, parse_document, read_document,
                       serialize_document, validate_tree)

__version__ = "0.1.0"
