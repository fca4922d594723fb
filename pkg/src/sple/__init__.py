"""Self-training toolkit with dropout-ensemble pseudo-label editing."""

from .benchmark import BIASED_BENCHMARK, DEFAULT_BENCHMARK, BenchmarkSpec, make_benchmark
from .data import (
    EnsembleRecord,
    EnsembleRecordSet,
    LabeledCorpus,
    Sample,
    SyntheticSpec,
    generate_synthetic_corpus,
    load_corpus,
    load_records,
    select_unlabeled,
    write_corpus,
    write_records,
)
from .editing import (
    EditedLabel,
    EditedLabelSet,
    VoteOutcome,
    edit_labels,
    filter_uncertain,
    majority_vote,
)
from .ensemble import (
    EnsembleConfig,
    augmented_label,
    deterministic_label,
    mix_pass_seed,
)
from .errors import (
    ConfigurationError,
    DataFormatError,
    DataIntegrityError,
    DegenerateScoreError,
    NumericalError,
    SizeError,
    SpleError,
    TemplateError,
)
from .scorer import (
    BUILTIN_TEMPLATES,
    ClassScores,
    ReferenceClassifier,
    ScorerContract,
    SuppositionTemplate,
    binary_truth_prob,
    build_supposition,
    load_templates,
    max_confidence_target,
    rank_multiclass,
    write_templates,
)
from .selftrain import (
    STRATEGIES,
    ComparisonTable,
    RunReport,
    StrategyConfig,
    compare_strategies,
    label_distribution,
    pseudo_label_accuracy,
    run_strategy,
)
from .uncertainty import (
    LabelPriors,
    NeighborList,
    UncertaintyReport,
    cut_edge_statistic,
    knn,
    neighbor_lists,
    null_moments,
    uncertainty_scores,
)

__version__ = "0.1.0"
