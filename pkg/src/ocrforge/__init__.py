"""Synthetic OCR noise, confusion-profile learning, and corrector evaluation.

The pipeline: learn a confusion profile from aligned noisy/gold text, replay
it into clean text at a calibrated noise ratio, train or wrap a corrector,
and score it with alignment-based character and word metrics.
"""

__version__ = "0.1.0"

from .align import (
    DEFAULT_DELIMITERS,
    DEFAULT_SCORING,
    UNIT_SCORING,
    Alignment,
    AlignmentScoring,
    EditOp,
    OpKind,
    WordAlignmentCounts,
    format_edit_script,
    levenshtein,
    needleman_wunsch,
    parse_edit_script,
    word_align_counts,
)
from .corpus import (
    CharFrequencyTable,
    Corpus,
    SentencePair,
    build_char_frequency_table,
    load_parallel_corpus,
    load_parallel_tsv,
    load_plain_corpus,
    normalize_line,
    split_train_valid,
    write_parallel,
    write_parallel_tsv,
)
from .corrector import (
    Corrector,
    CorrectorHyper,
    NoisyChannelModel,
    TUNABLE_DOMAINS,
    correct_line,
    load_model,
    save_model,
    train_noisy_channel,
    validation_accuracy,
)
from .errors import CorpusError, ProtocolError, StageFailedError
from .metrics import (
    CharAlignmentCounts,
    CorrectionEval,
    McNemarResult,
    acc_char,
    cer,
    char_counts_corpus,
    discordant_counts,
    evaluate_corrector,
    format_report_table,
    mcnemar,
    report_rows,
    wer,
    word_counts_corpus,
    write_report_tsv,
)
from .noise import (
    ConfusionEntry,
    ErrorProfile,
    ErrorType,
    ErrorTypeHistogram,
    InjectionCounters,
    NoiseConfig,
    classify_errors,
    error_histogram,
    extract_confusions,
    inject_corpus,
    inject_line,
    iter_injected,
    line_rng,
    load_profile,
    noise_sweep,
    save_histogram,
    save_profile,
)
from .optimizer import (
    GreedyResult,
    HyperParam,
    HyperParamSpace,
    TrialRecord,
    fingerprint_config,
    greedy_search,
    grid_search,
    load_space,
    load_trial_log,
    builtin_search_space,
    save_space,
)

__all__ = [
    "__version__",
    "DEFAULT_DELIMITERS",
    "DEFAULT_SCORING",
    "UNIT_SCORING",
    "Alignment",
    "AlignmentScoring",
    "EditOp",
    "OpKind",
    "WordAlignmentCounts",
    "format_edit_script",
    "levenshtein",
    "needleman_wunsch",
    "parse_edit_script",
    "word_align_counts",
    "CharFrequencyTable",
    "Corpus",
    "SentencePair",
    "build_char_frequency_table",
    "load_parallel_corpus",
    "load_parallel_tsv",
    "load_plain_corpus",
    "normalize_line",
    "split_train_valid",
    "write_parallel",
    "write_parallel_tsv",
    "Corrector",
    "CorrectorHyper",
    "NoisyChannelModel",
    "TUNABLE_DOMAINS",
    "correct_line",
    "load_model",
    "save_model",
    "train_noisy_channel",
    "validation_accuracy",
    "CorpusError",
    "ProtocolError",
    "StageFailedError",
    "CharAlignmentCounts",
    "CorrectionEval",
    "McNemarResult",
    "acc_char",
    "cer",
    "char_counts_corpus",
    "discordant_counts",
    "evaluate_corrector",
    "format_report_table",
    "mcnemar",
    "report_rows",
    "wer",
    "word_counts_corpus",
    "write_report_tsv",
    "ConfusionEntry",
    "ErrorProfile",
    "ErrorType",
    "ErrorTypeHistogram",
    "InjectionCounters",
    "NoiseConfig",
    "classify_errors",
    "error_histogram",
    "extract_confusions",
    "inject_corpus",
    "inject_line",
    "iter_injected",
    "line_rng",
    "load_profile",
    "noise_sweep",
    "save_histogram",
    "save_profile",
    "GreedyResult",
    "HyperParam",
    "HyperParamSpace",
    "TrialRecord",
    "fingerprint_config",
    "greedy_search",
    "grid_search",
    "load_space",
    "load_trial_log",
    "builtin_search_space",
    "save_space",
]
