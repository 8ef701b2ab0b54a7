"""Confusion-profile extraction and calibrated synthetic noise injection.

Injection applies four stages to each line, in order, all gated by the noise
ratio NR:

1. with probability NR, delete one character chosen by frequency weight;
2. with probability NR, insert one frequency-sampled character at a uniform
   position;
3. with probability NR, perform k adjacent-character swaps, k uniform in
   {1..max_swaps};
4. for each profile entry (error e, correct c, probability EP), if the line
   contains c, replace one uniformly chosen occurrence with e with
   probability NR * EP.

Every line draws from its own RNG stream derived from (seed, line index)
through a splitmix64 avalanche, so corpus output is byte-identical no matter
how lines are batched or parallelized.
"""

from __future__ import annotations

import random
import warnings
from collections import Counter
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Iterator, Sequence

from .align import (
    Alignment,
    AlignmentScoring,
    DEFAULT_SCORING,
    UNIT_SCORING,
    OpKind,
    align_codes,
    needleman_wunsch,
)
from .corpus import CharFrequencyTable, Corpus
from .errors import CorpusError
from . import kernels

__all__ = [
    "ConfusionEntry",
    "ErrorProfile",
    "ErrorType",
    "ErrorTypeHistogram",
    "NoiseConfig",
    "InjectionCounters",
    "extract_confusions",
    "classify_errors",
    "error_histogram",
    "inject_line",
    "inject_corpus",
    "iter_injected",
    "noise_sweep",
    "line_rng",
    "load_profile",
    "save_profile",
    "save_histogram",
]


@dataclass(frozen=True)
class ConfusionEntry:
    """One OCR confusion: the erroneous character, its correction, and its share
    of all observed substitutions."""

    error_char: str
    correct_char: str
    probability: float

    def __post_init__(self) -> None:
        if len(self.error_char) != 1 or len(self.correct_char) != 1:
            raise ValueError("confusion entries are single characters")
        if self.error_char == self.correct_char:
            raise ValueError(f"degenerate confusion {self.error_char!r} -> itself")
        if not 0.0 < self.probability <= 1.0:
            raise ValueError(f"probability {self.probability} outside (0, 1]")


@dataclass(frozen=True)
class ErrorProfile:
    """Confusion entries sorted by descending probability.

    Ties are ordered by (correct_char, error_char) code points so profiles
    serialize deterministically.
    """

    entries: tuple[ConfusionEntry, ...]
    total_substitutions: int = 0
    source_label: str = ""

    def __post_init__(self) -> None:
        ordered = tuple(
            sorted(self.entries, key=lambda e: (-e.probability, e.correct_char, e.error_char))
        )
        object.__setattr__(self, "entries", ordered)

    def lookup(self) -> dict[tuple[str, str], float]:
        """Map (error_char, correct_char) -> probability."""
        return {(e.error_char, e.correct_char): e.probability for e in self.entries}

    def __len__(self) -> int:
        return len(self.entries)


class ErrorType(Enum):
    CHAR_REPLACEMENT = "CharReplacement"
    CHAR_SWAP = "CharSwap"
    MISSING_SPACE = "MissingSpace"
    REDUNDANT_SPACE = "RedundantSpace"
    REDUNDANT_CHAR = "RedundantChar"
    MISSING_CHAR = "MissingChar"


@dataclass
class ErrorTypeHistogram:
    """Counts per error type with derived fractions."""

    counts: Counter = field(default_factory=Counter)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def fraction(self, kind: ErrorType) -> float:
        total = self.total
        return self.counts[kind] / total if total else 0.0

    def merge(self, other: "ErrorTypeHistogram") -> None:
        self.counts.update(other.counts)


@dataclass(frozen=True)
class NoiseConfig:
    """Parameters of one injection run."""

    noise_ratio: float
    char_freq: CharFrequencyTable
    profile: ErrorProfile | None = None
    seed: int = 42
    max_swaps: int = 2

    def __post_init__(self) -> None:
        if not 0.0 < self.noise_ratio < 1.0:
            raise ValueError(f"noise ratio must satisfy 0 < NR < 1, got {self.noise_ratio}")
        if self.max_swaps < 1:
            raise ValueError(f"max_swaps must be at least 1, got {self.max_swaps}")


@dataclass
class InjectionCounters:
    """Realized event tallies for calibration checks and CLI reporting."""

    lines: int = 0
    deletions: int = 0
    insertions: int = 0
    swap_events: int = 0
    eligible: Counter = field(default_factory=Counter)
    fired: Counter = field(default_factory=Counter)

    @property
    def deletion_rate(self) -> float:
        return self.deletions / self.lines if self.lines else 0.0

    @property
    def insertion_rate(self) -> float:
        return self.insertions / self.lines if self.lines else 0.0

    @property
    def swap_rate(self) -> float:
        return self.swap_events / self.lines if self.lines else 0.0

    def fired_rate(self, key: tuple[str, str]) -> float:
        return self.fired[key] / self.eligible[key] if self.eligible[key] else 0.0

    def merge(self, other: "InjectionCounters") -> None:
        """Fold another tally in; used to combine per-worker counters."""
        self.lines += other.lines
        self.deletions += other.deletions
        self.insertions += other.insertions
        self.swap_events += other.swap_events
        self.eligible.update(other.eligible)
        self.fired.update(other.fired)


# ---------------------------------------------------------------------------
# Extraction and classification


def _iter_op_chars(gold: str, other: str, scoring: AlignmentScoring) -> Iterator[tuple[int, str | None, str | None]]:
    codes = align_codes(gold, other, scoring)
    gi = 0
    oi = 0
    for code in codes:
        if code == kernels.OP_MATCH:
            yield code, gold[gi], other[oi]
            gi += 1
            oi += 1
        elif code == kernels.OP_SUB:
            yield code, gold[gi], other[oi]
            gi += 1
            oi += 1
        elif code == kernels.OP_DEL:
            yield code, gold[gi], None
            gi += 1
        else:
            yield code, None, other[oi]
            oi += 1


def extract_confusions(
    corpus: Corpus,
    scoring: AlignmentScoring = DEFAULT_SCORING,
    source_label: str = "",
) -> ErrorProfile:
    """Learn a confusion profile from a parallel corpus.

    Every pair is aligned and each Substitute op (gold g read as e) counts
    toward entry (error_char=e, correct_char=g); an entry's probability is its
    share of all substitutions.  A corpus without substitutions yields an
    empty profile.

    Extraction aligns under the similarity scoring on purpose: with matches
    worth +1, a substitution op only survives where no match is recoverable,
    so transpositions and stray indels decompose into gap ops instead of
    polluting the substitution counts.
    """
    counts: Counter[tuple[str, str]] = Counter()
    for pair in corpus:
        for code, g, o in _iter_op_chars(pair.gold, pair.noisy, scoring):
            if code == kernels.OP_SUB:
                counts[(o, g)] += 1
    total = sum(counts.values())
    entries = tuple(
        ConfusionEntry(error_char=e, correct_char=c, probability=n / total)
        for (e, c), n in counts.items()
    )
    return ErrorProfile(
        entries=entries,
        total_substitutions=total,
        source_label=source_label or corpus.name,
    )


def _is_space(ch: str) -> bool:
    return ch.isspace()


def classify_errors(alignment: Alignment) -> ErrorTypeHistogram:
    """Classify each non-Match op of an alignment into an error type.

    Adjacent Substitute pairs of the form (a read as b)(b read as a) count as
    one CharSwap and consume both ops; remaining Substitutes are
    CharReplacement.  Deletes split into MissingSpace/MissingChar and Inserts
    into RedundantSpace/RedundantChar by whether the character is whitespace.
    """
    hist = ErrorTypeHistogram()
    ops = alignment.ops
    i = 0
    while i < len(ops):
        op = ops[i]
        if op.kind is OpKind.SUBSTITUTE and i + 1 < len(ops):
            nxt = ops[i + 1]
            if (
                nxt.kind is OpKind.SUBSTITUTE
                and op.gold_char == nxt.other_char
                and op.other_char == nxt.gold_char
            ):
                hist.counts[ErrorType.CHAR_SWAP] += 1
                i += 2
                continue
        if op.kind is OpKind.SUBSTITUTE:
            hist.counts[ErrorType.CHAR_REPLACEMENT] += 1
        elif op.kind is OpKind.DELETE:
            kind = ErrorType.MISSING_SPACE if _is_space(op.gold_char) else ErrorType.MISSING_CHAR
            hist.counts[kind] += 1
        elif op.kind is OpKind.INSERT:
            kind = ErrorType.REDUNDANT_SPACE if _is_space(op.other_char) else ErrorType.REDUNDANT_CHAR
            hist.counts[kind] += 1
        i += 1
    return hist


def error_histogram(corpus: Corpus, scoring: AlignmentScoring = UNIT_SCORING) -> ErrorTypeHistogram:
    """Aggregate error-type counts over every pair of a parallel corpus.

    Classification aligns under unit-cost scoring: there a transposition
    surfaces as two adjacent complementary substitutions, which is the shape
    classify_errors folds into one CharSwap.  The similarity scoring would
    split the same transposition into insert+match+delete and hide it.
    """
    hist = ErrorTypeHistogram()
    for pair in corpus:
        hist.merge(classify_errors(needleman_wunsch(pair.gold, pair.noisy, scoring)))
    return hist


# ---------------------------------------------------------------------------
# Injection


_MASK = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def line_rng(seed: int, index: int) -> random.Random:
    """Independent per-line RNG stream derived from (seed, line index)."""
    return random.Random(_splitmix64(_splitmix64(seed & _MASK) ^ (index & _MASK)))


def _weighted_delete_index(chars: list[str], table: CharFrequencyTable, rng: random.Random) -> int:
    weights = [table.weight(c) for c in chars]
    total = sum(weights)
    r = rng.random() * total
    acc = 0.0
    for i, w in enumerate(weights):
        acc += w
        if r < acc:
            return i
    return len(chars) - 1


def _weighted_insert_char(table: CharFrequencyTable, rng: random.Random) -> str:
    r = rng.random()
    acc = 0.0
    last = ""
    for ch, w in table.entries.items():
        acc += w
        last = ch
        if r < acc:
            return ch
    return last


def inject_line(
    line: str,
    config: NoiseConfig,
    rng: random.Random,
    counters: InjectionCounters | None = None,
) -> str:
    """Apply the four noise stages to one line.

    Draw order is fixed: three stage gates each consume one rng.random() call;
    applied ops then consume their own draws (deletion: one weighted draw;
    insertion: char draw then position; swaps: count then one position per
    swap; profile stage: one gate per eligible entry, then the occurrence
    pick).  Lines with fewer than 2 characters skip the deletion and swap
    stages after their gates.
    """
    chars = list(line)
    nr = config.noise_ratio
    if counters is not None:
        counters.lines += 1

    if rng.random() < nr and len(chars) >= 2:
        del chars[_weighted_delete_index(chars, config.char_freq, rng)]
        if counters is not None:
            counters.deletions += 1

    if rng.random() < nr:
        ch = _weighted_insert_char(config.char_freq, rng)
        chars.insert(rng.randrange(len(chars) + 1), ch)
        if counters is not None:
            counters.insertions += 1

    if rng.random() < nr and len(chars) >= 2:
        swaps = rng.randint(1, config.max_swaps)
        for _ in range(swaps):
            pos = rng.randrange(len(chars) - 1)
            chars[pos], chars[pos + 1] = chars[pos + 1], chars[pos]
        if counters is not None:
            counters.swap_events += 1

    if config.profile is not None and chars:
        present = set(chars)
        for entry in config.profile.entries:
            if entry.correct_char not in present:
                continue
            key = (entry.error_char, entry.correct_char)
            if counters is not None:
                counters.eligible[key] += 1
            if rng.random() < nr * entry.probability:
                occurrences = [i for i, c in enumerate(chars) if c == entry.correct_char]
                pick = occurrences[rng.randrange(len(occurrences))]
                chars[pick] = entry.error_char
                present = set(chars)
                if counters is not None:
                    counters.fired[key] += 1

    return "".join(chars)


def iter_injected(
    lines: Iterable[str],
    config: NoiseConfig,
    counters: InjectionCounters | None = None,
) -> Iterator[tuple[str, str]]:
    """Stream (noisy, gold) pairs; line i draws from line_rng(seed, i)."""
    for i, gold in enumerate(lines):
        yield inject_line(gold, config, line_rng(config.seed, i), counters), gold


def inject_corpus(
    lines: Iterable[str],
    config: NoiseConfig,
    counters: InjectionCounters | None = None,
    name: str = "",
) -> Corpus:
    """Materialize a synthetic parallel corpus from clean gold lines.

    Output is a pure function of (lines, config): each line's noise stream
    depends only on the seed and the line index.
    """
    pairs = list(iter_injected(lines, config, counters))
    if not pairs:
        raise CorpusError("no input lines to inject")
    return Corpus.from_lines((n for n, _ in pairs), (g for _, g in pairs), name=name)


def noise_sweep(
    lines: Sequence[str],
    base_config: NoiseConfig,
    ratios: Sequence[float],
    evaluator: Callable[[Corpus], float],
) -> list[tuple[float, float]]:
    """Inject the same lines at several noise ratios and score each corpus.

    Returns [(ratio, evaluator value)] in the given ratio order.  Degradation
    is expected to grow with the ratio but is reported, not enforced.
    """
    if not ratios:
        raise ValueError("ratios must be non-empty")
    rows: list[tuple[float, float]] = []
    for ratio in ratios:
        config = replace(base_config, noise_ratio=ratio)
        rows.append((ratio, evaluator(inject_corpus(lines, config))))
    return rows


# ---------------------------------------------------------------------------
# Profile and histogram files


def save_profile(profile: ErrorProfile, path: str | Path) -> None:
    """Write a profile as TSV rows: error_char<TAB>correct_char<TAB>probability."""
    with open(path, "w", encoding="utf-8") as fh:
        for e in profile.entries:
            fh.write(f"{e.error_char}\t{e.correct_char}\t{e.probability:.10g}\n")


def load_profile(path: str | Path) -> ErrorProfile:
    """Read a profile TSV.

    Rows whose error and correct characters coincide carry no usable signal
    and are dropped with a warning; malformed rows are structural errors.
    """
    entries: list[ConfusionEntry] = []
    with open(path, "r", encoding="utf-8-sig") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line or line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) != 3:
                raise CorpusError(f"profile line {lineno}: expected 3 columns, got {len(cols)}")
            error_char, correct_char, prob_text = cols
            try:
                prob = float(prob_text)
            except ValueError as exc:
                raise CorpusError(f"profile line {lineno}: bad probability {prob_text!r}") from exc
            if error_char == correct_char:
                warnings.warn(
                    f"profile line {lineno}: degenerate row {error_char!r} -> itself dropped",
                    stacklevel=2,
                )
                continue
            try:
                entries.append(ConfusionEntry(error_char, correct_char, prob))
            except ValueError as exc:
                raise CorpusError(f"profile line {lineno}: {exc}") from exc
    return ErrorProfile(entries=tuple(entries), source_label=Path(path).stem)


def save_histogram(hist: ErrorTypeHistogram, path: str | Path) -> None:
    """Write error-type counts as TSV rows: error_type<TAB>count<TAB>fraction."""
    with open(path, "w", encoding="utf-8") as fh:
        for kind in ErrorType:
            fh.write(f"{kind.value}\t{hist.counts[kind]}\t{hist.fraction(kind):.6f}\n")
