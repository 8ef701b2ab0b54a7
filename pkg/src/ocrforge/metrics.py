"""Correction-quality metrics.

Character accuracy increase measures how much of the OCR damage a corrector
repaired:

    acc_char = 100 * (lev(GS, OCRed) - lev(GS, Fixed)) / lev(GS, OCRed)

clamped to 0 when the corrector made things worse, and degenerating to
100/0 on already-clean input.  Corpus-level values aggregate the summed
distances (micro average), not per-line means.

WER and CER follow (S + I + D) / N over word and character units of the gold
side, with word units attributed through the character alignment.  All
alignments here use unit-cost scoring, so per-line character edit totals
equal the Levenshtein distance exactly.
"""

from __future__ import annotations

import datetime as _dt
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from scipy.special import chdtrc
from scipy.stats import binom

from .align import (
    DEFAULT_DELIMITERS,
    UNIT_SCORING,
    WordAlignmentCounts,
    align_codes,
    code_counts,
    levenshtein,
    needleman_wunsch,
    word_align_counts,
)
from .errors import CorpusError

__all__ = [
    "CharAlignmentCounts",
    "CorrectionEval",
    "McNemarResult",
    "acc_char",
    "wer",
    "cer",
    "word_counts_corpus",
    "char_counts_corpus",
    "mcnemar",
    "discordant_counts",
    "evaluate_corrector",
    "report_rows",
    "format_report_table",
    "write_report_tsv",
]

Lines = "str | Sequence[str]"


@dataclass(frozen=True)
class CharAlignmentCounts:
    """Character-level error tallies against the gold side."""

    n_chars: int
    substituted: int
    inserted: int
    deleted: int


@dataclass(frozen=True)
class CorrectionEval:
    """Full evaluation of corrected output against gold and the raw OCR text."""

    acc_char: float
    wer: float
    cer: float
    word_counts: WordAlignmentCounts
    char_counts: CharAlignmentCounts


@dataclass(frozen=True)
class McNemarResult:
    """Continuity-corrected McNemar test over discordant pair counts b and c.

    exact_p carries the two-sided exact binomial p-value whenever b + c < 25,
    where the chi-square approximation is unreliable.
    """

    chi_square: float
    p_value: float
    b: int
    c: int
    exact_p: float | None = None


def _as_lines(text: "str | Sequence[str]") -> list[str]:
    if isinstance(text, str):
        return [text]
    return list(text)


def _paired(a: list[str], b: list[str], what: str) -> None:
    if len(a) != len(b):
        raise CorpusError(f"{what}: line count mismatch {len(a)}≠{len(b)}")


def acc_char(gs: "str | Sequence[str]", ocred: "str | Sequence[str]", fixed: "str | Sequence[str]") -> float:
    """Percentage of OCR character damage removed by the corrector.

    Args:
        gs: gold standard line or lines.
        ocred: raw OCR output, parallel to gs.
        fixed: corrected output, parallel to gs.

    Returns:
        Value in [0, 100].  Micro-aggregated over the corpus: distances are
        summed before the ratio is taken.
    """
    gs_l, ocr_l, fix_l = _as_lines(gs), _as_lines(ocred), _as_lines(fixed)
    _paired(gs_l, ocr_l, "gs vs ocred")
    _paired(gs_l, fix_l, "gs vs fixed")
    d_ocr = sum(levenshtein(g, o) for g, o in zip(gs_l, ocr_l))
    d_fix = sum(levenshtein(g, f) for g, f in zip(gs_l, fix_l))
    if d_ocr == 0:
        return 100.0 if d_fix == 0 else 0.0
    if d_fix > d_ocr:
        return 0.0
    return (d_ocr - d_fix) / d_ocr * 100.0


def word_counts_corpus(
    gold: "str | Sequence[str]",
    other: "str | Sequence[str]",
    delimiters: Iterable[str] = DEFAULT_DELIMITERS,
) -> WordAlignmentCounts:
    gold_l, other_l = _as_lines(gold), _as_lines(other)
    _paired(gold_l, other_l, "gold vs other")
    n = s = i = d = 0
    for g, o in zip(gold_l, other_l):
        counts = word_align_counts(needleman_wunsch(g, o, UNIT_SCORING), delimiters)
        n += counts.n_words
        s += counts.substituted
        i += counts.inserted
        d += counts.deleted
    return WordAlignmentCounts(n_words=n, substituted=s, inserted=i, deleted=d)


def char_counts_corpus(gold: "str | Sequence[str]", other: "str | Sequence[str]") -> CharAlignmentCounts:
    gold_l, other_l = _as_lines(gold), _as_lines(other)
    _paired(gold_l, other_l, "gold vs other")
    n = s = i = d = 0
    for g, o in zip(gold_l, other_l):
        _, subs, dels, ins = code_counts(align_codes(g, o, UNIT_SCORING))
        n += len(g)
        s += subs
        i += ins
        d += dels
    return CharAlignmentCounts(n_chars=n, substituted=s, inserted=i, deleted=d)


def wer(
    gold: "str | Sequence[str]",
    other: "str | Sequence[str]",
    delimiters: Iterable[str] = DEFAULT_DELIMITERS,
) -> float:
    """Word error rate (S_w + I_w + D_w) / N_w of other against gold."""
    counts = word_counts_corpus(gold, other, delimiters)
    if counts.n_words == 0:
        raise CorpusError("gold side contains no words")
    return (counts.substituted + counts.inserted + counts.deleted) / counts.n_words


def cer(gold: "str | Sequence[str]", other: "str | Sequence[str]") -> float:
    """Character error rate: as wer, over characters of the gold side."""
    counts = char_counts_corpus(gold, other)
    if counts.n_chars == 0:
        raise CorpusError("gold side contains no characters")
    return (counts.substituted + counts.inserted + counts.deleted) / counts.n_chars


def mcnemar(b: int, c: int) -> McNemarResult:
    """McNemar test with continuity correction over discordant counts.

    chi_square = (|b - c| - 1)^2 / (b + c), with the p-value from the
    chi-square distribution with one degree of freedom.  When b + c < 25 the
    exact two-sided binomial p-value is computed as well.
    """
    if b < 0 or c < 0:
        raise ValueError(f"discordant counts must be non-negative, got b={b} c={c}")
    n = b + c
    if n == 0:
        raise ValueError("McNemar test undefined for b = c = 0")
    chi = (abs(b - c) - 1) ** 2 / n
    p = float(chdtrc(1, chi))
    exact_p: float | None = None
    if n < 25:
        exact_p = min(1.0, 2.0 * float(binom.cdf(min(b, c), n, 0.5)))
    return McNemarResult(chi_square=chi, p_value=p, b=b, c=c, exact_p=exact_p)


def discordant_counts(
    gold: Sequence[str], fixed_a: Sequence[str], fixed_b: Sequence[str]
) -> tuple[int, int]:
    """Line-exact discordant counts for two correctors.

    Returns (b, c): b counts lines system A got right and system B wrong,
    c the reverse.
    """
    gold_l, a_l, b_l = list(gold), list(fixed_a), list(fixed_b)
    _paired(gold_l, a_l, "gold vs fixed_a")
    _paired(gold_l, b_l, "gold vs fixed_b")
    b_count = c_count = 0
    for g, fa, fb in zip(gold_l, a_l, b_l):
        a_ok = fa == g
        b_ok = fb == g
        if a_ok and not b_ok:
            b_count += 1
        elif b_ok and not a_ok:
            c_count += 1
    return b_count, c_count


def evaluate_corrector(
    gs: "str | Sequence[str]",
    ocred: "str | Sequence[str]",
    fixed: "str | Sequence[str]",
    delimiters: Iterable[str] = DEFAULT_DELIMITERS,
) -> CorrectionEval:
    """Score corrected output: accuracy increase plus WER/CER of the fixed text."""
    gs_l, ocr_l, fix_l = _as_lines(gs), _as_lines(ocred), _as_lines(fixed)
    word_counts = word_counts_corpus(gs_l, fix_l, delimiters)
    char_counts = char_counts_corpus(gs_l, fix_l)
    if word_counts.n_words == 0:
        raise CorpusError("gold side contains no words")
    if char_counts.n_chars == 0:
        raise CorpusError("gold side contains no characters")
    wer_val = (word_counts.substituted + word_counts.inserted + word_counts.deleted) / word_counts.n_words
    cer_val = (char_counts.substituted + char_counts.inserted + char_counts.deleted) / char_counts.n_chars
    return CorrectionEval(
        acc_char=acc_char(gs_l, ocr_l, fix_l),
        wer=wer_val,
        cer=cer_val,
        word_counts=word_counts,
        char_counts=char_counts,
    )


REPORT_ACC = "Character-based Accuracy Increase (in %)"
REPORT_WER = "1-WER (in %)"
REPORT_CER = "1-CER (in %)"


def report_rows(result: CorrectionEval) -> list[tuple[str, float]]:
    return [
        (REPORT_ACC, result.acc_char),
        (REPORT_WER, (1.0 - result.wer) * 100.0),
        (REPORT_CER, (1.0 - result.cer) * 100.0),
    ]


def format_report_table(result: CorrectionEval) -> str:
    rows = report_rows(result)
    width = max(len(name) for name, _ in rows)
    lines = [f"{name:<{width}}  {value:10.2f}" for name, value in rows]
    wc = result.word_counts
    cc = result.char_counts
    lines.append(
        f"{'words N/S/I/D':<{width}}  {wc.n_words}/{wc.substituted}/{wc.inserted}/{wc.deleted}"
    )
    lines.append(
        f"{'chars N/S/I/D':<{width}}  {cc.n_chars}/{cc.substituted}/{cc.inserted}/{cc.deleted}"
    )
    return "\n".join(lines)


def write_report_tsv(result: CorrectionEval, path: "str | Path", timestamp: bool = True) -> None:
    """Emit the evaluation as a two-column TSV; the timestamp comment can be
    suppressed for byte-stable output."""
    with open(path, "w", encoding="utf-8") as fh:
        if timestamp:
            fh.write(f"# generated {_dt.datetime.now().isoformat(timespec='seconds')}\n")
        for name, value in report_rows(result):
            fh.write(f"{name}\t{value:.6f}\n")
        wc = result.word_counts
        cc = result.char_counts
        fh.write(f"N_w\t{wc.n_words}\nS_w\t{wc.substituted}\nI_w\t{wc.inserted}\nD_w\t{wc.deleted}\n")
        fh.write(f"N_c\t{cc.n_chars}\nS_c\t{cc.substituted}\nI_c\t{cc.inserted}\nD_c\t{cc.deleted}\n")
