"""Corpus loading, normalization, and character statistics.

Text normalization applied to every line on load:

1. Unicode NFC composition.
2. Interior TAB characters become single spaces (TAB is reserved as the
   column separator of the parallel TSV format).
3. Trailing whitespace is stripped.

The same function applied twice is a no-op, so normalized corpora can be
round-tripped through files safely.
"""

from __future__ import annotations

import random
import unicodedata
from collections import Counter
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Iterator

from .errors import CorpusError

__all__ = [
    "SentencePair",
    "Corpus",
    "CharFrequencyTable",
    "normalize_line",
    "load_parallel_corpus",
    "load_parallel_tsv",
    "load_plain_corpus",
    "iter_plain_lines",
    "build_char_frequency_table",
    "split_train_valid",
    "write_parallel",
    "write_parallel_tsv",
]


@dataclass(frozen=True)
class SentencePair:
    """One aligned sentence: the noisy (OCR) side and its gold transcription."""

    noisy: str
    gold: str
    id: int


@dataclass(frozen=True)
class Corpus:
    """An ordered collection of sentence pairs."""

    pairs: tuple[SentencePair, ...]
    name: str = ""

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[SentencePair]:
        return iter(self.pairs)

    @property
    def noisy_lines(self) -> list[str]:
        return [p.noisy for p in self.pairs]

    @property
    def gold_lines(self) -> list[str]:
        return [p.gold for p in self.pairs]

    @staticmethod
    def from_lines(noisy: Iterable[str], gold: Iterable[str], name: str = "") -> "Corpus":
        noisy = list(noisy)
        gold = list(gold)
        if len(noisy) != len(gold):
            raise CorpusError(f"line count mismatch {len(noisy)}≠{len(gold)}")
        pairs = tuple(
            SentencePair(noisy=n, gold=g, id=i) for i, (n, g) in enumerate(zip(noisy, gold))
        )
        return Corpus(pairs=pairs, name=name)


@dataclass(frozen=True)
class CharFrequencyTable:
    """Relative character frequencies with whitespace excluded.

    Frequencies are strictly positive and sum to 1 within 1e-9.  Characters
    absent from the table are handled by callers with ``floor`` (the smallest
    tabulated frequency), so rare characters still get a nonzero weight.
    """

    entries: dict[str, float]

    def __post_init__(self) -> None:
        if not self.entries:
            raise CorpusError("character frequency table is empty")
        total = 0.0
        for ch, freq in self.entries.items():
            if ch.isspace():
                raise CorpusError(f"whitespace character {ch!r} in frequency table")
            if freq <= 0.0:
                raise CorpusError(f"non-positive frequency for {ch!r}")
            total += freq
        if abs(total - 1.0) > 1e-9:
            raise CorpusError(f"frequencies sum to {total!r}, expected 1")

    @property
    def floor(self) -> float:
        return min(self.entries.values())

    def weight(self, ch: str) -> float:
        return self.entries.get(ch, self.floor)


def normalize_line(line: str) -> str:
    line = unicodedata.normalize("NFC", line)
    line = line.replace("\t", " ")
    return line.rstrip()


def _read_lines(path: str | Path) -> Iterator[str]:
    with open(path, "r", encoding="utf-8-sig") as fh:
        for raw in fh:
            yield normalize_line(raw)


def iter_plain_lines(path: str | Path) -> Iterator[str]:
    """Stream normalized non-empty lines from a plain one-sentence-per-line file."""
    for line in _read_lines(path):
        if line:
            yield line


def load_plain_corpus(path: str | Path) -> list[str]:
    """Load a plain corpus into memory (see iter_plain_lines for the streaming form)."""
    return list(iter_plain_lines(path))


def load_parallel_corpus(noisy_path: str | Path, gold_path: str | Path, name: str = "") -> Corpus:
    """Load a parallel corpus from two side-by-side files.

    Line i of the noisy file pairs with line i of the gold file.  Blank lines
    are kept so the two sides can never drift out of step; a line-count
    mismatch is a structural error.

    Args:
        noisy_path: file with one OCR sentence per line.
        gold_path: file with one gold sentence per line.
        name: optional corpus label (defaults to the noisy file stem).

    Returns:
        Corpus with ids numbered densely from 0.
    """
    noisy = list(_read_lines(noisy_path))
    gold = list(_read_lines(gold_path))
    if len(noisy) != len(gold):
        raise CorpusError(f"line count mismatch {len(noisy)}≠{len(gold)}")
    return Corpus.from_lines(noisy, gold, name=name or Path(noisy_path).stem)


def load_parallel_tsv(path: str | Path, name: str = "") -> Corpus:
    """Load a parallel corpus from a single TSV file with columns noisy<TAB>gold."""
    noisy: list[str] = []
    gold: list[str] = []
    with open(path, "r", encoding="utf-8-sig") as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.rstrip("\n").rstrip("\r")
            cols = raw.split("\t")
            if len(cols) != 2:
                raise CorpusError(f"line {lineno}: expected 2 tab-separated columns, got {len(cols)}")
            noisy.append(normalize_line(cols[0]))
            gold.append(normalize_line(cols[1]))
    return Corpus.from_lines(noisy, gold, name=name or Path(path).stem)


def write_parallel(corpus: Corpus, noisy_path: str | Path, gold_path: str | Path) -> None:
    with open(noisy_path, "w", encoding="utf-8") as fn, open(gold_path, "w", encoding="utf-8") as fg:
        for pair in corpus:
            fn.write(pair.noisy + "\n")
            fg.write(pair.gold + "\n")


def write_parallel_tsv(corpus: Corpus, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for pair in corpus:
            fh.write(f"{pair.noisy}\t{pair.gold}\n")


def build_char_frequency_table(lines: Iterable[str]) -> CharFrequencyTable:
    """Count character frequencies over lines, excluding all whitespace.

    Args:
        lines: any iterable of strings; generators are consumed once.

    Returns:
        CharFrequencyTable over every non-whitespace character observed.
    """
    counts: Counter[str] = Counter()
    for line in lines:
        for ch in line:
            if not ch.isspace():
                counts[ch] += 1
    total = sum(counts.values())
    if total == 0:
        raise CorpusError("no countable characters in input")
    return CharFrequencyTable({ch: c / total for ch, c in sorted(counts.items())})


def split_train_valid(corpus: Corpus, train_fraction: float, seed: int) -> tuple[Corpus, Corpus]:
    """Deterministically split a corpus into train and validation parts.

    The train partition holds round(train_fraction * N) pairs (half up).  Pair
    order within each partition follows the original corpus order; ids are
    renumbered densely from 0 on each side.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    n = len(corpus)
    if n == 0:
        raise CorpusError("cannot split an empty corpus")
    k = int(train_fraction * n + 0.5)
    indices = list(range(n))
    random.Random(seed).shuffle(indices)
    train_idx = sorted(indices[:k])
    valid_idx = sorted(indices[k:])
    train = tuple(replace(corpus.pairs[i], id=j) for j, i in enumerate(train_idx))
    valid = tuple(replace(corpus.pairs[i], id=j) for j, i in enumerate(valid_idx))
    return (
        Corpus(pairs=train, name=f"{corpus.name}-train" if corpus.name else "train"),
        Corpus(pairs=valid, name=f"{corpus.name}-valid" if corpus.name else "valid"),
    )
