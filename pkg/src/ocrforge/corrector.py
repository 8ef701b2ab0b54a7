"""Noisy-channel word corrector over a character n-gram language model.

Each word of a noisy line is scored against candidate vocabulary words within
a bounded edit distance.  A sentence-level beam keeps the best-scoring
hypotheses, where a hypothesis scores

    sum over words of [ log P_lm(chars) + lambda * log P_channel(noisy | cand) ]

The language model is an additively smoothed character n-gram model trained on
the gold side; the channel model scores each edit op by the learned confusion
profile, normalized so the profile's most probable confusion is free.  Edits
outside the profile fall to the smoothing floor, so a large lambda restricts
corrections to learned confusions.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, Sequence

from .align import align_codes, levenshtein
from .corpus import Corpus
from .errors import CorpusError
from .noise import ErrorProfile, extract_confusions, save_profile, load_profile
from . import kernels

__all__ = [
    "CorrectorHyper",
    "NoisyChannelModel",
    "Corrector",
    "TUNABLE_DOMAINS",
    "train_noisy_channel",
    "correct_line",
    "correct_corpus",
    "validation_accuracy",
    "save_model",
    "load_model",
]

_BOS = "\x02"

TUNABLE_DOMAINS: dict[str, list] = {
    "ngram_order": [2, 3, 4, 5],
    "channel_weight": [0.5, 1.0, 2.0, 4.0],
    "beam_width": [1, 2, 4, 8],
    "max_edits_per_word": [1, 2],
    "smoothing_k": [0.01, 0.1, 1.0],
}


class Corrector(Protocol):
    """Minimal contract every corrector implementation satisfies."""

    def correct(self, lines: Sequence[str]) -> list[str]: ...

    def validation_accuracy(self, corpus: Corpus) -> float: ...


@dataclass(frozen=True)
class CorrectorHyper:
    ngram_order: int = 3
    channel_weight: float = 1.0
    beam_width: int = 4
    max_edits_per_word: int = 1
    smoothing_k: float = 0.1

    def __post_init__(self) -> None:
        if self.ngram_order < 2:
            raise ValueError(f"ngram_order must be at least 2, got {self.ngram_order}")
        if self.channel_weight < 0:
            raise ValueError("channel_weight must be non-negative")
        if self.beam_width < 1:
            raise ValueError("beam_width must be at least 1")
        if self.max_edits_per_word < 0:
            raise ValueError("max_edits_per_word must be non-negative")
        if self.smoothing_k <= 0:
            raise ValueError("smoothing_k must be positive")


@dataclass
class NoisyChannelModel:
    hyper: CorrectorHyper
    vocabulary: frozenset[str]
    ngram_counts: dict[str, Counter]
    context_totals: dict[str, int]
    alphabet: frozenset[str]
    channel: ErrorProfile
    _delete_index: dict[str, set[str]] | None = field(default=None, repr=False, compare=False)
    _channel_map: dict[tuple[str, str], float] | None = field(default=None, repr=False, compare=False)

    def correct(self, lines: Sequence[str]) -> list[str]:
        return correct_corpus(self, lines)

    def validation_accuracy(self, corpus: Corpus) -> float:
        return validation_accuracy(self, corpus)


def train_noisy_channel(train: Corpus, hyper: CorrectorHyper = CorrectorHyper()) -> NoisyChannelModel:
    """Fit vocabulary, character n-grams, and the confusion channel.

    The language model trains on the gold side only; the channel comes from
    aligning every (noisy, gold) pair.

    Args:
        train: parallel training corpus with at least one pair.
        hyper: decoding and smoothing parameters.

    Returns:
        A fitted NoisyChannelModel.
    """
    if len(train) == 0:
        raise CorpusError("training corpus is empty")
    vocab: set[str] = set()
    ngram_counts: dict[str, Counter] = {}
    context_totals: Counter = Counter()
    alphabet: set[str] = set()
    ctx_len = hyper.ngram_order - 1
    for pair in train:
        gold = pair.gold
        vocab.update(w for w in gold.split() if w)
        seq = _BOS * ctx_len + gold
        for i in range(ctx_len, len(seq)):
            ctx = seq[i - ctx_len : i]
            ch = seq[i]
            bucket = ngram_counts.get(ctx)
            if bucket is None:
                bucket = Counter()
                ngram_counts[ctx] = bucket
            bucket[ch] += 1
            context_totals[ctx] += 1
            alphabet.add(ch)
    return NoisyChannelModel(
        hyper=hyper,
        vocabulary=frozenset(vocab),
        ngram_counts=ngram_counts,
        context_totals=dict(context_totals),
        alphabet=frozenset(alphabet),
        channel=extract_confusions(train),
    )


# ---------------------------------------------------------------------------
# Candidate generation (symmetric-delete index)


def _delete_variants(word: str, depth: int) -> set[str]:
    results = {word}
    frontier = {word}
    for _ in range(depth):
        nxt: set[str] = set()
        for w in frontier:
            for i in range(len(w)):
                nxt.add(w[:i] + w[i + 1 :])
        results |= nxt
        frontier = nxt
    return results


def _delete_index(model: NoisyChannelModel) -> dict[str, set[str]]:
    if model._delete_index is None:
        index: dict[str, set[str]] = {}
        depth = model.hyper.max_edits_per_word
        for word in model.vocabulary:
            for variant in _delete_variants(word, depth):
                index.setdefault(variant, set()).add(word)
        model._delete_index = index
    return model._delete_index


def _candidates(model: NoisyChannelModel, token: str) -> list[str]:
    if not token:
        return [""]
    max_edits = model.hyper.max_edits_per_word
    found: set[str] = {token}
    if max_edits > 0:
        index = _delete_index(model)
        pool: set[str] = set()
        for variant in _delete_variants(token, max_edits):
            hits = index.get(variant)
            if hits:
                pool |= hits
        for cand in pool:
            if cand != token and levenshtein(token, cand) <= max_edits:
                found.add(cand)
    return sorted(found)


# ---------------------------------------------------------------------------
# Scoring


def _lm_logp(model: NoisyChannelModel, ch: str, ctx: str) -> float:
    k = model.hyper.smoothing_k
    v = len(model.alphabet) + 1
    bucket = model.ngram_counts.get(ctx)
    if bucket is None:
        return -math.log(v)
    return math.log((bucket.get(ch, 0) + k) / (model.context_totals[ctx] + k * v))


def _score_chars(model: NoisyChannelModel, text: str, ctx: str) -> tuple[float, str]:
    total = 0.0
    ctx_len = model.hyper.ngram_order - 1
    for ch in text:
        total += _lm_logp(model, ch, ctx)
        ctx = (ctx + ch)[-ctx_len:]
    return total, ctx


def _channel_logp(model: NoisyChannelModel, noisy_token: str, candidate: str) -> float:
    """Log plausibility of reading candidate as noisy_token, from edit ops.

    Per non-match op: a profile confusion costs log((EP + k) / (EP_max + k)),
    so the most likely confusion is free; anything else costs the smoothing
    floor log(k / (EP_max + k)).
    """
    if candidate == noisy_token:
        return 0.0
    if model._channel_map is None:
        model._channel_map = model.channel.lookup()
    k = model.hyper.smoothing_k
    ep_max = max((e.probability for e in model.channel.entries), default=1.0)
    denom = math.log(ep_max + k)
    total = 0.0
    codes = align_codes(candidate, noisy_token)
    gi = oi = 0
    for code in codes:
        if code == kernels.OP_MATCH:
            gi += 1
            oi += 1
        elif code == kernels.OP_SUB:
            ep = model._channel_map.get((noisy_token[oi], candidate[gi]), 0.0)
            total += math.log(ep + k) - denom
            gi += 1
            oi += 1
        elif code == kernels.OP_DEL:
            total += math.log(k) - denom
            gi += 1
        else:
            total += math.log(k) - denom
            oi += 1
    return total


def correct_line(model: NoisyChannelModel, noisy: str) -> str:
    """Correct one line with a beam over per-word candidate sets.

    A model with an empty channel learned no error behavior and returns the
    input unchanged.  Ties between equal-scoring hypotheses resolve to the
    lexicographically smallest word sequence.
    """
    if not model.channel.entries:
        return noisy
    tokens = noisy.split(" ")
    ctx0 = _BOS * (model.hyper.ngram_order - 1)
    beams: list[tuple[float, tuple[str, ...], str]] = [(0.0, (), ctx0)]
    lam = model.hyper.channel_weight
    for t, token in enumerate(tokens):
        cands = _candidates(model, token)
        channel_scores = {cand: _channel_logp(model, token, cand) for cand in cands}
        extended: list[tuple[float, tuple[str, ...], str]] = []
        for score, words, ctx in beams:
            for cand in cands:
                text = cand if t == 0 else " " + cand
                lm, ctx2 = _score_chars(model, text, ctx)
                extended.append((score + lm + lam * channel_scores[cand], words + (cand,), ctx2))
        extended.sort(key=lambda item: (-item[0], item[1]))
        beams = extended[: model.hyper.beam_width]
    return " ".join(beams[0][1])


def correct_corpus(model: NoisyChannelModel, lines: Sequence[str]) -> list[str]:
    if isinstance(lines, str):
        raise TypeError("correct() expects a sequence of lines, not a single string")
    return [correct_line(model, line) for line in lines]


def validation_accuracy(model: NoisyChannelModel, corpus: Corpus) -> float:
    """Fraction of pairs whose corrected noisy side exactly matches gold."""
    if len(corpus) == 0:
        raise CorpusError("validation corpus is empty")
    hits = sum(1 for pair in corpus if correct_line(model, pair.noisy) == pair.gold)
    return hits / len(corpus)


# ---------------------------------------------------------------------------
# Persistence: a model directory with four flat files


def save_model(model: NoisyChannelModel, directory: "str | Path") -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    with open(d / "vocab.txt", "w", encoding="utf-8") as fh:
        for word in sorted(model.vocabulary):
            fh.write(word + "\n")
    with open(d / "ngrams.tsv", "w", encoding="utf-8") as fh:
        for ctx in sorted(model.ngram_counts):
            for ch, count in sorted(model.ngram_counts[ctx].items()):
                fh.write(f"{json.dumps(ctx)}\t{json.dumps(ch)}\t{count}\n")
    save_profile(model.channel, d / "channel.tsv")
    with open(d / "hyper.txt", "w", encoding="utf-8") as fh:
        h = model.hyper
        fh.write(f"ngram_order={h.ngram_order}\n")
        fh.write(f"channel_weight={h.channel_weight:.10g}\n")
        fh.write(f"beam_width={h.beam_width}\n")
        fh.write(f"max_edits_per_word={h.max_edits_per_word}\n")
        fh.write(f"smoothing_k={h.smoothing_k:.10g}\n")


def load_model(directory: "str | Path") -> NoisyChannelModel:
    d = Path(directory)
    hyper_kv: dict[str, str] = {}
    with open(d / "hyper.txt", "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            key, _, value = line.partition("=")
            hyper_kv[key] = value
    hyper = CorrectorHyper(
        ngram_order=int(hyper_kv["ngram_order"]),
        channel_weight=float(hyper_kv["channel_weight"]),
        beam_width=int(hyper_kv["beam_width"]),
        max_edits_per_word=int(hyper_kv["max_edits_per_word"]),
        smoothing_k=float(hyper_kv["smoothing_k"]),
    )
    with open(d / "vocab.txt", "r", encoding="utf-8") as fh:
        vocab = frozenset(line.rstrip("\n") for line in fh if line.rstrip("\n"))
    ngram_counts: dict[str, Counter] = {}
    context_totals: Counter = Counter()
    alphabet: set[str] = set()
    with open(d / "ngrams.tsv", "r", encoding="utf-8") as fh:
        for raw in fh:
            ctx_json, ch_json, count_text = raw.rstrip("\n").split("\t")
            ctx = json.loads(ctx_json)
            ch = json.loads(ch_json)
            count = int(count_text)
            ngram_counts.setdefault(ctx, Counter())[ch] = count
            context_totals[ctx] += count
            alphabet.add(ch)
    return NoisyChannelModel(
        hyper=hyper,
        vocabulary=vocab,
        ngram_counts=ngram_counts,
        context_totals=dict(context_totals),
        alphabet=frozenset(alphabet),
        channel=load_profile(d / "channel.tsv"),
    )
