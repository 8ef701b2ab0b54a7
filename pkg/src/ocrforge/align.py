"""Character alignment between gold and OCR strings, plus word-level attribution.

The aligner is global Needleman-Wunsch over code points.  With the default
scoring (+1 match, -1 mismatch, -1 gap) score ties are resolved toward the
fewest non-match ops, so the edit count of an optimal alignment always equals
the Levenshtein distance; the traceback then prefers Substitute over Delete
over Insert.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from . import kernels

__all__ = [
    "OpKind",
    "EditOp",
    "Alignment",
    "AlignmentScoring",
    "WordAlignmentCounts",
    "DEFAULT_DELIMITERS",
    "DEFAULT_SCORING",
    "UNIT_SCORING",
    "levenshtein",
    "needleman_wunsch",
    "word_align_counts",
    "format_edit_script",
    "parse_edit_script",
]

DEFAULT_DELIMITERS = frozenset(" \t.,:;!?'\"()")


class OpKind(Enum):
    MATCH = "M"
    SUBSTITUTE = "S"
    INSERT = "I"
    DELETE = "D"


@dataclass(frozen=True)
class EditOp:
    """One alignment column.

    gold_char is consumed from the gold string (Match/Substitute/Delete);
    other_char is emitted into the other string (Match/Substitute/Insert).
    """

    kind: OpKind
    gold_char: str | None = None
    other_char: str | None = None

    def __post_init__(self) -> None:
        k = self.kind
        if k is OpKind.MATCH:
            if self.gold_char is None or self.gold_char != self.other_char:
                raise ValueError("Match op requires identical gold and other chars")
        elif k is OpKind.SUBSTITUTE:
            if self.gold_char is None or self.other_char is None:
                raise ValueError("Substitute op requires both chars")
            if self.gold_char == self.other_char:
                raise ValueError("Substitute op requires differing chars")
        elif k is OpKind.INSERT:
            if self.other_char is None or self.gold_char is not None:
                raise ValueError("Insert op carries only an other char")
        else:
            if self.gold_char is None or self.other_char is not None:
                raise ValueError("Delete op carries only a gold char")


@dataclass(frozen=True)
class AlignmentScoring:
    match: int = 1
    mismatch: int = -1
    gap: int = -1

    def __post_init__(self) -> None:
        if self.mismatch >= self.match or self.gap >= self.match:
            raise ValueError(
                "degenerate scoring: match must exceed both mismatch and gap, got "
                f"match={self.match} mismatch={self.mismatch} gap={self.gap}"
            )


DEFAULT_SCORING = AlignmentScoring()

# Unit-cost scoring: matches are free and every edit costs one score unit, so
# a maximum-score alignment is exactly a minimum-edit alignment and its
# non-Match count equals the Levenshtein distance.  The similarity default
# (match=+1) does not have that property: it minimizes 1.5*edits + 0.5*subs,
# which can trade one substitution for two extra gap ops and end up with more
# total edits than the distance.  Metrics therefore always align under
# UNIT_SCORING, while extraction keeps DEFAULT_SCORING (see noise module).
UNIT_SCORING = AlignmentScoring(match=0, mismatch=-1, gap=-1)


@dataclass(frozen=True)
class Alignment:
    """An ordered edit script; replaying ops over the gold string yields the other."""

    ops: tuple[EditOp, ...]
    score: int

    def replay(self, gold: str) -> str:
        out: list[str] = []
        pos = 0
        for op in self.ops:
            if op.kind in (OpKind.MATCH, OpKind.SUBSTITUTE, OpKind.DELETE):
                if pos >= len(gold) or gold[pos] != op.gold_char:
                    raise ValueError(f"op {op} does not match gold at position {pos}")
                pos += 1
            if op.other_char is not None:
                out.append(op.other_char)
        if pos != len(gold):
            raise ValueError("alignment does not span the gold string")
        return "".join(out)

    @property
    def edit_count(self) -> int:
        return sum(1 for op in self.ops if op.kind is not OpKind.MATCH)


@dataclass(frozen=True)
class WordAlignmentCounts:
    """Word-level error tallies: N_w total gold words, S_w substituted, I_w inserted, D_w deleted."""

    n_words: int
    substituted: int
    inserted: int
    deleted: int


def levenshtein(a: str, b: str) -> int:
    """Unit-cost edit distance between two strings."""
    return int(kernels.levenshtein_codes(kernels.encode(a), kernels.encode(b)))


def align_codes(gold: str, other: str, scoring: AlignmentScoring = DEFAULT_SCORING) -> np.ndarray:
    """Raw op-code alignment (kernels.OP_*); fast path used by metrics and extraction."""
    return kernels.nw_align_codes(
        kernels.encode(gold), kernels.encode(other), scoring.match, scoring.mismatch, scoring.gap
    )


def code_counts(codes: np.ndarray) -> tuple[int, int, int, int]:
    """Counts of (match, substitute, delete, insert) ops in a code array."""
    c = np.bincount(codes.astype(np.int64), minlength=4)
    return int(c[0]), int(c[1]), int(c[2]), int(c[3])


def needleman_wunsch(gold: str, other: str, scoring: AlignmentScoring = DEFAULT_SCORING) -> Alignment:
    """Globally align two strings.

    Args:
        gold: reference string (consumed by Match/Substitute/Delete ops).
        other: observed string (emitted by Match/Substitute/Insert ops).
        scoring: match/mismatch/gap scores; match must exceed the other two.

    Returns:
        Alignment whose ops replay gold into other; score is the summed
        per-op scoring value.
    """
    codes = align_codes(gold, other, scoring)
    ops: list[EditOp] = []
    score = 0
    gi = 0
    oi = 0
    for code in codes:
        if code == kernels.OP_MATCH:
            ops.append(EditOp(OpKind.MATCH, gold[gi], other[oi]))
            score += scoring.match
            gi += 1
            oi += 1
        elif code == kernels.OP_SUB:
            ops.append(EditOp(OpKind.SUBSTITUTE, gold[gi], other[oi]))
            score += scoring.mismatch
            gi += 1
            oi += 1
        elif code == kernels.OP_DEL:
            ops.append(EditOp(OpKind.DELETE, gold[gi], None))
            score += scoring.gap
            gi += 1
        else:
            ops.append(EditOp(OpKind.INSERT, None, other[oi]))
            score += scoring.gap
            oi += 1
    return Alignment(ops=tuple(ops), score=score)


# ---------------------------------------------------------------------------
# Word-level attribution


def _column_chars(ops: Sequence[EditOp]) -> list[tuple[str | None, str | None]]:
    return [(op.gold_char, op.other_char) for op in ops]


def _tokenize_side(
    columns: list[tuple[str | None, str | None]], side: int, delimiters: frozenset[str]
) -> tuple[list[str], dict[int, int]]:
    """Split one side of the alignment into word tokens.

    Returns the ordered token list and a map from column index to the id of
    the word whose character sits in that column.  Gap columns on this side
    never break a word: word boundaries come only from delimiter characters.
    """
    tokens: list[str] = []
    col_to_word: dict[int, int] = {}
    current: list[str] = []
    for col, pair in enumerate(columns):
        ch = pair[side]
        if ch is None:
            continue
        if ch in delimiters:
            if current:
                tokens.append("".join(current))
                current = []
        else:
            col_to_word[col] = len(tokens)
            current.append(ch)
    if current:
        tokens.append("".join(current))
    return tokens, col_to_word


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def _token_dp_counts(gold_toks: list[str], other_toks: list[str]) -> tuple[int, int, int]:
    """Token-level counts (S, D, I) minimizing edits, then maximizing matched tokens."""
    g, o = len(gold_toks), len(other_toks)
    dp: list[list[tuple[int, int]]] = [[(0, 0)] * (o + 1) for _ in range(g + 1)]
    for i in range(g + 1):
        for j in range(o + 1):
            if i == 0 and j == 0:
                continue
            best: tuple[int, int] | None = None
            if i > 0 and j > 0:
                eq = gold_toks[i - 1] == other_toks[j - 1]
                c, mn = dp[i - 1][j - 1]
                best = (c + (0 if eq else 1), mn - (1 if eq else 0))
            if i > 0:
                c, mn = dp[i - 1][j]
                cand = (c + 1, mn)
                if best is None or cand < best:
                    best = cand
            if j > 0:
                c, mn = dp[i][j - 1]
                cand = (c + 1, mn)
                if best is None or cand < best:
                    best = cand
            dp[i][j] = best  # type: ignore[assignment]
    subs = dels = ins = 0
    i, j = g, o
    while i > 0 or j > 0:
        cur = dp[i][j]
        if i > 0 and j > 0:
            eq = gold_toks[i - 1] == other_toks[j - 1]
            c, mn = dp[i - 1][j - 1]
            if (c + (0 if eq else 1), mn - (1 if eq else 0)) == cur:
                if not eq:
                    subs += 1
                i -= 1
                j -= 1
                continue
        if i > 0 and (dp[i - 1][j][0] + 1, dp[i - 1][j][1]) == cur:
            dels += 1
            i -= 1
            continue
        ins += 1
        j -= 1
    return subs, dels, ins


def word_align_counts(
    alignment: Alignment, delimiters: Iterable[str] = DEFAULT_DELIMITERS
) -> WordAlignmentCounts:
    """Derive word-level error counts from a character alignment.

    Gold and other words whose characters share alignment columns are grouped
    into connected components; boundary errors (a lost or spurious delimiter)
    therefore pull the merged or split words into one group.  Within a group
    the word tokens are compared pairwise, so a group of two gold words merged
    into one other word counts one substitution plus one deletion.  Gold words
    aligned to nothing count as deleted; other words with no gold counterpart
    count as inserted.
    """
    delims = frozenset(delimiters)
    columns = _column_chars(alignment.ops)
    gold_tokens, gold_cols = _tokenize_side(columns, 0, delims)
    other_tokens, other_cols = _tokenize_side(columns, 1, delims)
    n_gold = len(gold_tokens)
    n_other = len(other_tokens)
    uf = _UnionFind(n_gold + n_other)
    for col in gold_cols:
        if col in other_cols:
            uf.union(gold_cols[col], n_gold + other_cols[col])
    groups: dict[int, tuple[list[int], list[int]]] = {}
    for wid in range(n_gold):
        groups.setdefault(uf.find(wid), ([], []))[0].append(wid)
    for wid in range(n_other):
        groups.setdefault(uf.find(n_gold + wid), ([], []))[1].append(wid)
    subs = dels = ins = 0
    for gold_ids, other_ids in groups.values():
        if not gold_ids:
            ins += len(other_ids)
            continue
        if not other_ids:
            dels += len(gold_ids)
            continue
        g_toks = [gold_tokens[i] for i in sorted(gold_ids)]
        o_toks = [other_tokens[i] for i in sorted(other_ids)]
        if g_toks == o_toks:
            # Equal token runs still need clean columns to count as correct:
            # equality of the token strings is enough because any extra edit
            # inside the group would have changed a token.
            continue
        s, d, i = _token_dp_counts(g_toks, o_toks)
        subs += s
        dels += d
        ins += i
    return WordAlignmentCounts(n_words=n_gold, substituted=subs, inserted=ins, deleted=dels)


# ---------------------------------------------------------------------------
# Edit-script serialization


def _escape(ch: str) -> str:
    return ch.replace("\\", "\\\\").replace(":", "\\:").replace(" ", "\\s")


def _unescape(field: str) -> str:
    out: list[str] = []
    i = 0
    while i < len(field):
        ch = field[i]
        if ch == "\\":
            if i + 1 >= len(field):
                raise ValueError(f"dangling escape in field {field!r}")
            nxt = field[i + 1]
            if nxt == "\\":
                out.append("\\")
            elif nxt == ":":
                out.append(":")
            elif nxt == "s":
                out.append(" ")
            else:
                raise ValueError(f"unknown escape \\{nxt} in field {field!r}")
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def _split_token(token: str) -> list[str]:
    fields: list[str] = []
    current: list[str] = []
    i = 0
    while i < len(token):
        ch = token[i]
        if ch == "\\" and i + 1 < len(token):
            current.append(ch)
            current.append(token[i + 1])
            i += 2
            continue
        if ch == ":":
            fields.append("".join(current))
            current = []
        else:
            current.append(ch)
        i += 1
    fields.append("".join(current))
    return fields


def format_edit_script(ops: Sequence[EditOp]) -> str:
    """Serialize ops as space-separated tokens: M, S:g:o, I:o, D:g (colon-escaped)."""
    tokens: list[str] = []
    for op in ops:
        if op.kind is OpKind.MATCH:
            tokens.append("M")
        elif op.kind is OpKind.SUBSTITUTE:
            tokens.append(f"S:{_escape(op.gold_char)}:{_escape(op.other_char)}")
        elif op.kind is OpKind.INSERT:
            tokens.append(f"I:{_escape(op.other_char)}")
        else:
            tokens.append(f"D:{_escape(op.gold_char)}")
    return " ".join(tokens)


def parse_edit_script(text: str, gold: str) -> tuple[EditOp, ...]:
    """Parse a serialized edit script back into ops.

    M tokens carry no character, so the gold string is required to rehydrate
    them; S and D tokens are checked against it as they consume gold chars.
    """
    ops: list[EditOp] = []
    pos = 0
    for token in text.split(" "):
        if not token:
            continue
        fields = _split_token(token)
        kind = fields[0]
        if kind == "M" and len(fields) == 1:
            if pos >= len(gold):
                raise ValueError("edit script overruns the gold string")
            ops.append(EditOp(OpKind.MATCH, gold[pos], gold[pos]))
            pos += 1
        elif kind == "S" and len(fields) == 3:
            g = _unescape(fields[1])
            if pos >= len(gold) or gold[pos] != g:
                raise ValueError(f"S token gold char {g!r} disagrees with gold at {pos}")
            ops.append(EditOp(OpKind.SUBSTITUTE, g, _unescape(fields[2])))
            pos += 1
        elif kind == "I" and len(fields) == 2:
            ops.append(EditOp(OpKind.INSERT, None, _unescape(fields[1])))
        elif kind == "D" and len(fields) == 2:
            g = _unescape(fields[1])
            if pos >= len(gold) or gold[pos] != g:
                raise ValueError(f"D token gold char {g!r} disagrees with gold at {pos}")
            ops.append(EditOp(OpKind.DELETE, g, None))
            pos += 1
        else:
            raise ValueError(f"malformed token {token!r}")
    if pos != len(gold):
        raise ValueError("edit script does not span the gold string")
    return tuple(ops)
