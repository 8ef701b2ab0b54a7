"""Alignment DP kernels with two interchangeable backends.

The JIT backend compiles the loop kernels with numba; the fallback backend is
vectorized numpy (row-wise DP with prefix-scan updates).  Selection happens at
import time: set ``OCRFORGE_JIT=0`` to force the numpy path.  Both backends are
always importable so tests and benchmarks can compare them directly.

Alignments are computed over code-point arrays (int32).  Needleman-Wunsch cells
hold a combined integer ``score * W - edits`` with ``W = len(a) + len(b) + 1``,
so maximizing the cell value maximizes the score and, among score ties, picks
the alignment with the fewest non-match ops.  Together with the fixed
traceback order this makes the emitted op sequence fully deterministic for
any scoring scheme.

Op codes emitted by the aligners: 0 match, 1 substitute, 2 delete (gold char
absent from the other string), 3 insert (other char absent from gold).
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency, but stay importable
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrapper(func):
            return func

        return wrapper


JIT_ENABLED = _HAVE_NUMBA and os.environ.get("OCRFORGE_JIT", "1") != "0"

OP_MATCH = 0
OP_SUB = 1
OP_DEL = 2
OP_INS = 3


def encode(text: str) -> np.ndarray:
    """Encode a string as an int32 code-point array."""
    if not text:
        return np.empty(0, dtype=np.int32)
    return np.frombuffer(text.encode("utf-32-le"), dtype=np.uint32).astype(np.int32)


def decode(codes: np.ndarray) -> str:
    return "".join(chr(int(c)) for c in codes)


# ---------------------------------------------------------------------------
# Levenshtein distance


def _levenshtein_loops(a: np.ndarray, b: np.ndarray) -> int:
    n = a.size
    m = b.size
    if n == 0:
        return m
    if m == 0:
        return n
    prev = np.arange(m + 1, dtype=np.int64)
    cur = np.empty(m + 1, dtype=np.int64)
    for i in range(1, n + 1):
        cur[0] = i
        ai = a[i - 1]
        for j in range(1, m + 1):
            c = prev[j - 1] + (0 if ai == b[j - 1] else 1)
            if prev[j] + 1 < c:
                c = prev[j] + 1
            if cur[j - 1] + 1 < c:
                c = cur[j - 1] + 1
            cur[j] = c
        prev, cur = cur, prev
    return int(prev[m])


def levenshtein_numpy(a: np.ndarray, b: np.ndarray) -> int:
    """Row-vectorized Levenshtein.  The insertion chain r[j] = min(t[j], r[j-1]+1)
    is solved in closed form: r = cummin(t' - j) + j."""
    n = a.size
    m = b.size
    if n == 0:
        return m
    if m == 0:
        return n
    idx = np.arange(m + 1, dtype=np.int64)
    prev = idx.copy()
    row = 0
    for ch in a:
        row += 1
        t = np.minimum(prev[:-1] + (b != ch), prev[1:] + 1)
        shifted = np.concatenate(([row], t))
        prev = np.minimum.accumulate(shifted - idx) + idx
    return int(prev[m])


levenshtein_numba = njit(cache=True)(_levenshtein_loops) if _HAVE_NUMBA else None

levenshtein_codes = levenshtein_numba if JIT_ENABLED else levenshtein_numpy


# ---------------------------------------------------------------------------
# Needleman-Wunsch alignment


def _nw_align_loops(a: np.ndarray, b: np.ndarray, match: int, mismatch: int, gap: int) -> np.ndarray:
    n = a.size
    m = b.size
    w = n + m + 1
    mw = match * w
    sw = mismatch * w - 1
    gw = gap * w - 1
    c = np.empty((n + 1, m + 1), dtype=np.int64)
    for j in range(m + 1):
        c[0, j] = j * gw
    for i in range(1, n + 1):
        c[i, 0] = i * gw
        ai = a[i - 1]
        for j in range(1, m + 1):
            best = c[i - 1, j - 1] + (mw if ai == b[j - 1] else sw)
            up = c[i - 1, j] + gw
            if up > best:
                best = up
            left = c[i, j - 1] + gw
            if left > best:
                best = left
            c[i, j] = best
    # Traceback, preferring diagonal over delete over insert at value ties.
    out = np.empty(n + m, dtype=np.int8)
    k = 0
    i = n
    j = m
    while i > 0 or j > 0:
        v = c[i, j]
        stepped = False
        if i > 0 and j > 0:
            eq = a[i - 1] == b[j - 1]
            if v == c[i - 1, j - 1] + (mw if eq else sw):
                out[k] = 0 if eq else 1
                k += 1
                i -= 1
                j -= 1
                stepped = True
        if not stepped:
            if i > 0 and v == c[i - 1, j] + gw:
                out[k] = 2
                k += 1
                i -= 1
            else:
                out[k] = 3
                k += 1
                j -= 1
    return out[:k][::-1].copy()


def nw_align_numpy(a: np.ndarray, b: np.ndarray, match: int, mismatch: int, gap: int) -> np.ndarray:
    """Numpy NW: vectorized row fill, Python traceback over the full matrix."""
    n = a.size
    m = b.size
    w = n + m + 1
    mw = match * w
    sw = mismatch * w - 1
    gw = gap * w - 1
    idx = np.arange(m + 1, dtype=np.int64)
    ramp = idx * gw
    c = np.empty((n + 1, m + 1), dtype=np.int64)
    c[0] = ramp
    for i in range(1, n + 1):
        prev = c[i - 1]
        t = np.maximum(prev[:-1] + np.where(b == a[i - 1], mw, sw), prev[1:] + gw)
        shifted = np.concatenate(([i * gw], t))
        c[i] = np.maximum.accumulate(shifted - ramp) + ramp
    ops: list[int] = []
    i = n
    j = m
    while i > 0 or j > 0:
        v = c[i, j]
        if i > 0 and j > 0:
            eq = a[i - 1] == b[j - 1]
            if v == c[i - 1, j - 1] + (mw if eq else sw):
                ops.append(0 if eq else 1)
                i -= 1
                j -= 1
                continue
        if i > 0 and v == c[i - 1, j] + gw:
            ops.append(2)
            i -= 1
        else:
            ops.append(3)
            j -= 1
    ops.reverse()
    return np.asarray(ops, dtype=np.int8)


nw_align_numba = njit(cache=True)(_nw_align_loops) if _HAVE_NUMBA else None

nw_align_codes = nw_align_numba if JIT_ENABLED else nw_align_numpy


def warm_up() -> None:
    """Trigger JIT compilation once so timings elsewhere stay honest."""
    a = encode("ab")
    b = encode("ba")
    levenshtein_codes(a, b)
    nw_align_codes(a, b, 1, -1, -1)
