import random

import pytest


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)


def brute_levenshtein(a: str, b: str) -> int:
    """Plain recursive edit distance with memoization.

    Deliberately naive so it cannot share a bug with the production kernels;
    used as the oracle for every distance test.
    """
    seen: dict = {}

    def go(i: int, j: int) -> int:
        if i == len(a):
            return len(b) - j
        if j == len(b):
            return len(a) - i
        key = (i, j)
        if key in seen:
            return seen[key]
        best = min(
            go(i + 1, j + 1) + (a[i] != b[j]),
            go(i + 1, j) + 1,
            go(i, j + 1) + 1,
        )
        seen[key] = best
        return best

    return go(0, 0)


def random_string(rng: random.Random, max_len: int, alphabet: str) -> str:
    return "".join(rng.choice(alphabet) for _ in range(rng.randrange(max_len + 1)))
