"""Edit-distance kernels used for fuzzy primer matching.

The inner DP loops are numba-compiled; sequences are passed as uint8 code
arrays (A=0, C=1, G=2, T=3).
"""

from __future__ import annotations

import numpy as np
from numba import njit

_CODE = np.full(256, 255, dtype=np.uint8)
for _i, _c in enumerate(b"ACGT"):
    _CODE[_c] = _i


def encode_seq(seq: str) -> np.ndarray:
    codes = _CODE[np.frombuffer(seq.encode("ascii"), dtype=np.uint8)]
    if codes.max(initial=0) > 3:
        raise ValueError(f"non-ACGT character in sequence {seq!r}")
    return codes


def decode_seq(codes: np.ndarray) -> str:
    return bytes(bytearray(b"ACGT"[c] for c in codes)).decode("ascii")


@njit(cache=True)
def _levenshtein_row(a, b):
    """Last DP row: distances of ``a`` against every prefix of ``b``."""
    n = b.shape[0]
    row = np.empty(n + 1, dtype=np.int32)
    for j in range(n + 1):
        row[j] = j
    for i in range(a.shape[0]):
        prev_diag = row[0]
        row[0] = i + 1
        for j in range(1, n + 1):
            cost = 0 if a[i] == b[j - 1] else 1
            best = prev_diag + cost
            if row[j] + 1 < best:
                best = row[j] + 1
            if row[j - 1] + 1 < best:
                best = row[j - 1] + 1
            prev_diag = row[j]
            row[j] = best
    return row


def levenshtein(a: np.ndarray, b: np.ndarray) -> int:
    return int(_levenshtein_row(a, b)[b.shape[0]])


def prefix_distances(pattern: np.ndarray, text: np.ndarray) -> np.ndarray:
    """d(pattern, text[:j]) for j = 0..len(text)."""
    return _levenshtein_row(pattern, text)


@njit(cache=True)
def banded_align_votes(ref, member, extra, counts, ins_counts):
    """Accumulate per-position votes from a banded global alignment.

    ``counts`` has shape (len(ref), 5): diagonal steps vote the member's
    symbol (columns 0..3) at the matching reference position, gaps in the
    member vote column 4 (delete this reference position). ``ins_counts``
    has shape (len(ref)+1, 4): row i collects symbols the member inserts
    between reference positions i-1 and i.
    """
    n = ref.shape[0]
    m = member.shape[0]
    lo = min(0, m - n) - extra
    hi = max(0, m - n) + extra
    w = hi - lo + 1
    inf = np.int32(1 << 20)
    dp = np.full((n + 1, w), inf, dtype=np.int32)
    for k in range(w):
        j = lo + k
        if 0 <= j <= m:
            dp[0, k] = j
    for i in range(1, n + 1):
        for k in range(w):
            j = i + lo + k
            if j < 0 or j > m:
                continue
            best = inf
            if j > 0 and dp[i - 1, k] != inf:
                cost = 0 if ref[i - 1] == member[j - 1] else 1
                best = dp[i - 1, k] + cost
            if k + 1 < w and dp[i - 1, k + 1] != inf and dp[i - 1, k + 1] + 1 < best:
                best = dp[i - 1, k + 1] + 1  # gap in member (deletion)
            if k - 1 >= 0 and j > 0 and dp[i, k - 1] != inf and dp[i, k - 1] + 1 < best:
                best = dp[i, k - 1] + 1  # gap in reference (insertion)
            dp[i, k] = best
    # traceback from (n, m), preferring diagonal steps
    i = n
    j = m
    while i > 0 or j > 0:
        k = j - i - lo
        if i > 0 and j > 0:
            kd = k
            if 0 <= kd < w and dp[i - 1, kd] != inf:
                cost = 0 if ref[i - 1] == member[j - 1] else 1
                if dp[i, k] == dp[i - 1, kd] + cost:
                    counts[i - 1, member[j - 1]] += 1
                    i -= 1
                    j -= 1
                    continue
        if i > 0 and 0 <= k + 1 < w and dp[i - 1, k + 1] != inf and dp[i, k] == dp[i - 1, k + 1] + 1:
            counts[i - 1, 4] += 1
            i -= 1
            continue
        if j > 0 and 0 <= k - 1 < w and dp[i, k - 1] != inf and dp[i, k] == dp[i, k - 1] + 1:
            ins_counts[i, member[j - 1]] += 1
            j -= 1
            continue
        # should not happen on a consistent table; bail out defensively
        break


def warm_up() -> None:
    """Trigger JIT compilation outside any timed path."""
    a = encode_seq("ACGT")
    levenshtein(a, a)
    counts = np.zeros((4, 5), dtype=np.int32)
    ins_counts = np.zeros((5, 4), dtype=np.int32)
    banded_align_votes(a, a, 3, counts, ins_counts)
