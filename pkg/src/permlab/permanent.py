"""Permanent computation: exact Ryser with Gray-code stepping, a brute-force
oracle, sub-matrix permanents, the induced permutation distribution, and a
float fast path for matrices too large for exact arithmetic.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import Permutation, RationalMatrix, valid_permutations
from .errors import EmptySupport, SizeGuard, SizeMismatch

_BRUTE_LIMIT = 10


def _resolve_threads(threads: int | None) -> int:
    """Thread cap: explicit argument wins, else PERMLAB_THREADS (0 = auto)."""
    if threads is None:
        raw = os.environ.get("PERMLAB_THREADS", "").strip()
        if not raw:
            return 1
        try:
            threads = int(raw)
        except ValueError:
            return 1
    if threads == 0:
        return os.cpu_count() or 1
    return max(1, threads)


def _ryser_block(cols: list[tuple[Fraction, ...]], n: int, start: int, stop: int) -> Fraction:
    """Signed Ryser terms for subset indices in [start, stop), Gray-code order.

    Subset k is encoded as gray(k) = k ^ (k >> 1); consecutive k differ in one
    column, so row sums are updated incrementally.
    """
    zero = Fraction(0)
    gray = start ^ (start >> 1)
    rowsums = [zero] * n
    bits = gray
    while bits:
        low = bits & -bits
        j = low.bit_length() - 1
        col = cols[j]
        for i in range(n):
            rowsums[i] += col[i]
        bits ^= low
    popcount = bin(gray).count("1")
    total = zero
    for k in range(start, stop):
        g = k ^ (k >> 1)
        if k != start:
            flipped = g ^ gray
            j = flipped.bit_length() - 1
            col = cols[j]
            if g & flipped:
                for i in range(n):
                    rowsums[i] += col[i]
                popcount += 1
            else:
                for i in range(n):
                    rowsums[i] -= col[i]
                popcount -= 1
            gray = g
        term = rowsums[0]
        for i in range(1, n):
            term = term * rowsums[i]
        if (n - popcount) % 2 == 0:
            total += term
        else:
            total -= term
    return total


def perm_exact(theta: RationalMatrix, threads: int | None = None) -> Fraction:
    """Exact permanent via Ryser's inclusion-exclusion over column subsets.

    O(2^n * n) exact Fraction arithmetic.  Intermediate sums go negative (the
    alternating signs of inclusion-exclusion); the final value is asserted
    non-negative, which catches arithmetic bugs on non-negative input.
    """
    n = theta.n
    if n == 1:
        return theta.rows[0][0]
    cols = [tuple(theta.rows[i][j] for i in range(n)) for j in range(n)]
    subsets = 1 << n
    nthreads = _resolve_threads(threads)
    nblocks = min(nthreads, max(1, (subsets - 1) // 1024))
    if nblocks <= 1:
        total = _ryser_block(cols, n, 1, subsets)
    else:
        # fixed block boundaries; reduction in block order keeps results
        # bit-identical run to run
        bounds = [1 + (subsets - 1) * b // nblocks for b in range(nblocks + 1)]
        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            parts = list(
                pool.map(lambda se: _ryser_block(cols, n, se[0], se[1]), zip(bounds, bounds[1:]))
            )
        total = sum(parts, Fraction(0))
    assert total >= 0, "Ryser total must be non-negative for a non-negative matrix"
    return total


def perm_brute(theta: RationalMatrix) -> Fraction:
    """Direct sum over all n! permutations; oracle for perm_exact (n <= 10)."""
    n = theta.n
    if n > _BRUTE_LIMIT:
        raise SizeGuard(f"perm_brute guarded to n <= {_BRUTE_LIMIT}, got n = {n}")
    rows = theta.rows
    total = Fraction(0)
    for images in itertools.permutations(range(n)):
        term = Fraction(1)
        for i in range(n):
            term *= rows[i][images[i]]
            if term == 0:
                break
        total += term
    return total


def perm_float(matrix: np.ndarray | Sequence[Sequence[float]]) -> float:
    """Binary64 Ryser for matrices beyond the exact range (no exactness guarantee).

    Vectorized over fixed-size subset chunks with a deterministic reduction
    order, so results are reproducible run to run.
    """
    a = np.asarray(matrix, dtype=np.float64)
    n = a.shape[0]
    if a.shape != (n, n):
        raise SizeMismatch(f"matrix must be square, got shape {a.shape}")
    if n == 1:
        return float(a[0, 0])
    if n > 30:
        raise SizeGuard(f"float permanent guarded to n <= 30, got n = {n}")
    shifts = np.arange(n, dtype=np.uint64)
    total = 0.0
    chunk = 1 << 16
    for start in range(1, 1 << n, chunk):
        stop = min(start + chunk, 1 << n)
        ks = np.arange(start, stop, dtype=np.uint64)
        bits = ((ks[:, None] >> shifts[None, :]) & 1).astype(np.float64)
        rowsums = bits @ a.T
        terms = rowsums.prod(axis=1)
        parity = (n - np.bitwise_count(ks)) & 1
        signs = 1.0 - 2.0 * parity.astype(np.float64)
        total += float(signs @ terms)
    return total


def perm_rect(gamma: RationalMatrix, rows: Sequence[int], cols: Sequence[int]) -> Fraction:
    """Permanent of the sub-matrix on rows x cols; 1 when both sets are empty."""
    rows = tuple(rows)
    cols = tuple(cols)
    if len(rows) != len(cols):
        raise SizeMismatch(f"|rows| = {len(rows)} but |cols| = {len(cols)}")
    if not rows:
        return Fraction(1)
    return perm_exact(gamma.submatrix(rows, cols))


@dataclass(frozen=True)
class PermDistribution:
    """Probability mass over the positive-weight permutations of a matrix."""

    support: tuple[Permutation, ...]
    weights: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.support) != len(self.weights):
            raise SizeMismatch("support and weights differ in length")
        total = sum(self.weights, Fraction(0))
        if total != 1:
            raise SizeMismatch(f"weights sum to {total}, expected 1")


def perm_distribution(theta: RationalMatrix) -> PermDistribution:
    """Distribution p(sigma) proportional to prod_i theta(i, sigma(i))."""
    perms = valid_permutations(theta)  # raises EmptySupport
    rows = theta.rows
    raw = []
    for sigma in perms:
        w = Fraction(1)
        for i, j in enumerate(sigma.images):
            w *= rows[i][j]
        raw.append(w)
    total = sum(raw, Fraction(0))
    if total == 0:
        raise EmptySupport("permanent is zero")
    return PermDistribution(perms, tuple(w / total for w in raw))


def mth_root(value: Fraction | float, M: int) -> float:
    """The M-th root as binary64; robust for Fractions outside float range."""
    if M == 1:
        return float(value)
    if isinstance(value, Fraction):
        if value == 0:
            return 0.0
        return math.exp((math.log(value.numerator) - math.log(value.denominator)) / M)
    if value == 0:
        return 0.0
    return float(value) ** (1.0 / M)
