"""Exact matrix/permutation types, support handling, and enumeration of the
integer-scaled doubly stochastic polytope.

All scalars are `fractions.Fraction`; every type is an immutable value and
every operation is a pure function.  Matrices are 0-indexed internally and in
all external formats.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import DimensionMismatch, EmptySupport, InputFormat


def to_fraction(value) -> Fraction:
    """Coerce an int, Fraction, float, "p/q" string, or decimal string.

    Floats go through their shortest decimal repr, so 0.1 means exactly 1/10.
    """
    if isinstance(value, bool):
        raise InputFormat(f"boolean is not a valid scalar: {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, float):
        value = repr(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise InputFormat(f"cannot parse scalar {value!r}") from exc
    raise InputFormat(f"unsupported scalar type {type(value).__name__}")


@dataclass(frozen=True)
class RationalMatrix:
    """Square matrix of exact non-negative rationals."""

    rows: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        n = len(self.rows)
        if n == 0:
            raise InputFormat("matrix must have at least one row")
        for row in self.rows:
            if len(row) != n:
                raise InputFormat("matrix must be square")
            for x in row:
                if x < 0:
                    raise InputFormat(f"negative entry {x}")

    @property
    def n(self) -> int:
        return len(self.rows)

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable]) -> "RationalMatrix":
        return cls(tuple(tuple(to_fraction(x) for x in row) for row in rows))

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        one, zero = Fraction(1), Fraction(0)
        return cls(tuple(tuple(one if i == j else zero for j in range(n)) for i in range(n)))

    @classmethod
    def ones(cls, n: int) -> "RationalMatrix":
        one = Fraction(1)
        return cls(tuple((one,) * n for _ in range(n)))

    def entry(self, i: int, j: int) -> Fraction:
        return self.rows[i][j]

    def row_sums(self) -> tuple[Fraction, ...]:
        return tuple(sum(row, Fraction(0)) for row in self.rows)

    def col_sums(self) -> tuple[Fraction, ...]:
        n = self.n
        return tuple(sum((self.rows[i][j] for i in range(n)), Fraction(0)) for j in range(n))

    def scaled(self, factor) -> "RationalMatrix":
        f = to_fraction(factor)
        return RationalMatrix(tuple(tuple(x * f for x in row) for row in self.rows))

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "RationalMatrix":
        return RationalMatrix(tuple(tuple(self.rows[i][j] for j in cols) for i in rows))

    def to_floats(self) -> list[list[float]]:
        return [[float(x) for x in row] for row in self.rows]


@dataclass(frozen=True)
class Permutation:
    """A bijection of {0, ..., n-1}, stored as the image sequence."""

    images: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.images) != list(range(len(self.images))):
            raise InputFormat(f"not a permutation of 0..{len(self.images) - 1}: {self.images}")

    @property
    def n(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i]

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(n)))

    def inverse(self) -> "Permutation":
        inv = [0] * self.n
        for i, j in enumerate(self.images):
            inv[j] = i
        return Permutation(tuple(inv))

    def after(self, other: "Permutation") -> "Permutation":
        """Composition: first apply other, then self."""
        if self.n != other.n:
            raise DimensionMismatch("permutations act on different index sets")
        return Permutation(tuple(self.images[other.images[i]] for i in range(self.n)))

    def matrix_rows(self) -> tuple[tuple[int, ...], ...]:
        """0/1 grid with exactly one 1 per row and per column."""
        n = self.n
        return tuple(tuple(1 if self.images[i] == j else 0 for j in range(n)) for i in range(n))


@dataclass(frozen=True)
class FlowMatrix:
    """Integer matrix T with all row and column sums equal to M.

    T/M is a doubly stochastic matrix whose entries are multiples of 1/M;
    for M = 1 the matrix is a permutation matrix.
    """

    M: int
    counts: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.M < 1:
            raise InputFormat(f"M must be >= 1, got {self.M}")
        n = len(self.counts)
        if n == 0:
            raise InputFormat("flow matrix must have at least one row")
        col_totals = [0] * n
        for row in self.counts:
            if len(row) != n:
                raise InputFormat("flow matrix must be square")
            total = 0
            for j, v in enumerate(row):
                if not isinstance(v, int) or v < 0:
                    raise InputFormat(f"entries must be non-negative integers, got {v!r}")
                total += v
                col_totals[j] += v
            if total != self.M:
                raise InputFormat(f"row sum {total} != M = {self.M}")
        for j, total in enumerate(col_totals):
            if total != self.M:
                raise InputFormat(f"column {j} sum {total} != M = {self.M}")

    @property
    def n(self) -> int:
        return len(self.counts)

    def gamma(self) -> RationalMatrix:
        m = self.M
        return RationalMatrix(tuple(tuple(Fraction(v, m) for v in row) for row in self.counts))

    def key(self) -> bytes:
        """Canonical byte encoding; M and n are recoverable from the counts.

        A one-byte width prefix keeps encodings collision-free when entries
        need more than one byte.
        """
        width = max(1, (self.M.bit_length() + 7) // 8)
        payload = b"".join(
            v.to_bytes(width, "big") for row in self.counts for v in row
        )
        return bytes([width]) + payload

    @classmethod
    def from_gamma(cls, gamma: RationalMatrix, M: int) -> "FlowMatrix":
        counts = []
        for row in gamma.rows:
            out = []
            for x in row:
                scaled = x * M
                if scaled.denominator != 1:
                    raise InputFormat(f"entry {x} is not a multiple of 1/{M}")
                out.append(int(scaled))
            counts.append(tuple(out))
        return cls(M, tuple(counts))

    @classmethod
    def from_permutation(cls, sigma: Permutation, M: int = 1) -> "FlowMatrix":
        """The matrix M * P_sigma, the unique point of Gamma_{M,n} supported on sigma."""
        return cls(M, tuple(tuple(M * v for v in row) for row in sigma.matrix_rows()))


@dataclass(frozen=True)
class SupportPattern:
    """Boolean mask of the strictly positive cells of a matrix."""

    mask: tuple[tuple[bool, ...], ...]

    @property
    def n(self) -> int:
        return len(self.mask)


def support(theta: RationalMatrix) -> SupportPattern:
    """Mask of cells where theta is strictly positive."""
    return SupportPattern(tuple(tuple(x > 0 for x in row) for row in theta.rows))


def valid_permutations(theta: RationalMatrix) -> tuple[Permutation, ...]:
    """All permutations sigma with every theta(i, sigma(i)) > 0.

    Returned in lexicographic order of image sequences.  Raises EmptySupport
    when none exists, violating the standing positivity assumption.
    """
    n = theta.n
    rows = theta.rows
    out: list[Permutation] = []
    used = [False] * n
    img = [0] * n

    def fill(i: int) -> None:
        if i == n:
            out.append(Permutation(tuple(img)))
            return
        row = rows[i]
        for j in range(n):
            if not used[j] and row[j] > 0:
                used[j] = True
                img[i] = j
                fill(i + 1)
                used[j] = False

    fill(0)
    if not out:
        raise EmptySupport("no permutation has positive weight under this matrix")
    return tuple(out)


def has_valid_permutation(theta: RationalMatrix) -> bool:
    """True iff at least one permutation has positive weight (first-hit search)."""
    n = theta.n
    rows = theta.rows
    used = [False] * n

    def fill(i: int) -> bool:
        if i == n:
            return True
        row = rows[i]
        for j in range(n):
            if not used[j] and row[j] > 0:
                used[j] = True
                if fill(i + 1):
                    used[j] = False
                    return True
                used[j] = False
        return False

    return fill(0)


def enumerate_flow_matrices(
    n: int, M: int, support_pattern: SupportPattern | None = None
) -> tuple[FlowMatrix, ...]:
    """All integer matrices with row/column sums M, optionally zero off support.

    Deterministic row-major backtracking: cells are filled left-to-right, row
    by row, candidate values tried in descending order.  May return an empty
    tuple when the support pattern is infeasible.
    """
    if n < 1 or M < 1:
        raise InputFormat("n and M must be positive")
    mask = None
    if support_pattern is not None:
        if support_pattern.n != n:
            raise DimensionMismatch("support pattern size differs from n")
        mask = support_pattern.mask

    col_rem = [M] * n
    grid = [[0] * n for _ in range(n)]
    out: list[FlowMatrix] = []

    def fill(i: int, j: int, row_rem: int) -> None:
        if j == n:
            if i == n - 1:
                out.append(FlowMatrix(M, tuple(tuple(r) for r in grid)))
            else:
                fill(i + 1, 0, M)
            return
        # capacity of the cells right of j in this row
        cap_after = 0
        for jj in range(j + 1, n):
            if mask is None or mask[i][jj]:
                cap_after += col_rem[jj]
        hi = min(row_rem, col_rem[j]) if (mask is None or mask[i][j]) else 0
        lo = max(0, row_rem - cap_after)
        for v in range(hi, lo - 1, -1):
            grid[i][j] = v
            col_rem[j] -= v
            fill(i, j + 1, row_rem - v)
            col_rem[j] += v
        grid[i][j] = 0

    fill(0, 0, M)
    return tuple(out)


def kron_uniform(theta: RationalMatrix, M: int) -> RationalMatrix:
    """Kronecker product of theta with the uniform M x M matrix (entries 1/M)."""
    if M < 1:
        raise InputFormat(f"M must be >= 1, got {M}")
    n = theta.n
    inv = Fraction(1, M)
    big = []
    for i in range(n):
        base = [x * inv for x in theta.rows[i]]
        block_row = tuple(itertools.chain.from_iterable((b,) * M for b in base))
        for _ in range(M):
            big.append(block_row)
    return RationalMatrix(tuple(big))


def matrix_from_json_obj(obj) -> RationalMatrix:
    """Parse the shared matrix JSON format: {"n": int, "entries": [[...], ...]}.

    Entries may be integers, decimal strings, or exact fraction strings "p/q".
    """
    if not isinstance(obj, dict) or "entries" not in obj:
        raise InputFormat('matrix JSON must be an object with an "entries" field')
    entries = obj["entries"]
    if not isinstance(entries, list) or not all(isinstance(r, list) for r in entries):
        raise InputFormat('"entries" must be a list of rows')
    matrix = RationalMatrix.from_rows(entries)
    declared = obj.get("n")
    if declared is not None and declared != matrix.n:
        raise InputFormat(f'declared "n" = {declared} does not match {matrix.n} rows')
    return matrix


def matrix_to_json_obj(matrix: RationalMatrix) -> dict:
    return {"n": matrix.n, "entries": [[str(x) for x in row] for row in matrix.rows]}
