"""The three coefficient families attached to integer doubly stochastic
matrices: the decomposition count (Gibbs), the Bethe closed form, and the
scaled-Sinkhorn closed form, together with the peeling map, the fractional
core, the three recursions in M, the M = 2 cycle-count specialization, and
the n = 2 Pascal-triangle tables.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal

from .core import FlowMatrix, Permutation, RationalMatrix, valid_permutations
from .errors import InputFormat, InvalidPeel, SizeGuard
from .permanent import perm_exact

Kind = Literal["gibbs", "bethe", "sinkhorn"]

# shared across calls; a racing re-insert writes the same value, so plain
# dict assignment is lost-update-free
_C_GIBBS_MEMO: dict[bytes, int] = {}


def peel(T: FlowMatrix, sigma1: Permutation) -> FlowMatrix:
    """Remove one permutation from T, dropping the scale from M to M - 1."""
    if T.M < 2:
        raise InvalidPeel(f"peeling requires M >= 2, got M = {T.M}")
    if sigma1.n != T.n:
        raise InvalidPeel("permutation size differs from matrix size")
    counts = []
    for i, row in enumerate(T.counts):
        j = sigma1.images[i]
        if row[j] == 0:
            raise InvalidPeel(f"cell ({i}, {j}) is zero; sigma1 does not decompose T")
        counts.append(tuple(v - 1 if jj == j else v for jj, v in enumerate(row)))
    return FlowMatrix(T.M - 1, tuple(counts))


def decomposing_permutations(T: FlowMatrix) -> tuple[Permutation, ...]:
    """Permutations with all selected cells positive; never empty on Gamma_{M,n}."""
    return valid_permutations(T.gamma())


@dataclass(frozen=True)
class FractionalCore:
    """Rows/columns holding fractional entries of T/M and the core permanent.

    perm_core is the permanent of the entrywise-normalized core, evaluated via
    the exact rational quotient
        sum_sigma prod_i g(i,s(i))(1-g(i,s(i)))  /  prod_{R x C} (1-g(i,j)),
    which avoids the r-th roots of the entrywise definition.
    """

    rows: tuple[int, ...]
    cols: tuple[int, ...]
    r: int
    core: RationalMatrix | None
    perm_core: Fraction

    def __post_init__(self):
        if len(self.rows) != len(self.cols) or len(self.rows) != self.r:
            raise InputFormat("row/column index sets must both have cardinality r")
        if self.r == 1:
            raise InputFormat("r = 1 is impossible for a doubly stochastic matrix")


def fractional_core(T: FlowMatrix) -> FractionalCore:
    """Locate the fractional rows/columns of T/M and evaluate the core permanent."""
    n, M = T.n, T.M
    rows = tuple(i for i in range(n) if any(0 < v < M for v in T.counts[i]))
    cols = tuple(j for j in range(n) if any(0 < T.counts[i][j] < M for i in range(n)))
    if not rows:
        return FractionalCore((), (), 0, None, Fraction(1))
    gamma = T.gamma()
    core = gamma.submatrix(rows, cols)
    # numerator is itself a permanent, of the matrix with entries g(1-g)
    weighted = RationalMatrix(
        tuple(tuple(x * (1 - x) for x in row) for row in core.rows)
    )
    numerator = perm_exact(weighted)
    denominator = Fraction(1)
    for row in core.rows:
        for x in row:
            denominator *= 1 - x
    return FractionalCore(rows, cols, len(rows), core, numerator / denominator)


def c_gibbs(T: FlowMatrix) -> int:
    """Number of M-tuples of permutations averaging to T/M.

    Memoized recursion: C_M(T) = sum over sigma1 of C_{M-1}(T - P_sigma1),
    bottoming out at C_1(P_sigma) = 1.  The memo is keyed by the canonical
    byte encoding of T (M and n are implied by the counts).
    """
    if T.M == 1:
        return 1
    key = T.key()
    hit = _C_GIBBS_MEMO.get(key)
    if hit is not None:
        return hit
    total = 0
    for sigma in decomposing_permutations(T):
        total += c_gibbs(peel(T, sigma))
    _C_GIBBS_MEMO[key] = total
    return total


def c_gibbs_brute(T: FlowMatrix) -> int:
    """Literal count over all M-tuples of permutations; oracle for c_gibbs."""
    n, M = T.n, T.M
    if math.factorial(n) ** M > 10**7:
        raise SizeGuard(f"(n!)^M too large for brute force: n = {n}, M = {M}")
    perms = list(itertools.permutations(range(n)))
    target = T.counts
    count = 0
    for tup in itertools.product(perms, repeat=M):
        acc = [[0] * n for _ in range(n)]
        for images in tup:
            for i, j in enumerate(images):
                acc[i][j] += 1
        if all(tuple(acc[i]) == target[i] for i in range(n)):
            count += 1
    return count


def c_bethe(T: FlowMatrix) -> Fraction:
    """Closed form (M!)^(2n - n^2) * prod_{i,j} (M - T(i,j))! / T(i,j)!."""
    n, M = T.n, T.M
    value = Fraction(math.factorial(M)) ** (2 * n - n * n)
    for row in T.counts:
        for v in row:
            value *= Fraction(math.factorial(M - v), math.factorial(v))
    return value


def c_sinkhorn(T: FlowMatrix) -> Fraction:
    """Closed form M^(-nM) * (M!)^(2n) / prod_{i,j} T(i,j)!."""
    n, M = T.n, T.M
    denominator = M ** (n * M)
    for row in T.counts:
        for v in row:
            denominator *= math.factorial(v)
    return Fraction(math.factorial(M) ** (2 * n), denominator)


@dataclass(frozen=True)
class CoefficientTriple:
    gamma: FlowMatrix
    c_gibbs: int
    c_bethe: Fraction
    c_sinkhorn: Fraction


def coefficient_triple(T: FlowMatrix) -> CoefficientTriple:
    return CoefficientTriple(T, c_gibbs(T), c_bethe(T), c_sinkhorn(T))


@dataclass(frozen=True)
class RecursionCheck:
    kind: str
    lhs: Fraction
    rhs: Fraction
    holds: bool


def verify_recursion(kind: Kind, T: FlowMatrix) -> RecursionCheck:
    """Evaluate both sides of the one-step recursion in M, exactly.

    gibbs:    C_M = sum C_{M-1}(peel)
    bethe:    C_B,M = (1 / perm_core) * sum C_B,M-1(peel)
    sinkhorn: C_scS,M = (chi(M)^n * perm(T/M))^-1 * sum C_scS,M-1(peel),
              chi(M) = (M / (M-1))^(M-1)
    """
    if T.M < 2:
        raise InputFormat(f"recursions need M >= 2, got M = {T.M}")
    sigmas = decomposing_permutations(T)
    peels = [peel(T, s) for s in sigmas]
    if kind == "gibbs":
        lhs = Fraction(c_gibbs(T))
        rhs = Fraction(sum(c_gibbs(p) for p in peels))
    elif kind == "bethe":
        lhs = c_bethe(T)
        rhs = sum((c_bethe(p) for p in peels), Fraction(0)) / fractional_core(T).perm_core
    elif kind == "sinkhorn":
        lhs = c_sinkhorn(T)
        chi = Fraction(T.M, T.M - 1) ** (T.M - 1)
        perm_gamma = perm_exact(T.gamma())
        rhs = sum((c_sinkhorn(p) for p in peels), Fraction(0)) / (chi**T.n * perm_gamma)
    else:
        raise InputFormat(f"unknown recursion kind {kind!r}")
    return RecursionCheck(kind, lhs, rhs, lhs == rhs)


def cycle_count(sigma1: Permutation, sigma2: Permutation) -> int:
    """Number of cycles of length > 1 in sigma1 composed with sigma2 inverse."""
    if sigma1.n != sigma2.n:
        raise InputFormat("permutations act on different index sets")
    tau = sigma1.after(sigma2.inverse())
    seen = [False] * tau.n
    count = 0
    for start in range(tau.n):
        if seen[start]:
            continue
        length = 0
        i = start
        while not seen[i]:
            seen[i] = True
            i = tau.images[i]
            length += 1
        if length > 1:
            count += 1
    return count


def two_by_two_flow(k1: int, k2: int) -> FlowMatrix:
    """The n = 2 family [[k1, k2], [k2, k1]] / (k1 + k2)."""
    if k1 < 0 or k2 < 0 or k1 + k2 < 1:
        raise InputFormat("need k1, k2 >= 0 with k1 + k2 >= 1")
    return FlowMatrix(k1 + k2, ((k1, k2), (k2, k1)))


def pascal_table(kind: Kind, M_max: int) -> tuple[tuple[int, int, Fraction], ...]:
    """Coefficient values for the n = 2 family, rows (M, k1, value).

    Covers every k1 + k2 = M for M = 1..M_max, in ascending (M, k1) order;
    the gibbs column reproduces binomial coefficients (directed path counts
    through the Pascal-triangle recursion DAG).
    """
    if M_max < 1:
        raise InputFormat(f"M_max must be >= 1, got {M_max}")
    rows: list[tuple[int, int, Fraction]] = []
    for M in range(1, M_max + 1):
        for k1 in range(M + 1):
            T = two_by_two_flow(k1, M - k1)
            if kind == "gibbs":
                value = Fraction(c_gibbs(T))
            elif kind == "bethe":
                value = c_bethe(T)
            elif kind == "sinkhorn":
                value = c_sinkhorn(T)
            else:
                raise InputFormat(f"unknown table kind {kind!r}")
            rows.append((M, k1, value))
    return tuple(rows)


def pascal_table_csv(kind: Kind, M_max: int) -> str:
    """CSV rendering: header M,k1,value with values as exact fraction strings."""
    lines = ["M,k1,value"]
    for M, k1, value in pascal_table(kind, M_max):
        lines.append(f"{M},{k1},{value}")
    return "\n".join(lines) + "\n"
