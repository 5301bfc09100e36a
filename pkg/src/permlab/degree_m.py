"""Block liftings of a weight matrix and the degree-M Bethe / scaled-Sinkhorn
permanents, each computable by several independent routes:

  bethe:    coefficient expansion | exact average over all liftings |
            seeded Monte-Carlo over uniform liftings
  sinkhorn: Kronecker-product permanent | coefficient expansion
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Literal

from .coefficients import c_bethe, c_sinkhorn
from .core import (
    FlowMatrix,
    Permutation,
    RationalMatrix,
    enumerate_flow_matrices,
    kron_uniform,
    support,
)
from .errors import DimensionMismatch, InputFormat, SizeGuard
from .permanent import mth_root, perm_exact, perm_float

_ENUMERATE_LIFTINGS_LIMIT = 10**6
_FLOW_COUNT_LIMIT = 2 * 10**6
_EXACT_KRONECKER_LIMIT = 20

BetheRoute = Literal["coefficients", "enumerate", "sample"]
SinkhornRoute = Literal["kronecker", "coefficients"]


@dataclass(frozen=True)
class LiftingCollection:
    """An n x n grid of permutations of {0, ..., M-1}, one per matrix cell."""

    M: int
    blocks: tuple[tuple[Permutation, ...], ...]

    def __post_init__(self):
        for row in self.blocks:
            if len(row) != len(self.blocks):
                raise InputFormat("block grid must be square")
            for p in row:
                if p.n != self.M:
                    raise InputFormat(f"every block must permute {self.M} elements")

    @property
    def n(self) -> int:
        return len(self.blocks)


def lift(theta: RationalMatrix, lifting: LiftingCollection) -> RationalMatrix:
    """The nM x nM block matrix with block (i, j) = theta(i, j) * P^(i,j)."""
    if lifting.n != theta.n:
        raise DimensionMismatch(
            f"lifting has {lifting.n} blocks per side, matrix has {theta.n}"
        )
    n, M = theta.n, lifting.M
    zero = Fraction(0)
    big = [[zero] * (n * M) for _ in range(n * M)]
    for i in range(n):
        for j in range(n):
            x = theta.rows[i][j]
            images = lifting.blocks[i][j].images
            for a in range(M):
                big[i * M + a][j * M + images[a]] = x
    return RationalMatrix(tuple(tuple(row) for row in big))


def iter_liftings(n: int, M: int) -> Iterator[LiftingCollection]:
    """All liftings in mixed-radix order over per-block permutation indices."""
    perms = tuple(Permutation(p) for p in itertools.permutations(range(M)))
    for combo in itertools.product(range(len(perms)), repeat=n * n):
        blocks = tuple(
            tuple(perms[combo[i * n + j]] for j in range(n)) for i in range(n)
        )
        yield LiftingCollection(M, blocks)


def lifting_count(n: int, M: int) -> int:
    return math.factorial(M) ** (n * n)


def _fisher_yates(M: int, rng: random.Random) -> Permutation:
    images = list(range(M))
    for i in range(M - 1, 0, -1):
        j = rng.randint(0, i)
        images[i], images[j] = images[j], images[i]
    return Permutation(tuple(images))


def sample_lifting(n: int, M: int, rng: random.Random) -> LiftingCollection:
    """One uniform lifting: every block drawn independently by Fisher-Yates."""
    return LiftingCollection(
        M, tuple(tuple(_fisher_yates(M, rng) for _ in range(n)) for _ in range(n))
    )


@dataclass(frozen=True)
class DegreeMResult:
    """value_to_the_M is exact (Fraction) on exact routes, float otherwise;
    value is its M-th root as binary64."""

    value_to_the_M: Fraction | float
    value: float


def theta_power(theta: RationalMatrix, T: FlowMatrix) -> Fraction:
    """The monomial prod_{i,j} theta(i,j)^T(i,j), with 0^0 = 1."""
    if theta.n != T.n:
        raise DimensionMismatch("matrix and flow matrix sizes differ")
    out = Fraction(1)
    for i, row in enumerate(T.counts):
        trow = theta.rows[i]
        for j, t in enumerate(row):
            if t:
                x = trow[j]
                if x == 0:
                    return Fraction(0)
                out *= x**t
    return out


def _guard_flow_enumeration(n: int, M: int) -> None:
    # crude upper bound: compositions of M into n parts, independently per row
    estimate = math.comb(M + n - 1, n - 1) ** n
    if estimate > _FLOW_COUNT_LIMIT:
        raise SizeGuard(
            f"enumerating Gamma_{{{M},{n}}} is over the guard "
            f"(estimate {estimate} > {_FLOW_COUNT_LIMIT})"
        )


def degree_m_bethe(
    theta: RationalMatrix,
    M: int,
    route: BetheRoute = "coefficients",
    samples: int | None = None,
    seed: int | None = None,
) -> DegreeMResult:
    """Degree-M Bethe permanent: M-th root of the average lifted permanent.

    route="coefficients" evaluates the exact expansion
    sum_gamma theta^(M*gamma) * C_B,M(gamma); route="enumerate" averages
    perm(lift) over all (M!)^(n^2) liftings exactly; route="sample" is a
    seeded Monte-Carlo mean over uniform liftings.
    """
    if M < 1:
        raise InputFormat(f"M must be >= 1, got {M}")
    n = theta.n
    if route == "coefficients":
        _guard_flow_enumeration(n, M)
        flows = enumerate_flow_matrices(n, M, support(theta))
        power = sum((theta_power(theta, T) * c_bethe(T) for T in flows), Fraction(0))
        return DegreeMResult(power, mth_root(power, M))
    if route == "enumerate":
        count = lifting_count(n, M)
        if count > _ENUMERATE_LIFTINGS_LIMIT:
            raise SizeGuard(
                f"(M!)^(n^2) = {count} liftings exceed the enumerate guard"
            )
        total = Fraction(0)
        for lifting in iter_liftings(n, M):
            total += perm_exact(lift(theta, lifting))
        power = total / count
        return DegreeMResult(power, mth_root(power, M))
    if route == "sample":
        if not samples or samples < 1:
            raise InputFormat("route='sample' needs samples >= 1")
        rng = random.Random(seed)
        exact_ok = n * M <= _EXACT_KRONECKER_LIMIT
        total = 0.0
        for _ in range(samples):
            lifted = lift(theta, sample_lifting(n, M, rng))
            if exact_ok:
                total += float(perm_exact(lifted))
            else:
                total += perm_float(lifted.to_floats())
        power = total / samples
        return DegreeMResult(power, mth_root(power, M))
    raise InputFormat(f"unknown bethe route {route!r}")


def degree_m_sinkhorn(
    theta: RationalMatrix, M: int, route: SinkhornRoute = "kronecker"
) -> DegreeMResult:
    """Degree-M scaled Sinkhorn permanent: M-th root of perm(theta (x) U_M).

    route="kronecker" computes the Kronecker-product permanent directly
    (exact up to nM = 20, binary64 beyond); route="coefficients" evaluates
    sum_gamma theta^(M*gamma) * C_scS,M(gamma) exactly.
    """
    if M < 1:
        raise InputFormat(f"M must be >= 1, got {M}")
    n = theta.n
    if route == "kronecker":
        big = kron_uniform(theta, M)
        if n * M <= _EXACT_KRONECKER_LIMIT:
            power: Fraction | float = perm_exact(big)
        else:
            power = perm_float(big.to_floats())
        return DegreeMResult(power, mth_root(power, M))
    if route == "coefficients":
        _guard_flow_enumeration(n, M)
        flows = enumerate_flow_matrices(n, M, support(theta))
        power = sum((theta_power(theta, T) * c_sinkhorn(T) for T in flows), Fraction(0))
        return DegreeMResult(power, mth_root(power, M))
    raise InputFormat(f"unknown sinkhorn route {route!r}")
