"""End-to-end verification of the coefficient and permanent ratio bounds, the
exact ratio identities, the M = 2 cycle-count specialization, and the
method-of-types trend table.

Irrational bound constants (half-integer powers of 2, M-th roots) are never
evaluated in floating point inside a check: both sides are raised to the
least common power so every comparison is between exact rationals.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal

from .coefficients import (
    c_bethe,
    c_gibbs,
    c_sinkhorn,
    cycle_count,
)
from .core import (
    FlowMatrix,
    RationalMatrix,
    enumerate_flow_matrices,
    matrix_to_json_obj,
    support,
)
from .degree_m import theta_power
from .errors import EmptySupport, InputFormat, NonIntegral, SizeGuard
from .free_energy import minimize_bethe, minimize_scaled_sinkhorn
from .permanent import mth_root, perm_distribution, perm_exact

_RATIO_TUPLE_LIMIT = 10**6
_M2_SIZE_LIMIT = 6

# (flows, c_bethe list, c_sinkhorn list) per (n, M); coefficients are
# theta-independent so sweeps over many matrices reuse one enumeration
_COEFF_CACHE: dict[tuple[int, int], tuple] = {}


def _coefficient_table(n: int, M: int):
    key = (n, M)
    hit = _COEFF_CACHE.get(key)
    if hit is None:
        flows = enumerate_flow_matrices(n, M)
        hit = (flows, [c_bethe(T) for T in flows], [c_sinkhorn(T) for T in flows])
        _COEFF_CACHE[key] = hit
    return hit


def bethe_power_sum(theta: RationalMatrix, M: int) -> Fraction:
    """(perm_B,M)^M as the exact coefficient expansion."""
    flows, cb, _ = _coefficient_table(theta.n, M)
    return sum(
        (theta_power(theta, T) * c for T, c in zip(flows, cb)), Fraction(0)
    )


def sinkhorn_power_sum(theta: RationalMatrix, M: int) -> Fraction:
    """(perm_scS,M)^M as the exact coefficient expansion."""
    flows, _, cs = _coefficient_table(theta.n, M)
    return sum(
        (theta_power(theta, T) * c for T, c in zip(flows, cs)), Fraction(0)
    )


def gibbs_power_sum(theta: RationalMatrix, M: int) -> Fraction:
    """perm(theta)^M as the exact coefficient expansion (Gibbs counts)."""
    flows = enumerate_flow_matrices(theta.n, M, support(theta))
    return sum(
        (theta_power(theta, T) * c_gibbs(T) for T in flows), Fraction(0)
    )


@dataclass(frozen=True)
class BoundCheck:
    """One inequality lhs <= rhs between exact rationals."""

    name: str
    lhs: Fraction
    rhs: Fraction

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs


def _theta_digest(theta: RationalMatrix) -> str:
    blob = json.dumps(matrix_to_json_obj(theta), separators=(",", ":"), sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class BoundsReport:
    theta_digest: str
    n: int
    M: int
    perm: Fraction
    degree_m_bethe_pow: Fraction
    degree_m_sinkhorn_pow: Fraction
    degree_m_bethe: float
    degree_m_sinkhorn: float
    perm_bethe: float
    perm_scs: float
    ratio_bethe_pow: Fraction
    ratio_sinkhorn_pow: Fraction
    bound_constants: tuple[tuple[str, Fraction], ...]
    checks: tuple[BoundCheck, ...]

    @property
    def all_hold(self) -> bool:
        return all(c.holds for c in self.checks)

    def to_json_obj(self) -> dict:
        return {
            "theta_digest": self.theta_digest,
            "n": self.n,
            "M": self.M,
            "perm": str(self.perm),
            "degree_m_bethe_pow": str(self.degree_m_bethe_pow),
            "degree_m_sinkhorn_pow": str(self.degree_m_sinkhorn_pow),
            "degree_m_bethe": self.degree_m_bethe,
            "degree_m_sinkhorn": self.degree_m_sinkhorn,
            "perm_bethe": self.perm_bethe,
            "perm_scs": self.perm_scs,
            "ratio_bethe_pow": str(self.ratio_bethe_pow),
            "ratio_sinkhorn_pow": str(self.ratio_sinkhorn_pow),
            "bound_constants": {name: str(v) for name, v in self.bound_constants},
            "checks": [
                {"name": c.name, "lhs": str(c.lhs), "rhs": str(c.rhs), "holds": c.holds}
                for c in self.checks
            ],
        }


def _bethe_bound_checks(n: int, M: int, perm_pow: Fraction, bethe_pow: Fraction) -> list[BoundCheck]:
    checks = [BoundCheck("bethe_lower", bethe_pow, perm_pow)]
    # upper bound constant is (2^(n/2))^(M-1) on the M-th power scale;
    # compare directly when n(M-1) is even, else square both sides
    e = n * (M - 1)
    if e % 2 == 0:
        checks.append(BoundCheck("bethe_upper", perm_pow, bethe_pow * Fraction(2) ** (e // 2)))
    else:
        checks.append(
            BoundCheck("bethe_upper", perm_pow**2, bethe_pow**2 * Fraction(2) ** e)
        )
    return checks


def _sinkhorn_bound_checks(
    n: int, M: int, perm_pow: Fraction, scs_pow: Fraction
) -> list[BoundCheck]:
    factor = Fraction(M ** (n * M), math.factorial(M) ** n)
    waerden = Fraction(math.factorial(n), n**n) ** (M - 1)
    return [
        BoundCheck("sinkhorn_lower", scs_pow * factor * waerden, perm_pow),
        BoundCheck("sinkhorn_upper", perm_pow, scs_pow * factor),
    ]


def check_permanent_bounds(
    theta: RationalMatrix,
    M: int,
    analytic: bool = True,
    tol: float = 1e-8,
    max_iter: int = 100000,
) -> BoundsReport:
    """Evaluate the four degree-M permanent inequalities for one matrix.

    All comparisons are made on M-th powers (squared when the bound constant
    is a half-integer power of 2), so the report is exact.  When analytic is
    set, the report also carries the limiting Bethe / scaled Sinkhorn values
    from the convex solvers.
    """
    if M < 1:
        raise InputFormat(f"M must be >= 1, got {M}")
    n = theta.n
    perm = perm_exact(theta)
    if perm == 0:
        raise EmptySupport("permanent is zero; the ratio bounds are undefined")
    perm_pow = perm**M
    bethe_pow = bethe_power_sum(theta, M)
    scs_pow = sinkhorn_power_sum(theta, M)
    checks = _bethe_bound_checks(n, M, perm_pow, bethe_pow) + _sinkhorn_bound_checks(
        n, M, perm_pow, scs_pow
    )
    perm_bethe = perm_scs = math.nan
    if analytic:
        perm_bethe = minimize_bethe(theta, tol=tol, max_iter=max_iter).value
        perm_scs = minimize_scaled_sinkhorn(theta, tol=min(tol, 1e-12), max_iter=max_iter).value
    constants = (
        ("bethe_upper_pow_2M", Fraction(2) ** (n * (M - 1))),
        ("sinkhorn_factor_pow_M", Fraction(M ** (n * M), math.factorial(M) ** n)),
        ("waerden_pow_M_minus_1", Fraction(math.factorial(n), n**n) ** (M - 1)),
    )
    return BoundsReport(
        theta_digest=_theta_digest(theta),
        n=n,
        M=M,
        perm=perm,
        degree_m_bethe_pow=bethe_pow,
        degree_m_sinkhorn_pow=scs_pow,
        degree_m_bethe=mth_root(bethe_pow, M),
        degree_m_sinkhorn=mth_root(scs_pow, M),
        perm_bethe=perm_bethe,
        perm_scs=perm_scs,
        ratio_bethe_pow=perm_pow / bethe_pow,
        ratio_sinkhorn_pow=perm_pow / scs_pow,
        bound_constants=constants,
        checks=tuple(checks),
    )


def check_coefficient_bounds(n: int, M: int) -> list[tuple[FlowMatrix, bool]]:
    """Exhaustive coefficient-ratio bounds over all of Gamma_{M,n}, exactly."""
    if M < 1 or n < 1:
        raise InputFormat("n and M must be positive")
    flows, cb, cs = _coefficient_table(n, M)
    factor = Fraction(M**M, math.factorial(M)) ** n
    waerden = Fraction(math.factorial(n), n**n) ** (M - 1)
    e = n * (M - 1)
    out: list[tuple[FlowMatrix, bool]] = []
    for T, b, s in zip(flows, cb, cs):
        g = Fraction(c_gibbs(T))
        rb = g / b
        rs = g / s
        ok = rb >= 1
        if e % 2 == 0:
            ok = ok and rb <= Fraction(2) ** (e // 2)
        else:
            ok = ok and rb**2 <= Fraction(2) ** e
        ok = ok and factor * waerden <= rs <= factor
        out.append((T, ok))
    return out


@dataclass(frozen=True)
class RatioIdentity:
    direct_ratio_to_the_minus_M: Fraction
    sum_expression: Fraction
    holds: bool


def ratio_identity(
    theta: RationalMatrix, M: int, kind: Literal["bethe", "sinkhorn"]
) -> RatioIdentity:
    """Verify (perm_X,M / perm)^M = sum over M-tuples of permutations of
    prod_m p_theta(sigma_m) * C_X,M(<P>) / C_M(<P>), exactly."""
    if M < 1:
        raise InputFormat(f"M must be >= 1, got {M}")
    if kind not in ("bethe", "sinkhorn"):
        raise InputFormat(f"unknown ratio kind {kind!r}")
    dist = perm_distribution(theta)
    if len(dist.support) ** M > _RATIO_TUPLE_LIMIT:
        raise SizeGuard(
            f"|S(theta)|^M = {len(dist.support) ** M} tuples exceed the guard"
        )
    n = theta.n
    coeff = c_bethe if kind == "bethe" else c_sinkhorn
    total = Fraction(0)
    indexed = list(zip(dist.support, dist.weights))
    for tup in itertools.product(indexed, repeat=M):
        counts = [[0] * n for _ in range(n)]
        prob = Fraction(1)
        for sigma, w in tup:
            prob *= w
            for i, j in enumerate(sigma.images):
                counts[i][j] += 1
        T = FlowMatrix(M, tuple(tuple(r) for r in counts))
        total += prob * coeff(T) / c_gibbs(T)
    perm = perm_exact(theta)
    power_sum = bethe_power_sum(theta, M) if kind == "bethe" else sinkhorn_power_sum(theta, M)
    direct = power_sum / perm**M
    return RatioIdentity(direct, total, direct == total)


@dataclass(frozen=True)
class M2Ratio:
    ratio: float
    via_cycles: float
    bounds_ok: bool


def m2_ratio(theta: RationalMatrix) -> M2Ratio:
    """perm / perm_B,2 computed directly and via the cycle-count formula.

    The two routes must agree to 1e-10 relative; bounds_ok records the
    1 <= ratio <= 2^(n/4) sandwich.
    """
    n = theta.n
    if n > _M2_SIZE_LIMIT:
        raise SizeGuard(f"m2_ratio guarded to n <= {_M2_SIZE_LIMIT}, got n = {n}")
    dist = perm_distribution(theta)
    cyc_sum = Fraction(0)
    for (s1, w1), (s2, w2) in itertools.product(
        zip(dist.support, dist.weights), repeat=2
    ):
        cyc_sum += w1 * w2 * Fraction(1, 2 ** cycle_count(s1, s2))
    via_cycles = 1.0 / math.sqrt(float(cyc_sum))
    perm = perm_exact(theta)
    bethe2 = bethe_power_sum(theta, 2)
    ratio = float(perm) / mth_root(bethe2, 2)
    assert abs(ratio - via_cycles) <= 1e-10 * max(abs(ratio), abs(via_cycles))
    bounds_ok = 1.0 - 1e-12 <= ratio <= 2.0 ** (n / 4.0) + 1e-12
    return M2Ratio(ratio, via_cycles, bounds_ok)


@dataclass(frozen=True)
class TrendRow:
    M: int
    log_coeff_over_M: float
    entropy: float


def asymptotic_trend(fraction: Fraction, M_list) -> list[TrendRow]:
    """Method-of-types table for n = 2: (1/M) log C(M, k) against the binary
    entropy h(k/M), with the sandwich 0 <= h - (1/M) log C <= log(M+1)/M
    asserted row by row (k = fraction * M must be integral)."""
    fraction = Fraction(fraction)
    if not 0 <= fraction <= 1:
        raise InputFormat(f"fraction must lie in [0, 1], got {fraction}")
    rows = []
    for M in M_list:
        if M < 1:
            raise InputFormat(f"every M must be >= 1, got {M}")
        k_exact = fraction * M
        if k_exact.denominator != 1:
            raise NonIntegral(f"fraction * M = {k_exact} is not an integer for M = {M}")
        k = int(k_exact)
        log_c = math.log(math.comb(M, k))
        p = float(fraction)
        entropy = 0.0
        if 0.0 < p < 1.0:
            entropy = -p * math.log(p) - (1.0 - p) * math.log(1.0 - p)
        gap = entropy - log_c / M
        assert -1e-12 <= gap <= math.log(M + 1) / M + 1e-12
        rows.append(TrendRow(M, log_c / M, entropy))
    return rows
