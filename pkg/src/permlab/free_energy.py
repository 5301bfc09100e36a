"""Free energy functions over the doubly stochastic polytope and the analytic
Bethe / scaled-Sinkhorn permanents via convex minimization.

The Bethe permanent is exp(-min F_B) with F_B minimized by Frank-Wolfe over
the support-restricted Birkhoff polytope, using an exact linear-assignment
oracle for the vertex step.  The scaled Sinkhorn permanent is exp(-min F_scS)
with the minimizer obtained by alternating row/column normalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import FlowMatrix, RationalMatrix, has_valid_permutation, valid_permutations
from .errors import EmptySupport, SizeGuard, SupportViolation

_LS_EPS = 1e-12  # interior shift used only inside line search / gradients
_OFF_SUPPORT_COST = 1e9


def _xlogx(x: float) -> float:
    """x * log(x) with the 0 * log(0) = 0 convention."""
    if x <= 0.0:
        return 0.0
    return x * math.log(x)


@dataclass(frozen=True)
class DoublyStochasticPoint:
    """A binary64 point of the doubly stochastic polytope."""

    entries: tuple[tuple[float, ...], ...]

    @property
    def n(self) -> int:
        return len(self.entries)

    @classmethod
    def from_array(cls, array, check: bool = True, tol: float = 1e-9) -> "DoublyStochasticPoint":
        a = np.asarray(array, dtype=np.float64)
        if check:
            if np.any(a < -tol):
                raise SupportViolation("negative entry in doubly stochastic point")
            res = max(
                float(np.max(np.abs(a.sum(axis=1) - 1.0))),
                float(np.max(np.abs(a.sum(axis=0) - 1.0))),
            )
            if res > tol:
                raise SupportViolation(f"row/column sums deviate by {res:.3e} > {tol:.1e}")
        return cls(tuple(tuple(float(x) for x in row) for row in a))

    @classmethod
    def from_flow(cls, T: FlowMatrix) -> "DoublyStochasticPoint":
        m = float(T.M)
        return cls(tuple(tuple(v / m for v in row) for row in T.counts))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.entries, dtype=np.float64)


def _check_support(gamma: np.ndarray, theta: RationalMatrix, tol: float) -> None:
    for i, row in enumerate(theta.rows):
        for j, x in enumerate(row):
            if x == 0 and gamma[i, j] > tol:
                raise SupportViolation(
                    f"gamma({i},{j}) = {gamma[i, j]:.3e} but theta({i},{j}) = 0"
                )


def bethe_free_energy(
    gamma: DoublyStochasticPoint, theta: RationalMatrix, support_tol: float = 1e-12
) -> float:
    """U_B - H_B, with 0 * log(0) = 0 throughout."""
    g = gamma.as_array()
    _check_support(g, theta, support_tol)
    total = 0.0
    for i, row in enumerate(theta.rows):
        for j, x in enumerate(row):
            v = g[i, j]
            if x > 0 and v > 0.0:
                total -= v * math.log(x)
            total += _xlogx(v) - _xlogx(1.0 - v)
    return total


def scaled_sinkhorn_free_energy(
    gamma: DoublyStochasticPoint, theta: RationalMatrix, support_tol: float = 1e-12
) -> float:
    """U_scS - H_scS where H_scS = -n - sum gamma log gamma."""
    g = gamma.as_array()
    _check_support(g, theta, support_tol)
    n = theta.n
    total = float(n)
    for i, row in enumerate(theta.rows):
        for j, x in enumerate(row):
            v = g[i, j]
            if x > 0 and v > 0.0:
                total -= v * math.log(x)
            total += _xlogx(v)
    return total


@dataclass(frozen=True)
class MinimizationReport:
    minimizer: DoublyStochasticPoint
    objective: float
    value: float
    iterations: int
    gap_or_residual: float
    converged: bool
    history: tuple[float, ...]


def _sinkhorn_iterate(a: np.ndarray, tol: float, max_iter: int):
    """Alternate row/column normalization; residual is the L-inf row-sum
    deviation measured after each column step (column sums are then exact)."""
    x = a.copy()
    history: list[float] = []
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        x /= x.sum(axis=1, keepdims=True)
        x /= x.sum(axis=0, keepdims=True)
        residual = float(np.max(np.abs(x.sum(axis=1) - 1.0)))
        history.append(residual)
        if residual <= tol:
            converged = True
            break
    return x, iterations, history, converged


def sinkhorn_permanent_unscaled(report: MinimizationReport) -> float:
    """The plain Sinkhorn permanent, the e^n-scaled view of the scaled one."""
    return math.exp(report.minimizer.n) * report.value


def minimize_scaled_sinkhorn(
    theta: RationalMatrix, tol: float = 1e-12, max_iter: int = 100000
) -> MinimizationReport:
    """Sinkhorn scaling of theta; the fixed point minimizes F_scS over the
    support-restricted doubly stochastic polytope.

    When supp(theta) admits no positive-diagonal scaling the iteration stalls;
    the report is returned with converged = False rather than raising.
    """
    if not has_valid_permutation(theta):
        raise EmptySupport("matrix has no positive-weight permutation")
    a = np.asarray(theta.to_floats())
    x, iterations, history, converged = _sinkhorn_iterate(a, tol, max_iter)
    point = DoublyStochasticPoint.from_array(x, check=False)
    objective = scaled_sinkhorn_free_energy(point, theta, support_tol=math.inf)
    return MinimizationReport(
        minimizer=point,
        objective=objective,
        value=math.exp(-objective),
        iterations=iterations,
        gap_or_residual=history[-1] if history else 0.0,
        converged=converged,
        history=tuple(history),
    )


# full Frank-Wolfe steps would land exactly on a vertex, where the entropy
# terms have no meaningful linearization; capping keeps iterates interior
_FW_STEP_CAP = 1.0 - 1e-3


def _line_search_bethe(xs: np.ndarray, ds: np.ndarray, lts: np.ndarray) -> float:
    """Exact minimization of the convex restriction alpha -> F_B(x + alpha d)
    over [0, cap] by safeguarded Newton on its increasing derivative.

    Operates on 1-D support vectors; iterates stay strictly interior on the
    capped interval, so no clamping is needed.
    """
    base = float(np.sum(ds * (2.0 - lts)))

    def slope_curv(alpha: float) -> tuple[float, float]:
        y = xs + alpha * ds
        w = 1.0 - y
        s = base + float(np.sum(ds * (np.log(y) + np.log(w))))
        c = float(np.sum(ds * ds * (1.0 / y - 1.0 / w)))
        return s, c

    hi = _FW_STEP_CAP
    s_hi, _ = slope_curv(hi)
    if s_hi <= 0.0:
        return hi
    lo = 0.0
    alpha = 0.5 * hi
    best_alpha, best_abs_slope = alpha, math.inf
    for _ in range(80):
        s, c = slope_curv(alpha)
        if abs(s) < best_abs_slope:
            best_abs_slope, best_alpha = abs(s), alpha
        if s == 0.0:
            break
        if s < 0.0:
            lo = alpha
        else:
            hi = alpha
        step = alpha - s / c if c > 0.0 else math.nan
        if not (lo < step < hi) or step == alpha:
            step = 0.5 * (lo + hi)
        if step == alpha:
            # bracket collapsed to working precision around the root
            break
        alpha = step
    return best_alpha


def _interior_face_point(a: np.ndarray, supp: np.ndarray, log_theta: np.ndarray) -> np.ndarray:
    """A relative-interior point of Gamma_n(theta) when Sinkhorn scaling fails:
    average permutation matrices chosen greedily to spread mass over every
    coverable support cell."""
    n = a.shape[0]
    total = np.zeros_like(a)
    count = 0
    base = np.where(supp, -log_theta, _OFF_SUPPORT_COST)
    for _ in range(n * n):
        cost = np.where(supp, total, _OFF_SUPPORT_COST)
        rows, cols = linear_sum_assignment(cost + 1e-9 * base)
        vertex = np.zeros_like(a)
        vertex[rows, cols] = 1.0
        total += vertex
        count += 1
    return total / count


def minimize_bethe(
    theta: RationalMatrix, tol: float = 1e-10, max_iter: int = 100000
) -> MinimizationReport:
    """Frank-Wolfe minimization of the Bethe free energy over Gamma_n(theta).

    Each step solves an exact linear assignment problem over supp(theta)
    (Birkhoff vertices are permutation matrices), takes an exact line search
    along the vertex direction, and stops when the duality gap
    <grad, gamma - vertex> drops to tol.  Initialized at the Sinkhorn fixed
    point when the scaling converges, else at an interior point of the
    feasible face built from a greedy vertex average.
    """
    if not has_valid_permutation(theta):
        raise EmptySupport("matrix has no positive-weight permanent term")
    n = theta.n
    a = np.asarray(theta.to_floats())
    supp = a > 0.0
    log_theta = np.where(supp, np.log(np.where(supp, a, 1.0)), 0.0)

    x, _, _, sink_ok = _sinkhorn_iterate(a, min(1e-12, tol * 1e-2), 20000)
    if not sink_ok:
        x = _interior_face_point(a, supp, log_theta)

    sup_i, sup_j = np.nonzero(supp)
    lts = log_theta[sup_i, sup_j]
    xs = x[sup_i, sup_j]

    def f_of(vec: np.ndarray) -> float:
        with np.errstate(divide="ignore", invalid="ignore"):
            ent = np.where(vec > 0.0, vec * np.log(np.where(vec > 0.0, vec, 1.0)), 0.0)
            w = 1.0 - vec
            ent -= np.where(w > 0.0, w * np.log(np.where(w > 0.0, w, 1.0)), 0.0)
        return float(np.sum(ent - vec * lts))

    objective = f_of(xs)
    history = [objective]
    cost = np.full((n, n), _OFF_SUPPORT_COST)
    gap = math.inf
    converged = False
    steps = 0
    for _ in range(max_iter):
        xc = np.clip(xs, _LS_EPS, 1.0 - _LS_EPS)
        grad = -lts + np.log(xc) + np.log1p(-xc) + 2.0
        cost[sup_i, sup_j] = grad
        rows, cols = linear_sum_assignment(cost)
        vertex = np.zeros((n, n))
        vertex[rows, cols] = 1.0
        vs = vertex[sup_i, sup_j]
        gap = float(np.sum(grad * (xs - vs)))
        if gap <= tol:
            converged = True
            break
        ds = vs - xs
        alpha = _line_search_bethe(xs, ds, lts)
        xs = xs + alpha * ds
        objective = f_of(xs)
        steps += 1
        # exact line search on a convex objective cannot go uphill
        assert objective <= history[-1] + 1e-12 * max(1.0, abs(history[-1]))
        history.append(objective)

    x = np.zeros((n, n))
    x[sup_i, sup_j] = xs
    point = DoublyStochasticPoint.from_array(x, check=False)
    objective = f_of(xs)
    return MinimizationReport(
        minimizer=point,
        objective=objective,
        value=math.exp(-objective),
        iterations=steps,
        gap_or_residual=gap,
        converged=converged,
        history=tuple(history),
    )


def gibbs_entropy_modified(T: FlowMatrix, tol: float = 1e-9, max_iter: int = 20000) -> float:
    """Maximum entropy over distributions on the decomposing permutations with
    cell marginals T/M, solved by iterative proportional fitting.

    Guarded to n <= 6 so the permutation support can be enumerated explicitly.
    Row and column constraint families each partition the support, so every
    sweep is a sequence of exact KL projections (dual coordinate ascent).
    """
    n, M = T.n, T.M
    if n > 6:
        raise SizeGuard(f"modified Gibbs entropy guarded to n <= 6, got n = {n}")
    perms = valid_permutations(T.gamma())
    if len(perms) == 1:
        return 0.0
    gamma = np.asarray([[v / M for v in row] for row in T.counts])
    k = len(perms)
    images = np.asarray([p.images for p in perms])  # (k, n): images[s, i] = sigma_s(i)
    preimages = np.asarray([p.inverse().images for p in perms])
    p = np.full(k, 1.0 / k)
    for _ in range(max_iter):
        for i in range(n):
            marg = np.bincount(images[:, i], weights=p, minlength=n)
            p *= gamma[i, images[:, i]] / marg[images[:, i]]
        for j in range(n):
            marg = np.bincount(preimages[:, j], weights=p, minlength=n)
            p *= gamma[preimages[:, j], j] / marg[preimages[:, j]]
        residual = 0.0
        for i in range(n):
            marg = np.bincount(images[:, i], weights=p, minlength=n)
            residual = max(residual, float(np.max(np.abs(marg - gamma[i]))))
        if residual <= tol:
            break
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0.0, p * np.log(np.where(p > 0.0, p, 1.0)), 0.0)
    return float(-np.sum(terms))


@dataclass(frozen=True)
class EntropyValues:
    h_gibbs_mod: float
    h_bethe: float
    h_sinkhorn: float


def entropy_values(T: FlowMatrix) -> EntropyValues:
    """The three entropy functions at gamma = T/M.

    h_gibbs_mod is the max-entropy value; h_bethe and h_sinkhorn are the
    closed forms -sum g log g + sum (1-g) log(1-g) and -n - sum g log g.
    """
    M = T.M
    h_b = 0.0
    h_s = -float(T.n)
    for row in T.counts:
        for v in row:
            g = v / M
            h_b += -_xlogx(g) + _xlogx(1.0 - g)
            h_s -= _xlogx(g)
    return EntropyValues(gibbs_entropy_modified(T), h_b, h_s)
