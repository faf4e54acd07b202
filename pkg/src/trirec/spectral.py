"""Truncated Jacobi matrices, Gauss quadrature and spectrum classification.

Two kinds of truncation are handled:

* Favard-positive recursions (up(n) down(n+1) > 0) give a symmetric Jacobi
  matrix and an ordinary positive Gauss rule.
* Recursions where some of those products are negative are rewritten as the
  symmetric pencil ``S v = z E v`` with ``E`` a +-1 signature.  When ``S`` (or
  ``-S``) is positive definite the pencil is *definitizable*: all zeros are
  real, each eigenvalue has a definite Krein type (the sign of ``v.E.v``) and
  the number of eigenvalues of the minority type equals the number of
  minority signature entries.  The g/G families with real alpha fall here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import (
    ConvergenceFailure,
    EmptyTruncation,
    IndefiniteTruncation,
    ParameterError,
    PositivityFailure,
    ZeroUpCoupling,
)
from .recursion import StandardRecursion, symmetric_couplings

STABILITY_TOL = 1e-6
CLUSTER_TOL = 1e-4
SHRINK_FACTOR = 1.5

# A real alpha family with floor(|alpha| - sigma) = N shows N + 1 stable
# discrete eigenvalues: the index set k = 0..N.
DISCRETE_COUNT_OFFSET = 1

_CHUNK = 512


@dataclass(frozen=True, eq=False)
class JacobiMatrixT:
    diag: np.ndarray
    offdiag: np.ndarray

    @property
    def N(self) -> int:
        return self.diag.size

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)


@dataclass(frozen=True, eq=False)
class Eigen:
    values: np.ndarray
    first: np.ndarray
    log_first: np.ndarray
    vectors: np.ndarray | None = None


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes and weights of a discrete approximation to the measure.

    ``log_weights`` holds log|w_k| so that weights far below the double range
    stay usable.  ``definite`` is False for rules from a definitizable but
    indefinite truncation, whose weights carry both signs.
    """

    nodes: np.ndarray
    weights: np.ndarray
    mass: float = 1.0
    log_weights: np.ndarray | None = None
    definite: bool = True

    def __post_init__(self):
        if self.log_weights is None:
            with np.errstate(divide="ignore"):
                object.__setattr__(self, "log_weights", np.log(np.abs(self.weights)))

    def __len__(self):
        return self.nodes.size

    @property
    def signs(self) -> np.ndarray:
        return np.where(self.weights < 0.0, -1.0, 1.0)


def build_jacobi(rec: StandardRecursion, N: int) -> JacobiMatrixT:
    """N x N truncation: diag[n] = diag(n), offdiag[n] = sqrt(up(n) down(n+1))."""
    if N < 1:
        raise EmptyTruncation("truncation size must be at least 1")
    off = symmetric_couplings(rec, N - 1)
    return JacobiMatrixT(rec.coefficients(N).diag, off)


def node_values(J: JacobiMatrixT, xs) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal p_0..p_{N-1} at eigenvalues ``xs`` of ``J``, as (log|p|, sign).

    Uses a twisted factorization of J - x: forward and backward pivots meet at
    the index where the eigenvector is largest, so decaying and growing parts
    are both generated in their stable direction.  Logs are natural.
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    N = J.N
    if N == 1:
        return np.zeros((1, xs.size)), np.ones((1, xs.size))
    logp = np.empty((N, xs.size))
    sign = np.empty((N, xs.size))
    for start in range(0, xs.size, _CHUNK):
        sl = slice(start, start + _CHUNK)
        logp[:, sl], sign[:, sl] = _twisted(J.diag, J.offdiag, xs[sl])
    return logp, sign


def _twisted(d, e, xs):
    N, K = d.size, xs.size
    tiny = np.finfo(float).eps * (np.max(np.abs(d)) + 2.0 * np.max(e) + np.max(np.abs(xs)) + 1e-300)
    e2 = e * e
    Dp = np.empty((N, K))
    Dm = np.empty((N, K))
    Dp[0] = d[0] - xs
    for i in range(1, N):
        prev = np.where(Dp[i - 1] == 0.0, tiny, Dp[i - 1])
        Dp[i] = d[i] - xs - e2[i - 1] / prev
    Dm[N - 1] = d[N - 1] - xs
    for i in range(N - 2, -1, -1):
        nxt = np.where(Dm[i + 1] == 0.0, tiny, Dm[i + 1])
        Dm[i] = d[i] - xs - e2[i] / nxt
    Dp = np.where(Dp == 0.0, tiny, Dp)
    Dm = np.where(Dm == 0.0, tiny, Dm)
    gamma = Dp + Dm - (d[:, None] - xs)
    r = np.argmin(np.abs(gamma), axis=0)

    idx = np.arange(N)[:, None]
    # below the twist: z_i = -e_i / Dp_i * z_{i+1}
    below = idx[:-1] < r
    lo = np.where(below, np.log(e[:, None]) - np.log(np.abs(Dp[:-1])), 0.0)
    lo_neg = np.where(below, Dp[:-1] > 0.0, False).astype(np.int64)
    # above the twist: z_i = -e_{i-1} / Dm_i * z_{i-1}
    above = idx[1:] > r
    hi = np.where(above, np.log(e[:, None]) - np.log(np.abs(Dm[1:])), 0.0)
    hi_neg = np.where(above, Dm[1:] > 0.0, False).astype(np.int64)

    logz = np.zeros((N, K))
    neg = np.zeros((N, K), dtype=np.int64)
    logz[:-1] += np.cumsum(lo[::-1], axis=0)[::-1]
    neg[:-1] += np.cumsum(lo_neg[::-1], axis=0)[::-1]
    logz[1:] += np.cumsum(hi, axis=0)
    neg[1:] += np.cumsum(hi_neg, axis=0)
    sign = np.where(neg % 2 == 0, 1.0, -1.0)
    return logz - logz[0], sign * sign[0]


def eigen_tridiagonal(J: JacobiMatrixT, vectors: bool = False) -> Eigen:
    """Eigenvalues (ascending) and first eigenvector components of J.

    First components are reported positive and computed in log form from the
    twisted factorization so that they never underflow.
    """
    if J.N < 1:
        raise EmptyTruncation("empty matrix")
    try:
        if vectors:
            values, V = sla.eigh_tridiagonal(J.diag, J.offdiag)
        else:
            values = sla.eigvalsh_tridiagonal(J.diag, J.offdiag)
            V = None
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ConvergenceFailure(str(exc)) from exc
    logp, _ = node_values(J, values)
    log_first = -0.5 * np.logaddexp.reduce(2.0 * logp, axis=0)
    return Eigen(values, np.exp(log_first), log_first, V)


def gauss_quadrature(J: JacobiMatrixT, mass: float = 1.0) -> QuadratureRule:
    """Golub-Welsch rule: nodes = eigenvalues, weights = mass * first**2."""
    eig = eigen_tridiagonal(J)
    log_w = 2.0 * eig.log_first
    # the squared first components sum to one; remove rounding drift
    log_w = log_w - np.logaddexp.reduce(log_w) + math.log(mass)
    return QuadratureRule(eig.values, np.exp(log_w), float(mass), log_w)


# -- truncations that need not be Favard-positive ------------------------------

@dataclass(frozen=True, eq=False)
class TruncatedSpectrum:
    """Zeros of P_N with their Krein types (all +1 for a definite truncation)."""

    values: np.ndarray
    kind: np.ndarray
    signature: np.ndarray
    definite: bool
    weights: np.ndarray | None = None
    log_weights: np.ndarray | None = None

    @property
    def N(self) -> int:
        return self.values.size

    @property
    def minority(self) -> int:
        """Signature sign that occurs less often (0 when definite)."""
        if self.definite:
            return 0
        plus = int(np.sum(self.signature > 0))
        return 1 if plus < self.signature.size - plus else -1

    def rule(self) -> QuadratureRule:
        if self.weights is None:
            raise ValueError("spectrum computed without weights")
        return QuadratureRule(self.values, self.weights, 1.0, self.log_weights, self.definite)


def truncated_spectrum(rec: StandardRecursion, N: int, weights: bool = False) -> TruncatedSpectrum:
    """Zeros of P_N as eigenvalues of the N x N truncation.

    Raises ``IndefiniteTruncation`` when the truncation is neither
    Favard-positive nor definitizable (complex zeros are then possible).
    """
    if N < 1:
        raise EmptyTruncation("truncation size must be at least 1")
    coef = rec.coefficients(N)
    if (coef.up[: N - 1] == 0.0).any():
        raise ZeroUpCoupling(int(np.argmax(coef.up[: N - 1] == 0.0)))
    prod = coef.up[: N - 1] * coef.down[1:N]
    if (prod == 0.0).any():
        raise PositivityFailure(int(np.argmax(prod == 0.0)))
    if (prod > 0.0).all():
        J = JacobiMatrixT(coef.diag, np.sqrt(prod))
        ones = np.ones(N)
        if not weights:
            try:
                values = sla.eigvalsh_tridiagonal(J.diag, J.offdiag)
            except (np.linalg.LinAlgError, ValueError) as exc:
                raise ConvergenceFailure(str(exc)) from exc
            return TruncatedSpectrum(values, ones, ones, True)
        rule = gauss_quadrature(J)
        return TruncatedSpectrum(rule.nodes, ones, ones, True, rule.weights, rule.log_weights)
    return _pencil_spectrum(coef, prod, weights)


def _pencil_spectrum(coef, prod, weights):
    N = coef.diag.size
    eps = np.concatenate([[1.0], np.cumprod(np.sign(prod))])
    t = np.sqrt(np.abs(prod))
    s_diag = eps * coef.diag
    for sigma in (1.0, -1.0):
        band = np.zeros((2, N))
        band[0] = sigma * s_diag
        band[1, :-1] = sigma * t
        try:
            L = sla.cholesky_banded(band, lower=True)
        except np.linalg.LinAlgError:
            continue
        break
    else:
        raise IndefiniteTruncation(int(np.argmax(prod < 0.0)),
                                   "truncation is not definitizable; zeros may be complex")
    l, m = L[0], L[1, :-1]
    k_diag = eps * l * l
    k_diag[:-1] += eps[1:] * m * m
    k_off = m * eps[1:] * l[1:]
    try:
        if weights:
            kappa, Y = sla.eigh_tridiagonal(k_diag, k_off)
        else:
            kappa = sla.eigvalsh_tridiagonal(k_diag, k_off)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ConvergenceFailure(str(exc)) from exc
    z = sigma * kappa
    order = np.argsort(z, kind="stable")
    kind = np.sign(kappa)[order]
    if not weights:
        return TruncatedSpectrum(z[order], kind, eps, False)
    w = (l[0] ** 2) * Y[0] ** 2 / kappa
    with np.errstate(divide="ignore"):
        log_w = np.log(np.abs(w))
    return TruncatedSpectrum(z[order], kind, eps, False, w[order], log_w[order])


def zeros(rec: StandardRecursion, n: int) -> np.ndarray:
    """Ascending zeros of P_n from the n x n truncation."""
    return truncated_spectrum(rec, n).values


def gram_check(rule: QuadratureRule, rec: StandardRecursion, m: int) -> float:
    """Largest off-diagonal |Gram[i][j]| for the first m orthonormal p_i.

    Gram[i][j] = sum_k w_k p_i(x_k) p_j(x_k), with p_i(x_k) generated from the
    recursion by twisted factorization at each node.
    """
    N = len(rule)
    if m > N:
        raise ParameterError("m exceeds the rule length")
    if m <= 1:
        return 0.0
    J = build_jacobi(rec, N)
    logp, sign = node_values(J, rule.nodes)
    # weights may underflow; their signs come from the sign array, not the value
    Yw = sign[:m] * np.exp(logp[:m] + 0.5 * rule.log_weights)
    G = (Yw * rule.signs) @ Yw.T
    off = G - np.diag(np.diag(G))
    return float(np.max(np.abs(off)))


# -- classification -------------------------------------------------------------

def predicted_bound_raw(alpha_sq: float, mu: float, nu: float) -> float | None:
    """|alpha| - (mu + nu + 1)/2 for real alpha, else None."""
    if not alpha_sq > 0.0:
        return None
    return math.sqrt(alpha_sq) - 0.5 * (mu + nu + 1.0)


def predicted_bound_count(alpha_sq: float, mu: float, nu: float) -> int | None:
    """Largest integer <= |alpha| - (mu + nu + 1)/2; None for imaginary alpha
    or when that number is negative."""
    raw = predicted_bound_raw(alpha_sq, mu, nu)
    if raw is None or raw < -1e-12:
        return None
    return int(math.floor(raw + 1e-12))


@dataclass(frozen=True)
class DiscretePoint:
    value: float
    drift: float
    gap: float
    kind: int


@dataclass(frozen=True)
class SpectrumReport:
    continuous_support: list[tuple[float, float]]
    discrete_points: list[DiscretePoint]
    predicted_count: int | None
    predicted_raw: float | None
    observed_count: int
    embedded_count: int
    definite: bool
    N1: int
    N2: int
    tol: float
    params: dict = field(default_factory=dict)

    @property
    def expected_points(self) -> int | None:
        if self.predicted_count is None:
            return None
        return self.predicted_count + DISCRETE_COUNT_OFFSET


def _nearest_gaps(values, kind=None):
    """Distance to the nearest neighbour of the same Krein type."""
    out = np.full(values.size, np.inf)
    groups = [np.arange(values.size)] if kind is None else [np.flatnonzero(kind == k) for k in (-1, 1)]
    for idx in groups:
        if idx.size < 2:
            continue
        d = np.diff(values[idx])
        out[idx] = np.minimum(np.concatenate([[np.inf], d]), np.concatenate([d, [np.inf]]))
    return out


def _in_domain(values, domain):
    if domain is None:
        return np.zeros(values.size, dtype=bool)
    lo, hi = domain
    return (values >= lo) & (values <= hi)


def classify_spectrum(rec: StandardRecursion, N1: int, N2: int, tol: float = STABILITY_TOL,
                      cluster_tol: float = CLUSTER_TOL) -> SpectrumReport:
    """Split truncation eigenvalues into stable discrete points and continuum.

    An eigenvalue of the N1 truncation is stable when the N2 truncation has
    an eigenvalue within ``tol * max(1, |value|)`` and its nearest-neighbour
    gap has not shrunk.  Stable points belonging to the continuous part
    (majority Krein type for indefinite truncations, otherwise the family's
    declared continuous domain) are counted as embedded, the rest as discrete.
    """
    if tol <= 0 or cluster_tol <= 0:
        raise ParameterError("tolerances must be positive")
    if N1 < 1 or N2 < 2 * N1:
        raise ParameterError("need N1 >= 1 and N2 >= 2 * N1")
    s1 = truncated_spectrum(rec, N1)
    s2 = truncated_spectrum(rec, N2)
    v1, v2 = s1.values, s2.values

    j = np.clip(np.searchsorted(v2, v1), 1, v2.size - 1) if v2.size > 1 else np.zeros(v1.size, int)
    if v2.size > 1:
        pick_left = np.abs(v1 - v2[j - 1]) <= np.abs(v1 - v2[j])
        j = np.where(pick_left, j - 1, j)
    drift = np.abs(v1 - v2[j])
    scale = np.maximum(1.0, np.abs(v1))
    gap1 = _nearest_gaps(v1, s1.kind)
    gap2 = _nearest_gaps(v2, s2.kind)[j]
    stable = (drift <= tol * scale) & (gap2 >= gap1 - tol * scale)

    if s1.definite:
        in_cont = _in_domain(v1, rec.domain)
    else:
        in_cont = s1.kind != s1.minority
    discrete_mask = stable & ~in_cont

    points: list[DiscretePoint] = []
    for k in np.flatnonzero(discrete_mask):
        value = float(v1[k])
        if points and abs(value - points[-1].value) <= cluster_tol * max(1.0, abs(value)):
            continue
        points.append(DiscretePoint(value, float(drift[k]), float(gap1[k]), int(s1.kind[k])))

    # continuum: runs of nodes whose local spacing shrinks under refinement
    i2 = np.searchsorted(v2, v1)
    inside = (i2 > 0) & (i2 < v2.size)
    local2 = np.full(v1.size, np.inf)
    local2[inside] = v2[i2[inside]] - v2[i2[inside] - 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        shrinking = (_nearest_gaps(v1) / local2 >= SHRINK_FACTOR) & ~discrete_mask
    support: list[tuple[float, float]] = []
    run: list[float] = []
    for k in range(v1.size):
        if shrinking[k]:
            run.append(float(v1[k]))
            continue
        if len(run) >= 2:
            support.append((run[0], run[-1]))
        run = []
    if len(run) >= 2:
        support.append((run[0], run[-1]))

    params = dict(rec.params)
    predicted = raw = None
    if {"mu", "nu", "alpha_sq"} <= params.keys():
        predicted = predicted_bound_count(params["alpha_sq"], params["mu"], params["nu"])
        raw = predicted_bound_raw(params["alpha_sq"], params["mu"], params["nu"])
    return SpectrumReport(
        continuous_support=support,
        discrete_points=points,
        predicted_count=predicted,
        predicted_raw=raw,
        observed_count=len(points),
        embedded_count=int(np.sum(stable & in_cont)),
        definite=s1.definite,
        N1=N1,
        N2=N2,
        tol=tol,
        params=params,
    )


@dataclass(frozen=True, eq=False)
class MeasureSplit:
    discrete: list[tuple[float, float]]
    edges: np.ndarray
    masses: np.ndarray
    total: float

    @property
    def density(self) -> np.ndarray:
        return self.masses / np.diff(self.edges)

    @property
    def discrete_mass(self) -> float:
        return float(sum(m for _, m in self.discrete))


def measure_split(rule: QuadratureRule, report: SpectrumReport, tol: float | None = None,
                  bins: int = 50) -> MeasureSplit:
    """Separate a rule into discrete masses at stable points and a histogram."""
    tol = report.tol if tol is None else tol
    used = np.zeros(len(rule), dtype=bool)
    discrete = []
    for p in report.discrete_points:
        near = np.abs(rule.nodes - p.value) <= tol * max(1.0, abs(p.value))
        near &= ~used
        used |= near
        discrete.append((p.value, float(np.sum(rule.weights[near]))))
    rest = ~used
    if rest.any():
        lo, hi = float(rule.nodes[rest].min()), float(rule.nodes[rest].max())
        if hi == lo:
            lo, hi = lo - 0.5, hi + 0.5
        masses, edges = np.histogram(rule.nodes[rest], bins=bins, range=(lo, hi),
                                     weights=rule.weights[rest])
    else:
        edges, masses = np.array([0.0, 1.0]), np.zeros(1)
    total = float(sum(m for _, m in discrete) + masses.sum())
    return MeasureSplit(discrete, edges, masses, total)
