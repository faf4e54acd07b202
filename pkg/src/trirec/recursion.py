"""Family-agnostic three-term recursion machinery.

A recursion is stored in the standard form

    x P_n(x) = diag(n) P_n(x) + down(n) P_{n-1}(x) + up(n) P_{n+1}(x),

with P_{-1} = 0 and P_0 = 1.  ``down(0)`` exists for uniform indexing but is
never read.  High-degree values are carried as (mantissa, base-2 exponent)
pairs so that degree-thousands evaluations do not overflow.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, NamedTuple

import numpy as np

from .errors import NonFiniteCoefficient, PositivityFailure, ZeroUpCoupling

WHOLE_LINE = (-math.inf, math.inf)

# rescale threshold for carried values
_BIG = 2.0**512
_SMALL = 2.0**-512

CoefficientFn = Callable[[np.ndarray], np.ndarray]


class Coefficients(NamedTuple):
    diag: np.ndarray
    down: np.ndarray
    up: np.ndarray


@dataclass(frozen=True, eq=False)
class StandardRecursion:
    """Coefficient functions of a three-term recursion.

    Each coefficient function takes an integer array ``n`` and returns a float
    array of the same shape.  ``domain`` is the interval carrying the declared
    continuous part of the spectrum (``WHOLE_LINE`` for the whole real line,
    ``None`` when no continuous part is declared).  ``params`` records the
    family parameters for reporting.
    """

    diag: CoefficientFn
    down: CoefficientFn
    up: CoefficientFn
    domain: tuple[float, float] | None = WHOLE_LINE
    name: str = ""
    params: Mapping[str, float] = field(default_factory=dict)

    def coefficients(self, N: int) -> Coefficients:
        """Tabulate diag, down, up for 0 <= n < N, checking finiteness."""
        n = np.arange(int(N))
        with np.errstate(all="ignore"):
            d = np.broadcast_to(np.asarray(self.diag(n), dtype=float), n.shape).copy()
            dn = np.broadcast_to(np.asarray(self.down(n), dtype=float), n.shape).copy()
            up = np.broadcast_to(np.asarray(self.up(n), dtype=float), n.shape).copy()
        if N > 0:
            dn[0] = 0.0
        bad = ~(np.isfinite(d) & np.isfinite(dn) & np.isfinite(up))
        if bad.any():
            raise NonFiniteCoefficient(int(np.argmax(bad)))
        return Coefficients(d, dn, up)

    @classmethod
    def from_arrays(cls, diag, down, up, **kwargs) -> "StandardRecursion":
        """Recursion backed by finite tables; indices past the end give NaN."""
        return cls(_tabulated(diag), _tabulated(down), _tabulated(up), **kwargs)


def _tabulated(values) -> CoefficientFn:
    table = np.asarray(values, dtype=float)

    def coefficient(n):
        n = np.asarray(n)
        out = np.full(n.shape, np.nan)
        inside = (n >= 0) & (n < table.size)
        out[inside] = table[n[inside]]
        return out

    return coefficient


@dataclass(frozen=True)
class ScaledValue:
    """The number ``mantissa * 2**exponent`` with |mantissa| in [1, 2) or 0."""

    mantissa: float
    exponent: int

    def __post_init__(self):
        m = abs(self.mantissa)
        if m == 0.0:
            if self.exponent != 0:
                raise ValueError("zero mantissa requires exponent 0")
        elif not 1.0 <= m < 2.0:
            raise ValueError(f"mantissa {self.mantissa!r} not normalized")

    @property
    def value(self) -> float:
        try:
            return math.ldexp(self.mantissa, self.exponent)
        except OverflowError:
            return math.copysign(math.inf, self.mantissa)


@dataclass(frozen=True, eq=False)
class ScaledSequence:
    """Values P_0..P_N at ``point`` as parallel mantissa/exponent arrays."""

    point: float
    mantissa: np.ndarray
    exponent: np.ndarray

    def __len__(self):
        return self.mantissa.size

    @property
    def N(self) -> int:
        return self.mantissa.size - 1

    @property
    def values(self) -> list[ScaledValue]:
        return [ScaledValue(float(m), int(e)) for m, e in zip(self.mantissa, self.exponent)]

    def to_float(self) -> np.ndarray:
        """Plain floats; entries outside the double range become 0 or inf."""
        e = np.clip(self.exponent, -1100, 1100)
        with np.errstate(over="ignore"):
            return np.ldexp(self.mantissa, e.astype(np.int32))

    def log2abs(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log2(np.abs(self.mantissa)) + self.exponent

    def scaled(self, k: int) -> "ScaledSequence":
        """The same sequence multiplied by 2**k."""
        e = np.where(self.mantissa == 0, 0, self.exponent + int(k))
        return ScaledSequence(self.point, self.mantissa.copy(), e)


def _normalize(values: np.ndarray, scale: np.ndarray):
    m, e = np.frexp(values)
    m = 2.0 * m
    e = np.where(m == 0.0, 0, e.astype(np.int64) - 1 + scale)
    return m, e


def recur_many(coef: Coefficients, xs, N: int) -> tuple[np.ndarray, np.ndarray]:
    """Run the forward recursion at every point of ``xs``.

    Returns ``(mantissa, exponent)`` arrays of shape ``(N + 1, len(xs))``.
    Coefficients must already be checked (finite, nonzero up couplings).
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    K = xs.size
    mant = np.zeros((N + 1, K))
    expo = np.zeros((N + 1, K), dtype=np.int64)
    mant[0] = 1.0
    prev = np.zeros(K)
    cur = np.ones(K)
    scale = np.zeros(K, dtype=np.int64)
    d, dn, up = coef
    for n in range(N):
        nxt = ((xs - d[n]) * cur - dn[n] * prev) / up[n]
        big = np.maximum(np.abs(cur), np.abs(nxt))
        need = (big > _BIG) | ((big < _SMALL) & (big > 0.0))
        if need.any():
            s = np.where(need, np.frexp(big)[1], 0)
            cur = np.ldexp(cur, -s)
            nxt = np.ldexp(nxt, -s)
            scale = scale + s
        mant[n + 1], expo[n + 1] = _normalize(nxt, scale)
        prev, cur = cur, nxt
    return mant, expo


def _checked_coefficients(rec: StandardRecursion, N: int) -> Coefficients:
    coef = rec.coefficients(N)
    zero = coef.up == 0.0
    if zero.any():
        raise ZeroUpCoupling(int(np.argmax(zero)))
    return coef


def evaluate_sequence(rec: StandardRecursion, x: float, N: int) -> ScaledSequence:
    """P_0(x), ..., P_N(x) by forward recursion in scaled arithmetic."""
    if N < 0:
        raise ValueError("N must be non-negative")
    coef = _checked_coefficients(rec, N)
    mant, expo = recur_many(coef, [x], N)
    return ScaledSequence(float(x), mant[:, 0], expo[:, 0])


def evaluate_many(rec: StandardRecursion, xs, N: int) -> list[ScaledSequence]:
    """Vectorized :func:`evaluate_sequence` over several points."""
    coef = _checked_coefficients(rec, N)
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    mant, expo = recur_many(coef, xs, N)
    return [ScaledSequence(float(x), mant[:, k], expo[:, k]) for k, x in enumerate(xs)]


def evaluate_complex(rec: StandardRecursion, x: complex, N: int) -> tuple[np.ndarray, np.ndarray]:
    """Forward recursion at a complex point.

    Returns ``(mantissa, exponent)`` with complex mantissas of modulus in
    [1, 2) (or 0); the value is ``mantissa * 2**exponent``.
    """
    coef = _checked_coefficients(rec, N)
    d, dn, up = coef
    x = complex(x)
    mant = np.zeros(N + 1, dtype=complex)
    expo = np.zeros(N + 1, dtype=np.int64)
    mant[0] = 1.0
    prev, cur, scale = 0j, 1 + 0j, 0
    for n in range(N):
        nxt = ((x - d[n]) * cur - dn[n] * prev) / up[n]
        big = max(abs(cur), abs(nxt))
        if big > _BIG or 0.0 < big < _SMALL:
            s = math.frexp(big)[1]
            cur, nxt = cur * 2.0**-s, nxt * 2.0**-s
            scale += s
        a = abs(nxt)
        if a == 0.0:
            mant[n + 1], expo[n + 1] = 0j, 0
        else:
            e = math.frexp(a)[1] - 1
            mant[n + 1], expo[n + 1] = nxt * 2.0**-e, e + scale
        prev, cur = cur, nxt
    return mant, expo


def positivity_check(rec: StandardRecursion, N: int) -> int | None:
    """First n in [0, N-1] with up(n)*down(n+1) <= 0, or None if all pass."""
    if N <= 0:
        return None
    coef = rec.coefficients(N + 1)
    prod = coef.up[:N] * coef.down[1 : N + 1]
    bad = ~(prod > 0.0)
    return int(np.argmax(bad)) if bad.any() else None


def symmetric_couplings(rec: StandardRecursion, N: int) -> np.ndarray:
    """sqrt(up(n) down(n+1)) for 0 <= n < N; raises PositivityFailure."""
    fail = positivity_check(rec, N)
    if fail is not None:
        raise PositivityFailure(fail)
    coef = rec.coefficients(N + 1)
    return np.sqrt(coef.up[:N] * coef.down[1 : N + 1])


def to_orthonormal(rec: StandardRecursion, N: int) -> StandardRecursion:
    """Symmetrized recursion with down(n+1) = up(n) = sqrt(up(n) down(n+1)).

    Valid for 0 <= n < N; the diagonal is unchanged.
    """
    s = symmetric_couplings(rec, N)
    diag = rec.coefficients(N + 1).diag
    down = np.concatenate([[0.0], s])
    return StandardRecursion.from_arrays(
        diag, down, s, domain=rec.domain, name=rec.name, params=dict(rec.params)
    )


def normalization_log2(rec: StandardRecursion, N: int) -> tuple[np.ndarray, np.ndarray]:
    """Factors turning raw P_n into normalized p_n, as (log2 magnitude, sign).

    p_n = sign_n * 2**log2_n * P_n with magnitude prod_{k<n} sqrt|up(k)/down(k+1)|
    and sign prod_{k<n} sign(up(k)).  When the recursion is Favard-positive
    these are the orthonormal polynomials of the (mass one) measure; otherwise
    the same formula gives the signature-normalized values.
    """
    coef = rec.coefficients(N + 1)
    with np.errstate(divide="ignore"):
        ratio = np.abs(coef.up[:N] / coef.down[1 : N + 1])
        step = 0.5 * np.log2(ratio)
    log2 = np.concatenate([[0.0], np.cumsum(step)])
    sign = np.concatenate([[1.0], np.cumprod(np.sign(coef.up[:N]))])
    return log2, sign


def residual_max(rec: StandardRecursion, seq: ScaledSequence) -> float:
    """Largest relative three-term residual over 1 <= n <= N-1.

    Each residual x P_n - diag P_n - down P_{n-1} - up P_{n+1} is divided by
    the largest of the three right-hand terms.
    """
    N = seq.N
    if N < 2:
        return 0.0
    d, dn, up = rec.coefficients(N)
    n = np.arange(1, N)
    m, e = seq.mantissa, seq.exponent
    emax = np.maximum(np.maximum(e[n - 1], e[n]), e[n + 1])

    def at(k):
        return np.ldexp(m[k], (e[k] - emax).astype(np.int32))

    pm, p, pp = at(n - 1), at(n), at(n + 1)
    t_diag = d[n] * p
    t_down = dn[n] * pm
    t_up = up[n] * pp
    resid = seq.point * p - t_diag - t_down - t_up
    scale = np.maximum(np.maximum(np.abs(t_diag), np.abs(t_down)), np.abs(t_up))
    with np.errstate(invalid="ignore", divide="ignore"):
        rel = np.where(scale > 0, np.abs(resid) / scale, np.abs(resid))
    return float(np.max(rel))
