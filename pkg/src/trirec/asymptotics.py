"""Large-n behaviour of normalized recursion values.

``envelope`` fits p_n(x) ~ A cos(n phi + delta) over a window of degrees.
``amplitude_scan`` and ``refine_bound_state`` locate spectral points where
the large-n amplitude collapses: at an isolated eigenvalue the normalized
solution is square summable, elsewhere it oscillates or grows.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import optimize

from .errors import FitDegenerate, FlatSequence, NoMinimum, ParameterError, TrirecError
from .recursion import (
    StandardRecursion,
    _checked_coefficients,
    normalization_log2,
    recur_many,
)

DEFAULT_WINDOW = (500, 1000)
MIN_WINDOW = 64
MIN_SIGN_CHANGES = 8
FLAT_LEVEL = 1e-300
FLAG_RATIO = 0.05
LOCAL_HALF_WIDTH = 50
GOLDEN_TOL = 1e-10
AGREEMENT_TOL = 1e-6
# log|p_n| drifts by about n/ln2 bits per unit of ln|z|; keep that small per step
SCAN_STEP = 2e-4


@dataclass(frozen=True)
class EnvelopeFit:
    """A cos(n * frequency + phase) fitted over ``window``.

    ``rms_residual`` is the rms misfit divided by the amplitude.
    ``log2_amplitude`` stays finite when the amplitude itself overflows.
    """

    amplitude: float
    frequency: float
    phase: float
    rms_residual: float
    window: tuple[int, int]
    log2_amplitude: float = math.nan


def _wrap(angle: float) -> float:
    return float(math.remainder(angle, 2.0 * math.pi))


def _sign_changes(y: np.ndarray) -> int:
    s = np.sign(y[y != 0.0])
    return int(np.sum(s[1:] != s[:-1]))


def fit_sinusoid(values, n_lo: int = 0) -> EnvelopeFit:
    """Least-squares single-frequency cosine through ``values[k]`` at n = n_lo + k."""
    y = np.asarray(values, dtype=float)
    if y.size < 3:
        raise FitDegenerate("too few samples")
    if not np.all(np.isfinite(y)):
        raise FitDegenerate("non-finite samples")
    if np.max(np.abs(y)) < FLAT_LEVEL:
        raise FlatSequence("all values below 1e-300")
    changes = _sign_changes(y)
    if changes < MIN_SIGN_CHANGES:
        raise FitDegenerate(f"only {changes} sign changes in window")
    m = np.arange(y.size, dtype=float)

    def project(phi):
        basis = np.column_stack([np.cos(phi * m), np.sin(phi * m)])
        coef, *_ = np.linalg.lstsq(basis, y, rcond=None)
        return coef, float(np.sum((y - basis @ coef) ** 2))

    # zero crossings seed the frequency; a coarse scan guards against aliasing
    seed = min(math.pi * changes / (y.size - 1), math.pi)
    grid = np.clip(seed * np.linspace(0.7, 1.3, 121), 1e-9, math.pi)
    costs = [project(phi)[1] for phi in grid]
    k = int(np.argmin(costs))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
    if hi > lo:
        res = optimize.minimize_scalar(lambda p: project(p)[1], bounds=(lo, hi),
                                       method="bounded", options={"xatol": 1e-13})
        phi = float(res.x)
    else:
        phi = float(grid[k])
    (a, b), _ = project(phi)

    def model(p):
        return p[0] * np.cos(p[2] * m) + p[1] * np.sin(p[2] * m) - y

    ref = optimize.least_squares(model, [a, b, phi], xtol=1e-15, ftol=1e-15, gtol=1e-15)
    a, b, phi = ref.x
    amp = math.hypot(a, b)
    resid = float(np.sqrt(np.mean(model(ref.x) ** 2)))
    rel = resid / amp if amp > 0 else math.inf
    # a cos + b sin = A cos(phi m + d) with d = atan2(-b, a); shift to absolute n
    phase = _wrap(math.atan2(-b, a) - phi * n_lo)
    return EnvelopeFit(amp, float(phi), phase, rel, (int(n_lo), int(n_lo + y.size - 1)),
                       math.log2(amp) if amp > 0 else -math.inf)


def _check_window(window) -> tuple[int, int]:
    lo, hi = (int(window[0]), int(window[1]))
    if lo < 1 or hi <= lo:
        raise ParameterError("window needs 1 <= n_lo < n_hi")
    if hi - lo < MIN_WINDOW:
        raise ParameterError(f"window must span at least {MIN_WINDOW} degrees")
    return lo, hi


def normalized_log2(rec: StandardRecursion, xs, n_hi: int) -> tuple[np.ndarray, np.ndarray]:
    """(log2|p_n|, sign p_n) for n = 0..n_hi at each point, shape (n_hi+1, K)."""
    coef = _checked_coefficients(rec, n_hi)
    mant, expo = recur_many(coef, xs, n_hi)
    nl, ns = normalization_log2(rec, n_hi)
    with np.errstate(divide="ignore"):
        l2 = np.log2(np.abs(mant)) + expo + nl[:, None]
    return l2, np.sign(mant) * ns[:, None]


def envelope(rec: StandardRecursion, x: float, window=DEFAULT_WINDOW) -> EnvelopeFit:
    """Fit the normalized values p_n(x), n in ``window``, to A cos(n phi + delta)."""
    lo, hi = _check_window(window)
    l2, sg = normalized_log2(rec, [x], hi)
    l2, sg = l2[lo:, 0], sg[lo:, 0]
    top = float(np.max(l2))
    if not np.isfinite(top) or top < math.log2(FLAT_LEVEL):
        if top == math.inf:
            raise FitDegenerate("values not finite")
        raise FlatSequence("all values below 1e-300")
    y = sg * np.exp2(l2 - top)
    fit = fit_sinusoid(y, lo)
    log2_amp = fit.log2_amplitude + top
    amp = 2.0**log2_amp if log2_amp < 1023 else math.inf
    return EnvelopeFit(amp, fit.frequency, fit.phase, fit.rms_residual, (lo, hi), log2_amp)


def window_log2_amplitude(rec: StandardRecursion, xs, window=DEFAULT_WINDOW) -> np.ndarray:
    """log2 of sqrt(2) * rms(p_n) over the window, one value per point.

    For a sinusoid this is its amplitude; for growing or decaying sequences it
    is the natural generalization and stays finite in log form.  Values are
    accumulated while recurring, so memory does not grow with the window.
    """
    lo, hi = _check_window(window)
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    d, dn, up = _checked_coefficients(rec, hi)
    norm, _ = normalization_log2(rec, hi)
    ln2 = math.log(2.0)
    prev = np.zeros(xs.size)
    cur = np.ones(xs.size)
    scale = np.zeros(xs.size)
    acc = np.full(xs.size, -np.inf)
    with np.errstate(divide="ignore"):
        for n in range(hi):
            nxt = ((xs - d[n]) * cur - dn[n] * prev) / up[n]
            big = np.maximum(np.abs(cur), np.abs(nxt))
            need = (big > 2.0**512) | ((big < 2.0**-512) & (big > 0.0))
            if need.any():
                shift = np.where(need, np.frexp(big)[1], 0)
                cur = np.ldexp(cur, -shift)
                nxt = np.ldexp(nxt, -shift)
                scale = scale + shift
            prev, cur = cur, nxt
            if n + 1 >= lo:
                l2 = np.log2(np.abs(cur)) + scale + norm[n + 1]
                acc = np.logaddexp(acc, 2.0 * ln2 * l2)
    mean_sq = acc - math.log(hi - lo + 1)
    return (0.5 * mean_sq + 0.5 * ln2) / ln2


@dataclass(frozen=True)
class ScanPoint:
    z: float
    log2_amplitude: float
    flagged: bool = False
    error: str | None = None


RecursionSource = StandardRecursion | Callable[[float], StandardRecursion]


def amplitude_scan(source: RecursionSource, zs: Sequence[float], window=DEFAULT_WINDOW,
                   ratio: float = FLAG_RATIO, half_width: int = LOCAL_HALF_WIDTH) -> list[ScanPoint]:
    """Window amplitude over a grid of spectral points, with candidate flags.

    ``source`` is a recursion evaluated at each z, or a callable building one
    recursion per z (errors are then recorded per point).  A point is flagged
    when it is a strict local minimum and lies below ``ratio`` times the
    median amplitude of its +-``half_width`` grid neighbours.
    """
    zs = np.asarray(sorted(float(z) for z in zs))
    if zs.size == 0:
        return []
    _check_window(window)
    log_amp = np.full(zs.size, np.nan)
    errors: list[str | None] = [None] * zs.size
    if isinstance(source, StandardRecursion):
        try:
            log_amp[:] = window_log2_amplitude(source, zs, window)
        except TrirecError as exc:
            errors = [f"{type(exc).__name__}: {exc}"] * zs.size
    else:
        for i, z in enumerate(zs):
            try:
                log_amp[i] = window_log2_amplitude(source(z), [0.0], window)[0]
            except TrirecError as exc:
                errors[i] = f"{type(exc).__name__}: {exc}"
    flags = _flag_minima(log_amp, ratio, half_width)
    return [ScanPoint(float(z), float(a), bool(f), e)
            for z, a, f, e in zip(zs, log_amp, flags, errors)]


def _flag_minima(log_amp: np.ndarray, ratio: float, half_width: int) -> np.ndarray:
    """Local minima lying ``ratio`` below the local median, after detrending.

    Growing sequences give a steep smooth drift in log amplitude across the
    grid.  The drift is removed with a slope equal to the median of the
    symmetric differences (a[i+k] - a[i-k]) / 2k, which a symmetric dip does
    not bias.
    """
    n = log_amp.size
    flags = np.zeros(n, dtype=bool)
    if n < 3:
        return flags
    cut = math.log2(ratio)
    with np.errstate(invalid="ignore"):
        curv = 0.5 * (log_amp[:-2] + log_amp[2:]) - log_amp[1:-1]
    candidates = np.flatnonzero(curv > 0.25) + 1
    for i in candidates:
        k = np.arange(1, min(half_width, i, n - 1 - i) + 1)
        if k.size == 0:
            continue
        left, right = log_amp[i - k], log_amp[i + k]
        ok = np.isfinite(left) & np.isfinite(right)
        if not ok.any() or not np.isfinite(log_amp[i]):
            continue
        slope = float(np.median((right[ok] - left[ok]) / (2.0 * k[ok])))
        detr_l = left - slope * (-k)
        detr_r = right - slope * k
        if not (log_amp[i] < detr_l[0] and log_amp[i] < detr_r[0]):
            continue
        nb = np.concatenate([detr_l[ok], detr_r[ok]])
        flags[i] = log_amp[i] < float(np.median(nb)) + cut
    return flags


def candidate_brackets(scan: list[ScanPoint]) -> list[tuple[float, float]]:
    """Neighbouring grid points around each flagged minimum."""
    out = []
    for i, p in enumerate(scan):
        if p.flagged and 0 < i < len(scan) - 1:
            out.append((scan[i - 1].z, scan[i + 1].z))
    return out


@dataclass(frozen=True)
class BoundState:
    z: float
    log2_amplitude: float
    nearest: float | None
    deviation: float
    discrepant: bool
    bracket: tuple[float, float]


def golden_minimize(f: Callable[[float], float], a: float, b: float, tol: float = GOLDEN_TOL):
    """Golden-section search on [a, b]; returns (x, f(x))."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while abs(b - a) > max(tol, 4.0 * np.finfo(float).eps * max(abs(a), abs(b))):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def refine_bound_state(rec: StandardRecursion, bracket, window=DEFAULT_WINDOW,
                       stable=None, tol: float = AGREEMENT_TOL,
                       xtol: float = GOLDEN_TOL) -> BoundState:
    """Minimize the window amplitude over ``bracket`` and compare with eigenvalues.

    ``stable`` is a SpectrumReport or a sequence of stable eigenvalues; the
    result is flagged discrepant when none lies within tol * max(1, |z|).
    """
    za, zb = sorted(float(v) for v in bracket)
    if not zb > za:
        raise ParameterError("degenerate bracket")
    _check_window(window)

    def f(z):
        return float(window_log2_amplitude(rec, [z], window)[0])

    z, val = golden_minimize(f, za, zb, xtol)
    edge = 1e-6 * (zb - za)
    if z - za <= edge or zb - z <= edge or not (val < f(za) and val < f(zb)):
        raise NoMinimum(f"amplitude has no interior minimum on [{za!r}, {zb!r}]")
    if stable is None:
        points = []
    elif hasattr(stable, "discrete_points"):
        points = [p.value for p in stable.discrete_points]
    else:
        points = [float(v) for v in stable]
    if points:
        nearest = min(points, key=lambda v: abs(v - z))
        dev = abs(nearest - z)
        bad = dev > tol * max(1.0, abs(z))
    else:
        nearest, dev, bad = None, math.inf, True
    return BoundState(z, val, nearest, dev, bad, (za, zb))


def scan_range(values: np.ndarray, step: float = SCAN_STEP, depth: float = 1e-5) -> np.ndarray:
    """Geometric grid on the negative axis, from 1.2x the lowest truncation
    eigenvalue down by ``depth``, with relative spacing ``step``."""
    low = float(np.min(values))
    if low >= 0.0:
        return np.array([])
    top = 1.2 * abs(low)
    count = int(math.ceil(-math.log(depth) / step)) + 1
    return -np.geomspace(top, top * depth, count)


def find_bound_states(rec: StandardRecursion, report, window=DEFAULT_WINDOW,
                      step: float = SCAN_STEP) -> list[BoundState]:
    """Scan the negative axis and refine every flagged amplitude minimum."""
    from .spectral import truncated_spectrum

    grid = scan_range(truncated_spectrum(rec, report.N1).values, step)
    scan = amplitude_scan(rec, grid, window)
    found = []
    for br in candidate_brackets(scan):
        try:
            found.append(refine_bound_state(rec, br, window, report))
        except NoMinimum:
            continue
    return found
