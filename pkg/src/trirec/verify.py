"""Self-check suites shared by ``trirec verify`` and the acceptance tests.

Each suite returns a :class:`SuiteResult` whose ``lines`` are deterministic
(no timings), one per checked case, ending with a summary line.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import BarycentricInterpolator
from scipy.special import eval_jacobi

from .asymptotics import envelope, find_bound_states
from .errors import TrirecError
from .families import (
    DeformParams,
    DiscreteParams,
    HParams,
    WilsonDeformSpec,
    chahn_classical,
    deform,
    deformed_wilson,
    g_family,
    h_family,
    hd_family,
    jacobi_classical,
    laguerre_classical,
    q_family,
    solve_deformation,
    wilson_classical,
)
from .recursion import _checked_coefficients, evaluate_sequence, recur_many
from .spectral import (
    DISCRETE_COUNT_OFFSET,
    build_jacobi,
    classify_spectrum,
    gauss_quadrature,
    gram_check,
    zeros,
)


@dataclass
class SuiteResult:
    name: str
    passed: bool
    lines: list[str] = field(default_factory=list)
    worst: float = 0.0

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


def _fmt(x) -> str:
    return repr(float(x))


# -- parameter sets -------------------------------------------------------------

# (mu, nu, alpha, beta) with floor(alpha - (mu + nu + 1)/2) covering 0..6
BOUND_SETS = [
    (0.5, 0.5, 1.2, 0.5),
    (0.0, 0.0, 0.9, 0.3),
    (1.0, 0.5, 2.2, 0.5),
    (0.5, 0.5, 2.7, 0.5),
    (0.3, 0.6, 3.0, 0.3),
    (0.0, 0.2, 3.4, 0.6),
    (0.5, 0.5, 4.05, 0.5),
    (1.5, 0.0, 4.9, 0.4),
    (0.5, 0.5, 5.2, 0.5),
    (0.0, 0.0, 5.8, 0.5),
    (0.0, 0.0, 6.51, 0.2),
    (0.2, 0.1, 7.3, 0.7),
]


def bound_recursions():
    """(label, recursion) for the g and G families over BOUND_SETS."""
    out = []
    for mu, nu, a, beta in BOUND_SETS:
        p = DiscreteParams(mu, nu, a * a, beta)
        tag = f"mu={mu} nu={nu} alpha={a} beta={beta}"
        out.append((f"g {tag}", hd_family(p, kind="g")))
        out.append((f"G {tag}", g_family(p)))
    return out


def gram_configs():
    """Favard-positive configurations used by the orthogonality suite."""
    cfg = []
    for mu, nu, a2, th in [(0.5, 0.5, -4.0, 1.0), (0.0, 0.0, -1.0, math.pi / 2),
                           (1.5, -0.5, -2.5, 2.5), (-0.5, 0.0, -0.3, 0.7), (2.0, 1.0, 0.5, 1.9)]:
        p = HParams(mu, nu, a2, th)
        cfg.append((f"H mu={mu} nu={nu} alpha_sq={a2} theta={th}", h_family(p)))
        cfg.append((f"Q mu={mu} nu={nu} alpha_sq={a2} theta={th}", q_family(p)))
    for mu, nu, a2, beta in [(0.5, 0.5, -4.0, 0.5), (0.0, 1.0, -0.5, 0.2),
                             (1.5, 0.3, -9.0, 0.8), (0.2, 0.2, -1.0, 0.35)]:
        p = DiscreteParams(mu, nu, a2, beta)
        cfg.append((f"h mu={mu} nu={nu} alpha_sq={a2} beta={beta}", hd_family(p, kind="h")))
        cfg.append((f"G mu={mu} nu={nu} alpha_sq={a2} beta={beta}", g_family(p)))
    cfg.append(("jacobi mu=0.5 nu=-0.3", jacobi_classical(0.5, -0.3)))
    cfg.append(("jacobi mu=2 nu=1", jacobi_classical(2.0, 1.0)))
    cfg.append(("laguerre gamma=0", laguerre_classical(0.0)))
    cfg.append(("laguerre gamma=1.5", laguerre_classical(1.5)))
    cfg.append(("deformed-wilson 0.5,0.5,0.5,0.5 r=-0.5",
                deformed_wilson(WilsonDeformSpec(0.5, 0.5, 0.5, 0.5, -0.5))))
    return cfg


# -- suites ---------------------------------------------------------------------

def jacobi_oracle(mu: float, nu: float, x: float, N: int) -> np.ndarray:
    """P_0..P_N of Jacobi P^{(mu,nu)}(x) from the textbook three-term recurrence."""
    p = np.zeros(N + 1)
    p[0] = 1.0
    if N >= 1:
        p[1] = (mu + 1.0) + 0.5 * (mu + nu + 2.0) * (x - 1.0)
    for n in range(1, N):
        s = 2.0 * n + mu + nu
        a = 2.0 * (n + 1) * (n + mu + nu + 1.0) * s
        b = (s + 1.0) * ((s + 2.0) * s * x + mu * mu - nu * nu)
        c = 2.0 * (n + mu) * (n + nu) * (s + 2.0)
        p[n + 1] = (b * p[n] - c * p[n - 1]) / a
    return p


def suite_jacobi_reduction(N: int = 50) -> SuiteResult:
    """H at z = 0 against the Jacobi recurrence, error relative to max |P_n|."""
    res = SuiteResult("jacobi-reduction", True)
    vals = (-0.5, 0.0, 1.5)
    for mu in vals:
        for nu in vals:
            for th_name, th in (("pi/6", math.pi / 6), ("pi/2", math.pi / 2), ("5pi/6", 5 * math.pi / 6)):
                rec = h_family(HParams(mu, nu, -0.7, th))
                got = evaluate_sequence(rec, 0.0, N).to_float()
                ref = jacobi_oracle(mu, nu, math.cos(th), N)
                err = float(np.max(np.abs(got - ref)) / np.max(np.abs(ref)))
                lib = eval_jacobi(np.arange(N + 1), mu, nu, math.cos(th))
                err_lib = float(np.max(np.abs(got - lib)) / np.max(np.abs(lib)))
                worst = max(err, err_lib)
                ok = worst <= 1e-12
                res.passed &= ok
                res.worst = max(res.worst, worst)
                res.lines.append(f"{'PASS' if ok else 'FAIL'} mu={mu} nu={nu} theta={th_name} "
                                 f"max_rel_dev={_fmt(worst)}")
    res.lines.append(f"{'PASS' if res.passed else 'FAIL'} jacobi-reduction cases=27 "
                     f"max_deviation={_fmt(res.worst)} tol=1e-12")
    return res


def suite_degree(held_out: int = 5) -> SuiteResult:
    """Degree-n interpolation through n+1 samples predicts held-out samples."""
    res = SuiteResult("degree", True)
    cfgs = [("H", h_family(HParams(0.5, 0.5, -4.0, 1.0))),
            ("H", h_family(HParams(1.5, -0.5, 0.3, 2.4))),
            ("Q", q_family(HParams(0.5, 0.5, -4.0, 1.0))),
            ("Q", q_family(HParams(0.0, 1.0, -0.5, 0.6)))]
    for name, rec in cfgs:
        for n in (5, 10, 20):
            zs = zeros(rec, n)
            half = 0.55 * (zs[-1] - zs[0]) + 1e-3 * max(1.0, abs(zs).max())
            mid = 0.5 * (zs[-1] + zs[0])
            k = np.arange(n + 1)
            nodes = mid + half * np.cos((2 * k + 1) * math.pi / (2 * (n + 1)))
            test = mid + half * np.linspace(-0.93, 0.91, held_out)
            f_nodes = np.array([evaluate_sequence(rec, z, n).to_float()[-1] for z in nodes])
            f_test = np.array([evaluate_sequence(rec, z, n).to_float()[-1] for z in test])
            # fixed rng: the weight computation shuffles nodes
            interp = BarycentricInterpolator(nodes, f_nodes, rng=np.random.default_rng(0))(test)
            scale = max(np.max(np.abs(f_nodes)), np.max(np.abs(f_test)))
            err = float(np.max(np.abs(interp - f_test)) / scale)
            ok = err <= 1e-9
            res.passed &= ok
            res.worst = max(res.worst, err)
            res.lines.append(f"{'PASS' if ok else 'FAIL'} {name} {dict(rec.params)} n={n} "
                             f"held_out_rel_err={_fmt(err)}")
    res.lines.append(f"{'PASS' if res.passed else 'FAIL'} degree max_rel_err={_fmt(res.worst)} tol=1e-9")
    return res


def _gershgorin(rec, n):
    d, dn, up = rec.coefficients(n)
    return float(np.max(np.abs(d) + np.abs(dn) + np.abs(up)))


def bisection_roots(rec, n: int, grid: int = 200001, iters: int = 200) -> np.ndarray:
    """Roots of P_n by sign changes on a dense grid refined by bisection.

    The grid mixes uniform points on the Gershgorin interval with
    geometrically spaced points on both sides of zero.
    """
    R = 1.05 * _gershgorin(rec, n)
    coef = _checked_coefficients(rec, n)
    lin = np.linspace(-R, R, grid)
    geo = np.geomspace(R * 1e-14, R, grid // 2)
    pts = np.unique(np.concatenate([lin, geo, -geo, [0.0]]))

    def sign_at(xs):
        m, _ = recur_many(coef, xs, n)
        return np.sign(m[-1])

    s = sign_at(pts)
    exact = pts[s == 0.0]
    idx = np.flatnonzero(s[:-1] * s[1:] < 0.0)
    lo, hi = pts[idx].copy(), pts[idx + 1].copy()
    slo = s[idx]
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        done = (mid == lo) | (mid == hi)
        if done.all():
            break
        sm = sign_at(mid)
        left = sm == slo
        lo = np.where(left & ~done, mid, lo)
        hi = np.where(~left & ~done, mid, hi)
    return np.sort(np.concatenate([0.5 * (lo + hi), exact]))


def zeros_configs():
    return [
        ("H", h_family(HParams(0.5, 0.5, -4.0, 1.0))),
        ("H", h_family(HParams(0.0, 1.5, 0.2, 2.2))),
        ("Q", q_family(HParams(0.5, 0.5, -4.0, 1.0))),
        ("Q", q_family(HParams(1.5, 0.0, -0.6, 0.4))),
        ("g", hd_family(DiscreteParams(0.5, 0.5, 5.2**2, 0.5), kind="g")),
        ("g", hd_family(DiscreteParams(0.0, 0.0, 2.1**2, 0.3), kind="g")),
        ("G", g_family(DiscreteParams(0.5, 0.5, 5.2**2, 0.5))),
        ("G", g_family(DiscreteParams(0.5, 0.0, -2.0, 0.6))),
    ]


def suite_zeros_oracle() -> SuiteResult:
    """Truncation eigenvalues against bisection roots of the forward recursion."""
    res = SuiteResult("zeros-oracle", True)
    for name, rec in zeros_configs():
        for n in (10, 25, 50):
            eig = zeros(rec, n)
            ref = bisection_roots(rec, n)
            if ref.size != n:
                ok, err = False, math.inf
                detail = f"oracle_found={ref.size}"
            else:
                err = float(np.max(np.abs(eig - ref) / np.maximum(1.0, np.abs(ref))))
                ok = err <= 1e-10
                detail = f"max_dev={_fmt(err)}"
            res.passed &= ok
            res.worst = max(res.worst, err)
            res.lines.append(f"{'PASS' if ok else 'FAIL'} {name} {dict(rec.params)} n={n} {detail}")
    res.lines.append(f"{'PASS' if res.passed else 'FAIL'} zeros-oracle max_dev={_fmt(res.worst)} tol=1e-10")
    return res


def suite_orthogonality(N: int = 200) -> SuiteResult:
    """Gram matrices of the first N/2 orthonormal polynomials under N-point rules."""
    res = SuiteResult("orthogonality", True)
    cfgs = gram_configs()
    for label, rec in cfgs:
        rule = gauss_quadrature(build_jacobi(rec, N))
        off = gram_check(rule, rec, N // 2)
        mass_err = abs(float(np.sum(rule.weights)) - 1.0)
        ok = off <= 1e-10 and mass_err <= 1e-12
        res.passed &= ok
        res.worst = max(res.worst, off)
        res.lines.append(f"{'PASS' if ok else 'FAIL'} {label} gram_offdiag={_fmt(off)} "
                         f"mass_err={_fmt(mass_err)}")
    res.lines.append(f"{'PASS' if res.passed else 'FAIL'} orthogonality configs={len(cfgs)} "
                     f"max_offdiag={_fmt(res.worst)} tol=1e-10")
    return res


def suite_bound_count(N1: int = 500, N2: int = 1000, tol: float = 1e-6) -> SuiteResult:
    """Stable discrete eigenvalues against floor(|alpha| - sigma) + offset."""
    res = SuiteResult("bound-count", True)
    for label, rec in bound_recursions():
        rep = classify_spectrum(rec, N1, N2, tol)
        expected = rep.expected_points if rep.predicted_count is not None else 0
        ok = rep.observed_count == expected
        res.passed &= ok
        drift = max((p.drift for p in rep.discrete_points), default=0.0)
        res.lines.append(f"{'PASS' if ok else 'FAIL'} {label} floor={rep.predicted_count} "
                         f"expected={expected} observed={rep.observed_count} max_drift={_fmt(drift)}")
    res.lines.append(f"{'PASS' if res.passed else 'FAIL'} bound-count sets={len(BOUND_SETS)} "
                     f"convention=floor+{DISCRETE_COUNT_OFFSET}")
    return res


H_ENVELOPE_POINTS = (-1.0, -0.5, 0.0, 0.5, 1.0)


def suite_asymptotics(window=(500, 1000)) -> SuiteResult:
    """Single-cosine envelope fits of normalized H values."""
    res = SuiteResult("asymptotics", True)
    for mu, nu, a2, th in [(0.5, 0.5, -4.0, 1.0), (0.0, 1.0, -1.0, 2.0)]:
        rec = h_family(HParams(mu, nu, a2, th))
        for z in H_ENVELOPE_POINTS:
            try:
                fit = envelope(rec, z, window)
                ok = fit.rms_residual <= 0.05
                detail = (f"rel_rms={_fmt(fit.rms_residual)} log2_amp={_fmt(fit.log2_amplitude)} "
                          f"freq={_fmt(fit.frequency)}")
            except TrirecError as exc:
                ok, detail = False, f"error={type(exc).__name__}: {exc}"
            res.passed &= ok
            res.lines.append(f"{'PASS' if ok else 'FAIL'} H {dict(rec.params)} z={z} {detail}")
    # bounded reference: classical Jacobi values are sinusoidal in n
    rec = jacobi_classical(0.5, -0.3)
    for x in (-0.6, 0.2, 0.7):
        fit = envelope(rec, x, window)
        res.lines.append(f"INFO jacobi mu=0.5 nu=-0.3 x={x} rel_rms={_fmt(fit.rms_residual)}")
    res.lines.append(f"{'PASS' if res.passed else 'FAIL'} asymptotics tol=0.05 window={window[0]}:{window[1]}")
    return res


def suite_bound_states(N1: int = 500, N2: int = 1000, window=(500, 1000)) -> SuiteResult:
    """Amplitude minima on the negative axis against stable eigenvalues."""
    res = SuiteResult("bound-states", True)
    total = 0
    for label, rec in bound_recursions():
        rep = classify_spectrum(rec, N1, N2)
        found = find_bound_states(rec, rep, window)
        total += len(found)
        bad = [b for b in found if b.discrepant]
        dev = max((b.deviation for b in found), default=0.0)
        ok = not bad
        res.passed &= ok
        res.worst = max(res.worst, dev)
        res.lines.append(f"{'PASS' if ok else 'FAIL'} {label} minima={len(found)} "
                         f"stable={rep.observed_count} discrepant={len(bad)} max_dev={_fmt(dev)}")
    res.passed &= total > 0
    res.lines.append(f"{'PASS' if res.passed else 'FAIL'} bound-states minima={total} "
                     f"max_dev={_fmt(res.worst)} tol=1e-6")
    return res


def _coef_bytes(rec, N):
    return b"".join(a.tobytes() for a in rec.coefficients(N))


def suite_deformation(N: int = 200) -> SuiteResult:
    """Zero deformation is the identity; deformed Jacobi reproduces H."""
    res = SuiteResult("deformation", True)
    bases = [("jacobi", jacobi_classical(0.5, -0.3)), ("laguerre", laguerre_classical(1.5)),
             ("wilson", wilson_classical(0.5, 0.7, 1.1, 0.3)),
             ("chahn", chahn_classical(0.5, 0.7, 1.1, 0.3))]
    for name, base in bases:
        same = _coef_bytes(deform(base, DeformParams(0.0, 1.3, -2.0)), N) == _coef_bytes(base, N)
        res.passed &= same
        res.lines.append(f"{'PASS' if same else 'FAIL'} lambda=0 {name} bit_identical={same}")
    for mu, nu, a2, th in [(0.5, 0.5, -4.0, 1.0), (1.5, -0.5, 2.3, 2.5), (0.0, 0.0, 0.0, math.pi / 2),
                           (-0.5, 1.5, -0.1, 0.3)]:
        h = h_family(HParams(mu, nu, a2, th))
        sigma = 0.5 * (mu + nu + 1.0)
        solved = solve_deformation(jacobi_classical(mu, nu), sigma, a2, math.cos(th), math.sin(th))
        err = 0.0
        for a, b in zip(h.coefficients(N), solved.coefficients(N)):
            scale = np.maximum(np.abs(a), np.finfo(float).tiny)
            err = max(err, float(np.max(np.abs(a - b) / scale)))
        ok = err <= 1e-14
        res.passed &= ok
        res.worst = max(res.worst, err)
        res.lines.append(f"{'PASS' if ok else 'FAIL'} deformed jacobi vs H mu={mu} nu={nu} "
                         f"alpha_sq={a2} theta={th} max_rel={_fmt(err)}")
    res.lines.append(f"{'PASS' if res.passed else 'FAIL'} deformation max_rel={_fmt(res.worst)} tol=1e-14")
    return res


SUITES: dict[str, Callable[[], SuiteResult]] = {
    "jacobi-reduction": suite_jacobi_reduction,
    "degree": suite_degree,
    "zeros-oracle": suite_zeros_oracle,
    "orthogonality": suite_orthogonality,
    "bound-count": suite_bound_count,
    "asymptotics": suite_asymptotics,
    "bound-states": suite_bound_states,
    "deformation": suite_deformation,
}
