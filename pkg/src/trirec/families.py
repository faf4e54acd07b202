"""Coefficient generators for the polynomial families.

Every constructor returns a :class:`StandardRecursion` in the family's
spectral variable.  The continuous families H and Q (and their discrete
versions h/g and G) are obtained by solving their defining relations for the
spectral variable; the deformation wrapper adds ``lam * ((n + sigma)**2 -
alpha_sq)`` to the diagonal of any base recursion.

alpha is carried only as ``alpha_sq``; a negative value encodes a purely
imaginary alpha.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .errors import (
    BadD,
    BadR,
    DegenerateBeta,
    DegenerateTheta,
    ParameterError,
    ParamOutOfRange,
    SingularAn,
)
from .recursion import WHOLE_LINE, StandardRecursion

DEFAULT_MAX_DEGREE = 4096
BETA_MAX = 1.0 - 1e-6


@dataclass(frozen=True)
class HParams:
    mu: float
    nu: float
    alpha_sq: float
    theta: float


@dataclass(frozen=True)
class DiscreteParams:
    mu: float
    nu: float
    alpha_sq: float
    beta: float


@dataclass(frozen=True)
class DeformParams:
    lam: float
    sigma: float
    alpha_sq: float


@dataclass(frozen=True)
class WilsonDeformSpec:
    kappa: float
    tau: float
    eta: float
    xi: float
    r: float


@dataclass(frozen=True)
class CHahnDeformSpec:
    kappa: float
    tau: float
    eta: float
    xi: float
    d: float
    sign: int
    a: float
    b: float
    c: float
    D: float


# -- shared pieces -----------------------------------------------------------

def jacobi_pieces(mu, nu, n):
    """(B_n, b_n, c_n) of the Jacobi recursion, with the n = 0 limits taken.

    x P_n = B_n P_n + b_n P_{n-1} + c_n P_{n+1}.
    """
    n = np.asarray(n, dtype=float)
    s = 2.0 * n + mu + nu
    first = n == 0
    with np.errstate(all="ignore"):
        B = np.where(first, (nu - mu) / (mu + nu + 2.0), (nu * nu - mu * mu) / (s * (s + 2.0)))
        b = np.where(first, 0.0, 2.0 * (n + mu) * (n + nu) / (s * (s + 1.0)))
        c = np.where(
            first,
            2.0 / (mu + nu + 2.0),
            2.0 * (n + 1.0) * (n + mu + nu + 1.0) / ((s + 1.0) * (s + 2.0)),
        )
    return B, b, c


def bracket(sigma, alpha_sq, n):
    """(n + sigma)**2 - alpha_sq."""
    n = np.asarray(n, dtype=float)
    return (n + sigma) ** 2 - alpha_sq


def _check_mu_nu(mu, nu):
    for name, v in (("mu", mu), ("nu", nu)):
        if not math.isfinite(v) or v <= -1.0:
            raise ParamOutOfRange(f"{name}={v!r} must exceed -1")


def _check_bracket(sigma, alpha_sq, max_degree):
    n = np.arange(int(max_degree) + 1)
    A = bracket(sigma, alpha_sq, n)
    tiny = 1e-12 * np.maximum(1.0, (n + sigma) ** 2)
    bad = np.abs(A) <= tiny
    if bad.any():
        raise SingularAn(int(np.argmax(bad)), f"(n+sigma)^2 - alpha^2 vanishes at n={int(np.argmax(bad))}")


def _check_theta(theta):
    if not (0.0 < theta <= math.pi):
        raise ParamOutOfRange(f"theta={theta!r} outside (0, pi]")
    if abs(math.sin(theta)) < 1e-12:
        raise DegenerateTheta("sin(theta) vanishes; z cannot be recovered")


def _check_beta(beta):
    if not (0.0 < beta < 1.0):
        raise ParamOutOfRange(f"beta={beta!r} outside (0, 1)")
    if abs(1.0 - beta * beta) < 1e-12 or beta >= BETA_MAX:
        raise DegenerateBeta(f"beta={beta!r} too close to 1")


def _sigma(mu, nu):
    return 0.5 * (mu + nu + 1.0)


# -- the new families ---------------------------------------------------------

def h_family(p: HParams, max_degree: int = DEFAULT_MAX_DEGREE) -> StandardRecursion:
    """H_n(z; alpha, theta): the first continuous class, spectral variable z."""
    _check_mu_nu(p.mu, p.nu)
    _check_theta(p.theta)
    sigma = _sigma(p.mu, p.nu)
    _check_bracket(sigma, p.alpha_sq, max_degree)
    cos_t, sin_t = math.cos(p.theta), math.sin(p.theta)
    mu, nu, a2 = p.mu, p.nu, p.alpha_sq

    def scale(n):
        return sin_t * bracket(sigma, a2, n)

    def diag(n):
        B = jacobi_pieces(mu, nu, n)[0]
        return (cos_t - B) / scale(n)

    def down(n):
        return -jacobi_pieces(mu, nu, n)[1] / scale(n)

    def up(n):
        return -jacobi_pieces(mu, nu, n)[2] / scale(n)

    return StandardRecursion(diag, down, up, domain=WHOLE_LINE, name="H", params=asdict(p))


def hd_family(p: DiscreteParams, kind: str | None = None,
              max_degree: int = DEFAULT_MAX_DEGREE) -> StandardRecursion:
    """Discrete version of H (theta -> i theta, z -> -i z_k), variable z_k.

    One recursion serves both h_n(k; alpha, beta) (``kind="h"``, alpha
    purely imaginary, infinite spectrum) and g_n(k; N, beta) (``kind="g"``,
    alpha real, finite spectrum).  ``kind=None`` skips the sign check on
    ``alpha_sq``.
    """
    _check_mu_nu(p.mu, p.nu)
    _check_beta(p.beta)
    if kind == "h" and not p.alpha_sq < 0.0:
        raise ParamOutOfRange("h requires alpha_sq < 0 (purely imaginary alpha)")
    if kind == "g" and not p.alpha_sq > 0.0:
        raise ParamOutOfRange("g requires alpha_sq > 0 (real alpha)")
    sigma = _sigma(p.mu, p.nu)
    _check_bracket(sigma, p.alpha_sq, max_degree)
    beta, mu, nu, a2 = p.beta, p.mu, p.nu, p.alpha_sq
    head, tail = 1.0 + beta * beta, 1.0 - beta * beta

    def scale(n):
        return tail * bracket(sigma, a2, n)

    def diag(n):
        return (head - 2.0 * beta * jacobi_pieces(mu, nu, n)[0]) / scale(n)

    def down(n):
        return -2.0 * beta * jacobi_pieces(mu, nu, n)[1] / scale(n)

    def up(n):
        return -2.0 * beta * jacobi_pieces(mu, nu, n)[2] / scale(n)

    # real alpha: the positive-type tail accumulating at 0+ is continuum-like
    domain = (0.0, math.inf) if a2 > 0.0 else None
    return StandardRecursion(diag, down, up, domain=domain, name=kind or "hd", params=asdict(p))


def q_family(p: HParams, max_degree: int = DEFAULT_MAX_DEGREE) -> StandardRecursion:
    """Q_n(z; alpha, theta): like H but with the inverse power on the bracket."""
    _check_mu_nu(p.mu, p.nu)
    _check_theta(p.theta)
    sigma = _sigma(p.mu, p.nu)
    _check_bracket(sigma, p.alpha_sq, max_degree)
    cos_t, sin_t = math.cos(p.theta), math.sin(p.theta)
    mu, nu, a2 = p.mu, p.nu, p.alpha_sq

    def scale(n):
        return bracket(sigma, a2, n) / sin_t

    def diag(n):
        return scale(n) * (cos_t - jacobi_pieces(mu, nu, n)[0])

    def down(n):
        return -scale(n) * jacobi_pieces(mu, nu, n)[1]

    def up(n):
        return -scale(n) * jacobi_pieces(mu, nu, n)[2]

    return StandardRecursion(diag, down, up, domain=WHOLE_LINE, name="Q", params=asdict(p))


def g_family(p: DiscreteParams, max_degree: int = DEFAULT_MAX_DEGREE) -> StandardRecursion:
    """G_n(z; alpha, beta): discrete-theta version of Q.

    The declared continuous part is z >= 0; for real alpha with
    |alpha| > (mu + nu + 1)/2 a finite negative discrete spectrum is expected.
    """
    _check_mu_nu(p.mu, p.nu)
    _check_beta(p.beta)
    sigma = _sigma(p.mu, p.nu)
    _check_bracket(sigma, p.alpha_sq, max_degree)
    beta, mu, nu, a2 = p.beta, p.mu, p.nu, p.alpha_sq
    head, tail = 1.0 + beta * beta, 1.0 - beta * beta

    def scale(n):
        return bracket(sigma, a2, n) / tail

    def diag(n):
        return scale(n) * (head - 2.0 * beta * jacobi_pieces(mu, nu, n)[0])

    def down(n):
        return -scale(n) * 2.0 * beta * jacobi_pieces(mu, nu, n)[1]

    def up(n):
        return -scale(n) * 2.0 * beta * jacobi_pieces(mu, nu, n)[2]

    return StandardRecursion(diag, down, up, domain=(0.0, math.inf), name="G", params=asdict(p))


# -- classical bases ------------------------------------------------------------

def jacobi_classical(mu: float, nu: float) -> StandardRecursion:
    """Jacobi P_n^{(mu,nu)}(x), the z = 0 reading of the H relation."""
    _check_mu_nu(mu, nu)

    def diag(n):
        return jacobi_pieces(mu, nu, n)[0]

    def down(n):
        return jacobi_pieces(mu, nu, n)[1]

    def up(n):
        return jacobi_pieces(mu, nu, n)[2]

    return StandardRecursion(diag, down, up, domain=(-1.0, 1.0), name="jacobi",
                             params={"mu": mu, "nu": nu})


def laguerre_classical(gamma: float) -> StandardRecursion:
    """Laguerre L_n^gamma(x): diag 2n+gamma+1, down -(n+gamma), up -(n+1)."""
    if not math.isfinite(gamma) or gamma <= -1.0:
        raise ParamOutOfRange(f"gamma={gamma!r} must exceed -1")

    def diag(n):
        return 2.0 * np.asarray(n, dtype=float) + gamma + 1.0

    def down(n):
        return -(np.asarray(n, dtype=float) + gamma)

    def up(n):
        return -(np.asarray(n, dtype=float) + 1.0)

    return StandardRecursion(diag, down, up, domain=(0.0, math.inf), name="laguerre",
                             params={"gamma": gamma})


def wilson_classical(a: float, b: float, c: float, d: float) -> StandardRecursion:
    """Wilson polynomials normalized as 4F3(...; 1), spectral variable x = z**2.

    Coefficients follow the standard tables (Koekoek-Lesky-Swarttouw):
    -(a^2 + x) W_n = A_n W_{n+1} - (A_n + C_n) W_n + C_n W_{n-1}.
    """
    s = a + b + c + d

    def A(n):
        n = np.asarray(n, dtype=float)
        with np.errstate(all="ignore"):
            general = ((n + s - 1.0) * (n + a + b) * (n + a + c) * (n + a + d)
                       / ((2.0 * n + s - 1.0) * (2.0 * n + s)))
        return np.where(n == 0, (a + b) * (a + c) * (a + d) / s, general)

    def C(n):
        n = np.asarray(n, dtype=float)
        with np.errstate(all="ignore"):
            general = (n * (n + b + c - 1.0) * (n + b + d - 1.0) * (n + c + d - 1.0)
                       / ((2.0 * n + s - 2.0) * (2.0 * n + s - 1.0)))
        return np.where(n == 0, 0.0, general)

    return StandardRecursion(
        lambda n: A(n) + C(n) - a * a,
        lambda n: -C(n),
        lambda n: -A(n),
        domain=(0.0, math.inf),
        name="wilson",
        params={"a": a, "b": b, "c": c, "d": d},
    )


def chahn_classical(a: float, b: float, c: float, d: float) -> StandardRecursion:
    """Continuous Hahn polynomials normalized as 3F2(...; 1).

    The spectral variable is X = a + i x (complex for real x):
    X p_n = A_n p_{n+1} - (A_n + C_n) p_n + C_n p_{n-1}.
    """
    s = a + b + c + d

    def A(n):
        n = np.asarray(n, dtype=float)
        with np.errstate(all="ignore"):
            general = -((n + s - 1.0) * (n + a + c) * (n + a + d)
                        / ((2.0 * n + s - 1.0) * (2.0 * n + s)))
        return np.where(n == 0, -(a + c) * (a + d) / s, general)

    def C(n):
        n = np.asarray(n, dtype=float)
        with np.errstate(all="ignore"):
            general = (n * (n + b + c - 1.0) * (n + b + d - 1.0)
                       / ((2.0 * n + s - 2.0) * (2.0 * n + s - 1.0)))
        return np.where(n == 0, 0.0, general)

    return StandardRecursion(
        lambda n: -(A(n) + C(n)),
        C,
        A,
        domain=None,
        name="chahn",
        params={"a": a, "b": b, "c": c, "d": d},
    )


# -- deformation ----------------------------------------------------------------

def deform(base: StandardRecursion, d: DeformParams) -> StandardRecursion:
    """Add lam * ((n + sigma)**2 - alpha_sq) to the diagonal of ``base``."""
    params = dict(base.params, lam=d.lam, sigma=d.sigma, alpha_sq=d.alpha_sq)
    name = f"deformed-{base.name}" if base.name else "deformed"
    if d.lam == 0.0:
        return StandardRecursion(base.diag, base.down, base.up, domain=base.domain,
                                 name=name, params=params)
    diag0 = base.diag

    def diag(n):
        return diag0(n) + d.lam * bracket(d.sigma, d.alpha_sq, n)

    return StandardRecursion(diag, base.down, base.up, domain=None, name=name, params=params)


def solve_deformation(base: StandardRecursion, sigma: float, alpha_sq: float,
                      x: float, scale: float = 1.0) -> StandardRecursion:
    """Recursion in t for the deformed relation at fixed x with lam = scale * t.

    Rearranges x P_n = (a_n + scale t A_n) P_n + b_n P_{n-1} + c_n P_{n+1}
    into standard form in t by dividing through by ``scale * A_n``.
    """
    def denom(n):
        return scale * bracket(sigma, alpha_sq, n)

    return StandardRecursion(
        lambda n: (x - base.diag(n)) / denom(n),
        lambda n: -base.down(n) / denom(n),
        lambda n: -base.up(n) / denom(n),
        domain=None,
        name=f"solved-{base.name}",
        params=dict(base.params, sigma=sigma, alpha_sq=alpha_sq, x=x, scale=scale),
    )


def wilson_deform_params(s: WilsonDeformSpec) -> DeformParams:
    if s.r == 0.0 or s.r == 1.0:
        raise BadR(f"r={s.r!r} must differ from 0 and 1")
    total = s.kappa + s.tau + s.eta + s.xi - 1.0
    return DeformParams(
        lam=-s.r,
        sigma=0.5 * total,
        alpha_sq=0.25 * total * total - (s.kappa + s.eta) * (s.tau + s.xi),
    )


def chahn_deform_params(s: CHahnDeformSpec) -> DeformParams:
    if s.d == 0.0:
        raise BadD("d must be nonzero")
    if s.sign not in (1, -1):
        raise ParamOutOfRange(f"sign={s.sign!r} must be +1 or -1")
    total = s.kappa + s.tau + s.eta + s.xi - 1.0
    abc = s.a + s.b + s.c - 1.0
    return DeformParams(lam=s.sign / s.d, sigma=0.5 * total, alpha_sq=0.25 * abc * abc - s.D)


def deformed_wilson(s: WilsonDeformSpec) -> StandardRecursion:
    return deform(wilson_classical(s.kappa, s.tau, s.eta, s.xi), wilson_deform_params(s))


def deformed_chahn(s: CHahnDeformSpec) -> StandardRecursion:
    return deform(chahn_classical(s.kappa, s.tau, s.eta, s.xi), chahn_deform_params(s))


# -- JSON family specs ----------------------------------------------------------

FAMILY_KEYS = {
    "H": ("mu", "nu", "alpha_sq", "theta"),
    "Q": ("mu", "nu", "alpha_sq", "theta"),
    "h": ("mu", "nu", "alpha_sq", "beta"),
    "g": ("mu", "nu", "alpha_sq", "beta"),
    "G": ("mu", "nu", "alpha_sq", "beta"),
    "jacobi": ("mu", "nu"),
    "laguerre": ("gamma",),
    "deformed-wilson": tuple(f.name for f in fields(WilsonDeformSpec)),
    "deformed-chahn": tuple(f.name for f in fields(CHahnDeformSpec)),
}

COMPLEX_FAMILIES = frozenset({"deformed-chahn"})


def _number(key, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParameterError(f"{key!r} must be a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ParameterError(f"{key!r} must be finite")
    return value


def normalize_spec(spec) -> dict:
    """Validate a JSON family spec and return it with canonical key order."""
    if not isinstance(spec, dict):
        raise ParameterError("family spec must be a JSON object")
    family = spec.get("family")
    if family not in FAMILY_KEYS:
        raise ParameterError(f"unknown family {family!r}; expected one of {sorted(FAMILY_KEYS)}")
    keys = FAMILY_KEYS[family]
    allowed = set(keys) | {"family", "max_degree"}
    extra = sorted(set(spec) - allowed)
    if extra:
        raise ParameterError(f"unexpected keys for {family}: {extra}")
    missing = [k for k in keys if k not in spec]
    if missing:
        raise ParameterError(f"missing keys for {family}: {missing}")
    out = {"family": family}
    for k in keys:
        out[k] = _number(k, spec[k])
    if family == "deformed-chahn":
        if out["sign"] not in (1.0, -1.0):
            raise ParamOutOfRange("sign must be +1 or -1")
        out["sign"] = int(out["sign"])
    if "max_degree" in spec:
        md = spec["max_degree"]
        if isinstance(md, bool) or not isinstance(md, int) or md < 1:
            raise ParameterError("max_degree must be a positive integer")
        out["max_degree"] = md
    return out


def from_spec(spec) -> StandardRecursion:
    """Build the recursion named by a JSON family spec."""
    s = normalize_spec(spec)
    family = s["family"]
    md = s.get("max_degree", DEFAULT_MAX_DEGREE)
    if family in ("H", "Q"):
        p = HParams(s["mu"], s["nu"], s["alpha_sq"], s["theta"])
        return (h_family if family == "H" else q_family)(p, max_degree=md)
    if family in ("h", "g"):
        p = DiscreteParams(s["mu"], s["nu"], s["alpha_sq"], s["beta"])
        return hd_family(p, kind=family, max_degree=md)
    if family == "G":
        return g_family(DiscreteParams(s["mu"], s["nu"], s["alpha_sq"], s["beta"]), max_degree=md)
    if family == "jacobi":
        return jacobi_classical(s["mu"], s["nu"])
    if family == "laguerre":
        return laguerre_classical(s["gamma"])
    if family == "deformed-wilson":
        return deformed_wilson(WilsonDeformSpec(**{k: s[k] for k in FAMILY_KEYS[family]}))
    return deformed_chahn(CHahnDeformSpec(**{k: s[k] for k in FAMILY_KEYS[family]}))
