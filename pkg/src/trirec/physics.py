"""Potential parameters to polynomial parameters for the five tabulated potentials.

Rows (top to bottom):

1. V0 + (V+ - V- sin(pi x/L)) / cos^2(pi x/L) + V1 sin(pi x/L) on |x| <= L/2
2. (1/4)/(1 - (x/L)^2) {2V0 + V+/(x/L)^2 + V-/(1 - (x/L)^2) + 4V1[(x/L)^2 - 1/2]}
3. [V0 + V1(1 - 2e^{-lx}) + (V+/2)/(1 - e^{-lx})] / (e^{lx} - 1)
4. V+/sinh^2(lx) + 2[V0 + V1(2 tanh^2(lx) - 1)]/cosh^2(lx)
5. [V0 + V1 tanh(lx)] / cosh^2(lx)

Dimensionless inputs are u_i = 2 V_i / eta^2 and eps = 2 E / eta^2.  The
alpha column is reported under two readings: the tabulated value taken as
alpha^2 (``alpha_sq``) and the tabulated value squared (``alpha_sq_alt``).
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

from .errors import (
    ConstraintViolation,
    MissingEnergy,
    ParameterError,
    UnknownRow,
    UnrealizableParams,
)
from .families import DiscreteParams, HParams, h_family, hd_family
from .recursion import StandardRecursion
from .spectral import predicted_bound_count

ROWS = (1, 2, 3, 4, 5)


@dataclass(frozen=True)
class PotentialSpec:
    row: int
    V0: float = 0.0
    V1: float = 0.0
    Vplus: float = 0.0
    Vminus: float = 0.0
    scale: float = 1.0
    E: float | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "PotentialSpec":
        if not isinstance(d, dict):
            raise ParameterError("potential spec must be a JSON object")
        known = {"row", "V0", "V1", "Vplus", "Vminus", "scale", "E"}
        extra = sorted(set(d) - known)
        if extra:
            raise ParameterError(f"unexpected potential keys: {extra}")
        if "row" not in d:
            raise ParameterError("potential spec needs 'row'")
        row = d["row"]
        if isinstance(row, bool) or not isinstance(row, int):
            raise UnknownRow(f"row must be an integer 1-5, got {row!r}")
        vals = {}
        for k in ("V0", "V1", "Vplus", "Vminus", "scale", "E"):
            if k in d and d[k] is not None:
                v = d[k]
                if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                    raise ParameterError(f"{k!r} must be a finite number")
                vals[k] = float(v)
        return cls(row=row, **vals)

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


@dataclass(frozen=True)
class MappedFamily:
    """Polynomial parameters for one potential.

    Entries that need the energy are None when ``eps`` is None.  ``z`` is the
    tabulated spectral point when it is real and computable.
    """

    family: str
    mu_sq: float | None
    nu_sq: float | None
    alpha_sq: float
    alpha_sq_alt: float
    eta: float
    u0: float = 0.0
    u1: float = 0.0
    uplus: float = 0.0
    uminus: float = 0.0
    eps: float | None = None
    cos_theta: float | None = None
    cosh_theta: float | None = None
    z: float | None = None
    row: int | None = None

    @classmethod
    def synthetic(cls, family: str, mu_sq: float, nu_sq: float, alpha_sq: float,
                  beta: float = 0.5) -> "MappedFamily":
        """A mapping not tied to a table row (alpha_sq_alt mirrors alpha_sq)."""
        return cls(family, mu_sq, nu_sq, alpha_sq, alpha_sq, 1.0,
                   cosh_theta=math.cosh(-math.log(beta)) if family != "H" else None,
                   cos_theta=0.0 if family == "H" else None)

    def to_recursion(self, reading: str = "table", **kwargs) -> StandardRecursion:
        """The families-module recursion with mu = sqrt(mu_sq), nu = sqrt(nu_sq)."""
        if self.mu_sq is None or self.nu_sq is None:
            raise MissingEnergy("mu^2 or nu^2 depends on the energy; supply E")
        if self.mu_sq < 0.0 or self.nu_sq < 0.0:
            raise UnrealizableParams("negative mu^2 or nu^2 gives complex mu or nu")
        if reading not in ("table", "squared"):
            raise ParameterError("reading must be 'table' or 'squared'")
        a2 = self.alpha_sq if reading == "table" else self.alpha_sq_alt
        mu, nu = math.sqrt(self.mu_sq), math.sqrt(self.nu_sq)
        if self.family == "H":
            return h_family(HParams(mu, nu, a2, math.acos(self.cos_theta)), **kwargs)
        beta = math.exp(-math.acosh(self.cosh_theta))
        return hd_family(DiscreteParams(mu, nu, a2, beta), **kwargs)


def _check_row(p: PotentialSpec):
    if isinstance(p.row, bool) or p.row not in ROWS:
        raise UnknownRow(f"unknown row {p.row!r}; expected 1-5")
    if not p.scale > 0.0:
        raise ParameterError("scale must be positive")


def eta_for(row: int, scale: float) -> float:
    if row == 1:
        return math.pi / scale
    if row == 2:
        return 2.0 * math.sqrt(2.0) / scale
    if row == 4:
        return math.sqrt(2.0) * scale
    return scale


def validate_constraints(p: PotentialSpec) -> list[str]:
    """Violated row inequalities, as readable strings (empty when all hold)."""
    _check_row(p)
    L = lam = p.scale
    out = []
    if p.row == 1:
        bound = -2.0 * (math.pi / (4.0 * L)) ** 2
        if p.Vplus + p.Vminus < bound:
            out.append(f"V+ + V- >= {bound!r} violated")
        if p.Vplus - p.Vminus < bound:
            out.append(f"V+ - V- >= {bound!r} violated")
    elif p.row == 2:
        if p.Vplus < -1.0 / (2.0 * L * L):
            out.append(f"V+ >= {-1.0 / (2.0 * L * L)!r} violated")
        if p.Vminus < -2.0 / (L * L):
            out.append(f"V- >= {-2.0 / (L * L)!r} violated")
    elif p.row == 3:
        if p.Vplus < -(lam / 2.0) ** 2:
            out.append(f"V+ >= {-(lam / 2.0) ** 2!r} violated")
    elif p.row == 4:
        if p.Vplus < -lam * lam / 8.0:
            out.append(f"V+ >= {-lam * lam / 8.0!r} violated")
    return out


def map_potential(p: PotentialSpec) -> MappedFamily:
    """Fill the row's polynomial parameters from the potential parameters."""
    bad = validate_constraints(p)
    if bad:
        raise ConstraintViolation(bad)
    eta = eta_for(p.row, p.scale)
    k = 2.0 / (eta * eta)
    u0, u1, up, um = k * p.V0, k * p.V1, k * p.Vplus, k * p.Vminus
    eps = None if p.E is None else k * p.E
    common = dict(eta=eta, u0=u0, u1=u1, uplus=up, uminus=um, eps=eps, row=p.row)

    if p.row in (1, 2):
        if eps is None:
            raise MissingEnergy("rows 1 and 2 need E: cosh(theta) depends on the energy")
        if p.row == 1:
            if u1 == 0.0:
                raise UnrealizableParams("u1 = 0 makes cosh(theta) undefined")
            ch = eps / u1
            alpha_col = u0
            mu_sq, nu_sq = 0.25 + up - um, 0.25 + up + um
        else:
            if eps + u1 == 0.0:
                raise UnrealizableParams("eps + u1 = 0 makes cosh(theta) undefined")
            ch = (eps - u1) / (eps + u1)
            alpha_col = u0 - u1 - 1.0 / 16.0
            mu_sq, nu_sq = 1.0 + 2.0 * um, 0.25 + 2.0 * up
        if not ch > 1.0:
            raise UnrealizableParams(f"cosh(theta) = {ch!r} is not above 1")
        if p.row == 1:
            z = 1.0 / math.sqrt(eps * eps - u1 * u1)
        else:
            if -u1 * eps < 0.0:
                raise UnrealizableParams("-u1 * eps is negative")
            z = 2.0 * math.sqrt(-u1 * eps)
        return MappedFamily("h", mu_sq, nu_sq, alpha_col, alpha_col**2,
                            cosh_theta=ch, z=z, **common)

    if u1 == 0.0:
        raise UnrealizableParams("u1 = 0 makes -u0/u1 undefined")
    r = -u0 / u1 + 0.0
    alpha_col = {3: 0.0, 4: -1.0 / 16.0, 5: -0.25}[p.row]
    if p.row == 3:
        mu_sq = None if eps is None else -4.0 * eps
        nu_sq = 1.0 + 2.0 * up
    elif p.row == 4:
        mu_sq = None if eps is None else -eps
        nu_sq = 0.25 + up
    else:
        mu_sq = nu_sq = None if eps is None else -eps
    if -1.0 < r < 1.0:
        num = 2.0 if p.row == 4 else 1.0
        z = num / math.sqrt(u1 * u1 - u0 * u0)
        return MappedFamily("H", mu_sq, nu_sq, alpha_col, alpha_col**2,
                            cos_theta=r, z=z, **common)
    if r > 1.0:
        return MappedFamily("g", mu_sq, nu_sq, alpha_col, alpha_col**2,
                            cosh_theta=r, **common)
    raise UnrealizableParams(f"-u0/u1 = {r!r} is neither a cosine nor a cosh above 1")


class BoundCount(NamedTuple):
    count: int | None
    reason: str
    alt_count: int | None = None


def bound_count_for(p: PotentialSpec | MappedFamily) -> BoundCount:
    """Predicted bound-state count, with the reason when there is none.

    ``count`` uses the tabulated alpha column as alpha^2; ``alt_count`` the
    squared reading.
    """
    m = p if isinstance(p, MappedFamily) else map_potential(p)
    if m.row in (1, 2):
        return BoundCount(None, "mapping only: cosh(theta) depends on the energy")
    if not (m.alpha_sq > 0.0 or m.alpha_sq_alt > 0.0):
        return BoundCount(None, "no positive alpha")
    if m.mu_sq is None or m.nu_sq is None:
        return BoundCount(None, "energy-dependent parameters")
    if m.mu_sq < 0.0 or m.nu_sq < 0.0:
        return BoundCount(None, "complex mu or nu")
    mu, nu = math.sqrt(m.mu_sq), math.sqrt(m.nu_sq)
    count = predicted_bound_count(m.alpha_sq, mu, nu)
    alt = predicted_bound_count(m.alpha_sq_alt, mu, nu)
    if count is not None:
        reason = "ok"
    elif m.alpha_sq > 0.0:
        reason = "alpha below threshold"
    else:
        reason = "no positive alpha under the tabulated reading"
    return BoundCount(count, reason, alt)
