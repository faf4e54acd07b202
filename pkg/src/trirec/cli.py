"""Command-line interface: ``trirec <command> [options]``.

Exit status is 0 on success, 2 for invalid input (a JSON error object is
written to stderr) and 1 for numerical failures or a failing verify suite.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import __version__
from .asymptotics import DEFAULT_WINDOW, amplitude_scan, envelope, window_log2_amplitude
from .errors import NumericalError, ParameterError, TrirecError
from .families import (
    COMPLEX_FAMILIES,
    DeformParams,
    FAMILY_KEYS,
    deform,
    from_spec,
    normalize_spec,
)
from .physics import PotentialSpec, bound_count_for, map_potential, validate_constraints
from .recursion import evaluate_complex, evaluate_sequence
from .spectral import classify_spectrum, gauss_quadrature, build_jacobi, truncated_spectrum, zeros
from .verify import SUITES

COMMANDS = ("eval", "zeros", "quad", "spectrum", "asymp", "deform", "physics", "verify")


class UsageError(ParameterError):
    pass


@dataclass
class RunConfig:
    command: str
    family: dict | None = None
    potential: dict | None = None
    suite: str | None = None
    n: int | None = None
    n2: int | None = None
    x: float | None = None
    window: tuple[int, int] | None = None
    grid: tuple[float, float, int] | None = None
    sweep_param: str | None = None
    tol: float | None = None
    lam: float | None = None
    sigma: float | None = None
    alpha_sq: float | None = None
    format: str = "csv"
    out: str | None = None

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.format not in ("csv", "json"):
            raise UsageError("format must be csv or json")
        if self.tol is not None and not self.tol > 0:
            raise UsageError("tolerance must be positive")
        if self.grid is not None:
            lo, hi, count = self.grid
            if not lo < hi or count < 1:
                raise UsageError("grid needs lo < hi and count >= 1")
        if self.window is not None and not 1 <= self.window[0] < self.window[1]:
            raise UsageError("window needs 1 <= lo < hi")
        if self.n is not None and self.n < 0:
            raise UsageError("--n must be non-negative")
        if self.family is not None:
            self.family = normalize_spec(self.family)
        if self.potential is not None:
            self.potential = PotentialSpec.from_dict(self.potential).to_dict()
        if self.sweep_param is not None:
            if self.family is None or self.sweep_param not in FAMILY_KEYS[self.family["family"]]:
                raise UsageError(f"cannot sweep {self.sweep_param!r} for this family")
            if self.grid is None:
                raise UsageError("--sweep-param needs --grid")
        return self

    def to_json(self) -> dict:
        d = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None or f.name == "out":
                continue
            d[f.name] = list(v) if isinstance(v, tuple) else v
        return d

    @classmethod
    def from_json(cls, d: dict) -> "RunConfig":
        if not isinstance(d, dict) or "command" not in d:
            raise UsageError("config must be an object with a 'command'")
        names = {f.name for f in fields(cls)}
        extra = sorted(set(d) - names)
        if extra:
            raise UsageError(f"unknown config keys: {extra}")
        kw = dict(d)
        for key, n in (("window", 2), ("grid", 3)):
            if kw.get(key) is not None:
                v = kw[key]
                if not isinstance(v, list) or len(v) != n:
                    raise UsageError(f"{key} must be a list of {n} numbers")
                kw[key] = (int(v[0]), int(v[1])) if key == "window" else (float(v[0]), float(v[1]), int(v[2]))
        return cls(**kw).validate()


# -- formatting -----------------------------------------------------------------

def fmt_number(v) -> str:
    """Shortest round-trip decimal for reals; plain text otherwise."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else fmt_number(v)
    return v


def dump_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, allow_nan=False) + "\n"


@dataclass
class Table:
    columns: list[str]
    rows: list[list] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def render(self, fmt: str) -> str:
        if fmt == "json":
            body = dict(self.meta)
            body["rows"] = [dict(zip(self.columns, r)) for r in self.rows]
            return dump_json(body)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([fmt_number(v) for v in r])
        return buf.getvalue()


# -- helpers ----------------------------------------------------------------------

def _need(value, flag):
    if value is None:
        raise UsageError(f"{flag} is required for this command")
    return value


def _grid_points(grid) -> np.ndarray:
    lo, hi, count = grid
    return np.array([lo]) if count == 1 else np.linspace(lo, hi, count)


def _err_text(exc: Exception) -> str:
    return f"{type(exc).__name__}: {exc}"


def _real_recursion(spec: dict):
    if spec["family"] in COMPLEX_FAMILIES:
        raise UsageError(f"{spec['family']} has a complex spectral variable; only eval supports it")
    return from_spec(spec)


def _family_at(cfg: RunConfig, value: float) -> dict:
    spec = dict(cfg.family)
    spec[cfg.sweep_param] = float(value)
    return spec


# -- commands -------------------------------------------------------------------------

def cmd_eval(cfg: RunConfig) -> Table:
    fam = _need(cfg.family, "--family")
    N = _need(cfg.n, "--n")
    rec = from_spec(fam)
    complex_family = fam["family"] in COMPLEX_FAMILIES
    if cfg.grid is None:
        x = _need(cfg.x, "--x")
        if complex_family:
            mant, expo = evaluate_complex(rec, complex(fam["kappa"], x), N)
            return Table(["n", "value_re", "value_im", "exponent"],
                         [[n, float(m.real), float(m.imag), int(e)] for n, (m, e) in enumerate(zip(mant, expo))])
        seq = evaluate_sequence(rec, x, N)
        return Table(["n", "value", "exponent"],
                     [[n, float(m), int(e)] for n, (m, e) in enumerate(zip(seq.mantissa, seq.exponent))])
    if complex_family:
        raise UsageError("grid evaluation supports real families only")
    t = Table(["x", "value", "exponent", "error"])
    for x in _grid_points(cfg.grid):
        try:
            seq = evaluate_sequence(rec, float(x), N)
            t.rows.append([float(x), float(seq.mantissa[-1]), int(seq.exponent[-1]), None])
        except TrirecError as exc:
            t.rows.append([float(x), None, None, _err_text(exc)])
    return t


def cmd_zeros(cfg: RunConfig) -> Table:
    rec = _real_recursion(_need(cfg.family, "--family"))
    zs = zeros(rec, _need(cfg.n, "--n"))
    return Table(["k", "zero"], [[k, float(z)] for k, z in enumerate(zs)])


def cmd_quad(cfg: RunConfig) -> Table:
    rec = _real_recursion(_need(cfg.family, "--family"))
    N = _need(cfg.n, "--n")
    ts = truncated_spectrum(rec, N, weights=True)
    rule = gauss_quadrature(build_jacobi(rec, N)) if ts.definite else ts.rule()
    rows = [[k, float(x), float(w), float(lw), int(kd)]
            for k, (x, w, lw, kd) in enumerate(zip(rule.nodes, rule.weights, rule.log_weights, ts.kind))]
    return Table(["k", "node", "weight", "log_weight", "kind"], rows,
                 {"definite": bool(ts.definite), "mass": float(np.sum(rule.weights))})


def _spectrum_summary(rep) -> list:
    return [rep.predicted_count, rep.predicted_raw, rep.observed_count, rep.embedded_count]


def cmd_spectrum(cfg: RunConfig) -> Table:
    fam = _need(cfg.family, "--family")
    N1 = _need(cfg.n, "--n")
    N2 = cfg.n2 if cfg.n2 is not None else 2 * N1
    tol = cfg.tol if cfg.tol is not None else 1e-6
    _real_recursion(fam)
    if cfg.sweep_param is not None:
        t = Table([cfg.sweep_param, "predicted_count", "predicted_raw", "observed_count",
                   "embedded_count", "error"])
        for v in _grid_points(cfg.grid):
            try:
                rep = classify_spectrum(from_spec(_family_at(cfg, v)), N1, N2, tol)
                t.rows.append([float(v)] + _spectrum_summary(rep) + [None])
            except TrirecError as exc:
                t.rows.append([float(v), None, None, None, None, _err_text(exc)])
        return t
    rep = classify_spectrum(from_spec(fam), N1, N2, tol)
    rows = [["discrete", p.value, p.value, p.drift, p.gap] for p in rep.discrete_points]
    rows += [["support", lo, hi, None, None] for lo, hi in rep.continuous_support]
    meta = {"predicted_count": rep.predicted_count, "predicted_raw": rep.predicted_raw,
            "observed_count": rep.observed_count, "embedded_count": rep.embedded_count,
            "definite": rep.definite, "N1": N1, "N2": N2, "tol": tol}
    return Table(["kind", "lo", "hi", "drift", "gap"], rows, meta)


ASYMP_COLUMNS = ["log2_window_amplitude", "flagged", "amplitude", "log2_amplitude",
                 "frequency", "phase", "rms_residual", "error"]


def _asymp_row(rec, x, window) -> list:
    try:
        wa = float(window_log2_amplitude(rec, [x], window)[0])
    except TrirecError as exc:
        return [None, False, None, None, None, None, None, _err_text(exc)]
    try:
        fit = envelope(rec, x, window)
    except TrirecError as exc:
        return [wa, False, None, None, None, None, None, _err_text(exc)]
    return [wa, False, fit.amplitude, fit.log2_amplitude, fit.frequency, fit.phase,
            fit.rms_residual, None]


def cmd_asymp(cfg: RunConfig) -> Table:
    fam = _need(cfg.family, "--family")
    window = cfg.window or DEFAULT_WINDOW
    if fam["family"] in COMPLEX_FAMILIES:
        raise UsageError("asymptotics support real families only")
    if cfg.sweep_param is not None:
        x = _need(cfg.x, "--x")
        t = Table([cfg.sweep_param] + ASYMP_COLUMNS)
        for v in _grid_points(cfg.grid):
            try:
                rec = from_spec(_family_at(cfg, v))
            except TrirecError as exc:
                t.rows.append([float(v), None, False, None, None, None, None, None, _err_text(exc)])
                continue
            t.rows.append([float(v)] + _asymp_row(rec, x, window))
        return t
    rec = from_spec(fam)
    xs = _grid_points(cfg.grid) if cfg.grid is not None else np.array([_need(cfg.x, "--x")])
    t = Table(["x"] + ASYMP_COLUMNS)
    flags = {p.z: p.flagged for p in amplitude_scan(rec, xs, window)} if xs.size > 2 else {}
    for x in xs:
        row = _asymp_row(rec, float(x), window)
        row[1] = bool(flags.get(float(x), False))
        t.rows.append([float(x)] + row)
    return t


def cmd_deform(cfg: RunConfig) -> Table:
    rec = from_spec(_need(cfg.family, "--family"))
    N = _need(cfg.n, "--n")
    if cfg.lam is not None:
        d = DeformParams(cfg.lam, _need(cfg.sigma, "--sigma"), _need(cfg.alpha_sq, "--alpha-sq"))
        rec = deform(rec, d)
    diag, down, up = rec.coefficients(N)
    rows = [[n, float(a), float(b), float(c)] for n, (a, b, c) in enumerate(zip(diag, down, up))]
    meta = {k: v for k, v in rec.params.items() if k in ("lam", "sigma", "alpha_sq")}
    return Table(["n", "diag", "down", "up"], rows, meta)


def cmd_physics(cfg: RunConfig) -> Table:
    spec = PotentialSpec.from_dict(_need(cfg.potential, "--potential"))
    violations = validate_constraints(spec)
    mapped = map_potential(spec)
    bc = bound_count_for(mapped)
    record = dict(asdict(mapped))
    record.update(violations="; ".join(violations), bound_count=bc.count,
                  bound_count_alt=bc.alt_count, bound_count_reason=bc.reason)
    return Table(["field", "value"], [[k, v] for k, v in record.items()], {})


def cmd_verify(cfg: RunConfig) -> tuple[str, bool]:
    name = _need(cfg.suite, "suite name")
    names = list(SUITES) if name == "all" else [name]
    for n in names:
        if n not in SUITES:
            raise UsageError(f"unknown suite {n!r}; expected one of {sorted(SUITES)} or 'all'")
    results = [SUITES[n]() for n in names]
    ok = all(r.passed for r in results)
    if cfg.format == "json":
        text = dump_json({"passed": ok, "suites": [
            {"name": r.name, "passed": r.passed, "lines": r.lines} for r in results]})
    else:
        text = "".join(f"# {r.name}\n" + r.text() for r in results)
    return text, ok


HANDLERS = {"eval": cmd_eval, "zeros": cmd_zeros, "quad": cmd_quad, "spectrum": cmd_spectrum,
            "asymp": cmd_asymp, "deform": cmd_deform, "physics": cmd_physics}


def run(cfg: RunConfig) -> tuple[str, int]:
    """Execute a validated config; returns (output text, exit code)."""
    if cfg.command == "verify":
        text, ok = cmd_verify(cfg)
        return text, 0 if ok else 1
    if cfg.command == "physics":
        tbl = cmd_physics(cfg)
        if cfg.format == "json":
            return dump_json(dict(tbl.rows)), 0
        return tbl.render("csv"), 0
    return HANDLERS[cfg.command](cfg).render(cfg.format), 0


# -- argument parsing ---------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parse_json(text: str, what: str):
    if text.startswith("@"):
        try:
            with open(text[1:], encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read {what} file: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed {what} JSON: {exc}") from exc


def _parse_window(text: str):
    try:
        lo, hi = text.split(":")
        return int(lo), int(hi)
    except ValueError as exc:
        raise UsageError(f"window must be lo:hi, got {text!r}") from exc


def _parse_grid(text: str):
    try:
        lo, hi, count = text.split(":")
        return float(lo), float(hi), int(count)
    except ValueError as exc:
        raise UsageError(f"grid must be lo:hi:count, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="trirec", description="Three-term recursion families: evaluation, "
                "spectra, quadrature and large-n asymptotics.")
    p.add_argument("--version", action="version", version=f"trirec {__version__}")
    p.add_argument("command", nargs="?", choices=COMMANDS)
    p.add_argument("suite", nargs="?", help="suite name for verify (or 'all')")
    p.add_argument("--config", help="JSON run config file (as written by --emit-config)")
    p.add_argument("--family", help="family spec as JSON text or @file")
    p.add_argument("--potential", help="potential spec as JSON text or @file (physics)")
    p.add_argument("--n", type=int, help="degree or truncation size")
    p.add_argument("--n2", type=int, help="second truncation size for spectrum (default 2n)")
    p.add_argument("--x", "--z", dest="x", type=float, help="spectral point")
    p.add_argument("--window", help="fit window lo:hi (default 500:1000)")
    p.add_argument("--grid", help="sweep grid lo:hi:count; use --grid=-5:5:101 for negative lo")
    p.add_argument("--sweep-param", help="family key swept over --grid instead of x")
    p.add_argument("--tol", type=float, help="stability tolerance")
    p.add_argument("--lam", type=float, help="deformation strength (deform)")
    p.add_argument("--sigma", type=float, help="deformation shift (deform)")
    p.add_argument("--alpha-sq", type=float, help="deformation alpha^2 (deform)")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--emit-config", action="store_true", help="print the parsed config as JSON and exit")
    return p


def config_from_args(argv) -> tuple[RunConfig, bool]:
    ns = build_parser().parse_args(argv)
    if ns.config:
        cfg = RunConfig.from_json(_parse_json("@" + ns.config, "config"))
        if ns.out:
            cfg.out = ns.out
        if ns.format:
            cfg.format = ns.format
        return cfg, ns.emit_config
    if ns.command is None:
        raise UsageError("a command is required")
    if ns.suite is not None and ns.command != "verify":
        raise UsageError(f"unexpected argument {ns.suite!r}")
    cfg = RunConfig(
        command=ns.command,
        family=_parse_json(ns.family, "family") if ns.family else None,
        potential=_parse_json(ns.potential, "potential") if ns.potential else None,
        suite=ns.suite,
        n=ns.n,
        n2=ns.n2,
        x=ns.x,
        window=_parse_window(ns.window) if ns.window else None,
        grid=_parse_grid(ns.grid) if ns.grid else None,
        sweep_param=ns.sweep_param,
        tol=ns.tol,
        lam=ns.lam,
        sigma=ns.sigma,
        alpha_sq=ns.alpha_sq,
        format=ns.format or ("text" if ns.command == "verify" else "csv"),
        out=ns.out,
    )
    if cfg.command == "verify" and cfg.format == "text":
        cfg.format = "csv"
    return cfg.validate(), ns.emit_config


def _fail(exc: Exception, code: int) -> int:
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
    return code


def main(argv=None) -> int:
    try:
        cfg, emit = config_from_args(sys.argv[1:] if argv is None else argv)
        if emit:
            text, code = dump_json(cfg.to_json()), 0
        else:
            text, code = run(cfg)
    except ParameterError as exc:
        return _fail(exc, 2)
    except NumericalError as exc:
        return _fail(exc, 1)
    except TrirecError as exc:
        return _fail(exc, 1)
    if cfg.out and not emit:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
