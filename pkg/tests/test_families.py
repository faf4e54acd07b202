import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from trirec.errors import (
    BadD,
    BadR,
    DegenerateBeta,
    DegenerateTheta,
    ParameterError,
    ParamOutOfRange,
    SingularAn,
)
from trirec.families import (
    CHahnDeformSpec,
    DeformParams,
    DiscreteParams,
    FAMILY_KEYS,
    HParams,
    WilsonDeformSpec,
    bracket,
    chahn_classical,
    chahn_deform_params,
    deform,
    deformed_wilson,
    from_spec,
    g_family,
    h_family,
    hd_family,
    jacobi_classical,
    jacobi_pieces,
    laguerre_classical,
    normalize_spec,
    q_family,
    solve_deformation,
    wilson_classical,
    wilson_deform_params,
)
from trirec.recursion import evaluate_complex, evaluate_sequence


def values(rec, x, N):
    return evaluate_sequence(rec, x, N).to_float()


def test_h_first_coefficients():
    rec = h_family(HParams(0.0, 0.0, 0.0, math.pi / 2))
    d, dn, up = rec.coefficients(2)
    assert abs(d[0]) < 1e-15
    assert values(rec, 1.0, 1)[1] == pytest.approx(-0.25, rel=1e-14)


def test_h_at_origin_is_jacobi():
    rec = h_family(HParams(1.0, 0.0, -0.3, math.acos(0.5)))
    assert values(rec, 0.0, 1)[1] == pytest.approx(1.25, rel=1e-14)
    ref = values(jacobi_classical(1.0, 0.0), 0.5, 50)
    np.testing.assert_allclose(values(rec, 0.0, 50), ref, rtol=1e-12)


def test_hd_diag_example():
    rec = hd_family(DiscreteParams(0.0, 0.0, 0.0, 0.5))
    assert rec.coefficients(1).diag[0] == pytest.approx(20.0 / 3.0, rel=1e-15)


def test_q_first_degree():
    # Q_1 = (cos - B_0 - z sin / A_0) / c_0 with B_0 = 0, c_0 = 1, A_0 = 1.25
    rec = q_family(HParams(0.0, 0.0, -1.0, math.pi / 2))
    assert values(rec, 1.0, 1)[1] == pytest.approx(-0.8, rel=1e-14)


def test_jacobi_examples():
    assert values(jacobi_classical(1.0, 0.0), 0.5, 1)[1] == pytest.approx(1.25)
    np.testing.assert_allclose(values(jacobi_classical(0.0, 0.0), 1.0, 20), 1.0, rtol=1e-13)


def test_jacobi_against_scipy():
    from scipy.special import eval_jacobi

    for mu, nu, x in [(0.5, -0.5, 0.3), (2.0, 1.5, -0.8), (-0.7, 0.2, 0.99)]:
        n = np.arange(31)
        np.testing.assert_allclose(values(jacobi_classical(mu, nu), x, 30),
                                   eval_jacobi(n, mu, nu, x), rtol=1e-12)


def test_laguerre_examples():
    d, dn, up = laguerre_classical(0.0).coefficients(1)
    assert d[0] == 1.0
    d, dn, up = laguerre_classical(2.0).coefficients(4)
    assert (d[3], dn[3], up[3]) == (9.0, -5.0, -4.0)


def test_guards():
    with pytest.raises(DegenerateTheta):
        h_family(HParams(0.0, 0.0, -1.0, math.pi))
    with pytest.raises(ParamOutOfRange):
        h_family(HParams(0.0, 0.0, -1.0, 0.0))
    with pytest.raises(DegenerateBeta):
        hd_family(DiscreteParams(0.0, 0.0, -1.0, 1.0 - 1e-7))
    with pytest.raises(ParamOutOfRange):
        hd_family(DiscreteParams(0.0, 0.0, 1.0, 0.5), kind="h")
    with pytest.raises(ParamOutOfRange):
        hd_family(DiscreteParams(0.0, 0.0, -1.0, 0.5), kind="g")
    with pytest.raises(ParamOutOfRange):
        jacobi_classical(-1.0, 0.0)
    with pytest.raises(SingularAn) as info:
        h_family(HParams(0.0, 0.0, 2.25, 1.0))
    assert info.value.n == 1


def test_hd_theta_limit_diverges():
    diags = [hd_family(DiscreteParams(0.0, 0.0, -1.0, math.exp(-t))).coefficients(1).diag[0]
             for t in (1e-1, 1e-2, 1e-3)]
    assert diags[0] < diags[1] < diags[2]


def test_mu_nu_exchange():
    n = np.arange(30)
    B1, b1, c1 = jacobi_pieces(0.3, 1.7, n)
    B2, b2, c2 = jacobi_pieces(1.7, 0.3, n)
    np.testing.assert_allclose(B1, -B2, rtol=1e-15)
    np.testing.assert_allclose(b1, b2, rtol=1e-15)
    np.testing.assert_allclose(c1, c2, rtol=1e-15)


def test_q_over_h_diag_is_bracket_squared():
    p = HParams(0.7, 0.7, -0.4, 1.1)
    N = 40
    ratio = q_family(p).coefficients(N).diag / h_family(p).coefficients(N).diag
    np.testing.assert_allclose(ratio, bracket(1.2, -0.4, np.arange(N)) ** 2, rtol=1e-13)


def test_g_and_hd_share_structure():
    p = DiscreteParams(0.5, 0.5, 7.29, 0.5)
    N = 30
    A = bracket(1.0, 7.29, np.arange(N))
    g = hd_family(p, kind="g").coefficients(N)
    G = g_family(p).coefficients(N)
    np.testing.assert_allclose(G.diag, g.diag * A**2, rtol=1e-13)
    np.testing.assert_allclose(G.up, g.up * A**2, rtol=1e-13)


def test_deform_zero_is_identity():
    base = laguerre_classical(0.5)
    out = deform(base, DeformParams(0.0, 0.7, 0.3))
    for a, b in zip(base.coefficients(50), out.coefficients(50)):
        assert a.tobytes() == b.tobytes()


def test_deform_shift_example():
    base = jacobi_classical(0.0, 0.0)
    out = deform(base, DeformParams(1.0, 0.5, 0.0))
    assert out.coefficients(3).diag[2] - base.coefficients(3).diag[2] == pytest.approx(6.25)


@settings(max_examples=30, deadline=None)
@given(st.floats(-0.9, 3.0), st.floats(-0.9, 3.0), st.floats(-3.0, 0.0),
       st.floats(0.1, 3.0), st.floats(-4.0, 4.0))
def test_deformed_jacobi_is_h(mu, nu, alpha_sq, theta, z):
    # x P = (B + lam A) P + b P_- + c P_+ at x = cos(theta), lam = z sin(theta)
    base = jacobi_classical(mu, nu)
    sigma = 0.5 * (mu + nu + 1.0)
    solved = solve_deformation(base, sigma, alpha_sq, math.cos(theta), math.sin(theta))
    ref = h_family(HParams(mu, nu, alpha_sq, theta))
    N = 60
    for a, b in zip(solved.coefficients(N), ref.coefficients(N)):
        np.testing.assert_allclose(a, b, rtol=1e-14, atol=1e-300)
    np.testing.assert_allclose(values(solved, z, N), values(ref, z, N), rtol=1e-11)


def test_deform_param_examples():
    d = wilson_deform_params(WilsonDeformSpec(0.5, 0.5, 0.5, 0.5, 2.0))
    assert (d.lam, d.sigma, d.alpha_sq) == (-2.0, 0.5, -0.75)
    d = chahn_deform_params(CHahnDeformSpec(0.5, 0.5, 0.5, 0.5, 1.0, 1, 1.0, 1.0, 1.0, 1.0))
    assert (d.lam, d.alpha_sq) == (1.0, 0.0)
    with pytest.raises(BadR):
        wilson_deform_params(WilsonDeformSpec(0.5, 0.5, 0.5, 0.5, 1.0))
    with pytest.raises(BadD):
        chahn_deform_params(CHahnDeformSpec(0.5, 0.5, 0.5, 0.5, 0.0, 1, 1.0, 1.0, 1.0, 1.0))


def wilson_oracle(a, b, c, d, z, n):
    with mpmath.workdps(40):
        iz = mpmath.mpc(0, z)
        w = mpmath.hyper([-n, n + a + b + c + d - 1, a + iz, a - iz], [a + b, a + c, a + d], 1)
        return float(w.real)


def test_wilson_against_hypergeometric():
    a, b, c, d = 0.3, 0.7, 1.1, 0.4
    rec = wilson_classical(a, b, c, d)
    for z in (0.2, 1.3):
        got = values(rec, z * z, 12)
        want = [wilson_oracle(a, b, c, d, z, n) for n in range(13)]
        np.testing.assert_allclose(got, want, rtol=1e-11)


def test_chahn_against_hypergeometric():
    a, b, c, d = 0.6, 0.8, 0.6, 0.8
    rec = chahn_classical(a, b, c, d)
    for x in (0.4, -1.1):
        mant, expo = evaluate_complex(rec, complex(a, x), 12)
        got = mant * 2.0**expo
        with mpmath.workdps(40):
            want = [complex(mpmath.hyper([-n, n + a + b + c + d - 1, mpmath.mpc(a, x)],
                                         [a + c, a + d], 1)) for n in range(13)]
        np.testing.assert_allclose(got, want, rtol=1e-11)


def test_deformed_wilson_reduces_to_shifted_diag():
    s = WilsonDeformSpec(0.5, 0.6, 0.7, 0.8, 0.5)
    base = wilson_classical(0.5, 0.6, 0.7, 0.8).coefficients(20)
    got = deformed_wilson(s).coefficients(20)
    d = wilson_deform_params(s)
    np.testing.assert_allclose(got.diag - base.diag,
                               d.lam * bracket(d.sigma, d.alpha_sq, np.arange(20)), rtol=1e-12)
    assert got.up.tobytes() == base.up.tobytes()


def test_spec_round_trip_every_family():
    specs = [
        {"family": "H", "mu": 0, "nu": 0.5, "alpha_sq": -1, "theta": 1.0},
        {"family": "Q", "mu": 0, "nu": 0.5, "alpha_sq": -1, "theta": 1.0},
        {"family": "h", "mu": 0, "nu": 0.5, "alpha_sq": -1, "beta": 0.4},
        {"family": "g", "mu": 0, "nu": 0.5, "alpha_sq": 9, "beta": 0.4},
        {"family": "G", "mu": 0, "nu": 0.5, "alpha_sq": 9, "beta": 0.4},
        {"family": "jacobi", "mu": 0, "nu": 0.5},
        {"family": "laguerre", "gamma": 0.5},
        {"family": "deformed-wilson", "kappa": 0.5, "tau": 0.5, "eta": 0.5, "xi": 0.5, "r": 2},
        {"family": "deformed-chahn", "kappa": 0.5, "tau": 0.5, "eta": 0.5, "xi": 0.5, "d": 1,
         "sign": -1, "a": 1, "b": 1, "c": 1, "D": 1},
    ]
    assert {s["family"] for s in specs} == set(FAMILY_KEYS)
    for s in specs:
        norm = normalize_spec(s)
        assert normalize_spec(norm) == norm
        from_spec(norm).coefficients(10)


@pytest.mark.parametrize("spec", [
    [],
    {"family": "X"},
    {"family": "H", "mu": 0, "nu": 0, "alpha_sq": 0},
    {"family": "H", "mu": 0, "nu": 0, "alpha_sq": 0, "theta": 1, "beta": 0.5},
    {"family": "H", "mu": "0", "nu": 0, "alpha_sq": 0, "theta": 1},
    {"family": "jacobi", "mu": True, "nu": 0},
])
def test_spec_rejects(spec):
    with pytest.raises(ParameterError):
        normalize_spec(spec)
