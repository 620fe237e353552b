import math

import numpy as np
import pytest
from scipy.special import erf

from l1robust import exponents as ex
from l1robust import specfun as sf
from l1robust.errors import ParameterError
from l1robust.exponents import Mode, NetExponentParams
from l1robust.polytope_geometry import FaceSpec, external_angle, internal_angle

from . import oracles as orc

MU = math.sqrt(2.0 / math.pi)
P_C2 = NetExponentParams(0.0265 / 0.5555, 0.5555, 2.0, Mode.STRONG)


def _params(rho=0.05, delta=0.5, c=2.0, mode=Mode.STRONG):
    return NetExponentParams(rho, delta, c, mode)


# -- parameter types ------------------------------------------------------

@pytest.mark.parametrize("kw", [
    dict(rho=0.0, delta=0.5, c_factor=1.0),
    dict(rho=1.0, delta=0.5, c_factor=1.0),
    dict(rho=0.1, delta=1.0, c_factor=1.0),
    dict(rho=0.1, delta=0.5, c_factor=0.9),
    dict(rho=math.nan, delta=0.5, c_factor=1.0),
])
def test_params_reject_invalid(kw):
    with pytest.raises(ParameterError):
        NetExponentParams(**kw)


def test_params_mode_parsing():
    assert NetExponentParams(0.1, 0.5, 1.0, "Weak").mode is Mode.WEAK
    with pytest.raises(ParameterError):
        NetExponentParams(0.1, 0.5, 1.0, "medium")


def test_gamma_prime_formula():
    p = _params(0.07, 0.6, 3.0)
    for nu in (0.6, 0.75, 1.0):
        z = 0.07 * 0.6
        expect = z / ((9.0 - 1.0) / 9.0 * z + nu / 9.0)
        assert abs(ex.gamma_prime(nu, p) - expect) < 1e-12
        assert ex.nu_prime(nu, p) == pytest.approx(8.0 * z + nu, abs=1e-15)


# -- external saddle point --------------------------------------------------

def test_x_nu_forward_oracle():
    g1 = 2.0 / math.sqrt(math.pi) * math.exp(-1.0)
    rhs = 2.0 * orc.erf_mp(1.0) / g1
    # choose nu, nu' with (1 - nu)/nu' = rhs
    nu = 0.5
    x = ex.solve_x_nu(nu, (1.0 - nu) / rhs)
    assert abs(x - 1.0) < 1e-8


@pytest.mark.parametrize("nu,npr", [(0.1, 0.2), (0.5, 0.5), (0.9, 1.3), (0.999, 0.999)])
def test_x_nu_residual(nu, npr):
    x = ex.solve_x_nu(nu, npr)
    lhs = 2.0 * x * erf(x) / (2.0 / math.sqrt(math.pi) * math.exp(-x * x))
    rhs = (1.0 - nu) / npr
    assert abs(lhs - rhs) < 1e-9 * (1.0 + rhs)


def test_x_nu_endpoint_and_monotone():
    assert ex.solve_x_nu(1.0, 0.5) == 0.0
    assert ex.solve_x_nu(0.3, 0.3) > ex.solve_x_nu(0.9, 0.9)
    assert ex.solve_x_nu(1.0 - 1e-9, 1.0) < 1e-4
    p = _params(0.05, 0.4, 2.0)
    nus = np.linspace(0.4, 1.0 - 1e-6, 100)
    xs = [ex.solve_x_nu(v, ex.nu_prime(v, p)) for v in nus]
    assert all(b < a for a, b in zip(xs, xs[1:]))


def test_x_nu_rejects_bad_input():
    with pytest.raises(ParameterError):
        ex.solve_x_nu(0.0, 0.5)
    with pytest.raises(ParameterError):
        ex.solve_x_nu(0.5, 0.0)


# -- psi_ext ------------------------------------------------------------------

def test_psi_ext_endpoint_and_sign():
    p = _params(0.05, 0.5, 2.0)
    assert ex.psi_ext(1.0, p) == 0.0
    assert ex.psi_ext(ex.NU_TOP, p) < 1e-3
    for nu in np.linspace(0.5, 1.0, 60):
        assert ex.psi_ext(float(nu), p) >= 0.0


def test_psi_ext_domain():
    with pytest.raises(ParameterError):
        ex.psi_ext(0.4, _params(0.05, 0.5))


def test_psi_ext_is_minimised_laplace_exponent():
    p = _params(0.05, 0.5, 2.0)
    nu = 0.7
    npr = ex.nu_prime(nu, p)
    xs = np.linspace(1e-4, 4.0, 200001)
    vals = npr * xs ** 2 - (1 - nu) * np.log(erf(xs))
    assert ex.psi_ext(nu, p) == pytest.approx(vals.min(), abs=1e-8)


def test_psi_ext_small_nu_asymptotics():
    nu = 1e-4
    p = NetExponentParams(1e-6 / nu, nu, 1.0)
    lead = nu * math.log(1 / nu) - 0.5 * nu * math.log(math.log(1 / nu))
    assert ex.psi_ext(nu, p) / lead == pytest.approx(1.0, abs=0.15)


def test_psi_ext_matches_external_angle_quadrature():
    # n = 400, k = 20, l = 222, C = 2
    n, k, l = 400, 20, 222
    p = NetExponentParams(k / l, l / n, 2.0)
    ang = external_angle(FaceSpec(n, k, l, 2.0))
    assert ang.log_value == pytest.approx(orc.LOG_EXT_400_20_222_C2, abs=1e-6)
    assert abs(-ang.log_value / n - ex.psi_ext(l / n, p)) < 0.01


def test_laplace_curvature_matches_finite_difference():
    p = _params(0.06, 0.5, 2.0)
    for nu in (0.5, 0.7, 0.95):
        npr = ex.nu_prime(nu, p)
        x = ex.solve_x_nu(nu, npr)

        def f(t):
            return npr * t * t - (1 - nu) * sf.log_half_normal_cdf(t)
        h = 1e-4
        fd = (f(x + h) - 2 * f(x) + f(x - h)) / (h * h)
        assert ex.laplace_curvature(nu, p) == pytest.approx(fd, rel=1e-5)


def test_laplace_curvature_lower_bound():
    for c in (1.0, 2.0, 5.0):
        p = _params(0.04, 0.45, c)
        for nu in np.linspace(0.45, 1.0 - 1e-6, 50):
            nu = float(nu)
            assert ex.laplace_curvature(nu, p) >= 2 * ex.nu_prime(nu, p) >= 2 * p.delta


# -- internal exponent -----------------------------------------------------

def _xi(y, g):
    return (1 - g) / g * y * y / 2 + sf.rate_function(y).lambda_star


def test_minimize_xi_frozen_values():
    y, xi = ex.minimize_xi(0.3)
    assert xi == pytest.approx(orc.XI_MIN_03, abs=1e-10)
    assert y == pytest.approx(orc.Y_MIN_03, abs=1e-8)
    assert ex.minimize_xi(0.1)[1] == pytest.approx(orc.XI_MIN_01, abs=1e-10)


def test_minimize_xi_grid_oracle():
    g = 0.3
    ys = np.arange(1e-5, MU, 1e-5)
    # dense grid on the closed form Lambda*(y) = s y - Lambda(s)
    best = min(_xi(float(v), g) for v in ys[(ys > 0.45) & (ys < 0.55)])
    assert ex.minimize_xi(g)[1] == pytest.approx(best, abs=1e-7)


@pytest.mark.parametrize("g", [1e-4, 0.05, 0.3, 0.7, 0.99])
def test_minimize_xi_stationarity(g):
    y, xi, s = ex.minimize_xi_dual(g)
    assert (1 - g) / g * y == pytest.approx(-s, abs=1e-7 * max(1.0, abs(s)))
    r = sf.rate_function(y)
    assert abs((1 - g) / g * y + r.s) < 1e-7 * max(1.0, abs(r.s))
    assert xi == pytest.approx(_xi(y, g), abs=1e-12)


def test_minimize_xi_limits():
    assert ex.minimize_xi(1.0) == (MU, 0.0)
    with pytest.raises(ParameterError):
        ex.minimize_xi(0.0)
    g = 1e-6
    ratio = ex.minimize_xi(g)[1] / (0.5 * math.log((1 - g) / g))
    assert 0.8 < ratio < 1.2


@pytest.mark.parametrize("g", [0.1, 0.5, 0.9])
def test_xi_convex(g):
    ys = np.linspace(0.01, MU - 0.01, 300)
    vals = np.array([_xi(float(v), g) for v in ys])
    assert np.diff(vals, 2).min() > 0.0


def test_psi_int_endpoint_and_domain():
    p = _params(0.05, 0.5, 2.0)
    assert ex.psi_int(p.zeta, p) == 0.0
    with pytest.raises(ParameterError):
        ex.psi_int(p.zeta / 2, p)


def test_psi_int_small_rho_lower_bound():
    p = NetExponentParams(1e-3, 0.5, 2.0)
    nu = p.delta
    g = ex.gamma_prime(nu, p)
    eta = 0.1
    bound = (0.5 * math.log((1 - g) / g) * (1 - eta) + math.log(2)) * (nu - p.zeta)
    assert ex.psi_int(nu, p) >= bound


def test_psi_int_matches_internal_angle_estimate():
    # n = 300, k = 6, l = 60, C = 1
    n, k, l = 300, 6, 60
    p = NetExponentParams(k / l, l / n, 1.0)
    est = internal_angle(FaceSpec(n, k, l, 1.0), samples=1_000_000, seed=11)
    assert abs(-est.log_value / n - ex.psi_int(l / n, p)) < 0.02


# -- combinatorial and net exponent -----------------------------------------

def test_psi_com_stirling_oracle():
    n, k, l = 2000, 100, 800
    p = NetExponentParams(k / l, l / n, 1.0)
    assert orc.log_face_count_com(n, k, l) == pytest.approx(orc.COM_2000_100_800, abs=1e-12)
    assert abs(ex.psi_com(l / n, p) - orc.COM_2000_100_800) < 0.01


def test_psi_com_limits():
    p = NetExponentParams(0.05, 1.0 - 1e-12, 1.0)
    assert ex.psi_com(1.0, p) == pytest.approx(math.log(2) + sf.binary_entropy(p.zeta), abs=1e-12)
    tiny = NetExponentParams(1e-12, 0.5, 1.0)
    for nu in (0.5, 0.8):
        assert ex.psi_com(nu, tiny) == pytest.approx(nu * math.log(2) + sf.binary_entropy(nu), abs=1e-9)


def test_psi_com_mode_relations():
    for nu in (0.5, 0.7, 0.99):
        base = _params(0.06, 0.5, 2.0)
        z = base.zeta
        weak = ex.psi_com_mode(nu, _params(0.06, 0.5, 2.0, Mode.WEAK))
        sec = ex.psi_com_mode(nu, _params(0.06, 0.5, 2.0, Mode.SECTIONAL))
        strong = ex.psi_com_mode(nu, base)
        assert weak == pytest.approx(sf.binary_entropy((nu - z) / (1 - z)) * (1 - z)
                                     + (nu - z) * math.log(2), abs=1e-14)
        assert sec - weak == pytest.approx(z * math.log(2), abs=1e-14)
        assert strong - weak == pytest.approx(z * math.log(2) + sf.binary_entropy(z), abs=1e-14)
        assert strong == pytest.approx(ex.psi_com(nu, base), abs=0.0)


def test_mode_ordering_random():
    rng = np.random.default_rng(5)
    for _ in range(300):
        delta = rng.uniform(0.05, 0.95)
        rho = rng.uniform(0.001, 0.9)
        c = rng.uniform(1.0, 6.0)
        nu = rng.uniform(delta, 1.0)
        vals = [ex.psi_net(nu, NetExponentParams(rho, delta, c, m)) for m in Mode]
        assert vals[0] <= vals[1] <= vals[2]


def test_breakdown_identity_and_invariants():
    for mode in Mode:
        p = _params(0.06, 0.5, 2.0, mode)
        for nu in (0.5, 0.6, 0.9, 1.0):
            b = ex.breakdown(nu, p)
            assert b.psi_net == b.psi_com - b.psi_int - b.psi_ext
            assert b.psi_net == pytest.approx(ex.psi_net(nu, p), abs=1e-14)
            assert b.psi_int >= 0.0 and b.psi_ext >= 0.0
            assert 0.0 < b.gamma_prime <= 1.0
            assert 0.0 < b.y_gamma <= MU


def test_psi_net_negative_below_strong_threshold_c2():
    nus = np.linspace(P_C2.delta, ex.NU_TOP, 2000)
    assert max(ex.psi_net(float(v), P_C2) for v in nus) < 0.0


def test_breakdown_series():
    rows = ex.exponent_breakdown_series(P_C2, 2)
    assert [r.nu for r in rows] == [P_C2.delta, ex.NU_TOP]
    rows = ex.exponent_breakdown_series(P_C2, 64)
    assert len(rows) == 64
    for r in rows:
        assert r.psi_net == r.psi_com - r.psi_int - r.psi_ext
        assert r.psi_net < 0.0
    with pytest.raises(ParameterError):
        ex.exponent_breakdown_series(P_C2, 1)


def test_breakdown_series_independent_of_workers():
    a = ex.exponent_breakdown_series(P_C2, 24, jobs=1)
    b = ex.exponent_breakdown_series(P_C2, 24, jobs=3)
    assert a == b


def test_effect_of_c_on_terms():
    rho_hat, delta = 0.08, 0.5
    for nu in (0.55, 0.75):
        ints, coms = [], []
        for c in (1.0, 2.0, 4.0):
            p = NetExponentParams(rho_hat / c ** 2, delta, c)
            ints.append(ex.psi_int(nu, p))
            coms.append(ex.psi_com(nu, p))
        assert ints[0] < ints[1] < ints[2]
        assert coms[0] > coms[1] > coms[2]
