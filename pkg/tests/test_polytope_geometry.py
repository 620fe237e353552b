import math

import numpy as np
import pytest

from l1robust import polytope_geometry as pg
from l1robust.errors import ParameterError
from l1robust.polytope_geometry import AngleMethod, FaceSpec

from . import oracles as orc


def _within(est, target, sigmas=3.0):
    return abs(est.value - target) <= sigmas * est.stderr


# -- face specs --------------------------------------------------------------

def test_face_spec_derived_fields():
    f = FaceSpec(10, 3, 7, 2.0)
    assert f.alpha_prime * (1 + 4.0 * 3) == pytest.approx(1.0, abs=1e-12)
    assert f.theta == 12.0
    assert f.m_prime == 4
    assert not f.is_full
    assert FaceSpec(10, 3, 11, 2.0).is_full


@pytest.mark.parametrize("args", [(5, 0, 2), (5, 3, 2), (5, 2, 7), (5, 2.5, 3)])
def test_face_spec_rejects_bad_shapes(args):
    with pytest.raises(ParameterError):
        FaceSpec(*args)


def test_face_spec_rejects_small_c():
    with pytest.raises(ParameterError):
        FaceSpec(5, 1, 2, 0.5)


# -- external angle ------------------------------------------------------------

def test_external_angle_conventions():
    assert pg.external_angle(FaceSpec(6, 2, 6, 3.0)).value == 0.5
    full = pg.external_angle(FaceSpec(6, 2, 7, 3.0))
    assert full.value == 1.0 and full.stderr == 0.0


def test_external_angle_vertex_of_octahedron_family():
    est = pg.external_angle(FaceSpec(4, 1, 1, 1.0))
    assert est.method is AngleMethod.QUADRATURE and est.stderr == 0.0
    assert est.value == pytest.approx(orc.EXT_4_1_1, abs=1e-10)
    mc = pg.external_angle_monte_carlo(FaceSpec(4, 1, 1, 1.0), samples=1_000_000, seed=3)
    assert _within(mc, est.value)


@pytest.mark.parametrize("n,k,l,c", [(6, 1, 3, 1.0), (7, 2, 4, 2.0), (9, 3, 5, 1.5)])
def test_external_angle_matches_cone_sampling(n, k, l, c):
    spec = FaceSpec(n, k, l, c)
    mc = pg.external_angle_monte_carlo(spec, samples=400_000, seed=9)
    assert _within(mc, pg.external_angle(spec).value)


def test_external_angle_log_value_for_large_n():
    est = pg.external_angle(FaceSpec(400, 20, 222, 2.0))
    assert est.log_value == pytest.approx(orc.LOG_EXT_400_20_222_C2, abs=1e-6)


def test_external_angle_decreasing_in_c_and_k():
    n, l = 12, 6
    for k in (1, 2, 3):
        vals = [pg.external_angle(FaceSpec(n, k, l, c)).value for c in (1.0, 1.5, 2.0, 4.0)]
        assert all(b < a for a, b in zip(vals, vals[1:]))
    for c in (1.0, 2.0):
        vals = [pg.external_angle(FaceSpec(n, k, l, c)).value for k in (1, 2, 3, 4)]
        assert all(b <= a for a, b in zip(vals, vals[1:]))
        # with C = 1 the angle does not depend on k
        if c > 1.0:
            assert all(b < a for a, b in zip(vals, vals[1:]))


# -- internal angle ------------------------------------------------------------

def test_internal_angle_closed_forms():
    assert pg.internal_angle(FaceSpec(5, 2, 2, 2.0)).value == 1.0
    assert pg.internal_angle(FaceSpec(5, 2, 3, 2.0)).value == 0.5
    est = pg.internal_angle(FaceSpec(5, 2, 4, 2.0))
    assert est.value == pytest.approx(math.acos(1 / (1 + 4.0 * 2)) / (2 * math.pi), abs=1e-15)
    assert est.method is AngleMethod.CLOSED_FORM


@pytest.mark.parametrize("k,c", [(1, 1.0), (2, 2.0), (3, 1.0)])
def test_internal_angle_estimator_normalisation(k, c):
    one = pg.internal_angle(FaceSpec(10, k, k + 1, c), samples=1_000_000, seed=1, force_mc=True)
    assert _within(one, 0.5)
    two = pg.internal_angle(FaceSpec(10, k, k + 2, c), samples=1_000_000, seed=2, force_mc=True)
    assert _within(two, math.acos(1 / (1 + c * c * k)) / (2 * math.pi))


@pytest.mark.parametrize("c", [1.0, 3.0])
def test_internal_angle_three_dimensional_cone(c):
    # m' = 3: spherical triangle with vertices at mutual cosine a'/(1 + a')
    spec = FaceSpec(10, 2, 5, c)
    est = pg.internal_angle(spec, samples=1_000_000, seed=4)
    assert _within(est, orc.spherical_triangle_internal(spec.alpha_prime))
    assert est.stderr / est.value < 0.01


def test_internal_angle_is_seeded():
    spec = FaceSpec(40, 3, 12, 2.0)
    a = pg.internal_angle(spec, samples=20_000, seed=5)
    b = pg.internal_angle(spec, samples=20_000, seed=5)
    c = pg.internal_angle(spec, samples=20_000, seed=6)
    assert a == b and a.value != c.value


def test_internal_angle_large_m_prime_has_small_relative_error():
    est = pg.internal_angle(FaceSpec(300, 6, 60, 1.0), samples=200_000, seed=0)
    assert est.value > 0.0 and est.stderr / est.value < 0.05


def test_internal_angle_full_toy():
    est = pg.internal_angle_full(2, 1, 1.0, samples=4_000_000, seed=8)
    assert _within(est, 0.25)


def test_internal_angle_full_properties():
    lo = pg.internal_angle_full(6, 2, 1.0, samples=400_000, seed=1)
    hi = pg.internal_angle_full(6, 2, 3.0, samples=400_000, seed=1)
    assert hi.value - lo.value > 3 * math.hypot(hi.stderr, lo.stderr)
    for est in (lo, hi):
        assert 0.0 < est.value < 0.5
    with pytest.raises(ParameterError):
        pg.internal_angle_full(4, 4, 1.0)


def test_internal_angle_full_by_plain_simulation():
    rng = np.random.default_rng(77)
    n, k, c = 5, 2, 1.5
    u = np.abs(rng.standard_normal((2_000_000, n - k))).sum(axis=1) * math.sqrt(0.5)
    x1 = rng.standard_normal(2_000_000) * math.sqrt(1 / (2 * k))
    p = float(np.mean(u <= c * k * x1))
    est = pg.internal_angle_full(n, k, c, samples=1_000_000, seed=2)
    se = math.hypot(est.stderr, math.sqrt(p * (1 - p) / 2_000_000))
    assert abs(est.value - p) < 3 * se


# -- Grassmann angle ------------------------------------------------------------

@pytest.mark.parametrize("c", [1.0, 2.0, 5.0])
def test_face_sum_toy_case(c):
    est = pg.complementary_grassmann_angle(2, 1, 1, c, samples=1_000_000, seed=0)
    assert abs(est.value - 2 * math.atan(c) / math.pi) <= 3 * est.stderr + 1e-12


def test_face_sum_terms_include_terminal_face():
    rows = pg.face_sum_terms(8, 4, 1, 1.0, samples=10_000)
    assert [r[0] for r in rows] == [6, 8]
    rows = pg.face_sum_terms(7, 4, 1, 1.0, samples=10_000)
    assert [r[0] for r in rows] == [6, 8]
    assert rows[-1][1] == 1.0 and rows[-1][3] == 1.0


@pytest.mark.parametrize("n,m,k,c", [(6, 3, 1, 1.0), (8, 4, 2, 2.0), (9, 4, 3, 1.0), (7, 5, 2, 2.0)])
def test_face_sum_is_a_probability(n, m, k, c):
    est = pg.complementary_grassmann_angle(n, m, k, c, samples=100_000)
    assert 0.0 <= est.value <= 1.0


def test_face_sum_rejects_k_above_m():
    with pytest.raises(ParameterError):
        pg.complementary_grassmann_angle(6, 2, 3, 1.0)


def test_subspace_monte_carlo_toy():
    est = pg.grassmann_angle_monte_carlo(2, 1, 1, 1.0, trials=20_000, seed=13, jobs=2)
    assert _within(est, 0.5)
    assert est.method is AngleMethod.MC_SUBSPACE


def test_subspace_monte_carlo_degenerate_and_validation():
    assert pg.grassmann_angle_monte_carlo(5, 2, 0, 1.0, trials=100, seed=0).value == 0.0
    with pytest.raises(ParameterError):
        pg.grassmann_angle_monte_carlo(5, 2, 1, 1.0, trials=99, seed=0)


def test_subspace_monte_carlo_independent_of_workers():
    a = pg.grassmann_angle_monte_carlo(6, 3, 2, 2.0, trials=400, seed=21, jobs=1)
    b = pg.grassmann_angle_monte_carlo(6, 3, 2, 2.0, trials=400, seed=21, jobs=3)
    assert a == b


@pytest.mark.parametrize("n,m,k,c", [(6, 3, 1, 2.0), (8, 4, 2, 1.0), (7, 3, 3, 1.0)])
def test_face_sum_agrees_with_subspace_sampling(n, m, k, c):
    fs = pg.complementary_grassmann_angle(n, m, k, c, samples=400_000, seed=1)
    mc = pg.grassmann_angle_monte_carlo(n, m, k, c, trials=6000, seed=2, jobs=4)
    assert abs(fs.value - mc.value) <= 3 * math.hypot(fs.stderr, mc.stderr)


def test_union_of_sign_patterns_is_a_larger_event():
    single = pg.grassmann_angle_monte_carlo(8, 4, 2, 1.0, trials=3000, seed=4, jobs=4)
    union = pg.grassmann_angle_monte_carlo(8, 4, 2, 1.0, trials=3000, seed=4, union=True, jobs=4)
    assert union.value >= single.value
    assert union.value - single.value > 3 * math.hypot(union.stderr, single.stderr)


def test_angle_estimate_as_dict():
    d = pg.external_angle(FaceSpec(5, 1, 2, 1.0)).as_dict()
    assert d["method"] == "quadrature" and d["stderr"] == 0.0
