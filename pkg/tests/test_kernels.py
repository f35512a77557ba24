import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flatdichotomy import specfun
from flatdichotomy.dichotomy.exponents import predicted_exponent
from flatdichotomy.kernels import (IntegrandSpec, integrand_phi, kernel_normalization, kernel_rank1,
                                   kernel_regular, kernel_typeA, kernel_typeD, make_spec,
                                   spherical_kernel)
from flatdichotomy.spaces import SpaceError, aiii_datum, classify_point, rank1_datum

mp.mp.dps = 60


def naive_regular(r, x, lam):
    """det[f_r(x_i lam_j)] / (V(x^2) V(lam^2)) in extended precision."""
    p = len(x)
    m = mp.matrix(p, p)
    for i in range(p):
        for j in range(p):
            z = mp.mpf(x[i]) * mp.mpf(lam[j])
            m[i, j] = mp.besselj(r, z) / z ** r if z != 0 else mp.mpf(1) / (2 ** r * mp.factorial(r))
    vx = mp.fprod([mp.mpf(x[i]) ** 2 - mp.mpf(x[j]) ** 2 for i in range(p) for j in range(i + 1, p)])
    vl = mp.fprod([mp.mpf(lam[i]) ** 2 - mp.mpf(lam[j]) ** 2 for i in range(p) for j in range(i + 1, p)])
    return mp.det(m) / (vx * vl)


def naive_typeD(r, x, l1, l2):
    f = lambda s: mp.besselj(r, s) / s ** r
    fp = lambda s: mp.diff(f, s)
    x, l1, l2 = mp.mpf(x), mp.mpf(l1), mp.mpf(l2)
    return (l1 * fp(x * l1) * f(x * l2) - l2 * fp(x * l2) * f(x * l1)) / (l1 ** 2 - l2 ** 2)


# -- rank one ----------------------------------------------------------------

def test_rank1_examples():
    assert kernel_rank1(0, 1.0, 0.0) == 1.0
    np.testing.assert_allclose(kernel_rank1(0, 1.0, 1.0), 0.7651976865579666, rtol=1e-13)
    np.testing.assert_allclose(kernel_rank1(1, 1.0, 1.0), 0.880101171489867, rtol=1e-13)
    np.testing.assert_allclose(kernel_rank1(specfun.BesselOrder(1.5), 2.0, 0.0), 1.0)


def test_rank1_rejects_bad_t():
    with pytest.raises(SpaceError):
        kernel_rank1(0, 0.0, 1.0)


@pytest.mark.parametrize("q", [2, 3, 5])
def test_determinant_kernel_reduces_to_rank1(q):
    x = 1.3
    lam = np.linspace(0.05, 40, 50)
    det = kernel_regular(1, q - 1, (x,), lam[:, None], normalized=True).value
    np.testing.assert_allclose(det, kernel_rank1(q - 1, x, lam), rtol=1e-9, atol=1e-15)


# -- regular -------------------------------------------------------------------

@pytest.mark.parametrize("r", [0, 1, 3])
@pytest.mark.parametrize("x,lam", [
    ((2.0, 0.7), (5.0, 1.3)),
    ((3.0, 1.0), (60.0, 17.0)),
    ((2.0, 0.0), (5.0, 1.3)),
    ((1.5, 1.0, 0.3), (4.0, 2.5, 1.0)),
    ((3.0, 2.0, 1.0), (300.0, 40.0, 2.0)),
])
def test_regular_matches_extended_precision(r, x, lam):
    got = kernel_regular(len(x), r, x, lam).value
    want = float(naive_regular(r, x, lam))
    np.testing.assert_allclose(got, want, rtol=1e-10)


def test_near_wall_stability_rank2():
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(100):
        r = int(rng.integers(0, 4))
        x = tuple(sorted(rng.uniform(0.3, 3.0, 2), reverse=True))
        l2 = rng.uniform(0.1, 30)
        gap = 10 ** rng.uniform(-9, -6)
        lam = (l2 + gap, l2)
        got = kernel_regular(2, r, x, lam)
        want = float(naive_regular(r, x, lam))
        worst = max(worst, abs(got.value - want) / abs(want))
        assert got.confluent
    assert worst < 1e-6


def test_near_wall_stability_rank3():
    rng = np.random.default_rng(12)
    for _ in range(15):
        r = int(rng.integers(0, 3))
        x = (2.5, 1.4, 0.6)
        base = rng.uniform(0.5, 20)
        gaps = 10 ** rng.uniform(-9, -6, 2)
        lam = (base + gaps[0] + gaps[1], base + gaps[1], base)
        got = kernel_regular(3, r, x, lam).value
        want = float(naive_regular(r, x, lam))
        np.testing.assert_allclose(got, want, rtol=1e-6)


def test_confluent_point_matches_nearby():
    a = kernel_regular(2, 1, (2.0, 1.0), (2.0 + 1e-9, 2.0)).value
    b = kernel_regular(2, 1, (2.0, 1.0), (2.0, 2.0)).value
    np.testing.assert_allclose(a, b, rtol=1e-6)
    c = kernel_regular(3, 0, (2.0, 1.0, 0.5), (1.5, 1.5, 1.5)).value
    d = kernel_regular(3, 0, (2.0, 1.0, 0.5), (1.5 + 2e-9, 1.5 + 1e-9, 1.5)).value
    np.testing.assert_allclose(c, d, rtol=1e-6)


@pytest.mark.parametrize("x", [(2.0, 1.0), (0.7, 0.2), (3.0, 0.0), (3.0, 2.0, 1.0)])
@pytest.mark.parametrize("r", [0, 2])
def test_normalized_tends_to_one(x, r):
    lam = np.array([[1e-4 * (len(x) - i) for i in range(len(x))]])
    val = kernel_regular(len(x), r, x, lam, normalized=True).value
    np.testing.assert_allclose(val, 1.0, atol=1e-6)
    np.testing.assert_allclose(kernel_regular(len(x), r, x, np.zeros((1, len(x))), normalized=True).value, 1.0)


def test_normalization_closed_form():
    # lam -> 0 limit equals prod_j (-1)^j / (2^(2j+r) j! (r+j)!) for j = 0..p-1
    for p, x in ((2, (2.0, 1.0)), (3, (3.0, 2.0, 1.0))):
        for r in (0, 1, 3):
            want = 1.0
            for j in range(p):
                want *= (-1) ** j / (2 ** (2 * j + r) * math.factorial(j) * math.factorial(r + j))
            np.testing.assert_allclose(kernel_normalization(r, x), want, rtol=1e-12)


def test_symmetric_in_x():
    lam = np.array([[5.0, 2.0], [7.0, 6.9]])
    np.testing.assert_allclose(kernel_regular(2, 1, (2.0, 1.0), lam).value,
                               kernel_regular(2, 1, (1.0, 2.0), lam).value, rtol=1e-13)


def test_regular_requires_distinct_x():
    with pytest.raises(SpaceError):
        kernel_regular(2, 1, (1.0, 1.0), (2.0, 1.0))


def test_conditioning_reported():
    far = kernel_regular(2, 0, (2.0, 1.0), (5.0, 1.0))
    near = kernel_regular(2, 0, (2.0, 1.0), (5.0 + 1e-7, 5.0))
    assert not far.confluent and near.confluent
    assert 0 < far.conditioning < 1e-10 and 0 < near.conditioning < 1e-10


# -- type D --------------------------------------------------------------------

@pytest.mark.parametrize("r", [0, 1, 2])
@pytest.mark.parametrize("lam", [(5.0, 1.3), (5.0, 5.0 - 1e-6), (40.0, 3.0), (2.0, 2.0 - 1e-9)])
def test_typeD_matches_extended_precision(r, lam):
    got = kernel_typeD(r, 1.5, lam).value
    want = float(naive_typeD(r, 1.5, *lam))
    np.testing.assert_allclose(got, want, rtol=1e-8)


def test_typeD_from_bessel_values():
    # r = 0: f_0' = -J_1
    l1, l2, x = 3.0, 1.0, 1.0
    j0, j1 = specfun.bessel_j(0, [l1, l2]), specfun.bessel_j(1, [l1, l2])
    want = (-l1 * j1[0] * j0[1] + l2 * j1[1] * j0[0]) / (l1 ** 2 - l2 ** 2)
    np.testing.assert_allclose(kernel_typeD(0, x, (l1, l2)).value, want, rtol=1e-10)


def test_typeD_finite_on_diagonal():
    v = kernel_typeD(1, 1.2, (3.0, 3.0)).value
    assert np.isfinite(v)
    np.testing.assert_allclose(v, kernel_typeD(1, 1.2, (3.0 + 1e-8, 3.0)).value, rtol=1e-6)


@pytest.mark.parametrize("r", [0, 1, 3])
def test_typeD_is_limit_of_regular(r):
    x = 1.5
    rng = np.random.default_rng(r)
    l1 = rng.uniform(0.3, 25, 30)
    lam = np.column_stack([l1, l1 * rng.uniform(0.05, 0.98, 30)])
    h = 1e-4
    k1 = kernel_regular(2, r, (x + h, x), lam).value
    k2 = kernel_regular(2, r, (x + h / 2, x), lam).value
    limit = 2 * k2 - k1
    d = kernel_typeD(r, x, lam).value
    const = limit[0] / d[0]
    np.testing.assert_allclose(const * d, limit, rtol=1e-6, atol=1e-6 * np.abs(limit).max())
    np.testing.assert_allclose(const, 1 / (2 * x), rtol=1e-6)


# -- type A --------------------------------------------------------------------

def test_typeA_closed_values():
    lam = (math.pi, math.pi / 2)
    j = specfun.bessel_j(0, list(lam))
    want = (j[0] - j[1]) / (lam[0] ** 2 - lam[1] ** 2)
    np.testing.assert_allclose(kernel_typeA(0, 1.0, lam), want, rtol=1e-12)


def test_typeA_confluent_limit():
    x, l1, r = 1.3, 4.0, 1
    want = x ** 2 * specfun.g_r_deriv(r, (x * l1) ** 2, 1)
    np.testing.assert_allclose(kernel_typeA(r, x, (l1, l1)), want, rtol=1e-12)
    np.testing.assert_allclose(kernel_typeA(r, x, (l1 + 1e-7, l1)), want, rtol=1e-6)


def test_typeA_vanishes_when_values_match():
    # J_0 has equal values at the two points where it crosses 0
    z1, z2 = 5.520078110286311, 2.404825557695773
    assert abs(kernel_typeA(0, 1.0, (z1, z2))) < 1e-15


def test_typeA_equals_regular_with_zero():
    lam = np.array([[5.0, 1.3], [9.0, 8.5]])
    for r in (0, 2):
        reg = kernel_regular(2, r, (1.3, 0.0), lam).value
        a = kernel_typeA(r, 1.3, lam)
        ratio = reg / a
        np.testing.assert_allclose(ratio, ratio[0], rtol=1e-12)


# -- integrand -----------------------------------------------------------------

def test_phi_rank1_example():
    spec = make_spec(rank1_datum("AI"), [1.0], 2)
    np.testing.assert_allclose(integrand_phi(spec, 5.0), 5 * specfun.bessel_j(0, 5.0) ** 4, rtol=1e-13)
    np.testing.assert_allclose(integrand_phi(spec, 5.0), 0.004973, rtol=1e-3)


def test_phi_regular_matches_definition():
    spec = make_spec(aiii_datum(2, 3), (2.0, 1.0), 2)
    lam = np.array([4.0, 1.5])
    k = float(naive_regular(1, (2.0, 1.0), lam))
    want = k ** 4 * (lam[0] ** 2 - lam[1] ** 2) ** 2 * (lam[0] * lam[1]) ** 3
    np.testing.assert_allclose(integrand_phi(spec, lam), want, rtol=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.1, 50), min_size=3, max_size=3, unique=True))
def test_phi_symmetric(lam):
    spec = make_spec(aiii_datum(3, 4), (3.0, 2.0, 1.0), 2)
    base = integrand_phi(spec, np.array(lam))
    for perm in ([1, 0, 2], [2, 1, 0], [1, 2, 0]):
        np.testing.assert_allclose(integrand_phi(spec, np.array(lam)[perm]), base, rtol=1e-12, atol=1e-300)


@settings(max_examples=40, deadline=None)
@given(l2=st.floats(0.1, 50), eps=st.floats(1e-10, 1e-3), k=st.integers(1, 4))
def test_phi_finite_near_wall(l2, eps, k):
    spec = make_spec(aiii_datum(2, 3), (2.0, 1.0), k)
    v = integrand_phi(spec, np.array([l2 + eps, l2]))
    assert np.isfinite(v) and v >= 0


def test_phi_nonnegative_all_classes():
    rng = np.random.default_rng(5)
    lam = np.sort(rng.uniform(0, 60, (2000, 2)), axis=1)[:, ::-1]
    for x in ((2, 1), (1.5, 1.5), (1, 0)):
        v = integrand_phi(make_spec(aiii_datum(2, 3), x, 2), lam)
        assert np.all(np.isfinite(v)) and np.all(v >= 0)


def test_typeA_strip_decay():
    # r = 1, k = 2: lam_1**-1 on the strip after averaging over lam_2 and a window in lam_1
    spec = make_spec(aiii_datum(2, 3), (1.0, 0.0), 2)
    l1 = np.geomspace(1e2, 1e4, 21)
    l2 = np.linspace(0.5, 3.0, 200)
    avg = []
    for a in l1:
        w = np.linspace(a, 1.1 * a, 40)
        g = np.column_stack([np.repeat(w, l2.size), np.tile(l2, w.size)])
        avg.append(integrand_phi(spec, g).mean())
    slope = np.polyfit(np.log(l1), np.log(avg), 1)[0]
    assert abs(slope + 1) < 0.05


@pytest.mark.parametrize("q,x,k,region", [(3, (2, 1), 2, "W1"), (4, (2, 1), 2, "W1"),
                                          (3, (1.5, 1.5), 2, "W1"), (3, (2, 1), 3, "W2")])
def test_phi_respects_region_bounds(q, x, k, region):
    spec = make_spec(aiii_datum(2, q), x, k)
    e = predicted_exponent(region, spec.point.cls, k, spec.r)
    rng = np.random.default_rng(3)
    maxima = []
    for lo in (20, 80, 320, 1280):
        l1 = rng.uniform(lo, 2 * lo, 20000)
        frac = rng.uniform(0.5, 1, l1.size) if region == "W1" else rng.uniform(0.05, 0.5, l1.size)
        maxima.append(np.max(integrand_phi(spec, np.column_stack([l1, l1 * frac])) * l1 ** e))
    assert all(m <= 1.1 * maxima[0] for m in maxima[1:])


def test_spherical_kernel_dispatch():
    d = aiii_datum(2, 3)
    lam = np.array([[1.0, 0.5]])
    for x in ((2, 1), (1.5, 1.5), (1, 0)):
        v = spherical_kernel(d, classify_point(x), lam)
        assert abs(v[0]) <= 1
        np.testing.assert_allclose(spherical_kernel(d, classify_point(x), np.array([[1e-6, 5e-7]])), 1, atol=1e-9)


def test_spec_validation():
    with pytest.raises(SpaceError):
        make_spec(aiii_datum(2, 3), (2, 1), 0)
    with pytest.raises(SpaceError):
        make_spec(aiii_datum(2, 3), (2, 1, 0.5), 2)
    with pytest.raises(SpaceError):
        make_spec(aiii_datum(2, 3), (0, 0), 2)
    with pytest.raises(SpaceError):
        make_spec(aiii_datum(3, 3), (2, 2, 1), 2)
    a = make_spec(aiii_datum(2, 3), (2, 1), 2)
    b = IntegrandSpec(aiii_datum(2, 3), classify_point((1, 2)), 2)
    assert a.digest() == b.digest() and a.r == 1 and a.nu == 1.0
