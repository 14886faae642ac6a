import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from resonant_waveguide.special import (AI0, QuadratureError, QuadratureRule, airy, airy_ai, airy_eval,
                                        airy_first_zeros, airy_global_max, airy_prime_zeros, integrate)

# (Ai, Ai', Bi, Bi') from mpmath at 30 digits
REFERENCE = {
    -150.0: (0.049038082702410901, -1.8808154281540912, 0.15357460277042185, 0.60084738833185739),
    -30.0: (-0.087968188456842163, 1.2286206026374851, -0.22444694220056632, -0.48369472582768149),
    -10.0: (0.040241238486443191, 0.99626504413279006, -0.31467982964383863, 0.11941411339990924),
    -5.5: (0.017781541276574976, 0.86419721777139839, -0.36781345391571199, 0.025111583073630926),
    -1.0: (0.53556088329235212, -0.010160567116645209, 0.10399738949694461, 0.59237562642279235),
    0.0: (0.35502805388781724, -0.2588194037928068, 0.61492662744600074, 0.44828835735382636),
    0.5: (0.23169360648083349, -0.22491053266468389, 0.85427704310315549, 0.5445725641405923),
    2.0: (0.034924130423274379, -0.053090384433653632, 3.2980949999782147, 4.1006820499328899),
    7.5: (1.9172560675134308e-7, -5.3127139597205447e-7, 303229.6151125334, 819987.83535879962),
    12.0: (1.3931846888753608e-13, -4.8547365549853085e-13, 329807225829.07418, 1135507502443.3707),
    30.0: (3.2082175915504956e-49, -1.759876581432726e-48, 9.057288512151307e46, 4.953304512891299e47),
}
AI_ZEROS = [-2.338107410459767, -4.0879494441309706, -5.5205598280955511, -6.786708090071759,
            -7.9441335871208531, -9.0226508533409804, -10.040174341558086, -11.008524303733263,
            -11.936015563236263, -12.828776752865757]
AIP_ZEROS = [-1.0187929716474711, -3.2481975821798365, -4.8200992111787356, -6.1633073556394865,
             -7.3721772550477702, -8.4884867340197221, -9.5354490524335475, -10.527660396957407,
             -11.475056633480245, -12.384788371845747]


@pytest.mark.parametrize("x", sorted(REFERENCE))
def test_airy_matches_high_precision_values(x):
    got = airy_eval(x)
    for val, ref in zip((got.ai, got.ai_prime, got.bi, got.bi_prime), REFERENCE[x]):
        assert val == pytest.approx(ref, rel=1e-12, abs=1e-300)


def test_airy_at_zero():
    assert airy_eval(0.0).ai == pytest.approx(0.355028053887817, abs=1e-15)
    assert AI0 == pytest.approx(0.355028053887817, abs=1e-15)
    assert airy_eval(0.0).wronskian == pytest.approx(1 / math.pi, abs=1e-15)


def test_airy_vectorized_and_scalar_agree():
    x = np.linspace(-20, 20, 101)
    ai, aip, bi, bip = airy(x)
    for i in range(0, 101, 10):
        v = airy_eval(float(x[i]))
        assert (v.ai, v.ai_prime, v.bi, v.bi_prime) == (ai[i], aip[i], bi[i], bip[i])
    assert np.array_equal(airy_ai(x)[0], ai) and np.array_equal(airy_ai(x)[1], aip)


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf, 200.5, -1e3])
def test_airy_domain(bad):
    with pytest.raises(ValueError):
        airy_eval(bad)


def test_first_zero_vanishes():
    assert abs(airy_eval(-2.338107410459767).ai) < 1e-10


def test_zeros():
    assert airy_first_zeros(1) == pytest.approx([-2.338107410459767], abs=1e-12)
    z = airy_first_zeros(10)
    assert z == pytest.approx(AI_ZEROS, abs=1e-12)
    assert all(a > b for a, b in zip(z, z[1:]))
    assert airy_prime_zeros(10) == pytest.approx(AIP_ZEROS, abs=1e-12)
    for bad in (0, 21):
        with pytest.raises(ValueError):
            airy_first_zeros(bad)


def test_zeros_interlace():
    z, zp = airy_first_zeros(10), airy_prime_zeros(11)
    for i in range(10):
        assert zp[i + 1] < z[i] < zp[i]


def test_global_max():
    x_max, value = airy_global_max()
    assert x_max == pytest.approx(-1.018792971647471, abs=1e-12)
    assert value == pytest.approx(0.535656656015700, abs=1e-13)
    assert abs(airy_eval(x_max).ai_prime) < 1e-9
    grid = np.linspace(-15, 5, 20001)
    assert airy_ai(grid)[0].max() <= value + 1e-15


def test_wronskian_random_points():
    x = np.random.default_rng(0).uniform(-12, 8, 1000)
    ai, aip, bi, bip = airy(x)
    assert np.max(np.abs(ai * bip - aip * bi - 1 / math.pi)) < 1e-10


def test_ode_residual_by_finite_differences():
    x = np.linspace(-10, 5, 301)
    h = 1e-5
    _, aip_p, _, bip_p = airy(x + h)
    _, aip_m, _, bip_m = airy(x - h)
    ai, _, bi, _ = airy(x)
    fd_ai = (aip_p - aip_m) / (2 * h)
    fd_bi = (bip_p - bip_m) / (2 * h)
    assert np.max(np.abs(fd_ai - x * ai) / np.maximum(np.abs(x * ai), 1e-3)) < 1e-6
    assert np.max(np.abs(fd_bi - x * bi) / np.maximum(np.abs(x * bi), 1e-3)) < 1e-6


def test_positive_axis_monotone():
    x = np.linspace(0, 40, 4001)
    ai = airy_ai(x)[0]
    assert np.all(ai > 0) and np.all(np.diff(ai) < 0)


@pytest.mark.parametrize("switch", [-7.0, 7.0, -5.0, 5.0, -8.0, 8.0, -10.0, 10.0])
def test_continuity_across_method_switches(switch):
    left = np.array(airy(np.array([np.nextafter(switch, -np.inf)])))[:, 0]
    right = np.array(airy(np.array([np.nextafter(switch, np.inf)])))[:, 0]
    assert np.all(np.abs(left - right) <= 1e-11 * np.maximum(1.0, np.abs(left)))


@settings(max_examples=200, deadline=None)
@given(st.floats(-12, 8))
def test_wronskian_property(x):
    assert abs(airy_eval(x).wronskian - 1 / math.pi) < 1e-10


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 100))
def test_signs_on_positive_axis(x):
    v = airy_eval(x)
    assert v.ai > 0 and v.ai_prime < 0 and v.bi > 0 and v.bi_prime > 0


def test_integrate_polynomial_and_sine():
    assert integrate(lambda x: x * x, 0, 1) == pytest.approx(1 / 3, abs=1e-12)
    assert integrate(math.sin, 0, math.pi) == pytest.approx(2.0, abs=1e-10)
    assert integrate(math.sin, 1, 1) == 0.0


def test_integrate_singular_endpoint():
    assert integrate(lambda x: x ** -0.5, 0, 1, singular="left") == pytest.approx(2.0, abs=1e-8)
    assert integrate(lambda x: (1 - x) ** -0.5, 0, 1, singular="right") == pytest.approx(2.0, abs=1e-8)
    f = lambda x: 1 / math.sqrt(x * (1 - x))
    assert integrate(f, 0, 1, singular="both") == pytest.approx(math.pi, abs=1e-8)


@settings(max_examples=50, deadline=None)
@given(st.floats(-3, 3), st.floats(0.01, 4), st.lists(st.floats(-2, 2), min_size=4, max_size=4))
def test_gauss_rule_exact_on_cubics(a, length, c):
    b = a + length
    f = lambda x: c[0] + c[1] * x + c[2] * x**2 + c[3] * x**3
    F = lambda x: c[0] * x + c[1] * x**2 / 2 + c[2] * x**3 / 3 + c[3] * x**4 / 4
    exact = F(b) - F(a)
    rule = QuadratureRule(kind="gauss-legendre-composite", order=2, panels=1)
    assert integrate(f, a, b, rule) == pytest.approx(exact, rel=1e-12, abs=1e-12)


def test_quadrature_budget_and_validation():
    with pytest.raises(QuadratureError) as info:
        integrate(lambda x: math.sin(1 / x), 1e-6, 1, QuadratureRule(abs_tol=1e-14, max_subdivisions=8))
    assert math.isfinite(info.value.estimate)
    with pytest.raises(ValueError):
        integrate(math.sin, 1, 0)
    with pytest.raises(ValueError):
        QuadratureRule(kind="trapezoid")
