import math

import numpy as np
import pytest
from scipy import special
from hypothesis import example, given, settings
from hypothesis import strategies as st

from oracles import bessel_half, contour_pmf_mp, sheet_g_mp
from windsoup import DomainError
from windsoup import _kernels as K
from windsoup.exact import (bessel_i, bessel_i_quadrature, bridge_sheet_pmf, contour_bracket_integral,
                            expected_w, expected_w_series, fourier_identity_partial, lemma1_radial_integral,
                            lemma1_value, lemma2_mean, pmf_table, rooted_winding_area, winding_mass_zero,
                            winding_pmf_contour, winding_pmf_fourier)
from windsoup.field import a_exponent

TWO_PI = 2.0 * math.pi


def test_bessel_examples():
    assert bessel_i(0, 0) == 1.0
    assert bessel_i(0.5, 1.0) == pytest.approx(0.937674, abs=1e-6)
    assert bessel_i(0.5, 1.0) == pytest.approx(bessel_half(1.0), rel=1e-12)
    assert abs(bessel_i(0.3, 2.0) - bessel_i_quadrature(0.3, 2.0)) < 1e-8


@given(st.floats(0, 30), st.floats(0.01, 50))
def test_bessel_matches_quadrature(order, x):
    # the oracle's cosine integral cancels down from a scale of e^x
    ref = bessel_i_quadrature(order, x)
    assert bessel_i(order, x) == pytest.approx(ref, rel=1e-9, abs=1e-13 * math.exp(x))


@given(st.floats(0.01, 200))
def test_bessel_half_integer_closed_form(x):
    assert bessel_i(0.5, x) == pytest.approx(bessel_half(x), rel=1e-10)


def test_bessel_errors():
    with pytest.raises(OverflowError):
        bessel_i(0, 1000.0)
    for args in ((-1, 1.0), (1, -1.0), (math.nan, 1.0), (1, math.inf)):
        with pytest.raises(DomainError):
            bessel_i(*args)


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
def test_contour_fourier_agree(n, r):
    assert abs(winding_pmf_contour(n, r) - winding_pmf_fourier(n, r)) < 1e-6


@pytest.mark.parametrize("n,r", [(1, 1.0), (3, 0.3), (2, 2.0), (-1, 0.7), (5, 0.05)])
def test_contour_matches_high_precision_oracle(n, r):
    assert winding_pmf_contour(n, r) == pytest.approx(contour_pmf_mp(n, r), abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.floats(0.05, 3.0))
def test_pmf_symmetric_and_nonnegative(n, r):
    p = winding_pmf_contour(n, r)
    assert p >= 0
    assert winding_pmf_contour(-n, r) == pytest.approx(p, abs=1e-14)


def test_pmf_errors():
    for f in (winding_pmf_contour, winding_pmf_fourier):
        with pytest.raises(DomainError):
            f(0, 1.0)
        with pytest.raises(DomainError):
            f(1, 0.0)


def test_pmf_matches_bridge_monte_carlo_at_r1():
    from windsoup.sampler import _draw_keys

    n = 10**6
    keys = _draw_keys(np.random.default_rng(99), n)
    roots = np.full(n, 1.0 + 0j)
    w, _ = K.bridge_windings(roots, keys, 1.0, 4, 0j, 1.0, 1e-9, 40, 4.0)
    p = TWO_PI * winding_pmf_contour(1, 1.0)
    assert abs(np.mean(w == 1) - p) < 3 * math.sqrt(p * (1 - p) / n)


@pytest.mark.parametrize("r", [1.0, 2.0])
def test_masses_add_to_heat_kernel_diagonal(r):
    # truncating at |n| <= 200 leaves a tail below 2e-5
    total = sum(winding_pmf_contour(n, r) for n in range(1, 201)) * 2 + winding_mass_zero(r)
    assert abs(total - 1.0 / TWO_PI) < 2e-5


def test_small_r_puts_mass_on_nonzero_windings():
    # near the root every loop winds: the zero mass decreases to 0 and the
    # nonzero mass increases to the full diagonal weight 1/(2π)
    z = [winding_mass_zero(r) for r in (1.0, 0.1, 1e-3, 1e-6)]
    assert all(a > b for a, b in zip(z, z[1:]))
    assert 0.5 / TWO_PI < 1 / TWO_PI - z[2] < 1 / TWO_PI


def test_pmf_table_shape_and_values():
    tab = pmf_table([0.5, 1.0], [1, -1, 2])
    assert tab.pmf.shape == (2, 3)
    assert tab.pmf[1, 0] == pytest.approx(winding_pmf_contour(1, 1.0))
    assert np.allclose(tab.pmf[:, 0], tab.pmf[:, 1])
    with pytest.raises(DomainError):
        pmf_table([1.0], [1], method="laplace")


def test_lemma1_value_examples():
    assert lemma1_value(1) == pytest.approx(0.050660592, abs=1e-9)
    assert lemma1_value(2) == pytest.approx(0.012665148, abs=1e-9)
    assert lemma1_value(3) == pytest.approx(0.0056290, abs=1e-7)
    assert len({round(lemma1_value(k) * k * k, 15) for k in range(1, 20)}) == 1
    assert lemma1_value(-2) == lemma1_value(2)
    with pytest.raises(DomainError):
        lemma1_value(0)


@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("method", ["contour", "fourier"])
def test_radial_integral_gives_rooted_area(k, method):
    # 2π∫ r pmf(k, r) dr = 1/(4π²k²): half of 1/(2π²k²), see the ledger
    assert lemma1_radial_integral(k, method) == pytest.approx(rooted_winding_area(k), abs=1e-9)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_bracket_integral_is_the_lemma1_value(k):
    assert contour_bracket_integral(k) == pytest.approx(lemma1_value(k), abs=1e-12)
    assert rooted_winding_area(k) == pytest.approx(lemma1_value(k) / 2, rel=1e-15)


def test_lemma2_mean_examples():
    assert lemma2_mean(2.0, 1.0, 0.2, 1) == pytest.approx(math.log(5) / math.pi**2, abs=1e-12)
    # ln 5/π² = 0.1630702 (a quoted 0.1630548 is an arithmetic slip)
    assert lemma2_mean(2.0, 1.0, 0.2, 1) == pytest.approx(0.1630702, abs=1e-7)
    assert lemma2_mean(1.0, 2.0, 2.0, 1) == 0.0
    with pytest.raises(DomainError):
        lemma2_mean(1.0, 1.0, 1.5, 1)
    with pytest.raises(DomainError):
        lemma2_mean(1.0, 1.0, 0.5, 0)


@given(st.floats(0, 5), st.floats(0.5, 3), st.floats(0.01, 0.99), st.floats(0.01, 0.99), st.integers(1, 5))
def test_lemma2_additivity(alpha, R, f1, f2, k):
    mid, low = R * f1, R * f1 * f2
    whole = lemma2_mean(alpha, R, low, k)
    assert lemma2_mean(alpha, R, mid, k) + lemma2_mean(alpha, mid, low, k) == pytest.approx(whole, abs=1e-12)


def test_expected_w_examples():
    assert expected_w(3.0, 0.0, 0.3) == 1.0
    assert expected_w(1.0, math.pi, 0.5) == pytest.approx(0.8408964, abs=1e-7)
    with pytest.raises(DomainError):
        expected_w(1.0, math.pi, 1.0)


@pytest.mark.parametrize("beta", [math.pi / 2, math.pi, 4.0])
def test_expected_w_series_consistency(beta):
    assert abs(expected_w_series(1.5, beta, 0.3, 10**6) - expected_w(1.5, beta, 0.3)) < 1e-4


def test_fourier_identity_examples():
    assert fourier_identity_partial(0.0, 10) == 0.0
    assert abs(fourier_identity_partial(math.pi / 2, 10**6) - 3 / 16) < 1e-5
    for N in (1, 10, 1000, 10**5):
        assert 0.25 - fourier_identity_partial(math.pi, N) <= 2 / (math.pi**2 * N)
    with pytest.raises(DomainError):
        fourier_identity_partial(1.0, 0)


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 2 * math.pi, exclude_max=True), st.integers(1, 3000))
def test_fourier_partial_sums_monotone_with_tail_bound(beta, N):
    a = fourier_identity_partial(beta, N)
    assert fourier_identity_partial(beta, N + 1) >= a - 1e-15
    assert abs(a_exponent(beta) - a) <= 4 / (math.pi**2 * N) + 1e-14


@pytest.mark.parametrize("z,c", [(1.0, 3.0), (0.01, 0.5), (50.0, 0.1), (0.3, -2.0), (5.0, 20.0),
                                 (1e-4, 1e-3), (200.0, 7.0)])
def test_sheet_integral_matches_high_precision_oracle(z, c):
    assert K.sheet_g(z, c) == pytest.approx(sheet_g_mp(z, c), abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(1e-3, 5))
@example(1.0, 0.0, -1.0, 0.0, 1.0)
@example(1.0, 0.0, -1.0, -0.0, 1.0)
def test_sheet_law_is_a_probability(ax, ay, bx, by, dt):
    a, b = complex(ax, ay), complex(bx, by)
    if abs(a) < 1e-3 or abs(b) < 1e-3:
        return
    M = 40
    probs = [bridge_sheet_pmf(m, a, b, dt) for m in range(-M, M + 1)]
    assert min(probs) >= -1e-14
    # |G(z, c)| <= e^z K_0(z)/|c| bounds the mass beyond |m| = M
    z = abs(a) * abs(b) / dt
    phi = math.atan2((b / a).imag, (b / a).real)
    tail = 2 / math.pi * math.exp(-z * (1 + math.cos(phi))) * special.k0e(z) / ((2 * M - 1) * math.pi)
    assert 1 - tail - 1e-10 <= sum(probs) <= 1 + 1e-10


def test_sheet_law_of_a_closed_bridge_is_the_winding_law():
    # a bridge from a back to a around the origin winds m times with
    # probability P(m), the rooted winding law at |a|
    for r, dt in ((1.0, 1.0), (0.5, 2.0)):
        rr = r / math.sqrt(dt)
        for m in (1, 2, -1):
            assert bridge_sheet_pmf(m, r, r, dt) == pytest.approx(TWO_PI * winding_pmf_contour(m, rr), abs=1e-10)
