import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from ridcoverage import expectation as ex
from ridcoverage.expectation import (
    Case,
    QuadratureConfig,
    QuadratureError,
    difference_curve,
    difference_extrema,
    expectation_difference,
    expected_coverage,
    find_crossover,
    midpoint_distance_cdf,
    midpoint_distance_pdf,
    sign_changes,
    ude_expectation,
    ude_integrand,
    udm_expectation,
    udm_integrand,
)
from ridcoverage.geometry import CoverageGeometry

mpmath.mp.dps = 30


def mp_ude(rho):
    """Original-variable UDE integral, tanh-sinh quadrature, split at the kinks."""
    rc = mpmath.mpf(rho)

    def f(b):
        g = (1 + mpmath.cos(b)) / 2
        num = rc**2 - g
        return mpmath.sqrt(num / (1 - g)) if num > 0 else mpmath.mpf(0)

    lo = mpmath.pi - 2 * mpmath.asin(rc)
    hi = mpmath.pi + 2 * mpmath.asin(rc)
    return float(mpmath.quad(f, [lo, mpmath.pi, hi]) / (2 * mpmath.pi))


def mp_udm(rho):
    rc = mpmath.mpf(rho)
    return float(mpmath.quad(lambda l: 2 * l * mpmath.sqrt((rc**2 - l**2) / (1 - l**2)), [0, rc]))


# Brute-force chord simulation with explicit endpoints (tests/oracles/brute_force_mc.py,
# seed 20240501, 1e7 chords each): (rho, mean, standard error).
FROZEN_MC = {
    Case.UDE: [(0.8, 0.39982909588129983, 0.00011169481470450864), (0.5, 0.1339840320620895, 6.30210755341704e-05)],
    Case.UDM: [(0.25, 0.010553895684336885, 1.3727310733691103e-05), (0.5, 0.08807928053394097, 5.148511399775314e-05)],
}


def test_published_values():
    assert ude_expectation(0.5).value == pytest.approx(0.134, abs=1e-3)
    assert udm_expectation(0.5).value == pytest.approx(0.088, abs=1e-3)


@pytest.mark.parametrize("rho", [0.05, 0.2, 0.5, 0.79, 0.95, 0.999])
def test_against_mpmath(rho):
    assert ude_expectation(rho).value == pytest.approx(mp_ude(rho), abs=1e-9)
    assert udm_expectation(rho).value == pytest.approx(mp_udm(rho), abs=1e-9)


@settings(max_examples=200)
@given(st.floats(0.0, 1.0))
def test_ude_closed_form(rho):
    # the substituted integral evaluates to 1 - sqrt(1 - rho^2)
    assert ude_expectation(rho).value == pytest.approx(1 - math.sqrt(1 - rho * rho), abs=1e-9)


@pytest.mark.parametrize("case", list(Case))
def test_against_frozen_brute_force(case):
    for rho, mean, se in FROZEN_MC[case]:
        assert abs(expected_coverage(case, CoverageGeometry(rho, 1.0)).value - mean) <= 4 * se


def test_original_integrands_agree():
    for rho in (0.3, 0.6, 0.9):
        lo, hi = math.pi - 2 * math.asin(rho), math.pi + 2 * math.asin(rho)
        raw = integrate.quad(ude_integrand, lo, hi, args=(rho, 1.0), points=[math.pi], limit=500)[0] / (2 * math.pi)
        assert raw == pytest.approx(ude_expectation(rho).value, abs=1e-6)
        raw = integrate.quad(udm_integrand, 0, rho, args=(rho, 1.0), limit=500)[0]
        assert raw == pytest.approx(udm_expectation(rho).value, abs=1e-6)


@pytest.mark.parametrize("scale", [1e-3, 1.0, 250.0, 1e4])
def test_scale_invariance(scale):
    g = CoverageGeometry(0.4 * scale, scale)
    assert expected_coverage(Case.UDM, g).value == pytest.approx(udm_expectation(0.4).value, rel=1e-12)
    assert expected_coverage("UDE", g).value == pytest.approx(ude_expectation(0.4).value, rel=1e-12)


def test_boundaries():
    for f in (ude_expectation, udm_expectation):
        assert f(0.0).value == 0.0
        assert f(1e-8).value == pytest.approx(0.0, abs=1e-6)
        assert f(1.0).value == 1.0
        assert f(1 - 1e-12).value == pytest.approx(1.0, abs=1e-5)
    assert expectation_difference(0.0) == 0.0
    assert expectation_difference(1.0) == 0.0
    with pytest.raises(ValueError):
        ude_expectation(1.5)


def test_monotone_in_rho():
    curve = difference_curve(np.linspace(0, 1, 51))
    assert np.all(np.diff(curve[:, 1]) > 0)
    assert np.all(np.diff(curve[:, 2]) > 0)
    # UDE above UDM up to the crossover
    assert np.all(curve[1:39, 3] > 0)


def test_crossover_and_extrema():
    rho = find_crossover()
    assert 0.75 <= rho <= 0.83
    assert rho == pytest.approx(0.7891, abs=5e-4)
    assert expectation_difference(rho - 1e-3) > 0 > expectation_difference(rho + 1e-3)
    assert difference_extrema(0.01) == pytest.approx([0.53, 0.97])
    d = difference_curve(np.linspace(0, 1, 101))[:, 3]
    assert sign_changes(d[1:-1]) == 1
    with pytest.raises(ValueError):
        find_crossover(0.1, 0.3)


def test_midpoint_cdf_pdf():
    x = np.linspace(0.01, 1.99, 50)
    h = 1e-6
    fd = (midpoint_distance_cdf(x + h, 2.0) - midpoint_distance_cdf(x - h, 2.0)) / (2 * h)
    assert np.allclose(fd, midpoint_distance_pdf(x, 2.0), atol=1e-6)
    assert midpoint_distance_cdf(0.0, 2.0) == 0.0
    assert midpoint_distance_cdf(2.0, 2.0) == 1.0
    assert midpoint_distance_cdf(5.0, 2.0) == 1.0
    assert midpoint_distance_pdf(-1.0, 2.0) == 0.0


def test_quadrature_failure_reported(monkeypatch):
    def fake_quad(*a, **k):
        return (0.1, 0.5, {}, "The maximum number of subdivisions has been achieved.")

    monkeypatch.setattr(ex.integrate, "quad", fake_quad)
    with pytest.raises(QuadratureError) as info:
        udm_expectation(0.5)
    assert info.value.estimate == 0.1 and info.value.error == 0.5


def test_quadrature_config_validation():
    with pytest.raises(ValueError):
        QuadratureConfig(relative_tolerance=0)
    with pytest.raises(ValueError):
        QuadratureConfig(max_subdivisions=0)
    r = udm_expectation(0.5)
    assert r.estimated_quadrature_error < 1e-8 and r.case is Case.UDM
