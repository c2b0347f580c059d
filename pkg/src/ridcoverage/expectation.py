"""Expected coverage proportions of random chords, by numerical quadrature.

Two chord laws are supported:

``UDE``
    both endpoints uniform on the environment circle;
``UDM``
    the chord midpoint uniform over the environment disk.

Both integrands have vertical tangents at their endpoints. The integrals are
therefore evaluated after a trigonometric change of variables that makes the
integrand smooth on ``[0, pi/2]``:

* UDE: with the second endpoint at angle ``b = pi + phi`` and
  ``sin(phi/2) = rho*sin(theta)``, the integrand becomes
  ``2 rho^2 cos^2(theta) / (1 - rho^2 sin^2(theta))`` with prefactor ``1/pi``.
* UDM: with ``l = r_c sin(theta)`` the integrand becomes
  ``2 rho^3 sin(theta) cos^2(theta) / sqrt(1 - rho^2 sin^2(theta))``.

The substituted integrals are exact rewrites of the original ones; the
original forms are kept in :func:`ude_integrand` / :func:`udm_integrand` for
cross-checking.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .geometry import CoverageGeometry


class Case(str, enum.Enum):
    UDE = "UDE"
    UDM = "UDM"


@dataclass(frozen=True)
class QuadratureConfig:
    relative_tolerance: float = 1e-8
    absolute_tolerance: float = 1e-10
    max_subdivisions: int = 2000

    def __post_init__(self):
        if self.relative_tolerance <= 0 or self.absolute_tolerance <= 0:
            raise ValueError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be at least 1")


DEFAULT_QUAD = QuadratureConfig()


@dataclass(frozen=True)
class ExpectationResult:
    value: float
    estimated_quadrature_error: float
    case: Case


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not meet its tolerance; carries the best estimate."""

    def __init__(self, message: str, estimate: float, error: float):
        super().__init__(f"{message} (estimate={estimate!r}, error bound={error!r})")
        self.estimate = estimate
        self.error = error


def ude_integrand(b, r_c: float, r_e: float):
    """Coverage proportion of the chord from angle 0 to ``b`` (original variable)."""
    gamma = (1.0 + np.cos(b)) / 2.0
    num = np.maximum(r_c**2 - r_e**2 * gamma, 0.0)
    return np.sqrt(num / (r_e**2 - r_e**2 * gamma))


def udm_integrand(l, r_c: float, r_e: float):
    return 2.0 * l / r_e**2 * np.sqrt((r_c**2 - l**2) / (r_e**2 - l**2))


def _integrate(f, case: Case, quad: QuadratureConfig) -> ExpectationResult:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        out = integrate.quad(
            f,
            0.0,
            math.pi / 2.0,
            epsabs=quad.absolute_tolerance,
            epsrel=quad.relative_tolerance,
            limit=quad.max_subdivisions,
            full_output=1,
        )
    value, err = float(out[0]), float(out[1])
    if len(out) > 3:
        raise QuadratureError(f"{case.value} quadrature failed: {out[3].strip()}", value, err)
    return ExpectationResult(min(max(value, 0.0), 1.0), abs(err), case)


def _check_rho(rho: float) -> float:
    rho = float(rho)
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    return rho


def ude_expectation(rho: float, quad: QuadratureConfig = DEFAULT_QUAD) -> ExpectationResult:
    rho = _check_rho(rho)
    if rho == 0.0:
        return ExpectationResult(0.0, 0.0, Case.UDE)
    if rho == 1.0:
        return ExpectationResult(1.0, 0.0, Case.UDE)
    r2 = rho * rho

    def f(t):
        s = math.sin(t)
        c = math.cos(t)
        return 2.0 * r2 * c * c / (1.0 - r2 * s * s) / math.pi

    return _integrate(f, Case.UDE, quad)


def udm_expectation(rho: float, quad: QuadratureConfig = DEFAULT_QUAD) -> ExpectationResult:
    rho = _check_rho(rho)
    if rho == 0.0:
        return ExpectationResult(0.0, 0.0, Case.UDM)
    if rho == 1.0:
        return ExpectationResult(1.0, 0.0, Case.UDM)
    r2 = rho * rho
    r3 = r2 * rho

    def f(t):
        s = math.sin(t)
        c = math.cos(t)
        return 2.0 * r3 * s * c * c / math.sqrt(1.0 - r2 * s * s)

    return _integrate(f, Case.UDM, quad)


def expected_coverage_ude(geom: CoverageGeometry, quad: QuadratureConfig = DEFAULT_QUAD) -> ExpectationResult:
    return ude_expectation(geom.rho, quad)


def expected_coverage_udm(geom: CoverageGeometry, quad: QuadratureConfig = DEFAULT_QUAD) -> ExpectationResult:
    return udm_expectation(geom.rho, quad)


def expected_coverage(case: Case, geom: CoverageGeometry, quad: QuadratureConfig = DEFAULT_QUAD) -> ExpectationResult:
    if Case(case) is Case.UDE:
        return expected_coverage_ude(geom, quad)
    return expected_coverage_udm(geom, quad)


def midpoint_distance_cdf(ell_star, r_e: float):
    """Distribution of the distance of a uniform midpoint from the centre."""
    x = np.asarray(ell_star, dtype=float)
    out = np.clip(x / r_e, 0.0, 1.0) ** 2
    return float(out) if out.ndim == 0 else out


def midpoint_distance_pdf(ell_star, r_e: float):
    x = np.asarray(ell_star, dtype=float)
    out = np.where((x >= 0.0) & (x <= r_e), 2.0 * x / r_e**2, 0.0)
    return float(out) if out.ndim == 0 else out


def expectation_difference(rho: float, quad: QuadratureConfig = DEFAULT_QUAD) -> float:
    """UDE minus UDM expectation at ``r_c = rho``, ``r_e = 1``."""
    return ude_expectation(rho, quad).value - udm_expectation(rho, quad).value


def find_crossover(
    lo: float = 0.75,
    hi: float = 0.83,
    tol: float = 1e-4,
    quad: QuadratureConfig = DEFAULT_QUAD,
) -> float:
    """Bisect for the sign change of :func:`expectation_difference` inside ``[lo, hi]``."""
    f_lo = expectation_difference(lo, quad)
    f_hi = expectation_difference(hi, quad)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if np.sign(f_lo) == np.sign(f_hi):
        raise ValueError(f"no sign change in [{lo}, {hi}]")
    while hi - lo >= tol:
        mid = 0.5 * (lo + hi)
        f_mid = expectation_difference(mid, quad)
        if f_mid == 0.0:
            return mid
        if np.sign(f_mid) == np.sign(f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def difference_curve(rhos, quad: QuadratureConfig = DEFAULT_QUAD) -> np.ndarray:
    """Rows of ``(rho, ude, udm, delta)`` for each ``rho``."""
    rows = []
    for rho in rhos:
        u = ude_expectation(rho, quad).value
        m = udm_expectation(rho, quad).value
        rows.append((float(rho), u, m, u - m))
    return np.array(rows)


def difference_extrema(step: float = 0.01, quad: QuadratureConfig = DEFAULT_QUAD) -> list[float]:
    """Grid locations of interior local maxima of ``|delta|`` on ``[0, 1]``."""
    n = int(round(1.0 / step))
    rhos = np.linspace(0.0, 1.0, n + 1)
    mag = np.abs(difference_curve(rhos, quad)[:, 3])
    peaks = (mag[1:-1] > mag[:-2]) & (mag[1:-1] >= mag[2:])
    return [float(r) for r in rhos[1:-1][peaks]]


def sign_changes(values) -> int:
    s = np.sign(np.asarray(values, dtype=float))
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))
