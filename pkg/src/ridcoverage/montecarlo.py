"""Monte Carlo chord sampling and the analytic-vs-empirical verification sweep."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .expectation import DEFAULT_QUAD, Case, QuadratureConfig, QuadratureError, expected_coverage
from .geometry import TWO_PI, Chord, CoverageGeometry, chord_from_angles, coverage_from_ell
from .rng import RngLike, RngStream, as_generator

# Trials are processed in fixed-size blocks, one child stream per block, so
# the sample sequence does not depend on the number of worker threads.
TRIAL_BLOCK = 4096

REFERENCE_RE_GRID = (0.1, 1.0, 1.5, 2.0, 2.5)
REFERENCE_RC_FRACTIONS = (0.2, 0.4, 0.6, 0.8, 1.0)

SWEEP_COLUMNS = ("case", "r_e", "r_c", "analytic", "mc_mean", "mc_std", "mc_stderr", "n_trials", "consistent")


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_dev: float
    std_error: float
    n_trials: int

    @classmethod
    def from_samples(cls, values: np.ndarray) -> "McEstimate":
        n = values.size
        mean = float(np.mean(values))
        std = float(np.std(values, ddof=1)) if n > 1 else 0.0
        return cls(min(max(mean, 0.0), 1.0), std, std / math.sqrt(n), n)


# --- samplers ---------------------------------------------------------------


def ude_angles(gen: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
    ab = gen.uniform(0.0, TWO_PI, size=(n, 2))
    return ab[:, 0], ab[:, 1]


def udm_polar(gen: np.random.Generator, n: int, r_e: float) -> tuple[np.ndarray, np.ndarray]:
    """Midpoint distance and bearing, uniform over the environment disk."""
    u = gen.random(size=(n, 2))
    return r_e * np.sqrt(u[:, 0]), TWO_PI * u[:, 1]


def sample_ude_chord(rng: RngLike, geom: CoverageGeometry) -> Chord:
    alpha, beta = ude_angles(as_generator(rng), 1)
    return chord_from_angles(float(alpha[0]), float(beta[0]), geom)


def sample_udm_chord(rng: RngLike, geom: CoverageGeometry) -> Chord:
    """Chord perpendicular to the centre-midpoint ray through a uniform midpoint.

    A midpoint at the exact centre yields the diameter along the drawn bearing.
    """
    ell, phi = udm_polar(as_generator(rng), 1, geom.r_e)
    half_angle = math.acos(min(float(ell[0]) / geom.r_e, 1.0))
    return chord_from_angles(float(phi[0]) - half_angle, float(phi[0]) + half_angle, geom)


def ude_ell(gen: np.random.Generator, n: int, r_e: float) -> tuple[np.ndarray, np.ndarray]:
    """Midpoint distances of ``n`` UDE chords plus a degenerate-chord mask."""
    alpha, beta = ude_angles(gen, n)
    mx = 0.5 * r_e * (np.cos(alpha) + np.cos(beta))
    my = 0.5 * r_e * (np.sin(alpha) + np.sin(beta))
    ell = np.minimum(np.hypot(mx, my), r_e)
    return ell, alpha == beta


def coverage_samples(case: Case, geom: CoverageGeometry, n: int, gen: np.random.Generator) -> np.ndarray:
    if Case(case) is Case.UDE:
        ell, degenerate = ude_ell(gen, n, geom.r_e)
        cov = np.atleast_1d(coverage_from_ell(ell, geom.r_c, geom.r_e))
        cov[degenerate] = 0.0
        return cov
    ell, _ = udm_polar(gen, n, geom.r_e)
    return np.atleast_1d(coverage_from_ell(ell, geom.r_c, geom.r_e))


def estimate_expected_coverage(
    case: Case,
    geom: CoverageGeometry,
    n_trials: int,
    rng: RngStream,
    threads: int = 1,
) -> McEstimate:
    if n_trials < 2:
        raise ValueError("n_trials must be at least 2")
    starts = range(0, n_trials, TRIAL_BLOCK)

    def block(i_start):
        i, start = i_start
        n = min(TRIAL_BLOCK, n_trials - start)
        return coverage_samples(case, geom, n, rng.child(i).generator())

    jobs = list(enumerate(starts))
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(block, jobs))
    else:
        parts = [block(j) for j in jobs]
    return McEstimate.from_samples(np.concatenate(parts))


# --- verification sweep ---------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    case: Case
    r_e: float
    r_c: float
    analytic: Optional[float]
    mc: McEstimate
    error: Optional[str] = None

    @property
    def consistent(self) -> bool:
        """``|analytic - mean| <= 4 * standard error``."""
        if self.analytic is None:
            return False
        return abs(self.analytic - self.mc.mean) <= 4.0 * self.mc.std_error + 1e-12


def verification_sweep(
    r_e_grid: Sequence[float] = REFERENCE_RE_GRID,
    rc_fractions: Sequence[float] = REFERENCE_RC_FRACTIONS,
    n_trials: int = 10_000,
    rng: RngStream = RngStream(0),
    cases: Sequence[Case] = (Case.UDE, Case.UDM),
    quad: QuadratureConfig = DEFAULT_QUAD,
    threads: int = 1,
) -> list[SweepRow]:
    """Analytic expectation next to a Monte Carlo estimate for every grid cell.

    Each cell draws from its own child stream ``(case index, r_e index,
    fraction index)``. A quadrature failure in one cell is recorded in that
    row and does not stop the sweep.
    """
    if not r_e_grid or not rc_fractions:
        raise ValueError("sweep grids must be non-empty")
    rows = []
    for ci, case in enumerate(cases):
        for ei, r_e in enumerate(r_e_grid):
            for fi, frac in enumerate(rc_fractions):
                r_c = float(frac) * float(r_e)
                geom = CoverageGeometry(r_c=r_c, r_e=float(r_e))
                analytic, err = None, None
                try:
                    analytic = expected_coverage(case, geom, quad).value
                except QuadratureError as exc:
                    err = str(exc)
                mc = estimate_expected_coverage(case, geom, n_trials, rng.child(ci, ei, fi), threads)
                rows.append(SweepRow(Case(case), float(r_e), r_c, analytic, mc, err))
    return rows


def sweep_to_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(SWEEP_COLUMNS)
    for r in rows:
        w.writerow(
            [
                r.case.value,
                repr(r.r_e),
                repr(r.r_c),
                "" if r.analytic is None else repr(r.analytic),
                repr(r.mc.mean),
                repr(r.mc.std_dev),
                repr(r.mc.std_error),
                r.mc.n_trials,
                int(r.consistent),
            ]
        )
    return buf.getvalue()
