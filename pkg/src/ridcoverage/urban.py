"""Receiver deployments and trajectory coverage over a projected city."""

from __future__ import annotations

import csv
import enum
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .geo import CityData
from .geometry import polyline_coverage_proportion
from .planning import OdPair, Planner, PlanningError, RrtStarParams, Trajectory, plan_rrt_star, plan_slpp
from .rng import RngLike, RngStream, as_generator


class ReceiverTech(enum.Enum):
    """Receiver technology groups and their coverage radius in metres."""

    R250 = 250.0  # Bluetooth Legacy
    R1000 = 1000.0  # Bluetooth Long Range
    R2000 = 2000.0  # Wi-Fi NAN / Beacon

    @property
    def radius(self) -> float:
        return self.value

    @classmethod
    def parse(cls, name) -> "ReceiverTech":
        if isinstance(name, cls):
            return name
        try:
            return cls[str(name).upper()]
        except KeyError:
            raise ValueError(f"unknown receiver technology {name!r}; choose from {[t.name for t in cls]}") from None


@dataclass(frozen=True)
class ReceiverDeployment:
    centers: np.ndarray
    tech: ReceiverTech

    @property
    def radius(self) -> float:
        return self.tech.radius

    def disks(self) -> tuple[np.ndarray, np.ndarray]:
        return self.centers, np.full(self.centers.shape[0], self.radius)

    def coverage(self, traj: Trajectory) -> float:
        if self.centers.shape[0] == 0:
            return 0.0
        return polyline_coverage_proportion(traj.waypoints, self.disks())


def place_receivers(n: int, sites: np.ndarray, rng: RngLike, tech: ReceiverTech = ReceiverTech.R1000) -> ReceiverDeployment:
    """``n`` distinct candidate sites drawn uniformly without replacement."""
    sites = np.asarray(sites, dtype=float).reshape(-1, 2)
    if n < 0:
        raise ValueError("receiver count must be non-negative")
    if n > sites.shape[0]:
        raise ValueError(f"requested {n} receivers but only {sites.shape[0]} candidate sites")
    idx = as_generator(rng).choice(sites.shape[0], size=n, replace=False)
    return ReceiverDeployment(sites[np.sort(idx)], tech)


@dataclass(frozen=True)
class ScenarioConfig:
    altitude_ft: float = 200.0
    tech: ReceiverTech = ReceiverTech.R1000
    planner: Planner = Planner.SLPP
    n_receivers: int = 30
    trajectories_per_trial: int = 1000
    n_trials: int = 20
    seed: int = 0
    fixed_deployment: bool = False
    rrt: RrtStarParams = field(default_factory=RrtStarParams)
    convergence_window: int = 50
    convergence_tolerance: float = 0.03
    max_planning_failures: int = 1000

    def __post_init__(self):
        object.__setattr__(self, "tech", ReceiverTech.parse(self.tech))
        object.__setattr__(self, "planner", Planner(self.planner))
        if self.n_receivers < 0:
            raise ValueError("n_receivers must be non-negative")
        if self.trajectories_per_trial < 1 or self.n_trials < 1:
            raise ValueError("trial and trajectory counts must be positive")


@dataclass
class ScenarioResult:
    per_trial_means: list[float]
    overall_mean: float
    running_means: np.ndarray
    converged: bool
    coverages: np.ndarray
    failures: int = 0
    n_receivers: int = 0

    def summary(self, cfg: ScenarioConfig) -> dict:
        return {
            "tech": cfg.tech.name,
            "planner": cfg.planner.value,
            "altitude_ft": cfg.altitude_ft,
            "n_receivers": self.n_receivers,
            "overall_mean": self.overall_mean,
            "per_trial_means": self.per_trial_means,
            "converged": self.converged,
            "trials": len(self.per_trial_means),
            "trajectories_per_trial": cfg.trajectories_per_trial,
            "failures": self.failures,
        }


def running_mean(values) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    return np.cumsum(v) / np.arange(1, v.size + 1)


def convergence_check(running_means, window: int, tolerance: float) -> bool:
    """True iff the last ``window`` running means stay within ``tolerance`` of the final one."""
    r = np.asarray(running_means, dtype=float)
    if window >= r.size:
        raise ValueError(f"window {window} must be shorter than the series ({r.size})")
    tail = r[-window:]
    return bool(np.max(np.abs(tail - r[-1])) <= tolerance)


def running_means_csv(running: np.ndarray) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(["trajectory_index", "running_mean"])
    for i, v in enumerate(running):
        w.writerow([i, repr(float(v))])
    return buf.getvalue()


def _sample_od(world: CityData, gen: np.random.Generator) -> OdPair:
    while True:
        o = world.vendors[gen.integers(world.vendors.shape[0])]
        d = world.customers[gen.integers(world.customers.shape[0])]
        if np.any(o != d):
            return OdPair(o, d)


def _run_trial(cfg: ScenarioConfig, world: CityData, trial: int, deployment: Optional[ReceiverDeployment]):
    stream = RngStream(cfg.seed).child(trial)
    gen = stream.generator()
    if deployment is None:
        deployment = place_receivers(cfg.n_receivers, world.sites, stream.child(0), cfg.tech)
    grid = world.grid(cfg.altitude_ft) if cfg.planner is Planner.RRT_STAR else None
    cov = np.empty(cfg.trajectories_per_trial)
    failures = 0
    j = 0
    attempt = 0
    while j < cfg.trajectories_per_trial:
        od = _sample_od(world, gen)
        if cfg.planner is Planner.SLPP:
            traj = plan_slpp(od, cfg.altitude_ft)
        else:
            params = replace(cfg.rrt, rng=stream.child(1, attempt))
            attempt += 1
            try:
                traj = plan_rrt_star(od, grid, params)
            except PlanningError:
                failures += 1
                if failures > cfg.max_planning_failures:
                    raise
                continue
        cov[j] = deployment.coverage(traj)
        j += 1
    return cov, failures


def evaluate_scenario(cfg: ScenarioConfig, world: CityData, threads: int = 1) -> ScenarioResult:
    """Mean trajectory coverage over ``n_trials`` trials of random OD pairs.

    Each trial draws a fresh receiver deployment (unless ``fixed_deployment``)
    and its own OD pairs from child streams of ``cfg.seed``; results are
    ordered by trial index regardless of ``threads``.
    """
    if world.vendors.shape[0] == 0 or world.customers.shape[0] == 0:
        raise ValueError("city needs at least one vendor and one customer")
    fixed = None
    if cfg.fixed_deployment:
        fixed = place_receivers(cfg.n_receivers, world.sites, RngStream(cfg.seed, 1), cfg.tech)
    if cfg.planner is Planner.RRT_STAR:
        world.grid(cfg.altitude_ft)  # build once before threads share it

    def job(t):
        return _run_trial(cfg, world, t, fixed)

    if threads > 1 and cfg.n_trials > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(job, range(cfg.n_trials)))
    else:
        parts = [job(t) for t in range(cfg.n_trials)]

    coverages = np.concatenate([p[0] for p in parts])
    per_trial = [float(np.mean(p[0])) for p in parts]
    running = running_mean(coverages)
    converged = coverages.size > cfg.convergence_window and convergence_check(
        running, cfg.convergence_window, cfg.convergence_tolerance
    )
    return ScenarioResult(
        per_trial_means=per_trial,
        overall_mean=float(np.mean(per_trial)),
        running_means=running,
        converged=converged,
        coverages=coverages,
        failures=sum(p[1] for p in parts),
        n_receivers=cfg.n_receivers,
    )


class ReceiverCountError(RuntimeError):
    def __init__(self, target: float, best_n: int, best_mean: float):
        super().__init__(f"coverage target {target} unreachable; best was n={best_n} with mean {best_mean:.4f}")
        self.target = target
        self.best_n = best_n
        self.best_mean = best_mean


def find_receiver_count(
    target: float,
    cfg: ScenarioConfig,
    world: CityData,
    lower: int = 1,
    upper: Optional[int] = None,
    threads: int = 1,
) -> tuple[int, float]:
    """Smallest receiver count whose mean coverage reaches ``target``.

    Doubles from ``lower`` until the target is met (or ``upper``, default the
    number of candidate sites, is hit), then bisects. Every evaluation reuses
    ``cfg``'s seed, so neighbouring counts share OD pairs.
    """
    if target <= 0.0:
        return 0, 0.0
    if target >= 1.0:
        raise ValueError("target must lie in (0, 1)")
    upper = world.sites.shape[0] if upper is None else min(upper, world.sites.shape[0])
    lower = max(1, lower)
    if upper < lower:
        raise ReceiverCountError(target, 0, 0.0)
    seen: dict[int, float] = {}

    def mean_at(n):
        if n not in seen:
            seen[n] = evaluate_scenario(replace(cfg, n_receivers=n), world, threads).overall_mean
        return seen[n]

    lo, hi = lower - 1, None
    n = lower
    while True:
        if mean_at(n) >= target:
            hi = n
            break
        lo = n
        if n >= upper:
            best = max(seen, key=lambda k: (seen[k], -k))
            raise ReceiverCountError(target, best, seen[best])
        n = min(2 * n, upper)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if mean_at(mid) >= target:
            hi = mid
        else:
            lo = mid
    return hi, seen[hi]
