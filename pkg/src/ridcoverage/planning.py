"""Origin-destination trajectories: straight line (SLPP) and RRT* on an occupancy grid."""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .geo import OccupancyGrid
from .geometry import Point2
from .rng import RngStream

# candidate draws per sampling chunk; fixed so every run sees the same prefix
_SAMPLE_CHUNK = 1024


class Planner(str, enum.Enum):
    SLPP = "SLPP"
    RRT_STAR = "RRTStar"


class PlanningError(RuntimeError):
    def __init__(self, message: str, od: Optional["OdPair"] = None):
        if od is not None:
            message = f"{message} for OD pair {tuple(od.origin)} -> {tuple(od.destination)}"
        super().__init__(message)
        self.od = od


@dataclass(frozen=True)
class OdPair:
    origin: Point2
    destination: Point2

    def __post_init__(self):
        object.__setattr__(self, "origin", Point2.of(self.origin))
        object.__setattr__(self, "destination", Point2.of(self.destination))
        if self.origin == self.destination:
            raise ValueError("origin and destination coincide")


@dataclass(frozen=True)
class Trajectory:
    waypoints: np.ndarray
    planner: Planner
    altitude_ft: Optional[float] = None

    def __post_init__(self):
        pts = np.asarray(self.waypoints, dtype=float).reshape(-1, 2)
        keep = np.ones(pts.shape[0], dtype=bool)
        keep[1:] = np.any(pts[1:] != pts[:-1], axis=1)
        pts = pts[keep]
        if pts.shape[0] < 2:
            raise ValueError("trajectory needs two distinct waypoints")
        pts.setflags(write=False)
        object.__setattr__(self, "waypoints", pts)
        object.__setattr__(self, "planner", Planner(self.planner))

    @property
    def total_length(self) -> float:
        d = np.diff(self.waypoints, axis=0)
        return float(np.hypot(d[:, 0], d[:, 1]).sum())

    def to_json(self) -> str:
        return json.dumps(
            {
                "planner": self.planner.value,
                "altitude_ft": self.altitude_ft,
                "waypoints": self.waypoints.tolist(),
                "length_m": self.total_length,
            }
        )

    @classmethod
    def from_json(cls, line: str) -> "Trajectory":
        d = json.loads(line)
        return cls(np.array(d["waypoints"], dtype=float), Planner(d["planner"]), d.get("altitude_ft"))


def plan_slpp(od: OdPair, altitude_ft: Optional[float] = None) -> Trajectory:
    """Straight line from origin to destination; obstacles are ignored."""
    return Trajectory(np.array([od.origin, od.destination], dtype=float), Planner.SLPP, altitude_ft)


@dataclass(frozen=True)
class RrtStarParams:
    """RRT* settings. Lengths in metres.

    The rewire radius after ``n`` nodes is
    ``max(step_size, rewire_radius_gamma * sqrt(A_free / pi * log(n) / n))``
    with ``A_free`` the free area of the grid; ``gamma = 2.5`` sits just above
    the ``2 * sqrt(1.5)`` needed for asymptotic optimality in 2D.
    """

    max_iterations: int = 5000
    step_size: float = 50.0
    goal_bias: float = 0.05
    goal_radius: float = 25.0
    rewire_radius_gamma: float = 2.5
    collision_check_resolution: Optional[float] = None
    rng: RngStream = field(default_factory=lambda: RngStream(0))

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if min(self.step_size, self.goal_radius, self.rewire_radius_gamma) <= 0:
            raise ValueError("step_size, goal_radius and rewire_radius_gamma must be positive")
        if not 0.0 <= self.goal_bias < 1.0:
            raise ValueError("goal_bias must lie in [0, 1)")
        if self.collision_check_resolution is not None and self.collision_check_resolution <= 0:
            raise ValueError("collision_check_resolution must be positive")

    def resolution(self, grid: OccupancyGrid) -> float:
        return self.collision_check_resolution or grid.cell_size / 2.0


def _kernel():
    # compiled lazily so importing the package does not pull in numba
    from . import _rrt_kernel

    return _rrt_kernel


def draw_free_samples(grid: OccupancyGrid, goal, n: int, goal_bias: float, gen: np.random.Generator) -> np.ndarray:
    """``n`` sample points: the goal with probability ``goal_bias``, else uniform free cells.

    Candidates come in fixed-size chunks, so the first ``k`` samples are the
    same whatever ``n`` is.
    """
    x0, y0, x1, y1 = grid.bounds
    out = []
    have = 0
    goal = np.asarray(goal, dtype=float)
    while have < n:
        xyu = gen.random(size=(_SAMPLE_CHUNK, 3))
        pts = np.column_stack([x0 + xyu[:, 0] * (x1 - x0), y0 + xyu[:, 1] * (y1 - y0)])
        to_goal = xyu[:, 2] < goal_bias
        pts[to_goal] = goal
        keep = to_goal | grid.is_free(pts)
        pts = pts[keep]
        out.append(pts)
        have += pts.shape[0]
    return np.concatenate(out)[:n]


def path_is_free(waypoints, grid: OccupancyGrid, resolution: float) -> bool:
    pts = np.asarray(waypoints, dtype=float)
    cells = grid.cells
    ox, oy = grid.origin
    return all(
        _kernel().segment_free(pts[i, 0], pts[i, 1], pts[i + 1, 0], pts[i + 1, 1], cells, ox, oy, grid.cell_size, resolution)
        for i in range(pts.shape[0] - 1)
    )


@dataclass(frozen=True)
class RrtStarResult:
    trajectory: Trajectory
    cost: float
    n_nodes: int


def plan_rrt_star_detailed(od: OdPair, grid: OccupancyGrid, params: RrtStarParams = RrtStarParams()) -> RrtStarResult:
    start = np.array(od.origin, dtype=float)
    goal = np.array(od.destination, dtype=float)
    if not grid.is_free(start)[0]:
        raise PlanningError("origin lies in an occupied cell", od)
    if not grid.is_free(goal)[0]:
        raise PlanningError("destination lies in an occupied cell", od)

    res = params.resolution(grid)
    free_area = float((~grid.cells).sum()) * grid.cell_size**2
    gamma_len = params.rewire_radius_gamma * math.sqrt(free_area / math.pi)
    samples = draw_free_samples(grid, goal, params.max_iterations, params.goal_bias, params.rng.generator())
    nodes, parent, _, n_nodes, best, best_cost = _kernel().grow_tree(
        samples,
        start,
        goal,
        np.ascontiguousarray(grid.cells),
        grid.origin.x,
        grid.origin.y,
        grid.cell_size,
        float(params.step_size),
        float(params.goal_radius),
        gamma_len,
        res,
    )
    if best < 0:
        raise PlanningError(f"RRT* found no path in {params.max_iterations} iterations", od)
    chain = []
    j = best
    while j >= 0:
        chain.append(nodes[j])
        j = parent[j]
    pts = np.array(chain[::-1])
    if np.any(pts[-1] != goal):
        pts = np.vstack([pts, goal])
    traj = Trajectory(pts, Planner.RRT_STAR, grid.altitude_ft)
    return RrtStarResult(traj, float(best_cost), int(n_nodes))


def plan_rrt_star(od: OdPair, grid: OccupancyGrid, params: RrtStarParams = RrtStarParams()) -> Trajectory:
    """Collision-free RRT* path from origin to destination; no post-smoothing."""
    return plan_rrt_star_detailed(od, grid, params).trajectory
