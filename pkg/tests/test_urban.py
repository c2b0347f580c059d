import csv
import io
import math
from dataclasses import replace

import numpy as np
import pytest

from conftest import make_one_building_world
from ridcoverage.planning import OdPair, RrtStarParams, path_is_free, plan_rrt_star, plan_slpp
from ridcoverage.rng import RngStream
from ridcoverage.urban import (
    ReceiverCountError,
    ReceiverDeployment,
    ReceiverTech,
    ScenarioConfig,
    convergence_check,
    evaluate_scenario,
    find_receiver_count,
    place_receivers,
    running_mean,
    running_means_csv,
)


def chord_through_origin_disk(a, b, r):
    """Hand formula: length of segment a-b inside the origin disk of radius r."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    d = b - a
    L = np.hypot(*d)
    dist = abs(a[0] * d[1] - a[1] * d[0]) / L  # line distance from origin
    if dist >= r:
        return 0.0
    h = math.sqrt(r * r - dist * dist)
    t = -np.dot(a, d) / L  # foot of perpendicular, along the segment
    return max(0.0, min(L, t + h) - max(0.0, t - h))


def test_tech_parse():
    assert ReceiverTech.parse("r250") is ReceiverTech.R250
    assert ReceiverTech.R2000.radius == 2000.0
    with pytest.raises(ValueError):
        ReceiverTech.parse("R500")


def test_place_receivers(city):
    d = place_receivers(25, city.sites, 3, ReceiverTech.R250)
    assert d.centers.shape == (25, 2)
    assert len({tuple(c) for c in d.centers}) == 25
    assert np.array_equal(d.centers, place_receivers(25, city.sites, 3, ReceiverTech.R250).centers)
    with pytest.raises(ValueError):
        place_receivers(401, city.sites, 0)


def test_spanning_receiver_and_none(city):
    trajs = [plan_slpp(OdPair(v, c)) for v in city.vendors for c in city.customers[:20]]
    span = ReceiverDeployment(np.array([[0.0, 0.0]]), ReceiverTech.R2000)
    none = ReceiverDeployment(np.zeros((0, 2)), ReceiverTech.R2000)
    assert all(span.coverage(t) == 1.0 for t in trajs)
    assert all(none.coverage(t) == 0.0 for t in trajs)


def test_inclusion_monotone(city):
    trajs = [plan_slpp(OdPair(v, c)) for v in city.vendors[:4] for c in city.customers[:25]]
    order = np.random.default_rng(0).permutation(city.sites.shape[0])[:40]
    prev = np.zeros(len(trajs))
    for k in range(1, 41):
        dep = ReceiverDeployment(city.sites[order[:k]], ReceiverTech.R250)
        cur = np.array([dep.coverage(t) for t in trajs])
        assert np.all(cur >= prev - 1e-12)
        prev = cur


def test_one_building_known_values():
    world = make_one_building_world()
    cfg = ScenarioConfig(tech="R250", n_receivers=1, trajectories_per_trial=60, n_trials=2, seed=1)
    res = evaluate_scenario(cfg, world)
    # the only site is the building centroid at the origin
    expected = {
        round(chord_through_origin_disk(v, c, 250.0) / np.hypot(*(c - v)), 12)
        for v in world.vendors
        for c in world.customers
    }
    assert {round(x, 12) for x in res.coverages} <= expected
    # the axis pair passes through the centre: 500 m of 800 m covered
    assert chord_through_origin_disk((-400, 0), (400, 0), 250.0) == pytest.approx(500.0)
    assert 0.625 in {round(x, 12) for x in res.coverages}
    assert res.overall_mean == pytest.approx(np.mean(res.per_trial_means))
    assert res.failures == 0


def test_rrt_scenario_paths_are_free():
    world = make_one_building_world()
    cfg = ScenarioConfig(tech="R250", planner="RRTStar", n_receivers=1, trajectories_per_trial=4, n_trials=1, seed=2)
    res = evaluate_scenario(cfg, world)
    assert np.all((res.coverages >= 0) & (res.coverages <= 1))
    grid = world.grid(200)
    t = plan_rrt_star(OdPair((-400, 0), (400, 0)), grid, RrtStarParams(rng=RngStream(0)))
    assert path_is_free(t.waypoints, grid, 5.0)
    # the detour around the building leaves the disk earlier than the straight axis line
    assert ReceiverDeployment(np.zeros((1, 2)), ReceiverTech.R250).coverage(t) < 0.625


def test_determinism_and_threads(city):
    cfg = ScenarioConfig(tech="R250", n_receivers=15, trajectories_per_trial=50, n_trials=3, seed=9)
    a = evaluate_scenario(cfg, city, threads=1)
    b = evaluate_scenario(cfg, city, threads=3)
    assert np.array_equal(a.coverages, b.coverages)
    c = evaluate_scenario(replace(cfg, seed=10), city)
    assert not np.array_equal(a.coverages, c.coverages)


def test_fixed_deployment(city):
    cfg = ScenarioConfig(tech="R1000", n_receivers=2, trajectories_per_trial=20, n_trials=2, fixed_deployment=True)
    res = evaluate_scenario(cfg, city)
    assert len(res.per_trial_means) == 2


def test_running_mean_and_convergence():
    assert running_mean([1, 0, 1, 0]).tolist() == [1, 0.5, 2 / 3, 0.5]
    flat = np.full(100, 0.4)
    assert convergence_check(flat, 50, 0.0)
    drift = np.linspace(0, 1, 100)
    assert not convergence_check(drift, 50, 0.03)
    with pytest.raises(ValueError):
        convergence_check(flat, 100, 0.03)
    rows = list(csv.reader(io.StringIO(running_means_csv(np.array([0.5, 0.25])))))
    assert rows == [["trajectory_index", "running_mean"], ["0", "0.5"], ["1", "0.25"]]


def test_find_receiver_count(city):
    cfg = ScenarioConfig(tech="R250", trajectories_per_trial=40, n_trials=2, seed=4)
    n, achieved = find_receiver_count(0.5, cfg, city)
    assert achieved >= 0.5
    below = evaluate_scenario(replace(cfg, n_receivers=n - 1), city).overall_mean
    assert below < 0.5
    assert find_receiver_count(0.0, cfg, city) == (0, 0.0)
    with pytest.raises(ReceiverCountError):
        find_receiver_count(0.99, cfg, city, upper=2)


def test_larger_radius_needs_fewer(city):
    base = ScenarioConfig(trajectories_per_trial=40, n_trials=2, seed=4)
    n250, _ = find_receiver_count(0.6, replace(base, tech=ReceiverTech.R250), city)
    n1000, _ = find_receiver_count(0.6, replace(base, tech=ReceiverTech.R1000), city)
    assert n1000 < n250


def test_config_validation():
    with pytest.raises(ValueError):
        ScenarioConfig(n_receivers=-1)
    with pytest.raises(ValueError):
        ScenarioConfig(planner="Dijkstra")


def test_paired_seed_monotone_in_expectation(city):
    base = ScenarioConfig(tech="R250", trajectories_per_trial=100, n_trials=3, seed=12)
    prev = None
    for n in (5, 10, 20, 40):
        res = evaluate_scenario(replace(base, n_receivers=n), city)
        se = res.coverages.std(ddof=1) / math.sqrt(res.coverages.size)
        if prev is not None:
            assert res.overall_mean >= prev[0] - 2 * math.hypot(se, prev[1])
        prev = (res.overall_mean, se)
