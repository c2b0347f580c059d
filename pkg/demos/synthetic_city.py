"""
Delivery drones over a synthetic city
=====================================

A 2 km square city with a regular block of towers, a ring of stores and four
residential quadrants. Drones fly from a random store to a random customer,
either in a straight line (SLPP) or around tall buildings with RRT*.
Receivers sit on building centroids.
"""

import tempfile

from ridcoverage.geo import load_city
from ridcoverage.synthetic import write_synthetic_city
from ridcoverage.urban import ScenarioConfig, evaluate_scenario, find_receiver_count

with tempfile.TemporaryDirectory() as tmp:
    files = write_synthetic_city(tmp)
    city = load_city(files["buildings"], files["vendors"], files["residential"], files["roi"], n_customers=1000, rng=1)

print(len(city.buildings), "buildings,", len(city.vendors), "stores,", len(city.customers), "customers")
print("occupied cells at 200 ft:", int(city.grid(200).cells.sum()))

###############################################################################
# Straight lines versus planned paths with the same 20 short-range receivers.

for planner in ("SLPP", "RRTStar"):
    cfg = ScenarioConfig(tech="R250", planner=planner, n_receivers=20, trajectories_per_trial=200, n_trials=1)
    res = evaluate_scenario(cfg, city)
    print(f"{planner:8s} mean coverage {res.overall_mean:.3f}, stable after 200 flights: {res.converged}")

###############################################################################
# How many receivers for 75 % coverage? Longer range needs far fewer.

for tech in ("R250", "R1000"):
    n, got = find_receiver_count(0.75, ScenarioConfig(tech=tech, trajectories_per_trial=100, n_trials=2), city)
    print(f"{tech}: {n} receivers reach {got:.3f}")
