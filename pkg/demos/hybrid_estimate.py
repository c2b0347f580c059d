"""
Hybrid estimate: packing the city with idealised circles
========================================================

Tile the region with non-overlapping environment circles, put one receiver in
the middle of each and credit every piece of a flight that falls inside a
circle with the analytic expected coverage. Flight length outside all
circles is the error term epsilon.
"""

import numpy as np
from shapely.geometry import box

from ridcoverage.hybrid import hybrid_report, pack_roi, simulated_coverage_at_centers
from ridcoverage.planning import OdPair, plan_slpp
from ridcoverage.rng import RngStream

region = box(-1000, -1000, 1000, 1000)
packing = pack_roi(region, r_e=250.0, r_c=250.0 * 0.6)
print("environments packed:", packing.K)

gen = RngStream(3).generator()
pts = gen.uniform(-1000, 1000, (300, 2, 2))
flights = [plan_slpp(OdPair(a, b)) for a, b in pts if np.any(a != b)]

for case in ("UDE", "UDM"):
    rep = hybrid_report(flights, packing, case)
    print(f"{case}: estimate {rep['estimate']:.3f}, epsilon {rep['epsilon']:.3f}")

# What receivers at the circle centres actually see. Pieces of long flights
# are chords weighted by their length, and long chords pass near the centre,
# so the simulated value sits above the per-chord expectation.
print("simulated:", round(simulated_coverage_at_centers(flights, packing), 3))
