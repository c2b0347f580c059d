"""
Expected coverage of one receiver
=================================

A receiver hears drones within ``r_c`` of it. Drones fly straight chords of
a larger circle of radius ``r_e``. How much of a random flight is heard
depends on how the chord is drawn: uniform endpoints (UDE) or a uniform
midpoint (UDM). Both expectations depend only on ``rho = r_c / r_e``.
"""

import numpy as np

from ridcoverage.expectation import difference_curve, difference_extrema, find_crossover, udm_expectation, ude_expectation

# the textbook case: environment twice the coverage radius
print("UDE at rho=0.5:", round(ude_expectation(0.5).value, 4))
print("UDM at rho=0.5:", round(udm_expectation(0.5).value, 4))

# UDE also has a closed form, handy as a sanity check
print("1 - sqrt(1 - rho^2):", round(1 - np.sqrt(0.75), 4))

###############################################################################
# Sweep rho and look at the gap between the two laws.

curve = difference_curve(np.linspace(0, 1, 11))
print(" rho    UDE     UDM    delta")
for rho, u, m, d in curve:
    print(f"{rho:4.1f} {u:7.4f} {m:7.4f} {d:+8.4f}")

# endpoint sampling wins for small receivers, midpoint sampling for large ones
print("sign change at rho ~", round(find_crossover(), 4))
print("largest gaps near rho =", difference_extrema(0.01))
