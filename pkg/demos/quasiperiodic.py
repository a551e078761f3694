"""
Quasi-periodic phases
=====================

With ``theta_k = 2 pi beta k + theta0`` the exponent is bounded below by
``ln(1/t**2)`` for every irrational ``beta``.  When ``beta`` is extremely
well approximated by rationals, solutions also fail to decay, which rules
out eigenvalues.  Both effects are visible at desk scale.
"""

import math

import numpy as np

from unitaryband.lyapunov import gordon_ratio, herman_average, herman_circle_mean
from unitaryband.models import AlmostPeriodicPhases, PeriodicPhases
from unitaryband.periodic import model_band_arcs
from unitaryband.transfer import propagate

t = 0.5
golden = AlmostPeriodicPhases(t=t, beta=(math.sqrt(5) - 1) / 2)
mean, est = herman_average(golden, n_theta=16, steps=20_000)
print(f"mean exponent over 16 offsets {mean:.4f}, bound ln(1/t^2) = {-2 * math.log(t):.4f}")
for n in (1, 10, 100):
    print(f"  circle mean of (1/n) ln|T(n)...T(1)| at n = {n:3d}: "
          f"{herman_circle_mean(golden, n):.4f}")

# near-rational frequencies: solutions return to size 1/4 or more
theta0 = 0.7
print("\n p/q    lambda     min ratio over starting directions")
for p, q in ((1, 3), (2, 5), (3, 8)):
    approx = PeriodicPhases(t=t, theta=tuple(2 * np.pi * p * k / q + theta0 for k in range(q)),
                            pi=(0.0,) * q)
    lo, hi = max(model_band_arcs(approx).arcs, key=lambda arc: arc[1] - arc[0])
    lam = 0.5 * (lo + hi)
    model = AlmostPeriodicPhases(t=t, beta=p / q + 1e-9, theta0=theta0)
    ratios = [gordon_ratio(propagate(np.cos(a), np.sin(a), lam, model, (-q, 2 * q),
                                     form="reduced"), q)
              for a in np.pi * np.arange(16) / 16]
    print(f"{p:2d}/{q:<3d} {lam:9.5f}   {min(ratios):.3f}")
