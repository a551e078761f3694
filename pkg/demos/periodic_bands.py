"""
Bands of periodic models
========================

A periodic choice of phases gives absolutely continuous spectrum made of
bands.  Three routes to the band edges are compared: the eigenvalues of the
Bloch symbol, the closed form for two-valued phases, and the Floquet
discriminant of the half-line problem.  A boundary defect then adds a few
isolated eigenvalues in the gaps.
"""

import numpy as np

from unitaryband.halfline import discriminant_profile, find_eigenvalues
from unitaryband.models import PeriodicPhases, TwoValuedPhases
from unitaryband.periodic import model_band_arcs, two_periodic_closed_form

model = TwoValuedPhases(t=0.6, theta_e=0.3, theta_o=1.1, alpha_e=0.4, alpha_o=2.0)

from_symbol = model_band_arcs(model)
closed = two_periodic_closed_form(model.delta, model.theta_sum, model.a, model.coupling)
from_discriminant = discriminant_profile(model).bands

print("bands from the symbol:")
for lo, hi in from_symbol.arcs:
    print(f"  [{lo:.6f}, {hi:.6f}]")
print(f"closed form endpoint distance  {from_symbol.endpoint_distance(closed):.2e}")
print(f"discriminant endpoint distance {from_discriminant.endpoint_distance(closed):.2e}")

# a three-periodic model with two defects next to the boundary
defect = PeriodicPhases(t=0.4, theta=(0.3, 1.1, 2.0), pi=(0.5, 0.1, 2.2),
                        defects=((1, 2.5, 1.0, 0.0), (2, 0.2, 3.0, 0.0)))
rep = find_eigenvalues(defect)
print(f"\nhalf-line with defects: {len(rep)} eigenvalues outside the bands")
for lam, res, dec in zip(rep.eigenvalues, rep.residuals, rep.decay):
    print(f"  lambda = {lam:.6f}   residual {res:.1e}   decay per period {dec:.3f}")
