"""
Why random products grow
========================

Positivity of the exponent for random phases rests on two facts about the
group generated by the transfer matrices: it is not compact, and its real
4x4 image leaves no proper subspace invariant.  Both are checked here.
"""

from unitaryband.lyapunov import irreducibility_certificate, noncompact_witness
from unitaryband.models import CouplingPair

coupling = CouplingPair.from_t(0.6)
w = noncompact_witness(coupling)
print("eigenvalues of the (pi, pi) transfer matrix:", [round(v, 12) for v in w.closed_form])
print("real 4x4 image:", sorted(round(float(abs(v)), 12) for v in w.tau_eigenvalues))

for t in (0.3, 0.6, 0.9):
    cert = irreducibility_certificate(CouplingPair.from_t(t))
    print(f"\nt = {t}")
    print(f"  relations failing as stated: {cert.failed_stated}")
    print(f"  corrected relations hold:    {cert.corrected_ok}")
    print(f"  invariant spans found:       {cert.invariant_spans}")
    print(f"  dimension of the algebra:    {cert.algebra_dimension} (8 means irreducible)")
