"""
Oscillator Green functions two ways
===================================

Time-ordered products of positions in the ground state, once from pairings
of the causal propagator and once from matrix products in a truncated Fock
space.
"""

import numpy as np

from cqm.oscillator import (GreenRequest, auxiliary_vanishing, build_truncation,
                            causal_propagator, green_report, ground_projector_limit,
                            propagator_extrapolated)

nu = 1.0
for t in (0.0, 1.0, 2.5):
    print(f"D(t={t}) closed form {causal_propagator(t, nu):.8f}   quadrature {propagator_extrapolated(t, nu):.8f}")

trunc = build_truncation(40, nu)
gen = np.random.default_rng(0)
for n in (2, 4, 6):
    rep = green_report(GreenRequest(tuple(gen.uniform(-3, 3, n)), trunc))
    print(f"n={n}: wick {rep['wick_value']:.10f}  operator {rep['operator_value']:.10f}  "
          f"gap {rep['relative_gap']:.1e}")

lim = ground_projector_limit(trunc, [1.0, 5.0, 10.0, 20.0])
print("distance to |0><0|:", [f"{d:.3e}" for d in lim.distances], "exact:", lim.exact)
print("damped a+ a- at r=20:", f"{auxiliary_vanishing(trunc, 1, 1, 20.0):.2e}")
