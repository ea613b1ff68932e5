"""
Same observable, two devices
============================

Spin-1 squares along x, y, z commute. Rotating y and z about x gives a
second commuting triad that shares S_x^2 with the first. A valuation may
give S_x^2 different values in the two contexts, yet its outcome
distribution does not depend on which device measured it.
"""

import numpy as np

from cqm.contexts import ObservableFamily, maximal_contexts
from cqm.experiments import spin1_squares
from cqm.probability import MeasurementConfig, empirical_marginal, marginal_distribution, sample
from cqm.states import PhysicalState, evaluate_multivalued, prepare_vector

c, s = np.cos(0.4), np.sin(0.4)
dirs = {"x": [1, 0, 0], "y": [0, 1, 0], "z": [0, 0, 1], "y'": [0, c, s], "z'": [0, -s, c]}
fam = ObservableFamily.from_pairs([(f"S2_{k}", spin1_squares(v)) for k, v in dirs.items()])
ctxs = maximal_contexts(fam)
for ctx in ctxs:
    print(ctx.id, ctx.source_observables)

sx2 = spin1_squares(dirs["x"])
prep, _ = prepare_vector(np.array([0.6, 0.48 + 0.2j, -0.3 + 0.52j]))
for ctx in ctxs:
    exact = marginal_distribution(prep, ctx, sx2)
    emp = empirical_marginal(sample(MeasurementConfig(prep, ctx, 10**5, 3)), sx2, ctx)
    print(ctx.id, {k: round(v, 6) for k, v in exact.items()}, {k: round(v, 4) for k, v in emp.items()})

# pick the x ray in one context and a different ray in the other
ray_x = [int(np.argmax(np.abs(ctx.basis[0]))) for ctx in ctxs]
phi = PhysicalState({ctxs[0].id: (ray_x[0] + 1) % 3, ctxs[1].id: ray_x[1]}, 3)
print("values of S_x^2 under one valuation:", evaluate_multivalued(phi, sx2, ctxs).values)
