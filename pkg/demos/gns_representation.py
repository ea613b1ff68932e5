"""
Rebuilding a Hilbert space from a state
=======================================

Start from a state on the 3x3 matrices, quotient by the vectors of zero
length and let the algebra act by left multiplication on what remains.
"""

import numpy as np

from cqm.gns import gns_construct, verify_representation
from cqm.probability import StateFunctional

weights = {
    "pure": np.diag([0.0, 1.0, 0.0]),
    "rank two": np.diag([0.25, 0.75, 0.0]),
    "tracial": np.eye(3) / 3,
}
for name, w in weights.items():
    rep = gns_construct(3, StateFunctional(w))
    check = verify_representation(rep, trials=200, seed=1)
    worst = max(check.max_residuals.values())
    print(f"{name:>9}: rep_dim = {rep.rep_dim}, violations = {len(check.violations)}, "
          f"largest residual = {worst:.1e}")

# the cyclic vector reproduces the state
rep = gns_construct(3, StateFunctional(weights["rank two"]))
r = np.arange(9.0).reshape(3, 3) + 1j
omega = rep.cyclic_vector
print("<omega, pi(R) omega> =", np.round(np.vdot(omega, rep.rep_map(r) @ omega), 12))
print("Psi(R)              =", np.round(np.trace(weights["rank two"] @ r), 12))
