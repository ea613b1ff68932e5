"""
A two-level system, one valuation at a time
===========================================

Decompose a 2x2 observable into ``r0 I + r tau(n)``, evaluate it on both
valuations of its own context, and compare the ground-state average with
the infinite-time average read off in the ground valuation.
"""

import numpy as np

from cqm.algebra import tau
from cqm.contexts import joint_context
from cqm.dynamics import Hamiltonian, ergodicity_check, ground_functional, time_average
from cqm.experiments import bloch_decomposition, sign_branch_outcome
from cqm.states import PhysicalState, evaluate

a = np.array([[2.0, 1.0 - 0.5j], [1.0 + 0.5j, -1.0]])
r0, r, n = bloch_decomposition(a)
print(f"r0 = {r0:.4f}, r = {r:.4f}, n = {np.round(n, 4)}")
print("reconstruction error:", np.max(np.abs(r0 * np.eye(2) + r * tau(n) - a)))

# a valuation picks one eigenvector of tau(n); f(n) = +-1 labels the branch
ctx = joint_context([tau(n)], labels=["tau(n)"])
for f in (+1, -1):
    phi = PhysicalState({ctx.id: sign_branch_outcome(ctx, n, f)}, 2)
    print(f"f(n) = {f:+d}: phi(A) = {evaluate(phi, a, ctx):+.6f}  (r0 + r f = {r0 + r * f:+.6f})")

# dynamics generated by H = E0 tau_3
h = Hamiltonian.from_matrix(np.diag([1.0, -1.0]))
print("time average of A:\n", np.round(time_average(a, h), 12))
print("ground functional on A:", ground_functional(h)(a).real)

z = joint_context([np.diag([1.0, -1.0])])
phi0 = PhysicalState({z.id: sign_branch_outcome(z, [0, 0, 1], -1)}, 2)
rep = ergodicity_check(h, a, phi0, z)
print(f"Psi0(A) = {rep.psi0:+.6f}, phi0(time average) = {rep.phi0_of_average:+.6f}, gap = {rep.gap:.1e}")
