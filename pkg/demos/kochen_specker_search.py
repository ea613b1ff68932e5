"""
No consistent colouring of 18 rays
==================================

Search for a 0/1 assignment to the 18 rays with exactly one 1 per basis.
Every ray sits in two of the nine bases, so summing over bases counts each
1 twice; nine is odd and the search comes back empty.
"""

import time

import numpy as np

from cqm.experiments import KSInstance, ks_18ray, ks_check, spin1_triad_instance

inst = ks_18ray()

def integer_ray(v):
    return np.rint(np.real(v) / np.max(np.abs(v))).astype(int).tolist()


for c in inst.contexts:
    print("  ".join(str(integer_ray(inst.rays[i])) for i in c))

start = time.perf_counter()
res = ks_check(inst)
print(f"verdict: {res.verdict}, {res.nodes} search nodes, {1e3 * (time.perf_counter() - start):.2f} ms")

# drop any one basis and a colouring exists
res8 = ks_check(KSInstance(inst.rays, inst.contexts[1:]), count_all=True)
print(f"eight bases: {res8.verdict}, {res8.solutions} colourings")

# a single spin-1 triad: three ways to pick the ray valued 1
print("one triad:", ks_check(spin1_triad_instance([np.eye(3)]), count_all=True).solutions, "colourings")
