"""
CHSH with one device per setting
================================

Each of the four analyser settings is its own measuring device, so each gets
its own sample and its own context tag. The quantum combination reaches
1/sqrt(2); a model that fixes every outcome in one shared probability space
never exceeds 1/2.
"""

import math

from cqm.errors import ContextMismatch
from cqm.experiments import (CHSH_ANGLES, CHSHConfig, analyser_direction, chsh_run,
                             classical_chsh_baseline, pair_observables)
from cqm.probability import empirical_mean

cfg = CHSHConfig(*CHSH_ANGLES, trials=10**6, seed=7)
rep = chsh_run(cfg, workers=4)
for s in rep.settings:
    print(f"{s.setting:>4}  ctx={s.context_id}  E_exact={s.e_exact:+.5f}  "
          f"E_hat={s.e_hat:+.5f} +- {s.stderr:.5f}")
print(f"I_hat = {rep.i_hat:.5f} +- {rep.i_stderr:.5f}   exact = {rep.i_exact:.5f}   "
      f"1/sqrt(2) = {1 / math.sqrt(2):.5f}")

# statistics across devices are refused
a, b = pair_observables(analyser_direction(cfg.a_prime), analyser_direction(cfg.b_prime))
try:
    empirical_mean(rep.samples["ab"], a @ b, rep.contexts["a'b'"])
except ContextMismatch as exc:
    print("cross-device statistic refused:", exc)

for model in ("sign", "constant"):
    cl = classical_chsh_baseline(seed=7, trials=10**6, model=model)
    print(f"classical {model:>8}: I_hat = {cl.i_hat:.5f}  pointwise identity holds: {cl.pointwise_ok}")
