"""One trial, one rare hit, amplification by the trial length.

Summing a block over the exponents M+D, ..., M+lD reorganizes into a
weighted sum of spike variables whose central weights are exactly l: a
single central hit is counted l times, pushing the trial sum above 2*B*l.
This script finds good trials by sampling and confirms the bound on every
one of them.
"""

import numpy as np

from spikeblocks import BitTape, TrialSpec, good_prob_exact, trial_sum, weights
from spikeblocks.bits import sample_seeds
from spikeblocks.suites import surrogate_block
from spikeblocks.trials import amplification_target, good_event_seeds

bp = surrogate_block(lam=1, B=1.0, L=16)
tr = TrialSpec(M=0, ell=2)
prof = weights(bp.L, tr.ell)

print(f"block: L={bp.L}, d={bp.d}; trial: offset M={tr.M}, length ell={tr.ell}")
print(f"weights w_h over h=2..{bp.L + tr.ell}:",
      [prof.w(h) for h in prof.indices])
print(f"central plateau (h={tr.ell + 1}..{bp.L + 1}) equals ell={tr.ell}\n")

p = good_prob_exact(bp, tr)
print(f"good-event probability, exact: {p:.6f}"
      f"  (floor (7/2048) lam/B^2 = {7 / 2048 * float(bp.lam) / bp.B**2:.6f})")

n = 300_000
seeds = sample_seeds(2468, n)
good = good_event_seeds(bp, tr, seeds)
print(f"empirical frequency over {n} tapes: {good.mean():.6f}")

target = amplification_target(bp, tr)
hits = np.flatnonzero(good)
values = [trial_sum(bp, tr, BitTape(int(seeds[i]))) for i in hits[:2000]]
print(f"\nchecked {len(values)} good trials: min sum {min(values):.3f} "
      f">= 2*B*ell = {target}")
print("smallest five trial sums:", sorted(round(v, 3) for v in values)[:5])
