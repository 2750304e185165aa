"""The bounded companion: small hitting sets swept across by dilates.

Instead of unbounded spikes, each stage contributes a union of thin dyadic
cylinders with exactly rational measure.  A central hit drags every point
of the trial into the set, so endpoint membership averages approach 1 while
the set stays as small as requested.
"""

from fractions import Fraction

import numpy as np

from spikeblocks import BitTape
from spikeblocks.bits import sample_seeds
from spikeblocks.master import DeskCaps
from spikeblocks.regimes import BoundedConfig, bounded_build, bounded_membership_many
from spikeblocks import engine

cfg = BoundedConfig(epsilon=Fraction(1, 2), caps=DeskCaps(max_trials=2))
hm = bounded_build(cfg, 3, seed=11)
print(f"target measure < {hm.epsilon}; exact bound {hm.measure_bound} "
      f"= {float(hm.measure_bound):.4f}")
for s in hm.stages:
    print(f"  stage {s.k}: A={s.A}, T={s.T}, lengths={s.lengths}, "
          f"L={s.L}, d={s.d}, |set| <= {s.L}/2^{s.d} = {float(s.measure_bound):.4f}")

n = 20_000
seeds = sample_seeds(505, n)
fams = [s.trial_family(t) for s in hm.stages for t in range(1, s.T + 1)]
hits = engine.scan_family_counts(seeds, fams) > 0
print(f"\nhit frequencies over {n} tapes:",
      [f"{hits[:, j].mean():.4f}" for j in range(hits.shape[1])])

exps = hm.all_exponents()
col = 0
for s in hm.stages:
    for t in range(1, s.T + 1):
        idx = np.flatnonzero(hits[:, col])
        col += 1
        if len(idx) == 0:
            continue
        tape = BitTape(int(seeds[idx[0]]))
        N = s.endpoints[t - 1]
        members = bounded_membership_many(hm, tape, exps[:N])
        trial_members = bounded_membership_many(hm, tape, s.exponents(t))
        print(f"stage {s.k} trial {t}: hit tape -> all {len(trial_members)} trial "
              f"points in the set: {all(trial_members)}; endpoint average "
              f"{sum(members) / N:.4f} >= 1/(1+theta) = {1 / (1 + float(s.theta)):.4f}")
