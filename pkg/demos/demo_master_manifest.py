"""The staged construction end to end: manifest, floor, and master signal.

Three stages are scheduled with the length recursion (each trial longer
than everything before it), the blocks' digit windows are placed on
disjoint valuation bands, and the union of trial exponents forms the
lacunary sequence.  On a tape where some trial is good, the average over
that trial's endpoint clears B - mu.
"""

import numpy as np

from spikeblocks import BitTape, average_at, f_eval, master_signal_check
from spikeblocks.bits import sample_seeds
from spikeblocks.mc import find_good_tapes, forced_good_tape
from spikeblocks.suites import structural_manifest

m = structural_manifest(seed=99)
print(f"{len(m.stages)} stages, {m.total_exponents} exponents, mu = {m.mu:.4f}")
for rec in m.stages:
    b = rec.block
    print(f"  stage {rec.k}: ell={rec.lengths}, L={b.L}, d={b.d}, "
          f"bands start at valuation {b.U + b.D}, threshold exponent E={rec.E}")

exps = m.exponents
print(f"first exponents: {exps[:6]} ... gaps within a trial are exactly D")

# the pointwise floor -mu in action
seeds = sample_seeds(31337, 20_000)
vals = np.array([f_eval(m, BitTape(int(s))) for s in seeds[:200]])
print(f"\nf on 200 tapes: min {vals.min():.4f}, max {vals.max():.4f}, "
      f"floor -mu = {-m.mu:.4f}")

# a successful trial pushes the endpoint average above B - mu
k = 1
idx = find_good_tapes(m, k, 1, 20_000, seed=31337, limit=3)
tape = (BitTape(int(sample_seeds(31337, 1, start=idx[0])[0])) if idx
        else forced_good_tape(m, k, 1, seed=5))
rep = master_signal_check(m, tape, k, 1)
print(f"\ngood trial at stage {k}: endpoint N = {rep.N}")
print(f"  signal  {rep.signal:12.3f}  >= 2 B ell = {2 * rep.B * rep.ell:.1f}")
print(f"  past    {rep.past:12.3f}  >= -mu P")
print(f"  other   {rep.off_block:12.3f}  >= -mu ell")
print(f"  average {rep.average:12.4f}  >= B - mu = {rep.B - rep.mu:.4f}")

# the same average, computed exponent by exponent
naive = average_at(m, tape, rep.N)
print(f"  grouped evaluation again: {naive:.6f}")
