"""A walking tour of dyadic spikes and spike blocks.

The spike of depth d is the renormalized indicator of [0, 2^-d): a tall
rare positive value h = sqrt(2^d - 1) against a shallow constant -1/h.
Blocks stack L independent dilated spikes.  This script samples both,
compares the empirical law against the exact binomial law, and shows the
deterministic lower floor that shields the construction from cancellation.
"""

import numpy as np

from spikeblocks import BitTape, BlockParams, SpikeParams, block_eval, block_floor, choose_depth, spike_eval
from spikeblocks.bits import sample_seeds
from spikeblocks import engine

# --- the spike's two-point law -------------------------------------------

d = 6
sp = SpikeParams(d)
print(f"depth {d}: takes value h={sp.h:.4f} with probability 2^-{d},")
print(f"          and -g={-sp.g:.4f} otherwise; h*g = {sp.h * sp.g:.12f}")

n = 200_000
seeds = sample_seeds(12345, n)
hi = engine.window_zero_direct(seeds, 0, d)
print(f"empirical frequency of the high value: {hi.mean():.5f} vs 2^-{d} = {2**-d:.5f}")

vals = np.where(hi, sp.h, -sp.g)
print(f"sample mean {vals.mean():+.5f} (exactly zero in law), "
      f"sample variance {vals.var():.5f} (unit in law)\n")

# --- a block and its floor -------------------------------------------------

lam, B, L = 1, 1.0, 16
d = choose_depth(lam, B, L)
bp = BlockParams(lam=lam, B=B, L=L, d=d, D=d + 2, U=0, b_floor=1.0)
print(f"block: lam={lam}, B={B}, L={L} layers of depth d={d} (spacing D={bp.D})")
print(f"deterministic floor {block_floor(bp):.6f} >= -(sqrt2/8) lam/B = "
      f"{-(2**0.5 / 8) * lam / B:.6f}")

tapes = [BitTape(int(s)) for s in sample_seeds(777, 8)]
print("eight sampled block values:", [round(block_eval(bp, t, 0), 5) for t in tapes])

counts = engine.scan_family_counts(sample_seeds(777, n), [bp.layer_family(0)])[:, 0]
law = bp.law()
print("\nspiking-layer count: empirical vs exact binomial")
for k in range(3):
    print(f"  K={k}: {np.mean(counts == k):.5f} vs {float(law.pmf(k)):.5f}")
print(f"block variance from the law: {law.moment(2):.6f} (= lam exactly)")
