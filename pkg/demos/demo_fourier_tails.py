"""Fourier tails: exact per-layer sums, thresholds, and the endpoint shape.

Each block's coefficients live on disjoint dyadic valuation bands, so tails
add exactly across stages.  Past the stage threshold 2^E the squared tail
decays like lam * 2^E / N.  For the endpoint parameter choice, the stage
cost matches 1/loglog(threshold), which is the shape the headline tail
estimate needs; the product tail * loglog(cutoff) stays bounded on the
threshold grid.
"""

from fractions import Fraction

from spikeblocks import f_tail, spike_tail, tail_profile
from spikeblocks.master import DeskCaps, StageState, build_stage
from spikeblocks.regimes import EndpointConfig, EndpointHistory, endpoint_choose_lambda
from spikeblocks.suites import endpoint_tail_shape, structural_manifest
from spikeblocks.master import Manifest
from dataclasses import replace

# spike tails shrink like 2^d / R once R passes 2^d
for d in (4, 8):
    print(f"spike d={d}: tail at R=2^d {spike_tail(d, 2**d):.4f}, "
          f"at 4*2^d {spike_tail(d, 2**(d + 2)):.4f}, "
          f"at 16*2^d {spike_tail(d, 2**(d + 4)):.4f}")

m = structural_manifest(seed=1)
prof = tail_profile(m, [1, 2**10, ("log2", m.stages[0].E), ("log2", m.stages[1].E),
                        ("log2", m.stages[2].E), ("log2", m.stages[2].E + 32)])
print("\ncutoff grid (log2 N, per-stage squared tails, total):")
for row in prof.rows:
    stages = ", ".join(f"{v:.3e}" for v in row.per_stage)
    print(f"  log2N={row.log2_N:>9}: [{stages}] total {row.total:.3e} ({row.mode})")

# a faithful endpoint prefix: stage costs found by the feasibility search
cfg = EndpointConfig(gamma=1.0, b_floor=100.0,
                     caps=DeskCaps(max_trials=300, max_stages=3))
state, hist = StageState(), EndpointHistory()
stages = []
for k in (1, 2):
    rep = endpoint_choose_lambda(state, k, cfg, hist)
    rec, state = build_stage(state, rep.record.config, b_floor=100.0)
    stages.append(replace(rec, k=k))
    hist = hist.extended(rep.lam, rec.E)
    print(f"\nendpoint stage {k}: lam={rep.lam}, T={rep.T}, "
          f"threshold exponent E has {rec.E.bit_length()} bits")

prefix = Manifest(stages=stages, b_floor=100.0, regime="endpoint", seed=0)
worst, points = endpoint_tail_shape(prefix)
print("\ntail * loglog(cutoff) on the threshold grid:")
for e, v in points:
    print(f"  log2N with {e.bit_length():>4} bits: {v:.4f}")
print(f"largest value: {worst:.4f} (bounded; this is the endpoint shape)")
