import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spikeblocks import bits, spikes, trials
from spikeblocks.mcstats import binomial_sigma


def surrogate_block(lam=1, B=1.0, L=16, U=0):
    d = spikes.choose_depth(lam, B, L)
    return spikes.BlockParams(lam=Fraction(lam), B=B, L=L, d=d, D=d + 2, U=U, b_floor=1.0)


def enumerate_weights(L, ell):
    w = {}
    for q in range(1, L + 1):
        for r in range(1, ell + 1):
            w[q + r] = w.get(q + r, 0) + 1
    return w


def test_weights_single_r():
    prof = trials.weights(8, 1)
    assert [prof.w(h) for h in prof.indices] == [1] * 8


def test_weights_enumeration_oracle():
    prof = trials.weights(16, 2)
    want = enumerate_weights(16, 2)
    assert prof.w(2) == want[2] == 1
    assert prof.w(18) == want[18] == 1
    for h in range(3, 18):
        assert prof.w(h) == want[h] == 2


@given(st.integers(1, 60), st.integers(1, 60))
@settings(max_examples=100, deadline=None)
def test_weights_counting_identity(L, ell):
    if ell > L:
        L, ell = ell, L
    prof = trials.weights(L, ell)
    want = enumerate_weights(L, ell)
    assert sum(prof.w(h) for h in prof.indices) == L * ell
    for h in prof.indices:
        assert prof.w(h) == want.get(h, 0)
    for h in prof.central_range():
        assert prof.w(h) == ell


def test_convolution_identity():
    # direct and reorganized trial sums agree on random tapes and parameters
    rng = np.random.default_rng(404)
    max_diff = 0.0
    for _ in range(20):
        L = int(rng.integers(8, 40))
        lam = Fraction(int(rng.integers(1, 16)), 16)
        bp = surrogate_block(lam=lam, B=1.0, L=L, U=int(rng.integers(0, 50)))
        tr = trials.TrialSpec(M=int(rng.integers(0, 40)), ell=int(rng.integers(1, L // 8 + 1)))
        for _ in range(50):
            tape = bits.BitTape(int(rng.integers(0, 2**64, dtype=np.uint64)))
            a = trials.trial_sum(bp, tr, tape)
            b = trials.trial_sum_weighted(bp, tr, tape)
            max_diff = max(max_diff, abs(a - b))
    assert max_diff < 1e-9


def test_trial_sum_all_negative():
    bp = surrogate_block(L=16)
    tr = trials.TrialSpec(M=0, ell=2)
    fam = trials.z_family(bp, tr)
    ones = frozenset(fam.base + i * fam.step for i in range(fam.count))
    tape = bits.ForcedTape(bits.BitTape(1), one_bits=ones)
    want = -math.sqrt(bp.lam_float / bp.L) * bp.spike.g * bp.L * tr.ell
    assert trials.trial_sum(bp, tr, tape) == pytest.approx(want)
    assert not trials.good_event(bp, tr, tape)


def test_trial_length_one_is_block_eval():
    bp = surrogate_block(L=16)
    tr = trials.TrialSpec(M=3, ell=1)
    for seed in range(20):
        tape = bits.BitTape(seed)
        assert trials.trial_sum(bp, tr, tape) == pytest.approx(
            spikes.block_eval(bp, tape, tr.M + bp.D))


def test_good_event_forced():
    bp = surrogate_block(L=16)
    tr = trials.TrialSpec(M=0, ell=2)
    fam = trials.central_family(bp, tr)
    pos = fam.base + 3 * fam.step
    tape = bits.ForcedTape(bits.BitTape(2), zero_ranges=((pos, pos + fam.width),))
    assert trials.good_event(bp, tr, tape)


def test_good_prob_exact_example():
    # closed-form value at (d=23, L=16, ell=2); B = 90 keeps the depth window
    bp = spikes.BlockParams(lam=1, B=90.0, L=16, d=23, D=25, U=0, b_floor=1.0)
    tr = trials.TrialSpec(M=0, ell=2)
    prob = trials.good_prob_exact(bp, tr)
    assert prob == pytest.approx(1.0 - (1.0 - 2.0**-23) ** 15, rel=1e-12)
    assert prob == pytest.approx(1.7881e-6, rel=1e-4)


def test_good_prob_floor_chain():
    # exact probability >= (7/2048) lam / B^2 across a small grid
    for lam in (1, Fraction(1, 2)):
        for L in (8, 16, 32, 64):
            for B in (1.0, 2.0, 100.0):
                d = spikes.choose_depth(lam, B, L)
                bp = spikes.BlockParams(lam=Fraction(lam), B=B, L=L, d=d, D=d + 2, U=0, b_floor=1.0)
                for ell in (1, max(1, L // 8)):
                    tr = trials.TrialSpec(M=0, ell=ell)
                    prob = trials.good_prob_exact(bp, tr)
                    assert prob >= trials.GOOD_PROB_COEFF * bp.lam_float / B**2


def test_good_prob_monotone_in_ell():
    bp = surrogate_block(L=32)
    probs = [trials.good_prob_exact(bp, trials.TrialSpec(M=0, ell=e)) for e in (1, 2, 4)]
    assert probs[0] > probs[1] > probs[2]


def test_good_event_frequency_matches_exact():
    bp = surrogate_block(L=16)
    tr = trials.TrialSpec(M=0, ell=2)
    n = 10**6
    seeds = bits.sample_seeds(271828, n)
    hits = trials.good_event_seeds(bp, tr, seeds)
    p = trials.good_prob_exact(bp, tr)
    assert abs(float(hits.mean()) - p) <= 4 * binomial_sigma(p, n)


def test_single_central_hit_amplifies():
    bp = surrogate_block(L=16)
    tr = trials.TrialSpec(M=0, ell=2)
    fam = trials.z_family(bp, tr)
    hit_h = tr.ell + 3
    pos = bp.U + tr.M + hit_h * bp.D
    ones = frozenset(fam.base + i * fam.step for i in range(fam.count)
                     if fam.base + i * fam.step != pos)
    tape = bits.ForcedTape(bits.BitTape(6), zero_ranges=((pos, pos + bp.d),), one_bits=ones)
    sp = bp.spike
    exact = tr.ell * bp.scale * (sp.h - (bp.L - 1) * sp.g)
    lower = tr.ell * (bp.scale * sp.h - math.sqrt(bp.lam_float * bp.L) * sp.g)
    got = trials.trial_sum(bp, tr, tape)
    assert got == pytest.approx(exact)
    assert got >= lower >= trials.amplification_target(bp, tr)
    assert trials.amplification_check(bp, tr, tape)


def test_two_hits_beat_one():
    bp = surrogate_block(L=16)
    tr = trials.TrialSpec(M=0, ell=2)
    fam = trials.z_family(bp, tr)
    h1 = bp.U + tr.M + (tr.ell + 3) * bp.D
    h2 = bp.U + tr.M + (tr.ell + 5) * bp.D
    ones = frozenset(p for p in (fam.base + i * fam.step for i in range(fam.count))
                     if p not in (h1, h2))
    one_hit = bits.ForcedTape(bits.BitTape(6), zero_ranges=((h1, h1 + bp.d),),
                              one_bits=ones | {h2})
    two_hits = bits.ForcedTape(bits.BitTape(6), zero_ranges=((h1, h1 + bp.d), (h2, h2 + bp.d)),
                               one_bits=ones)
    assert trials.trial_sum(bp, tr, two_hits) > trials.trial_sum(bp, tr, one_hit)


def test_amplification_requires_good_event():
    bp = surrogate_block(L=16)
    tr = trials.TrialSpec(M=0, ell=2)
    fam = trials.central_family(bp, tr)
    ones = frozenset(fam.base + i * fam.step for i in range(fam.count))
    tape = bits.ForcedTape(bits.BitTape(3), one_bits=ones)
    with pytest.raises(ValueError):
        trials.amplification_check(bp, tr, tape)


def test_amplification_mc_sweep_small():
    # zero violations over every good event in a modest sweep; the large
    # sweep lives in the acceptance suite
    bp = surrogate_block(L=16)
    tr = trials.TrialSpec(M=0, ell=2)
    n = 10**5
    seeds = bits.sample_seeds(13, n)
    hits = np.flatnonzero(trials.good_event_seeds(bp, tr, seeds))
    assert len(hits) > 0
    target = trials.amplification_target(bp, tr)
    for idx in hits:
        tape = bits.BitTape(int(seeds[idx]))
        assert trials.trial_sum(bp, tr, tape) >= target


def test_trial_spec_validation():
    bp = surrogate_block(L=16)
    with pytest.raises(ValueError):
        trials.TrialSpec(M=0, ell=3).validate(bp)
    with pytest.raises(ValueError):
        trials.TrialSpec(M=-100, ell=1).validate(bp)
