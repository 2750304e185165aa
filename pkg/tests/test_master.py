import math
from fractions import Fraction

import numpy as np
import pytest

from spikeblocks import bits, engine, master, trials
from spikeblocks.master import DeskCaps, StageConfig, StageState


def desk_configs(n=3, lam=1, B=1.0, T=1):
    return [StageConfig(lam=Fraction(lam), B=B, T=T, provenance="desk")] * n


@pytest.fixture(scope="module")
def manifest3():
    return master.build_manifest(desk_configs(3), b_floor=1.0, regime="structural", seed=5)


def test_plan_lengths_example():
    lengths, P_seq = master.plan_lengths(0, 3)
    assert lengths == [20, 420, 8820]
    assert P_seq == [0, 20, 440, 9260]


def test_plan_lengths_minimum():
    for P in (0, 1, 7):
        lengths, _ = master.plan_lengths(P, 2)
        assert all(l >= 20 for l in lengths)


def test_plan_lengths_growth_bound():
    # 1 + N* <= (1 + P_start) * C^T with C = 2 + 1/eta = 22
    for P0 in (0, 5, 100):
        for T in (1, 3, 6):
            lengths, P_seq = master.plan_lengths(P0, T)
            assert 1 + P_seq[-1] <= (1 + P0) * 22**T


def test_plan_lengths_endpoint_ratio():
    lengths, P_seq = master.plan_lengths(0, 5)
    for t, ell in enumerate(lengths):
        N = P_seq[t] + ell
        assert Fraction(ell, N) >= Fraction(1, 1) / (1 + master.ETA)


def test_build_stage_structural_invariants(manifest3):
    state = StageState()
    for rec in manifest3.stages:
        master.validate_stage_record(rec, state)
        _, state = master.build_stage(state, rec.config, b_floor=1.0)


def test_bands_disjoint_across_stages(manifest3):
    all_bands = [iv for rec in manifest3.stages for iv in rec.bands()]
    all_bands.sort()
    for (a1, b1), (a2, b2) in zip(all_bands, all_bands[1:]):
        assert a2 > b1


def test_first_start_clears_previous_stage(manifest3):
    for prev, rec in zip(manifest3.stages, manifest3.stages[1:]):
        m_last = prev.starts[-1] + prev.lengths[-1] * prev.block.D
        assert rec.starts[0] + rec.block.D > m_last


def test_exponent_enumeration(manifest3):
    exps = master.enumerate_exponents(manifest3)
    assert exps == manifest3.exponents
    assert len(exps) == manifest3.total_exponents
    assert all(b >= a + 1 for a, b in zip(exps, exps[1:]))
    # within one trial consecutive gaps are exactly D
    rec = manifest3.stages[0]
    first = exps[: rec.lengths[0]]
    assert {b - a for a, b in zip(first, first[1:])} == {rec.block.D}
    # across trials of one stage the gap exceeds D (start recursion arithmetic)
    m2 = master.build_manifest(desk_configs(1, T=2), b_floor=1.0)
    rec = m2.stages[0]
    gap = (rec.starts[1] + rec.block.D) - (rec.starts[0] + rec.lengths[0] * rec.block.D)
    assert gap >= rec.block.D


def test_endpoint_ratio_every_trial(manifest3):
    eta = manifest3.eta
    for rec in manifest3.stages:
        for t in range(1, rec.T + 1):
            ell = rec.lengths[t - 1]
            N = rec.endpoints[t - 1]
            assert Fraction(ell, N) >= 1 / (1 + eta)


def test_f_eval_single_stage_is_block_eval():
    m1 = master.build_manifest(desk_configs(1), b_floor=1.0)
    from spikeblocks.spikes import block_eval

    for seed in range(10):
        tape = bits.BitTape(seed)
        assert master.f_eval(m1, tape) == pytest.approx(
            block_eval(m1.stages[0].block, tape, 0))


def test_f_eval_floor_small_sweep(manifest3):
    mu = manifest3.mu
    fams = [rec.block.layer_family(0) for rec in manifest3.stages]
    seeds = bits.sample_seeds(1100, 4000)
    counts = engine.scan_family_counts(seeds, fams)
    worst = math.inf
    for row in counts:
        val = sum(rec.block.value_map(int(K)) for rec, K in zip(manifest3.stages, row))
        worst = min(worst, val)
    assert worst >= -mu
    # dropping any one stage keeps the rest above -mu too
    for k in range(3):
        row = counts[0]
        val = sum(rec.block.value_map(int(K))
                  for j, (rec, K) in enumerate(zip(manifest3.stages, row)) if j != k)
        assert val >= -mu


def test_stage_contributions_uncorrelated(manifest3):
    # disjoint digit windows: empirical covariance of two stage values ~ 0
    n = 20000
    seeds = bits.sample_seeds(2200, n)
    fams = [rec.block.layer_family(0) for rec in manifest3.stages[:2]]
    counts = engine.scan_family_counts(seeds, fams)
    v1 = np.array([manifest3.stages[0].block.value_map(int(K)) for K in counts[:, 0]])
    v2 = np.array([manifest3.stages[1].block.value_map(int(K)) for K in counts[:, 1]])
    cov = float(np.mean(v1 * v2) - v1.mean() * v2.mean())
    # Var(v1 v2) = lam1 lam2 for independent mean-zero factors
    sigma = math.sqrt(float(manifest3.stages[0].config.lam)
                      * float(manifest3.stages[1].config.lam) / n)
    assert abs(cov) <= 4 * sigma


def test_average_at_basics(manifest3):
    tape = bits.BitTape(31)
    exps = manifest3.exponents
    assert master.average_at(manifest3, tape, 1) == pytest.approx(
        master.f_eval(manifest3, tape, exps[0]))
    with pytest.raises(ValueError):
        master.average_at(manifest3, tape, 0)
    with pytest.raises(ValueError):
        master.average_at(manifest3, tape, manifest3.total_exponents + 1)


def test_average_matches_naive_oracle():
    m2 = master.build_manifest(desk_configs(2), b_floor=1.0)
    for seed in (0, 9, 77):
        tape = bits.BitTape(seed)
        for N in (1, 19, 20, 21, 200, 440):
            fast = master.average_at(m2, tape, N)
            slow = master.average_at_naive(m2, tape, N)
            assert fast == pytest.approx(slow, abs=1e-10)


def test_average_linearity_in_stages(manifest3):
    # the full average is the sum of single-stage block averages
    tape = bits.BitTape(12)
    N = manifest3.endpoint(2, 1)
    trials_pref = master._prefix_pairs(manifest3, N)
    total = 0.0
    for kp in range(1, 4):
        pairs = [(kp, k, t, n) for (k, t, n) in trials_pref]
        runs = master._block_runs(manifest3, tape, pairs)
        total += sum(master._pair_value(manifest3, kp, k, t, n, runs[kp])
                     for (kp, k, t, n) in pairs)
    assert master.average_at(manifest3, tape, N) == pytest.approx(total / N)


def forced_good_tape(manifest, k, t, seed=123, h_off=10):
    rec = manifest.stage(k)
    tr = rec.trial(t)
    fam = trials.central_family(rec.block, tr)
    pos = fam.base + h_off * fam.step
    return bits.ForcedTape(bits.BitTape(seed), zero_ranges=((pos, pos + fam.width),))


def test_master_signal_forced_good(manifest3):
    for k in (1, 2, 3):
        tape = forced_good_tape(manifest3, k, 1, seed=40 + k)
        rep = master.master_signal_check(manifest3, tape, k, 1)
        rec = manifest3.stage(k)
        assert rep.signal >= 2 * rec.config.B * rec.lengths[0] * (1 - 1e-12)
        assert rep.past >= -manifest3.mu * rec.p_counts[0] - 1e-12
        assert rep.off_block >= -manifest3.mu * rec.lengths[0] - 1e-12
        assert rep.average >= rec.config.B - manifest3.mu - 1e-9
        assert rep.ok


def test_master_signal_requires_good_event(manifest3):
    rec = manifest3.stage(1)
    fam = trials.central_family(rec.block, rec.trial(1))
    ones = frozenset(fam.base + i * fam.step for i in range(fam.count))
    tape = bits.ForcedTape(bits.BitTape(8), one_bits=ones)
    with pytest.raises(ValueError):
        master.master_signal_check(manifest3, tape, 1, 1)


def test_master_signal_total_matches_naive():
    m2 = master.build_manifest(desk_configs(2), b_floor=1.0)
    tape = forced_good_tape(m2, 2, 1, seed=3)
    rep = master.master_signal_check(m2, tape, 2, 1)
    naive = master.average_at_naive(m2, tape, rep.N) * rep.N
    assert rep.total == pytest.approx(naive, rel=1e-9)


def test_caps_fail_loudly():
    with pytest.raises(master.CapExceeded):
        master.build_manifest(desk_configs(1, T=100),
                              caps=DeskCaps(max_trials=10), b_floor=1.0)
    with pytest.raises(master.CapExceeded):
        master.build_manifest(desk_configs(4), caps=DeskCaps(max_stages=3), b_floor=1.0)
    with pytest.raises(master.CapExceeded):
        master.build_manifest(desk_configs(1, T=5),
                              caps=DeskCaps(max_exponents=100), b_floor=1.0)


def test_manifest_roundtrip_byte_identical(tmp_path, manifest3):
    path = tmp_path / "m.json"
    master.write_manifest(manifest3, path)
    text = path.read_text()
    m2 = master.read_manifest(path)
    assert master.manifest_to_text(m2) == text
    assert m2.exponents == manifest3.exponents
    assert [r.block for r in m2.stages] == [r.block for r in manifest3.stages]


def test_manifest_rejects_corrupt_mu(manifest3):
    text = master.manifest_to_text(manifest3)
    bad = text.replace(f'"mu": {manifest3.mu!r}', '"mu": 0.125')
    assert bad != text
    with pytest.raises(ValueError):
        master.manifest_from_text(bad)


def test_validate_manifest(manifest3):
    master.validate_manifest(manifest3)


def test_giant_stage_arithmetic_only():
    # stages far beyond evaluation are still constructible as pure arithmetic
    cfg = StageConfig(lam=Fraction(1, 8), B=100.0, T=8, provenance="scale")
    rec, state = master.build_stage(StageState(), cfg)
    assert rec.block.L == 8 * rec.lengths[-1]
    assert rec.E > 10**10
    assert state.P == rec.N_star
    with pytest.raises(master.CapExceeded):
        rec.bands(cap=1000)
