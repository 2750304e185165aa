"""Acceptance gate: one test per criterion, at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one line per
criterion.  Monte Carlo checks run at their stated sample counts with
4-sigma bands; exact and structural checks assert outright.
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from spikeblocks import bits, engine, fourier, master, mc, regimes, spikes, suites, trials
from spikeblocks.bits import BitTape, sample_seeds
from spikeblocks.master import DeskCaps, StageState
from spikeblocks.mcstats import binomial_sigma
from spikeblocks.report import all_pass, render_report, rows_to_csv
from spikeblocks.suites import RunConfig


def _criterion(num: int, name: str, passed: bool, budget: float, elapsed: float,
               detail: str = ""):
    verdict = "PASS" if passed else "FAIL"
    print(f"ACCEPTANCE {num:02d} {name}: {verdict} "
          f"({elapsed:.1f}s of {budget:.0f}s budget){'; ' + detail if detail else ''}")
    assert passed, f"criterion {num} ({name}) failed: {detail}"
    assert elapsed < budget, f"criterion {num} exceeded its {budget}s budget"


SEED = 20260810


@pytest.fixture(scope="module")
def desk_manifest():
    return suites.structural_manifest(seed=SEED)


def test_criterion_01_spike_identities():
    t0 = time.time()
    worst = 0.0
    ok = True
    for d in range(1, 41):
        sp = spikes.SpikeParams(d)
        p = 2.0 ** (-d)
        tol = 1e-12 if d <= 30 else 1e-9
        dev = max(abs(p * sp.h - (1 - p) * sp.g),
                  abs(p * sp.h ** 2 + (1 - p) * sp.g ** 2 - 1.0))
        ok &= dev <= tol
        worst = max(worst, dev)
    _criterion(1, "spike-identities", ok, 1.0, time.time() - t0,
               f"worst deviation {worst:.2e}")


def test_criterion_02_spike_law():
    t0 = time.time()
    n = 10 ** 6
    ok = True
    details = []
    for i, d in enumerate((4, 8, 12)):
        seeds = sample_seeds(SEED + i, n)
        freq = float(engine.window_zero_direct(seeds, 0, d).mean())
        p = 2.0 ** (-d)
        band = 4 * binomial_sigma(p, n)
        ok &= abs(freq - p) <= band
        details.append(f"d={d}: {freq:.3e} vs {p:.3e} +-{band:.1e}")
    _criterion(2, "spike-law", ok, 30.0, time.time() - t0, "; ".join(details))


def test_criterion_03_fourier_support():
    t0 = time.time()
    worst = max(abs(fourier.spike_coeff(d, k << d).value)
                for d in range(1, 21) for k in range(1, 17))
    tiny = spikes.BlockParams(lam=Fraction(1), B=1.0, L=2, d=3, D=5, U=0,
                              b_floor=1.0, check_depth=False)
    report = fourier.band_support_check(tiny, 1 << 16, threshold=1e-10)
    ok = worst <= 1e-12 and report.ok and report.max_in_band > 1e-6
    _criterion(3, "fourier-support", ok, 120.0, time.time() - t0,
               f"max coeff at multiples {worst:.1e}, "
               f"{len(report.violations)} band violations")


def test_criterion_04_tail_envelopes():
    t0 = time.time()
    c1 = fourier.fit_spike_tail_constant()
    tiny = spikes.BlockParams(lam=Fraction(1), B=1.0, L=2, d=3, D=5, U=0,
                              b_floor=1.0, check_depth=False)
    E = tiny.U + tiny.L * tiny.D + tiny.d + 2
    c2 = max(fourier.block_tail(tiny, 1 << (E + j)).value
             / (float(tiny.lam) * 2.0 ** (-j)) for j in (0, 1, 3, 6))
    worst = 0.0
    for N in (1, 7, 64, 300, 2048, 40000):
        got = fourier.block_tail(tiny, N).value
        want = _brute_tail(tiny, N)
        worst = max(worst, abs(got - want))
    ok = 0 < c1 < 100 and 0 < c2 < 100 and worst <= 1e-6
    _criterion(4, "tail-envelopes", ok, 300.0, time.time() - t0,
               f"C1={c1:.3f}, C2={c2:.3f}, brute-force diff {worst:.1e}")


def _brute_tail(bp, N):
    scale = math.sqrt(float(bp.lam) / bp.L)
    energy = 0.0
    for r in range(1, N + 1):
        total = 0j
        for q in range(1, bp.L + 1):
            v = bp.U + q * bp.D
            if r % (1 << v) == 0:
                total += scale * fourier.spike_coeff(bp.d, r >> v).value
        energy += abs(total) ** 2
    return float(bp.lam) - 2 * energy


def test_criterion_05_block_law_moments():
    t0 = time.time()
    grid = spikes.default_moment_grid()
    var_dev = max(abs(spikes.block_moments(bp, 2) - bp.lam_float) for bp in grid)
    c4 = spikes.fit_moment_constant(4.0, grid)
    ok = var_dev <= 1e-10 and all(spikes.moment_ratio(bp, 4.0) <= c4 for bp in grid) \
        and math.isfinite(c4)
    _criterion(5, "block-law-moments", ok, 60.0, time.time() - t0,
               f"variance deviation {var_dev:.1e}, recorded C4={c4:.2f}")


def test_criterion_06_convolution_identity():
    t0 = time.time()
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(20):
        L = int(rng.integers(8, 48))
        lam = Fraction(int(rng.integers(1, 16)), 16)
        bp = suites.surrogate_block(lam=lam, B=1.0, L=L, U=int(rng.integers(0, 40)))
        tr = trials.TrialSpec(M=int(rng.integers(0, 30)),
                              ell=int(rng.integers(1, L // 8 + 1)))
        tape_seeds = rng.integers(0, 2 ** 64, size=1000, dtype=np.uint64)
        for s in tape_seeds:
            tape = BitTape(int(s))
            worst = max(worst, abs(trials.trial_sum(bp, tr, tape)
                                   - trials.trial_sum_weighted(bp, tr, tape)))
    _criterion(6, "convolution-identity", worst < 1e-9, 60.0, time.time() - t0,
               f"max |direct - weighted| = {worst:.2e} over 20x1000")


def test_criterion_07_amplification_sweep():
    t0 = time.time()
    checked, violations = suites.amplification_sweep(SEED + 7, 10 ** 7)
    ok = violations == 0 and checked > 0
    _criterion(7, "amplification", ok, 600.0, time.time() - t0,
               f"{checked} good events in 1e7 samples, {violations} violations")


def test_criterion_08_good_event_probability():
    t0 = time.time()
    floor_ok = True
    for lam in (Fraction(1), Fraction(1, 4)):
        for B in (1.0, 100.0, 200.0):
            for L in (8, 16, 64):
                d = spikes.choose_depth(lam, B, L)
                bp = spikes.BlockParams(lam=lam, B=B, L=L, d=d, D=d + 2, U=0,
                                        b_floor=1.0)
                for ell in (1, max(1, L // 8)):
                    pr = trials.good_prob_exact(bp, trials.TrialSpec(M=0, ell=ell))
                    floor_ok &= pr >= trials.GOOD_PROB_COEFF * float(lam) / B ** 2
    n = 10 ** 6
    bp = suites.surrogate_block(L=16)
    tr = trials.TrialSpec(M=0, ell=2)
    p = trials.good_prob_exact(bp, tr)
    seeds = sample_seeds(SEED + 8, n)
    freq = float(trials.good_event_seeds(bp, tr, seeds).mean())
    band = 4 * binomial_sigma(p, n)
    ok = floor_ok and abs(freq - p) <= band
    _criterion(8, "good-event-probability", ok, 300.0, time.time() - t0,
               f"MC {freq:.4e} vs exact {p:.4e} +-{band:.1e}; floor holds on grid")


def test_criterion_09_master_structural(desk_manifest):
    t0 = time.time()
    m = desk_manifest
    bands = [iv for rec in m.stages for iv in rec.bands()]
    bands.sort()
    disjoint = all(a2 > b1 for (_, b1), (a2, _) in zip(bands, bands[1:]))

    exps = m.exponents
    lacunary = all(m2 >= m1 + 1 for m1, m2 in zip(exps, exps[1:]))

    eta = m.eta
    ratios = all(Fraction(rec.lengths[t - 1], rec.endpoints[t - 1]) >= 1 / (1 + eta)
                 for rec in m.stages for t in range(1, rec.T + 1))

    n = 10 ** 5
    seeds = sample_seeds(SEED + 9, n)
    layer_fams = [rec.block.layer_family(0) for rec in m.stages]
    central_fams = [trials.central_family(rec.block, rec.trial(t))
                    for rec, t in m.trials_in_order()]
    counts = engine.scan_family_counts(seeds, layer_fams + central_fams)
    values = np.zeros(n)
    for j, rec in enumerate(m.stages):
        sp = rec.block.spike
        values += rec.block.scale * ((sp.h + sp.g) * counts[:, j] - rec.block.L * sp.g)
    mu = m.mu
    floor_violations = int((values < -mu).sum())

    avg_checked = avg_violations = 0
    for j, (rec, t) in enumerate(m.trials_in_order()):
        hits = np.flatnonzero(counts[:, len(m.stages) + j] > 0)
        N = m.endpoint(rec.k, t)
        target = rec.config.B - mu
        for i in hits:
            avg = master.average_at(m, BitTape(int(seeds[i])), N)
            avg_checked += 1
            if avg < target:
                avg_violations += 1
    ok = (disjoint and lacunary and ratios and floor_violations == 0
          and avg_violations == 0 and avg_checked > 0)
    _criterion(9, "master-structural", ok, 600.0, time.time() - t0,
               f"{len(bands)} bands disjoint={disjoint}; floor violations "
               f"{floor_violations}/{n}; good-trial averages {avg_checked} checked, "
               f"{avg_violations} violations")


def test_criterion_10_stage_failure_bound():
    t0 = time.time()
    fm = suites.stagefail_manifest(seed=SEED)
    rec = fm.stages[0]
    fams = [trials.central_family(rec.block, rec.trial(t)) for t in range(1, rec.T + 1)]
    n = 2 * 10 ** 4
    seeds = sample_seeds(SEED + 10, n)
    counts = engine.scan_family_counts(seeds, fams)
    fail = float((~(counts > 0).any(axis=1)).mean())
    bound = math.exp(-trials.GOOD_PROB_COEFF * rec.T * float(rec.config.lam)
                     / rec.config.B ** 2)
    band = 4 * binomial_sigma(bound, n)
    ok = fail <= bound + band
    _criterion(10, "stage-failure-bound", ok, 600.0, time.time() - t0,
               f"empirical {fail:.4f} <= {bound:.4f} + {band:.4f}")


def test_criterion_11_endpoint_scale():
    t0 = time.time()
    band = regimes.endpoint_scale_band(
        1.0, [Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)], b_floor=100.0)
    cfg = regimes.EndpointConfig(gamma=1.0, b_floor=100.0, caps=DeskCaps(max_trials=64))
    rep = regimes.endpoint_choose_lambda(StageState(), 1, cfg, regimes.EndpointHistory())
    names = {c.name for c in rep.conditions}
    ok = band["width_factor"] <= 50 and len(names) == 5
    _criterion(11, "endpoint-scale", ok, 300.0, time.time() - t0,
               f"band [{band['low']:.3f}, {band['high']:.3f}] width factor "
               f"{band['width_factor']:.2f}; conditions reported: {sorted(names)}")


def test_criterion_12_lp_regime():
    t0 = time.time()
    ok = True
    details = []
    for p in (2, 4):
        cfg = regimes.LpConfig(p=p, b_floor=1.0, caps=DeskCaps(max_trials=1))
        manifest, results = regimes.build_lp_manifest(cfg, 3, seed=SEED)
        for r in results:
            ok &= r.lam * Fraction(r.B) ** (p - 2) == cfg.a(r.k)
            ok &= r.ratio >= r.k
        tapes = []
        for rec, t in manifest.trials_in_order():
            idx = mc.find_good_tapes(manifest, rec.k, t, 2 * 10 ** 4, SEED + 12, limit=10)
            tapes += [(f"mc{i}", BitTape(int(sample_seeds(SEED + 12, 1, start=i)[0])), False)
                      for i in idx]
            tapes.append((f"forced{rec.k}", mc.forced_good_tape(manifest, rec.k, t,
                                                                seed=SEED + 13), True))
        points = mc.growth_scan(manifest, tapes, p, cfg.eps)
        good_pts = [q for q in points if q.good]
        ok &= len(good_pts) >= 3
        ok &= all(q.ratio_lower >= q.k * (1 - 1e-9) for q in good_pts)
        details.append(f"p={p}: {len(good_pts)} good endpoints, "
                       f"min ratio/k {min(q.ratio_lower / q.k for q in good_pts):.3f}")
    _criterion(12, "lp-regime", ok, 600.0, time.time() - t0, "; ".join(details))


def test_criterion_13_bounded_construction():
    t0 = time.time()
    cfg = regimes.BoundedConfig(epsilon=Fraction(1, 2), caps=DeskCaps(max_trials=2))
    hm = regimes.bounded_build(cfg, 3, seed=SEED)
    measure_ok = hm.measure_bound < hm.epsilon

    n = 10 ** 4
    seeds = sample_seeds(SEED + 13, n)
    fams = [s.trial_family(t) for s in hm.stages for t in range(1, s.T + 1)]
    hits = engine.scan_family_counts(seeds, fams) > 0
    exps = hm.all_exponents()
    member_viol = endpoint_viol = checked = 0
    col = 0
    for s in hm.stages:
        for t in range(1, s.T + 1):
            N = s.endpoints[t - 1]
            for i in np.flatnonzero(hits[:, col]):
                tape = BitTape(int(seeds[i]))
                checked += 1
                if not all(regimes.bounded_membership_many(hm, tape, s.exponents(t))):
                    member_viol += 1
                members = regimes.bounded_membership_many(hm, tape, exps[:N])
                if sum(members) / N < 1.0 / (1 + float(s.theta)):
                    endpoint_viol += 1
            col += 1
    ok = measure_ok and checked > 0 and member_viol == 0 and endpoint_viol == 0
    _criterion(13, "bounded-construction", ok, 600.0, time.time() - t0,
               f"measure {hm.measure_bound} < {hm.epsilon}; {checked} hits, "
               f"{member_viol} membership and {endpoint_viol} endpoint violations")


def test_criterion_14_admissibility():
    t0 = time.time()
    adm = regimes.admissible_check(regimes.modulus_logloglog(2.0))
    end = regimes.admissible_check(regimes.modulus_loglog(0.5))
    ok = adm.admissible and not end.admissible
    _criterion(14, "admissibility", ok, 1.0, time.time() - t0,
               f"(logloglog N)^-2 admissible={adm.admissible}, "
               f"(loglog N)^-1/2 admissible={end.admissible}")


def test_criterion_15_reproducibility():
    t0 = time.time()
    rc = RunConfig(seed=SEED).scaled(0.05)
    rows1, _ = suites.verify_all(rc)
    rows2, _ = suites.verify_all(rc)
    csv1, csv2 = rows_to_csv(rows1), rows_to_csv(rows2)
    txt1, txt2 = render_report(rows1), render_report(rows2)
    ok = csv1 == csv2 and txt1 == txt2 and all_pass(rows1)
    _criterion(15, "reproducibility", ok, 1800.0, time.time() - t0,
               f"{len(rows1)} rows byte-identical across two runs")
