"""Property suites: every quantitative claim checked at desk scale.

Each suite returns report rows; :func:`verify_all` builds the desk
constructions once and runs everything.  Exact and structural checks assert
outright; Monte Carlo checks pass when the observation is inside the bound
widened by a 4-sigma Wilson halfwidth.  Surrogate parameter sets (signal
heights far below the production floor) are used wherever faithful
parameters would make the monitored events astronomically rare; the rows'
params field records the parameters used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from . import engine, fourier, mc, regimes, spikes, trials
from .bits import BitTape, sample_seeds
from .master import (DeskCaps, Manifest, StageConfig, StageState,
                     build_manifest, build_stage, master_signal_check,
                     validate_stage_record)
from .mcstats import binomial_sigma, wilson_interval
from .report import ReportRow, exact_row, mc_row, structural_row
from .trials import GOOD_PROB_COEFF, TrialSpec


@dataclass(frozen=True)
class RunConfig:
    """Knobs of one verification run."""

    seed: int = 20260810
    samples_small: int = 10 ** 4
    samples_medium: int = 4 * 10 ** 4
    samples_large: int = 2 * 10 ** 5
    amplification_samples: int = 10 ** 6
    signal_tape_limit: int = 25
    caps: DeskCaps = field(default_factory=lambda: DeskCaps(max_trials=4))
    b_floor: float = 1.0

    def scaled(self, factor: float) -> "RunConfig":
        return replace(
            self,
            samples_small=max(10 ** 3, int(self.samples_small * factor)),
            samples_medium=max(10 ** 3, int(self.samples_medium * factor)),
            samples_large=max(10 ** 3, int(self.samples_large * factor)),
            amplification_samples=max(10 ** 3, int(self.amplification_samples * factor)),
        )


def surrogate_block(lam=1, B=1.0, L=16, U=0) -> spikes.BlockParams:
    d = spikes.choose_depth(lam, B, L)
    return spikes.BlockParams(lam=Fraction(lam), B=B, L=L, d=d, D=d + 2, U=U,
                              b_floor=min(B, 1.0))


def structural_manifest(seed: int = 0) -> Manifest:
    cfgs = [StageConfig(lam=Fraction(1), B=1.0, T=1, provenance="desk")] * 3
    return build_manifest(cfgs, b_floor=1.0, regime="structural", seed=seed)


def stagefail_manifest(seed: int = 0) -> Manifest:
    cfg = StageConfig(lam=Fraction(1), B=1.0, T=3, provenance="desk")
    return build_manifest([cfg], b_floor=1.0, regime="stagefail", seed=seed)


def desk_hitset(rc: RunConfig):
    bcfg = regimes.BoundedConfig(epsilon=Fraction(1, 2), caps=DeskCaps(max_trials=2))
    return regimes.bounded_build(bcfg, 3, seed=rc.seed)


# ---------------------------------------------------------------------------


def suite_bits(rc: RunConfig) -> list[ReportRow]:
    rows = []
    n = rc.samples_large
    seeds = sample_seeds(rc.seed + 1, n)
    word0 = np.zeros(n, dtype=np.uint64)
    from .bits import tape_words_np

    mean = float((tape_words_np(seeds, word0) & np.uint64(1)).mean())
    rows.append(mc_row("bits-mean", mean, 0.5, 0.002, abs(mean - 0.5) <= 0.002,
                       params=f"n={n}"))

    res = mc.mc_estimate(None, n, rc.seed + 2,
                         batch=lambda s: engine.window_zero_direct(s, 0, 4))
    rows.append(mc_row("bits-window-law", res.estimate, 1 / 16, res.ci_halfwidth,
                       abs(res.estimate - 1 / 16) <= res.ci_halfwidth,
                       params=f"len=4,n={n}"))

    m = rc.samples_medium
    seeds = sample_seeds(rc.seed + 3, m)
    a = engine.window_zero_direct(seeds, 0, 3)
    b = engine.window_zero_direct(seeds, 10, 5)
    pj, pa, pb = float((a & b).mean()), float(a.mean()), float(b.mean())
    sig = binomial_sigma(pa * pb, m)
    rows.append(mc_row("bits-independence", pj, pa * pb, 4 * sig,
                       abs(pj - pa * pb) <= 4 * sig, params=f"n={m}"))

    r1 = mc.mc_estimate(None, rc.samples_small, rc.seed + 4,
                        batch=lambda s: engine.window_zero_direct(s, 0, 2))
    r2 = mc.mc_estimate(None, rc.samples_small, rc.seed + 4,
                        batch=lambda s: engine.window_zero_direct(s, 0, 2), chunk=977)
    rows.append(structural_row("plumbing-mc-determinism",
                               r1 == r2, detail=f"count={r1.successes}"))
    return rows


def suite_spike(rc: RunConfig) -> list[ReportRow]:
    rows = []
    worst = 0.0
    for d in range(1, 41):
        sp = spikes.SpikeParams(d)
        p = 2.0 ** (-d)
        tol = 1e-12 if d <= 30 else 1e-9
        dev = max(abs(p * sp.h - (1 - p) * sp.g),
                  abs(p * sp.h ** 2 + (1 - p) * sp.g ** 2 - 1.0))
        worst = max(worst, dev / tol)
    rows.append(exact_row("spike-identities", worst, 1.0, worst <= 1.0,
                          params="d=1..40, tol 1e-12 (1e-9 above 30)"))

    d, n = 9, rc.samples_large
    res = mc.mc_estimate(None, n, rc.seed + 10,
                         batch=lambda s: engine.window_zero_direct(s, 0, d))
    p = 2.0 ** (-d)
    rows.append(mc_row("spike-law", res.estimate, p, 4 * binomial_sigma(p, n),
                       abs(res.estimate - p) <= 4 * binomial_sigma(p, n),
                       params=f"d={d},n={n}"))

    sp = spikes.SpikeParams(6)
    seeds = sample_seeds(rc.seed + 11, n)
    vals = np.where(engine.window_zero_direct(seeds, 0, 6), sp.h, -sp.g)
    mean = float(vals.mean())
    rows.append(mc_row("spike-mean", mean, 0.0, 4.0 / math.sqrt(n),
                       abs(mean) <= 4.0 / math.sqrt(n), params=f"d=6,n={n}"))

    worst = max(abs(fourier.spike_coeff(d, k << d).value)
                for d in range(1, 21) for k in range(1, 17))
    rows.append(exact_row("spike-coeff-zeros", worst, 1e-12, worst <= 1e-12,
                          params="d<=20, k<=16"))
    return rows


def suite_block(rc: RunConfig) -> list[ReportRow]:
    rows = []
    grid = spikes.default_moment_grid()
    var_dev = max(abs(spikes.block_moments(bp, 2) - bp.lam_float) for bp in grid)
    rows.append(exact_row("block-variance-grid", var_dev, 1e-10, var_dev <= 1e-10,
                          params="lam in {1,1/4}, B in {100,200}, L in {8,64}"))

    mass_ok = all(bp.law().total_mass() == 1 for bp in grid)
    rows.append(structural_row("block-mass-exact", mass_ok,
                               detail="binomial law sums to 1 in rationals"))

    floor_ok = all(spikes.block_floor(bp) >= -spikes.FLOOR_COEFF * bp.lam_float / bp.B
                   for bp in grid)
    rows.append(structural_row("block-floor-bound", floor_ok,
                               detail="floor >= -(sqrt2/8) lam/B on the grid"))

    c4 = spikes.fit_moment_constant(4.0, grid)
    ratios_ok = all(spikes.moment_ratio(bp, 4.0) <= c4 for bp in grid)
    rows.append(exact_row("block-moment-c4", c4, 1000.0, ratios_ok and c4 < 1000.0,
                          params="normalized 4th moment over the grid"))

    bp = surrogate_block(L=16)
    n = rc.samples_medium
    seeds = sample_seeds(rc.seed + 20, n)
    counts = engine.scan_family_counts(seeds, [bp.layer_family(0)])[:, 0]
    sp = bp.spike
    vals = bp.scale * ((sp.h + sp.g) * counts - bp.L * sp.g)
    rows.append(exact_row("block-floor-mc", float(vals.min()), spikes.block_floor(bp),
                          float(vals.min()) >= spikes.block_floor(bp) - 1e-15,
                          params=f"surrogate L=16,d={bp.d},n={n}"))

    law = bp.law()
    obs = [int((counts == 0).sum()), int((counts == 1).sum()), int((counts >= 2).sum())]
    p0, p1 = float(law.pmf(0)), float(law.pmf(1))
    exp = [n * p0, n * p1, n * (1 - p0 - p1)]
    from .mcstats import CHI2_SIGNIFICANCE, chi_square_pvalue

    pv = chi_square_pvalue(obs, exp, dof=2)
    rows.append(mc_row("block-chisq", pv, CHI2_SIGNIFICANCE, 0.0,
                       pv >= CHI2_SIGNIFICANCE, params=f"K-law, n={n}"))
    return rows


def suite_trial(rc: RunConfig) -> list[ReportRow]:
    rows = []
    rng = np.random.default_rng(rc.seed + 30)
    worst = 0.0
    for _ in range(20):
        L = int(rng.integers(8, 48))
        bp = surrogate_block(lam=Fraction(int(rng.integers(1, 16)), 16),
                             B=1.0, L=L, U=int(rng.integers(0, 40)))
        tr = TrialSpec(M=int(rng.integers(0, 30)), ell=int(rng.integers(1, L // 8 + 1)))
        for _ in range(50):
            tape = BitTape(int(rng.integers(0, 2 ** 64, dtype=np.uint64)))
            worst = max(worst, abs(trials.trial_sum(bp, tr, tape)
                                   - trials.trial_sum_weighted(bp, tr, tape)))
    rows.append(exact_row("trial-convolution-identity", worst, 1e-9, worst <= 1e-9,
                          params="20 parameter sets x 50 tapes"))

    prof = trials.weights(40, 5)
    plateau = all(prof.w(h) == 5 for h in prof.central_range())
    total = sum(prof.w(h) for h in prof.indices) == prof.total
    rows.append(structural_row("trial-weight-plateau", plateau and total,
                               detail="central plateau and counting identity"))

    floor_ok, worst_margin = True, math.inf
    for lam in (Fraction(1), Fraction(1, 4)):
        for B in (1.0, 100.0, 200.0):
            for L in (8, 16, 64):
                bp = surrogate_block(lam=lam, B=B, L=L)
                for ell in (1, max(1, L // 8)):
                    pr = trials.good_prob_exact(bp, TrialSpec(M=0, ell=ell))
                    floor = GOOD_PROB_COEFF * bp.lam_float / B ** 2
                    worst_margin = min(worst_margin, pr / floor)
                    floor_ok &= pr >= floor
    rows.append(exact_row("trial-goodprob-floor", worst_margin, 1.0,
                          floor_ok and worst_margin >= 1.0,
                          params="exact probability over the parameter grid"))

    bp = surrogate_block(L=16)
    tr = TrialSpec(M=0, ell=2)
    n = rc.samples_large
    p = trials.good_prob_exact(bp, tr)
    res = mc.mc_estimate(None, n, rc.seed + 31,
                         batch=lambda s: trials.good_event_seeds(bp, tr, s))
    rows.append(mc_row("trial-goodprob-mc", res.estimate, p, 4 * binomial_sigma(p, n),
                       abs(res.estimate - p) <= 4 * binomial_sigma(p, n),
                       params=f"surrogate d={bp.d}, n={n}"))

    checked, violations = amplification_sweep(rc.seed + 32, rc.amplification_samples)
    rows.append(exact_row("trial-amplification", violations, 0,
                          violations == 0,
                          params=f"good events among n={rc.amplification_samples}: {checked}"))
    return rows


def amplification_sweep(seed: int, samples: int,
                        bp: spikes.BlockParams | None = None,
                        tr: TrialSpec | None = None) -> tuple[int, int]:
    """Count good events and amplification violations over a seed sweep.

    Vectorized: the trial value is affine in the weighted count of spiking
    windows, evaluated for every good tape in the sweep.
    """
    bp = bp or surrogate_block(L=16)
    tr = tr or TrialSpec(M=0, ell=2)
    fam = trials.z_family(bp, tr)
    prof = trials.weights(bp.L, tr.ell)
    w = np.array([prof.w(i + 2) for i in range(fam.count)], dtype=np.float64)
    central_lo, central_hi = tr.ell + 1, bp.L + 1
    sp = bp.spike
    target = trials.amplification_target(bp, tr)
    checked = violations = 0
    chunk = 1 << 17
    for lo in range(0, samples, chunk):
        n = min(chunk, samples - lo)
        seeds = sample_seeds(seed, n, start=lo)
        zero = np.zeros((n, fam.count), dtype=bool)
        for i in range(fam.count):
            zero[:, i] = engine.window_zero_direct(seeds, fam.base + i * fam.step, fam.width)
        central = zero[:, central_lo - 2:central_hi - 1]
        good = central.any(axis=1)
        if not good.any():
            continue
        hits = zero[good] @ w
        values = bp.scale * ((sp.h + sp.g) * hits - sp.g * prof.total)
        checked += int(good.sum())
        violations += int((values < target * (1 - 1e-12)).sum())
    return checked, violations


def suite_master(manifest: Manifest, rc: RunConfig,
                 fail_manifest: Manifest | None = None) -> list[ReportRow]:
    rows = []
    state = StageState()
    try:
        for rec in manifest.stages:
            validate_stage_record(rec, state, eta=manifest.eta)
            _, state = build_stage(state, rec.config, eta=manifest.eta,
                                   b_floor=manifest.b_floor)
        structural_ok = True
    except AssertionError:
        structural_ok = False
    rows.append(structural_row("recursion-invariants", structural_ok,
                               detail=f"{len(manifest.stages)} stages"))

    bands = [iv for rec in manifest.stages for iv in rec.bands()]
    bands.sort()
    disjoint = all(b2 > a2 and a2 > b1 for (a1, b1), (a2, b2) in zip(bands, bands[1:]))
    rows.append(structural_row("bands-disjoint", disjoint,
                               detail=f"{len(bands)} valuation intervals"))

    exps = manifest.exponents
    lac = all(m2 >= m1 + 1 for m1, m2 in zip(exps, exps[1:]))
    rows.append(structural_row("bands-lacunary", lac,
                               detail=f"{len(exps)} exponents, gaps >= 1"))

    eta = manifest.eta
    ratio_ok = all(Fraction(rec.lengths[t - 1], rec.endpoints[t - 1]) >= 1 / (1 + eta)
                   for rec in manifest.stages for t in range(1, rec.T + 1))
    rows.append(structural_row("recursion-endpoint-ratio", ratio_ok,
                               detail="ell/N >= 1/(1+eta) at every endpoint"))

    n = rc.samples_medium
    seeds = sample_seeds(rc.seed + 40, n)
    fams = [rec.block.layer_family(0) for rec in manifest.stages]
    counts = engine.scan_family_counts(seeds, fams)
    values = np.zeros(n)
    for j, rec in enumerate(manifest.stages):
        sp = rec.block.spike
        values += rec.block.scale * ((sp.h + sp.g) * counts[:, j] - rec.block.L * sp.g)
    mu = manifest.mu
    worst = float(values.min())
    rows.append(exact_row("floor-mc", worst, -mu, worst >= -mu,
                          params=f"f >= -mu over n={n} tapes"))

    total_checked = total_viol = 0
    worst_margin = math.inf
    for rec, t in manifest.trials_in_order():
        good_idx = mc.find_good_tapes(manifest, rec.k, t, n, rc.seed + 40,
                                      limit=rc.signal_tape_limit)
        checked, viol, margin = mc.signal_violations(manifest, good_idx,
                                                     rc.seed + 40, rec.k, t)
        forced = mc.forced_good_tape(manifest, rec.k, t, seed=rc.seed + 41)
        rep = master_signal_check(manifest, forced, rec.k, t)
        checked += 1
        viol += 0 if rep.ok else 1
        margin = min(margin, rep.average - (rec.config.B - mu))
        total_checked += checked
        total_viol += viol
        worst_margin = min(worst_margin, margin)
    rows.append(exact_row("signal-good-trials", total_viol, 0, total_viol == 0,
                          params=f"{total_checked} good tapes incl one forced per trial; "
                                 f"worst margin {worst_margin:.4g}"))

    fm = fail_manifest or manifest
    fams = [trials.central_family(rec.block, rec.trial(t))
            for rec, t in fm.trials_in_order()]
    m = rc.samples_small
    seeds = sample_seeds(rc.seed + 42, m)
    counts = engine.scan_family_counts(seeds, fams)
    idx = 0
    ok = True
    detail = []
    for rec in fm.stages:
        stage_good = (counts[:, idx:idx + rec.T] > 0).any(axis=1)
        idx += rec.T
        phat = float((~stage_good).mean())
        c = GOOD_PROB_COEFF * rec.T * float(rec.config.lam) / rec.config.B ** 2
        bound = math.exp(-c)
        sig = binomial_sigma(bound, m)
        ok &= phat <= bound + 4 * sig
        detail.append(f"k={rec.k}: {phat:.4f} <= {bound:.4f}+4sig")
    rows.append(mc_row("stagefail-bound", phat, bound, 4 * sig, ok,
                       params="; ".join(detail)))

    return rows


def suite_independence(manifest: Manifest, hm, rc: RunConfig) -> list[ReportRow]:
    """Factorization of good events across trials and stages.

    Trial-level pairs and triples are tested on the hitting-set events,
    whose probabilities are large enough for healthy chi-square cells; the
    stage events of the spike manifest are tested pairwise.
    """
    rows = []
    n = rc.samples_medium
    seeds = sample_seeds(rc.seed + 43, n)
    fams, names = [], []
    for s in hm.stages:
        for t in range(1, s.T + 1):
            fams.append(s.trial_family(t))
            names.append(f"hit[{s.k},{t}]")
    hits = engine.scan_family_counts(seeds, fams) > 0
    fact_rows = mc.independence_suite(hits, names)
    n_triples = sum(1 for r in fact_rows if len(r.events) == 3)

    indicators, _ = mc.good_event_matrix(manifest, 2 * rc.samples_medium, rc.seed + 45)
    stage_ind = np.stack([
        indicators[:, sum(r.T for r in manifest.stages[:j]):
                   sum(r.T for r in manifest.stages[:j + 1])].any(axis=1)
        for j in range(len(manifest.stages))], axis=1)
    fact_rows += mc.independence_suite(
        stage_ind, [f"stage[{r.k}]" for r in manifest.stages], min_expected=3.0)

    ok = all(r.ok for r in fact_rows)
    n_pairs = len(fact_rows) - n_triples
    rows.append(mc_row("indep-factorization", min((r.pvalue for r in fact_rows), default=1.0),
                       1e-3, 0.0, ok and n_pairs > 0 and n_triples > 0,
                       params=f"{n_pairs} pair and {n_triples} triple chi-square tests"))

    control = mc.overlap_negative_control(rc.samples_medium, rc.seed + 44)
    rows.append(structural_row("indep-negative-control",
                               all(not r.ok for r in control),
                               detail="overlapping windows must fail factorization"))
    return rows


def suite_fourier(manifest: Manifest, rc: RunConfig) -> list[ReportRow]:
    rows = []
    c1 = fourier.fit_spike_tail_constant()
    rows.append(exact_row("tail-spike-envelope", c1, 100.0, 0 < c1 < 100.0,
                          params="d=1..10, R/2^d in {2,4,16}"))

    tiny = spikes.BlockParams(lam=Fraction(1), B=1.0, L=2, d=3, D=5, U=0,
                              b_floor=1.0, check_depth=False)
    c2 = 0.0
    E = tiny.U + tiny.L * tiny.D + tiny.d + 2
    for j in (0, 1, 3, 6):
        N = 1 << (E + j)
        c2 = max(c2, fourier.block_tail(tiny, N).value / (float(tiny.lam) * 2.0 ** (E - (E + j))))
    rows.append(exact_row("tail-block-envelope", c2, 100.0, 0 < c2 < 100.0,
                          params="tiny block above its threshold"))

    worst = 0.0
    for N in (1, 7, 64, 300, 2048):
        got = fourier.block_tail(tiny, N).value
        want = _brute_block_tail(tiny, N)
        worst = max(worst, abs(got - want))
    rows.append(exact_row("tail-bruteforce", worst, 1e-6, worst <= 1e-6,
                          params="tiny block vs direct coefficient scan"))

    adds = []
    for N in (1, 10 ** 4, 10 ** 7):
        row = fourier.f_tail(manifest, N)
        parts = [fourier.block_tail(rec.block, N).value for rec in manifest.stages]
        adds.append(row.total == math.fsum(parts))
    rows.append(structural_row("tail-additivity", all(adds),
                               detail="stage tails sum exactly (disjoint bands)"))

    totals = [fourier.f_tail(manifest, 1 << j).total for j in range(0, 26, 2)]
    mono = all(x >= y - 1e-15 for x, y in zip(totals, totals[1:]))
    rows.append(structural_row("tail-monotone", mono, detail="dyadic cutoff grid"))

    rep = fourier.band_support_check(tiny, 1 << 16)
    rows.append(exact_row("bands-support", len(rep.violations), 0,
                          rep.ok and rep.max_in_band > 1e-6,
                          params=f"max off-band {rep.max_off_band:.2e}, "
                                 f"max in-band {rep.max_in_band:.2e}"))
    return rows


def _brute_block_tail(bp: spikes.BlockParams, N: int) -> float:
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


def endpoint_tail_shape(manifest: Manifest) -> tuple[float, list]:
    """Largest tail * loglog(cutoff) over the stage-threshold grid.

    Cutoffs are the stage thresholds 2**E_k and their 2**32-fold dilates;
    loglog(2**e) = log(e log 2) is computed straight from the exponent.
    """
    from .logspace import int_ln

    points = []
    for rec in manifest.stages:
        for j in (0, 32):
            e = rec.E + j
            row = fourier.f_tail(manifest, log2_N=e)
            loglog = int_ln(e) + math.log(math.log(2.0))
            points.append((e, row.total * loglog))
    worst = max(v for _, v in points)
    return worst, points


def suite_regimes(rc: RunConfig) -> list[ReportRow]:
    rows = []

    # endpoint feasibility under desk caps: the report must exist with every
    # condition evaluated; and with arithmetic-only caps the first three
    # stages must be outright feasible
    cfg_desk = regimes.EndpointConfig(gamma=1.0, b_floor=rc.b_floor,
                                      caps=DeskCaps(max_trials=rc.caps.max_trials))
    rep = regimes.endpoint_choose_lambda(StageState(), 1, cfg_desk,
                                         regimes.EndpointHistory())
    rows.append(structural_row(
        "endpoint-feasibility-report",
        len(rep.conditions) == 5 and all(isinstance(c.holds, bool) for c in rep.conditions),
        detail="; ".join(f"{c.name}={'ok' if c.holds else 'unmet'}" for c in rep.conditions),
        params=f"k=1 lam={rep.lam} T={rep.T} capped={rep.trials_capped}"))

    cfg_arith = regimes.EndpointConfig(gamma=1.0, b_floor=100.0,
                                       caps=DeskCaps(max_trials=20000, max_stages=4))
    state, hist = StageState(), regimes.EndpointHistory()
    feasible = []
    from .master import build_stage as _bs

    for k in (1, 2, 3):
        r = regimes.endpoint_choose_lambda(state, k, cfg_arith, hist)
        feasible.append(r.feasible)
        rec, state = _bs(state, r.record.config, b_floor=100.0)
        hist = hist.extended(r.lam, rec.E)
    rows.append(structural_row("endpoint-feasible-prefix", all(feasible),
                               detail=f"stages 1..3 fully feasible at B_floor=100"))

    band = regimes.endpoint_scale_band(1.0, [Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)],
                                       b_floor=100.0)
    rows.append(exact_row("endpoint-scale-band", band["width_factor"], 50.0,
                          band["width_factor"] <= 50.0,
                          params=f"lam grid 1/2..1/8, band [{band['low']:.3g},{band['high']:.3g}]"))

    for p in (2, 4):
        lcfg = regimes.LpConfig(p=p, b_floor=rc.b_floor,
                                caps=DeskCaps(max_trials=1))
        manifest, results = regimes.build_lp_manifest(lcfg, 3, seed=rc.seed)
        exact_ok = all(r.lam * Fraction(r.B) ** (p - 2) == lcfg.a(r.k) for r in results)
        rows.append(structural_row(f"lp-budget-exact-p{p}", exact_ok,
                                   detail="lam * B^(p-2) == a_k in exact rationals"))
        ratio_ok = all(r.ratio >= r.k for r in results)
        rows.append(exact_row(f"lp-freeze-ratio-p{p}",
                              min(r.ratio / r.k for r in results), 1.0, ratio_ok,
                              params="; ".join(f"k={r.k}:B={float(r.B):.3g}" for r in results)))
        fail_ok = all(math.exp(-regimes.lp_failure_exponent(r)) <= (r.k + 1) ** -8 * (1 + 1e-9)
                      for r in results)
        rows.append(exact_row(f"lp-failure-target-p{p}",
                              max(math.exp(-regimes.lp_failure_exponent(r)) * (r.k + 1) ** 8
                                  for r in results), 1.0, fail_ok,
                              params="uncapped trial counts"))
        rows.append(lp_growth_row(manifest, results, lcfg, rc))

    hm = desk_hitset(rc)
    rows.append(exact_row("hitset-measure", float(hm.measure_bound), float(hm.epsilon),
                          hm.measure_bound < hm.epsilon,
                          params=f"exact bound {hm.measure_bound}"))
    stage_ok = all(s.measure_bound <= Fraction(1, s.A) for s in hm.stages)
    rows.append(structural_row("hitset-stage-measure", stage_ok,
                               detail="L 2^-d <= 1/A per stage, exact rationals"))
    chain_ok = True
    for s in hm.stages:
        for t in range(1, s.T + 1):
            n_c = s.L - s.lengths[t - 1] + 1
            p_exact = -math.expm1(n_c * math.log1p(-(2.0 ** -s.d)))
            chain_ok &= p_exact >= 0.5 * n_c * 2.0 ** -s.d >= float(regimes.HIT_COEFF) / s.A
    rows.append(structural_row("hitset-hitprob-chain", chain_ok,
                               detail="exact hit probability >= (7/32)/A"))
    rows.extend(hitset_mc_rows(hm, rc))

    r_adm = regimes.admissible_check(regimes.modulus_logloglog(2.0))
    r_end = regimes.admissible_check(regimes.modulus_loglog(0.5))
    r_mid = regimes.admissible_check(regimes.modulus_loglog(0.25))
    ok = r_adm.admissible and (not r_end.admissible) and r_mid.admissible
    rows.append(structural_row(
        "modulus-classify", ok,
        detail=f"(logloglogN)^-2: {r_adm.admissible}; (loglogN)^-1/2: {r_end.admissible}; "
               f"(loglogN)^-1/4: {r_mid.admissible}",
        params=f"domination constants {r_adm.domination_constant:.3g}, "
               f"{r_mid.domination_constant:.3g}"))
    return rows


def lp_growth_row(manifest: Manifest, results, lcfg, rc: RunConfig) -> ReportRow:
    """Growth-scan check: normalized ratio >= k on stage-k good tapes."""
    tapes = []
    for rec, t in manifest.trials_in_order():
        idx = mc.find_good_tapes(manifest, rec.k, t, rc.samples_small, rc.seed + 50,
                                 limit=5)
        for i in idx:
            tapes.append((f"mc[{i}]", BitTape(int(sample_seeds(rc.seed + 50, 1, start=i)[0])), False))
        tapes.append((f"forced[{rec.k},{t}]",
                      mc.forced_good_tape(manifest, rec.k, t, seed=rc.seed + 51), True))
    points = mc.growth_scan(manifest, tapes, lcfg.p, lcfg.eps)
    ok = True
    checked = 0
    for q in points:
        if q.good:
            checked += 1
            ok &= q.ratio_lower >= q.k * (1 - 1e-9)
    upper = max(q.ratio_upper for q in points)
    return exact_row(f"lp-growth-p{int(lcfg.p)}", checked, 0,
                     ok and checked >= len(manifest.stages),
                     params=f"good endpoints checked: {checked}; max upper-normalized {upper:.3g}")


def hitset_mc_rows(hm, rc: RunConfig) -> list[ReportRow]:
    rows = []
    n = rc.samples_small
    seeds = sample_seeds(rc.seed + 60, n)
    fams = [s.trial_family(t) for s in hm.stages for t in range(1, s.T + 1)]
    hits = engine.scan_family_counts(seeds, fams) > 0

    exps = hm.all_exponents()
    col = 0
    member_viol = endpoint_viol = hits_checked = 0
    for s in hm.stages:
        for t in range(1, s.T + 1):
            hit_idx = np.flatnonzero(hits[:, col])[: rc.signal_tape_limit]
            col += 1
            N = s.endpoints[t - 1]
            for i in hit_idx:
                tape = BitTape(int(seeds[i]))
                members = regimes.bounded_membership_many(hm, tape, exps[:N])
                trial_pts = s.exponents(t)
                trial_members = regimes.bounded_membership_many(hm, tape, trial_pts)
                hits_checked += 1
                if not all(trial_members):
                    member_viol += 1
                if sum(members) / N < 1.0 / (1 + float(s.theta)) - 1e-12:
                    endpoint_viol += 1
    rows.append(exact_row("hitset-membership", member_viol, 0,
                          member_viol == 0 and hits_checked > 0,
                          params=f"{hits_checked} hit events, all trial points in the set"))
    rows.append(exact_row("hitset-endpoint-average", endpoint_viol, 0,
                          endpoint_viol == 0 and hits_checked > 0,
                          params="membership average >= 1/(1+theta) at hit endpoints"))

    # empirical measure of the union vs the exact bound
    m = rc.samples_small
    mseeds = sample_seeds(rc.seed + 61, m)
    member = np.zeros(m, dtype=bool)
    for s in hm.stages:
        fam = s.member_family(0)
        member |= engine.scan_family_counts(mseeds, [fam])[:, 0] > 0
    phat = float(member.mean())
    bound = float(hm.measure_bound)
    sig = binomial_sigma(bound, m)
    rows.append(mc_row("hitset-empirical-measure", phat, bound, 4 * sig,
                       phat <= bound + 4 * sig, params=f"n={m}"))
    return rows


def verify_all(rc: RunConfig) -> tuple[list[ReportRow], dict]:
    """Run every suite on freshly built desk constructions."""
    rows: list[ReportRow] = []
    artifacts: dict = {}
    rows += suite_bits(rc)
    rows += suite_spike(rc)
    rows += suite_block(rc)
    rows += suite_trial(rc)
    manifest = structural_manifest(seed=rc.seed)
    fail_m = stagefail_manifest(seed=rc.seed)
    hm = desk_hitset(rc)
    artifacts["structural"] = manifest
    artifacts["stagefail"] = fail_m
    artifacts["hitset"] = hm
    rows += suite_master(manifest, rc, fail_manifest=fail_m)
    rows += suite_independence(manifest, hm, rc)
    rows += suite_fourier(manifest, rc)
    rows += suite_regimes(rc)
    return rows, artifacts
