"""Seeded Monte Carlo estimation, independence testing, and growth scans.

Every estimate is deterministic in (master seed, sample count): sample j
always reads the tape with the documented derived seed, so parallel chunking
and reruns aggregate to identical results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Callable

import numpy as np

from . import engine
from .bits import BitTape, sample_seeds
from .master import Manifest, master_signal_check, partial_sum_at
from .mcstats import CHI2_SIGNIFICANCE, chi_square_pvalue, wilson_interval
from .trials import central_family, good_event


@dataclass(frozen=True)
class MCResult:
    estimate: float
    ci_halfwidth: float
    successes: int
    samples: int
    seed: int

    @property
    def center(self) -> float:
        return self.estimate


def mc_estimate(event: Callable, samples: int, seed: int,
                batch: Callable | None = None, chunk: int = 1 << 16) -> MCResult:
    """Empirical frequency of an event over derived-seed tapes, Wilson CI.

    ``event`` is a predicate on a BitTape; a vectorized ``batch`` over seed
    arrays is used instead when provided.  Chunked aggregation is
    order-independent, so any partition of the samples gives the same count.
    """
    if samples < 10 ** 3:
        raise ValueError(f"statistical claims need >= 1e3 samples, got {samples}")
    successes = 0
    for lo in range(0, samples, chunk):
        n = min(chunk, samples - lo)
        seeds = sample_seeds(seed, n, start=lo)
        if batch is not None:
            hits = np.asarray(batch(seeds), dtype=bool)
            successes += int(hits.sum())
        else:
            successes += sum(bool(event(BitTape(int(s)))) for s in seeds)
    center, half = wilson_interval(successes, samples)
    return MCResult(estimate=successes / samples, ci_halfwidth=half,
                    successes=successes, samples=samples, seed=seed)


@dataclass(frozen=True)
class FactorizationRow:
    """One chi-square factorization test."""

    label: str
    events: tuple[str, ...]
    pvalue: float
    samples: int

    @property
    def ok(self) -> bool:
        return self.pvalue >= CHI2_SIGNIFICANCE


def _pair_test(label, names, a, b) -> FactorizationRow:
    n = a.shape[0]
    obs = [int((a & b).sum()), int((a & ~b).sum()),
           int((~a & b).sum()), int((~a & ~b).sum())]
    pa, pb = a.mean(), b.mean()
    exp = [n * pa * pb, n * pa * (1 - pb), n * (1 - pa) * pb, n * (1 - pa) * (1 - pb)]
    return FactorizationRow(label=label, events=names,
                            pvalue=chi_square_pvalue(obs, exp, dof=1), samples=n)


def _triple_test(label, names, a, b, c) -> FactorizationRow:
    n = a.shape[0]
    obs, exp = [], []
    marg = [a.mean(), b.mean(), c.mean()]
    for sa in (True, False):
        for sb in (True, False):
            for sc in (True, False):
                sel = (a == sa) & (b == sb) & (c == sc)
                obs.append(int(sel.sum()))
                e = n
                for m, s in zip(marg, (sa, sb, sc)):
                    e *= m if s else (1 - m)
                exp.append(e)
    return FactorizationRow(label=label, events=names,
                            pvalue=chi_square_pvalue(obs, exp, dof=4), samples=n)


def good_event_matrix(manifest: Manifest, samples: int, seed: int) -> tuple[np.ndarray, list[str]]:
    """Indicator matrix (samples x trials) of the good events of a manifest."""
    fams, names = [], []
    for rec, t in manifest.trials_in_order():
        fams.append(central_family(rec.block, rec.trial(t)))
        names.append(f"good[{rec.k},{t}]")
    seeds = sample_seeds(seed, samples)
    counts = engine.scan_family_counts(seeds, fams)
    return counts > 0, names


def independence_suite(indicators: np.ndarray, names: list[str],
                       max_pairs: int = 20, max_triples: int = 8,
                       min_expected: float = 5.0) -> list[FactorizationRow]:
    """Pairwise and triple-wise factorization tests on event indicators.

    Cells with tiny expected counts make the chi-square invalid, so pairs
    and triples are only tested when every expected cell clears
    ``min_expected``.
    """
    n, m = indicators.shape
    rows: list[FactorizationRow] = []
    probs = indicators.mean(axis=0)
    pairs = list(combinations(range(m), 2))
    testable = [ij for ij in pairs
                if n * probs[ij[0]] * probs[ij[1]] >= min_expected]
    for (i, j) in testable[:max_pairs]:
        rows.append(_pair_test(f"pair {names[i]}*{names[j]}",
                               (names[i], names[j]),
                               indicators[:, i], indicators[:, j]))
    triples = [ijk for ijk in combinations(range(m), 3)
               if n * probs[ijk[0]] * probs[ijk[1]] * probs[ijk[2]] >= min_expected]
    for (i, j, k) in triples[:max_triples]:
        rows.append(_triple_test(f"triple {names[i]}*{names[j]}*{names[k]}",
                                 (names[i], names[j], names[k]),
                                 indicators[:, i], indicators[:, j], indicators[:, k]))
    return rows


def overlap_negative_control(samples: int, seed: int) -> list[FactorizationRow]:
    """Deliberately dependent events (overlapping windows); must fail.

    Keeps the suite honest: if this control ever passes, the factorization
    tests have lost their power.
    """
    seeds = sample_seeds(seed, samples)
    a = engine.window_zero_direct(seeds, 0, 5)
    b = engine.window_zero_direct(seeds, 2, 5)
    return [_pair_test("negative-control overlap", ("w[0:5]", "w[2:7]"), a, b)]


@dataclass(frozen=True)
class GrowthPoint:
    """Normalized partial-sum ratios at one trial endpoint on one tape."""

    tape_label: str
    k: int
    t: int
    N: int
    partial_sum: float
    ratio_lower: float
    ratio_upper: float
    good: bool
    forced: bool


def growth_scan(manifest: Manifest, tapes: list[tuple[str, object, bool]],
                p: float, eps: Callable[[int], float],
                upper_eps: float = 0.5) -> list[GrowthPoint]:
    """Normalized partial sums at every trial endpoint for the given tapes.

    ``tapes`` holds (label, tape, forced) triples.  The lower normalization
    divides by N (log N)^(1/p - eps_k); the upper sanity normalization by
    N (log N)^(1/p + upper_eps).
    """
    points = []
    for label, tape, forced in tapes:
        for rec, t in manifest.trials_in_order():
            N = rec.endpoints[t - 1]
            s = partial_sum_at(manifest, tape, N)
            logN = math.log(N) if N > 1 else 1.0
            lower = s / (N * logN ** (1.0 / p - eps(rec.k)))
            upper = abs(s) / (N * logN ** (1.0 / p + upper_eps))
            g = good_event(rec.block, rec.trial(t), tape)
            points.append(GrowthPoint(tape_label=label, k=rec.k, t=t, N=N,
                                      partial_sum=s, ratio_lower=lower,
                                      ratio_upper=upper, good=g, forced=forced))
    return points


def growth_points_to_csv(points: list[GrowthPoint]) -> str:
    lines = ["# spikeblocks-growthscan-v1",
             "tape,k,t,N,partial_sum,ratio_lower,ratio_upper,good,forced"]
    for q in points:
        lines.append(f"{q.tape_label},{q.k},{q.t},{q.N},{q.partial_sum!r},"
                     f"{q.ratio_lower!r},{q.ratio_upper!r},{int(q.good)},{int(q.forced)}")
    return "\n".join(lines) + "\n"


def find_good_tapes(manifest: Manifest, k: int, t: int, samples: int, seed: int,
                    limit: int = 50) -> list[int]:
    """Sample indices whose tapes make trial (k, t) good, up to a limit."""
    rec = manifest.stage(k)
    fam = central_family(rec.block, rec.trial(t))
    seeds = sample_seeds(seed, samples)
    hits = engine.scan_family_counts(seeds, [fam])[:, 0] > 0
    return [int(i) for i in np.flatnonzero(hits)[:limit]]


def forced_good_tape(manifest: Manifest, k: int, t: int, seed: int,
                     h_index: int | None = None):
    """A tape forced into the good event of trial (k, t).

    One central digit window is overridden to zeros; every other digit stays
    random, so the tape is a genuine point of the good event.
    """
    from .bits import ForcedTape

    rec = manifest.stage(k)
    fam = central_family(rec.block, rec.trial(t))
    h = fam.count // 2 if h_index is None else h_index
    pos = fam.base + h * fam.step
    return ForcedTape(BitTape(seed), zero_ranges=((pos, pos + fam.width),))


def signal_violations(manifest: Manifest, good_seeds: list[int], seed: int,
                      k: int, t: int) -> tuple[int, int, float]:
    """Run the master signal check on every given good tape.

    Returns (checked, violations, worst average margin).
    """
    checked = violations = 0
    worst = math.inf
    B = manifest.stage(k).config.B
    for idx in good_seeds:
        tape = BitTape(int(sample_seeds(seed, 1, start=idx)[0]))
        rep = master_signal_check(manifest, tape, k, t)
        checked += 1
        worst = min(worst, rep.average - (B - manifest.mu))
        if not rep.ok:
            violations += 1
    return checked, violations, worst
