"""One trial of a spike block along a short arithmetic progression of dilates.

A trial sums the block over the exponents M+D, M+2D, ..., M+lD.  Because the
block's own layers sit on the same step D, the double sum reorganizes into a
single weighted sum of spike variables Z_h with convolution weights w_h; in
the central index range the weight is exactly l, so one central spike is
counted l times.  That local amplification, the exact probability of seeing
at least one central spike, and the resulting lower bound 2*B*l are what
this module computes and checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import engine
from .bits import window_all_zero
from .spikes import BlockParams, block_eval

#: Lower bound coefficient for the good-event probability: for every valid
#: block and trial, P(good) >= GOOD_PROB_COEFF * lam / B**2.  Composed from
#: the central-index count >= 7L/8, the per-window probability
#: > lam/(128 B^2 L), and the elementary factor 1/2.
GOOD_PROB_COEFF = 7.0 / 2048.0


@dataclass(frozen=True)
class TrialSpec:
    """Starting offset and length of one trial."""

    M: int
    ell: int

    def validate(self, bp: BlockParams) -> None:
        if not (1 <= self.ell <= bp.L // 8):
            raise ValueError(f"trial length {self.ell} outside 1..L/8 for L={bp.L}")
        if self.M + bp.D < 0:
            raise ValueError(f"trial offset {self.M} gives a negative dilation exponent")


@dataclass(frozen=True)
class WeightProfile:
    """Convolution weights w_h = #{(q, r): 1<=q<=L, 1<=r<=ell, q+r=h}."""

    L: int
    ell: int

    def w(self, h: int) -> int:
        if not (2 <= h <= self.L + self.ell):
            return 0
        return min(h - 1, self.ell, self.L, self.L + self.ell + 1 - h)

    @property
    def indices(self) -> range:
        return range(2, self.L + self.ell + 1)

    @property
    def total(self) -> int:
        return self.L * self.ell

    def central_range(self) -> range:
        """Indices where the weight equals ell exactly."""
        return range(self.ell + 1, self.L + 2)


def weights(L: int, ell: int) -> WeightProfile:
    if not (1 <= ell <= L):
        raise ValueError(f"need 1 <= ell <= L, got ell={ell}, L={L}")
    return WeightProfile(L=L, ell=ell)


def _z_position(bp: BlockParams, tr: TrialSpec, h: int) -> int:
    """0-based bit position of the digit window of Z_h."""
    return bp.U + tr.M + h * bp.D


def central_family(bp: BlockParams, tr: TrialSpec) -> engine.WindowFamily:
    """Digit windows of the central variables Z_h, ell+1 <= h <= L+1."""
    return engine.WindowFamily(base=_z_position(bp, tr, tr.ell + 1), step=bp.D,
                               count=bp.L - tr.ell + 1, width=bp.d)


def z_family(bp: BlockParams, tr: TrialSpec) -> engine.WindowFamily:
    """Digit windows of all variables Z_h, 2 <= h <= L+ell."""
    return engine.WindowFamily(base=_z_position(bp, tr, 2), step=bp.D,
                               count=bp.L + tr.ell - 1, width=bp.d)


def trial_sum(bp: BlockParams, tr: TrialSpec, tape) -> float:
    """Direct evaluation: sum of block values over the trial exponents."""
    tr.validate(bp)
    return sum(block_eval(bp, tape, tr.M + r * bp.D) for r in range(1, tr.ell + 1))


def trial_sum_weighted(bp: BlockParams, tr: TrialSpec, tape) -> float:
    """The reorganized form sqrt(lam/L) * sum_h w_h Z_h.

    Computed from the zero set of the Z windows, independently of
    :func:`trial_sum`; the two agree to floating-point accuracy.
    """
    tr.validate(bp)
    fam = z_family(bp, tr)
    prof = weights(bp.L, tr.ell)
    if fam.count <= engine.DIRECT_FAMILY_LIMIT:
        zero_idx = [i for i in range(fam.count)
                    if window_all_zero(tape, fam.base + i * fam.step + 1, fam.width)]
    else:
        runs = tape.zero_runs(fam.bit_lo, fam.bit_hi, fam.width)
        zero_idx = engine.indices_in_runs(runs, fam)
    sp = bp.spike
    hits = sum(prof.w(i + 2) for i in zero_idx)
    return bp.scale * ((sp.h + sp.g) * hits - sp.g * prof.total)


def good_event(bp: BlockParams, tr: TrialSpec, tape) -> bool:
    """True iff some central variable Z_h spikes (its window is all zero)."""
    tr.validate(bp)
    fam = central_family(bp, tr)
    if fam.count <= engine.DIRECT_FAMILY_LIMIT:
        return any(window_all_zero(tape, fam.base + i * fam.step + 1, fam.width)
                   for i in range(fam.count))
    runs = tape.zero_runs(fam.bit_lo, fam.bit_hi, fam.width)
    return engine.count_in_runs(runs, fam) > 0


def good_event_seeds(bp: BlockParams, tr: TrialSpec, seeds: np.ndarray) -> np.ndarray:
    """Vectorized good-event indicator over many tape seeds."""
    tr.validate(bp)
    fam = central_family(bp, tr)
    return engine.scan_family_counts(seeds, [fam])[:, 0] > 0


def good_prob_exact(bp: BlockParams, tr: TrialSpec) -> float:
    """Exact probability 1 - (1 - 2**-d)**(L - ell + 1) of the good event.

    Also checks the absolute floor GOOD_PROB_COEFF * lam / B**2 implied by
    the depth window (skipped for fixtures that opted out of that window).
    """
    tr.validate(bp)
    n_c = bp.L - tr.ell + 1
    prob = -math.expm1(n_c * math.log1p(-(2.0 ** (-bp.d))))
    if bp.check_depth:
        floor = GOOD_PROB_COEFF * bp.lam_float / bp.B ** 2
        if prob < floor * (1.0 - 1e-12):
            raise AssertionError(f"good probability {prob} below floor {floor}")
    return prob


def amplification_target(bp: BlockParams, tr: TrialSpec) -> float:
    """The guaranteed trial sum on the good event: 2 * B * ell."""
    return 2.0 * bp.B * tr.ell


def amplification_check(bp: BlockParams, tr: TrialSpec, tape, method: str = "auto") -> bool:
    """On the good event, check trial_sum >= 2*B*ell.

    Raises if called off the good event.  ``method`` picks the direct or the
    reorganized evaluation ("auto" uses the direct form unless the trial is
    large).
    """
    if not good_event(bp, tr, tape):
        raise ValueError("amplification_check requires the good event")
    if method == "auto":
        method = "direct" if tr.ell * bp.L <= 1 << 16 else "weighted"
    if method == "direct":
        value = trial_sum(bp, tr, tape)
    elif method == "weighted":
        value = trial_sum_weighted(bp, tr, tape)
    else:
        raise ValueError(f"unknown method {method!r}")
    return value >= amplification_target(bp, tr)
