"""Exact Fourier analysis of spikes, blocks, and finite constructions.

The spike is a step function, so its coefficients have a closed form; a
dilated spike only occupies frequencies whose dyadic valuation falls in one
band of width d, and the bands of distinct layers and distinct stages are
disjoint.  Tails are therefore exactly additive across layers and stages,
and the squared tail of one dilated spike at cutoff N reduces to the base
spike's tail at the integer cutoff N // 2**v (all coefficients survive when
N < 2**v).

Cutoffs beyond any float are handled in base-2 log space: such a cutoff
enters only through its log2, and per-layer tails switch to the threshold
envelope min(1, 2**(d+v) / N).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .logspace import ceil_log2, int_log2
from .master import Manifest
from .spikes import BlockParams

#: Direct coefficient summation is capped at this many frequencies per call.
EXACT_TAIL_LIMIT = 1 << 24


@dataclass(frozen=True)
class Coefficient:
    """One Fourier coefficient."""

    r: int
    value: complex


def _norm(d: int) -> float:
    return math.sqrt(2.0 ** (-d) * (1.0 - 2.0 ** (-d)))


def spike_coeff(d: int, r: int) -> Coefficient:
    """Closed-form coefficient of the depth-d spike at frequency r.

    The r = 0 coefficient vanishes (mean zero); for r != 0 the value is the
    interval indicator's coefficient (1 - e^{-2 pi i r 2^-d}) / (2 pi i r)
    divided by the normalization sqrt(2^-d (1 - 2^-d)).
    """
    if d < 1:
        raise ValueError(f"depth must be >= 1, got {d}")
    if r == 0:
        return Coefficient(0, 0j)
    theta = 2.0 * math.pi * r * 2.0 ** (-d)
    num = 1.0 - complex(math.cos(theta), -math.sin(theta))
    return Coefficient(r, num / (2.0j * math.pi * r) / _norm(d))


def _coeff_sq_array(d: int, r: np.ndarray) -> np.ndarray:
    """|spike coefficient|^2 for positive integer frequencies, vectorized.

    Uses sin^2(pi (r mod 2^d) / 2^d) with the exact integer reduction, which
    avoids argument-reduction error and makes in-band zeros exact.
    """
    rm = np.mod(r, 1 << d)
    s = np.sin(math.pi * rm.astype(np.float64) * 2.0 ** (-d))
    return s * s / (math.pi ** 2 * r.astype(np.float64) ** 2 * _norm(d) ** 2)


def spike_partial_energy(d: int, R: int) -> float:
    """Sum of |coefficient|^2 over 0 < |r| <= R, compensated accumulation."""
    if R < 1:
        raise ValueError(f"cutoff must be >= 1, got {R}")
    if R > EXACT_TAIL_LIMIT:
        raise ValueError(f"direct summation capped at {EXACT_TAIL_LIMIT}, got {R}")
    partials = []
    chunk = 1 << 20
    for lo in range(1, R + 1, chunk):
        r = np.arange(lo, min(lo + chunk, R + 1), dtype=np.int64)
        partials.append(float(np.sum(_coeff_sq_array(d, r))))
    return 2.0 * math.fsum(partials)


def spike_tail(d: int, R: int) -> float:
    """Energy beyond cutoff R: 1 - sum_{0<|r|<=R} |coefficient|^2."""
    tail = 1.0 - spike_partial_energy(d, R)
    if tail < -1e-9:
        raise AssertionError(f"negative tail {tail} at d={d}, R={R}")
    return max(tail, 0.0)


def tail_envelope(d: int, R: int) -> float:
    """The reference envelope min(1, 2^d / R)."""
    return min(1.0, 2.0 ** d / R)


def fit_spike_tail_constant(depths=range(1, 11), ratios=(2, 4, 16)) -> float:
    """Largest tail / envelope ratio over the documented grid."""
    worst = 0.0
    for d in depths:
        for rho in ratios:
            R = rho * (1 << d)
            worst = max(worst, spike_tail(d, R) / tail_envelope(d, R))
    return worst


def dilated_spike_tail(d: int, v: int, N: int, exact_limit: int = EXACT_TAIL_LIMIT) -> float:
    """Squared tail of the spike composed with x -> 2^v x, at cutoff N.

    Exact value: every coefficient survives when N < 2^v (tail is the whole
    unit energy); otherwise the tail equals the base spike's tail at the
    integer cutoff N // 2^v.  Falls back to the envelope when that cutoff is
    too large to sum directly.
    """
    if N < 1:
        raise ValueError(f"cutoff must be >= 1, got {N}")
    if v < 0:
        raise ValueError(f"dilation exponent must be >= 0, got {v}")
    if (N >> v) == 0:
        return 1.0
    R = N >> v
    if R <= exact_limit:
        return spike_tail(d, R)
    if d + v - int_log2(N) < -1060:
        return 0.0
    return min(1.0, 2.0 ** (d + v - int_log2(N)))


@dataclass(frozen=True)
class BlockTail:
    """Squared tail of one block at one cutoff, with layer accounting."""

    value: float
    exact_layers: int
    envelope_layers: int

    @property
    def mode(self) -> str:
        if self.envelope_layers == 0:
            return "exact"
        if self.exact_layers == 0:
            return "envelope"
        return "mixed"


def block_tail(bp: BlockParams, N: int | None = None, *, log2_N: int | None = None,
               exact_limit: int = EXACT_TAIL_LIMIT) -> BlockTail:
    """Squared Fourier tail of a block at cutoff N.

    Layers occupy disjoint valuation bands, so the tail is (lam/L) times the
    sum of per-layer dilated tails.  Exactly one of ``N`` and ``log2_N``
    must be given; the log2 form treats the cutoff as exactly 2**log2_N and
    always uses the envelope.  For blocks too large to enumerate layers the
    envelope is summed in closed form.
    """
    if (N is None) == (log2_N is None):
        raise ValueError("pass exactly one of N and log2_N")
    lam = float(bp.lam)
    cl2 = ceil_log2(N) if N is not None else log2_N

    if bp.L > 1 << 22 or N is None:
        # Closed-form envelope: layers with 2^(d+v_q) >= N contribute 1
        # (those with d + U + q*D >= cl2, i.e. q >= q0); the rest sum to the
        # exact geometric series sum_{q<q0} 2^(d+U+qD) / N.
        q0 = max(1, -((-(cl2 - bp.d - bp.U)) // bp.D))
        q0 = min(q0, bp.L + 1)
        n_full = bp.L - q0 + 1
        geom = 0.0
        m = q0 - 1
        if m > 0:
            # exponent of the top sub-threshold layer relative to the cutoff;
            # kept as exact integer arithmetic before any float conversion
            diff = bp.d + bp.U + m * bp.D - cl2
            adjust = (cl2 - int_log2(N)) if N is not None else 0.0
            if diff > -1100:
                geom = (2.0 ** (float(diff) + adjust)
                        * (1.0 - 2.0 ** (-min(m * bp.D, 1100)))
                        / (1.0 - 2.0 ** (-bp.D)))
        return BlockTail(value=lam / bp.L * (n_full + geom),
                         exact_layers=0, envelope_layers=bp.L)

    exact = envelope = 0
    parts = []
    for q in range(1, bp.L + 1):
        v = bp.U + q * bp.D
        R = N >> v
        if R <= exact_limit:
            exact += 1  # R == 0 is the all-coefficients-survive case, exact
        else:
            envelope += 1
        parts.append(dilated_spike_tail(bp.d, v, N, exact_limit=exact_limit))
    return BlockTail(value=lam / bp.L * math.fsum(parts),
                     exact_layers=exact, envelope_layers=envelope)


@dataclass(frozen=True)
class TailRow:
    """One cutoff of a tail profile; log2_N is exact when the cutoff is a power."""

    log2_N: float | int
    per_stage: tuple[float, ...]
    total: float
    bound: float
    mode: str


@dataclass(frozen=True)
class TailProfile:
    """Tail decomposition of a manifest over a cutoff grid."""

    rows: tuple[TailRow, ...]

    def to_csv(self) -> str:
        nstages = len(self.rows[0].per_stage) if self.rows else 0
        lines = ["# spikeblocks-tailprofile-v1"]
        cols = ["log2_N"] + [f"rho2_stage_{k}" for k in range(1, nstages + 1)]
        cols += ["total", "bound", "mode"]
        lines.append(",".join(cols))
        for row in self.rows:
            cells = [repr(row.log2_N)]
            cells += [repr(x) for x in row.per_stage]
            cells += [repr(row.total), repr(row.bound), row.mode]
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"


def f_tail(manifest: Manifest, N: int | None = None, *,
           log2_N: int | None = None) -> TailRow:
    """Tail of the built function at one cutoff: the exact sum over stages.

    Valuation bands of distinct stages are disjoint and truncation preserves
    that disjointness, so the total is literally the sum of the per-stage
    tails (identical floating-point summands).
    """
    tails = [block_tail(rec.block, N, log2_N=log2_N) for rec in manifest.stages]
    per_stage = tuple(t.value for t in tails)
    cl2 = ceil_log2(N) if N is not None else log2_N
    adjust = (cl2 - int_log2(N)) if N is not None else 0.0
    bound = 0.0
    for rec in manifest.stages:
        if rec.E >= cl2:
            bound += float(rec.config.lam)
        else:
            diff = rec.E - cl2
            if diff > -1100:
                bound += float(rec.config.lam) * 2.0 ** (float(diff) + adjust)
    modes = {t.mode for t in tails}
    mode = modes.pop() if len(modes) == 1 else "mixed"
    log2_val = int_log2(N) if N is not None else log2_N
    return TailRow(log2_N=log2_val, per_stage=per_stage,
                   total=math.fsum(per_stage), bound=bound, mode=mode)


def tail_profile(manifest: Manifest, cutoffs) -> TailProfile:
    """Tail rows over a grid of cutoffs (ints, or ("log2", e) pairs)."""
    rows = []
    for c in cutoffs:
        if isinstance(c, tuple) and c[0] == "log2":
            rows.append(f_tail(manifest, log2_N=c[1]))
        else:
            rows.append(f_tail(manifest, int(c)))
    return TailProfile(rows=tuple(rows))


@dataclass(frozen=True)
class BandSupportReport:
    """Result of scanning a block's coefficients against its valuation bands."""

    r_limit: int
    violations: list[int]
    max_off_band: float
    max_in_band: float

    @property
    def ok(self) -> bool:
        return not self.violations


def band_support_check(bp: BlockParams, r_limit: int,
                       threshold: float = 1e-10) -> BandSupportReport:
    """Check that coefficients vanish off the valuation bands.

    Numerically evaluates the block coefficient at every 0 < r <= r_limit
    (negative frequencies are conjugates) and flags any r whose dyadic
    valuation lies outside every band but whose magnitude reaches the
    threshold.
    """
    if r_limit > EXACT_TAIL_LIMIT:
        raise ValueError(f"band scan capped at {EXACT_TAIL_LIMIT}, got {r_limit}")
    r = np.arange(1, r_limit + 1, dtype=np.int64)
    vals = np.log2(r & -r).astype(np.int64)
    scale = math.sqrt(float(bp.lam) / bp.L)
    coeff = np.zeros(r.shape, dtype=np.complex128)
    in_band = np.zeros(r.shape, dtype=bool)
    for q in range(1, bp.L + 1):
        v = bp.U + q * bp.D
        divisible = vals >= v
        if not divisible.any():
            continue
        s = (r[divisible] >> v).astype(np.float64)
        theta = 2.0 * math.pi * s * 2.0 ** (-bp.d)
        num = (1.0 - np.cos(theta)) + 1j * np.sin(theta)
        coeff[divisible] += num / (2.0j * math.pi * s) / _norm(bp.d) * scale
        in_band |= divisible & (vals <= v + bp.d - 1)
    mags = np.abs(coeff)
    off = ~in_band
    violations = r[off & (mags >= threshold)].tolist()
    return BandSupportReport(
        r_limit=r_limit,
        violations=violations,
        max_off_band=float(mags[off].max()) if off.any() else 0.0,
        max_in_band=float(mags[in_band].max()) if in_band.any() else 0.0,
    )
