"""Stage scheduling: length and start recursions, manifests, and evaluation.

A stage adds one spike block and a batch of trials.  Trial lengths grow so
fast that each trial dominates everything selected before it (length
recursion with the fixed proportionality constant eta = 1/20); trial starts
are spaced so that distinct trials, and distinct stages, read disjoint digit
windows.  The manifest freezes the whole finite construction: stage records,
the enumerated dilation exponents, and the shielding constant mu which
bounds the function from below.

All indices are unbounded integers; the Fourier threshold of a stage is
never materialized, only its base-2 logarithm E = U + L*D + d + 2 is stored.
Builders stay pure integer arithmetic, so stages far beyond anything that
can be sampled are still constructible; evaluation entry points check desk
caps and fail loudly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterator

import numpy as np
from scipy.signal import fftconvolve

from . import engine
from .spikes import (DEFAULT_B_FLOOR, FLOOR_COEFF, BlockParams, block_eval,
                     choose_depth)
from .trials import TrialSpec, good_event

#: Proportionality constant of the length recursion.
ETA = Fraction(1, 20)

MANIFEST_FORMAT = "spikeblocks-manifest-v1"


class CapExceeded(RuntimeError):
    """A builder or evaluator was asked to exceed its configured desk caps."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class DeskCaps:
    """Loud limits for desk-scale work.

    ``max_trials``/``max_layers``/``max_stages`` bound what the builder will
    construct at all; ``max_exponents`` bounds what may be enumerated or
    evaluated pointwise.
    """

    max_trials: int = 64
    max_layers: int = 10 ** 45
    max_stages: int = 16
    max_exponents: int = 10 ** 5

    def require_trials(self, T: int):
        if T > self.max_trials:
            raise CapExceeded(f"stage wants T={T} trials, cap is {self.max_trials}")

    def require_layers(self, L: int):
        if L > self.max_layers:
            raise CapExceeded(f"stage wants L={L} layers, cap is {self.max_layers}")


@dataclass(frozen=True)
class StageConfig:
    """Free parameters of one stage; provenance names the regime that chose them."""

    lam: Fraction
    B: float
    T: int
    provenance: str = "manual"

    def __post_init__(self):
        object.__setattr__(self, "lam", Fraction(self.lam))
        if not (0 < self.lam <= 1):
            raise ValueError(f"lam must be in (0, 1], got {self.lam}")
        if self.T < 1:
            raise ValueError(f"need at least one trial, got T={self.T}")


@dataclass(frozen=True)
class StageState:
    """Bookkeeping carried between stages; all fields monotone nondecreasing."""

    P: int = 0
    m_last: int = 0
    V_max: int = 0
    Omega: int = 0


@dataclass(frozen=True)
class StageRecord:
    """Frozen output of one stage."""

    k: int
    config: StageConfig
    lengths: list[int]
    starts: list[int]
    block: BlockParams
    E: int
    N_star: int
    endpoints: list[int]
    p_counts: list[int]

    @property
    def T(self) -> int:
        return len(self.lengths)

    def trial(self, t: int) -> TrialSpec:
        """TrialSpec of trial t (1-based)."""
        return TrialSpec(M=self.starts[t - 1], ell=self.lengths[t - 1])

    def exponents(self, t: int) -> list[int]:
        M, ell, D = self.starts[t - 1], self.lengths[t - 1], self.block.D
        return [M + r * D for r in range(1, ell + 1)]

    def bands(self, cap: int = 1 << 17) -> list[tuple[int, int]]:
        """Valuation intervals [U+qD, U+qD+d-1]; capped materialization."""
        b = self.block
        if b.L > cap:
            raise CapExceeded(f"stage {self.k} has {b.L} bands, cap {cap}")
        return [(b.U + q * b.D, b.U + q * b.D + b.d - 1) for q in range(1, b.L + 1)]

    @property
    def band_hull(self) -> tuple[int, int]:
        """Smallest interval containing every band of this stage."""
        b = self.block
        return (b.U + b.D, b.U + b.L * b.D + b.d - 1)


def plan_lengths(P_start: int, T: int, eta: Fraction = ETA) -> tuple[list[int], list[int]]:
    """Trial lengths l_t = ceil((P_t + 1)/eta) and the exponent counts P_t.

    Returns (lengths, P_seq) with len(P_seq) = T + 1.  Checks the recursion
    guarantees P_t <= eta * l_t and P_t + l_t <= (1 + eta) * l_t exactly.
    """
    if T < 1:
        raise ValueError(f"need T >= 1, got {T}")
    if P_start < 0:
        raise ValueError(f"negative initial count {P_start}")
    inv_num, inv_den = eta.denominator, eta.numerator
    P = P_start
    lengths, P_seq = [], [P]
    for _ in range(T):
        ell = -((-(P + 1) * inv_num) // inv_den)
        assert P * eta.denominator <= ell * eta.numerator
        lengths.append(ell)
        P += ell
        P_seq.append(P)
    return lengths, P_seq


def build_stage(state: StageState, cfg: StageConfig, *, eta: Fraction = ETA,
                b_floor: float = DEFAULT_B_FLOOR,
                caps: DeskCaps | None = None) -> tuple[StageRecord, StageState]:
    """Build one stage on top of the given state.

    Chooses the minimal first start satisfying both placement conditions
    (new exponents after the previous stage; new digit windows beyond all
    previously used ones), then spaces subsequent trials to skip the whole
    digit range of their predecessor.
    """
    if caps is not None:
        caps.require_trials(cfg.T)
    lengths, P_seq = plan_lengths(state.P, cfg.T, eta)
    N_star = P_seq[-1]
    L = 8 * max(lengths)
    if caps is not None:
        caps.require_layers(L)
    d = choose_depth(cfg.lam, cfg.B, L)
    D = d + 2
    U = state.V_max + 1
    M1 = max(state.m_last - D + 1, state.Omega - U - D)
    starts = [M1]
    for t in range(1, cfg.T):
        starts.append(starts[-1] + (L + lengths[t - 1]) * D + d + 2)
    block = BlockParams(lam=cfg.lam, B=cfg.B, L=L, d=d, D=D, U=U, b_floor=b_floor)
    E = U + L * D + d + 2
    endpoints = [P_seq[t] + lengths[t] for t in range(cfg.T)]
    record = StageRecord(
        k=0, config=cfg, lengths=lengths, starts=starts, block=block,
        E=E, N_star=N_star, endpoints=endpoints, p_counts=P_seq[:-1],
    )
    new_state = StageState(
        P=N_star,
        m_last=starts[-1] + lengths[-1] * D,
        V_max=U + L * D + d - 1,
        Omega=U + starts[-1] + (L + lengths[-1]) * D + d,
    )
    return record, new_state


@dataclass
class Manifest:
    """The complete finite construction."""

    stages: list[StageRecord]
    eta: Fraction = ETA
    b_floor: float = DEFAULT_B_FLOOR
    regime: str = "manual"
    seed: int = 0
    exponents: list[int] | None = None
    _profiles: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def mu(self) -> float:
        """Shielding constant over built stages: FLOOR_COEFF * sum lam_k/B_k."""
        return FLOOR_COEFF * sum(float(s.config.lam) / s.config.B for s in self.stages)

    @property
    def total_exponents(self) -> int:
        return self.stages[-1].N_star if self.stages else 0

    def stage(self, k: int) -> StageRecord:
        return self.stages[k - 1]

    def trials_in_order(self) -> Iterator[tuple[StageRecord, int]]:
        for rec in self.stages:
            for t in range(1, rec.T + 1):
                yield rec, t

    def endpoint(self, k: int, t: int) -> int:
        return self.stage(k).endpoints[t - 1]


def build_manifest(configs: list[StageConfig], *, eta: Fraction = ETA,
                   b_floor: float = DEFAULT_B_FLOOR, regime: str = "manual",
                   seed: int = 0, caps: DeskCaps | None = None,
                   materialize: bool = True) -> Manifest:
    if caps is not None and len(configs) > caps.max_stages:
        raise CapExceeded(f"{len(configs)} stages exceed cap {caps.max_stages}")
    state = StageState()
    stages = []
    for i, cfg in enumerate(configs, start=1):
        record, state = build_stage(state, cfg, eta=eta, b_floor=b_floor, caps=caps)
        stages.append(replace(record, k=i))
    m = Manifest(stages=stages, eta=eta, b_floor=b_floor, regime=regime, seed=seed)
    if materialize:
        cap = caps.max_exponents if caps is not None else DeskCaps().max_exponents
        if m.total_exponents > cap:
            raise CapExceeded(
                f"{m.total_exponents} exponents exceed enumeration cap {cap}")
        m.exponents = enumerate_exponents(m)
    return m


def enumerate_exponents(manifest: Manifest) -> list[int]:
    """Increasing enumeration of all selected exponents.

    Any non-monotone placement indicates a builder bug and is rejected.
    """
    out: list[int] = []
    last = None
    for rec, t in manifest.trials_in_order():
        for m in rec.exponents(t):
            if last is not None and m <= last:
                raise ValueError(f"non-monotone exponent {m} after {last}")
            out.append(m)
            last = m
    if out and manifest.stages and len(out) != manifest.total_exponents:
        raise ValueError("exponent count disagrees with stage bookkeeping")
    return out


def f_eval(manifest: Manifest, tape, shift: int = 0) -> float:
    """Value of the built function at the tape point dilated by 2**shift."""
    if shift < 0:
        raise ValueError(f"shift must be >= 0, got {shift}")
    return sum(block_eval(rec.block, tape, shift) for rec in manifest.stages)


def _profile(manifest: Manifest, kp: int, k: int, t: int, n_r: int):
    """Window positions and multiplicities of block kp over a trial prefix.

    Summing block kp over the first n_r exponents of trial (k, t) touches
    windows at positions U' + M + r*D + q*D' whose multiplicities are the
    convolution of the two arithmetic progressions.  Positions are sorted;
    multiplicities are exact integers (checked after the FFT).
    """
    key = (kp, k, t, n_r)
    cached = manifest._profiles.get(key)
    if cached is not None:
        return cached
    rec = manifest.stage(k)
    blk = manifest.stage(kp).block
    Dk = rec.block.D
    Dp = blk.D
    M = rec.starts[t - 1]
    g = math.gcd(Dk, Dp)
    a = np.zeros(n_r * (Dk // g) + 1, dtype=np.float64)
    a[np.arange(1, n_r + 1) * (Dk // g)] = 1.0
    b = np.zeros(blk.L * (Dp // g) + 1, dtype=np.float64)
    b[np.arange(1, blk.L + 1) * (Dp // g)] = 1.0
    conv = fftconvolve(a, b)
    rounded = np.rint(conv)
    if np.max(np.abs(conv - rounded)) > 1e-3:
        raise AssertionError("window multiplicity convolution lost integrality")
    idx = np.flatnonzero(rounded > 0.5)
    base = blk.U + M
    positions = base + idx.astype(np.int64) * g
    weights = rounded[idx].astype(np.int64)
    prof = (positions, weights)
    if n_r == rec.lengths[t - 1]:
        manifest._profiles[key] = prof
    return prof


def _block_runs(manifest: Manifest, tape, pairs: list[tuple[int, int, int, int]]) -> dict:
    """Zero runs of the tape per block index, spanning the given pairs."""
    spans: dict[int, tuple[int, int]] = {}
    for kp, k, t, n_r in pairs:
        positions, _ = _profile(manifest, kp, k, t, n_r)
        d = manifest.stage(kp).block.d
        lo, hi = int(positions[0]), int(positions[-1]) + d
        if kp in spans:
            lo = min(lo, spans[kp][0])
            hi = max(hi, spans[kp][1])
        spans[kp] = (lo, hi)
    return {
        kp: tape.zero_runs(lo, hi, manifest.stage(kp).block.d)
        for kp, (lo, hi) in spans.items()
    }


def _pair_value(manifest: Manifest, kp: int, k: int, t: int, n_r: int, runs) -> float:
    """Sum of block kp over the first n_r exponents of trial (k, t)."""
    positions, weights = _profile(manifest, kp, k, t, n_r)
    blk = manifest.stage(kp).block
    sp = blk.spike
    hit_weight = 0
    for (a, b) in runs:
        if b - a < blk.d:
            continue
        lo = int(np.searchsorted(positions, a, side="left"))
        hi = int(np.searchsorted(positions, b - blk.d, side="right"))
        if hi > lo:
            hit_weight += int(weights[lo:hi].sum())
    total_weight = n_r * blk.L
    return blk.scale * ((sp.h + sp.g) * hit_weight - sp.g * total_weight)


def _prefix_pairs(manifest: Manifest, N: int) -> list[tuple[int, int, int]]:
    """Trials (k, t, n_r) covering the first N exponents."""
    if not (1 <= N <= manifest.total_exponents):
        raise ValueError(f"N={N} outside 1..{manifest.total_exponents}")
    out = []
    remaining = N
    for rec, t in manifest.trials_in_order():
        if remaining <= 0:
            break
        ell = rec.lengths[t - 1]
        n_r = min(ell, remaining)
        out.append((rec.k, t, n_r))
        remaining -= n_r
    return out


def partial_sum_at(manifest: Manifest, tape, N: int) -> float:
    """Sum of f over the first N dilation exponents."""
    trials = _prefix_pairs(manifest, N)
    pairs = [(kp, k, t, n_r) for (k, t, n_r) in trials
             for kp in range(1, len(manifest.stages) + 1)]
    runs_by_block = _block_runs(manifest, tape, pairs)
    return sum(_pair_value(manifest, kp, k, t, n_r, runs_by_block[kp])
               for (kp, k, t, n_r) in pairs)


def average_at(manifest: Manifest, tape, N: int) -> float:
    """The lacunary average over the first N selected exponents."""
    return partial_sum_at(manifest, tape, N) / N


def average_at_naive(manifest: Manifest, tape, N: int) -> float:
    """Oracle path: evaluate f exponent by exponent (desk sizes only)."""
    exps = manifest.exponents or enumerate_exponents(manifest)
    if N > len(exps):
        raise ValueError(f"N={N} beyond the manifest")
    return sum(f_eval(manifest, tape, m) for m in exps[:N]) / N


@dataclass(frozen=True)
class MasterSignalReport:
    """Three-way decomposition of a trial-endpoint partial sum."""

    k: int
    t: int
    N: int
    signal: float
    past: float
    off_block: float
    mu: float
    B: float
    ell: int

    @property
    def total(self) -> float:
        return self.signal + self.past + self.off_block

    @property
    def average(self) -> float:
        return self.total / self.N

    @property
    def signal_ok(self) -> bool:
        return self.signal >= 2.0 * self.B * self.ell * (1 - 1e-12)

    @property
    def shield_ok(self) -> bool:
        return self.past + self.off_block >= -self.mu * self.N * (1 + 1e-12)

    @property
    def average_ok(self) -> bool:
        return self.average >= (self.B - self.mu) * (1 - 1e-12) - 1e-12

    @property
    def ok(self) -> bool:
        return self.signal_ok and self.shield_ok and self.average_ok


def master_signal_check(manifest: Manifest, tape, k: int, t: int) -> MasterSignalReport:
    """Verify the master lower bound at the endpoint of a good trial.

    Requires trial (k, t) to be good on this tape.  Splits the partial sum
    into the current-trial signal, the contribution of all earlier
    exponents, and the other blocks' contribution over the trial exponents;
    each part is reported with its bound.
    """
    rec = manifest.stage(k)
    tr = rec.trial(t)
    if not good_event(rec.block, tr, tape):
        raise ValueError(f"trial ({k},{t}) is not good on this tape")
    N = manifest.endpoint(k, t)
    P = rec.p_counts[t - 1]
    ell = rec.lengths[t - 1]
    nstages = len(manifest.stages)

    past_trials = _prefix_pairs(manifest, P) if P > 0 else []
    pairs = [(kp, kk, tt, n_r) for (kk, tt, n_r) in past_trials
             for kp in range(1, nstages + 1)]
    pairs += [(kp, k, t, ell) for kp in range(1, nstages + 1)]
    runs_by_block = _block_runs(manifest, tape, pairs)

    past = sum(_pair_value(manifest, kp, kk, tt, n_r, runs_by_block[kp])
               for (kp, kk, tt, n_r) in pairs if (kk, tt) != (k, t))
    signal = _pair_value(manifest, k, k, t, ell, runs_by_block[k])
    off_block = sum(_pair_value(manifest, kp, k, t, ell, runs_by_block[kp])
                    for kp in range(1, nstages + 1) if kp != k)
    return MasterSignalReport(k=k, t=t, N=N, signal=signal, past=past,
                              off_block=off_block, mu=manifest.mu,
                              B=rec.config.B, ell=ell)


def validate_stage_record(rec: StageRecord, prev: StageState, *, eta: Fraction = ETA) -> None:
    """Structural invariants of a stage against the state it was built on."""
    lengths, P_seq = plan_lengths(prev.P, rec.T, eta)
    b = rec.block
    checks = [
        ("lengths follow the recursion", rec.lengths == lengths),
        ("counts stay below eta * length",
         all(P_seq[t] * eta.denominator <= lengths[t] * eta.numerator
             for t in range(rec.T))),
        ("L is eight times the longest trial", b.L == 8 * max(lengths)),
        ("depth lies in its window", choose_depth(b.lam, b.B, b.L) == b.d),
        ("spacing leaves a two-digit gap", b.D == b.d + 2),
        ("base shift continues previous bands", b.U == prev.V_max + 1),
        ("first start clears previous exponents", rec.starts[0] + b.D > prev.m_last),
        ("first window clears previous digit use",
         b.U + rec.starts[0] + b.D + 1 > prev.Omega),
        ("first start is minimal",
         rec.starts[0] == max(prev.m_last - b.D + 1, prev.Omega - b.U - b.D)),
        ("start recursion skips trial digit ranges",
         all(rec.starts[t] == rec.starts[t - 1] + (b.L + lengths[t - 1]) * b.D + b.d + 2
             for t in range(1, rec.T))),
        ("threshold exponent matches", rec.E == b.U + b.L * b.D + b.d + 2),
        ("endpoints add the new trial",
         rec.endpoints == [P_seq[t] + lengths[t] for t in range(rec.T)]),
        ("stage count matches", rec.N_star == P_seq[-1]),
    ]
    failed = [name for name, ok in checks if not ok]
    if failed:
        raise AssertionError(f"stage {rec.k} invariant failures: {failed}")


def validate_manifest(manifest: Manifest, band_cap: int = 1 << 17) -> None:
    """Cross-stage invariants: disjoint bands, lacunary exponents, mu."""
    hulls = [rec.band_hull for rec in manifest.stages]
    for i in range(1, len(hulls)):
        if hulls[i][0] <= hulls[i - 1][1]:
            raise AssertionError(f"stage {i + 1} bands overlap stage {i}")
    total_bands = sum(rec.block.L for rec in manifest.stages)
    if total_bands <= band_cap:
        all_bands = [iv for rec in manifest.stages for iv in rec.bands(band_cap)]
        all_bands.sort()
        for (a1, b1), (a2, _) in zip(all_bands, all_bands[1:]):
            if a2 <= b1:
                raise AssertionError(f"overlapping bands ({a1},{b1}) and onset {a2}")
    if manifest.exponents is not None:
        exps = manifest.exponents
        if any(m2 <= m1 for m1, m2 in zip(exps, exps[1:])):
            raise AssertionError("exponents are not strictly increasing")
        if len(exps) != manifest.total_exponents:
            raise AssertionError("exponent list disagrees with stage bookkeeping")
    state = StageState()
    for rec in manifest.stages:
        validate_stage_record(rec, state, eta=manifest.eta)
        _, state = build_stage(state, rec.config, eta=manifest.eta,
                               b_floor=manifest.b_floor)


# ---------------------------------------------------------------------------
# Serialization: canonical JSON, every unbounded integer as a decimal string.
# Writing is canonical, so write -> read -> write is byte-identical.
# ---------------------------------------------------------------------------


def _enc_frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def _dec_frac(s: str) -> Fraction:
    num, den = s.split("/")
    return Fraction(int(num), int(den))


def _stage_to_obj(rec: StageRecord) -> dict:
    b = rec.block
    return {
        "k": str(rec.k),
        "config": {
            "lam": _enc_frac(rec.config.lam),
            "B": rec.config.B,
            "T": str(rec.config.T),
            "provenance": rec.config.provenance,
        },
        "lengths": [str(x) for x in rec.lengths],
        "starts": [str(x) for x in rec.starts],
        "block": {
            "lam": _enc_frac(b.lam),
            "B": b.B,
            "L": str(b.L),
            "d": str(b.d),
            "D": str(b.D),
            "U": str(b.U),
            "b_floor": b.b_floor,
        },
        "bands": {
            "start": str(b.U + b.D),
            "step": str(b.D),
            "width": str(b.d),
            "count": str(b.L),
        },
        "E": str(rec.E),
        "N_star": str(rec.N_star),
        "endpoints": [str(x) for x in rec.endpoints],
        "p_counts": [str(x) for x in rec.p_counts],
    }


def _stage_from_obj(obj: dict) -> StageRecord:
    cfg = StageConfig(
        lam=_dec_frac(obj["config"]["lam"]),
        B=float(obj["config"]["B"]),
        T=int(obj["config"]["T"]),
        provenance=obj["config"]["provenance"],
    )
    blk = obj["block"]
    block = BlockParams(
        lam=_dec_frac(blk["lam"]), B=float(blk["B"]), L=int(blk["L"]),
        d=int(blk["d"]), D=int(blk["D"]), U=int(blk["U"]),
        b_floor=float(blk["b_floor"]),
    )
    return StageRecord(
        k=int(obj["k"]), config=cfg,
        lengths=[int(x) for x in obj["lengths"]],
        starts=[int(x) for x in obj["starts"]],
        block=block, E=int(obj["E"]), N_star=int(obj["N_star"]),
        endpoints=[int(x) for x in obj["endpoints"]],
        p_counts=[int(x) for x in obj["p_counts"]],
    )


def manifest_to_text(manifest: Manifest) -> str:
    obj = {
        "format": MANIFEST_FORMAT,
        "eta": _enc_frac(manifest.eta),
        "b_floor": manifest.b_floor,
        "regime": manifest.regime,
        "seed": str(manifest.seed),
        "mu": manifest.mu,
        "stages": [_stage_to_obj(rec) for rec in manifest.stages],
        "exponents": (None if manifest.exponents is None
                      else [str(m) for m in manifest.exponents]),
    }
    return json.dumps(obj, indent=1) + "\n"


def manifest_from_text(text: str) -> Manifest:
    obj = json.loads(text)
    if obj.get("format") != MANIFEST_FORMAT:
        raise ValueError(f"unrecognized manifest format {obj.get('format')!r}")
    stages = [_stage_from_obj(s) for s in obj["stages"]]
    exps = obj["exponents"]
    m = Manifest(
        stages=stages, eta=_dec_frac(obj["eta"]), b_floor=float(obj["b_floor"]),
        regime=obj["regime"], seed=int(obj["seed"]),
        exponents=None if exps is None else [int(x) for x in exps],
    )
    recorded_mu = float(obj["mu"])
    if not math.isclose(recorded_mu, m.mu, rel_tol=1e-12, abs_tol=1e-300):
        raise ValueError(f"manifest mu {recorded_mu} inconsistent with stages ({m.mu})")
    return m


def write_manifest(manifest: Manifest, path) -> None:
    with open(path, "w") as fh:
        fh.write(manifest_to_text(manifest))


def read_manifest(path) -> Manifest:
    with open(path) as fh:
        return manifest_from_text(fh.read())
