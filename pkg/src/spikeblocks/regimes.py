"""Parameter engines for the three construction regimes.

* endpoint: trials scale like 1/lam, so the number of selected exponents is
  exponential and the Fourier threshold double-exponential in 1/lam; the
  stage cost then matches the reciprocal of log log(threshold).  The cost
  search shrinks a candidate lam geometrically, rebuilding a candidate stage
  each round, until five feasibility conditions hold (or desk caps stop it,
  in which case every condition's status is reported).
* finite-Lp: the stage cost is a summable budget a_k deflated by B**(p-2),
  which keeps the p-th moment cost summable; the signal height B_k is then
  frozen as soon as it beats k times the logarithmic scale of the stage
  endpoint.
* bounded: the same stage-and-trial geometry with small dyadic hitting sets
  in place of spike blocks; everything about the set is exactly rational.

The admissible-modulus checker works purely on the u = log log N scale so
that no double exponential is ever materialized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from . import engine
from .bits import window_all_zero
from .logspace import Log2Value, ceil_log2, int_ln, int_log2
from .master import (CapExceeded, DeskCaps, Manifest, StageConfig,
                     StageRecord, StageState, build_stage, plan_lengths)
from .spikes import DEFAULT_B_FLOOR, FLOOR_COEFF, fit_moment_constant
from .trials import GOOD_PROB_COEFF

#: Hitting probability coefficient of the bounded construction: each trial
#: hits its small set with probability at least HIT_COEFF / A.
HIT_COEFF = Fraction(7, 32)

_moment_constants: dict[int, float] = {}


def moment_constant(r: int) -> float:
    """Fitted normalized-moment constant, cached across calls."""
    if r not in _moment_constants:
        _moment_constants[r] = 1.0 if r == 2 else fit_moment_constant(float(r))
    return _moment_constants[r]


# ---------------------------------------------------------------------------
# endpoint regime
# ---------------------------------------------------------------------------


def sqrtlog_schedule(offset: float) -> Callable[[int], float]:
    """Nondecreasing signal heights offset + sqrt(log(k+2)); the reciprocals
    of their squares diverge, which is what keeps infinitely many stages
    succeeding."""

    def schedule(k: int) -> float:
        return offset + math.sqrt(math.log(k + 2))

    return schedule


@dataclass(frozen=True)
class EndpointConfig:
    gamma: float = 1.0
    b_floor: float = DEFAULT_B_FLOOR
    b_schedule: Callable[[int], float] | None = None
    shrink: Fraction = Fraction(1, 2)
    max_rounds: int = 80
    caps: DeskCaps = field(default_factory=DeskCaps)

    def __post_init__(self):
        if self.gamma < 1:
            raise ValueError(f"gamma must be >= 1, got {self.gamma}")
        if not (0 < self.shrink < 1):
            raise ValueError(f"shrink factor must be in (0,1), got {self.shrink}")

    def B(self, k: int) -> float:
        sched = self.b_schedule or sqrtlog_schedule(self.b_floor)
        return sched(k)


@dataclass(frozen=True)
class ConditionStatus:
    name: str
    holds: bool
    detail: str


@dataclass(frozen=True)
class FeasibilityReport:
    """Outcome of the endpoint cost search for one stage."""

    k: int
    lam: Fraction
    T: int
    trials_capped: bool
    rounds: int
    conditions: tuple[ConditionStatus, ...]
    record: StageRecord

    @property
    def feasible(self) -> bool:
        return not self.trials_capped and all(c.holds for c in self.conditions)

    def condition(self, name: str) -> ConditionStatus:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)


@dataclass(frozen=True)
class EndpointHistory:
    """Per-stage quantities the feasibility conditions look back on."""

    lams: tuple[Fraction, ...] = ()
    thresholds: tuple[int, ...] = ()  # E_i with Q_i = 2**E_i

    def extended(self, lam: Fraction, E: int) -> "EndpointHistory":
        return EndpointHistory(self.lams + (lam,), self.thresholds + (E,))


def _fmt_big(n: int) -> str:
    """Readable magnitude for integers too large to print in decimal."""
    if abs(n) < 10 ** 18:
        return str(n)
    exp10 = int_log2(abs(n)) * math.log10(2.0)
    sign = "-" if n < 0 else ""
    return f"{sign}~10^{exp10:.4g}"


def _dyadic_floor(x: Fraction) -> Fraction:
    """Largest power of two <= x."""
    if x <= 0:
        raise ValueError("needs a positive value")
    e = 0
    while Fraction(2) ** (e + 1) <= x:
        e += 1
    while Fraction(2) ** e > x:
        e -= 1
    return Fraction(2) ** e


def _separation_sides(lam: Fraction, E: int, k: int,
                      history: EndpointHistory) -> tuple[Log2Value, Log2Value]:
    """Both sides of lam * Q >= 2**k * (1 + sum of earlier lam_i * Q_i)."""
    lhs = Log2Value.from_fraction(lam) * Log2Value.from_log2(E)
    rhs = Log2Value.from_log2(0)  # the 1
    for li, Ei in zip(history.lams, history.thresholds):
        rhs = rhs + Log2Value.from_fraction(li) * Log2Value.from_log2(Ei)
    rhs = rhs * Log2Value.from_log2(k)
    return lhs, rhs


def endpoint_choose_lambda(state: StageState, k: int, cfg: EndpointConfig,
                           history: EndpointHistory,
                           strict: bool = False) -> FeasibilityReport:
    """Shrink the stage cost until all endpoint conditions hold.

    The closed-form ceilings (cost cap, geometric cost decay, moment budget)
    fix the starting candidate; each round then builds a trial stage and
    checks the two conditions that depend on it (trial floor and threshold
    separation).  Under desk caps the search may stop early: the report then
    carries every condition's status, and ``strict=True`` turns that partial
    result into a loud cap error instead.
    """
    B = cfg.B(k)
    ceilings = [Fraction(1), Fraction(1, 2 ** k)]
    if history.lams:
        ceilings.append(history.lams[-1] / 2 ** (k + 2))
    for r in range(3, k + 1):
        c_r = moment_constant(r)
        ceilings.append(Fraction(1, 2 ** k) / Fraction(c_r * B ** (r - 2)))
    lam = _dyadic_floor(min(ceilings))

    rounds = 0
    while True:
        rounds += 1
        T_wanted = math.ceil(Fraction(cfg.gamma) / lam)
        trials_capped = T_wanted > cfg.caps.max_trials
        T = min(T_wanted, cfg.caps.max_trials)
        stage_cfg = StageConfig(lam=lam, B=B, T=T,
                                provenance="endpoint" if not trials_capped
                                else "endpoint-surrogate")
        record, _ = build_stage(state, stage_cfg, b_floor=cfg.b_floor, caps=None)

        past_size = 2 + state.P + state.V_max
        if past_size < 10 ** 15:
            floor_rhs = math.log(past_size + B)
        else:
            # B is a float of moderate size; against a huge past it shifts
            # the log by far less than float precision
            floor_rhs = int_ln(past_size)
        sep_lhs, sep_rhs = _separation_sides(lam, record.E, k, history)

        conds = (
            ConditionStatus("cost_cap", lam <= Fraction(1, 2 ** k),
                            f"lam={lam} vs 2^-{k}"),
            ConditionStatus("cost_decay",
                            (not history.lams) or lam <= history.lams[-1] / 2 ** (k + 2),
                            f"lam={lam} vs prev/2^{k + 2}"),
            ConditionStatus("moment_budget",
                            all(moment_constant(r) * float(lam) * B ** (r - 2) <= 2.0 ** -k
                                for r in range(2, k + 1)),
                            f"orders 2..{k} at B={B:.4g}"),
            ConditionStatus("trial_floor", T_wanted >= floor_rhs,
                            f"T={T_wanted} vs log(2+P+V+B)={floor_rhs:.4g}"),
            ConditionStatus("threshold_separation", sep_rhs <= sep_lhs,
                            f"log2 lhs ~ {_fmt_big(sep_lhs.ip)} vs rhs ~ {_fmt_big(sep_rhs.ip)}"),
        )
        report = FeasibilityReport(k=k, lam=lam, T=T, trials_capped=trials_capped,
                                   rounds=rounds, conditions=conds, record=record)
        if report.feasible:
            return report
        if trials_capped or rounds >= cfg.max_rounds:
            if strict:
                raise CapExceeded(
                    f"endpoint search for stage {k} stopped at lam={lam}", report)
            return report
        lam = lam * cfg.shrink


def endpoint_scale_check(record: StageRecord, lam: Fraction) -> float:
    """The scale product lam * log(E log 2) for one endpoint stage.

    Across a family of stages built with T = ceil(gamma/lam) this stays in a
    narrow band; callers record the band and its width factor.
    """
    return float(lam) * (int_ln(record.E) + math.log(math.log(2.0)))


def endpoint_scale_band(gamma: float, lams, b_floor: float = DEFAULT_B_FLOOR,
                        B: float | None = None) -> dict:
    """Scale products over a lam grid, each from a fresh empty state."""
    B = B if B is not None else b_floor
    ratios = {}
    for lam in lams:
        lam = Fraction(lam)
        T = math.ceil(gamma / float(lam))
        cfg = StageConfig(lam=lam, B=B, T=T, provenance="scale-band")
        record, _ = build_stage(StageState(), cfg, b_floor=b_floor)
        assert record.E >= record.block.L
        ratios[lam] = endpoint_scale_check(record, lam)
    lo, hi = min(ratios.values()), max(ratios.values())
    return {"ratios": ratios, "low": lo, "high": hi, "width_factor": hi / lo}


def build_endpoint_manifest(cfg: EndpointConfig, K: int, seed: int = 0,
                            materialize: bool = True) -> tuple[Manifest, list[FeasibilityReport]]:
    """Run the cost search stage by stage and assemble the manifest."""
    from dataclasses import replace

    if K > cfg.caps.max_stages:
        raise CapExceeded(f"{K} stages exceed cap {cfg.caps.max_stages}")
    state = StageState()
    history = EndpointHistory()
    reports, stages = [], []
    for k in range(1, K + 1):
        rep = endpoint_choose_lambda(state, k, cfg, history)
        reports.append(rep)
        record, state = build_stage(state, rep.record.config, b_floor=cfg.b_floor)
        stages.append(replace(record, k=k))
        history = history.extended(rep.lam, record.E)
    manifest = Manifest(stages=stages, b_floor=cfg.b_floor, regime="endpoint", seed=seed)
    if materialize:
        if manifest.total_exponents > cfg.caps.max_exponents:
            raise CapExceeded(
                f"{manifest.total_exponents} exponents exceed cap {cfg.caps.max_exponents}")
        from .master import enumerate_exponents

        manifest.exponents = enumerate_exponents(manifest)
    return manifest, reports


# ---------------------------------------------------------------------------
# finite-Lp regime
# ---------------------------------------------------------------------------


def geometric_schedule(ratio: Fraction, scale: Fraction) -> Callable[[int], Fraction]:
    """Budgets scale * ratio**k with the exact geometric tail available."""

    def schedule(k: int) -> Fraction:
        return Fraction(scale) * Fraction(ratio) ** k

    return schedule


@dataclass(frozen=True)
class LpConfig:
    p: float
    gamma: float | None = None  # defaults to the paper-faithful 8 / GOOD_PROB_COEFF
    b_floor: float = DEFAULT_B_FLOOR
    a_ratio: Fraction = Fraction(1, 2)
    a_scale: Fraction = Fraction(1, 4)
    caps: DeskCaps = field(default_factory=DeskCaps)
    b_step: Fraction = Fraction(1, 16)

    def __post_init__(self):
        if self.p < 2:
            raise ValueError(f"p must be >= 2, got {self.p}")
        g = self.gamma_value
        if g * GOOD_PROB_COEFF < 8 - 1e-12:
            raise ValueError(f"gamma {g} below the failure-summability floor")

    @property
    def gamma_value(self) -> float:
        return self.gamma if self.gamma is not None else 8.0 / GOOD_PROB_COEFF

    def a(self, k: int) -> Fraction:
        return geometric_schedule(self.a_ratio, self.a_scale)(k)

    def future_budget(self, k: int) -> Fraction:
        # sum_{i > k} a_i for the geometric schedule
        return self.a(k) * self.a_ratio / (1 - self.a_ratio)

    def eps(self, k: int) -> float:
        return 1.0 / (2.0 * self.p * (k + 2))


def lp_lambda(cfg: LpConfig, k: int, B: Fraction) -> Fraction:
    """The exact stage cost a_k * B**-(p-2) (rational when p is integral)."""
    p = cfg.p
    if float(p).is_integer():
        return cfg.a(k) * Fraction(B) ** (-(int(p) - 2))
    return cfg.a(k) * Fraction.from_float(float(B) ** (-(p - 2.0)))


@dataclass(frozen=True)
class LpStageResult:
    k: int
    B: Fraction
    lam: Fraction
    T: int
    T_wanted: int
    trials_capped: bool
    mu_bar: float
    log_N_star: float
    ratio: float
    record: StageRecord

    @property
    def config(self) -> StageConfig:
        return self.record.config


def lp_stage_params(state: StageState, k: int, cfg: LpConfig,
                    history: list[LpStageResult]) -> LpStageResult:
    """Freeze the stage's signal height and derive its cost and trial count.

    The deterministic shielding budget combines the exact past sum, the
    current term a_k / B**(p-1), and the worst-case future tail at the
    height floor.  The height is raised until the signal clears k times the
    logarithmic endpoint scale, then frozen.
    """
    p = cfg.p
    past = math.fsum(float(r.lam) / float(r.B) for r in history)
    future = FLOOR_COEFF * float(cfg.future_budget(k)) / cfg.b_floor ** (p - 1.0)
    a_k = cfg.a(k)

    def mu_bar(B: Fraction) -> float:
        return (FLOOR_COEFF * past + FLOOR_COEFF * float(a_k) / float(B) ** (p - 1.0)
                + future)

    def stage_for(B: Fraction) -> tuple[int, int, bool, StageRecord]:
        lam = lp_lambda(cfg, k, B)
        T_wanted = math.ceil(cfg.gamma_value * float(B) ** 2 / float(lam)
                             * math.log(k + 1.0))
        trials_capped = T_wanted > cfg.caps.max_trials
        T = min(T_wanted, cfg.caps.max_trials)
        scfg = StageConfig(lam=lam, B=float(B), T=T,
                           provenance="lp" if not trials_capped else "lp-surrogate")
        record, _ = build_stage(state, scfg, b_floor=cfg.b_floor)
        return T, T_wanted, trials_capped, record

    def ratio_for(B: Fraction, record: StageRecord) -> float:
        log_n = int_ln(record.N_star)
        return (float(B) - mu_bar(B)) / log_n ** (1.0 / p - cfg.eps(k))

    B = Fraction(cfg.b_floor)
    T, T_wanted, capped, record = stage_for(B)
    guard = 0
    while ratio_for(B, record) < k:
        B *= 2
        T, T_wanted, capped, record = stage_for(B)
        guard += 1
        if guard > 200:
            raise CapExceeded(f"height search for stage {k} did not terminate")
    lo, hi = B / 2, B
    if lo >= Fraction(cfg.b_floor):
        while hi - lo > cfg.b_step:
            mid = (lo + hi) / 2
            _, _, _, rec_mid = stage_for(mid)
            if ratio_for(mid, rec_mid) >= k:
                hi = mid
            else:
                lo = mid
        B = hi
        T, T_wanted, capped, record = stage_for(B)
    lam = lp_lambda(cfg, k, B)
    return LpStageResult(k=k, B=B, lam=lam, T=T, T_wanted=T_wanted,
                         trials_capped=capped, mu_bar=mu_bar(B),
                         log_N_star=int_ln(record.N_star),
                         ratio=ratio_for(B, record), record=record)


def lp_failure_exponent(result: LpStageResult) -> float:
    """GOOD_PROB_COEFF * T * lam / B^2 with the uncapped trial count.

    At the paper-faithful trial count this is at least 8 log(k+1), making
    the stage failure probability at most (k+1)**-8.
    """
    return (GOOD_PROB_COEFF * result.T_wanted * float(result.lam)
            / float(result.B) ** 2)


def build_lp_manifest(cfg: LpConfig, K: int, seed: int = 0,
                      materialize: bool = True) -> tuple[Manifest, list[LpStageResult]]:
    from dataclasses import replace

    from .master import enumerate_exponents

    if K > cfg.caps.max_stages:
        raise CapExceeded(f"{K} stages exceed cap {cfg.caps.max_stages}")
    state = StageState()
    results, stages = [], []
    for k in range(1, K + 1):
        res = lp_stage_params(state, k, cfg, results)
        results.append(res)
        record, state = build_stage(state, res.config, b_floor=cfg.b_floor)
        stages.append(replace(record, k=k))
    manifest = Manifest(stages=stages, b_floor=cfg.b_floor, regime=f"lp(p={cfg.p})",
                        seed=seed)
    if materialize:
        if manifest.total_exponents > cfg.caps.max_exponents:
            raise CapExceeded(
                f"{manifest.total_exponents} exponents exceed cap {cfg.caps.max_exponents}")
        manifest.exponents = enumerate_exponents(manifest)
    return manifest, results


# ---------------------------------------------------------------------------
# bounded hitting-set regime
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundedConfig:
    epsilon: Fraction = Fraction(1, 2)
    C: float = float(8 / HIT_COEFF)
    A_ratio: int = 2
    A_scale: int = 4
    caps: DeskCaps = field(default_factory=DeskCaps)

    def __post_init__(self):
        if not (0 < self.epsilon < 1):
            raise ValueError(f"epsilon must be in (0,1), got {self.epsilon}")
        if self.C < float(8 / HIT_COEFF) - 1e-12:
            raise ValueError(f"C={self.C} below 8/{HIT_COEFF}")

    def A(self, k: int) -> int:
        a = self.A_scale * self.A_ratio ** k
        if a < 4:
            raise ValueError(f"hitting-set parameter A_{k}={a} must be >= 4")
        return a

    def theta(self, k: int) -> Fraction:
        return Fraction(1, k + 1)


@dataclass(frozen=True)
class HitStage:
    k: int
    A: int
    theta: Fraction
    T: int
    T_wanted: int
    lengths: list[int]
    starts: list[int]
    L: int
    d: int
    D: int
    endpoints: list[int]
    p_counts: list[int]

    @property
    def measure_bound(self) -> Fraction:
        """Exact dyadic bound L * 2**-d on the stage set's measure."""
        return Fraction(self.L, 2 ** self.d)

    def trial_family(self, t: int) -> engine.WindowFamily:
        """Digit windows of the hit event of trial t (central indices only)."""
        M, ell = self.starts[t - 1], self.lengths[t - 1]
        return engine.WindowFamily(base=M + (ell + 1) * self.D, step=self.D,
                                   count=self.L - ell + 1, width=self.d)

    def member_family(self, shift: int) -> engine.WindowFamily:
        return engine.WindowFamily(base=shift + self.D, step=self.D,
                                   count=self.L, width=self.d)

    def exponents(self, t: int) -> list[int]:
        M, ell = self.starts[t - 1], self.lengths[t - 1]
        return [M + r * self.D for r in range(1, ell + 1)]


@dataclass(frozen=True)
class HitSetManifest:
    epsilon: Fraction
    C: float
    stages: tuple[HitStage, ...]
    seed: int = 0

    @property
    def measure_bound(self) -> Fraction:
        return sum((s.measure_bound for s in self.stages), Fraction(0))

    @property
    def total_exponents(self) -> int:
        return self.stages[-1].endpoints[-1]

    def all_exponents(self) -> list[int]:
        out = []
        for s in self.stages:
            for t in range(1, s.T + 1):
                out.extend(s.exponents(t))
        if any(b <= a for a, b in zip(out, out[1:])):
            raise AssertionError("hit-set exponents are not strictly increasing")
        return out

    def endpoint(self, k: int, t: int) -> int:
        return self.stages[k - 1].endpoints[t - 1]


def bounded_build(cfg: BoundedConfig, K: int, seed: int = 0) -> HitSetManifest:
    """Build the staged hitting sets with exact rational measure accounting."""
    if K > cfg.caps.max_stages:
        raise CapExceeded(f"{K} stages exceed cap {cfg.caps.max_stages}")
    P = 0
    m_last = 0
    stages = []
    for k in range(1, K + 1):
        A = cfg.A(k)
        theta = cfg.theta(k)
        T_wanted = math.ceil(cfg.C * A * math.log(k + 1.0))
        trials_capped = T_wanted > cfg.caps.max_trials
        T = min(T_wanted, cfg.caps.max_trials)
        lengths, P_seq = plan_lengths(P, T, eta=theta)
        L = 8 * max(lengths)
        cfg.caps.require_layers(L)
        d = ceil_log2(A * L)
        assert A * L <= 2 ** d < 2 * A * L
        D = d + 2
        starts = [m_last + D + 1]
        for t in range(1, T):
            starts.append(starts[-1] + (L + 2) * D + d + 2)
        endpoints = [P_seq[t] + lengths[t] for t in range(T)]
        stages.append(HitStage(k=k, A=A, theta=theta, T=T, T_wanted=T_wanted,
                               lengths=lengths, starts=starts, L=L, d=d, D=D,
                               endpoints=endpoints, p_counts=P_seq[:-1]))
        P = P_seq[-1]
        m_last = starts[-1] + lengths[-1] * D
    hm = HitSetManifest(epsilon=cfg.epsilon, C=cfg.C, stages=tuple(stages), seed=seed)
    for s in stages:
        if s.measure_bound > Fraction(1, s.A):
            raise AssertionError(f"stage {s.k} measure bound above 1/A")
    if hm.measure_bound >= cfg.epsilon:
        raise AssertionError(
            f"total measure bound {hm.measure_bound} not below epsilon {cfg.epsilon}")
    return hm


def hit_event(hm: HitSetManifest, tape, k: int, t: int) -> bool:
    """Exact bit test for the hit event of trial (k, t)."""
    fam = hm.stages[k - 1].trial_family(t)
    if fam.count <= engine.DIRECT_FAMILY_LIMIT:
        return any(window_all_zero(tape, fam.base + i * fam.step + 1, fam.width)
                   for i in range(fam.count))
    runs = tape.zero_runs(fam.bit_lo, fam.bit_hi, fam.width)
    return engine.count_in_runs(runs, fam) > 0


def bounded_membership(hm: HitSetManifest, tape, shift: int) -> bool:
    """Exact bit test: does the dilated point 2**shift x land in the set."""
    if shift < 0:
        raise ValueError(f"shift must be >= 0, got {shift}")
    for s in hm.stages:
        fam = s.member_family(shift)
        if fam.count <= engine.DIRECT_FAMILY_LIMIT:
            if any(window_all_zero(tape, fam.base + i * fam.step + 1, fam.width)
                   for i in range(fam.count)):
                return True
        else:
            runs = tape.zero_runs(fam.bit_lo, fam.bit_hi, fam.width)
            if engine.count_in_runs(runs, fam) > 0:
                return True
    return False


def bounded_membership_many(hm: HitSetManifest, tape, shifts: list[int]) -> list[bool]:
    """Membership of many dilated points in one pass per stage.

    For each stage, one zero-run scan covers every shift; a point is a
    member when some window q*D + shift falls inside a zero run.
    """
    member = [False] * len(shifts)
    for s in hm.stages:
        lo = min(shifts) + s.D
        hi = max(shifts) + s.L * s.D + s.d
        runs = tape.zero_runs(lo, hi, s.d)
        for (a, b) in runs:
            for i, m in enumerate(shifts):
                if member[i]:
                    continue
                q_lo = max(1, -((m - a) // s.D))
                q_hi = min(s.L, (b - s.d - m) // s.D)
                if q_hi >= q_lo:
                    member[i] = True
    return member


# ---------------------------------------------------------------------------
# admissible moduli
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AdmissibilityReport:
    """Grid evaluation of the admissibility quantity sqrt(A) * omega at the
    double-exponential scale exp(exp(2 A log A)), all in log-log coordinates."""

    A_grid: tuple[float, ...]
    quantity: tuple[float, ...]
    admissible: bool
    growth_ratio: float
    tail_monotone: bool
    domination_constant: float


def admissible_check(omega_u: Callable[[float], float], A_max: float = 1e8,
                     n_grid: int = 49, growth_threshold: float = 1.5) -> AdmissibilityReport:
    """Classify a decreasing modulus given on the u = log log N scale.

    ``omega_u(u)`` must equal the modulus at N = exp(exp(u)); the checker
    evaluates sqrt(A) * omega_u(2 A log A) on a geometric grid of A and
    calls the modulus admissible when the quantity keeps growing through the
    top of the grid.  Also records the largest u**-1/2 / omega_u(u) over the
    tail, the constant by which the modulus dominates the endpoint decay.
    """
    if A_max < 16:
        raise ValueError(f"A_max too small: {A_max}")
    grid = [2.0 * (A_max / 2.0) ** (i / (n_grid - 1)) for i in range(n_grid)]
    u_vals = [2.0 * A * math.log(A) for A in grid]
    w_vals = [omega_u(u) for u in u_vals]
    if any(w <= 0 for w in w_vals):
        raise ValueError("modulus must be positive")
    for w1, w2 in zip(w_vals, w_vals[1:]):
        if w2 > w1 * (1 + 1e-12):
            raise ValueError("modulus must be decreasing on the sampled grid")
    q = [math.sqrt(A) * w for A, w in zip(grid, w_vals)]
    tail_start = n_grid // 2
    tail = q[tail_start:]
    tail_monotone = all(b >= a * (1 - 1e-9) for a, b in zip(tail, tail[1:]))
    growth_ratio = q[-1] / q[tail_start]
    admissible = tail_monotone and growth_ratio >= growth_threshold
    domination = max(u ** -0.5 / w for u, w in zip(u_vals[tail_start:], w_vals[tail_start:]))
    return AdmissibilityReport(
        A_grid=tuple(grid), quantity=tuple(q), admissible=admissible,
        growth_ratio=growth_ratio, tail_monotone=tail_monotone,
        domination_constant=domination,
    )


def modulus_logloglog(power: float) -> Callable[[float], float]:
    """(log log log N)**-power on the u scale: (log u)**-power."""

    def omega_u(u: float) -> float:
        return math.log(u) ** -power

    return omega_u


def modulus_loglog(power: float) -> Callable[[float], float]:
    """(log log N)**-power on the u scale: u**-power."""

    def omega_u(u: float) -> float:
        return u ** -power

    return omega_u


# ---------------------------------------------------------------------------
# hit-set manifest serialization (canonical JSON, integers as decimal strings)
# ---------------------------------------------------------------------------

HITSET_FORMAT = "spikeblocks-hitset-v1"


def hitset_to_text(hm: HitSetManifest) -> str:
    import json

    obj = {
        "format": HITSET_FORMAT,
        "epsilon": f"{hm.epsilon.numerator}/{hm.epsilon.denominator}",
        "C": hm.C,
        "seed": str(hm.seed),
        "stages": [
            {
                "k": str(s.k),
                "A": str(s.A),
                "theta": f"{s.theta.numerator}/{s.theta.denominator}",
                "T": str(s.T),
                "T_wanted": str(s.T_wanted),
                "lengths": [str(x) for x in s.lengths],
                "starts": [str(x) for x in s.starts],
                "L": str(s.L),
                "d": str(s.d),
                "D": str(s.D),
                "endpoints": [str(x) for x in s.endpoints],
                "p_counts": [str(x) for x in s.p_counts],
            }
            for s in hm.stages
        ],
    }
    return json.dumps(obj, indent=1) + "\n"


def hitset_from_text(text: str) -> HitSetManifest:
    import json

    obj = json.loads(text)
    if obj.get("format") != HITSET_FORMAT:
        raise ValueError(f"unrecognized hit-set format {obj.get('format')!r}")

    def frac(s):
        num, den = s.split("/")
        return Fraction(int(num), int(den))

    stages = tuple(
        HitStage(
            k=int(s["k"]), A=int(s["A"]), theta=frac(s["theta"]),
            T=int(s["T"]), T_wanted=int(s["T_wanted"]),
            lengths=[int(x) for x in s["lengths"]],
            starts=[int(x) for x in s["starts"]],
            L=int(s["L"]), d=int(s["d"]), D=int(s["D"]),
            endpoints=[int(x) for x in s["endpoints"]],
            p_counts=[int(x) for x in s["p_counts"]],
        )
        for s in obj["stages"]
    )
    return HitSetManifest(epsilon=frac(obj["epsilon"]), C=float(obj["C"]),
                          stages=stages, seed=int(obj["seed"]))
