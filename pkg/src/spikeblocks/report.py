"""Verification report rows, rendering, and CSV round-tripping."""

from __future__ import annotations

from dataclasses import dataclass

#: Check families appearing in the report footer; every claim id starts with
#: one of these prefixes.
CHECK_FAMILIES = {
    "bits": "digit tape determinism, uniformity, and window independence",
    "spike": "two-point spike law, identities, and Fourier support",
    "block": "block law, variance, floor, and moment constants",
    "trial": "convolution identity, good-event probability, amplification",
    "recursion": "length and start recursions, endpoint ratios",
    "bands": "valuation-band disjointness and exponent lacunarity",
    "floor": "pointwise shielding floor of the built function",
    "signal": "master lower bound at successful trial endpoints",
    "stagefail": "stage failure probability bound",
    "indep": "factorization of good events across trials and stages",
    "tail": "spike, block, and manifest Fourier tails",
    "endpoint": "endpoint cost search and scale band",
    "lp": "finite-Lp budget identities, frozen heights, growth ratios",
    "hitset": "bounded hitting sets: measure, membership, endpoint averages",
    "modulus": "admissible-modulus classification",
    "plumbing": "harness self-checks",
}


@dataclass(frozen=True)
class ReportRow:
    """One verification result.

    ``kind`` is "exact", "mc", or "structural"; an mc verdict is a pass when
    the observation sits within the bound widened by the confidence
    halfwidth, the others require outright satisfaction.
    """

    claim: str
    kind: str
    observed: str
    bound: str
    ci_halfwidth: float | None
    passed: bool
    params: str = ""

    def __post_init__(self):
        family = self.claim.split("-", 1)[0]
        if family not in CHECK_FAMILIES:
            raise ValueError(f"claim {self.claim!r} has unknown family {family!r}")
        if self.kind not in ("exact", "mc", "structural"):
            raise ValueError(f"unknown row kind {self.kind!r}")

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "FAIL"


def exact_row(claim: str, observed, bound, passed: bool, params: str = "") -> ReportRow:
    return ReportRow(claim=claim, kind="exact", observed=repr(observed),
                     bound=repr(bound), ci_halfwidth=None, passed=passed, params=params)


def structural_row(claim: str, passed: bool, detail: str = "", params: str = "") -> ReportRow:
    return ReportRow(claim=claim, kind="structural", observed=detail or "holds",
                     bound="required", ci_halfwidth=None, passed=passed, params=params)


def mc_row(claim: str, estimate: float, bound: float, half: float, passed: bool,
           params: str = "") -> ReportRow:
    return ReportRow(claim=claim, kind="mc", observed=repr(estimate),
                     bound=repr(bound), ci_halfwidth=half, passed=passed, params=params)


def rows_to_csv(rows: list[ReportRow]) -> str:
    lines = ["# spikeblocks-report-v1",
             "claim,kind,observed,bound,ci_halfwidth,verdict,params"]
    for r in rows:
        ci = "" if r.ci_halfwidth is None else repr(r.ci_halfwidth)
        lines.append(f"{r.claim},{r.kind},{_csv_cell(r.observed)},{_csv_cell(r.bound)},"
                     f"{ci},{r.verdict},{_csv_cell(r.params)}")
    return "\n".join(lines) + "\n"


def _csv_cell(text: str) -> str:
    if any(ch in text for ch in ",\"\n"):
        return '"' + text.replace('"', '""') + '"'
    return text


def all_pass(rows: list[ReportRow]) -> bool:
    return all(r.passed for r in rows)


def render_report(rows: list[ReportRow]) -> str:
    """Human-readable summary with per-family coverage footer."""
    lines = ["verification report", "=" * 64]
    width = max((len(r.claim) for r in rows), default=10)
    for r in rows:
        ci = f" +-{r.ci_halfwidth:.3g}" if r.ci_halfwidth is not None else ""
        lines.append(f"[{r.verdict:>4}] {r.claim:<{width}} {r.kind:<10} "
                     f"observed={r.observed}{ci} bound={r.bound}")
        if r.params:
            lines.append(f"       {'':<{width}} {r.params}")
    lines.append("=" * 64)
    n_fail = sum(1 for r in rows if not r.passed)
    lines.append(f"{len(rows)} checks, {n_fail} failures")
    lines.append("")
    lines.append("coverage by check family:")
    seen: dict[str, int] = {}
    for r in rows:
        seen[r.claim.split('-', 1)[0]] = seen.get(r.claim.split('-', 1)[0], 0) + 1
    for family, desc in CHECK_FAMILIES.items():
        if family in seen:
            lines.append(f"  {family:<10} {seen[family]:>3} checks: {desc}")
    return "\n".join(lines) + "\n"
