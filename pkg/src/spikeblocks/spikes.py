"""Dyadic spikes and spike blocks: exact laws, floors, and moments.

The depth-d spike is the renormalized indicator of [0, 2**-d): it takes the
value h = sqrt(2**d - 1) when the d digits of the window are all zero
(probability 2**-d) and -g = -1/sqrt(2**d - 1) otherwise, so it has mean
zero and unit L2 norm.  A block stacks L independent dilated spikes with
disjoint digit windows and scales them to squared L2 norm lam.  Because the
layers are i.i.d. two-point variables, the block value is an affine function
of the binomial count of spiking layers, and all moments are computable from
that law directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from . import engine
from .bits import window_all_zero

#: Default minimum signal height; desk-scale runs may relax it, and reports
#: record the value actually used.
DEFAULT_B_FLOOR = 100.0

#: Coefficient of the deterministic block floor: every block satisfies
#: block >= -FLOOR_COEFF * lam / B.  Derived from g_d <= sqrt(2) * 2**(-d/2)
#: combined with 2**(-d/2) <= (1/8) * sqrt(lam / (B*B*L)) under the depth
#: window constraint.
FLOOR_COEFF = math.sqrt(2.0) / 8.0

_MAX_EVAL_DEPTH = 1000


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    return Fraction(x)


@dataclass(frozen=True)
class SpikeParams:
    """Depth and the two values of a dyadic spike."""

    d: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"spike depth must be >= 1, got {self.d}")
        if self.d > _MAX_EVAL_DEPTH:
            raise ValueError(f"spike depth {self.d} too large to evaluate")

    @property
    def h(self) -> float:
        return math.sqrt(2.0 ** self.d - 1.0)

    @property
    def g(self) -> float:
        return 1.0 / math.sqrt(2.0 ** self.d - 1.0)


def spike_eval(sp: SpikeParams, tape, v: int) -> float:
    """Value of the depth-d spike composed with x -> 2**v x at the tape point.

    Depends only on the digit window v+1, ..., v+d: the value is h when the
    window is all zero and -g otherwise.
    """
    if v < 0:
        raise ValueError(f"dilation exponent must be >= 0, got {v}")
    return sp.h if window_all_zero(tape, v + 1, sp.d) else -sp.g


def choose_depth(lam, B: float, L: int) -> int:
    """The unique d with 64*B*B*L/lam <= 2**d < 128*B*B*L/lam.

    The window has length one in log2, so d exists and is unique; the
    comparison is exact rational arithmetic on the given values.
    """
    lam = _as_fraction(lam)
    if not (0 < lam <= 1):
        raise ValueError(f"lam must be in (0, 1], got {lam}")
    if B < 1 or L < 1:
        raise ValueError(f"need B >= 1 and L >= 1, got B={B}, L={L}")
    thresh = 64 * _as_fraction(B) ** 2 * L / lam
    num, den = thresh.numerator, thresh.denominator
    d = max(num.bit_length() - den.bit_length(), 1)
    while (den << d) < num:
        d += 1
    while d > 1 and (den << (d - 1)) >= num:
        d -= 1
    assert num <= (den << d) < 2 * num
    return d


@dataclass(frozen=True)
class BlockParams:
    """Parameters of one spike block.

    ``lam`` is the squared L2 cost, ``B`` the target signal height, ``L`` the
    number of layers, ``d`` the spike depth, ``D >= d+2`` the exponent
    spacing between layers, and ``U >= 0`` the base dilation shift.  The
    depth is tied to the other parameters by the window
    64*B*B*L/lam <= 2**d < 128*B*B*L/lam; fixtures for Fourier scans may opt
    out of that check (they never use B).
    """

    lam: Fraction
    B: float
    L: int
    d: int
    D: int
    U: int
    b_floor: float = DEFAULT_B_FLOOR
    check_depth: bool = True

    def __post_init__(self):
        object.__setattr__(self, "lam", _as_fraction(self.lam))
        if not (0 < self.lam <= 1):
            raise ValueError(f"lam must be in (0, 1], got {self.lam}")
        if self.L < 1 or self.d < 1 or self.U < 0:
            raise ValueError(f"bad block parameters {self}")
        if self.D < self.d + 2:
            raise ValueError(f"spacing D={self.D} must be >= d+2={self.d + 2}")
        if self.check_depth:
            if self.B < self.b_floor:
                raise ValueError(f"B={self.B} below configured floor {self.b_floor}")
            if choose_depth(self.lam, self.B, self.L) != self.d:
                raise ValueError(f"depth {self.d} outside its window for {self}")

    @property
    def lam_float(self) -> float:
        return float(self.lam)

    @property
    def spike(self) -> SpikeParams:
        return SpikeParams(self.d)

    @property
    def scale(self) -> float:
        """The layer normalization sqrt(lam / L)."""
        return math.sqrt(self.lam_float / self.L)

    def value_map(self, K: int) -> float:
        """Block value when exactly K layers spike: sqrt(lam/L)*((h+g)K - Lg)."""
        sp = self.spike
        return self.scale * ((sp.h + sp.g) * K - self.L * sp.g)

    def layer_family(self, shift: int) -> engine.WindowFamily:
        """Digit windows of the L layers at a dilation shift (0-based bits)."""
        if self.U + shift + self.D < 0:
            raise ValueError(f"negative dilation exponent: U+shift+D = {self.U + shift + self.D}")
        return engine.WindowFamily(base=self.U + shift + self.D, step=self.D,
                                   count=self.L, width=self.d)

    def law(self) -> "BlockLaw":
        return BlockLaw(self)


def block_count(bp: BlockParams, tape, shift: int) -> int:
    """Number of spiking layers of the block at a dilation shift."""
    fam = bp.layer_family(shift)
    if fam.count <= engine.DIRECT_FAMILY_LIMIT:
        return sum(
            1 for q in range(fam.count)
            if window_all_zero(tape, fam.base + q * fam.step + 1, fam.width)
        )
    runs = tape.zero_runs(fam.bit_lo, fam.bit_hi, fam.width)
    return engine.count_in_runs(runs, fam)


def block_eval(bp: BlockParams, tape, shift: int) -> float:
    """Block value at the tape point dilated by 2**shift."""
    return bp.value_map(block_count(bp, tape, shift))


def block_floor(bp: BlockParams) -> float:
    """Exact pointwise minimum -sqrt(lam*L)*g of the block.

    Also checks the deterministic shielding bound: the floor is no lower
    than -FLOOR_COEFF * lam / B (only meaningful when the depth window is
    enforced).
    """
    floor = bp.value_map(0)
    if bp.check_depth:
        bound = -FLOOR_COEFF * bp.lam_float / bp.B
        if floor < bound * (1.0 + 1e-12):
            raise AssertionError(f"block floor {floor} below shielding bound {bound}")
    return floor


@dataclass(frozen=True)
class BlockLaw:
    """Exact law of the block value: K ~ Binomial(L, 2**-d) mapped affinely."""

    bp: BlockParams

    def pmf(self, j: int) -> Fraction:
        """P(K = j) as an exact rational."""
        L, d = self.bp.L, self.bp.d
        if not (0 <= j <= L):
            return Fraction(0)
        p = Fraction(1, 2 ** d)
        return math.comb(L, j) * p ** j * (1 - p) ** (L - j)

    def total_mass(self) -> Fraction:
        """Exact sum of all probabilities (equals 1 by construction)."""
        if self.bp.L > 1 << 14:
            raise ValueError(f"exact mass enumeration too large for L={self.bp.L}")
        return sum(self.pmf(j) for j in range(self.bp.L + 1))

    def value(self, j: int) -> float:
        return self.bp.value_map(j)

    def moment(self, p: float) -> float:
        """E |block|**p from the binomial law, with tail truncation.

        The pmf recurrence pmf(j+1) = pmf(j) * (L-j)/(j+1) * q/(1-q) is
        evaluated in floating point; summation stops once the remaining tail
        is provably negligible relative to the accumulated value.
        """
        if p < 0:
            raise ValueError(f"moment order must be >= 0, got {p}")
        L, d = self.bp.L, self.bp.d
        q = 2.0 ** (-d)
        ratio = q / (1.0 - q)
        pmf = math.exp(L * math.log1p(-q))
        acc = 0.0
        comp = 0.0
        mean = L * q
        j = 0
        while j <= L:
            term = pmf * abs(self.value(j)) ** p
            y = term - comp
            t = acc + y
            comp = (t - acc) - y
            acc = t
            if j > mean + 10 and term < 1e-24 * max(acc, 1e-300):
                break
            pmf *= (L - j) / (j + 1.0) * ratio
            j += 1
        return acc


def block_moments(bp: BlockParams, p: float) -> float:
    """The p-th power of the block's Lp norm, from the exact binomial law."""
    if p < 2:
        raise ValueError(f"moment order must be >= 2, got {p}")
    if bp.L > 10 ** 6:
        raise ValueError(f"binomial summation capped at L <= 1e6, got L={bp.L}")
    return bp.law().moment(p)


def moment_ratio(bp: BlockParams, p: float) -> float:
    """The normalized moment ||block||_p^p / (lam * B**(p-2)).

    Bounded by an absolute constant (per p) over all valid blocks; the
    fitted maximum over a parameter grid is the constant the rest of the
    package uses where one is needed.
    """
    return block_moments(bp, p) / (bp.lam_float * bp.B ** (p - 2.0))


def fit_moment_constant(p: float, grid=None) -> float:
    """Largest normalized p-th moment over a reference parameter grid."""
    if grid is None:
        grid = default_moment_grid()
    return max(moment_ratio(bp, p) for bp in grid)


def default_moment_grid() -> list[BlockParams]:
    """Blocks spanning lam, B, L used for moment-constant fitting."""
    out = []
    for lam in (Fraction(1), Fraction(1, 4)):
        for B in (100.0, 200.0):
            for L in (8, 64):
                d = choose_depth(lam, B, L)
                out.append(BlockParams(lam=lam, B=B, L=L, d=d, D=d + 2, U=0))
    return out
