"""Deterministic bit tapes modeling a point of the circle by its binary digits.

A point x in [0, 1) is represented by the infinite sequence of its binary
digits.  Instead of storing digits, a :class:`BitTape` derives the digit at
any index from a 64-bit seed with a counter-mode hash, so arbitrarily large
digit positions are addressable in O(1) and a tape is fully reproducible
from its seed.

Derivation scheme (stable; independent implementations can replay it):

* ``word(seed, k) = mix64((seed + (k + 1) * GAMMA) mod 2**64)`` where
  ``mix64`` is the SplitMix64 finalizer and ``GAMMA = 0x9E3779B97F4A7C15``.
* bit at 1-based index ``i`` is bit ``(i-1) % 64`` of ``word(seed, (i-1)//64)``.
* the tape seed of Monte Carlo sample ``j`` under master seed ``s`` is
  ``mix64((s + j * GAMMA2) mod 2**64)`` with ``GAMMA2 = 0xC2B2AE3D27D4EB4F``.

Distinct indices give (statistically) independent uniform bits, so disjoint
digit windows behave like independent events; points whose binary expansion
is ambiguous (eventually all-ones tails) occur with probability zero under
this model and are never produced deliberately.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
GAMMA2 = 0xC2B2AE3D27D4EB4F
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a 64-bit integer."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * _M1) & _MASK64
    z = ((z ^ (z >> 27)) * _M2) & _MASK64
    return z ^ (z >> 31)


def mix64_np(z: np.ndarray) -> np.ndarray:
    """Vectorized SplitMix64 finalizer (uint64 arrays, wrapping arithmetic)."""
    z = z ^ (z >> np.uint64(30))
    z = z * np.uint64(_M1)
    z = z ^ (z >> np.uint64(27))
    z = z * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def tape_word(seed: int, k: int) -> int:
    """The k-th (0-based) 64-bit word of the tape with the given seed."""
    return mix64((seed + (k + 1) * GAMMA) & _MASK64)


def tape_words_np(seeds: np.ndarray, word_index: np.ndarray) -> np.ndarray:
    """Vectorized tape words; broadcasts ``seeds`` against ``word_index``."""
    state = seeds.astype(np.uint64) + (word_index.astype(np.uint64) + np.uint64(1)) * np.uint64(GAMMA)
    return mix64_np(state)


def derive_sample_seed(master_seed: int, sample: int) -> int:
    """Tape seed of Monte Carlo sample ``sample`` under a master seed."""
    return mix64((master_seed + sample * GAMMA2) & _MASK64)


def sample_seeds(master_seed: int, n: int, start: int = 0) -> np.ndarray:
    """Tape seeds of samples ``start .. start+n-1`` as a uint64 array."""
    idx = np.arange(start, start + n, dtype=np.uint64)
    return mix64_np(np.uint64(master_seed & _MASK64) + idx * np.uint64(GAMMA2))


def valuation(r: int) -> int:
    """Dyadic valuation of a nonzero integer: the largest e with 2**e | r."""
    if r == 0:
        raise ValueError("valuation(0) is undefined")
    return (r & -r).bit_length() - 1


@dataclass(frozen=True)
class BitTape:
    """A deterministic, lazily evaluated tape of i.i.d. uniform bits.

    Reading is pure: the same (seed, index) always yields the same bit, so a
    tape can be shared freely across threads.
    """

    seed: int

    def bit(self, index: int) -> int:
        """Bit at 1-based ``index`` (index v+1 is the (v+1)-th binary digit)."""
        if index < 1:
            raise ValueError(f"bit index must be >= 1, got {index}")
        pos = index - 1
        return (tape_word(self.seed, pos >> 6) >> (pos & 63)) & 1

    def segment(self, start: int, length: int) -> int:
        """Bits at 1-based indices start..start+length-1 packed into an int.

        Bit j of the result (LSB first) is the bit at index start+j.
        """
        if length < 1:
            raise ValueError(f"segment length must be >= 1, got {length}")
        if start < 1:
            raise ValueError(f"segment start must be >= 1, got {start}")
        lo = start - 1
        hi = lo + length
        k0 = lo >> 6
        acc = 0
        for k in range(k0, ((hi - 1) >> 6) + 1):
            acc |= tape_word(self.seed, k) << (64 * (k - k0))
        return (acc >> (lo - 64 * k0)) & ((1 << length) - 1)

    def zero_runs(self, bit_lo: int, bit_hi: int, min_len: int) -> list[tuple[int, int]]:
        """Maximal all-zero runs of length >= min_len inside 0-based [bit_lo, bit_hi).

        Returned pairs (a, b) are 0-based half-open bit-position ranges,
        clipped to the query interval.
        """
        from . import engine

        return engine.zero_runs_single(self.seed, bit_lo, bit_hi, min_len)


def read_window(tape, start: int, length: int) -> list[int]:
    """Bits at indices start, ..., start+length-1 (1-based, deterministic)."""
    if length < 1:
        raise ValueError(f"window length must be >= 1, got {length}")
    seg = tape.segment(start, length)
    return [(seg >> j) & 1 for j in range(length)]


def window_all_zero(tape, start: int, length: int) -> bool:
    """True iff every bit in the window is zero.

    With start = v+1 this is the event that the first ``length`` binary
    digits of the shifted point {2**v x} are all zero, i.e. that the shifted
    point falls in [0, 2**-length).
    """
    if length < 1:
        raise ValueError(f"window length must be >= 1, got {length}")
    return tape.segment(start, length) == 0


@dataclass(frozen=True)
class ForcedTape:
    """A tape with selected digit ranges overridden to constants.

    ``zero_ranges`` are 0-based half-open bit-position ranges forced to all
    zeros; ``one_bits`` are 0-based positions forced to one.  Used to place a
    tape deterministically inside (or outside) a digit-window event while
    leaving every other digit random.
    """

    base: BitTape
    zero_ranges: tuple[tuple[int, int], ...] = ()
    one_bits: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        for (a, b) in self.zero_ranges:
            if b <= a:
                raise ValueError(f"empty forced range ({a}, {b})")
            for p in self.one_bits:
                if a <= p < b:
                    raise ValueError(f"bit {p} forced both ways")

    def _forced_zero(self, pos: int) -> bool:
        return any(a <= pos < b for (a, b) in self.zero_ranges)

    def bit(self, index: int) -> int:
        pos = index - 1
        if pos in self.one_bits:
            return 1
        if self._forced_zero(pos):
            return 0
        return self.base.bit(index)

    def segment(self, start: int, length: int) -> int:
        seg = self.base.segment(start, length)
        lo = start - 1
        for (a, b) in self.zero_ranges:
            aa, bb = max(a, lo), min(b, lo + length)
            if aa < bb:
                seg &= ~(((1 << (bb - aa)) - 1) << (aa - lo))
        for p in self.one_bits:
            if lo <= p < lo + length:
                seg |= 1 << (p - lo)
        return seg

    def _bit0(self, pos: int) -> int:
        return self.bit(pos + 1)

    def zero_runs(self, bit_lo: int, bit_hi: int, min_len: int) -> list[tuple[int, int]]:
        """Maximal zero runs of the overridden tape (0-based, clipped)."""
        ones = sorted(p for p in self.one_bits if bit_lo <= p < bit_hi)

        def split(a: int, b: int) -> list[tuple[int, int]]:
            parts, cur = [], a
            for p in ones:
                if cur <= p < b:
                    parts.append((cur, p))
                    cur = p + 1
            parts.append((cur, b))
            return parts

        runs: list[tuple[int, int]] = []
        for (a, b) in self.base.zero_runs(bit_lo, bit_hi, min_len):
            runs.extend(split(a, b))
        for (fa, fb) in self.zero_ranges:
            a, b = max(fa, bit_lo), min(fb, bit_hi)
            if a >= b:
                continue
            while a > bit_lo and self._bit0(a - 1) == 0:
                a -= 1
            while b < bit_hi and self._bit0(b) == 0:
                b += 1
            runs.extend(split(a, b))
        runs.sort()
        merged: list[tuple[int, int]] = []
        for (a, b) in runs:
            if merged and a <= merged[-1][1]:
                merged[-1] = (merged[-1][0], max(merged[-1][1], b))
            else:
                merged.append((a, b))
        return [r for r in merged if r[1] - r[0] >= min_len]
