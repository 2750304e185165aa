"""Base-2 log-space arithmetic for quantities with astronomically large logs.

Stage thresholds are powers 2**E with E itself an unbounded integer, so no
fixed-width float can hold them.  A positive quantity x is represented here
by log2(x) split into an unbounded integer part and a float fraction in
[0, 1); products are log additions, sums use the log-sum trick with exact
integer exponent differences, and comparisons are lexicographic.  A tiny
exact-rational oracle validates the representation in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction


def int_log2(n: int) -> float:
    """log2 of a positive integer of any size, to float accuracy."""
    if n <= 0:
        raise ValueError(f"int_log2 needs a positive integer, got {n}")
    bl = n.bit_length()
    if bl <= 53:
        return math.log2(n)
    return (bl - 53) + math.log2(n >> (bl - 53))


def int_ln(n: int) -> float:
    """Natural log of a positive integer of any size."""
    return int_log2(n) * math.log(2.0)


def ceil_log2(n: int) -> int:
    """Smallest e with 2**e >= n (n >= 1)."""
    if n < 1:
        raise ValueError(f"ceil_log2 needs n >= 1, got {n}")
    return (n - 1).bit_length()


@dataclass(frozen=True)
class Log2Value:
    """A positive number stored as log2 = ip + fp with int ip, 0 <= fp < 1."""

    ip: int
    fp: float

    def __post_init__(self):
        if not (0.0 <= self.fp < 1.0):
            raise ValueError(f"fractional part {self.fp} outside [0, 1)")

    @staticmethod
    def _normalize(ip: int, fp: float) -> "Log2Value":
        shift = math.floor(fp)
        return Log2Value(ip + int(shift), fp - shift)

    @classmethod
    def from_log2(cls, ip: int, fp: float = 0.0) -> "Log2Value":
        return cls._normalize(ip, fp)

    @classmethod
    def from_float(cls, x: float) -> "Log2Value":
        if x <= 0:
            raise ValueError(f"log-space values must be positive, got {x}")
        return cls._normalize(0, math.log2(x))

    @classmethod
    def from_int(cls, n: int) -> "Log2Value":
        return cls._normalize(0, 0.0) if n == 1 else cls._normalize(0, int_log2(n))

    @classmethod
    def from_fraction(cls, q: Fraction) -> "Log2Value":
        if q <= 0:
            raise ValueError(f"log-space values must be positive, got {q}")
        return cls._normalize(0, int_log2(q.numerator) - int_log2(q.denominator))

    def log2(self) -> tuple[int, float]:
        return self.ip, self.fp

    def log2_float(self) -> float:
        """log2 as a float; exact only while ip fits a float."""
        return float(self.ip) + self.fp

    def to_float(self) -> float:
        if self.ip > 1023:
            return math.inf
        if self.ip < -1073:
            return 0.0
        return math.ldexp(2.0 ** self.fp, self.ip)

    def __mul__(self, other: "Log2Value") -> "Log2Value":
        return self._normalize(self.ip + other.ip, self.fp + other.fp)

    def __truediv__(self, other: "Log2Value") -> "Log2Value":
        return self._normalize(self.ip - other.ip, self.fp - other.fp)

    def __add__(self, other: "Log2Value") -> "Log2Value":
        hi, lo = (self, other) if not _lt(self, other) else (other, self)
        diff = lo.ip - hi.ip
        if diff < -1100:
            return hi
        delta = diff + (lo.fp - hi.fp)
        return self._normalize(hi.ip, hi.fp + math.log2(1.0 + 2.0 ** delta))

    def __lt__(self, other: "Log2Value") -> bool:
        return _lt(self, other)

    def __le__(self, other: "Log2Value") -> bool:
        return not _lt(other, self)


def _lt(a: Log2Value, b: Log2Value) -> bool:
    if a.ip != b.ip:
        return a.ip < b.ip
    return a.fp < b.fp


def log2_sum(terms: list[Log2Value]) -> Log2Value:
    """Log-space sum of positive terms."""
    if not terms:
        raise ValueError("empty log-space sum")
    acc = terms[0]
    for t in terms[1:]:
        acc = acc + t
    return acc
