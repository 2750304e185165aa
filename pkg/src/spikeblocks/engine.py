"""Vectorized detection of all-zero digit windows on many tapes at once.

Every quantitative check in this package reduces to questions of the form
"which of these digit windows are all zero on this tape?" for window
families in arithmetic progression.  Direct per-window evaluation is
O(windows x samples); for the large window families produced by staged
constructions this module instead finds maximal zero *runs* at the 64-bit
word level (a window is all zero iff it lies inside a zero run at least as
long as the window), which costs O(words x samples) with tiny constants
because runs of the needed lengths are rare.

Bit positions here are 0-based: position p is bit p & 63 of tape word
p >> 6 (see :mod:`spikeblocks.bits` for the word derivation).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from . import _fastscan
from .bits import tape_words_np

# Window families at or below this size are evaluated window-by-window;
# larger families go through the zero-run scan.
DIRECT_FAMILY_LIMIT = 96

_U = np.uint64


@dataclass(frozen=True)
class WindowFamily:
    """Windows [base + i*step, base + i*step + width) for 0 <= i < count."""

    base: int
    step: int
    count: int
    width: int

    def __post_init__(self):
        if self.step < 1 or self.count < 1 or self.width < 1:
            raise ValueError(f"degenerate window family {self}")
        if self.base < 0:
            raise ValueError(f"family starts at negative bit position {self.base}")

    @property
    def bit_lo(self) -> int:
        return self.base

    @property
    def bit_hi(self) -> int:
        return self.base + (self.count - 1) * self.step + self.width


def _words(seeds: np.ndarray, word_lo: int, word_hi: int) -> np.ndarray:
    idx = np.arange(word_lo, word_hi, dtype=np.uint64)
    return tape_words_np(seeds[:, None], idx[None, :])


def _screen(words: np.ndarray, min_len: int) -> np.ndarray:
    """Conservative per-word flags for zero runs of length >= min_len (<= 64).

    A maximal zero run either fits in one word (in-word doubling detects it),
    or crosses exactly one word boundary with both parts shorter than 64
    (leading-zeros + trailing-zeros test detects it), or contains an all-zero
    word (detected by the in-word rule).  Flags may overshoot; they never
    miss.
    """
    z = ~words
    y = z
    s = 1
    while s < min_len:
        sh = min(s, min_len - s)
        y = y & (y >> _U(sh))
        s += sh
    flags = y != 0

    sm = words.copy()
    for sh in (1, 2, 4, 8, 16, 32):
        sm |= sm >> _U(sh)
    lead = (64 - np.bitwise_count(sm)).astype(np.int16)
    low = words & np.negative(words)
    trail = np.bitwise_count(low - _U(1)).astype(np.int16)
    flags[:, :-1] |= (lead[:, :-1] + trail[:, 1:]) >= min_len
    return flags


def _runs_in_row(row: np.ndarray, cols: np.ndarray, word_lo: int,
                 bit_lo: int, bit_hi: int, min_len: int) -> list[tuple[int, int]]:
    """Exact zero runs near flagged columns of one word row (clipped)."""
    nw = row.shape[0]
    clusters: list[list[int]] = []
    for c in cols.tolist():
        if clusters and c - clusters[-1][1] <= 2:
            clusters[-1][1] = c
        else:
            clusters.append([c, c])
    runs: list[tuple[int, int]] = []
    for c0, c1 in clusters:
        a = max(c0 - 1, 0)
        b = min(c1 + 2, nw)
        x = 0
        for j in range(a, b):
            x |= int(row[j]) << (64 * (j - a))
        nbits = 64 * (b - a)
        y = ~x & ((1 << nbits) - 1)
        base_bit = 64 * (word_lo + a)
        while y:
            lo = (y & -y).bit_length() - 1
            yy = y >> lo
            length = ((yy + 1) & ~yy).bit_length() - 1
            start = base_bit + lo
            stop = start + length
            s, t = max(start, bit_lo), min(stop, bit_hi)
            if t - s >= min_len:
                runs.append((s, t))
            y &= ~((1 << (lo + length)) - 1)
    runs.sort()
    merged: list[tuple[int, int]] = []
    for r in runs:
        if merged and r[0] <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], r[1]))
        else:
            merged.append(r)
    return merged


def iter_zero_runs(seeds: np.ndarray, bit_lo: int, bit_hi: int, min_len: int,
                   chunk: int = 128,
                   use_fastscan: bool | None = None) -> Iterator[tuple[int, list[tuple[int, int]]]]:
    """Yield (sample_index, runs) for samples with a zero run >= min_len.

    Samples without such a run are skipped, which is the common case.  Runs
    are maximal zero runs clipped to [bit_lo, bit_hi), sorted and disjoint.
    Dispatches to the numba kernel for large jobs when it is available; both
    backends produce identical output.
    """
    if not (1 <= min_len <= 64):
        raise ValueError(f"run scanning supports lengths 1..64, got {min_len}")
    if bit_hi <= bit_lo or bit_lo < 0:
        raise ValueError(f"bad bit range [{bit_lo}, {bit_hi})")
    if bit_hi > 1 << 52:
        raise ValueError(f"bit range end {bit_hi} too large to scan")
    seeds = np.asarray(seeds, dtype=np.uint64)
    if use_fastscan is None:
        use_fastscan = _fastscan.HAVE and seeds.shape[0] * (bit_hi - bit_lo) >= 1 << 22
    if use_fastscan:
        if not _fastscan.HAVE:
            raise RuntimeError("numba scan requested but numba is unavailable")
        yield from _fastscan.iter_runs(seeds, bit_lo, bit_hi, min_len)
        return
    word_lo = bit_lo >> 6
    word_hi = ((bit_hi - 1) >> 6) + 1
    nw = word_hi - word_lo
    chunk = max(1, min(chunk, max(1, (1 << 22) // nw)))
    for off in range(0, seeds.shape[0], chunk):
        sub = seeds[off:off + chunk]
        words = _words(sub, word_lo, word_hi)
        flags = _screen(words, min_len)
        hit_rows = np.nonzero(flags.any(axis=1))[0]
        for r in hit_rows.tolist():
            cols = np.nonzero(flags[r])[0]
            runs = _runs_in_row(words[r], cols, word_lo, bit_lo, bit_hi, min_len)
            if runs:
                yield off + r, runs


def zero_runs_single(seed: int, bit_lo: int, bit_hi: int, min_len: int) -> list[tuple[int, int]]:
    """Maximal zero runs of one tape, clipped to [bit_lo, bit_hi)."""
    for _, runs in iter_zero_runs(np.array([seed], dtype=np.uint64), bit_lo, bit_hi, min_len):
        return runs
    return []


def count_in_runs(runs: list[tuple[int, int]], fam: WindowFamily) -> int:
    """Number of family windows contained in one of the zero runs."""
    total = 0
    for (a, b) in runs:
        if b - a < fam.width:
            continue
        i_lo = -((fam.base - a) // fam.step)
        i_hi = (b - fam.width - fam.base) // fam.step
        i_lo = max(i_lo, 0)
        i_hi = min(i_hi, fam.count - 1)
        if i_hi >= i_lo:
            total += i_hi - i_lo + 1
    return total


def indices_in_runs(runs: list[tuple[int, int]], fam: WindowFamily) -> list[int]:
    """Indices i of family windows contained in one of the zero runs."""
    out: list[int] = []
    for (a, b) in runs:
        if b - a < fam.width:
            continue
        i_lo = max(-((fam.base - a) // fam.step), 0)
        i_hi = min((b - fam.width - fam.base) // fam.step, fam.count - 1)
        out.extend(range(i_lo, i_hi + 1))
    return sorted(set(out))


def window_zero_direct(seeds: np.ndarray, pos: int, width: int) -> np.ndarray:
    """Boolean array: is the window [pos, pos+width) all zero, per seed."""
    seeds = np.asarray(seeds, dtype=np.uint64)
    if pos < 0 or width < 1:
        raise ValueError(f"bad window ({pos}, {width})")
    out = np.ones(seeds.shape, dtype=bool)
    k = pos >> 6
    off = pos & 63
    remaining = width
    while remaining > 0:
        take = min(64 - off, remaining)
        mask = _U(((1 << take) - 1) << off)
        w = tape_words_np(seeds, np.full(seeds.shape, k, dtype=np.uint64))
        out &= (w & mask) == 0
        remaining -= take
        k += 1
        off = 0
    return out


def family_zero_counts_direct(seeds: np.ndarray, fam: WindowFamily) -> np.ndarray:
    """Per-seed count of all-zero windows, one vectorized pass per window."""
    seeds = np.asarray(seeds, dtype=np.uint64)
    counts = np.zeros(seeds.shape, dtype=np.int64)
    for i in range(fam.count):
        counts += window_zero_direct(seeds, fam.base + i * fam.step, fam.width)
    return counts


def scan_family_counts(seeds: np.ndarray, families: list[WindowFamily],
                       chunk: int = 128) -> np.ndarray:
    """Counts of all-zero windows per (sample, family), shape (m, nfam).

    Small families are evaluated directly.  Large families are grouped by
    window width, and each group shares one zero-run scan; keeping the scan
    length at the group's own width is what keeps the scan cheap.
    """
    seeds = np.asarray(seeds, dtype=np.uint64)
    m = seeds.shape[0]
    counts = np.zeros((m, len(families)), dtype=np.int64)
    groups: dict[int, list[tuple[int, WindowFamily]]] = {}
    for j, f in enumerate(families):
        if f.count <= DIRECT_FAMILY_LIMIT:
            counts[:, j] = family_zero_counts_direct(seeds, f)
        else:
            groups.setdefault(f.width, []).append((j, f))
    for width, members in groups.items():
        lo = min(f.bit_lo for _, f in members)
        hi = max(f.bit_hi for _, f in members)
        for idx, runs in iter_zero_runs(seeds, lo, hi, width, chunk=chunk):
            for j, f in members:
                counts[idx, j] = count_in_runs(runs, f)
    return counts
