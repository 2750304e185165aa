"""Optional numba kernel behind the zero-run scan.

Single pass over tape words per sample, emitting maximal zero runs of at
least the requested length.  Produces exactly the same runs as the numpy
screen in :mod:`spikeblocks.engine`; that equivalence is under test.  If
numba is unavailable the engine silently keeps its numpy path.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE = False

    def njit(*a, **k):  # type: ignore
        def deco(f):
            return f

        return deco


_G = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_L8 = np.uint64(0x0101010101010101)
_H8 = np.uint64(0x8080808080808080)
_U0 = np.uint64(0)
_U1 = np.uint64(1)


@njit(cache=True, nogil=True)
def _scan(seeds, word_lo, nw, min_len, tape_idx, starts, stops):  # pragma: no cover - numba
    cap = tape_idx.shape[0]
    nr = 0
    byte_filter = min_len >= 15
    for s in range(seeds.shape[0]):
        seed = seeds[s]
        open_run = False
        run_start = np.int64(0)
        for k in range(nw):
            st = seed + (np.uint64(word_lo + k) + _U1) * _G
            z = st ^ (st >> np.uint64(30))
            z = z * _M1
            z = z ^ (z >> np.uint64(27))
            z = z * _M2
            w = z ^ (z >> np.uint64(31))
            wordbase = np.int64(k) << 6
            if w == _U0:
                if not open_run:
                    open_run = True
                    run_start = wordbase
                continue
            from0 = np.int64(0)
            if open_run:
                tz = np.int64(0)
                x = w
                while (x & _U1) == _U0:
                    x >>= _U1
                    tz += 1
                stop = wordbase + tz
                if stop - run_start >= min_len:
                    if nr >= cap:
                        return -1
                    tape_idx[nr] = s
                    starts[nr] = run_start
                    stops[nr] = stop
                    nr += 1
                open_run = False
                from0 = tz
            may_have_run = True
            if byte_filter:
                may_have_run = ((w - _L8) & ~w & _H8) != _U0
            if may_have_run:
                x = w >> np.uint64(from0)
                p = from0
                while True:
                    while (x & _U1) == _U1:
                        x >>= _U1
                        p += 1
                    if x == _U0:
                        # bits p..63 are zero; they continue into the next word
                        if p < 64:
                            open_run = True
                            run_start = wordbase + p
                        break
                    zs = p
                    while (x & _U1) == _U0:
                        x >>= _U1
                        p += 1
                    if p - zs >= min_len:
                        if nr >= cap:
                            return -1
                        tape_idx[nr] = s
                        starts[nr] = wordbase + zs
                        stops[nr] = wordbase + p
                        nr += 1
            else:
                if (w >> np.uint64(63)) == _U0:
                    x = w
                    lz = np.int64(0)
                    while (x >> np.uint64(63)) == _U0:
                        x <<= _U1
                        lz += 1
                    open_run = True
                    run_start = wordbase + (64 - lz)
        if open_run:
            stop = np.int64(nw) << 6
            if stop - run_start >= min_len:
                if nr >= cap:
                    return -1
                tape_idx[nr] = s
                starts[nr] = run_start
                stops[nr] = stop
                nr += 1
    return nr


def iter_runs(seeds: np.ndarray, bit_lo: int, bit_hi: int, min_len: int,
              seed_chunk: int = 8192):
    """Yield (sample_index, clipped runs) like engine.iter_zero_runs."""
    word_lo = bit_lo >> 6
    word_hi = ((bit_hi - 1) >> 6) + 1
    nw = word_hi - word_lo
    span_base = word_lo << 6
    for off in range(0, seeds.shape[0], seed_chunk):
        sub = seeds[off:off + seed_chunk]
        cap = 4096
        while True:
            tape_idx = np.empty(cap, dtype=np.int64)
            starts = np.empty(cap, dtype=np.int64)
            stops = np.empty(cap, dtype=np.int64)
            nr = _scan(sub, word_lo, nw, min_len, tape_idx, starts, stops)
            if nr >= 0:
                break
            cap *= 8
        i = 0
        while i < nr:
            j = i
            t = tape_idx[i]
            runs = []
            while j < nr and tape_idx[j] == t:
                a = max(int(starts[j]) + span_base, bit_lo)
                b = min(int(stops[j]) + span_base, bit_hi)
                if b - a >= min_len:
                    runs.append((a, b))
                j += 1
            if runs:
                yield off + int(t), runs
            i = j
