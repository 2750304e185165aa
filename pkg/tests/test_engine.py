import numpy as np
import pytest

from spikeblocks import bits, engine


def brute_zero_runs(seed, lo, hi, min_len):
    t = bits.BitTape(seed)
    bs = [t.bit(p + 1) for p in range(lo, hi)]
    runs, i = [], 0
    while i < len(bs):
        if bs[i] == 0:
            j = i
            while j < len(bs) and bs[j] == 0:
                j += 1
            if j - i >= min_len:
                runs.append((lo + i, lo + j))
            i = j
        else:
            i += 1
    return runs


@pytest.mark.parametrize("use_fast", [False, True])
def test_zero_runs_match_brute_force(use_fast):
    if use_fast and not engine._fastscan.HAVE:
        pytest.skip("numba unavailable")
    rng = np.random.default_rng(31337)
    for _ in range(80):
        seed = int(rng.integers(0, 2**64, dtype=np.uint64))
        lo = int(rng.integers(0, 400))
        hi = lo + int(rng.integers(8, 900))
        ml = int(rng.integers(1, 20))
        got = list(engine.iter_zero_runs(np.array([seed], dtype=np.uint64),
                                         lo, hi, ml, use_fastscan=use_fast))
        want = brute_zero_runs(seed, lo, hi, ml)
        assert got == ([(0, want)] if want else [])


def test_backends_agree_on_long_spans():
    if not engine._fastscan.HAVE:
        pytest.skip("numba unavailable")
    seeds = bits.sample_seeds(904, 40)
    for ml in (7, 14, 15, 18, 23, 33):
        a = list(engine.iter_zero_runs(seeds, 5, 70000, ml, use_fastscan=False))
        b = list(engine.iter_zero_runs(seeds, 5, 70000, ml, use_fastscan=True))
        assert a == b


def test_count_in_runs_matches_direct():
    rng = np.random.default_rng(5)
    for _ in range(60):
        seed = int(rng.integers(0, 2**64, dtype=np.uint64))
        fam = engine.WindowFamily(
            base=int(rng.integers(0, 80)),
            step=int(rng.integers(1, 25)),
            count=int(rng.integers(1, 700)),
            width=int(rng.integers(1, 18)),
        )
        t = bits.BitTape(seed)
        want = sum(
            1 for i in range(fam.count)
            if bits.window_all_zero(t, fam.base + i * fam.step + 1, fam.width)
        )
        runs = t.zero_runs(fam.bit_lo, fam.bit_hi, fam.width)
        assert engine.count_in_runs(runs, fam) == want
        assert len(engine.indices_in_runs(runs, fam)) == want
        got = engine.scan_family_counts(np.array([seed], dtype=np.uint64), [fam])
        assert int(got[0, 0]) == want


def test_window_zero_direct_wide_windows():
    # windows wider than a word still evaluate exactly
    seeds = bits.sample_seeds(17, 200)
    for pos, width in ((3, 64), (60, 70), (0, 130)):
        got = engine.window_zero_direct(seeds, pos, width)
        want = np.array([
            bits.window_all_zero(bits.BitTape(int(s)), pos + 1, width) for s in seeds
        ])
        assert np.array_equal(got, want)


def test_forced_runs_feed_counts():
    fam = engine.WindowFamily(base=100, step=12, count=50, width=10)
    base = bits.BitTape(1234)
    forced = bits.ForcedTape(base, zero_ranges=((fam.base + 12 * 7, fam.base + 12 * 7 + 10),))
    runs = forced.zero_runs(fam.bit_lo, fam.bit_hi, fam.width)
    assert engine.count_in_runs(runs, fam) >= 1
    assert 7 in engine.indices_in_runs(runs, fam)


def test_family_validation():
    with pytest.raises(ValueError):
        engine.WindowFamily(base=-1, step=2, count=3, width=4)
    with pytest.raises(ValueError):
        engine.WindowFamily(base=0, step=0, count=3, width=4)
