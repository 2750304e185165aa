import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spikeblocks import bits
from spikeblocks.mcstats import wilson_interval


def test_read_window_deterministic():
    t = bits.BitTape(seed=42)
    first = bits.read_window(t, 1, 3)
    for _ in range(5):
        assert bits.read_window(t, 1, 3) == first


def test_overlapping_windows_agree():
    t = bits.BitTape(seed=7)
    a = bits.read_window(t, 5, 40)
    b = bits.read_window(t, 25, 40)
    assert a[20:] == b[:20]


@given(st.integers(0, 2**64 - 1), st.integers(1, 300), st.integers(1, 80))
@settings(max_examples=60, deadline=None)
def test_segment_matches_bits(seed, start, length):
    t = bits.BitTape(seed)
    seg = t.segment(start, length)
    for j in range(length):
        assert (seg >> j) & 1 == t.bit(start + j)


def test_bit_index_validation():
    t = bits.BitTape(0)
    with pytest.raises(ValueError):
        t.bit(0)
    with pytest.raises(ValueError):
        bits.read_window(t, 1, 0)


def test_single_bit_mean():
    # 1e6 single-bit reads at distinct indices; binomial CI around 1/2
    seeds = bits.sample_seeds(1001, 10**6)
    word = bits.tape_words_np(seeds, np.zeros(len(seeds), dtype=np.uint64))
    mean = float((word & np.uint64(1)).mean())
    assert abs(mean - 0.5) <= 0.002


def test_window_all_zero_forced():
    t = bits.ForcedTape(bits.BitTape(3), zero_ranges=((4, 10),))
    assert bits.window_all_zero(t, 5, 6)


def test_window_probability_len4():
    n = 10**6
    seeds = bits.sample_seeds(77, n)
    word = bits.tape_words_np(seeds, np.zeros(n, dtype=np.uint64))
    hit = (word & np.uint64(0b1111)) == 0
    phat = float(hit.mean())
    _, half = wilson_interval(int(hit.sum()), n)
    assert abs(phat - 1 / 16) <= half


def test_disjoint_windows_independent():
    # joint frequency of two disjoint windows ~ product of marginals (4 sigma)
    n = 2 * 10**5
    seeds = bits.sample_seeds(5150, n)
    w = bits.tape_words_np(seeds, np.zeros(n, dtype=np.uint64))
    a = (w & np.uint64(0b111)) == 0
    b = ((w >> np.uint64(13)) & np.uint64(0b11111)) == 0
    pj = float((a & b).mean())
    pa, pb = float(a.mean()), float(b.mean())
    sigma = (pa * pb * (1 - pa * pb) / n) ** 0.5
    assert abs(pj - pa * pb) <= 4 * sigma


@pytest.mark.parametrize("r,val", [(12, 2), (1, 0), (-2048, 11), (3 << 40, 40)])
def test_valuation_examples(r, val):
    assert bits.valuation(r) == val


def test_valuation_rejects_zero():
    with pytest.raises(ValueError):
        bits.valuation(0)


@given(st.integers(0, 62), st.integers(0, 2**20 - 1))
@settings(max_examples=200, deadline=None)
def test_valuation_structure(e, m_half):
    m = 2 * m_half + 1
    assert bits.valuation((m << e)) == e
    assert bits.valuation(-(m << e)) == e


def test_sample_seed_derivation_documented():
    master = 987654321
    for j in (0, 1, 17, 12345):
        expected = bits.mix64((master + j * bits.GAMMA2) % 2**64)
        assert bits.derive_sample_seed(master, j) == expected
    arr = bits.sample_seeds(master, 5, start=3)
    assert [int(x) for x in arr] == [bits.derive_sample_seed(master, 3 + j) for j in range(5)]


def test_forced_tape_rules():
    t = bits.ForcedTape(bits.BitTape(11), zero_ranges=((8, 16),), one_bits=frozenset({20}))
    assert t.bit(21) == 1
    assert t.segment(9, 8) == 0
    with pytest.raises(ValueError):
        bits.ForcedTape(bits.BitTape(0), zero_ranges=((4, 8),), one_bits=frozenset({5}))


def test_forced_tape_segment_matches_bits():
    t = bits.ForcedTape(bits.BitTape(99), zero_ranges=((30, 45), (100, 130)), one_bits=frozenset({50, 51}))
    for start in (1, 25, 40, 47, 95, 120):
        seg = t.segment(start, 40)
        for j in range(40):
            assert (seg >> j) & 1 == t.bit(start + j)
