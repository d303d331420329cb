import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from chaoslab import rng
from chaoslab.parallel import chunk_bounds, map_ordered

U64 = st.integers(min_value=0, max_value=2**64 - 1)


def test_seed_split_distinct_over_ten_thousand_indices():
    seeds = {rng.seed_split(12345, i) for i in range(10_000)}
    assert len(seeds) == 10_000


def test_seed_split_pinned_values():
    # reference values from the documented constants (SplitMix64 finaliser)
    z = (0 + 1 * rng.SPLIT) & rng.MASK64
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & rng.MASK64
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & rng.MASK64
    z ^= z >> 31
    assert rng.seed_split(0, 0) == z
    assert rng.seed_split(42, 7) == rng.seed_split(42, 7)


def test_master_avalanche():
    r = np.random.default_rng(1)
    flips = []
    for _ in range(1000):
        m = int(r.integers(0, 2**63))
        bit = int(r.integers(0, 64))
        a = rng.seed_split(m, 3)
        b = rng.seed_split(m ^ (1 << bit), 3)
        flips.append(bin(a ^ b).count("1"))
    assert np.mean(flips) >= 30


@given(U64, st.integers(0, 2**16))
def test_stream_keys_match_scalar(master, i):
    keys = rng.stream_keys(master, 3, i)
    assert [int(k) for k in keys] == [rng.seed_split(master, i + j) for j in range(3)]


@given(U64, st.integers(0, 1000))
@settings(max_examples=50)
def test_uniform_vector_matches_jitted_scalar(key, counter):
    vec = rng.uniform_array(np.array([key], dtype=np.uint64), counter)[0]
    seq = rng.uniform_sequence(key, 1, counter)[0]
    scalar = rng.uniform(np.uint64(key), counter)
    assert vec == seq == scalar
    assert 0.0 <= vec < 1.0


def test_uniform_moments():
    u = rng.uniform_sequence(99, 200_000)
    assert abs(u.mean() - 0.5) < 0.005
    assert abs(u.var() - 1 / 12) < 0.002


def test_derive_path():
    assert rng.derive(5) == 5
    assert rng.derive(5, 1, 2) == rng.seed_split(rng.seed_split(5, 1), 2)


def test_chunks_cover_range():
    for count in (1, 7, 100, 1001):
        for workers in (1, 4, 16):
            b = chunk_bounds(count, workers, 3)
            assert b[0][0] == 0 and b[-1][1] == count
            assert all(x[1] == y[0] for x, y in zip(b[:-1], b[1:]))


def test_map_ordered_independent_of_workers():
    def f(lo, hi):
        return rng.uniform_array(rng.stream_keys(7, hi - lo, lo), 0)

    ref = map_ordered(f, 1000, 1)
    for w in (4, 16):
        assert np.array_equal(map_ordered(f, 1000, w, min_chunk=8), ref)
