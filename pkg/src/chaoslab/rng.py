"""Counter-based random streams.

Every random draw is a pure function of ``(key, counter)``:

    mix64(z):   z ^= z >> 30; z *= 0xBF58476D1CE4E5B9
                z ^= z >> 27; z *= 0x94D049BB133111EB
                z ^= z >> 31
    draw(key, c)        = mix64(key + (c + 1) * 0x9E3779B97F4A7C15)   (mod 2**64)
    seed_split(m, i)    = mix64(m + (i + 1) * 0xD1B54A32D192ED03)     (mod 2**64)
    uniform(key, c)     = (draw(key, c) >> 11) * 2**-53               in [0, 1)

``mix64`` is the SplitMix64 finaliser, a bijection on 64-bit words, and both
increments are odd, so ``seed_split(m, .)`` is injective in the index for a
fixed master.  Integer arithmetic is exact, so the numba kernels and the
numpy fallback produce identical streams.
"""
import numpy as np

from ._jit import jit

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
SPLIT = 0xD1B54A32D192ED03
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
INV53 = 1.0 / 9007199254740992.0


def mix64_int(z):
    z &= MASK64
    z ^= z >> 30
    z = (z * MIX1) & MASK64
    z ^= z >> 27
    z = (z * MIX2) & MASK64
    z ^= z >> 31
    return z


def seed_split(master, worker):
    """Derive the seed of stream ``worker`` from ``master`` (plain ints)."""
    if worker < 0:
        raise ValueError("worker index must be non-negative")
    return mix64_int((master & MASK64) + (worker + 1) * SPLIT)


def derive(master, *path):
    """Apply :func:`seed_split` along a path of indices."""
    key = master & MASK64
    for p in path:
        key = seed_split(key, int(p))
    return key


def stream_keys(master, count, start=0):
    """Keys ``seed_split(master, i)`` for ``i in [start, start + count)`` as uint64."""
    idx = np.arange(start, start + count, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(master & MASK64) + (idx + np.uint64(1)) * np.uint64(SPLIT)
    return mix64_array(z)


def mix64_array(z):
    z = np.asarray(z, dtype=np.uint64).copy()
    with np.errstate(over="ignore"):
        z ^= z >> np.uint64(30)
        z *= np.uint64(MIX1)
        z ^= z >> np.uint64(27)
        z *= np.uint64(MIX2)
        z ^= z >> np.uint64(31)
    return z


def uniform_array(keys, counter):
    """Vectorised ``uniform(key, counter)`` over an array of keys."""
    keys = np.asarray(keys, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = keys + np.uint64((counter + 1) * GOLDEN & MASK64)
    return (mix64_array(z) >> np.uint64(11)).astype(np.float64) * INV53


def uniform_sequence(key, count, start=0):
    """``uniform(key, c)`` for ``c in [start, start + count)``."""
    c = np.arange(start, start + count, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(key & MASK64) + (c + np.uint64(1)) * np.uint64(GOLDEN)
    return (mix64_array(z) >> np.uint64(11)).astype(np.float64) * INV53


@jit
def mix64(z):
    z = z ^ (z >> np.uint64(30))
    z = z * np.uint64(0xBF58476D1CE4E5B9)
    z = z ^ (z >> np.uint64(27))
    z = z * np.uint64(0x94D049BB133111EB)
    z = z ^ (z >> np.uint64(31))
    return z


@jit
def uniform(key, counter):
    z = key + (np.uint64(counter) + np.uint64(1)) * np.uint64(0x9E3779B97F4A7C15)
    return np.float64(mix64(z) >> np.uint64(11)) * (1.0 / 9007199254740992.0)
