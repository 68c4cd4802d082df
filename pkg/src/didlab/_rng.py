"""Counter-based deterministic uniforms (SplitMix64 finalizer).

Draw i of stream ``seed`` is a pure function of (seed, i), so draws can be
produced in any order or in parallel chunks and still agree bit-for-bit with
sequential generation.  Not cryptographic; plenty for simulation.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_SEED_SALT = 0xD6E8FEB86659FD93


def _fmix64(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def derive_seed(seed: int, index: int) -> int:
    """Child seed for substream ``index`` (replications, draws, etc.)."""
    return _fmix64((seed ^ _SEED_SALT) + (index + 1) * _GOLDEN)


def uniforms(seed: int, n: int, offset: int = 0) -> np.ndarray:
    """n uniforms on [0,1): draw i is fmix64(seed + (offset+i+1)*GOLDEN) >> 11 * 2^-53."""
    idx = np.arange(offset + 1, offset + n + 1, dtype=np.uint64)
    z = np.uint64(seed & _MASK) + idx * np.uint64(_GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)).astype(np.float64) * (2.0**-53)


def uniform_at(seed: int, index: int) -> float:
    """Scalar counterpart of uniforms(); same value as uniforms(seed, ...)[index]."""
    z = _fmix64(seed + (index + 1) * _GOLDEN)
    return (z >> 11) * (2.0**-53)
