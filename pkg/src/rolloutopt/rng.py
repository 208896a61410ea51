"""Counter-based uniform generator keyed by (seed, stream, user, period).

Each draw is a pure function of its four keys, so simulations give the same
numbers regardless of how users are split across workers or how many arms
an experiment has.  The hash chains the SplitMix64 finalizer::

    h = mix(seed + GAMMA)
    for v in (stream, user, period):
        h = mix((h ^ v) + GAMMA)
    u = ((h >> 11) + 0.5) * 2**-53          # strictly inside (0, 1)

with ``mix(z)``: ``z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27;
z *= 0x94D049BB133111EB; z ^= z >> 31`` (all arithmetic mod 2**64).
"""

import numpy as np

GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30, _S27, _S31, _S11 = (np.uint64(s) for s in (30, 27, 31, 11))
_INV_2_53 = 2.0**-53


def _mix(z):
    z = z ^ (z >> _S30)
    z = z * _M1
    z = z ^ (z >> _S27)
    z = z * _M2
    return z ^ (z >> _S31)


def hash64(seed, stream, users, period):
    """64-bit keyed hash for an array of user ids."""
    users = np.asarray(users, dtype=np.uint64)
    with np.errstate(over="ignore"):
        h = _mix(np.array([seed], dtype=np.uint64) + GAMMA)
        h = _mix((h ^ np.uint64(stream)) + GAMMA)
        h = _mix((h ^ users) + GAMMA)
        h = _mix((h ^ np.uint64(period)) + GAMMA)
    return h


def uniforms(seed, stream, users, period):
    """Uniform(0, 1) draws, one per user id."""
    h = hash64(seed, stream, users, period)
    return ((h >> _S11).astype(np.float64) + 0.5) * _INV_2_53
