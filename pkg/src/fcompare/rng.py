"""Counter-based random streams.

Every replicate ``i`` of an experiment seeded with ``seed`` draws from its
own Philox stream: the 128-bit key is derived from ``seed`` through
``numpy.random.SeedSequence`` and the 256-bit counter starts at
``[0, 0, i, 0]``.  Streams therefore never overlap for fewer than 2**128
draws per replicate, and replicate ``i`` sees the same numbers regardless of
how many replicates exist or which worker evaluates it.
"""

import secrets

import numpy as np

_SALT = {"main": 0, "split": 1, "subsample": 2, "validation": 3, "data": 4}


def fresh_seed() -> int:
    """A random 63-bit seed, for when the caller supplied none."""
    return secrets.randbits(63)


def _key(seed, purpose):
    ss = np.random.SeedSequence([int(seed), _SALT[purpose]])
    return ss.generate_state(2, np.uint64)


def stream(seed: int, index: int = 0, purpose: str = "main") -> np.random.Generator:
    """Generator for replicate ``index`` of the experiment keyed by ``seed``."""
    if index < 0:
        raise ValueError("stream index must be nonnegative")
    bitgen = np.random.Philox(key=_key(seed, purpose), counter=[0, 0, int(index), 0])
    return np.random.Generator(bitgen)
