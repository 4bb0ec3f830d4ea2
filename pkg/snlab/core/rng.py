"""
Random streams.

Every trial gets its own counter-based Philox stream keyed by (seed, stream index),
so results do not depend on how trials are spread over workers.
"""

from fractions import Fraction

import numpy as np

from snlab.core.errors import SNLabError

MAX_SEED = 2 ** 64 - 1


def make_stream(seed: int, index: int = 0) -> np.random.Generator:
    """Generator for stream `index` of `seed`"""
    if not 0 <= seed <= MAX_SEED:
        raise SNLabError(f"seed must be a 64-bit unsigned integer, got {seed}", "argument", "cli")
    if index < 0:
        raise SNLabError(f"stream index must be nonnegative, got {index}", "argument", "cli")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def substream(rng: np.random.Generator) -> np.random.Generator:
    """Fresh independent stream derived from rng (used for precision retries)"""
    return np.random.Generator(np.random.Philox(int(rng.bit_generator.random_raw())))


class ExactUniform:
    """Uniform on [0,1) revealed 64 bits at a time, compared exactly against rationals"""

    __slots__ = ("_rng", "_num", "_bits")

    def __init__(self, rng: np.random.Generator):
        self._rng = rng
        self._num = int(rng.bit_generator.random_raw())
        self._bits = 64

    def _refine(self):
        self._num = (self._num << 64) | int(self._rng.bit_generator.random_raw())
        self._bits += 64

    def less_than(self, threshold: Fraction) -> bool:
        """Decide U < threshold, drawing more bits only while the answer is open"""
        thr = Fraction(threshold)
        if thr <= 0:
            return False
        if thr >= 1:
            return True
        while True:
            scale = 1 << self._bits
            # U lies in [num/scale, (num+1)/scale)
            if (self._num + 1) * thr.denominator <= thr.numerator * scale:
                return True
            if self._num * thr.denominator >= thr.numerator * scale:
                return False
            self._refine()

    def __float__(self) -> float:
        return self._num / float(1 << self._bits)
