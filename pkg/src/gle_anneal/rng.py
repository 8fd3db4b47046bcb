"""Counter-addressed Gaussian noise streams for reproducible parallel runs.

Every simulation step owns a fixed window of raw 64-bit Philox output, and
component ``j`` of a step's noise vector is always built from the same two
words inside that window.  Two consequences:

* the vector drawn for step ``k`` depends only on ``(seed, k)``, never on
  how many steps were drawn before or after;
* a consumer that asks for ``w`` components gets exactly the first ``w``
  components a wider consumer would see, so position-velocity dynamics and
  memory-augmented dynamics driven from the same seed share their first
  ``n`` noise coordinates step by step.
"""

from __future__ import annotations

import numpy as np

WORDS_PER_NORMAL = 2
_INV_2_53 = 2.0 ** -53
_TWO_PI = 2.0 * np.pi


class NoiseStream:
    """Deterministic stream of standard-normal step vectors.

    Parameters
    ----------
    seed:
        64-bit integer key of the underlying Philox generator.
    capacity:
        Largest vector width this stream will ever be asked for.  Streams
        with the same seed but different capacities are *not* aligned; use
        one capacity per experiment (the toolkit uses ``max(2n, m)``).
    """

    def __init__(self, seed: int, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        if seed < 0:
            raise ValueError("seed must be nonnegative")
        self.seed = int(seed)
        self.capacity = int(capacity)
        words = WORDS_PER_NORMAL * self.capacity
        # Philox emits 4 words per counter tick; keep windows tick-aligned.
        self.words_per_step = 4 * ((words + 3) // 4)
        self.counter = 0

    def block(self, start: int, stop: int, width: int) -> np.ndarray:
        """Noise vectors for steps ``start..stop-1`` as a (stop-start, width) array."""
        if not 1 <= width <= self.capacity:
            raise ValueError(f"width {width} outside 1..{self.capacity}")
        if stop <= start:
            return np.empty((0, width))
        bits = np.random.Philox(key=self.seed)
        bits.advance(start * self.words_per_step // 4)
        raw = bits.random_raw((stop - start) * self.words_per_step)
        raw = raw.reshape(stop - start, self.words_per_step)[:, : 2 * width]
        # Box-Muller with a fixed two-word budget per component, so the
        # value of component j never depends on the requested width.
        u1 = ((raw[:, 0::2] >> np.uint64(11)) + np.uint64(1)) * _INV_2_53
        u2 = (raw[:, 1::2] >> np.uint64(11)) * _INV_2_53
        return np.sqrt(-2.0 * np.log(u1)) * np.cos(_TWO_PI * u2)

    def vector(self, k: int, width: int) -> np.ndarray:
        """The noise vector owned by step ``k``."""
        return self.block(k, k + 1, width)[0]

    def draw(self, width: int) -> np.ndarray:
        """Sequential convenience: vector at the internal counter, then advance."""
        out = self.vector(self.counter, width)
        self.counter += 1
        return out
