"""Counter-based deterministic random streams, one per processing element.

Draw i of stream k is ``finalize(key_k + i * GOLDEN)`` where finalize is
the splitmix64 output mix and GOLDEN is 2**64 / phi rounded to odd.
Stream keys are derived as

    key_k = finalize(finalize(seed) ^ finalize((k + 1) * GOLDEN))

so streams are decorrelated across both seeds and stream indices.
Because draws are pure functions of (key, position), a batch engine can
evaluate many streams' next draws in one vectorized call and a threaded
engine can evaluate the same draws independently, and both see
identical values at identical positions.  That is the property the
whole reproducibility story hangs on; nothing here is stateful beyond
the per-stream position cursor.

Uniform floats take the top 53 bits, so they lie in [0, 1).  Normal
magnitudes come from a Box-Muller cosine branch on two uniforms.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15

_U64_GOLDEN = np.uint64(GOLDEN)
_TWO_NEG53 = 2.0 ** -53


def mix64(x: int) -> int:
    """Splitmix64 finalizer on a plain int (mod 2**64)."""
    x &= MASK64
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & MASK64
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & MASK64
    x ^= x >> 31
    return x


def _mix64_array(x: np.ndarray) -> np.ndarray:
    x = x.astype(np.uint64, copy=True)
    x ^= x >> np.uint64(30)
    x *= np.uint64(0xBF58476D1CE4E5B9)
    x ^= x >> np.uint64(27)
    x *= np.uint64(0x94D049BB133111EB)
    x ^= x >> np.uint64(31)
    return x


def stream_key(seed: int, stream_id: int) -> int:
    return mix64(mix64(seed) ^ mix64(((stream_id + 1) * GOLDEN) & MASK64))


def raw_draw(key: int, position: int) -> int:
    """The position-th 64-bit value of the stream with this key."""
    return mix64((key + position * GOLDEN) & MASK64)


def to_unit(values: np.ndarray) -> np.ndarray:
    """Map uint64 draws to float64 uniforms in [0, 1)."""
    return (values >> np.uint64(11)).astype(np.float64) * _TWO_NEG53


def to_index(values: np.ndarray, bound: int) -> np.ndarray:
    """Map uint64 draws to int64 indices uniform over [0, bound)."""
    return (to_unit(values) * bound).astype(np.int64)


def normal_magnitudes(u1: np.ndarray, u2: np.ndarray) -> np.ndarray:
    """|N(0, 1)| from paired uniforms via Box-Muller's cosine branch."""
    r = np.sqrt(-2.0 * np.log1p(-u1))
    return np.abs(r * np.cos(2.0 * np.pi * u2))


class StreamBank:
    """Position cursors for a whole grid's worth of streams.

    Stream ids 0..n_streams-1; callers reserve whatever convention they
    like (the engine uses one stream per PE plus one for transport).
    """

    def __init__(self, seed: int, n_streams: int) -> None:
        self.seed = seed
        self.keys = np.array(
            [stream_key(seed, k) for k in range(n_streams)], dtype=np.uint64
        )
        self.positions = np.zeros(n_streams, dtype=np.uint64)

    def draw(self, streams: np.ndarray | slice, count: int) -> np.ndarray:
        """Next ``count`` values from each selected stream.

        Returns shape (n_selected, count); advances only the selected
        cursors.  Values match scalar :func:`raw_draw` at the same
        positions exactly.
        """
        keys = self.keys[streams]
        pos = self.positions[streams]
        offsets = np.arange(count, dtype=np.uint64)
        states = keys[:, None] + (pos[:, None] + offsets[None, :]) * _U64_GOLDEN
        self.positions[streams] = pos + np.uint64(count)
        return _mix64_array(states)

    def draw_one(self, stream: int, count: int) -> np.ndarray:
        """Next ``count`` values from a single stream, shape (count,)."""
        return self.draw(np.array([stream]), count)[0]


class ScalarStream:
    """Sequential view of one stream; used by the threaded engine."""

    def __init__(self, seed: int, stream_id: int) -> None:
        self.key = stream_key(seed, stream_id)
        self.position = 0

    def draw(self, count: int) -> np.ndarray:
        out = np.empty(count, dtype=np.uint64)
        for i in range(count):
            out[i] = raw_draw(self.key, self.position + i)
        self.position += count
        return out
