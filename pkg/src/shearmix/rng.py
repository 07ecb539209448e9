"""Counter-based random streams.

Every random quantity in the package is addressed by ``(seed, label, sample)``
and, for map parameters, a step index.  The stream is a Philox-4x64 generator
whose key is derived from that triple, so an ensemble member can be
regenerated in isolation and results do not depend on scheduling order.
"""
from __future__ import annotations

import zlib

import numpy as np

_TWO_POW_M53 = 2.0 ** -53


def _label_code(label: str) -> int:
    return zlib.crc32(label.encode("utf-8"))


def stream_key(seed: int, label: str, sample: int) -> np.ndarray:
    """Two-word Philox key for the stream ``(seed, label, sample)``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(_label_code(label), int(sample)))
    return ss.generate_state(2, dtype=np.uint64)


def generator(seed: int, label: str, sample: int = 0) -> np.random.Generator:
    """A numpy ``Generator`` on the stream ``(seed, label, sample)``."""
    return np.random.Generator(np.random.Philox(key=stream_key(seed, label, sample)))


def raw_to_open_unit(raw: np.ndarray) -> np.ndarray:
    """Map uint64 words to doubles strictly inside (0, 1)."""
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * _TWO_POW_M53


def uniform_blocks(seed: int, label: str, sample: int, n_blocks: int, start: int = 0) -> np.ndarray:
    """Philox blocks ``start .. start+n_blocks-1`` as an ``(n_blocks, 4)`` array in (0, 1).

    Block ``j`` depends only on ``(seed, label, sample, j)``; it is the same
    whether it is drawn alone or as part of a longer run.
    """
    if n_blocks <= 0:
        return np.empty((0, 4))
    bitgen = np.random.Philox(key=stream_key(seed, label, sample), counter=int(start))
    raw = bitgen.random_raw(4 * n_blocks)
    return raw_to_open_unit(raw).reshape(n_blocks, 4)


class StepStream:
    """Handle on a single map step's random block."""

    __slots__ = ("seed", "sample", "step", "label")

    def __init__(self, seed: int, sample: int, step: int, label: str = "maps"):
        self.seed = int(seed)
        self.sample = int(sample)
        self.step = int(step)
        self.label = label

    def block(self) -> np.ndarray:
        return uniform_blocks(self.seed, self.label, self.sample, 1, start=self.step)[0]

    def __repr__(self) -> str:
        return f"StepStream(seed={self.seed}, sample={self.sample}, step={self.step}, label={self.label!r})"
