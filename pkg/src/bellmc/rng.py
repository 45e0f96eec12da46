"""Counter-based random streams for reproducible parallel sampling.

Every run owns a Philox-4x64 key derived by hashing (master seed, run
label).  Event ``i`` of that run reads a fixed window of the key's counter
space: blocks ``2*i + 1`` and ``2*i + 2``, i.e. eight 64-bit words, turned
into eight uniform doubles.  Because the mapping from event index to
counter block is static, any chunking of the event range — serial, chunked
across threads, or chunked differently on another backend — consumes
exactly the same words for the same event and reproduces results bit for
bit.

numpy's ``Philox`` bit generator increments its counter before producing a
block, so a generator constructed with ``counter=2*start`` emits blocks
``2*start + 1, 2*start + 2, ...``, exactly the windows of events
``start, start + 1, ...``.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

# Per-event uniform slot layout (positional; unused slots are simply not
# read, which keeps every event's stream length fixed at 8 doubles):
#   0: polarization angle
#   1, 2: transverse source position
#   3, 4: emission direction within the cone
#   5: device-1 outcome draw (or the joint outcome draw in the
#      entangled-reference sampler)
#   6: device-2 outcome draw
#   7: reserved
UNIFORMS_PER_EVENT = 8
BLOCKS_PER_EVENT = 2

_KEY_BYTES = 16


def stream_key(master_seed: int, label: str) -> int:
    """Derive the 128-bit Philox key for one labelled run of a seed."""
    payload = f"{master_seed}/{label}".encode("utf-8")
    digest = hashlib.sha256(payload).digest()
    return int.from_bytes(digest[:_KEY_BYTES], "little")


def key_words(key: int) -> tuple[int, int]:
    """Split a 128-bit key into (low, high) 64-bit words."""
    mask = (1 << 64) - 1
    return key & mask, (key >> 64) & mask


def event_uniforms(key: int, start: int, stop: int) -> np.ndarray:
    """Uniform doubles for events ``start <= i < stop``, shape (n, 8).

    Row ``i - start`` holds the eight uniforms of event ``i`` regardless of
    how the range is chunked.
    """
    if stop < start:
        raise ValueError(f"empty event range [{start}, {stop})")
    n = stop - start
    bitgen = np.random.Philox(key=key, counter=BLOCKS_PER_EVENT * start)
    gen = np.random.Generator(bitgen)
    return gen.random((n, UNIFORMS_PER_EVENT), dtype=np.float64)


@dataclass(frozen=True)
class EventStream:
    """Handle on one event's slice of a run's random stream."""

    key: int
    index: int

    def uniforms(self) -> np.ndarray:
        return event_uniforms(self.key, self.index, self.index + 1)[0]
