"""Reproducible per-edge randomness: Poisson clocks and attached walks.

Every stream is addressed by a key (edge, stream kind, walk index) and a
counter, and is derived from the master seed with keyed BLAKE2b in counter
mode.  Streams for distinct keys are independent, any position of any
stream can be regenerated without touching the others, and two systems
built from the same master seed are indistinguishable.  This is what makes
exact couplings between dynamics possible: the same (edge, ring index)
always yields the same ring time and the same walk.
"""

from __future__ import annotations

import hashlib
import struct

import numpy as np

from .lattice import Edge, Site

_KIND_CLOCK = 0
_KIND_WALK = 1

# One digest is 64 bytes: 8 exponential gaps or 512 walk bits.
_GAPS_PER_BLOCK = 8
_BITS_PER_BLOCK = 512
_U53 = float(2.0**-53)


def _edge_tag(e: Edge) -> bytes:
    (la, lb), (ua, ub) = e
    step = (ua - la, ub - lb)
    if step == (1, 0):
        direction = 0
    elif step == (0, 1):
        direction = 1
    else:
        raise ValueError(f"not a directed edge: {e}")
    return struct.pack("<qqB", la, lb, direction)


class HarrisSystem:
    """Keyed source of per-edge clock times and per-edge walk sequences."""

    def __init__(self, master_seed: int):
        self.master_seed = int(master_seed)
        self._key = (self.master_seed & 0xFFFFFFFFFFFFFFFF).to_bytes(8, "little")

    def _digest(self, tag: bytes, block: int) -> bytes:
        return hashlib.blake2b(
            tag + struct.pack("<Q", block), key=self._key, digest_size=64
        ).digest()

    def _words(self, tag: bytes, first_block: int, nblocks: int) -> np.ndarray:
        raw = b"".join(self._digest(tag, first_block + i) for i in range(nblocks))
        return np.frombuffer(raw, dtype="<u8")

    # -- clocks ---------------------------------------------------------

    def _gap_blocks(self, e: Edge, first_block: int, nblocks: int) -> np.ndarray:
        """i.i.d. exponential(1) inter-ring gaps, 8 per block."""
        words = self._words(_edge_tag(e) + bytes([_KIND_CLOCK]), first_block, nblocks)
        u = (words >> np.uint64(11)).astype(np.float64) * _U53  # in [0, 1)
        return -np.log1p(-u)

    def clock_times(self, e: Edge, horizon: float) -> list[float]:
        """All ring times of the edge's unit-rate Poisson clock in [0, horizon]."""
        if horizon < 0:
            raise ValueError("horizon must be nonnegative")
        times: list[float] = []
        t = 0.0
        block = 0
        while True:
            gaps = self._gap_blocks(e, block, 4)
            cum = t + np.cumsum(gaps)
            if cum[-1] > horizon:
                keep = np.searchsorted(cum, horizon, side="right")
                times.extend(cum[:keep].tolist())
                return times
            times.extend(cum.tolist())
            t = float(cum[-1])
            block += 4

    def clock_cursor(self, e: Edge) -> "ClockCursor":
        return ClockCursor(self, e)

    # -- walks ----------------------------------------------------------

    def walk_bits(self, e: Edge, k: int, n: int) -> np.ndarray:
        """First ``n`` steps of the k-th walk at edge ``e`` as a 0/1 array.

        Bit 1 encodes a step of (1, 0), bit 0 a step of (0, 1); both carry
        probability one half.  ``k`` counts rings of the edge from 1.
        """
        if k < 1:
            raise ValueError("walk index k starts at 1")
        if n == 0:
            return np.zeros(0, dtype=np.uint8)
        tag = _edge_tag(e) + bytes([_KIND_WALK]) + struct.pack("<Q", k)
        nblocks = -(-n // _BITS_PER_BLOCK)
        raw = b"".join(self._digest(tag, i) for i in range(nblocks))
        bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8))
        return bits[:n]

    def walk_steps(self, e: Edge, k: int, n: int) -> list[Site]:
        """First ``n`` increments of the k-th upward walk attached to ``e``."""
        return [(1, 0) if b else (0, 1) for b in self.walk_bits(e, k, n)]


class ClockCursor:
    """Sequential view of one edge's ring times.

    Keeps only the running (index, time) state plus a small buffer of
    upcoming gaps, so arbitrarily many edges can be tracked cheaply.
    """

    __slots__ = ("_sys", "_edge", "_block", "_buf", "_pos", "index", "time")

    def __init__(self, system: HarrisSystem, e: Edge):
        self._sys = system
        self._edge = e
        self._block = 0
        self._buf = np.zeros(0)
        self._pos = 0
        self.index = 0  # rings consumed so far
        self.time = 0.0  # time of ring ``index`` (0.0 before the first)

    def _refill(self):
        self._buf = self._sys._gap_blocks(self._edge, self._block, 4)
        self._block += 4
        self._pos = 0

    def next(self) -> tuple[float, int]:
        """Advance to the next ring; returns (time, 1-based ring index)."""
        if self._pos >= len(self._buf):
            self._refill()
        self.time += float(self._buf[self._pos])
        self._pos += 1
        self.index += 1
        return self.time, self.index

    def first_after(self, t: float) -> tuple[float, int]:
        """First ring strictly after time ``t`` (consuming earlier rings)."""
        while True:
            if self._pos >= len(self._buf):
                self._refill()
            rest = self._buf[self._pos :]
            cum = self.time + np.cumsum(rest)
            hit = np.searchsorted(cum, t, side="right")
            if hit < len(cum):
                self.time = float(cum[hit])
                self.index += hit + 1
                self._pos += hit + 1
                return self.time, self.index
            self.time = float(cum[-1])
            self.index += len(rest)
            self._pos = len(self._buf)
