"""Authentication keys AK = h(ID, C) and counter-based stretching.

``h`` is SHA-256 over the big-endian identity bytes followed by the
big-endian counter bytes, truncated to the first ``n`` bits (bit 0 is the
most significant bit of the first digest byte). The hash is injectable via
the ``hash_fn`` argument for other keyed constructions.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Callable

from .errors import CapacityError, InvalidArgument

DIGEST_BITS = 256
DEFAULT_ID_BITS = 64
DEFAULT_COUNTER_BITS = 64

HashFn = Callable[[bytes], bytes]


def _sha256(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


@dataclass(frozen=True)
class IdentityNumber:
    value: int
    length: int = DEFAULT_ID_BITS

    def __post_init__(self):
        if self.length < 1:
            raise InvalidArgument("identity length must be positive")
        if not 0 <= self.value < (1 << self.length):
            raise InvalidArgument(f"identity {self.value:#x} does not fit in {self.length} bits")

    @classmethod
    def from_hex(cls, text: str, length: int = DEFAULT_ID_BITS) -> "IdentityNumber":
        try:
            value = int(text, 16)
        except ValueError:
            raise InvalidArgument(f"identity is not hex: {text!r}") from None
        return cls(value, length)

    def to_bytes(self) -> bytes:
        return self.value.to_bytes((self.length + 7) // 8, "big")

    def hex(self) -> str:
        return self.to_bytes().hex()


@dataclass(frozen=True)
class Counter:
    value: int
    length: int = DEFAULT_COUNTER_BITS

    def __post_init__(self):
        if self.length < 1:
            raise InvalidArgument("counter length must be positive")
        if not 0 <= self.value < (1 << self.length):
            raise CapacityError(f"counter {self.value} does not fit in {self.length} bits")

    def to_bytes(self) -> bytes:
        return self.value.to_bytes((self.length + 7) // 8, "big")

    def advanced(self, steps: int = 1) -> "Counter":
        return Counter(self.value + steps, self.length)


@dataclass(frozen=True)
class AuthKey:
    bits: tuple[int, ...]

    def __len__(self):
        return len(self.bits)

    def __getitem__(self, i):
        return self.bits[i]

    def __iter__(self):
        return iter(self.bits)

    def bitstring(self) -> str:
        return "".join(map(str, self.bits))

    def hex(self) -> str:
        """Bits packed MSB-first, the last byte zero-padded on the right."""
        return bits_to_bytes(self.bits).hex()


def bytes_to_bits(data: bytes, n: int) -> tuple[int, ...]:
    if n > 8 * len(data):
        raise InvalidArgument(f"asked for {n} bits from {len(data)} bytes")
    return tuple((data[i // 8] >> (7 - i % 8)) & 1 for i in range(n))


def bits_to_bytes(bits) -> bytes:
    out = bytearray((len(bits) + 7) // 8)
    for i, b in enumerate(bits):
        if b:
            out[i // 8] |= 0x80 >> (i % 8)
    return bytes(out)


def derive_key(id: IdentityNumber, c: Counter, n: int, hash_fn: HashFn = _sha256) -> AuthKey:
    """First ``n`` bits of ``hash_fn(id || c)``, 0 <= n <= 256."""
    if not 0 <= n <= DIGEST_BITS:
        raise InvalidArgument(f"key length {n} outside 0..{DIGEST_BITS}; use extend_key")
    digest = hash_fn(id.to_bytes() + c.to_bytes())
    return AuthKey(bytes_to_bits(digest, n))


def blocks_needed(needed: int) -> int:
    return -(-needed // DIGEST_BITS)


def extend_key(id: IdentityNumber, start: Counter, needed: int, hash_fn: HashFn = _sha256) -> AuthKey:
    """Concatenate full-length keys for counters start, start+1, ... and
    truncate to ``needed`` bits."""
    if needed < 1:
        raise InvalidArgument("needed must be at least 1")
    blocks = blocks_needed(needed)
    if start.value + blocks >= (1 << start.length):
        raise CapacityError(
            f"counter space exhausted: {blocks} blocks from {start.value} in {start.length} bits")
    bits: list[int] = []
    for j in range(blocks):
        bits.extend(derive_key(id, start.advanced(j), DIGEST_BITS, hash_fn).bits)
    return AuthKey(tuple(bits[:needed]))
