"""ULID generation: time-ordered, collision-resistant document ids."""

import secrets
import time

_CROCKFORD = "0123456789ABCDEFGHJKMNPQRSTVWXYZ"


def _encode(value: int, length: int) -> str:
    chars = []
    for _ in range(length):
        chars.append(_CROCKFORD[value & 0x1F])
        value >>= 5
    return "".join(reversed(chars))


def new_ulid(timestamp_ms: int | None = None) -> str:
    """26-character ULID: 48-bit millisecond timestamp + 80 random bits."""
    if timestamp_ms is None:
        timestamp_ms = time.time_ns() // 1_000_000
    return _encode(timestamp_ms & ((1 << 48) - 1), 10) + _encode(
        secrets.randbits(80), 16)
