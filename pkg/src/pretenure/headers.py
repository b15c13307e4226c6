"""Packed 64-bit object headers.

Layout, low bit first:

    bits 0-2    lock state (3 bits; 0b101 is the biased-lock pattern)
    bits 3-6    age: collections survived, saturating at 15
    bit  7      unused, always zero
    bits 8-31   identity hash (24 bits)
    bits 32-63  allocation context (32 bits)

The upper 32 bits are shared storage: they hold the allocation context for
profiled objects, and are overwritten with a thread marker when an object
becomes biased-locked.  After that the context is unrecoverable.
"""
from __future__ import annotations

from typing import NamedTuple

LOCK_MASK = 0x7
AGE_SHIFT = 3
AGE_MASK = 0xF
MAX_AGE = 15
HASH_SHIFT = 8
HASH_MASK = 0xFFFFFF
CONTEXT_SHIFT = 32
CONTEXT_MASK = 0xFFFFFFFF
LOW_WORD_MASK = 0xFFFFFFFF

# Lock field value marking a biased lock (lock bits 01 + bias bit set).
BIASED_LOCK_PATTERN = 0b101


class HeaderFields(NamedTuple):
    lock_bits: int
    age: int
    identity_hash: int
    alloc_context: int


def pack_header(lock_bits: int, age: int, identity_hash: int,
                alloc_context: int) -> int:
    """Assemble a header word; every field is range-checked."""
    if not 0 <= lock_bits <= LOCK_MASK:
        raise ValueError(f"lock_bits out of range: {lock_bits}")
    if not 0 <= age <= MAX_AGE:
        raise ValueError(f"age out of range: {age}")
    if not 0 <= identity_hash <= HASH_MASK:
        raise ValueError(f"identity_hash out of range: {identity_hash}")
    if not 0 <= alloc_context <= CONTEXT_MASK:
        raise ValueError(f"alloc_context out of range: {alloc_context}")
    return (lock_bits
            | (age << AGE_SHIFT)
            | (identity_hash << HASH_SHIFT)
            | (alloc_context << CONTEXT_SHIFT))


def unpack_header(word: int) -> HeaderFields:
    return HeaderFields(
        lock_bits=word & LOCK_MASK,
        age=(word >> AGE_SHIFT) & AGE_MASK,
        identity_hash=(word >> HASH_SHIFT) & HASH_MASK,
        alloc_context=(word >> CONTEXT_SHIFT) & CONTEXT_MASK,
    )


def install_context(word: int, alloc_context: int) -> int:
    """Replace bits 32-63 with the allocation context; bits 0-31 untouched."""
    if not 0 <= alloc_context <= CONTEXT_MASK:
        raise ValueError(f"alloc_context out of range: {alloc_context}")
    return (word & LOW_WORD_MASK) | (alloc_context << CONTEXT_SHIFT)


def header_age(word: int) -> int:
    return (word >> AGE_SHIFT) & AGE_MASK


def with_age(word: int, age: int) -> int:
    if not 0 <= age <= MAX_AGE:
        raise ValueError(f"age out of range: {age}")
    return (word & ~(AGE_MASK << AGE_SHIFT)) | (age << AGE_SHIFT)


def header_context(word: int) -> int:
    return (word >> CONTEXT_SHIFT) & CONTEXT_MASK


def header_identity_hash(word: int) -> int:
    return (word >> HASH_SHIFT) & HASH_MASK


def header_lock_bits(word: int) -> int:
    return word & LOCK_MASK


def bias_lock_header(word: int, thread_id: int) -> int:
    """Header after biased-locking: lock pattern set, upper word becomes a
    thread marker.  Idempotent for a fixed thread."""
    low = (word & LOW_WORD_MASK & ~LOCK_MASK) | BIASED_LOCK_PATTERN
    return ((thread_id & CONTEXT_MASK) << CONTEXT_SHIFT) | low
