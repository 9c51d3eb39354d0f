"""Stable seed derivation so every document can be generated independently."""

import hashlib
import random


def derive_seed(master_seed, *parts):
    """64-bit seed from the master seed and an arbitrary key path."""
    key = "/".join([str(master_seed), *map(str, parts)]).encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "big")


def child_rng(master_seed, *parts):
    return random.Random(derive_seed(master_seed, *parts))


def unit_offset(master_seed, tag):
    """Deterministic offset in [0, 1) used to start a low-discrepancy sequence."""
    return derive_seed(master_seed, tag) / 2**64


def weyl_point(index, alpha, offset):
    """index-th point of the additive recurrence frac(offset + index * alpha)."""
    return (offset + index * alpha) % 1.0
