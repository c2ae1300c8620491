"""Deterministic sub-seed derivation.

Every random component (modulator rows, filters, mixers, masks, trial
instances) draws from its own generator, derived from a master seed plus a
component tag and optional indices.  Nothing touches numpy's global RNG, so
runs are reproducible and components stay independent of evaluation order.
"""

from __future__ import annotations

import zlib

import numpy as np

__all__ = ["sub_seed", "sub_rng", "seed_to_int"]


def _as_entropy(part) -> int:
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    return int(part) & 0xFFFFFFFFFFFFFFFF


def sub_seed(*parts) -> np.random.SeedSequence:
    """Build a SeedSequence from a mix of integers and string tags."""
    return np.random.SeedSequence([_as_entropy(p) for p in parts])


def sub_rng(*parts) -> np.random.Generator:
    """Generator seeded by ``sub_seed(*parts)``."""
    return np.random.default_rng(sub_seed(*parts))


def seed_to_int(*parts) -> int:
    """Collapse a derived seed to one printable integer (for CSV rows).

    The integer alone reproduces the trial: feed it back through
    ``sub_rng(value, ...)``.
    """
    return int(sub_seed(*parts).generate_state(1, np.uint64)[0])
