from __future__ import annotations

import random
import secrets


def stream(seed: int, *path: object) -> random.Random:
    """Independent, reproducible generator for ``(seed, *path)``.

    String seeds are hashed with SHA-512 by :class:`random.Random`, so the
    stream for iteration ``k`` does not depend on how much randomness earlier
    iterations consumed.
    """
    return random.Random("/".join(str(p) for p in (seed, *path)))


def entropy_seed() -> int:
    return secrets.randbits(32)
