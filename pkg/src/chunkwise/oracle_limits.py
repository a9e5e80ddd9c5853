"""Enumeration cap shared by every brute-force verifier.

Oracles are exhaustive or absent: when an enumeration would exceed the cap
they abort loudly (GridTooLarge) instead of sampling silently.
"""

from __future__ import annotations

import os

DEFAULT_MAX_ENUM = 5_000_000
ENV_VAR = "CHUNKWISE_MAX_ENUM"


def enumeration_cap() -> int:
    raw = os.environ.get(ENV_VAR)
    if raw is None:
        return DEFAULT_MAX_ENUM
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValueError(f"{ENV_VAR} must be an integer, got {raw!r}") from exc
    if value < 1:
        raise ValueError(f"{ENV_VAR} must be positive")
    return value
