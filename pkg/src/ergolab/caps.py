"""Resource caps, overridable through the ``ERGOLAB_CAP`` environment variable.

``ERGOLAB_CAP`` is either a single integer, which replaces the dimension cap
(maximum ``2**w`` for exact tensor computations), or a comma separated list of
``name=value`` pairs, e.g. ``dim=8192,levels=2000000,stages=40``.
"""

from __future__ import annotations

import os

from .errors import InvalidParameterError

DEFAULTS = {
    "dim": 4096,        # largest tensor dimension 2**w handled exactly
    "levels": 1_000_000,  # largest tower height built by the rank-one engine
    "stages": 64,       # largest number of construction stages
}


def caps() -> dict[str, int]:
    out = dict(DEFAULTS)
    raw = os.environ.get("ERGOLAB_CAP", "").strip()
    if not raw:
        return out
    if raw.isdigit():
        out["dim"] = int(raw)
        return out
    for item in raw.split(","):
        name, _, value = item.partition("=")
        name = name.strip()
        if name not in out or not value.strip().isdigit():
            raise InvalidParameterError(f"bad ERGOLAB_CAP entry {item!r}")
        out[name] = int(value)
    return out


def cap(name: str) -> int:
    return caps()[name]
