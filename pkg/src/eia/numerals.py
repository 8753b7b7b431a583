"""Decimal conversion for integers of any size.

Python refuses ``str``/``int`` conversions beyond a few thousand digits unless
the interpreter-wide limit is raised; these helpers avoid the limit without
touching global state.
"""

from __future__ import annotations

from functools import lru_cache

_CHUNK = 1000  # digits converted directly


@lru_cache(maxsize=None)
def _pow10(k: int) -> int:
    return 10 ** k


def to_decimal(n: int) -> str:
    if n < 0:
        return "-" + to_decimal(-n)
    if n < _pow10(_CHUNK):
        return str(n)
    k = _CHUNK
    while _pow10(2 * k) <= n:
        k *= 2
    hi, lo = divmod(n, _pow10(k))
    return to_decimal(hi) + to_decimal(lo).rjust(k, "0")


def from_decimal(s: str) -> int:
    if s.startswith("-"):
        return -from_decimal(s[1:])
    if len(s) <= _CHUNK:
        return int(s)
    k = _CHUNK
    while 2 * k < len(s):
        k *= 2
    return from_decimal(s[:-k]) * _pow10(k) + from_decimal(s[-k:])
