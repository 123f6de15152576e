"""Helpers for YYYY-MM month arithmetic.

Months are handled as plain strings everywhere in the pipeline; these
helpers validate the format and provide ordering and inclusive ranges.
"""

from __future__ import annotations

import re

from .errors import ConfigurationError

_MONTH_RE = re.compile(r"^(\d{4})-(\d{2})$")


def parse_month(month: str) -> tuple[int, int]:
    """Return (year, month) for a 'YYYY-MM' string, validating both parts."""
    m = _MONTH_RE.match(month)
    if not m:
        raise ConfigurationError(f"bad month {month!r}, expected YYYY-MM")
    year, mon = int(m.group(1)), int(m.group(2))
    if not 1 <= mon <= 12:
        raise ConfigurationError(f"bad month {month!r}, month part out of range")
    return year, mon


def month_index(month: str) -> int:
    """Months since 0000-01; gives a total order and difference in months."""
    year, mon = parse_month(month)
    return year * 12 + (mon - 1)


def month_range(start: str, end: str) -> list[str]:
    """Inclusive list of months from start to end."""
    lo, hi = month_index(start), month_index(end)
    if hi < lo:
        raise ConfigurationError(f"month range {start}..{end} is reversed")
    return [f"{i // 12:04d}-{i % 12 + 1:02d}" for i in range(lo, hi + 1)]


def add_months(month: str, n: int) -> str:
    i = month_index(month) + n
    return f"{i // 12:04d}-{i % 12 + 1:02d}"


def ranges_overlap(a: tuple[str, str], b: tuple[str, str]) -> bool:
    return month_index(a[0]) <= month_index(b[1]) and month_index(b[0]) <= month_index(a[1])
