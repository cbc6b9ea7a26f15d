"""Day-granularity timestamps used for retention deadlines.

A timestamp is a natural number of days since the Unix epoch; the concrete
syntax everywhere (policy text, scenario files, CLI output) is DD/MM/YYYY.
The total order coincides with calendar order.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import date, timedelta

from .errors import ValidationError

_EPOCH = date(1970, 1, 1)
_DATE_RE = re.compile(r"^(\d{2})/(\d{2})/(\d{4})$")


@dataclass(frozen=True, order=True)
class Timestamp:
    days: int

    def __post_init__(self):
        if self.days < 0:
            raise ValidationError(f"timestamp must not precede {_EPOCH.isoformat()}: {self.days}")

    @classmethod
    def parse(cls, text: str) -> "Timestamp":
        m = _DATE_RE.match(text.strip())
        if not m:
            raise ValidationError(f"not a DD/MM/YYYY date: {text!r}")
        day, month, year = (int(g) for g in m.groups())
        try:
            d = date(year, month, day)
        except ValueError as exc:
            raise ValidationError(f"invalid calendar date {text!r}: {exc}") from exc
        return cls((d - _EPOCH).days)

    @classmethod
    def from_date(cls, d: date) -> "Timestamp":
        return cls((d - _EPOCH).days)

    def to_date(self) -> date:
        return _EPOCH + timedelta(days=self.days)

    def __str__(self) -> str:
        return self.to_date().strftime("%d/%m/%Y")


def looks_like_date(text: str) -> bool:
    return bool(_DATE_RE.match(text))
