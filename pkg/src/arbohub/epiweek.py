"""Sunday-based epidemiological week calendar.

Weeks run Sunday through Saturday. Week 1 of a year is the week whose
Saturday is the first Saturday of January falling at least four days into
the year; January dates earlier than that belong to the last week (52 or
53) of the previous year. On the wire a week is the integer YYYYWW.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, timedelta

__all__ = ["EpiWeek", "epiweek_from_date", "epiweek_to_start_date", "weeks_in_year"]


def _sunday_weekday(d: date) -> int:
    """Day of week with Sunday = 0 .. Saturday = 6."""
    return (d.weekday() + 1) % 7


def _week1_sunday(year: int) -> date:
    """Sunday opening epidemiological week 1 of ``year``."""
    jan1 = date(year, 1, 1)
    dow = _sunday_weekday(jan1)
    sunday = jan1 - timedelta(days=dow)
    # The Saturday of the week containing Jan 1 falls (7 - dow) days into
    # January; the week counts as week 1 only when that is at least the 4th.
    if 7 - dow >= 4:
        return sunday
    return sunday + timedelta(days=7)


def weeks_in_year(year: int) -> int:
    """Number of epidemiological weeks (52 or 53) in ``year``."""
    return (_week1_sunday(year + 1) - _week1_sunday(year)).days // 7


@dataclass(frozen=True, order=True)
class EpiWeek:
    """One epidemiological week, ordered chronologically."""

    year: int
    week: int

    def __post_init__(self) -> None:
        last = weeks_in_year(self.year)
        if not 1 <= self.week <= last:
            raise ValueError(
                f"week {self.week} out of range 1..{last} for year {self.year}"
            )

    @classmethod
    def from_int(cls, encoded: int) -> "EpiWeek":
        """Decode the wire form YYYYWW."""
        return cls(encoded // 100, encoded % 100)

    def to_int(self) -> int:
        """Encode as the wire form YYYYWW."""
        return self.year * 100 + self.week

    @property
    def start_date(self) -> date:
        return epiweek_to_start_date(self)

    def __str__(self) -> str:
        return f"{self.year}W{self.week:02d}"


def epiweek_from_date(d: date) -> EpiWeek:
    """Epidemiological week containing ``d``.

    Total over valid Gregorian dates: late-December dates may map into
    week 1 of the following year, early-January dates into the last week
    of the previous year.
    """
    for year in (d.year + 1, d.year, d.year - 1):
        start = _week1_sunday(year)
        if d >= start:
            return EpiWeek(year, (d - start).days // 7 + 1)
    raise AssertionError(f"no epidemiological week found for {d}")


def epiweek_to_start_date(w: EpiWeek) -> date:
    """The Sunday opening week ``w``; inverse of epiweek_from_date on Sundays."""
    return _week1_sunday(w.year) + timedelta(weeks=w.week - 1)
