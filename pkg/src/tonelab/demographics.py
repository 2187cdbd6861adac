"""Demographic ingestion and the fixed ethno-racial category mapping.

Self-reported race and ethnicity combine into a single closed category set
through a fixed mapping table: any Hispanic/Latino ethnicity takes
precedence, then the race groups with their own category, everything else
collapses to Other. Analysis populations drop Other and unspecified-gender
records (small strata), with the removals reported.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable

RACES = ("Asian", "Black", "Hispanic", "White", "Other")
GENDERS = ("Female", "Male", "Unspecified")

# raw self-report -> combined category
_HISPANIC_ETHNICITIES = {"hispanic", "latino", "hispanic or latino"}
_RACE_TABLE = {
    "white": "White",
    "black": "Black",
    "black or african american": "Black",
    "asian": "Asian",
}


class DemographicsFormatError(ValueError):
    def __init__(self, row: int, message: str):
        super().__init__(f"row {row}: {message}")
        self.row = row


@dataclass(frozen=True)
class Demographics:
    person_id: str
    race: str
    gender: str
    age_bin: str = ""
    location: str = ""

    def __post_init__(self):
        if self.race not in RACES:
            raise ValueError(f"race {self.race!r} not one of {RACES}")
        if self.gender not in GENDERS:
            raise ValueError(f"gender {self.gender!r} not one of {GENDERS}")


def map_census_category(race_raw: str, ethnicity_raw: str) -> str:
    """Combine raw race and ethnicity into one closed category."""
    if ethnicity_raw.strip().lower() in _HISPANIC_ETHNICITIES:
        return "Hispanic"
    return _RACE_TABLE.get(race_raw.strip().lower(), "Other")


def _norm_gender(raw: str) -> str:
    g = raw.strip().lower()
    if g == "female":
        return "Female"
    if g == "male":
        return "Male"
    return "Unspecified"


CSV_HEADER = ["person_id", "race", "ethnicity", "gender", "age_bin", "location"]


def ingest_demographics(source) -> dict[str, Demographics]:
    """Read a demographics CSV into a mapping keyed by person id.

    Raw race and ethnicity columns are combined through the fixed mapping;
    genders other than Female/Male become Unspecified.
    """
    if hasattr(source, "read"):
        return _ingest(source)
    with open(source, newline="") as fh:
        return _ingest(fh)


def _ingest(fh) -> dict[str, Demographics]:
    reader = csv.DictReader(fh)
    if reader.fieldnames is None or [c.strip() for c in reader.fieldnames[:6]] != CSV_HEADER:
        raise DemographicsFormatError(1, f"header must start with {','.join(CSV_HEADER)}")
    out: dict[str, Demographics] = {}
    for rownum, row in enumerate(reader, start=2):
        pid = (row.get("person_id") or "").strip()
        if not pid:
            raise DemographicsFormatError(rownum, "empty person_id")
        if pid in out:
            raise DemographicsFormatError(rownum, f"duplicate person_id {pid}")
        out[pid] = Demographics(
            person_id=pid,
            race=map_census_category(row.get("race") or "", row.get("ethnicity") or ""),
            gender=_norm_gender(row.get("gender") or ""),
            age_bin=(row.get("age_bin") or "").strip(),
            location=(row.get("location") or "").strip(),
        )
    return out


@dataclass
class FilterReport:
    kept: dict[str, Demographics]
    removed: list[tuple[str, str]]  # (person_id, reason)

    @property
    def n_removed(self) -> int:
        return len(self.removed)


def filter_analysis_population(demos: Iterable[Demographics]) -> FilterReport:
    """Drop Other-race and unspecified-gender records, reporting each removal."""
    kept: dict[str, Demographics] = {}
    removed: list[tuple[str, str]] = []
    for d in demos:
        if d.race == "Other":
            removed.append((d.person_id, "race Other"))
        elif d.gender == "Unspecified":
            removed.append((d.person_id, "gender unspecified"))
        else:
            kept[d.person_id] = d
    return FilterReport(kept, removed)
