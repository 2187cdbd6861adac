"""Colorimeter reading ingestion and bilateral averaging.

Readings arrive as CSV rows, one reading per row, either as raw sensor sRGB
triples or as pre-converted CIELAB values (some instruments convert
internally, so both are accepted). Each subject contributes up to four
readings: left and right of the hand and face sites. The two sides of a
site average to that site's tone, and the mean across subjects of the
left-right color difference gives the floor on achievable human rating
error.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable

from .color import LabColor, PolarTone, RgbColor, delta_e, polar_of, srgb_to_lab

SITES = ("hand", "face")
SIDES = ("left", "right")
SPACES = ("srgb", "lab")

CSV_HEADER = ["subject_id", "site", "side", "space", "c1", "c2", "c3"]


class MeasurementFormatError(ValueError):
    """A measurement CSV row failed validation; carries the 1-based row number."""

    def __init__(self, row: int, message: str):
        super().__init__(f"row {row}: {message}")
        self.row = row


class IncompleteBilateralError(ValueError):
    """An operation needing both sides of a site found only one."""


@dataclass(frozen=True)
class MeasurementRecord:
    """One colorimeter reading of one side of one site.

    Carries exactly one color representation: the raw sensor sRGB triple or
    a pre-converted CIELAB value.
    """

    subject_id: str
    site: str
    side: str
    color: LabColor | RgbColor
    captured_at: str | None = None

    @property
    def lab(self) -> LabColor:
        if isinstance(self.color, LabColor):
            return self.color
        return srgb_to_lab(self.color)


@dataclass(frozen=True)
class SubjectTone:
    """Per-subject tones: the bilateral average of each measured site."""

    subject_id: str
    face: LabColor | None
    hand: LabColor | None

    @property
    def face_polar(self) -> PolarTone | None:
        return polar_of(self.face) if self.face is not None else None

    @property
    def hand_polar(self) -> PolarTone | None:
        return polar_of(self.hand) if self.hand is not None else None

    def tone(self, site: str) -> LabColor:
        value = {"face": self.face, "hand": self.hand}[site]
        if value is None:
            raise IncompleteBilateralError(
                f"subject {self.subject_id} has no complete {site} average"
            )
        return value


@dataclass(frozen=True)
class IncompleteSite:
    subject_id: str
    site: str
    missing_side: str


@dataclass
class BilateralAverages:
    tones: list[SubjectTone]
    incomplete: list[IncompleteSite]

    def by_subject(self) -> dict[str, SubjectTone]:
        return {t.subject_id: t for t in self.tones}


def _parse_row(row: dict[str, str], rownum: int) -> MeasurementRecord:
    subject = (row.get("subject_id") or "").strip()
    if not subject:
        raise MeasurementFormatError(rownum, "empty subject_id")
    site = (row.get("site") or "").strip().lower()
    if site not in SITES:
        raise MeasurementFormatError(rownum, f"site {site!r} not one of {SITES}")
    side = (row.get("side") or "").strip().lower()
    if side not in SIDES:
        raise MeasurementFormatError(rownum, f"side {side!r} not one of {SIDES}")
    space = (row.get("space") or "").strip().lower()
    if space not in SPACES:
        raise MeasurementFormatError(rownum, f"space {space!r} not one of {SPACES}")
    try:
        c1, c2, c3 = (float(row[k]) for k in ("c1", "c2", "c3"))
    except (KeyError, TypeError, ValueError):
        raise MeasurementFormatError(rownum, "channels c1,c2,c3 must be numeric") from None

    if space == "srgb":
        for v in (c1, c2, c3):
            if not (v == int(v) and 0 <= v <= 255):
                raise MeasurementFormatError(
                    rownum, f"sRGB channel {v} must be an integer in 0..255"
                )
        color = srgb_to_lab(RgbColor(int(c1), int(c2), int(c3)))
    else:
        try:
            color = LabColor(c1, c2, c3)
        except ValueError as e:
            raise MeasurementFormatError(rownum, str(e)) from None

    return MeasurementRecord(subject, site, side, color, row.get("captured_at") or None)


def ingest_measurements(source) -> list[MeasurementRecord]:
    """Read and validate a measurement CSV.

    ``source`` may be a path or an open text stream. Rows in sRGB space are
    converted to CIELAB on ingestion. Raises on malformed rows, out-of-range
    channels, and duplicate (subject, site, side) readings, naming the
    offending row.
    """
    if hasattr(source, "read"):
        return _ingest_stream(source)
    with open(source, newline="") as fh:
        return _ingest_stream(fh)


def _ingest_stream(fh: io.TextIOBase) -> list[MeasurementRecord]:
    reader = csv.DictReader(fh)
    if reader.fieldnames is None or [c.strip() for c in reader.fieldnames[:7]] != CSV_HEADER:
        raise MeasurementFormatError(1, f"header must start with {','.join(CSV_HEADER)}")
    records: list[MeasurementRecord] = []
    seen: set[tuple[str, str, str]] = set()
    for rownum, row in enumerate(reader, start=2):
        rec = _parse_row(row, rownum)
        key = (rec.subject_id, rec.site, rec.side)
        if key in seen:
            raise MeasurementFormatError(rownum, f"duplicate reading for {key}")
        seen.add(key)
        records.append(rec)
    return records


def _sides_by_subject(
    records: Iterable[MeasurementRecord],
) -> dict[str, dict[str, dict[str, LabColor]]]:
    out: dict[str, dict[str, dict[str, LabColor]]] = {}
    for rec in records:
        out.setdefault(rec.subject_id, {}).setdefault(rec.site, {})[rec.side] = rec.lab
    return out


def _mean_lab(x: LabColor, y: LabColor) -> LabColor:
    return LabColor(
        (x.L_star + y.L_star) / 2.0,
        (x.a_star + y.a_star) / 2.0,
        (x.b_star + y.b_star) / 2.0,
    )


def average_bilateral(records: Iterable[MeasurementRecord]) -> BilateralAverages:
    """Average the two sides of each measured site, per subject.

    Subjects with a one-sided site are listed in ``incomplete`` rather than
    silently dropped; that site's average is left unset.
    """
    tones: list[SubjectTone] = []
    incomplete: list[IncompleteSite] = []
    for subject, sites in _sides_by_subject(records).items():
        averages: dict[str, LabColor | None] = {"face": None, "hand": None}
        for site, sides in sites.items():
            missing = [s for s in SIDES if s not in sides]
            if missing:
                incomplete.append(IncompleteSite(subject, site, missing[0]))
            else:
                averages[site] = _mean_lab(sides["left"], sides["right"])
        if averages["face"] is not None or averages["hand"] is not None:
            tones.append(SubjectTone(subject, averages["face"], averages["hand"]))
    tones.sort(key=lambda t: t.subject_id)
    incomplete.sort(key=lambda i: (i.subject_id, i.site))
    return BilateralAverages(tones, incomplete)


def bilateral_delta_e(records: Iterable[MeasurementRecord], site: str) -> float:
    """Left-right CIELAB distance at a site for a single subject's records."""
    sides: dict[str, LabColor] = {}
    subjects = set()
    for rec in records:
        subjects.add(rec.subject_id)
        if rec.site == site:
            sides[rec.side] = rec.lab
    if len(subjects) > 1:
        raise ValueError(f"records span {len(subjects)} subjects, expected one")
    for side in SIDES:
        if side not in sides:
            raise IncompleteBilateralError(f"missing {side} {site} reading")
    return delta_e(sides["left"], sides["right"])


def bilateral_distances(
    records: Iterable[MeasurementRecord], site: str
) -> dict[str, float]:
    """Per-subject left-right distance at a site, complete pairs only."""
    out: dict[str, float] = {}
    for subject, sites in _sides_by_subject(records).items():
        sides = sites.get(site, {})
        if all(s in sides for s in SIDES):
            out[subject] = delta_e(sides["left"], sides["right"])
    return out


def expected_min_error(records: Iterable[MeasurementRecord], site: str) -> float:
    """Mean bilateral color difference across subjects at a site.

    This is the floor on achievable human rating error: a rating cannot be
    expected to land closer to the true tone than two readings of the same
    person's two sides land to each other. Subjects without a complete pair
    at the site are excluded (see ``bilateral_distances`` for the survivors).
    """
    distances = bilateral_distances(records, site)
    if not distances:
        raise IncompleteBilateralError(f"no complete bilateral {site} pairs")
    return sum(distances.values()) / len(distances)
