"""End-to-end study analyses: join, model, and summarize rating data.

Study 1 models self-ratings per scale with OLS plus stepwise BIC
selection; study 2 models image ratings with a subject-level random
intercept. Both produce report bundles that the reports module renders
into text tables and CSV twins.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .color import LabColor
from .demographics import Demographics, filter_analysis_population
from .measurement import MeasurementRecord, SubjectTone, average_bilateral
from .ratings import (
    ExclusionResult,
    IccResult,
    PreferenceSummary,
    RatingRecord,
    SwatchAccuracy,
    exclusion_filter,
    icc_two_way,
    preference_summary,
    scale_utilization,
    swatch_accuracy,
)
from .scales import Scale
from .stats.design import CategoricalTerm, ContinuousTerm, DesignSpec, Term
from .stats.linear import ModelFit, l_star_ratios
from .stats.logistic import logistic_fit
from .stats.mixed import MixedFit, lmm_fit
from .stats.stepwise import StepwiseResult, stepwise_bic

DEVICES = ("B", "D", "E")


class StimuliFormatError(ValueError):
    def __init__(self, row: int, message: str):
        super().__init__(f"row {row}: {message}")
        self.row = row


@dataclass(frozen=True)
class ImageStimulus:
    """One face image shown to raters, with its measured image-region color."""

    image_id: str
    subject_id: str
    device: str
    image_region_lab: LabColor
    file: str = ""

    def __post_init__(self):
        if self.device not in DEVICES:
            raise ValueError(f"device {self.device!r} not one of {DEVICES}")


STIMULI_HEADER = ["image_id", "subject_id", "device", "L", "a", "b", "file"]


def ingest_stimuli(source) -> list[ImageStimulus]:
    """Read the stimuli CSV: one image per row with its region color."""
    if hasattr(source, "read"):
        return _ingest_stimuli(source)
    with open(source, newline="") as fh:
        return _ingest_stimuli(fh)


def _ingest_stimuli(fh) -> list[ImageStimulus]:
    reader = csv.DictReader(fh)
    if reader.fieldnames is None or [c.strip() for c in reader.fieldnames[:7]] != STIMULI_HEADER:
        raise StimuliFormatError(1, f"header must start with {','.join(STIMULI_HEADER)}")
    out: list[ImageStimulus] = []
    seen: set[str] = set()
    for rownum, row in enumerate(reader, start=2):
        try:
            stim = ImageStimulus(
                image_id=row["image_id"].strip(),
                subject_id=row["subject_id"].strip(),
                device=row["device"].strip(),
                image_region_lab=LabColor(float(row["L"]), float(row["a"]), float(row["b"])),
                file=(row.get("file") or "").strip(),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise StimuliFormatError(rownum, str(e)) from None
        if stim.image_id in seen:
            raise StimuliFormatError(rownum, f"duplicate image_id {stim.image_id}")
        seen.add(stim.image_id)
        out.append(stim)
    return out


@dataclass
class StudyConfig:
    """Analysis knobs, with the reference levels the reports are built around."""

    site_study1: str = "hand"
    site_study2: str = "face"
    n_bins: int = 8
    race_reference: str = "Black"
    gender_reference: str = "Female"
    background_reference: str = "gray"
    device_reference: str = "B"
    location_reference: str | None = None  # None: first level in sorted order
    lightness_term: str = "lightness"
    preference_target: str = "cst"
    attentional_tolerance: int = 1
    outlier_mad_factor: float = 3.0


@dataclass
class ScaleAnalysis:
    """Study-1 results for one scale."""

    scale_id: str
    selection: StepwiseResult
    fit: ModelFit
    ratios: dict[str, float] | None
    accuracy_by_background: dict[str, dict[int, SwatchAccuracy]]
    utilization: float | None
    n: int


@dataclass
class Study1Bundle:
    scales: dict[str, ScaleAnalysis]
    preference: PreferenceSummary | None
    preference_fit: ModelFit | None
    preference_selection: StepwiseResult | None
    exclusions: ExclusionResult
    removed_demographics: list[tuple[str, str]]
    n_raters: int
    warnings: list[str] = field(default_factory=list)


@dataclass
class Study2ScaleAnalysis:
    """Study-2 results for one scale."""

    scale_id: str
    fit: MixedFit
    ratios: dict[str, float] | None
    icc_by_device: dict[str, IccResult]
    accuracy: dict[int, SwatchAccuracy]
    utilization: float | None
    n: int


@dataclass
class Study2Bundle:
    scales: dict[str, Study2ScaleAnalysis]
    removed_demographics: list[tuple[str, str]]
    n_raters: int
    warnings: list[str] = field(default_factory=list)


def _continuous_terms(config: StudyConfig) -> tuple[Term, ...]:
    return (
        ContinuousTerm(config.lightness_term),
        ContinuousTerm("hue"),
        ContinuousTerm("chromaticity"),
    )


def _bucketed(ratings: Sequence[RatingRecord], size: int) -> list[RatingRecord]:
    """Responses snapped to the nearest swatch index for accuracy tables.

    Live survey responses are already integers; simulated analysis data may
    carry unrounded model responses, which bucket to the nearest swatch.
    """
    from dataclasses import replace

    out = []
    for r in ratings:
        index = min(max(int(round(r.numeric_response)), 1), size)
        out.append(r if r.response == index else replace(r, response=index))
    return out


def run_study1(
    measurements: Iterable[MeasurementRecord],
    demographics: Mapping[str, Demographics],
    ratings: Sequence[RatingRecord],
    scales: Mapping[str, Scale],
    config: StudyConfig = StudyConfig(),
) -> Study1Bundle:
    """Model self-ratings of skin tone against calibrated measurements.

    Per scale: a mean-centered design of lightness, hue, and chromaticity
    plus race, gender, background, and location, pruned by stepwise BIC;
    lightness ratios; per-background swatch accuracy; range utilization.
    Preference responses get their own share table and logistic model.
    """
    warnings: list[str] = []
    averages = average_bilateral(measurements)
    tones_by_subject = averages.by_subject()
    for inc in averages.incomplete:
        warnings.append(f"incomplete bilateral {inc.site} for {inc.subject_id}")

    filt = filter_analysis_population(demographics.values())
    kept_demo = filt.kept

    exclusions = exclusion_filter(
        ratings,
        attentional_tolerance=config.attentional_tolerance,
        outlier_mad_factor=config.outlier_mad_factor,
    )

    def rater_tone(rater_id: str) -> LabColor | None:
        tone = tones_by_subject.get(rater_id)
        if tone is None:
            return None
        return tone.face if config.site_study1 == "face" else tone.hand

    analyses: dict[str, ScaleAnalysis] = {}
    raters_seen: set[str] = set()
    for scale_id, scale in scales.items():
        rows: dict[str, list] = {
            "response": [],
            config.lightness_term: [],
            "hue": [],
            "chromaticity": [],
            "race": [],
            "gender": [],
            "background": [],
            "location": [],
        }
        scale_ratings: list[RatingRecord] = []
        tone_map: dict[str, LabColor] = {}
        for r in exclusions.kept:
            if r.kind != "self" or r.scale_id != scale_id:
                continue
            demo = kept_demo.get(r.rater_id)
            tone = rater_tone(r.rater_id)
            if demo is None or tone is None:
                continue
            subj = tones_by_subject[r.rater_id]
            polar = subj.face_polar if config.site_study1 == "face" else subj.hand_polar
            raters_seen.add(r.rater_id)
            scale_ratings.append(r)
            tone_map[r.rater_id] = tone
            rows["response"].append(r.numeric_response)
            rows[config.lightness_term].append(polar.L_star)
            rows["hue"].append(polar.hue_deg)
            rows["chromaticity"].append(polar.chroma)
            rows["race"].append(demo.race)
            rows["gender"].append(demo.gender)
            rows["background"].append(r.background or "none")
            rows["location"].append(demo.location or "unknown")
        n = len(rows["response"])
        if n == 0:
            warnings.append(f"no usable ratings for scale {scale_id}")
            continue

        terms: list[Term] = list(_continuous_terms(config))
        terms.append(CategoricalTerm("race", reference=config.race_reference))
        terms.append(CategoricalTerm("gender", reference=config.gender_reference))
        if len(set(rows["background"])) > 1:
            terms.append(CategoricalTerm("background", reference=config.background_reference))
        if len(set(rows["location"])) > 1:
            terms.append(CategoricalTerm("location", reference=config.location_reference))
        spec = DesignSpec("response", tuple(terms), rows)
        selection = stepwise_bic(spec)
        fit = selection.fit
        ratios = (
            l_star_ratios(fit, config.lightness_term)
            if config.lightness_term in fit.coefficients
            else None
        )

        accuracy: dict[str, dict[int, SwatchAccuracy]] = {}
        utilization = None
        if scale.kind == "palette":
            bucketed = _bucketed(scale_ratings, scale.size)
            for background in sorted(set(r.background or "none" for r in bucketed)):
                subset = [r for r in bucketed if (r.background or "none") == background]
                accuracy[background] = swatch_accuracy(subset, tone_map, scale)
        utilization = scale_utilization(
            scale_ratings, tone_map, scale.size, n_bins=config.n_bins
        )
        analyses[scale_id] = ScaleAnalysis(
            scale_id, selection, fit, ratios, accuracy, utilization, n
        )

    preference = None
    preference_fit = None
    preference_selection = None
    pref_ratings = [r for r in exclusions.kept if r.kind == "preference"]
    if pref_ratings:
        usable = [
            r
            for r in pref_ratings
            if r.rater_id in kept_demo and rater_tone(r.rater_id) is not None
        ]
        races = {pid: d.race for pid, d in kept_demo.items()}
        tone_map = {r.rater_id: rater_tone(r.rater_id) for r in usable}
        preference = preference_summary(
            usable,
            races,
            tone_map,
            target_scale_id=config.preference_target,
            lightness_site_label=config.lightness_term,
        )
        try:
            preference_selection = stepwise_bic(preference.design, fitter=logistic_fit)
            preference_fit = preference_selection.fit
        except Exception as e:  # degenerate preference data is reported, not fatal
            warnings.append(f"preference model failed: {e}")

    return Study1Bundle(
        scales=analyses,
        preference=preference,
        preference_fit=preference_fit,
        preference_selection=preference_selection,
        exclusions=exclusions,
        removed_demographics=filt.removed,
        n_raters=len(raters_seen),
        warnings=warnings,
    )


def run_study2(
    stimuli: Sequence[ImageStimulus],
    subject_tones: Mapping[str, SubjectTone],
    subject_demographics: Mapping[str, Demographics],
    rater_demographics: Mapping[str, Demographics],
    ratings: Sequence[RatingRecord],
    scales: Mapping[str, Scale],
    config: StudyConfig = StudyConfig(),
) -> Study2Bundle:
    """Model image ratings with a per-subject random intercept.

    Expects exclusion-filtered ratings (see ``exclusion_filter``). Per
    scale: the mixed model with subject tone, subject and rater
    demographics, and device as fixed effects; lightness ratios;
    per-device consistency tables; swatch accuracy collapsed over devices.
    """
    warnings: list[str] = []
    filt = filter_analysis_population(rater_demographics.values())
    kept_raters = filt.kept
    stim_by_id = {s.image_id: s for s in stimuli}

    analyses: dict[str, Study2ScaleAnalysis] = {}
    raters_seen: set[str] = set()
    for scale_id, scale in scales.items():
        if scale.kind != "palette":
            continue
        rows: dict[str, list] = {
            "response": [],
            config.lightness_term: [],
            "hue": [],
            "chromaticity": [],
            "subject_race": [],
            "subject_gender": [],
            "device": [],
            "rater_race": [],
            "rater_gender": [],
            "subject": [],
        }
        scale_ratings: list[RatingRecord] = []
        tone_map: dict[str, LabColor] = {}
        for r in ratings:
            if r.kind != "image" or r.scale_id != scale_id:
                continue
            stim = stim_by_id.get(str(r.stimulus_id))
            if stim is None:
                warnings.append(f"rating {r.rater_id}/{r.stimulus_id} has no stimulus")
                continue
            subject = subject_tones.get(stim.subject_id)
            demo_s = subject_demographics.get(stim.subject_id)
            demo_r = kept_raters.get(r.rater_id)
            if subject is None or demo_s is None or demo_r is None:
                continue
            site_tone = subject.face if config.site_study2 == "face" else subject.hand
            polar = (
                subject.face_polar if config.site_study2 == "face" else subject.hand_polar
            )
            if site_tone is None:
                continue
            raters_seen.add(r.rater_id)
            scale_ratings.append(r)
            tone_map[str(r.stimulus_id)] = site_tone
            rows["response"].append(r.numeric_response)
            rows[config.lightness_term].append(polar.L_star)
            rows["hue"].append(polar.hue_deg)
            rows["chromaticity"].append(polar.chroma)
            rows["subject_race"].append(demo_s.race)
            rows["subject_gender"].append(demo_s.gender)
            rows["device"].append(stim.device)
            rows["rater_race"].append(demo_r.race)
            rows["rater_gender"].append(demo_r.gender)
            rows["subject"].append(stim.subject_id)
        n = len(rows["response"])
        if n == 0:
            warnings.append(f"no usable ratings for scale {scale_id}")
            continue

        terms: list[Term] = list(_continuous_terms(config))
        terms.append(CategoricalTerm("subject_race", reference=config.race_reference))
        terms.append(CategoricalTerm("subject_gender", reference=config.gender_reference))
        terms.append(CategoricalTerm("device", reference=config.device_reference))
        terms.append(CategoricalTerm("rater_race", reference=config.race_reference))
        terms.append(CategoricalTerm("rater_gender", reference=config.gender_reference))
        spec = DesignSpec("response", tuple(terms), rows)
        fit = lmm_fit(spec, group="subject")
        ratios = (
            l_star_ratios(fit, config.lightness_term)
            if config.lightness_term in fit.coefficients
            else None
        )

        icc_by_device = _icc_per_device(scale_ratings, stim_by_id, scale_id, warnings)
        accuracy = swatch_accuracy(_bucketed(scale_ratings, scale.size), tone_map, scale)
        utilization = scale_utilization(
            scale_ratings, tone_map, scale.size, n_bins=config.n_bins
        )
        analyses[scale_id] = Study2ScaleAnalysis(
            scale_id, fit, ratios, icc_by_device, accuracy, utilization, n
        )

    return Study2Bundle(
        scales=analyses,
        removed_demographics=filt.removed,
        n_raters=len(raters_seen),
        warnings=warnings,
    )


def _icc_per_device(
    scale_ratings: Sequence[RatingRecord],
    stim_by_id: Mapping[str, ImageStimulus],
    scale_id: str,
    warnings: list[str],
) -> dict[str, IccResult]:
    """Consistency per device, over raters whose session used that device.

    Sessions assign one device per rater, so subsetting ratings by device
    yields a complete subjects-by-raters table for each device; raters with
    partial coverage (mid-session abandonment) are dropped from the table.
    """
    by_device: dict[str, dict[str, dict[str, float]]] = {}
    subjects: set[str] = set()
    for r in scale_ratings:
        stim = stim_by_id[str(r.stimulus_id)]
        subjects.add(stim.subject_id)
        by_device.setdefault(stim.device, {}).setdefault(r.rater_id, {})[
            stim.subject_id
        ] = r.numeric_response
    out: dict[str, IccResult] = {}
    ordered_subjects = sorted(subjects)
    for device, raters in sorted(by_device.items()):
        complete = {
            rid: resp
            for rid, resp in raters.items()
            if all(s in resp for s in ordered_subjects)
        }
        if len(complete) < 2:
            warnings.append(f"device {device}: fewer than 2 complete raters for ICC")
            continue
        table = [
            [complete[rid][s] for rid in sorted(complete)] for s in ordered_subjects
        ]
        out[device] = icc_two_way(table, scale_id=scale_id, device=device)
    return out
