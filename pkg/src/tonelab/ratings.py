"""Rating-quality metrics: accuracy, range utilization, consistency, exclusion.

Operates on flat collections of RatingRecord joined against measured tones.
Everything here is a pure table transformation; persistence lives in the
survey service and orchestration in the study pipeline.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from statistics import median
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .color import LabColor, delta_e
from .scales import Scale
from .stats.design import CategoricalTerm, ContinuousTerm, DesignSpec

TASK_KINDS = ("self", "image", "preference", "attentional")
BACKGROUNDS = ("white", "gray")


class JoinError(ValueError):
    """A rating could not be joined to its measured tone."""


class IncompleteTableError(ValueError):
    """The targets-by-raters table has holes; complete or subset it first."""


class DegenerateTableError(ValueError):
    """The table carries no variance, so consistency is undefined."""


@dataclass(frozen=True)
class RatingRecord:
    """One rater's response to one survey task."""

    rater_id: str
    session_id: str
    scale_id: str
    kind: str  # one of TASK_KINDS
    response: int | float | str
    stimulus_id: str | None = None  # image id, or true swatch index for attentional
    background: str | None = None
    presentation_order: int = 0
    timestamp: str | None = None
    task_id: str | None = None

    def __post_init__(self):
        if self.kind not in TASK_KINDS:
            raise ValueError(f"kind {self.kind!r} not one of {TASK_KINDS}")

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "RatingRecord":
        return cls(**json.loads(line))

    @property
    def numeric_response(self) -> float:
        return float(self.response)


@dataclass(frozen=True)
class IccResult:
    """Two-way random-effects intraclass correlation, single and average forms."""

    icc_single: float
    icc_average: float
    n_targets: int
    k_raters: int
    scale_id: str | None = None
    device: str | None = None


@dataclass(frozen=True)
class SwatchAccuracy:
    """Mean rated tone and its distance to the swatch color, per swatch."""

    index: int
    n: int
    mean_tone: LabColor
    delta_e: float


@dataclass(frozen=True)
class Exclusion:
    record: RatingRecord
    reason: str  # "attentional" | "outlier"


@dataclass
class ExclusionResult:
    kept: list[RatingRecord]
    excluded: list[Exclusion]
    failed_raters: list[str]


def swatch_accuracy(
    ratings: Iterable[RatingRecord],
    tones: Mapping[str, LabColor],
    scale: Scale,
    key: Callable[[RatingRecord], str] | None = None,
) -> dict[int, SwatchAccuracy]:
    """Per-swatch color error of a set of palette ratings.

    For each swatch index, the measured tones of everyone who chose that
    index are averaged in CIELAB, and the result is the distance between
    that average color and the swatch color. ``tones`` maps a join key to
    the measured tone; by default image ratings join on the stimulus and
    self ratings on the rater. Swatches nobody chose are absent from the
    result rather than reported as zero error.
    """
    if key is None:
        key = lambda r: r.stimulus_id if r.kind == "image" else r.rater_id
    chosen: dict[int, list[LabColor]] = {}
    unjoinable: list[str] = []
    for r in ratings:
        k = key(r)
        if k not in tones:
            unjoinable.append(f"{r.rater_id}/{k}")
            continue
        v = r.numeric_response
        index = int(round(v))
        if abs(v - index) > 1e-9 or not 1 <= index <= scale.size:
            raise ValueError(f"response {r.response} is not a swatch index 1..{scale.size}")
        chosen.setdefault(index, []).append(tones[k])
    if unjoinable:
        raise JoinError(f"{len(unjoinable)} unjoinable ratings: {', '.join(unjoinable[:10])}")
    out: dict[int, SwatchAccuracy] = {}
    for index in sorted(chosen):
        labs = np.array([t.as_array() for t in chosen[index]])
        mean = labs.mean(axis=0)
        mean_tone = LabColor(float(mean[0]), float(mean[1]), float(mean[2]))
        out[index] = SwatchAccuracy(
            index, len(labs), mean_tone, delta_e(mean_tone, scale.swatch(index).lab)
        )
    return out


def scale_utilization(
    ratings: Iterable[RatingRecord],
    tones: Mapping[str, LabColor],
    scale_size: int,
    n_bins: int = 8,
    key: Callable[[RatingRecord], str] | None = None,
) -> float:
    """Fraction of the scale range spanned by binned average responses.

    Raters are binned by measured L* into ``n_bins`` equal-width bins; the
    utilization is the spread of per-bin average responses over the largest
    possible spread, (scale_size - 1).
    """
    if key is None:
        key = lambda r: r.stimulus_id if r.kind == "image" else r.rater_id
    pairs = []
    for r in ratings:
        k = key(r)
        if k not in tones:
            raise JoinError(f"no tone for {k}")
        pairs.append((tones[k].L_star, r.numeric_response))
    if not pairs:
        raise ValueError("no ratings")
    L = np.array([p[0] for p in pairs])
    resp = np.array([p[1] for p in pairs])
    edges = np.linspace(L.min(), L.max(), n_bins + 1)
    # rightmost edge inclusive
    bins = np.clip(np.digitize(L, edges[1:-1]), 0, n_bins - 1)
    means = [resp[bins == b].mean() for b in range(n_bins) if np.any(bins == b)]
    if len(means) < 2:
        raise ValueError(f"only {len(means)} occupied L* bins, need >= 2")
    return float((max(means) - min(means)) / (scale_size - 1))


def icc_two_way(
    table: np.ndarray | Sequence[Sequence[float]],
    scale_id: str | None = None,
    device: str | None = None,
) -> IccResult:
    """Two-way random-effects intraclass correlation of a complete table.

    ``table`` is targets by raters. Both the single-measure and the
    average-measure forms are reported: the mean squares for targets (rows),
    raters (columns), and residual give

        single  = (MS_R - MS_E) / (MS_R + (k-1) MS_E + k (MS_C - MS_E) / n)
        average = (MS_R - MS_E) / (MS_R + (MS_C - MS_E) / n)

    Raises on tables with missing cells or no variance at all.
    """
    M = np.asarray(table, dtype=float)
    if M.ndim != 2:
        raise ValueError(f"table must be 2-d, got shape {M.shape}")
    if np.any(~np.isfinite(M)):
        raise IncompleteTableError("table has missing cells; complete or subset it first")
    n, k = M.shape
    if n < 2 or k < 2:
        raise ValueError(f"need >= 2 targets and >= 2 raters, got {n} x {k}")

    grand = M.mean()
    row_means = M.mean(axis=1)
    col_means = M.mean(axis=0)
    ss_rows = k * float(np.sum((row_means - grand) ** 2))
    ss_cols = n * float(np.sum((col_means - grand) ** 2))
    ss_total = float(np.sum((M - grand) ** 2))
    ss_err = ss_total - ss_rows - ss_cols

    ms_r = ss_rows / (n - 1)
    ms_c = ss_cols / (k - 1)
    ms_e = ss_err / ((n - 1) * (k - 1))

    denom_single = ms_r + (k - 1) * ms_e + k * (ms_c - ms_e) / n
    denom_average = ms_r + (ms_c - ms_e) / n
    if denom_single == 0 or denom_average == 0:
        raise DegenerateTableError("zero-variance table, consistency undefined")
    return IccResult(
        icc_single=float((ms_r - ms_e) / denom_single),
        icc_average=float((ms_r - ms_e) / denom_average),
        n_targets=n,
        k_raters=k,
        scale_id=scale_id,
        device=device,
    )


def exclusion_filter(
    ratings: Sequence[RatingRecord],
    attentional_tolerance: int = 1,
    outlier_mad_factor: float = 3.0,
    mad_floor: float = 1.0,
) -> ExclusionResult:
    """Apply the attentional and outlier exclusion rules.

    A rater who misses any attentional check by more than
    ``attentional_tolerance`` scale steps is excluded entirely, with every
    record they produced. Remaining image-rating responses are screened per
    image with a robust rule: a response farther than
    ``outlier_mad_factor`` times the MAD (floored at ``mad_floor`` scale
    steps) from the image's median response is excluded individually. The
    outlier screen repeats until stable, so applying the filter to its own
    output excludes nothing more.
    """
    failed: set[str] = set()
    for r in ratings:
        if r.kind == "attentional":
            if r.stimulus_id is None:
                raise ValueError(f"attentional record for {r.rater_id} lacks the true index")
            true_index = int(str(r.stimulus_id).rpartition(":")[-1])
            if abs(r.numeric_response - true_index) > attentional_tolerance:
                failed.add(r.rater_id)

    kept: list[RatingRecord] = []
    excluded: list[Exclusion] = []
    for r in ratings:
        if r.rater_id in failed:
            excluded.append(Exclusion(r, "attentional"))
        else:
            kept.append(r)

    # iterate the robust screen to a fixed point so the filter is idempotent
    while True:
        by_image: dict[str, list[RatingRecord]] = {}
        for r in kept:
            if r.kind == "image":
                by_image.setdefault(str(r.stimulus_id), []).append(r)
        outliers: set[int] = set()
        for image, records in by_image.items():
            values = [r.numeric_response for r in records]
            med = median(values)
            mad = max(median([abs(v - med) for v in values]), mad_floor)
            for r in records:
                if abs(r.numeric_response - med) > outlier_mad_factor * mad:
                    outliers.add(id(r))
        if not outliers:
            break
        next_kept = []
        for r in kept:
            if id(r) in outliers:
                excluded.append(Exclusion(r, "outlier"))
            else:
                next_kept.append(r)
        kept = next_kept

    return ExclusionResult(kept, excluded, sorted(failed))


@dataclass
class PreferenceSummary:
    """CST-preference shares by background and race, plus the model design."""

    cells: dict[tuple[str, str], tuple[int, float]]  # (background, race) -> (n, share)
    design: DesignSpec
    target_scale_id: str


def preference_summary(
    ratings: Iterable[RatingRecord],
    demographics: Mapping[str, str],
    tones: Mapping[str, LabColor],
    target_scale_id: str = "cst",
    lightness_site_label: str = "lightness",
) -> PreferenceSummary:
    """Tabulate palette preference and build the logistic design.

    ``demographics`` maps rater to race; ``tones`` maps rater to measured
    tone (the hand tone, for self-rating studies). Cells with no raters are
    simply absent. The returned design models the probability of preferring
    ``target_scale_id`` from background and measured lightness.
    """
    counts: dict[tuple[str, str], list[int]] = {}
    rows: dict[str, list] = {"preference": [], "background": [], lightness_site_label: []}
    for r in ratings:
        if r.kind != "preference":
            continue
        if r.rater_id not in tones:
            raise JoinError(f"no measured tone for rater {r.rater_id}")
        race = demographics.get(r.rater_id, "Unknown")
        prefers = 1 if str(r.response) == target_scale_id else 0
        cell = counts.setdefault((str(r.background), race), [0, 0])
        cell[0] += 1
        cell[1] += prefers
        rows["preference"].append(prefers)
        rows["background"].append(str(r.background))
        rows[lightness_site_label].append(tones[r.rater_id].L_star)
    cells = {
        key: (n_total, n_pref / n_total) for key, (n_total, n_pref) in sorted(counts.items())
    }
    design = DesignSpec(
        response="preference",
        terms=(
            CategoricalTerm("background", reference="gray"),
            ContinuousTerm(lightness_site_label),
        ),
        table=rows,
    )
    return PreferenceSummary(cells, design, target_scale_id)
