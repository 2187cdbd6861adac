"""Planted-coefficient study simulators.

Validation harness for the two study pipelines: generate populations with
known response models, write them in the exact ingestion formats, and let
the analyses try to recover the planted coefficients. Everything is
deterministic given the seed. Responses are written unrounded and
unclamped by default so zero-noise runs recover coefficients exactly;
rounding to scale steps is available for realism but censors nothing.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .color import LabColor, PolarTone, polar_of
from .measurement import CSV_HEADER as MEASUREMENT_HEADER
from .population import PopulationConfig, sample_skin_tones
from .ratings import RatingRecord
from .scales import Scale, nearest_swatch
from .study import STIMULI_HEADER

RACES_ANALYSIS = ("Asian", "Black", "Hispanic", "White")
GENDERS_ANALYSIS = ("Female", "Male")
LOCATIONS = ("CA", "MD")
AGE_BINS = ("[18,35]", "(35,50]", "(50,65]", "(65,85]")
DEVICES = ("B", "D", "E")

_BASE_TIME = "2024-06-01T12:00:00Z"


@dataclass(frozen=True)
class ResponseModel:
    """A planted linear response model over the joined design.

    Categorical effects are keyed by level; levels not listed (the planted
    reference) contribute 0. Continuous effects apply to sample-mean
    centered covariates, matching how the pipelines build their designs.
    Exactly one of noise_sd / target_r2 controls the residual noise.
    """

    intercept: float
    lightness: float = 0.0
    hue: float = 0.0
    chromaticity: float = 0.0
    race: Mapping[str, float] = field(default_factory=dict)
    gender: Mapping[str, float] = field(default_factory=dict)
    background: Mapping[str, float] = field(default_factory=dict)
    location: Mapping[str, float] = field(default_factory=dict)
    noise_sd: float | None = None
    target_r2: float | None = None

    def resolve_noise_sd(self, linpred: np.ndarray) -> float:
        return _resolve_noise_sd(self.noise_sd, self.target_r2, linpred)


def _resolve_noise_sd(noise_sd, target_r2, linpred: np.ndarray) -> float:
    if noise_sd is not None:
        return noise_sd
    if target_r2 is not None and len(linpred):
        if not 0.0 < target_r2 <= 1.0:
            raise ValueError(f"target_r2={target_r2} outside (0, 1]")
        explained = float(np.var(linpred))
        return float(np.sqrt(explained * (1.0 - target_r2) / target_r2))
    return 0.0


@dataclass
class Study1SimConfig:
    n_raters: int
    scales: dict[str, ResponseModel]
    scale_sizes: dict[str, int] = field(default_factory=lambda: {"cst": 10, "mst": 10, "fst": 6})
    preference_intercept: float = 0.0
    preference_background_white: float = 0.0
    preference_lightness: float = 0.0
    attentional_true_index: int = 4
    attentional_fail_fraction: float = 0.0
    bilateral_sd: float = 1.55
    round_responses: bool = False
    population: PopulationConfig = field(
        default_factory=lambda: PopulationConfig(l_range=(30.0, 70.0))
    )


@dataclass(frozen=True)
class Study2ResponseModel:
    """Planted mixed-model fixed effects for image ratings.

    Continuous effects apply to centered subject-tone covariates;
    categorical effects are keyed by level with unlisted levels (the
    planted references) contributing 0.
    """

    intercept: float
    lightness: float = 0.0
    hue: float = 0.0
    chromaticity: float = 0.0
    subject_race: Mapping[str, float] = field(default_factory=dict)
    subject_gender: Mapping[str, float] = field(default_factory=dict)
    device: Mapping[str, float] = field(default_factory=dict)
    rater_race: Mapping[str, float] = field(default_factory=dict)
    rater_gender: Mapping[str, float] = field(default_factory=dict)
    noise_sd: float | None = None
    target_r2: float | None = None

    def resolve_noise_sd(self, linpred: np.ndarray) -> float:
        return _resolve_noise_sd(self.noise_sd, self.target_r2, linpred)


@dataclass
class Study2SimConfig:
    n_raters: int
    model: Study2ResponseModel
    scale_ids: tuple[str, ...] = ("cst", "mst")
    scale_sizes: dict[str, int] = field(default_factory=lambda: {"cst": 10, "mst": 10})
    n_subjects: int = 8
    sigma_b: float = 0.0
    attentional_true_index: int = 4
    attentional_fail_fraction: float = 0.0
    bilateral_sd: float = 1.55
    round_responses: bool = False
    # rating_mode "model" plants the response model; "oracle" assigns the
    # nearest swatch of the subject's calibrated tone plus per-device noise
    rating_mode: str = "model"
    oracle_scales: dict[str, Scale] | None = None
    device_noise_sd: Mapping[str, float] = field(default_factory=dict)
    # image lightness shift per device, stimulus metadata only
    device_l_shift: Mapping[str, float] = field(
        default_factory=lambda: {"B": 0.0, "D": 1.1, "E": -21.7}
    )


def _timestamp(i: int) -> str:
    return f"{_BASE_TIME[:-1]}+{i:08d}"


def _sigmoid(x: float) -> float:
    return 1.0 / (1.0 + np.exp(-x))


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _measurement_rows(
    subject_id: str,
    site: str,
    base: PolarTone,
    rng: np.random.Generator,
    sd: float,
) -> tuple[list[list], LabColor]:
    """Two bilateral readings around a base tone; returns rows and the tone
    the pipeline will reconstruct (the mean of the two sides)."""
    lab = base.to_lab().as_array()
    left = lab + rng.normal(0.0, sd, 3)
    right = lab + rng.normal(0.0, sd, 3)
    left[0] = np.clip(left[0], 0.0, 100.0)
    right[0] = np.clip(right[0], 0.0, 100.0)
    rows = [
        [subject_id, site, "left", "lab"] + [repr(float(v)) for v in left],
        [subject_id, site, "right", "lab"] + [repr(float(v)) for v in right],
    ]
    mean = (left + right) / 2.0
    return rows, LabColor(float(mean[0]), float(mean[1]), float(mean[2]))


def _centered(values: np.ndarray) -> np.ndarray:
    return values - values.mean() if len(values) else values


def simulate_study1(config: Study1SimConfig, outdir, seed: int) -> dict[str, Path]:
    """Write a synthetic self-rating study into ``outdir``.

    Produces measurements.csv, demographics.csv, ratings.jsonl, and
    config.json (the planted truth, for auditing). Deterministic per seed.
    """
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    n = config.n_raters

    rater_ids = [f"R{i+1:05d}" for i in range(n)]
    races = [RACES_ANALYSIS[rng.integers(len(RACES_ANALYSIS))] for _ in range(n)]
    genders = [GENDERS_ANALYSIS[rng.integers(2)] for _ in range(n)]
    locations = [LOCATIONS[rng.integers(2)] for _ in range(n)]
    ages = [AGE_BINS[rng.integers(len(AGE_BINS))] for _ in range(n)]
    backgrounds = ["white" if rng.random() < 0.5 else "gray" for _ in range(n)]

    face_bases = sample_skin_tones(n, rng, config.population)
    meas_rows: list[list] = []
    hand_tone: dict[str, LabColor] = {}
    for rid, face in zip(rater_ids, face_bases):
        hand = PolarTone(
            min(face.L_star + 1.5, 100.0), face.hue_deg - 1.0, max(face.chroma - 0.8, 1.0)
        )
        rows, _ = _measurement_rows(rid, "face", face, rng, config.bilateral_sd)
        meas_rows.extend(rows)
        rows, mean_hand = _measurement_rows(rid, "hand", hand, rng, config.bilateral_sd)
        meas_rows.extend(rows)
        hand_tone[rid] = mean_hand

    demo_rows = [
        [rid, race, "not hispanic" if race != "Hispanic" else "hispanic", gender, age, loc]
        for rid, race, gender, age, loc in zip(rater_ids, races, genders, ages, locations)
    ]

    # planted responses per scale, on the tones the pipeline will reconstruct
    polar = [polar_of(hand_tone[rid]) for rid in rater_ids]
    L = np.array([p.L_star for p in polar])
    hue = np.array([p.hue_deg for p in polar])
    chroma = np.array([p.chroma for p in polar])
    Lc, huec, chromac = _centered(L), _centered(hue), _centered(chroma)

    records: list[RatingRecord] = []
    order = 0
    for scale_id, model in config.scales.items():
        linpred = (
            model.intercept
            + model.lightness * Lc
            + model.hue * huec
            + model.chromaticity * chromac
            + np.array([model.race.get(r, 0.0) for r in races])
            + np.array([model.gender.get(g, 0.0) for g in genders])
            + np.array([model.background.get(b, 0.0) for b in backgrounds])
            + np.array([model.location.get(l, 0.0) for l in locations])
        )
        sd = model.resolve_noise_sd(linpred)
        response = linpred + (rng.normal(0.0, sd, n) if sd > 0 else 0.0)
        if config.round_responses:
            response = np.rint(response)
        for i, rid in enumerate(rater_ids):
            order += 1
            records.append(
                RatingRecord(
                    rater_id=rid,
                    session_id=f"sim1-{rid}",
                    scale_id=scale_id,
                    kind="self",
                    response=float(response[i]),
                    background=backgrounds[i],
                    presentation_order=order,
                    timestamp=_timestamp(order),
                    task_id=f"sim1-{rid}-{scale_id}",
                )
            )

    # attentional checks on each palette scale
    for scale_id, size in config.scale_sizes.items():
        if scale_id == "fst":
            continue
        for i, rid in enumerate(rater_ids):
            order += 1
            fails = rng.random() < config.attentional_fail_fraction
            true = config.attentional_true_index
            response = min(size, true + 3) if fails else true
            records.append(
                RatingRecord(
                    rater_id=rid,
                    session_id=f"sim1-{rid}",
                    scale_id=scale_id,
                    kind="attentional",
                    response=int(response),
                    stimulus_id=f"swatch:{true}",
                    background=backgrounds[i],
                    presentation_order=order,
                    timestamp=_timestamp(order),
                    task_id=f"sim1-{rid}-att-{scale_id}",
                )
            )

    # preference by planted logit on background + hand lightness
    for i, rid in enumerate(rater_ids):
        order += 1
        logit = (
            config.preference_intercept
            + (config.preference_background_white if backgrounds[i] == "white" else 0.0)
            + config.preference_lightness * Lc[i]
        )
        prefers = rng.random() < _sigmoid(logit)
        records.append(
            RatingRecord(
                rater_id=rid,
                session_id=f"sim1-{rid}",
                scale_id="preference",
                kind="preference",
                response="cst" if prefers else "mst",
                background=backgrounds[i],
                presentation_order=order,
                timestamp=_timestamp(order),
                task_id=f"sim1-{rid}-pref",
            )
        )

    paths = {
        "measurements": out / "measurements.csv",
        "demographics": out / "demographics.csv",
        "ratings": out / "ratings.jsonl",
        "config": out / "config.json",
    }
    _write_csv(paths["measurements"], MEASUREMENT_HEADER, meas_rows)
    _write_csv(paths["demographics"],
               ["person_id", "race", "ethnicity", "gender", "age_bin", "location"],
               demo_rows)
    with open(paths["ratings"], "w") as fh:
        for rec in records:
            fh.write(rec.to_json() + "\n")
    with open(paths["config"], "w") as fh:
        json.dump({"seed": seed, "study": 1, "config": _jsonable(config)}, fh, indent=2)
        fh.write("\n")
    return paths


def simulate_study2(config: Study2SimConfig, outdir, seed: int) -> dict[str, Path]:
    """Write a synthetic image-rating study into ``outdir``.

    Subjects are balanced over race (Black, White) and gender with spread
    lightness; each rater is assigned one scale and one capture device and
    rates every subject once. Produces subject_measurements.csv,
    subject_demographics.csv, rater_demographics.csv, stimuli.csv,
    ratings.jsonl, and config.json.
    """
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    n_subj = config.n_subjects
    subject_ids = [f"SUBJ{i+1:02d}" for i in range(n_subj)]
    subj_races = [("Black" if i % 2 == 0 else "White") for i in range(n_subj)]
    subj_genders = [("Female" if (i // 2) % 2 == 0 else "Male") for i in range(n_subj)]
    # spread lightness within race so race and lightness stay separable
    levels = np.linspace(30.0, 64.0, n_subj)
    subj_L = [float(levels[i]) for i in rng.permutation(n_subj)]

    meas_rows: list[list] = []
    subj_tone: dict[str, LabColor] = {}
    from .population import skin_chroma, skin_hue  # local to avoid cycle at import

    for sid, Lv in zip(subject_ids, subj_L):
        base = PolarTone(
            Lv,
            float(skin_hue(Lv) + rng.normal(0.0, 2.0)),
            float(max(skin_chroma(Lv) + rng.normal(0.0, 1.5), 1.0)),
        )
        rows, mean_face = _measurement_rows(sid, "face", base, rng, config.bilateral_sd)
        meas_rows.extend(rows)
        subj_tone[sid] = mean_face

    subj_demo_rows = [
        [sid, race, "not hispanic", gender, AGE_BINS[i % len(AGE_BINS)], LOCATIONS[0]]
        for i, (sid, race, gender) in enumerate(zip(subject_ids, subj_races, subj_genders))
    ]

    stim_rows: list[list] = []
    image_of: dict[tuple[str, str], str] = {}
    for sid in subject_ids:
        for device in DEVICES:
            image_id = f"IMG-{sid}-{device}"
            image_of[(sid, device)] = image_id
            lab = subj_tone[sid]
            shifted_L = float(np.clip(lab.L_star + config.device_l_shift.get(device, 0.0), 0.0, 100.0))
            stim_rows.append(
                [image_id, sid, device,
                 repr(shifted_L), repr(lab.a_star), repr(lab.b_star),
                 f"assets/{image_id}.png"]
            )

    n = config.n_raters
    rater_ids = [f"K{i+1:05d}" for i in range(n)]
    rater_races = [RACES_ANALYSIS[rng.integers(len(RACES_ANALYSIS))] for _ in range(n)]
    rater_genders = [GENDERS_ANALYSIS[rng.integers(2)] for _ in range(n)]
    rater_scales = [config.scale_ids[i % len(config.scale_ids)] for i in range(n)]
    rater_devices = [DEVICES[rng.integers(len(DEVICES))] for _ in range(n)]
    rater_demo_rows = [
        [rid, race, "not hispanic" if race != "Hispanic" else "hispanic",
         gender, AGE_BINS[rng.integers(len(AGE_BINS))], LOCATIONS[rng.integers(2)]]
        for rid, race, gender in zip(rater_ids, rater_races, rater_genders)
    ]

    polar = {sid: polar_of(subj_tone[sid]) for sid in subject_ids}
    sL = np.array([polar[s].L_star for s in subject_ids])
    sH = np.array([polar[s].hue_deg for s in subject_ids])
    sC = np.array([polar[s].chroma for s in subject_ids])
    # center over the observation rows (every rater sees every subject once,
    # so subject-level means equal observation-level means)
    sLc, sHc, sCc = sL - sL.mean(), sH - sH.mean(), sC - sC.mean()
    subj_index = {s: i for i, s in enumerate(subject_ids)}
    b_subject = rng.normal(0.0, config.sigma_b, n_subj) if config.sigma_b > 0 else np.zeros(n_subj)

    model = config.model
    subj_effect = (
        model.intercept
        + model.lightness * sLc
        + model.hue * sHc
        + model.chromaticity * sCc
        + np.array([model.subject_race.get(r, 0.0) for r in subj_races])
        + np.array([model.subject_gender.get(g, 0.0) for g in subj_genders])
        + b_subject
    )

    records: list[RatingRecord] = []
    linpreds: list[float] = []
    keys: list[tuple[int, str, str, str]] = []  # rater idx, subject, device, scale
    for i, rid in enumerate(rater_ids):
        device = rater_devices[i]
        for sid in rng.permutation(subject_ids):
            sid = str(sid)
            lp = (
                subj_effect[subj_index[sid]]
                + model.device.get(device, 0.0)
                + model.rater_race.get(rater_races[i], 0.0)
                + model.rater_gender.get(rater_genders[i], 0.0)
            )
            linpreds.append(lp)
            keys.append((i, sid, device, rater_scales[i]))

    lin = np.array(linpreds)
    if config.rating_mode == "model":
        sd = model.resolve_noise_sd(lin)
        values = lin + (rng.normal(0.0, sd, len(lin)) if sd > 0 else 0.0)
        if config.round_responses:
            values = np.rint(values)
    elif config.rating_mode == "oracle":
        if not config.oracle_scales:
            raise ValueError("oracle mode needs oracle_scales")
        values = np.empty(len(keys))
        for j, (i, sid, device, scale_id) in enumerate(keys):
            index, _ = nearest_swatch(subj_tone[sid], config.oracle_scales[scale_id])
            noise_sd = float(config.device_noise_sd.get(device, 0.0))
            v = index + (rng.normal(0.0, noise_sd) if noise_sd > 0 else 0.0)
            size = config.scale_sizes.get(scale_id, 10)
            values[j] = min(max(round(v), 1), size)
    else:
        raise ValueError(f"rating_mode {config.rating_mode!r} not model or oracle")

    order = 0
    for j, (i, sid, device, scale_id) in enumerate(keys):
        order += 1
        records.append(
            RatingRecord(
                rater_id=rater_ids[i],
                session_id=f"sim2-{rater_ids[i]}",
                scale_id=scale_id,
                kind="image",
                response=float(values[j]),
                stimulus_id=image_of[(sid, device)],
                background="gray",
                presentation_order=order,
                timestamp=_timestamp(order),
                task_id=f"sim2-{rater_ids[i]}-{sid}",
            )
        )
    for i, rid in enumerate(rater_ids):
        size = config.scale_sizes.get(rater_scales[i], 10)
        for check in (1, 2):
            order += 1
            fails = rng.random() < config.attentional_fail_fraction
            true = config.attentional_true_index
            response = min(size, true + 3) if fails else true
            records.append(
                RatingRecord(
                    rater_id=rid,
                    session_id=f"sim2-{rid}",
                    scale_id=rater_scales[i],
                    kind="attentional",
                    response=int(response),
                    stimulus_id=f"swatch:{true}",
                    background="gray",
                    presentation_order=order,
                    timestamp=_timestamp(order),
                    task_id=f"sim2-{rid}-att{check}",
                )
            )

    paths = {
        "subject_measurements": out / "subject_measurements.csv",
        "subject_demographics": out / "subject_demographics.csv",
        "rater_demographics": out / "rater_demographics.csv",
        "stimuli": out / "stimuli.csv",
        "ratings": out / "ratings.jsonl",
        "config": out / "config.json",
    }
    _write_csv(paths["subject_measurements"], MEASUREMENT_HEADER, meas_rows)
    header = ["person_id", "race", "ethnicity", "gender", "age_bin", "location"]
    _write_csv(paths["subject_demographics"], header, subj_demo_rows)
    _write_csv(paths["rater_demographics"], header, rater_demo_rows)
    _write_csv(paths["stimuli"], STIMULI_HEADER, stim_rows)
    with open(paths["ratings"], "w") as fh:
        for rec in records:
            fh.write(rec.to_json() + "\n")
    with open(paths["config"], "w") as fh:
        json.dump({"seed": seed, "study": 2, "config": _jsonable(config)}, fh, indent=2)
        fh.write("\n")
    return paths


def load_ratings(path) -> list[RatingRecord]:
    """Read a ratings store (JSON lines, one record per line)."""
    records: list[RatingRecord] = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(RatingRecord.from_json(line))
    return records


def _build(cls, obj: dict, path: str):
    fields = set(cls.__dataclass_fields__)
    unknown = set(obj) - fields
    if unknown:
        raise ValueError(f"{path}: unknown keys {sorted(unknown)}")
    return cls(**obj)


def study1_config_from_json(obj: dict) -> Study1SimConfig:
    """Build a study-1 simulation config from a JSON-shaped dict."""
    obj = dict(obj)
    if "scales" in obj:
        obj["scales"] = {
            sid: _build(ResponseModel, model, f"scales.{sid}")
            for sid, model in obj["scales"].items()
        }
    if "population" in obj:
        obj["population"] = _build(PopulationConfig, dict(obj["population"]), "population")
        obj["population"] = PopulationConfig(
            l_range=tuple(obj["population"].l_range),
            hue_sd=obj["population"].hue_sd,
            chroma_sd=obj["population"].chroma_sd,
        )
    return _build(Study1SimConfig, obj, "study1 config")


def study2_config_from_json(obj: dict) -> Study2SimConfig:
    """Build a study-2 simulation config from a JSON-shaped dict."""
    obj = dict(obj)
    if "model" in obj:
        obj["model"] = _build(Study2ResponseModel, dict(obj["model"]), "model")
    if "scale_ids" in obj:
        obj["scale_ids"] = tuple(obj["scale_ids"])
    if obj.get("rating_mode") == "oracle" and "oracle_scales" not in obj:
        raise ValueError("oracle rating_mode needs oracle_scales")
    return _build(Study2SimConfig, obj, "study2 config")


def _jsonable(obj):
    if hasattr(obj, "__dataclass_fields__"):
        return {k: _jsonable(v) for k, v in asdict(obj).items()}
    if isinstance(obj, Mapping):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Scale):
        return obj.scale_id
    return obj
