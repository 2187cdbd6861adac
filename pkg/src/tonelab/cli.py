"""Command line interface.

Subcommands: convert (color utilities), build-scale, analyze-study1,
analyze-study2, simulate, serve.
"""

from __future__ import annotations

import argparse
import sys

from .color import LabColor, RgbColor, ita_of, lab_to_srgb, polar_of, srgb_to_lab
from .defaults import default_scales
from .demographics import ingest_demographics
from .measurement import average_bilateral, ingest_measurements
from .ratings import exclusion_filter
from .reports import emit_study1_reports, emit_study2_reports
from .scales import generate_cst_scale, load_scale, save_scale
from .simulate import (
    ResponseModel,
    Study1SimConfig,
    Study2ResponseModel,
    Study2SimConfig,
    load_ratings,
    simulate_study1,
    simulate_study2,
    study1_config_from_json,
    study2_config_from_json,
)
from .study import StudyConfig, ingest_stimuli, run_study1, run_study2
from .survey import RatingStore, SurveyEngine


def _cmd_convert(args) -> int:
    v = args.values
    if args.target == "lab":
        lab = srgb_to_lab(RgbColor(int(v[0]), int(v[1]), int(v[2])))
        print(f"L*={lab.L_star:.4f} a*={lab.a_star:.4f} b*={lab.b_star:.4f}")
    elif args.target == "srgb":
        rgb, clipped = lab_to_srgb(LabColor(v[0], v[1], v[2]))
        note = " (out of gamut, clamped)" if clipped else ""
        print(f"r={rgb.r} g={rgb.g} b={rgb.b} hex={rgb.hex}{note}")
    elif args.target == "polar":
        p = polar_of(LabColor(v[0], v[1], v[2]))
        print(f"L*={p.L_star:.4f} hue={p.hue_deg:.4f} chroma={p.chroma:.4f}")
    else:
        cat = ita_of(LabColor(v[0], v[1], v[2]))
        print(f"ita={cat.ita_deg:.4f} category={cat.category}")
    return 0


def _cmd_build_scale(args) -> int:
    if args.measurements:
        records = ingest_measurements(args.measurements)
        averages = average_bilateral(records)
        corpus = averages.tones
        scale, hue_fit, chroma_fit = generate_cst_scale(
            corpus, k=args.k, l_range=(args.l_min, args.l_max),
            scale_id=args.scale_id, site=args.site,
        )
    else:
        import numpy as np

        from .population import sample_skin_tones

        rng = np.random.default_rng(args.seed)
        corpus = sample_skin_tones(args.corpus_size, rng)
        scale, hue_fit, chroma_fit = generate_cst_scale(
            corpus, k=args.k, l_range=(args.l_min, args.l_max), scale_id=args.scale_id
        )
    save_scale(scale, args.out)
    print(f"wrote {args.out}: {scale.size} swatches, "
          f"hue fit {hue_fit.coefficients}, chroma fit {chroma_fit.coefficients}")
    return 0


def _load_scales(paths: list[str] | None) -> dict:
    if not paths:
        return default_scales()
    scales = {}
    for p in paths:
        s = load_scale(p)
        scales[s.scale_id] = s
    return scales


def _study_config(args, **flag_overrides) -> StudyConfig:
    """Defaults, then the --config file, then explicitly set flags."""
    import json
    from dataclasses import fields

    values = {}
    if getattr(args, "config", None):
        obj = json.loads(open(args.config).read())
        known = {f.name for f in fields(StudyConfig)}
        unknown = set(obj) - known
        if unknown:
            raise SystemExit(f"study config: unknown keys {sorted(unknown)}")
        values.update(obj)
    values.update({k: v for k, v in flag_overrides.items() if v is not None})
    return StudyConfig(**values)


def _cmd_analyze_study1(args) -> int:
    measurements = ingest_measurements(args.measurements)
    demographics = ingest_demographics(args.demographics)
    ratings = load_ratings(args.ratings)
    scales = _load_scales(args.scales)
    config = _study_config(
        args,
        site_study1=args.site,
        race_reference=args.race_reference,
        location_reference=args.location_reference,
    )
    bundle = run_study1(measurements, demographics, ratings, scales, config)
    written = emit_study1_reports(bundle, args.out)
    for w in bundle.warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(f"analyzed {bundle.n_raters} raters; "
          f"removed {len(bundle.removed_demographics)} by demographics, "
          f"excluded {len(bundle.exclusions.excluded)} records "
          f"({len(bundle.exclusions.failed_raters)} raters failed attentional checks)")
    for path in written:
        print(f"wrote {path}")
    return 0


def _cmd_analyze_study2(args) -> int:
    subject_measurements = ingest_measurements(args.subject_measurements)
    subject_demographics = ingest_demographics(args.subject_demographics)
    rater_demographics = ingest_demographics(args.rater_demographics)
    stimuli = ingest_stimuli(args.stimuli)
    ratings = load_ratings(args.ratings)
    scales = _load_scales(args.scales)

    exclusions = exclusion_filter(ratings)
    tones = average_bilateral(subject_measurements).by_subject()
    config = _study_config(args, race_reference=args.race_reference)
    bundle = run_study2(
        stimuli, tones, subject_demographics, rater_demographics,
        exclusions.kept, scales, config,
    )
    written = emit_study2_reports(bundle, args.out)
    for w in bundle.warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(f"analyzed {bundle.n_raters} raters; "
          f"excluded {len(exclusions.excluded)} records "
          f"({len(exclusions.failed_raters)} raters failed attentional checks)")
    for path in written:
        print(f"wrote {path}")
    return 0


def _default_study1_config(n: int, target_r2: float | None) -> Study1SimConfig:
    # demonstration response model with effect sizes typical of palette studies
    cst = ResponseModel(
        intercept=5.45,
        lightness=-0.2027,
        hue=0.0287,
        chromaticity=0.0,
        race={"Asian": 1.1802, "Black": 1.2237, "Hispanic": 0.9801},
        background={"white": -1.1185},
        location={"CA": -0.5409},
        target_r2=target_r2 if target_r2 is not None else 0.61,
    )
    return Study1SimConfig(
        n_raters=n,
        scales={"cst": cst},
        preference_background_white=-0.8,
        preference_lightness=-0.05,
    )


def _default_study2_config(n: int, target_r2: float | None) -> Study2SimConfig:
    model = Study2ResponseModel(
        intercept=4.84,
        lightness=-0.1640,
        hue=0.0159,
        chromaticity=-0.0439,
        subject_race={"White": -2.1827},
        subject_gender={"Male": -0.1304},
        device={"D": -0.2960, "E": 0.6453},
        rater_race={"Asian": 0.2907, "Hispanic": 0.2956, "White": 0.3467},
        rater_gender={"Male": -0.0794},
        target_r2=target_r2 if target_r2 is not None else 0.89,
    )
    return Study2SimConfig(n_raters=n, model=model)


def _cmd_simulate(args) -> int:
    import json

    override = json.loads(open(args.config).read()) if args.config else None
    if args.study == 1:
        config = (
            study1_config_from_json(override)
            if override is not None
            else _default_study1_config(args.n, args.target_r2)
        )
        paths = simulate_study1(config, args.out, args.seed)
    else:
        config = (
            study2_config_from_json(override)
            if override is not None
            else _default_study2_config(args.n, args.target_r2)
        )
        paths = simulate_study2(config, args.out, args.seed)
    for name, path in paths.items():
        print(f"wrote {name}: {path}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    scales = _load_scales(args.scales)
    stimuli = ingest_stimuli(args.stimuli) if args.stimuli else []
    store = RatingStore(args.store)
    engine = SurveyEngine(scales, store, stimuli)
    app = create_app(engine, asset_dir=args.assets)
    print(f"serving {len(scales)} scales, {len(stimuli)} stimuli on "
          f"{args.host}:{args.port}; store at {store.directory}")
    uvicorn.run(app, host=args.host, port=args.port, log_level=args.log_level)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tonelab",
        description="Colorimetric skin tone toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="color space utilities")
    p.add_argument("target", choices=["lab", "srgb", "polar", "ita"],
                   help="lab: sRGB->CIELAB; srgb: CIELAB->sRGB; polar/ita take L a b")
    p.add_argument("values", nargs=3, type=float)
    p.set_defaults(func=_cmd_convert)

    p = sub.add_parser("build-scale", help="generate a colorimetric palette scale")
    p.add_argument("--measurements", help="measurement CSV to fit the corpus from")
    p.add_argument("--site", default="face", choices=["face", "hand"])
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--l-min", type=float, default=20.0)
    p.add_argument("--l-max", type=float, default=70.0)
    p.add_argument("--scale-id", default="cst")
    p.add_argument("--corpus-size", type=int, default=600,
                   help="synthetic corpus size when no measurements are given")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_build_scale)

    p = sub.add_parser("analyze-study1", help="model self-ratings")
    p.add_argument("--measurements", required=True)
    p.add_argument("--demographics", required=True)
    p.add_argument("--ratings", required=True)
    p.add_argument("--scales", nargs="*", help="scale definition files")
    p.add_argument("--site", default=None, choices=["face", "hand"])
    p.add_argument("--race-reference", default=None)
    p.add_argument("--location-reference", default=None)
    p.add_argument("--config", help="JSON file of analysis config overrides")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_analyze_study1)

    p = sub.add_parser("analyze-study2", help="model image ratings")
    p.add_argument("--subject-measurements", required=True)
    p.add_argument("--subject-demographics", required=True)
    p.add_argument("--rater-demographics", required=True)
    p.add_argument("--stimuli", required=True)
    p.add_argument("--ratings", required=True)
    p.add_argument("--scales", nargs="*")
    p.add_argument("--race-reference", default=None)
    p.add_argument("--config", help="JSON file of analysis config overrides")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_analyze_study2)

    p = sub.add_parser("simulate", help="write a planted-coefficient synthetic study")
    p.add_argument("--study", type=int, choices=[1, 2], required=True)
    p.add_argument("--n", type=int, default=1747, help="number of raters")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--target-r2", type=float, default=None)
    p.add_argument("--config", help="JSON simulation config; overrides --n/--target-r2")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("serve", help="run the survey HTTP service")
    p.add_argument("--scales", nargs="*", help="scale files; default demo set")
    p.add_argument("--stimuli", help="stimuli CSV for image-rating studies")
    p.add_argument("--assets", help="directory of stimulus image files")
    p.add_argument("--store", default="survey-store", help="rating store directory")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--log-level", default="warning")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
