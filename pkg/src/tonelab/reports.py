"""Report rendering: fixed-layout text tables with machine-readable CSV twins.

Model reports carry the estimate, standard error, test statistic, p-value,
lightness ratio, and fit statistic per coefficient row. Consistency
reports carry one row per scale and device. CSV twins hold full-precision
values so they re-parse to the exact numbers.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Sequence

from .stats.design import INTERCEPT
from .stats.linear import ModelFit
from .stats.mixed import MixedFit
from .study import Study1Bundle, Study2Bundle

STUDY1_COLUMNS = (
    "Estimate",
    "Standard Error",
    "t-statistic",
    "p-value",
    "L* Ratio",
    "Adjusted R²",
)
STUDY2_COLUMNS = (
    "Estimate",
    "Standard Error",
    "95% Confidence Interval",
    "L* Ratio",
    "Conditional R²",
)
ICC_COLUMNS = ("Scale", "Device", "ICC (single)", "ICC (average)")


def _fmt(v, nd=4) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        if v != v:  # nan
            return "nan"
        if v != 0 and (abs(v) < 1e-3 or abs(v) >= 1e5):
            return f"{v:.2e}"
        return f"{v:.{nd}f}"
    return str(v)


def _text_table(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    rows = [list(map(str, r)) for r in rows]
    widths = [len(h) for h in header]
    for r in rows:
        for i, cell in enumerate(r):
            widths[i] = max(widths[i], len(cell))
    def line(cells):
        return "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()
    out = [line(header), line("-" * w for w in widths)]
    out.extend(line(r) for r in rows)
    return "\n".join(out) + "\n"


def _model_rows(scale_id: str, fit: ModelFit | MixedFit, ratios: dict[str, float] | None):
    is_mixed = isinstance(fit, MixedFit)
    fit_stat = fit.conditional_r2 if is_mixed else fit.adj_r2
    first = True
    for col in fit.columns:
        if col == INTERCEPT:
            continue
        ratio = ratios.get(col) if ratios else None
        if is_mixed:
            lo, hi = fit.conf_int[col]
            middle = [f"({_fmt(lo)}, {_fmt(hi)})"]
            mid_csv = [lo, hi]
        else:
            middle = [_fmt(fit.t_stats[col]), _fmt(fit.p_values[col])]
            mid_csv = [fit.t_stats[col], fit.p_values[col]]
        yield (
            [scale_id, col, _fmt(fit.coefficients[col]), _fmt(fit.std_errors[col])]
            + middle
            + [_fmt(ratio), _fmt(fit_stat) if first else ""],
            [scale_id, col, fit.coefficients[col], fit.std_errors[col]]
            + mid_csv
            + [ratio if ratio is not None else "", fit_stat if first else ""],
        )
        first = False


def _write_model_report(
    path_base: Path,
    columns: Sequence[str],
    per_scale: Iterable[tuple[str, ModelFit | MixedFit, dict[str, float] | None]],
    csv_columns: Sequence[str],
) -> list[Path]:
    text_rows = []
    csv_rows = []
    for scale_id, fit, ratios in per_scale:
        for text_row, csv_row in _model_rows(scale_id, fit, ratios):
            text_rows.append(text_row)
            csv_rows.append(csv_row)
    text_path = path_base.with_suffix(".txt")
    with open(text_path, "w") as fh:
        fh.write(_text_table(("Scale", "Covariate") + tuple(columns), text_rows))
    csv_path = path_base.with_suffix(".csv")
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(csv_columns)
        for row in csv_rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return [text_path, csv_path]


STUDY1_CSV_COLUMNS = (
    "scale", "covariate", "estimate", "standard_error",
    "t_statistic", "p_value", "l_star_ratio", "adjusted_r2",
)
STUDY2_CSV_COLUMNS = (
    "scale", "covariate", "estimate", "standard_error",
    "ci_low", "ci_high", "l_star_ratio", "conditional_r2",
)


def emit_study1_reports(bundle: Study1Bundle, outdir) -> list[Path]:
    """Write the self-rating study reports; returns the files written."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    written += _write_model_report(
        out / "models",
        STUDY1_COLUMNS,
        ((sid, a.fit, a.ratios) for sid, a in sorted(bundle.scales.items())),
        STUDY1_CSV_COLUMNS,
    )

    acc_rows = []
    for sid, a in sorted(bundle.scales.items()):
        for background, table in sorted(a.accuracy_by_background.items()):
            for index, entry in sorted(table.items()):
                acc_rows.append([sid, background, index, entry.n, repr(entry.delta_e)])
    written.append(_write_simple(out / "accuracy.csv",
                                 ["scale", "background", "swatch", "n", "delta_e"], acc_rows))

    util_rows = [
        [sid, repr(a.utilization) if a.utilization is not None else ""]
        for sid, a in sorted(bundle.scales.items())
    ]
    written.append(_write_simple(out / "utilization.csv", ["scale", "utilization"], util_rows))

    pref_rows = []
    if bundle.preference:
        for (background, race), (n, share) in bundle.preference.cells.items():
            pref_rows.append([background, race, n, repr(share)])
    written.append(_write_simple(out / "preference.csv",
                                 ["background", "race", "n", "share_preferring_target"],
                                 pref_rows))

    excl_rows = [[e.record.rater_id, e.record.kind, e.record.task_id or "", e.reason]
                 for e in bundle.exclusions.excluded]
    written.append(_write_simple(out / "exclusions.csv",
                                 ["rater_id", "kind", "task_id", "reason"], excl_rows))
    return written


def emit_study2_reports(bundle: Study2Bundle, outdir) -> list[Path]:
    """Write the image-rating study reports; returns the files written."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    written += _write_model_report(
        out / "models",
        STUDY2_COLUMNS,
        ((sid, a.fit, a.ratios) for sid, a in sorted(bundle.scales.items())),
        STUDY2_CSV_COLUMNS,
    )

    icc_text_rows = []
    icc_csv_rows = []
    for sid, a in sorted(bundle.scales.items()):
        for device, icc in sorted(a.icc_by_device.items()):
            icc_text_rows.append(
                [sid, device, _fmt(icc.icc_single), _fmt(icc.icc_average)]
            )
            icc_csv_rows.append([sid, device, repr(icc.icc_single), repr(icc.icc_average),
                                 icc.n_targets, icc.k_raters])
    icc_txt = out / "icc.txt"
    with open(icc_txt, "w") as fh:
        fh.write(_text_table(ICC_COLUMNS, icc_text_rows))
    written.append(icc_txt)
    written.append(_write_simple(
        out / "icc.csv",
        ["scale", "device", "icc_single", "icc_average", "n_targets", "k_raters"],
        icc_csv_rows))

    acc_rows = []
    for sid, a in sorted(bundle.scales.items()):
        for index, entry in sorted(a.accuracy.items()):
            acc_rows.append([sid, index, entry.n, repr(entry.delta_e)])
    written.append(_write_simple(out / "accuracy.csv",
                                 ["scale", "swatch", "n", "delta_e"], acc_rows))
    return written


def _write_simple(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return path
