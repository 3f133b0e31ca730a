"""CSV tables and SVG charts for evaluation results.

SVG rendering uses matplotlib's Agg backend with a fixed hash salt and no
date metadata, so the same results always render to the same bytes.
"""

from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

from evaluation.metrics import ErrorSummary, summaries_frame  # noqa: E402
from evaluation.settings import evaluation_settings  # noqa: E402
from utils.errors import EvaluationError  # noqa: E402
from utils.log import logger  # noqa: E402

REPORT_FORMATS = ("csv", "svg")
CdfPoints = List[Tuple[float, float]]


def write_frame(frame: pd.DataFrame, path: Path) -> Path:
    try:
        frame.to_csv(path, index=False, float_format=evaluation_settings.float_format, lineterminator="\n")
    except OSError as e:
        raise EvaluationError(f"cannot write {path}: {e.strerror or e}")
    return path


def _save_svg(figure: plt.Figure, path: Path) -> Path:
    try:
        with matplotlib.rc_context({"svg.hashsalt": evaluation_settings.svg_hashsalt, "svg.fonttype": "none"}):
            figure.savefig(path, format="svg", metadata={"Date": None})
    except OSError as e:
        raise EvaluationError(f"cannot write {path}: {e.strerror or e}")
    finally:
        plt.close(figure)
    return path


def _group_label(summary: ErrorSummary) -> str:
    return " / ".join(summary.key.values()) or "all"


def plot_cdfs(cdfs: Mapping[str, CdfPoints], path: Path) -> Path:
    figure, axes = plt.subplots(figsize=(6, 4))
    for name in sorted(cdfs):
        points = cdfs[name]
        xs = [0.0] + [100.0 * err for err, _ in points]
        ys = [0.0] + [fraction for _, fraction in points]
        axes.step(xs, ys, where="post", label=name)
    axes.set_xlabel("prediction error (%)")
    axes.set_ylabel("cumulative fraction")
    axes.set_ylim(0.0, 1.05)
    axes.grid(True, linewidth=0.3)
    axes.legend(loc="lower right")
    figure.tight_layout()
    return _save_svg(figure, path)


def plot_summaries(summaries: Sequence[ErrorSummary], path: Path) -> Path:
    """Bar chart of the MPE per group."""
    figure, axes = plt.subplots(figsize=(max(4.0, 0.6 * len(summaries) + 2.0), 4))
    labels = [_group_label(summary) for summary in summaries]
    axes.bar(range(len(summaries)), [100.0 * summary.mpe for summary in summaries])
    axes.set_xticks(range(len(summaries)))
    axes.set_xticklabels(labels, rotation=45, ha="right")
    axes.set_ylabel("MPE (%)")
    axes.grid(True, axis="y", linewidth=0.3)
    figure.tight_layout()
    return _save_svg(figure, path)


def cdf_frame(cdfs: Mapping[str, CdfPoints]) -> pd.DataFrame:
    rows = [
        {"curve": name, "err": err, "fraction": fraction}
        for name in sorted(cdfs)
        for err, fraction in cdfs[name]
    ]
    return pd.DataFrame(rows, columns=["curve", "err", "fraction"])


def emit_report(
    summaries: Sequence[ErrorSummary],
    cdfs: Mapping[str, CdfPoints],
    formats: Iterable[str],
    out_dir: Union[str, Path],
    prefix: str = "",
) -> List[Path]:
    """Write the summary table and the CDF curves in every requested format."""
    formats = list(dict.fromkeys(formats))
    unknown = [f for f in formats if f not in REPORT_FORMATS]
    if unknown:
        raise EvaluationError(f"unknown report format(s) {unknown}, expected {list(REPORT_FORMATS)}")
    if not summaries:
        raise EvaluationError("no summaries to report")

    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise EvaluationError(f"cannot create report directory {out_dir}: {e.strerror or e}")

    written: Dict[str, Path] = {}
    if "csv" in formats:
        written["summary.csv"] = write_frame(summaries_frame(summaries), out_dir / f"{prefix}summary.csv")
        if cdfs:
            written["cdf.csv"] = write_frame(cdf_frame(cdfs), out_dir / f"{prefix}cdf.csv")
    if "svg" in formats:
        written["summary.svg"] = plot_summaries(summaries, out_dir / f"{prefix}summary.svg")
        if cdfs:
            written["cdf.svg"] = plot_cdfs(cdfs, out_dir / f"{prefix}cdf.svg")

    for path in written.values():
        logger.info(f"Wrote {path}")
    return list(written.values())
