"""Report bundle: tables and figures rendered straight to CSV/SVG/DOT.

SVG is emitted from computed geometry with fixed-precision coordinates
and sorted iteration everywhere, so a bundle is byte-deterministic given
the same store and configuration.  No plotting library is involved.
"""

from __future__ import annotations

import html
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bt import derive_preferences, grow_bt_tree
from .errors import IoError, TooFewObservations
from .metrics import HIGHER_IS_BETTER
from .ranks import (
    CdResult,
    ScoreMatrix,
    build_score_matrix,
    cd_analysis,
    impute_missing,
    pareto_front,
    scale_scores,
)
from .store import ResultsStore

ERROR_CATEGORIES = ("memory", "time", "data", "implementation")

CATEGORY_COLORS = {
    "memory": "#9467bd",
    "time": "#d62728",
    "data": "#ff7f0e",
    "implementation": "#8c564b",
}

DEFAULT_BT_FEATURES = (
    "n_instances",
    "n_features",
    "missing_ratio",
    "n_classes",
    "minority_class_ratio",
    "categorical_ratio",
)


@dataclass
class ReportConfig:
    out_dir: Path
    alpha: float = 0.05
    prior_framework: str = "constpred"
    scale_baseline: str | None = None  # defaults to prior_framework if present
    frameworks: list[str] | None = None
    tasks: list[str] | None = None
    constraint_id: str | None = None
    metric: str | None = None
    bt_features: tuple = DEFAULT_BT_FEATURES
    bt_max_depth: int = 3
    bt_min_node: int | None = None
    bt_seed: int = 0
    bt_permutations: int = 199
    inference_scenario: str = "file_10k"


@dataclass
class ReportBundle:
    directory: Path
    artifacts: list[str] = field(default_factory=list)
    notices: list[str] = field(default_factory=list)


def _fmt(x: float) -> str:
    return f"{x:.2f}"


class _Svg:
    def __init__(self, width: int, height: int):
        self.width = width
        self.height = height
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width} {height}" '
            f'width="{width}" height="{height}">',
            f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        ]

    def line(self, x1, y1, x2, y2, stroke="#333333", width=1.0, dash=None):
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(
            f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" y2="{_fmt(y2)}" '
            f'stroke="{stroke}" stroke-width="{_fmt(width)}"{extra}/>'
        )

    def rect(self, x, y, w, h, fill, stroke="none"):
        self.parts.append(
            f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(w)}" height="{_fmt(h)}" '
            f'fill="{fill}" stroke="{stroke}"/>'
        )

    def circle(self, cx, cy, r, fill):
        self.parts.append(
            f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(r)}" fill="{fill}"/>'
        )

    def polygon(self, points, fill, stroke="none"):
        coords = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in points)
        self.parts.append(
            f'<polygon points="{coords}" fill="{fill}" stroke="{stroke}"/>'
        )

    def text(self, x, y, content, size=12, anchor="start", color="#111111"):
        self.parts.append(
            f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-family="sans-serif" '
            f'font-size="{size}" text-anchor="{anchor}" fill="{color}">'
            f"{html.escape(str(content))}</text>"
        )

    def render(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def results_table(store: ResultsStore, tasks: list[str] | None = None) -> str:
    """CSV of per (framework, task) fold aggregates.

    Display convention: "mean±std", with the count of folds that produced
    no result appended in parentheses, and "-" when no fold completed.
    """
    task_ids = tasks if tasks is not None else store.task_ids
    lines = ["framework,task,metric,mean,std,missing_folds,display"]
    for fw in store.framework_ids:
        for task in task_ids:
            info = store.task_info(task)
            n_folds = int(info["n_folds"])
            scores = [
                r.score
                for r in store.records.values()
                if r.framework_id == fw and r.task_id == task and r.score is not None
            ]
            missing = n_folds - len(scores)
            if not scores:
                lines.append(f"{fw},{task},{info['metric']},,,{missing},-")
                continue
            mean = float(np.mean(scores))
            std = float(np.std(scores, ddof=1)) if len(scores) > 1 else 0.0
            display = f"{mean:.2f}±{std:.2f}"
            if missing:
                display += f" ({missing})"
            lines.append(
                f"{fw},{task},{info['metric']},{mean!r},{std!r},{missing},{display}"
            )
    return "\n".join(lines) + "\n"


def cd_groups(result: CdResult) -> list[tuple[int, int]]:
    """Maximal runs of frameworks (sorted by rank) whose span is < CD."""
    order = sorted(range(len(result.avg_ranks)), key=lambda i: result.avg_ranks[i])
    ranks = [result.avg_ranks[i] for i in order]
    k = len(ranks)
    runs = []
    for i in range(k):
        j = i
        while j + 1 < k and ranks[j + 1] - ranks[i] < result.critical_difference:
            j += 1
        if j > i:
            runs.append((i, j))
    # drop runs contained in another
    maximal = [
        (i, j)
        for (i, j) in runs
        if not any((a <= i and j <= b) and (a, b) != (i, j) for (a, b) in runs)
    ]
    return [tuple(order[i : j + 1]) for (i, j) in maximal]


def render_cd_svg(result: CdResult) -> str:
    """Critical-difference diagram: rank axis, framework stems, CD bar,
    connector bars linking groups that are not significantly different."""
    k = len(result.frameworks)
    width, height = 640, 180 + 18 * k
    margin = 60
    axis_y = 70
    svg = _Svg(width, height)

    def x_of(rank: float) -> float:
        return margin + (rank - 1.0) / max(k - 1.0, 1.0) * (width - 2 * margin)

    svg.line(x_of(1), axis_y, x_of(k), axis_y)
    for tick in range(1, k + 1):
        svg.line(x_of(tick), axis_y - 4, x_of(tick), axis_y + 4)
        svg.text(x_of(tick), axis_y - 10, tick, anchor="middle")

    # CD scale bar
    cd_px = x_of(1 + result.critical_difference) - x_of(1)
    svg.line(margin, 30, margin + cd_px, 30, stroke="#555555", width=2)
    svg.text(margin + cd_px + 8, 34, f"CD = {result.critical_difference:.4f}", size=11)
    svg.text(
        width - margin, 34,
        f"Friedman chi2 = {result.friedman_chi2:.3f}, p = {result.friedman_pvalue:.4f}",
        size=11, anchor="end",
    )

    order = sorted(range(k), key=lambda i: result.avg_ranks[i])
    for slot, idx in enumerate(order):
        rank = result.avg_ranks[idx]
        stem_y = axis_y + 26 + 18 * slot
        svg.line(x_of(rank), axis_y, x_of(rank), stem_y, stroke="#888888", width=0.8)
        svg.text(
            x_of(rank) + 4, stem_y + 4,
            f"{result.frameworks[idx]} ({rank:.2f})", size=11,
        )

    bar_y = axis_y + 8
    for group in cd_groups(result):
        lo = min(result.avg_ranks[i] for i in group)
        hi = max(result.avg_ranks[i] for i in group)
        svg.line(x_of(lo) - 3, bar_y, x_of(hi) + 3, bar_y, stroke="#111111", width=3)
        bar_y += 6
    return svg.render()


def render_error_stacks(store: ResultsStore) -> str:
    """Stacked error counts per framework by category."""
    frameworks = store.framework_ids
    counts = {
        fw: {cat: 0 for cat in ERROR_CATEGORIES} for fw in frameworks
    }
    for r in store.records.values():
        if r.status != "ok" and r.framework_id in counts:
            counts[r.framework_id][r.status] += 1
    width, height = 640, 320
    margin_left, margin_bottom, margin_top = 60, 70, 30
    plot_h = height - margin_bottom - margin_top
    max_total = max(
        (sum(c.values()) for c in counts.values()), default=0
    )
    svg = _Svg(width, height)
    svg.text(margin_left, 20, "Errors by category", size=13)
    slot_w = (width - margin_left - 20) / max(len(frameworks), 1)
    for i, fw in enumerate(frameworks):
        x = margin_left + i * slot_w + slot_w * 0.15
        bar_w = slot_w * 0.7
        y = height - margin_bottom
        for cat in ERROR_CATEGORIES:
            n = counts[fw][cat]
            if n == 0 or max_total == 0:
                continue
            h = n / max_total * plot_h
            y -= h
            svg.rect(x, y, bar_w, h, fill=CATEGORY_COLORS[cat])
        total = sum(counts[fw].values())
        svg.text(
            x + bar_w / 2, height - margin_bottom + 16, fw, size=10, anchor="middle"
        )
        svg.text(
            x + bar_w / 2, height - margin_bottom + 30, f"{total} err",
            size=9, anchor="middle", color="#555555",
        )
    legend_x = margin_left
    for cat in ERROR_CATEGORIES:
        svg.rect(legend_x, height - 24, 10, 10, fill=CATEGORY_COLORS[cat])
        svg.text(legend_x + 14, height - 15, cat, size=10)
        legend_x += 120
    svg.line(
        margin_left - 6, margin_top, margin_left - 6, height - margin_bottom,
        stroke="#333333",
    )
    svg.text(margin_left - 12, margin_top + 10, str(max_total), size=9, anchor="end")
    return svg.render()


def render_error_times(store: ResultsStore) -> str:
    """Histogram of failed-job wall times relative to the budget."""
    budget = float(store.metadata.get("constraint", {}).get("max_runtime_s", 1.0))
    leniency = float(store.metadata.get("constraint", {}).get("leniency_s", 0.0))
    ratios = [
        r.wall_time_s / budget
        for r in store.records.values()
        if r.status != "ok"
    ]
    width, height = 640, 260
    margin_left, margin_bottom, margin_top = 60, 50, 30
    plot_w = width - margin_left - 30
    plot_h = height - margin_bottom - margin_top
    svg = _Svg(width, height)
    svg.text(margin_left, 20, "When errors occurred (wall time / budget)", size=13)
    limit = max(1.5, (leniency + budget) / budget + 0.25)
    bins = 12
    counts = [0] * bins
    for ratio in ratios:
        idx = min(int(ratio / limit * bins), bins - 1)
        counts[idx] += 1
    peak = max(counts + [1])
    for i, n in enumerate(counts):
        if n == 0:
            continue
        x = margin_left + i / bins * plot_w
        h = n / peak * plot_h
        svg.rect(x, height - margin_bottom - h, plot_w / bins - 2, h, fill="#1f77b4")
    for ratio, color, label in (
        (1.0, "#888888", "budget"),
        ((budget + leniency) / budget, "#d62728", "leniency end"),
    ):
        if ratio <= limit:
            x = margin_left + ratio / limit * plot_w
            svg.line(x, margin_top, x, height - margin_bottom, stroke=color, dash="4,3")
            svg.text(x + 3, margin_top + 12, label, size=9, color=color)
    svg.line(
        margin_left, height - margin_bottom, margin_left + plot_w, height - margin_bottom,
        stroke="#333333",
    )
    svg.text(margin_left, height - margin_bottom + 16, "0", size=9)
    svg.text(
        margin_left + plot_w, height - margin_bottom + 16, f"{limit:.1f}x",
        size=9, anchor="end",
    )
    return svg.render()


def render_budget_violin(store: ResultsStore) -> str:
    """Per-framework training-duration distribution with budget guides.

    Only jobs that finished or timed out contribute, mirroring the
    exclusion of non-time failures from timing plots; timeout counts are
    annotated beside each framework.
    """
    budget = float(store.metadata.get("constraint", {}).get("max_runtime_s", 1.0))
    leniency = float(store.metadata.get("constraint", {}).get("leniency_s", 0.0))
    frameworks = store.framework_ids
    width = 640
    row_h = 46
    margin_left, margin_top = 130, 50
    height = margin_top + row_h * len(frameworks) + 40
    plot_w = width - margin_left - 40
    limit = max(budget + leniency, 1e-9) * 1.2
    svg = _Svg(width, height)
    svg.text(margin_left, 20, "Training durations vs budget", size=13)

    def x_of(seconds: float) -> float:
        return margin_left + min(seconds / limit, 1.0) * plot_w

    for guide, color, label in (
        (budget, "#888888", "budget"),
        (budget + leniency, "#d62728", "leniency end"),
    ):
        x = x_of(guide)
        svg.line(x, margin_top - 10, x, height - 30, stroke=color, dash="4,3")
        svg.text(x, margin_top - 14, label, size=9, color=color, anchor="middle")

    for i, fw in enumerate(sorted(frameworks)):
        durations = sorted(
            (r.training_duration_s if r.training_duration_s is not None else r.wall_time_s)
            for r in store.records.values()
            if r.framework_id == fw and r.status in ("ok", "time")
        )
        timeouts = sum(
            1
            for r in store.records.values()
            if r.framework_id == fw and r.status == "time"
        )
        cy = margin_top + row_h * i + row_h / 2
        svg.text(8, cy + 4, fw, size=11)
        if timeouts:
            svg.text(width - 8, cy + 4, f"{timeouts} timeouts", size=9,
                     anchor="end", color="#d62728")
        if not durations:
            continue
        qs = [np.quantile(durations, q) for q in np.linspace(0, 1, 11)]
        top = [(x_of(q), cy - 8 - 6 * _near_density(qs, q)) for q in qs]
        bottom = [(x_of(q), cy + 8 + 6 * _near_density(qs, q)) for q in reversed(qs)]
        svg.polygon(top + bottom, fill="#aec7e8", stroke="#1f77b4")
        svg.line(x_of(qs[5]), cy - 12, x_of(qs[5]), cy + 12, stroke="#1f77b4", width=2)
    svg.line(margin_left, height - 30, margin_left + plot_w, height - 30, stroke="#333333")
    svg.text(margin_left, height - 14, "0 s", size=9)
    svg.text(margin_left + plot_w, height - 14, f"{limit:.0f} s", size=9, anchor="end")
    return svg.render()


def _near_density(quantiles, q) -> float:
    """Crude bump sizing for the quantile silhouette (deterministic)."""
    spread = max(quantiles[-1] - quantiles[0], 1e-9)
    center = 0.5 * (quantiles[-1] + quantiles[0])
    return max(0.0, 1.0 - abs(q - center) / spread)


def render_scaled_boxplot(sm: ScoreMatrix, baseline: str) -> tuple[str, list[str]]:
    """Boxplots of per-task scaled scores (baseline 0, best 1) per framework.

    Whiskers at 1.5 * IQR; the count of outliers beyond the whiskers is
    annotated on the axis."""
    scaled, excluded = scale_scores(sm, baseline)
    frameworks = sm.frameworks
    width = 640
    row_h = 40
    margin_left, margin_top = 130, 44
    height = margin_top + row_h * len(frameworks) + 40
    plot_w = width - margin_left - 40
    lo, hi = -1.0, 1.25
    svg = _Svg(width, height)
    svg.text(margin_left, 18, f"Scaled scores ({baseline} = 0, best = 1)", size=13)

    def x_of(v: float) -> float:
        return margin_left + (min(max(v, lo), hi) - lo) / (hi - lo) * plot_w

    for v, label in ((0.0, "0"), (1.0, "1")):
        svg.line(x_of(v), margin_top - 8, x_of(v), height - 30, stroke="#cccccc", dash="3,3")
        svg.text(x_of(v), margin_top - 12, label, size=9, anchor="middle")
    for i, fw in enumerate(frameworks):
        values = scaled[i, :]
        values = values[~np.isnan(values)]
        cy = margin_top + row_h * i + row_h / 2
        svg.text(8, cy + 4, fw, size=11)
        if values.size == 0:
            continue
        q1, q2, q3 = (float(np.quantile(values, q)) for q in (0.25, 0.5, 0.75))
        iqr = q3 - q1
        whisker_lo = min(
            (v for v in values if v >= q1 - 1.5 * iqr), default=q1
        )
        whisker_hi = max(
            (v for v in values if v <= q3 + 1.5 * iqr), default=q3
        )
        outliers = int(np.sum((values < whisker_lo) | (values > whisker_hi)))
        svg.line(x_of(whisker_lo), cy, x_of(q1), cy, stroke="#333333")
        svg.line(x_of(q3), cy, x_of(whisker_hi), cy, stroke="#333333")
        svg.rect(x_of(q1), cy - 9, max(x_of(q3) - x_of(q1), 0.5), 18,
                 fill="#aec7e8", stroke="#1f77b4")
        svg.line(x_of(q2), cy - 9, x_of(q2), cy + 9, stroke="#1f77b4", width=2)
        if outliers:
            svg.text(width - 8, cy + 4, f"{outliers} outliers", size=9,
                     anchor="end", color="#555555")
    svg.line(margin_left, height - 30, margin_left + plot_w, height - 30,
             stroke="#333333")
    return svg.render(), excluded


def render_pareto(points: dict[str, tuple[float, float]], scenario: str) -> str:
    """Scatter of (rows/second, mean scaled score) with the Pareto front."""
    width, height = 640, 360
    margin_left, margin_bottom, margin_top = 80, 60, 40
    plot_w = width - margin_left - 40
    plot_h = height - margin_bottom - margin_top
    svg = _Svg(width, height)
    svg.text(margin_left, 20, f"Accuracy vs inference speed ({scenario})", size=13)
    speeds = [p[0] for p in points.values()]
    scores = [p[1] for p in points.values()]
    lo_x = min(speeds) * 0.8
    hi_x = max(speeds) * 1.25

    def x_of(speed: float) -> float:
        # log scale: inference speeds span orders of magnitude
        return margin_left + (np.log(speed) - np.log(lo_x)) / (
            np.log(hi_x) - np.log(lo_x)
        ) * plot_w

    lo_y = min(min(scores), 0.0) - 0.1
    hi_y = max(max(scores), 1.0) + 0.1

    def y_of(score: float) -> float:
        return height - margin_bottom - (score - lo_y) / (hi_y - lo_y) * plot_h

    front = pareto_front(points.values())
    svg.parts.append(
        '<polyline fill="none" stroke="#d62728" stroke-width="1.5" points="'
        + " ".join(f"{_fmt(x_of(x))},{_fmt(y_of(y))}" for x, y in front)
        + '"/>'
    )
    for fw in sorted(points):
        speed, score = points[fw]
        on_front = (float(speed), float(score)) in front
        svg.circle(x_of(speed), y_of(score), 4,
                   fill="#d62728" if on_front else "#1f77b4")
        svg.text(x_of(speed) + 6, y_of(score) - 6, fw, size=9)
    svg.line(margin_left, height - margin_bottom, margin_left + plot_w,
             height - margin_bottom, stroke="#333333")
    svg.text(margin_left + plot_w / 2, height - 20, "rows / second (log)",
             size=10, anchor="middle")
    svg.text(16, margin_top + plot_h / 2, "scaled score", size=10)
    return svg.render()


def _pareto_points(store: ResultsStore, sm: ScoreMatrix, baseline: str,
                   scenario: str) -> dict[str, tuple[float, float]] | None:
    rates: dict[str, list[float]] = {}
    for r in store.records.values():
        if r.inference and scenario in r.inference:
            rates.setdefault(r.framework_id, []).append(
                r.inference[scenario]["rows_per_second"]
            )
    if not rates:
        return None
    scaled, _ = scale_scores(sm, baseline)
    points = {}
    for fw, values in sorted(rates.items()):
        if fw not in sm.frameworks:
            continue
        i = sm.frameworks.index(fw)
        mean_scaled = float(np.nanmean(scaled[i, :]))
        points[fw] = (float(np.median(values)), mean_scaled)
    return points or None


def bundle_report(store: ResultsStore, config: ReportConfig) -> ReportBundle:
    """Write the full report directory; every artifact is deterministic."""
    out = Path(config.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create {out}: {exc}") from exc
    bundle = ReportBundle(directory=out)

    def emit(name: str, content: str):
        (out / name).write_text(content, encoding="utf-8")
        bundle.artifacts.append(name)

    emit("results.csv", results_table(store, config.tasks))

    sm = build_score_matrix(
        store, config.frameworks, config.tasks, config.prior_framework,
        constraint_id=config.constraint_id, metric=config.metric,
    )
    analysis_done = False
    try:
        sm = impute_missing(sm)
        analysis_done = True
    except Exception as exc:
        bundle.notices.append(f"imputation unavailable: {exc}")

    if analysis_done and sm.k >= 2 and sm.n_tasks >= 2:
        emit("cd.svg", render_cd_svg(cd_analysis(sm, config.alpha)))
    else:
        bundle.notices.append("CD diagram omitted: needs >= 2 frameworks and tasks")

    baseline = config.scale_baseline or (
        config.prior_framework if config.prior_framework in sm.frameworks else None
    )
    if analysis_done and baseline:
        svg, excluded = render_scaled_boxplot(sm, baseline)
        emit("scaled_boxplot.svg", svg)
        for task in excluded:
            bundle.notices.append(f"task {task} excluded from scaling (degenerate)")
    elif analysis_done:
        bundle.notices.append("scaled boxplot omitted: no baseline column")

    emit("error_stacks.svg", render_error_stacks(store))
    emit("error_times.svg", render_error_times(store))
    emit("budget_violin.svg", render_budget_violin(store))

    if analysis_done and baseline:
        points = _pareto_points(store, sm, baseline, config.inference_scenario)
        if points:
            emit("pareto.svg", render_pareto(points, config.inference_scenario))
        else:
            bundle.notices.append("Pareto section absent: no inference measurements")

    if analysis_done:
        metafeatures = {
            t["id"]: t.get("metafeatures", {}) for t in store.metadata.get("tasks", [])
        }
        features = [
            f
            for f in config.bt_features
            if all(f in m for m in metafeatures.values())
        ]
        try:
            observations = derive_preferences(sm, metafeatures)
            tree = grow_bt_tree(
                observations,
                features,
                sm.frameworks,
                alpha=config.alpha,
                max_depth=config.bt_max_depth,
                min_node=config.bt_min_node,
                permutations=config.bt_permutations,
                seed=config.bt_seed,
            )
            emit("tree-preferences.dot", tree.to_dot())
            emit(
                "tree-preferences.json",
                json.dumps(tree.to_json(), indent=2, sort_keys=True) + "\n",
            )
        except TooFewObservations as exc:
            bundle.notices.append(f"BT tree omitted: {exc}")

    emit("index.html", _index_html(store, config, bundle))
    return bundle


def _index_html(store: ResultsStore, config: ReportConfig, bundle: ReportBundle) -> str:
    meta = store.metadata
    rows = []
    for name in bundle.artifacts:
        if name.endswith(".svg"):
            rows.append(f'<h2>{name}</h2><img src="{name}" alt="{name}"/>')
        elif name != "index.html":
            rows.append(f'<p><a href="{name}">{name}</a></p>')
    notices = "".join(f"<li>{html.escape(n)}</li>" for n in bundle.notices)
    constraint = meta.get("constraint", {})
    repro = {
        "suite": meta.get("suite_id"),
        "constraint": constraint.get("id"),
        "budget_s": constraint.get("max_runtime_s"),
        "leniency_s": constraint.get("leniency_s"),
        "seed": meta.get("seed"),
        "stratified_splits": meta.get("stratified"),
        "tool_version": meta.get("tool_version"),
        "run_started": meta.get("created_at"),
        "frameworks": ", ".join(
            f"{f['id']} ({f.get('version_label') or 'n/a'})"
            for f in meta.get("frameworks", [])
        ),
    }
    repro_rows = "".join(
        f"<tr><td>{html.escape(str(k))}</td><td>{html.escape(str(v))}</td></tr>"
        for k, v in repro.items()
    )
    return (
        "<!DOCTYPE html>\n<html><head><meta charset='utf-8'>"
        "<title>Benchmark report</title></head><body>\n"
        f"<h1>Benchmark report: {html.escape(str(meta.get('suite_id')))}</h1>\n"
        f"<h2>Reproducibility</h2><table border='1'>{repro_rows}</table>\n"
        + (f"<h2>Notices</h2><ul>{notices}</ul>\n" if bundle.notices else "")
        + "\n".join(rows)
        + "\n</body></html>\n"
    )
