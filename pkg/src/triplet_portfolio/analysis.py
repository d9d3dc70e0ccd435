"""Pipeline orchestration and report emission.

`run_analysis` drives ingestion, per-interval statistics, grid search,
geometry, and the closed-form optimum, then writes a plain-text report
plus machine-readable CSV tables and plot-data files. Every failure is
tagged with the stage (and asset, where applicable) that produced it,
and nothing is written unless the whole analysis succeeded.

Reports contain no timestamps or other run-varying content: two runs on
the same data with the same configuration are byte-identical.
"""

from __future__ import annotations

import datetime as dt
import hashlib
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import dfa as _dfa
from . import pareto as _pareto
from . import simplex as _simplex
from .errors import DataError, PortfolioError, StageError
from .returns import (
    StatisticsBundle,
    WeightVector,
    compute_returns,
    covariance_matrix,
    load_price_panel,
    mean_returns,
    portfolio_return,
    portfolio_variance,
)

DEFAULT_INTERVALS = tuple(range(1, 11))
VERTEX_LABELS = ("w_R", "w_H", "w_sigma")
OPTIMUM_LABELS = ("centroid", "incenter", "fermat", "pareto")


@dataclass(frozen=True)
class AnalysisConfig:
    """Everything `run_analysis` needs, validated on construction."""

    input_path: Path
    output_dir: Path
    intervals: tuple[int, ...] = DEFAULT_INTERVALS
    date_range: tuple[dt.date | None, dt.date | None] | None = None
    grid_resolution: int = 100
    poly_order: int = 1
    min_scale: int = 5
    max_scale: int | None = None
    scale_count: int = 20
    covariance_mode: str = "sample"
    risk_aversion: float = 1.0
    heron_convention: str = "standard"

    def __post_init__(self):
        object.__setattr__(self, "input_path", Path(self.input_path))
        object.__setattr__(self, "output_dir", Path(self.output_dir))
        object.__setattr__(self, "intervals", tuple(int(t) for t in self.intervals))
        if not self.intervals:
            raise DataError("intervals must be non-empty")
        if any(t < 1 for t in self.intervals):
            raise DataError(f"intervals must all be >= 1, got {self.intervals}")
        if self.grid_resolution < 10:
            raise DataError(
                f"grid_resolution must be >= 10, got {self.grid_resolution}"
            )
        if self.covariance_mode not in ("sample", "population"):
            raise DataError(
                f"covariance_mode must be 'sample' or 'population', got {self.covariance_mode!r}"
            )
        if self.heron_convention not in ("standard", "thirds"):
            raise DataError(
                f"heron_convention must be 'standard' or 'thirds', got {self.heron_convention!r}"
            )
        if self.risk_aversion <= 0:
            raise DataError(f"risk_aversion must be positive, got {self.risk_aversion}")

    def dfa_config(self) -> _dfa.DfaConfig:
        return _dfa.DfaConfig(
            poly_order=self.poly_order,
            min_scale=self.min_scale,
            max_scale=self.max_scale,
            scale_count=self.scale_count,
        )


@dataclass(frozen=True)
class IntervalBlock:
    """All results for one time interval."""

    interval_days: int
    stats: StatisticsBundle
    dfa_results: tuple[_dfa.DfaResult, ...]
    triangle: _simplex.OptimalTriangle
    optimum: _simplex.GlobalOptimum
    pareto: _pareto.ParetoSolution
    numerical_weight: WeightVector | None
    numerical_constrained: bool | None

    def reported_pareto(self) -> tuple[WeightVector, str]:
        """Usable allocation: analytic when on the simplex, else the grid one."""
        if self.pareto.feasible_on_simplex:
            return WeightVector(self.pareto.weight), "analytic"
        label = "numerical" if self.numerical_constrained else "numerical-unconstrained"
        return self.numerical_weight, label

    def optimum_weights(self) -> dict[str, WeightVector | None]:
        reported, _ = self.reported_pareto()
        return {
            "centroid": self.optimum.centroid,
            "incenter": self.optimum.incenter,
            "fermat": self.optimum.fermat,
            "pareto": reported,
        }


@dataclass(frozen=True)
class LabelSummary:
    """Across-interval mean/sd/sem of a weight vector and its daily return."""

    label: str
    mean_weight: np.ndarray
    sd_weight: np.ndarray
    sem_weight: np.ndarray
    mean_daily_return: float
    sd_daily_return: float
    sem_daily_return: float
    n_intervals: int


@dataclass(frozen=True)
class AveragedBlock:
    """Eq-style averages of local and derived optima across intervals."""

    vertices: _simplex.AveragedTriangle
    summaries: tuple[LabelSummary, ...]

    def summary(self, label: str) -> LabelSummary | None:
        for s in self.summaries:
            if s.label == label:
                return s
        return None


@dataclass(frozen=True)
class AnalysisReport:
    config: AnalysisConfig
    data_fingerprint: str
    asset_ids: tuple[str, ...]
    n_dates: int
    first_date: dt.date
    last_date: dt.date
    blocks: tuple[IntervalBlock, ...]
    averaged: AveragedBlock
    written_files: tuple[str, ...] = field(default=())


@dataclass(frozen=True)
class TableRendering:
    """One report table in both human and machine form."""

    text: str
    csv: str


def _stage(name: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except StageError:
        raise
    except PortfolioError as exc:
        raise StageError(name, str(exc)) from exc


def _daily_return(w, stats: StatisticsBundle) -> float:
    """Per-interval mean return converted to its daily equivalent."""
    return portfolio_return(w, stats) / stats.interval_days


def _volatility(w, stats: StatisticsBundle) -> float:
    return float(np.sqrt(portfolio_variance(w, stats)))


def run_analysis(config: AnalysisConfig, write: bool = True) -> AnalysisReport:
    """Run the full pipeline and (by default) write the report files.

    Files are only written after every interval has been analyzed, so a
    failure in any stage leaves the output directory untouched.
    """
    panel = _stage(
        "load", load_price_panel, config.input_path, config.date_range
    )
    fingerprint = hashlib.sha256(Path(config.input_path).read_bytes()).hexdigest()

    grid = _stage(
        "grid", _simplex.enumerate_simplex, panel.n_assets, config.grid_resolution
    )
    dfa_config = config.dfa_config()

    blocks = []
    for tau in config.intervals:
        rm = _stage(f"returns[tau={tau}]", compute_returns, panel, tau)
        dfa_results = []
        for asset_id, row in zip(panel.asset_ids, rm.returns):
            result = _stage(
                f"dfa[asset={asset_id},tau={tau}]", _dfa.estimate_hurst, row, dfa_config
            )
            dfa_results.append(result)
        def _build_stats(rm=rm, dfa_results=dfa_results, tau=tau):
            return StatisticsBundle(
                mean_returns=mean_returns(rm),
                covariance=covariance_matrix(rm, mode=config.covariance_mode),
                hurst=np.array([r.hurst for r in dfa_results]),
                interval_days=tau,
                asset_ids=panel.asset_ids,
            )

        stats = _stage(f"statistics[tau={tau}]", _build_stats)
        triangle = _stage(f"grid-search[tau={tau}]", _simplex.local_optima, stats, grid)
        optimum = _stage(
            f"geometry[tau={tau}]",
            _simplex.global_optimum,
            triangle,
            grid,
            config.heron_convention,
        )
        solution = _stage(
            f"pareto[tau={tau}]", _pareto.pareto_weight, stats, config.risk_aversion
        )
        if solution.feasible_on_simplex:
            numerical_weight, numerical_constrained = None, None
        else:
            numerical_weight, numerical_constrained = _stage(
                f"pareto-fallback[tau={tau}]",
                _simplex.grid_constrained_maximizer,
                stats,
                grid,
                config.risk_aversion,
            )
        blocks.append(
            IntervalBlock(
                interval_days=tau,
                stats=stats,
                dfa_results=tuple(dfa_results),
                triangle=triangle,
                optimum=optimum,
                pareto=solution,
                numerical_weight=numerical_weight,
                numerical_constrained=numerical_constrained,
            )
        )

    averaged = _stage("averaging", _build_averaged, blocks)
    report = AnalysisReport(
        config=config,
        data_fingerprint=fingerprint,
        asset_ids=panel.asset_ids,
        n_dates=panel.n_dates,
        first_date=panel.dates[0],
        last_date=panel.dates[-1],
        blocks=tuple(blocks),
        averaged=averaged,
    )
    if write:
        written = _stage("write", _write_outputs, report)
        report = AnalysisReport(
            **{**report.__dict__, "written_files": tuple(written)}
        )
    return report


def _build_averaged(blocks) -> AveragedBlock:
    vertices = _simplex.average_local_weights([b.triangle for b in blocks])
    summaries = []

    def summarize(label: str, weights: list[np.ndarray], returns: list[float]):
        if not weights:
            return
        stack = np.vstack(weights)
        rets = np.asarray(returns)
        n = stack.shape[0]
        sd_w = stack.std(axis=0, ddof=1) if n > 1 else np.zeros(stack.shape[1])
        sd_r = float(rets.std(ddof=1)) if n > 1 else 0.0
        summaries.append(
            LabelSummary(
                label=label,
                mean_weight=stack.mean(axis=0),
                sd_weight=sd_w,
                sem_weight=sd_w / np.sqrt(n),
                mean_daily_return=float(rets.mean()),
                sd_daily_return=sd_r,
                sem_daily_return=sd_r / float(np.sqrt(n)),
                n_intervals=n,
            )
        )

    vertex_of = {
        "w_R": lambda b: b.triangle.w_r,
        "w_H": lambda b: b.triangle.w_h,
        "w_sigma": lambda b: b.triangle.w_sigma,
    }
    for label in VERTEX_LABELS:
        pick = vertex_of[label]
        summarize(
            label,
            [pick(b).as_array() for b in blocks],
            [_daily_return(pick(b), b.stats) for b in blocks],
        )
    for label in OPTIMUM_LABELS:
        weights, returns = [], []
        for b in blocks:
            w = b.optimum_weights()[label]
            if w is None:
                continue
            weights.append(w.as_array())
            returns.append(_daily_return(w, b.stats))
        summarize(label, weights, returns)
    return AveragedBlock(vertices=vertices, summaries=tuple(summaries))


# ---------------------------------------------------------------------------
# formatting helpers

def _fmt_weights(w) -> str:
    arr = np.asarray(getattr(w, "weights", w), dtype=float)
    return "(" + ",".join(f"{x:.2f}" for x in arr) + ")"


def _fmt_return(value: float) -> str:
    """Two significant figures, in percent."""
    return f"{100.0 * value:.2g}%"


def _fmt_vol(value: float) -> str:
    return f"{value:.4f}"


def _text_table(columns: list[str], rows: list[tuple[str, list[str]]]) -> str:
    """Fixed-column table: row label, then one cell per column."""
    widths = [max(len(c), *(len(r[1][j]) for r in rows)) for j, c in enumerate(columns)]
    label_w = max(len(r[0]) for r in rows) if rows else 0
    lines = [" ".join([" " * label_w] + [c.ljust(w) for c, w in zip(columns, widths)]).rstrip()]
    for label, cells in rows:
        lines.append(
            " ".join([label.ljust(label_w)] + [c.ljust(w) for c, w in zip(cells, widths)]).rstrip()
        )
    return "\n".join(lines)


def _csv_line(*cells) -> str:
    return ",".join(str(c) for c in cells)


def emit_table(report: AnalysisReport, which: str) -> TableRendering:
    """Render one table family: 'local', 'global', or 'averaged'.

    Text tables round weights to 2 decimals, returns to 2 significant
    figures in percent, and volatility to 4 decimals; the CSV rendering
    keeps full precision.
    """
    if which == "local":
        return _emit_local(report)
    if which == "global":
        return _emit_global(report)
    if which == "averaged":
        return _emit_averaged(report)
    raise DataError(f"unknown table {which!r}; expected local, global, or averaged")


def _emit_local(report: AnalysisReport) -> TableRendering:
    sections = []
    csv_lines = [
        _csv_line(
            "interval_days", "vertex", "asset_id", "weight",
            "daily_mean_return", "volatility_risk",
        )
    ]
    for b in report.blocks:
        vertex_map = {"w_R": b.triangle.w_r, "w_H": b.triangle.w_h, "w_sigma": b.triangle.w_sigma}
        cells_w, cells_r, cells_v = [], [], []
        for label in VERTEX_LABELS:
            w = vertex_map[label]
            dmr = _daily_return(w, b.stats)
            vol = _volatility(w, b.stats)
            cells_w.append(_fmt_weights(w))
            cells_r.append(_fmt_return(dmr))
            cells_v.append(_fmt_vol(vol))
            for asset, x in zip(report.asset_ids, w.as_array()):
                csv_lines.append(
                    _csv_line(b.interval_days, label, asset, repr(float(x)), repr(dmr), repr(vol))
                )
        table = _text_table(
            list(VERTEX_LABELS),
            [("LOW", cells_w), ("DMR", cells_r), ("VR", cells_v)],
        )
        sections.append(f"interval {b.interval_days} day(s)\n{table}")
    return TableRendering(text="\n\n".join(sections) + "\n", csv="\n".join(csv_lines) + "\n")


def _emit_global(report: AnalysisReport) -> TableRendering:
    sections = []
    csv_lines = [
        _csv_line(
            "interval_days", "method", "label", "asset_id", "weight",
            "daily_mean_return", "volatility_risk",
        )
    ]
    for b in report.blocks:
        _, pareto_label = b.reported_pareto()
        columns, cells_w, cells_r, cells_v = [], [], [], []
        for method, w in b.optimum_weights().items():
            label = pareto_label if method == "pareto" else method
            if w is None:
                columns.append(method)
                cells_w.append("-")
                cells_r.append("-")
                cells_v.append("-")
                continue
            dmr = _daily_return(w, b.stats)
            vol = _volatility(w, b.stats)
            columns.append(method if method != "pareto" else f"pareto[{label}]")
            cells_w.append(_fmt_weights(w))
            cells_r.append(_fmt_return(dmr))
            cells_v.append(_fmt_vol(vol))
            for asset, x in zip(report.asset_ids, w.as_array()):
                csv_lines.append(
                    _csv_line(
                        b.interval_days, method, label, asset,
                        repr(float(x)), repr(dmr), repr(vol),
                    )
                )
        table = _text_table(
            columns, [("OW", cells_w), ("ODMR", cells_r), ("VR", cells_v)]
        )
        radius = b.optimum.incircle_radius
        extra = (
            f"incircle radius r_I = {radius:.4f}"
            if radius is not None
            else f"incircle radius unavailable: {b.optimum.note}"
        )
        sections.append(f"interval {b.interval_days} day(s)\n{table}\n{extra}")
    return TableRendering(text="\n\n".join(sections) + "\n", csv="\n".join(csv_lines) + "\n")


def _emit_averaged(report: AnalysisReport) -> TableRendering:
    av = report.averaged
    csv_lines = [
        _csv_line(
            "label", "asset_id", "mean_weight", "sd_weight", "sem_weight",
            "mean_daily_return", "sd_daily_return", "sem_daily_return", "n_intervals",
        )
    ]

    def rows_for(labels: list[str], weight_row: str, return_row: str):
        columns, cells_w, cells_r, cells_sd, cells_sem = [], [], [], [], []
        for label in labels:
            s = av.summary(label)
            if s is None:
                continue
            columns.append(label)
            cells_w.append(_fmt_weights(s.mean_weight))
            cells_r.append(_fmt_return(s.mean_daily_return))
            cells_sd.append(_fmt_weights(s.sd_weight))
            cells_sem.append(_fmt_weights(s.sem_weight))
            for asset, x, sd, sem in zip(
                report.asset_ids, s.mean_weight, s.sd_weight, s.sem_weight
            ):
                csv_lines.append(
                    _csv_line(
                        label, asset, repr(float(x)), repr(float(sd)), repr(float(sem)),
                        repr(s.mean_daily_return), repr(s.sd_daily_return),
                        repr(s.sem_daily_return), s.n_intervals,
                    )
                )
        return _text_table(
            columns,
            [
                (weight_row, cells_w),
                (return_row, cells_r),
                ("SE", cells_sd),
                ("SEM", cells_sem),
            ],
        )

    local = rows_for(list(VERTEX_LABELS), "ALOW", "ADMR")
    optima = rows_for(list(OPTIMUM_LABELS), "AOW", "AODMR")
    n = len(report.blocks)
    text = (
        f"averages over {n} interval(s) "
        f"(SE = std across intervals, SEM = SE/sqrt(n))\n{local}\n\n{optima}\n"
    )
    return TableRendering(text=text, csv="\n".join(csv_lines) + "\n")


def emit_plot_data(report: AnalysisReport) -> dict[str, str]:
    """Plot-ready CSV payloads, keyed by relative file name.

    Per interval: the per-asset log-log fluctuation points with fit
    parameters, the full grid sample of (return, volatility,
    persistence) triples with local optima flagged, and the triangle
    geometry (3 vertices + 3 optima + 1 radius row).
    """
    files: dict[str, str] = {}
    for b in report.blocks:
        tau = b.interval_days
        files[f"plots/dfa_tau{tau}.csv"] = _dfa_csv(report, b)
        files[f"plots/investing_space_tau{tau}.csv"] = _space_csv(report, b)
        files[f"plots/subspace_tau{tau}.csv"] = _subspace_csv(report, b)
    return files


def _dfa_csv(report: AnalysisReport, b: IntervalBlock) -> str:
    lines = [_csv_line("asset_id", "scale", "log_scale", "log_fluctuation", "hurst", "intercept")]
    for asset, result in zip(report.asset_ids, b.dfa_results):
        for s, f in result.fluctuations:
            lines.append(
                _csv_line(
                    asset, int(s), repr(float(np.log(s))), repr(float(np.log(f))),
                    repr(result.hurst), repr(result.intercept),
                )
            )
    return "\n".join(lines) + "\n"


def _space_csv(report: AnalysisReport, b: IntervalBlock) -> str:
    # Rebuild the grid for plotting; identical parameters give identical points.
    grid = _simplex.enumerate_simplex(len(report.asset_ids), report.config.grid_resolution)
    grid_pts = grid.points
    stats = b.stats
    rets = grid_pts @ stats.mean_returns
    vols = np.sqrt(
        np.maximum(np.einsum("ij,jk,ik->i", grid_pts, stats.covariance, grid_pts), 0.0)
    )
    hurs = grid_pts @ stats.hurst
    vertex_rows = {
        label: np.asarray(w.as_array())
        for label, w in (
            ("w_R", b.triangle.w_r), ("w_H", b.triangle.w_h), ("w_sigma", b.triangle.w_sigma),
        )
    }
    header = [f"w_{a}" for a in report.asset_ids] + [
        "mean_return", "volatility", "mean_hurst", "local_optimum",
    ]
    lines = [_csv_line(*header)]
    for i in range(grid_pts.shape[0]):
        flags = [
            label for label, v in vertex_rows.items() if np.array_equal(grid_pts[i], v)
        ]
        lines.append(
            _csv_line(
                *(repr(float(x)) for x in grid_pts[i]),
                repr(float(rets[i])), repr(float(vols[i])), repr(float(hurs[i])),
                ";".join(flags),
            )
        )
    return "\n".join(lines) + "\n"


def _subspace_csv(report: AnalysisReport, b: IntervalBlock) -> str:
    header = ["kind", "label"] + [f"w_{a}" for a in report.asset_ids] + ["value", "note"]
    lines = [_csv_line(*header)]

    def weight_cells(w):
        if w is None:
            return [""] * len(report.asset_ids)
        return [repr(float(x)) for x in np.asarray(w.as_array())]

    for label, w in (
        ("w_R", b.triangle.w_r), ("w_H", b.triangle.w_h), ("w_sigma", b.triangle.w_sigma),
    ):
        lines.append(_csv_line("vertex", label, *weight_cells(w), "", ""))
    opt = b.optimum
    for label, w in (("centroid", opt.centroid), ("incenter", opt.incenter), ("fermat", opt.fermat)):
        note = "" if w is not None else opt.note
        lines.append(_csv_line("optimum", label, *weight_cells(w), "", note))
    radius_cells = [""] * len(report.asset_ids)
    if opt.incircle_radius is not None:
        lines.append(_csv_line("radius", "incircle", *radius_cells, repr(opt.incircle_radius), ""))
    else:
        lines.append(_csv_line("radius", "incircle", *radius_cells, "", opt.note))
    return "\n".join(lines) + "\n"


def _render_report_text(report: AnalysisReport) -> str:
    cfg = report.config
    if cfg.date_range is None:
        date_range = "full history"
    else:
        start, end = cfg.date_range
        date_range = f"{start.isoformat() if start else 'open'}..{end.isoformat() if end else 'open'}"
    lines = [
        "triplet-portfolio analysis report",
        "=================================",
        "",
        "configuration:",
        f"  input = {cfg.input_path}",
        f"  output_dir = {cfg.output_dir}",
        f"  intervals = {','.join(str(t) for t in cfg.intervals)}",
        f"  date_range = {date_range}",
        f"  grid_resolution = {cfg.grid_resolution}",
        f"  poly_order = {cfg.poly_order}",
        f"  min_scale = {cfg.min_scale}",
        f"  max_scale = {cfg.max_scale}",
        f"  scale_count = {cfg.scale_count}",
        f"  covariance_mode = {cfg.covariance_mode}",
        f"  risk_aversion = {cfg.risk_aversion}",
        f"  heron_convention = {cfg.heron_convention}",
        "",
        "data:",
        f"  sha256 = {report.data_fingerprint}",
        f"  assets = {', '.join(report.asset_ids)}",
        f"  observations = {report.n_dates} dates from {report.first_date} to {report.last_date}",
        "  note: daily mean returns are per-interval means divided by the interval length",
        "",
    ]
    local = emit_table(report, "local")
    global_ = emit_table(report, "global")
    averaged = emit_table(report, "averaged")
    lines.append("local optima (LOW = local optimal weight, DMR = daily mean return, VR = volatility risk)")
    lines.append("-" * 78)
    lines.append(local.text)
    lines.append("derived optima (OW = optimal weight, ODMR = optimal daily mean return)")
    lines.append("-" * 78)
    lines.append(global_.text)
    for b in report.blocks:
        _, pareto_label = b.reported_pareto()
        kkt = b.pareto.kkt_residuals
        lines.append(
            f"pareto diagnostics tau={b.interval_days}: lambda1={b.pareto.lambda1!r}, "
            f"lambda2={b.pareto.lambda2!r}, constraint_active={b.pareto.constraint_active}, "
            f"feasible_on_simplex={b.pareto.feasible_on_simplex}, reported={pareto_label}, "
            f"max_kkt_residual={kkt.max_residual:.3e}"
        )
        hursts = ", ".join(
            f"{a}={r.hurst:.4f} ({r.regime}, r2={r.fit_r2:.4f})"
            for a, r in zip(report.asset_ids, b.dfa_results)
        )
        lines.append(f"hurst tau={b.interval_days}: {hursts}")
    lines.append("")
    lines.append("averages across intervals")
    lines.append("-" * 78)
    lines.append(averaged.text)
    return "\n".join(lines)


def _write_text_atomic(path: Path, content: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=path.suffix)
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(content)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_outputs(report: AnalysisReport) -> list[str]:
    out = report.config.output_dir
    payload: dict[str, str] = {"report.txt": _render_report_text(report)}
    for which in ("local", "global", "averaged"):
        payload[f"tables/{which}.csv"] = emit_table(report, which).csv
    payload.update(emit_plot_data(report))
    for rel, content in sorted(payload.items()):
        _write_text_atomic(out / rel, content)
    return sorted(payload)
