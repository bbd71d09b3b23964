"""Comparison reports: statistics tables, per-feature Frechet distances,
method rankings, and figures (PDP heatmaps, statistic CDFs, FID bars)."""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field

import numpy as np

from chanforge import stats as S
from chanforge.datasets import ChannelDataset


@dataclass
class EvalReport:
    reference_summary: S.StatsSummary
    method_summaries: dict[str, S.StatsSummary]
    # method -> feature -> category -> FID, plus "mean" across categories
    fid_table: dict[str, dict[str, dict[str, float]]]
    rankings: dict[str, list[str]] = field(default_factory=dict)
    figure_paths: list[str] = field(default_factory=list)

    def fid_mean(self, method: str, feature: str) -> float:
        return self.fid_table[method][feature]["mean"]


def _check_grids(reference: ChannelDataset, generated: dict[str, ChannelDataset]):
    ref = reference.manifest
    for name, ds in generated.items():
        m = ds.manifest
        for key in ("delay_grid_ns", "time_grid_s", "los_bin_index"):
            if m.get(key) != ref.get(key):
                raise ValueError(f"grid mismatch between reference and {name!r} ({key})")


def evaluate(reference: ChannelDataset,
             generated: dict[str, ChannelDataset]) -> EvalReport:
    """Compare each generated dataset against the reference.

    Computes per-category statistics for every dataset, then a per-feature
    1-D Frechet distance per method (per category, and the category mean used
    for ranking). Lower is better; methods are ranked per feature.
    """
    if not reference.channels or any(not ds.channels for ds in generated.values()):
        raise ValueError("empty dataset")
    _check_grids(reference, generated)

    ref_summary = S.stats_summary(reference)
    method_summaries = {m: S.stats_summary(ds) for m, ds in generated.items()}

    fid_table: dict[str, dict[str, dict[str, float]]] = {}
    for method, summary in method_summaries.items():
        fid_table[method] = {}
        for feat in S.FEATURE_NAMES:
            per_cat = {}
            for cat in ref_summary.samples:
                if cat not in summary.samples:
                    continue
                per_cat[cat] = S.fid(ref_summary.samples[cat][feat],
                                     summary.samples[cat][feat])
            per_cat["mean"] = float(np.mean([v for k, v in per_cat.items()]))
            fid_table[method][feat] = per_cat
        # Supplementary joint FID over all five standardized features.
        joint = {}
        for cat in ref_summary.samples:
            if cat not in summary.samples:
                continue
            rx = np.column_stack([ref_summary.samples[cat][f] for f in S.FEATURE_NAMES])
            gx = np.column_stack([summary.samples[cat][f] for f in S.FEATURE_NAMES])
            scale = rx.std(axis=0, ddof=1)
            scale[scale == 0] = 1.0
            joint[cat] = S.fid(rx / scale, gx / scale)
        joint["mean"] = float(np.mean([v for k, v in joint.items()]))
        fid_table[method]["joint"] = joint

    rankings = {
        feat: sorted(fid_table, key=lambda m: fid_table[m][feat]["mean"])
        for feat in S.FEATURE_NAMES
    }
    return EvalReport(reference_summary=ref_summary,
                      method_summaries=method_summaries,
                      fid_table=fid_table, rankings=rankings)


def write_report(report: EvalReport, out_dir: str) -> dict[str, str]:
    """Emit table2.csv (statistics means), fid.csv, and report.json."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {}

    categories = sorted(report.reference_summary.means)
    methods = ["reference"] + sorted(report.method_summaries)

    table2 = os.path.join(out_dir, "table2.csv")
    with open(table2, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["statistic"] + [f"{m}/{c}" for c in categories for m in methods])
        for feat in S.FEATURE_NAMES:
            row = [feat]
            for cat in categories:
                row.append(f"{report.reference_summary.means[cat][feat]:.6g}")
                for m in methods[1:]:
                    row.append(f"{report.method_summaries[m].means[cat][feat]:.6g}")
            w.writerow(row)
    paths["table2"] = table2

    fid_csv = os.path.join(out_dir, "fid.csv")
    with open(fid_csv, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["method", "feature"] + categories + ["mean"])
        for m in sorted(report.fid_table):
            for feat in list(S.FEATURE_NAMES) + ["joint"]:
                cell = report.fid_table[m][feat]
                w.writerow([m, feat] + [f"{cell.get(c, float('nan')):.6g}"
                                        for c in categories + ["mean"]])
    paths["fid"] = fid_csv

    report_json = os.path.join(out_dir, "report.json")
    with open(report_json, "w") as f:
        json.dump({
            "reference": report.reference_summary.to_json_dict()["means"],
            "methods": {m: s.to_json_dict()["means"]
                        for m, s in report.method_summaries.items()},
            "fid": report.fid_table,
            "rankings": report.rankings,
        }, f, indent=2, sort_keys=True)
    paths["report"] = report_json
    return paths


def render_figures(report: EvalReport, reference: ChannelDataset,
                   generated: dict[str, ChannelDataset], out_dir: str) -> list[str]:
    """PDP heatmaps (one sample per category per method), per-statistic CDF
    overlays, and an FID bar chart. Deterministic file names."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    figs_dir = os.path.join(out_dir, "figs")
    os.makedirs(figs_dir, exist_ok=True)
    paths = []

    datasets = {"reference": reference, **generated}
    categories = sorted(set(reference.labels))

    # Heatmaps: snapshot index vs delay, color is power in dB.
    for name, ds in sorted(datasets.items()):
        for cat in categories:
            group = ds.by_label(cat)
            if not group:
                continue
            ch = group[0]
            fig, ax = plt.subplots(figsize=(5, 4))
            im = ax.imshow(ch.power, aspect="auto", origin="lower",
                           extent=[ch.delay_grid[0], ch.delay_grid[-1],
                                   0, ch.n_snapshots - 1])
            ax.set_xlabel("delay (ns)")
            ax.set_ylabel("snapshot index")
            ax.set_title(f"{name} / {cat}")
            fig.colorbar(im, ax=ax, label="power (dB)")
            path = os.path.join(figs_dir, f"pdp_{name}_{cat}.png")
            fig.savefig(path, dpi=120)
            plt.close(fig)
            paths.append(path)

    # Empirical CDFs of each statistic, one curve per method per category.
    summaries = {"reference": report.reference_summary, **report.method_summaries}
    for feat in S.FEATURE_NAMES:
        fig, ax = plt.subplots(figsize=(6, 4))
        for name, summary in sorted(summaries.items()):
            for cat in categories:
                if cat not in summary.samples:
                    continue
                x = np.sort(summary.samples[cat][feat])
                y = np.arange(1, len(x) + 1) / len(x)
                ax.step(x, y, where="post", label=f"{name}/{cat}")
        ax.set_xlabel(feat)
        ax.set_ylabel("empirical CDF")
        ax.legend(fontsize=7)
        path = os.path.join(figs_dir, f"cdf_{feat}.png")
        fig.savefig(path, dpi=120)
        plt.close(fig)
        paths.append(path)

    # FID bars: one group per feature, one bar per method.
    methods = sorted(report.fid_table)
    if methods:
        fig, ax = plt.subplots(figsize=(7, 4))
        x = np.arange(len(S.FEATURE_NAMES))
        width = 0.8 / len(methods)
        for k, m in enumerate(methods):
            vals = [report.fid_table[m][f]["mean"] for f in S.FEATURE_NAMES]
            ax.bar(x + k * width, vals, width, label=m)
        ax.set_xticks(x + width * (len(methods) - 1) / 2)
        ax.set_xticklabels(S.FEATURE_NAMES, rotation=20, fontsize=8)
        ax.set_ylabel("Frechet distance")
        ax.set_yscale("log")
        ax.legend()
        path = os.path.join(figs_dir, "fid_bars.png")
        fig.savefig(path, dpi=120)
        plt.close(fig)
        paths.append(path)

    report.figure_paths = paths
    return paths
