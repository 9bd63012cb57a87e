"""Tabular and figure outputs for the experiment drivers.

Tables are comma-separated with a header row, '.' decimal and str(float)
formatting, so repeated runs are byte-identical.  Figures are rendered
with the Agg backend straight to files; they carry the same data as the
tables and are not part of any byte-identity guarantee.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

import numpy as np  # noqa: E402

from .runs import (CostSplitReport, EfrSweepReport, InertiaHistReport,
                   ReliabilityReport, WeekProfileReport)

_f = lambda v: str(float(v))


def _table(path: Path, header: list[str], rows: list[list[str]]) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return path


def write_cost_split(report: CostSplitReport,
                     out_dir: Union[str, Path]) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = [[season, _f(s), _f(u), _f(a)] for season, s, u, a in report.rows]
    rows.append(["total", _f(report.secured_cost), _f(report.unsecured_cost),
                 _f(report.ancillary_cost)])
    table = _table(out / "cost_split.csv",
                   ["season", "secured_gbp", "unsecured_gbp", "ancillary_gbp"],
                   rows)

    fig, ax = plt.subplots(figsize=(7, 4))
    seasons = [r[0] for r in report.rows]
    energy = [r[2] for r in report.rows]
    ancillary = [r[3] for r in report.rows]
    ax.bar(seasons, energy, label="energy")
    ax.bar(seasons, ancillary, bottom=energy, label="ancillary services")
    ax.set_ylabel("cost (GBP)")
    ax.set_title(f"Operating cost split; ancillary share "
                 f"{100 * report.share:.1f}%")
    ax.legend()
    fig.tight_layout()
    figure = out / "cost_split.png"
    fig.savefig(figure, dpi=120)
    plt.close(fig)
    return [table, figure]


def write_inertia_hist(report: InertiaHistReport,
                       out_dir: Union[str, Path]) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    edges, counts = report.bin_edges, report.counts
    rows = [[_f(edges[i]), _f(edges[i + 1]), str(int(counts[i]))]
            for i in range(len(counts))]
    table = _table(out / "inertia_hist.csv",
                   ["bin_left_gva_s", "bin_right_gva_s", "hours"], rows)

    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar(edges[:-1], counts, width=1.0, align="edge")
    for m in report.modes:
        ax.axvline(m, color="tab:red", linestyle=":", linewidth=1)
    ax.set_xlabel("system inertia (GVA.s)")
    ax.set_ylabel("hours")
    ax.set_title(f"Scheduled inertia over {report.hours} h; "
                 f"{len(report.modes)} modes")
    fig.tight_layout()
    figure = out / "inertia_hist.png"
    fig.savefig(figure, dpi=120)
    plt.close(fig)
    return [table, figure]


def write_week_profile(report: WeekProfileReport,
                       out_dir: Union[str, Path]) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    classes = list(report.categories)
    header = (["hour", "demand_mw", "res_available_mw", "curtailment_mw",
               "shed_mw"] + [f"{c}_mw" for c in classes]
              + ["storage_charge_mw", "storage_discharge_mw", "inertia_gva_s"])
    rows = []
    for i in range(len(report.hours)):
        row = [str(int(report.hours[i])), _f(report.demand[i]),
               _f(report.res_available[i]), _f(report.curtailment[i]),
               _f(report.shed[i])]
        row += [_f(report.categories[c][i]) for c in classes]
        row += [_f(report.storage_charge[i]), _f(report.storage_discharge[i]),
                _f(report.inertia[i] / 1000.0)]
        rows.append(row)
    table = _table(out / "week_profile.csv", header, rows)

    fig, ax = plt.subplots(figsize=(9, 4.5))
    res_used = report.res_available - report.curtailment
    stacks = [res_used] + [report.categories[c] for c in classes]
    stacks.append(report.storage_discharge - report.storage_charge)
    ax.stackplot(report.hours, stacks,
                 labels=["renewables"] + classes + ["storage (net)"])
    ax.plot(report.hours, report.demand, "k-", linewidth=1.2, label="demand")
    ax.set_xlabel("hour")
    ax.set_ylabel("MW")
    ax.set_title("Dispatch by plant class, highest-renewables week")
    ax.legend(loc="upper right", fontsize=8, ncol=2)
    fig.tight_layout()
    figure = out / "week_profile.png"
    fig.savefig(figure, dpi=120)
    plt.close(fig)
    return [table, figure]


def write_efr_sweep(report: EfrSweepReport,
                    out_dir: Union[str, Path]) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = [[_f(cap), _f(sec), _f(anc)] for cap, sec, anc in report.rows]
    table = _table(out / "efr_sweep.csv",
                   ["efr_cap_mw", "secured_gbp", "ancillary_gbp"], rows)

    fig, ax = plt.subplots(figsize=(6, 4))
    caps = [r[0] for r in report.rows]
    anc = [r[2] for r in report.rows]
    ax.plot(caps, anc, "o-")
    ax.set_xlabel("EFR procurement cap (MW)")
    ax.set_ylabel("ancillary-services cost (GBP)")
    ax.set_title("Ancillary cost against EFR volume")
    fig.tight_layout()
    figure = out / "efr_sweep.png"
    fig.savefig(figure, dpi=120)
    plt.close(fig)
    return [table, figure]


def write_reliability(report: ReliabilityReport,
                      out_dir: Union[str, Path]) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = [[std, _f(sec), _f(anc), _f(loss), str(int(fb))]
            for std, sec, anc, loss, fb in report.rows]
    table = _table(out / "reliability.csv",
                   ["standard", "secured_gbp", "ancillary_gbp",
                    "mean_p_loss_mw", "fallback_hours"], rows)

    fig, ax = plt.subplots(figsize=(6, 4))
    names = [r[0] for r in report.rows]
    anc = [r[2] for r in report.rows]
    ax.bar(names, anc)
    ax.set_ylabel("ancillary-services cost (GBP)")
    ax.set_title(f"Reliability standards at EFR cap "
                 f"{report.efr_cap:.0f} MW")
    fig.tight_layout()
    figure = out / "reliability.png"
    fig.savefig(figure, dpi=120)
    plt.close(fig)
    return [table, figure]
