"""Figure rendering for the report path.

Each experiment's report is turned into one PNG next to the JSON/CSV
output: the parity fringe with its fit, the detection histograms (photon
counts, or classified-class bars under the flip model), and the coherence
decay curves with their exponential fits.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .reporting import ExperimentReport, SettingShots

_DPI = 150
_FIG_SIZE = (6.4, 4.2)


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def render_parity_fringe(report: ExperimentReport, path: Path) -> Path:
    """Measured parity vs analysis phase with the fitted sinusoid."""
    sweep = report.counts["parity_sweep"]
    phis = np.array([pt["phi_rad"] for pt in sweep])
    parities = np.array([pt["parity"] for pt in sweep])
    amp = report.estimates["fringe_amplitude"]
    phase = report.estimates["fringe_phase_offset"]
    period = phis[1] - phis[0]
    period *= len(phis)  # grid covers one period
    dense = np.linspace(phis.min(), phis.min() + period, 400)
    model = amp * np.cos(2 * math.pi * dense / period - phase)

    fig, ax = plt.subplots(figsize=_FIG_SIZE)
    ax.plot(dense, model, "-", color="tab:blue", lw=1.2, label="fit")
    ax.plot(phis, parities, "o", color="tab:red", ms=5, label="measured")
    ax.set_xlabel("analysis phase (rad)")
    ax.set_ylabel("parity")
    ax.set_ylim(-1.1, 1.1)
    ax.axhline(0.0, color="0.8", lw=0.8)
    ax.legend(loc="upper right", fontsize=9)
    ax.set_title(f"parity fringe, amplitude {amp:.3f}")
    return _save(fig, path)


def render_bell_histograms(
    report: ExperimentReport, tables: list[SettingShots], path: Path
) -> Path:
    """Detection statistics of the four settings of the first run.

    With the photon-count model this shows fluorescence histograms; with the
    flip model, bars of the classified zero/one/two-bright counts.
    """
    first_run = [t for t in tables if t.setting_index < 4]
    fig, axes = plt.subplots(2, 2, figsize=(7.2, 5.4), sharex=True, sharey=True)
    labels = ["(a1, b2)", "(a1, g2)", "(d1, b2)", "(d1, g2)"]
    for k, ax in enumerate(axes.flat):
        if k >= len(first_run):
            ax.axis("off")
            continue
        table = first_run[k]
        if table.photon_counts is not None:
            top = int(table.photon_counts.max()) + 2
            ax.hist(table.photon_counts, bins=np.arange(top) - 0.5,
                    color="tab:blue", alpha=0.85)
            ax.set_xlabel("photon count")
        else:
            classes = np.bincount(table.classified_bright, minlength=3)
            ax.bar([0, 1, 2], classes, color="tab:blue", alpha=0.85)
            ax.set_xticks([0, 1, 2])
            ax.set_xlabel("bright ions")
        ax.set_title(labels[k], fontsize=10)
        ax.set_ylabel("events")
    mean = report.estimates.get("bell_mean", float("nan"))
    fig.suptitle(f"detection statistics, run 1 (B = {mean:.3f})")
    return _save(fig, path)


def render_dfs_decay(report: ExperimentReport, path: Path) -> Path:
    """Coherence vs noise exposure for each mode, with exponential fits."""
    fig, ax = plt.subplots(figsize=_FIG_SIZE)
    styles = {"test": ("x", "tab:red"), "encoded": ("o", "tab:blue")}
    for mode, block in report.counts["modes"].items():
        exposures = np.array([e["exposure_us"] for e in block["exposures"]])
        cs = np.array([e["coherence"] for e in block["exposures"]])
        errs = np.array([e["coherence_error"] for e in block["exposures"]])
        marker, color = styles.get(mode, ("s", "tab:green"))
        ax.errorbar(exposures, cs, yerr=errs, fmt=marker, color=color,
                    capsize=2, label=f"{mode} state")
        rate = report.estimates[f"decay_rate_{mode}"]
        amp = report.estimates[f"decay_amplitude_{mode}"]
        dense = np.linspace(exposures.min(), exposures.max(), 200)
        ax.plot(dense, amp * np.exp(-rate * dense), "-", color=color, lw=1.0,
                label=f"{mode} fit: {rate:.4g}/us")
    ax.set_xlabel("noise exposure (us)")
    ax.set_ylabel("coherence")
    ax.set_ylim(bottom=0.0)
    ax.legend(fontsize=9)
    ax.set_title("coherence decay under collective dephasing")
    return _save(fig, path)


def render_readout_calibration(
    lambda_bright: float,
    lambda_dark: float,
    thresholds: tuple[int, ...],
    n_ions: int,
    rate: float,
    path: Path,
) -> Path:
    """Poisson count distributions per bright class with threshold cuts."""
    from scipy.stats import poisson

    fig, ax = plt.subplots(figsize=_FIG_SIZE)
    top = int((n_ions * lambda_bright) + 6 * math.sqrt(n_ions * lambda_bright + 1))
    counts = np.arange(top + 1)
    for k in range(n_ions + 1):
        mu = k * lambda_bright + (n_ions - k) * lambda_dark
        ax.plot(counts, poisson.pmf(counts, mu), drawstyle="steps-mid",
                label=f"{k} bright")
    for t in thresholds:
        ax.axvline(t - 0.5, color="0.3", ls="--", lw=1.0)
    ax.set_xlabel("photon count")
    ax.set_ylabel("probability")
    ax.legend(fontsize=9)
    ax.set_title(f"readout classes, misclassification {rate:.4f}")
    return _save(fig, path)
