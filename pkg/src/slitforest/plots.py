"""Figure rendering for histograms, ensembles, and model curves.

Everything draws through the Agg backend so the CLI can emit PNG files on
headless machines.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .analytics import ChannelHistogram, EnsembleStats, slit_channels
from .physics import Screen


def _channel_axis(ax, n: int, screen: Screen | None):
    ax.set_xlabel("channel")
    ax.set_xlim(0.5, n + 0.5)
    if screen is not None:
        for ch in slit_channels(screen):
            ax.axvline(ch, color="tab:gray", linestyle=":", linewidth=1)


def save_histogram_plot(h: ChannelHistogram, path, *, screen: Screen | None = None,
                        model=None, title: str | None = None) -> None:
    """Bar view of one histogram, optionally overlaid with a model curve."""
    channels = np.arange(1, h.n_channels + 1)
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.bar(channels, h.bins, width=0.9, color="tab:blue", label="data")
    if model is not None:
        ax.plot(channels, model, color="tab:red", linewidth=1.5, label="model")
        ax.legend()
    _channel_axis(ax, h.n_channels, screen)
    ax.set_ylabel("rate" if h.rate_k is not None else "count")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_ensemble_plot(stats: EnsembleStats, path, *, screen: Screen | None = None,
                       title: str | None = None) -> None:
    """Mean rates with per-channel sigma error bars."""
    channels = np.arange(1, stats.mean.size + 1)
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.errorbar(channels, stats.mean, yerr=stats.sigma, fmt="o", markersize=3,
                capsize=2, color="tab:blue", ecolor="tab:gray")
    _channel_axis(ax, stats.mean.size, screen)
    ax.set_ylabel("mean rate")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_curve_plot(values, path, *, screen: Screen | None = None,
                    title: str | None = None) -> None:
    """Line view of a model curve over the channel grid."""
    values = np.asarray(values, dtype=float)
    channels = np.arange(1, values.size + 1)
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.plot(channels, values, color="tab:red", linewidth=1.5)
    _channel_axis(ax, values.size, screen)
    ax.set_ylabel("intensity")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
