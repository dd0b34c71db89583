"""Matplotlib rendering of report figures (written next to the CSVs)."""

import numpy as np

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def fn_plot_figure(path, dc, photo=None):
    """Linearized current-voltage plot: 1/U against ln(I/U^2).

    ``dc`` and ``photo`` are dicts with keys ``points`` (N, 2 array),
    ``fit`` (N, 2 array) and optionally ``band`` (list of N, 2 arrays).
    """
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    ax.plot(dc["points"][:, 0] * 1e3, dc["points"][:, 1], "s",
            ms=4, color="tab:blue", label="dark data")
    ax.plot(dc["fit"][:, 0] * 1e3, dc["fit"][:, 1], "--",
            color="tab:blue", lw=1.2, label="dark fit")
    if photo is not None:
        ax.plot(photo["points"][:, 0] * 1e3, photo["points"][:, 1], "o",
                ms=4, color="tab:red", label="laser-on data")
        ax.plot(photo["fit"][:, 0] * 1e3, photo["fit"][:, 1], "-",
                color="tab:red", lw=1.4, label="laser-on fit")
        for curve in photo.get("band", []):
            ax.plot(curve[:, 0] * 1e3, curve[:, 1], ":", color="tab:red",
                    lw=0.9)
    ax.set_xlabel(r"$1/U$ [$10^{-3}$/V]")
    ax.set_ylabel(r"$\ln(I/U^2)$  [I in A, U in V]")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    _finish(fig, path)


def polarization_figure(path, theta_data, y_data, theta_fit, y_fit,
                        ylabel="current [nA]", yscale=1e9):
    """Angle scan with its fitted curve."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(np.rad2deg(theta_data), np.asarray(y_data) * yscale, "o", ms=4,
            color="tab:blue", label="data")
    ax.plot(np.rad2deg(theta_fit), np.asarray(y_fit) * yscale, "-",
            color="tab:red", lw=1.4, label="fit")
    ax.set_xlabel("polarization angle [deg]")
    ax.set_ylabel(ylabel)
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    _finish(fig, path)


def spectrum_figure(path, freqs, power_dbc, rep_rate, span_bins=60):
    """Power spectrum around the repetition-rate line, in dBc."""
    k = int(np.argmin(np.abs(freqs - rep_rate)))
    lo = max(0, k - span_bins)
    hi = min(len(freqs), k + span_bins + 1)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(freqs[lo:hi] - rep_rate, power_dbc[lo:hi], "-",
            color="tab:blue", lw=1.0)
    ax.set_xlabel(f"frequency offset from {rep_rate:g} Hz [Hz]")
    ax.set_ylabel("power [dBc]")
    ax.grid(alpha=0.3)
    _finish(fig, path)
