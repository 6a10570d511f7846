"""Static vector plots of experiment results.

One entry point, :func:`emit_plot`, renders whichever result type it is
given: error-versus-parameter lines for sweeps, an error histogram for
direction-finding runs, and overlaid magnitude spectra for the grid
comparison. Output is written through the non-interactive backend, so
the functions work in headless runs; SVG keeps text as text so series
labels stay searchable.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .harness import DoaRunResult, SpectraResult, SweepResult

__all__ = ["emit_plot"]

plt.rcParams["svg.fonttype"] = "none"

_AXIS_LABELS = {
    "epsilon": "noise level",
    "r": "perturbation radius",
    "m": "number of measurements",
}

_MARKERS = ("o", "s", "^", "d", "v", "*")


def _plot_sweep(result: SweepResult, path: str) -> None:
    if not result.values or not result.strategies:
        raise ValueError("sweep result has no data to plot")
    fig, (ax_sig, ax_beta) = plt.subplots(1, 2, figsize=(9.0, 3.6))
    x = np.asarray(result.values)
    for i, name in enumerate(result.strategies):
        marker = _MARKERS[i % len(_MARKERS)]
        ax_sig.plot(
            x, result.mean_signal_errors(name), marker=marker, label=name
        )
        beta = result.mean_beta_errors(name)
        if np.any(np.isfinite(beta)):
            ax_beta.plot(x, beta, marker=marker, label=name)
    xlabel = _AXIS_LABELS.get(result.sweep_param, result.sweep_param)
    for ax, ylabel in ((ax_sig, "mean signal error"),
                       (ax_beta, "mean perturbation error")):
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        ax.grid(True, alpha=0.3)
        ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def _plot_doa(result: DoaRunResult, path: str) -> None:
    errors = np.asarray(result.errors).ravel()
    if errors.size == 0:
        raise ValueError("direction run has no errors to plot")
    cell = 1.0 / result.n
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    span = max(float(np.abs(errors).max()), cell)
    ax.hist(errors, bins=40, range=(-1.1 * span, 1.1 * span), color="#4878b0")
    for edge in (-cell, cell):
        ax.axvline(edge, color="black", linestyle="--", linewidth=1.0)
    ax.set_xlabel("estimation error")
    ax.set_ylabel("count")
    ax.set_title(
        f"direction errors over {result.trials} trials "
        f"(dashed: one grid half-cell)"
    )
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def _plot_spectra(result: SpectraResult, path: str) -> None:
    if result.model_grid.size == 0 and result.standard_grid.size == 0:
        raise ValueError("spectra result has no data to plot")
    fig, (ax_model, ax_std) = plt.subplots(
        2, 1, figsize=(7.0, 5.4), sharex=True
    )
    ax_model.stem(
        result.model_grid, result.model_magnitudes, basefmt=" ",
        markerfmt="o", label="perturbation-aware grid",
    )
    ax_std.stem(
        result.standard_grid, result.standard_magnitudes, basefmt=" ",
        markerfmt="s", label="plain dense grid",
    )
    for ax in (ax_model, ax_std):
        for theta, mag in zip(result.theta_true, result.source_magnitudes):
            ax.axvline(theta, color="black", linestyle=":", linewidth=1.0)
        lo = float(result.theta_true.min()) - 0.1
        hi = float(result.theta_true.max()) + 0.1
        ax.set_xlim(lo, hi)
        ax.set_ylabel("|x|")
        ax.legend(loc="upper right")
    ax_std.set_xlabel("theta (dotted: true sources)")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def emit_plot(result, path: str) -> None:
    """Render a result object to a vector-graphics file.

    Sweeps become side-by-side signal and perturbation error lines, one
    series per strategy; direction runs become an error histogram with
    grid half-cell markers; spectra results become stacked stem plots
    with true source positions. The format follows the file suffix
    (``.svg`` recommended).

    Raises
    ------
    ValueError
        For an empty result or an unsupported result type.
    OSError
        When the file cannot be written, with the path in the message.
    """
    try:
        if isinstance(result, SweepResult):
            _plot_sweep(result, path)
        elif isinstance(result, DoaRunResult):
            _plot_doa(result, path)
        elif isinstance(result, SpectraResult):
            _plot_spectra(result, path)
        else:
            raise ValueError(
                f"cannot plot result of type {type(result).__name__}"
            )
    except OSError as exc:
        raise OSError(f"cannot write plot to {path}: {exc}") from exc
