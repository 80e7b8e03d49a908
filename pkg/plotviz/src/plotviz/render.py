"""The four figure kinds: overlay, frequency stems, mode heatmaps, error curves."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .schemas import SchemaError, load_frequencies, load_modes, load_table


def render_overlay(reference_path, reconstruction_path, out_path,
                   offset: int = 0, dt: float = 1.0):
    """Reference (blue) and reconstruction (red) per channel, stacked."""
    ref_names, ref = load_table(reference_path)
    rec_names, rec = load_table(reconstruction_path)
    if ref.shape[1] != rec.shape[1]:
        raise SchemaError(
            "columns",
            f"reference has {ref.shape[1]} channels, reconstruction {rec.shape[1]}",
        )
    if offset < 0 or offset >= ref.shape[0]:
        raise SchemaError("offset", f"{offset} outside the reference range")
    ref = ref[offset:]
    n = min(ref.shape[0], rec.shape[0])
    k = ref.shape[1]
    t_ref = (offset + np.arange(n)) * dt
    fig, axes = plt.subplots(k, 1, figsize=(9, 1.8 * k + 1), sharex=True,
                             squeeze=False)
    for c in range(k):
        ax = axes[c, 0]
        ax.plot(t_ref, ref[:n, c], color="tab:blue", lw=0.9, label="reference")
        ax.plot(t_ref, rec[:n, c], color="tab:red", lw=0.9, label="reconstruction")
        ax.set_ylabel(ref_names[c] if c < len(ref_names) else f"ch{c}")
    axes[0, 0].legend(loc="upper right", fontsize=8)
    axes[-1, 0].set_xlabel("time")
    fig.suptitle("reconstruction overlay")
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
    return fig


def render_frequencies(freq_path, out_path):
    """Stem plot of the identified frequencies, annotated with periods."""
    doc = load_frequencies(freq_path)
    rows = [r for r in doc["rows"] if r["omega"] > 0]
    fig, ax = plt.subplots(figsize=(9, 4))
    if rows:
        omegas = np.array([r["omega"] for r in rows])
        ax.stem(omegas, np.ones_like(omegas), basefmt=" ")
        for r in rows:
            period = r.get("period_time")
            if period is not None:
                ax.annotate(f"T={period:.4g}", (r["omega"], 1.0),
                            textcoords="offset points", xytext=(0, 6),
                            ha="center", fontsize=7, rotation=60)
    ax.set_ylim(0, 1.35)
    ax.set_yticks([])
    ax.set_xlabel("angular frequency")
    ax.set_title(f"identified frequencies ({len(rows)} nonzero)")
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
    return fig


def render_modes(modes_path, out_path):
    """Heatmap of each eigenmode contribution over time and channel."""
    doc = load_modes(modes_path)
    modes = doc["modes"]
    fig, axes = plt.subplots(len(modes), 1,
                             figsize=(9, 2.2 * len(modes) + 0.5),
                             squeeze=False)
    for i, mode in enumerate(modes):
        ax = axes[i, 0]
        values = np.asarray(mode["values"], dtype=float)
        vmax = np.abs(values).max() or 1.0
        im = ax.imshow(values.T, aspect="auto", origin="lower",
                       cmap="RdBu_r", vmin=-vmax, vmax=vmax,
                       interpolation="nearest")
        ax.set_ylabel(f"mode {mode['index']}\n(lam={mode['lambda']:.3g})",
                      fontsize=8)
        fig.colorbar(im, ax=ax, fraction=0.025)
    axes[-1, 0].set_xlabel("time index")
    fig.suptitle("spatiotemporal eigenmode contributions")
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
    return fig


def render_error(error_path, out_path, dt: float = 1.0):
    """Moving-averaged error curves, one line per channel."""
    names, err = load_table(error_path)
    fig, ax = plt.subplots(figsize=(9, 4))
    t = np.arange(err.shape[0]) * dt
    for c in range(err.shape[1]):
        ax.plot(t, 100 * err[:, c], lw=1.0,
                label=names[c] if c < len(names) else f"ch{c}")
    ax.set_xlabel("window start")
    ax.set_ylabel("error (% of sup-norm)")
    ax.set_title("amplitude-normalized moving-averaged error")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
    return fig
