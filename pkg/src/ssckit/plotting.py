"""Figure rendering for the CLI report paths.

Every command that writes delimited output can render a matplotlib
figure next to it; the data in the figures is exactly the CSV content,
never recomputed.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def save_sweep_figure(rows, path, sigma_x2: float, d: float, tr_b: float):
    """Leakage floor against rate floor along a boundary sweep."""
    rows = sorted(rows, key=lambda r: r[0])
    r_vals = [r[1] for r in rows]
    delta_vals = [r[2] for r in rows]
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    ax.plot(r_vals, delta_vals, lw=1.8)
    if rows:
        ax.plot([r_vals[0], r_vals[-1]], [delta_vals[0], delta_vals[-1]],
                "o", ms=5, color="C3")
        ax.annotate("C2", (r_vals[-1], delta_vals[-1]),
                    textcoords="offset points", xytext=(6, -4))
        ax.annotate("C1", (r_vals[0], delta_vals[0]),
                    textcoords="offset points", xytext=(6, 4))
    ax.set_xlabel("minimal storage rate (bits/symbol)")
    ax.set_ylabel("minimal leakage rate (bits/symbol)")
    ax.set_title(f"sigma_x2={sigma_x2:g}, D={d:g}, tr_b={tr_b:g}")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_threshold_figure(rows, path):
    """Rate and leakage floors as functions of the threshold."""
    rows = sorted(rows, key=lambda r: r.t)
    ts = [r.t for r in rows]
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    ax.plot(ts, [r.r_min for r in rows], "o-", label="rate floor")
    ax.plot(ts, [r.delta_min for r in rows], "s-", label="leakage floor")
    ax.set_xlabel("threshold t")
    ax.set_ylabel("bits/symbol")
    ax.set_xticks(ts)
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_sim_figure(result, path):
    """Simulated distortion and leakage against their budgeted bounds."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.0, 3.4))

    labels = [",".join(map(str, sorted(a))) for a in result.mean_distortion]
    values = list(result.mean_distortion.values())
    ax1.bar(labels, values, color="C0", label="simulated")
    ax1.axhline(result.target_distortion, color="C3", ls="--", label="target D")
    ax1.set_title("distortion per authorized set")
    ax1.set_ylabel("mean distortion")
    ax1.legend(fontsize=8)

    labels = [",".join(map(str, sorted(b))) if b else "empty"
              for b in result.leakage]
    values = [est.bits_per_symbol for est in result.leakage.values()]
    errs = [est.stderr for est in result.leakage.values()]
    ax2.bar(labels, values, yerr=errs, color="C1", label="estimated")
    ax2.axhline(result.bounds.leakage_bound, color="C3", ls="--",
                label="achievable bound")
    ax2.set_title("leakage per colluding set")
    ax2.set_ylabel("bits/symbol")
    ax2.legend(fontsize=8)

    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
