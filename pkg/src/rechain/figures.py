"""Figure rendering for benchmark outputs.

Each bench run renders PNG figures next to its CSV/JSON output so results can
be eyeballed without an external plotting step.  The CSV remains the machine
interface; figures are purely a convenience and can be disabled from the CLI.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def render_static_figures(cells: list[dict], out_prefix: str) -> list[str]:
    """Rewiring-ratio curves and the chain-length histogram for a static run.

    ``cells`` holds one dict per load with keys ``load``, ``records`` (phase
    record dicts) and ``chain_hist``.  Returns the written file paths.
    """
    paths = []

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for cell in cells:
        records = cell["records"]
        ax.plot(
            [r["t"] for r in records],
            [r["rr"] for r in records],
            marker="o",
            label=f"load {cell['load']:.2f}",
        )
    ax.set_xlabel("reconfiguration phase")
    ax.set_ylabel("rewiring ratio")
    ax.set_ylim(bottom=0.0)
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    path = f"{out_prefix}_rr.png"
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    paths.append(path)

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    width = 0.8 / max(len(cells), 1)
    for idx, cell in enumerate(cells):
        hist = {int(k): v for k, v in cell["chain_hist"].items()}
        if not hist:
            continue
        lengths = sorted(hist)
        ax.bar(
            [l + idx * width for l in lengths],
            [hist[l] for l in lengths],
            width=width,
            label=f"load {cell['load']:.2f}",
        )
    ax.set_xlabel("replacement chain length")
    ax.set_ylabel("schedulings")
    ax.set_yscale("log")
    ax.legend(fontsize=8)
    path = f"{out_prefix}_chain_lengths.png"
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    paths.append(path)
    return paths


def render_dynamic_figures(summaries: list[dict], out_prefix: str) -> list[str]:
    """Per-operation cost curves across loads for a dynamic run."""
    loads = [s["load"] for s in summaries]

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.0, 3.6))
    ax1.plot(loads, [s["rearr_per_op"] for s in summaries], marker="o")
    ax1.set_xlabel("network load")
    ax1.set_ylabel("rearrangements per change")
    ax1.grid(True, alpha=0.3)
    ax2.plot(loads, [s["ns_per_op"] for s in summaries], marker="s", color="tab:red")
    ax2.set_xlabel("network load")
    ax2.set_ylabel("time per change (ns)")
    ax2.grid(True, alpha=0.3)
    fig.tight_layout()
    path = f"{out_prefix}_per_op.png"
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return [path]
