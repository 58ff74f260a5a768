"""Report figures rendered next to the delimited outputs.

Uses matplotlib's object API with the Agg canvas directly, so no GUI
backend is touched and the PNG bytes are reproducible (no embedded
timestamps or software tag).
"""

from __future__ import annotations

from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

_PNG_METADATA = {"Software": None}


def _save(fig: Figure, path) -> None:
    FigureCanvasAgg(fig)
    fig.savefig(path, format="png", dpi=120, metadata=_PNG_METADATA)


def render_loss_curve(rows, path, title: str) -> None:
    """rows: (step, train_loss, val_loss_or_None)."""
    steps = [r[0] for r in rows]
    train = [r[1] for r in rows]
    fig = Figure(figsize=(6.0, 3.6))
    ax = fig.add_subplot(111)
    ax.plot(steps, train, lw=1.2, label="train")
    val_pts = [(r[0], r[2]) for r in rows if len(r) > 2 and r[2] is not None]
    if val_pts:
        ax.plot([p[0] for p in val_pts], [p[1] for p in val_pts],
                "o-", ms=3, lw=1.0, label="validation")
    ax.set_xlabel("step")
    ax.set_ylabel("loss")
    ax.set_title(title)
    ax.legend(loc="best")
    fig.tight_layout()
    _save(fig, path)


def render_f1_curve(rows, path) -> None:
    """rows: (epoch, train_loss, val_f1)."""
    epochs = [r[0] for r in rows]
    fig = Figure(figsize=(6.0, 3.6))
    ax = fig.add_subplot(111)
    ax.plot(epochs, [r[2] for r in rows], "o-", ms=3, lw=1.2, color="tab:green")
    ax.set_xlabel("epoch")
    ax.set_ylabel("validation micro-F1")
    ax.set_ylim(0.0, 1.05)
    ax.set_title("fine-tuning model selection")
    fig.tight_layout()
    _save(fig, path)


def render_cluster_report(trigger_sizes, argument_sizes, o_value: float, path) -> None:
    """Cluster-size bars for both candidate sets."""
    fig = Figure(figsize=(7.0, 3.4))
    for idx, (sizes, name) in enumerate(
        ((trigger_sizes, "trigger clusters"), (argument_sizes, "argument clusters"))
    ):
        ax = fig.add_subplot(1, 2, idx + 1)
        ax.bar(range(len(sizes)), sizes, color="tab:blue" if idx == 0 else "tab:orange")
        ax.set_xlabel("cluster")
        ax.set_ylabel("members")
        ax.set_title(name)
    fig.suptitle(f"objective O = {o_value:.4f}")
    fig.tight_layout()
    _save(fig, path)
