"""Report figures rendered next to the delimited evaluation output."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .metrics import EvalReport


def render_eval_figures(report: EvalReport, out_dir: str | Path, prefix: str = "eval") -> list[Path]:
    """Write a metrics bar chart and a semantic-score histogram as PNGs."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    fig, ax = plt.subplots(figsize=(5, 3.2))
    names = ["BLEU", "Pass rate", "AST diff"]
    values = [report.bleu, report.pass_rate, report.mean_ast_diff]
    bars = ax.bar(names, values, color=["#4c72b0", "#55a868", "#c44e52"])
    ax.set_ylim(0, 1)
    ax.set_ylabel("score")
    ax.set_title(f"Corpus metrics (n={report.total})")
    for bar, value in zip(bars, values):
        ax.text(bar.get_x() + bar.get_width() / 2, value + 0.02, f"{value:.3f}",
                ha="center", va="bottom", fontsize=8)
    fig.tight_layout()
    path = out / f"{prefix}_metrics.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    scores = [r.ast_diff for r in report.records if r.parsed]
    fig, ax = plt.subplots(figsize=(5, 3.2))
    if scores:
        ax.hist(scores, bins=20, range=(0, 1), color="#4c72b0", edgecolor="white")
    ax.set_xlabel("semantic score")
    ax.set_ylabel("records")
    ax.set_title(f"Semantic score distribution ({len(scores)} parsed)")
    fig.tight_layout()
    path = out / f"{prefix}_scores.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    return written
