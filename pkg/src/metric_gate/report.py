"""Report rendering: CSV tables plus matplotlib figures.

``eval --report-dir`` and ``batch --report-dir`` drop their delimited output
(scores, verdicts, metrics) and companion PNG figures (score histogram, ROC
curve) into one directory. Figures use the Agg backend so rendering works
headless.
"""

from __future__ import annotations

import csv
import logging
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

import numpy as np  # noqa: E402

from .gate import BatchResult, Verdict  # noqa: E402
from .gbdt import EvalMetrics  # noqa: E402

__all__ = [
    "write_eval_report",
    "write_batch_report",
]

logger = logging.getLogger(__name__)

_FIG_SIZE = (6.4, 4.2)


def _score_histogram(
    scores: np.ndarray,
    labels: np.ndarray | None,
    threshold: float,
    path: Path,
    title: str,
) -> None:
    fig, ax = plt.subplots(figsize=_FIG_SIZE)
    bins = np.linspace(0.0, 1.0, 21)
    if labels is None:
        ax.hist(scores, bins=bins, color="#4878a8", alpha=0.85, label="queries")
    else:
        ax.hist(
            scores[labels == 0], bins=bins, color="#4878a8", alpha=0.7, label="label 0"
        )
        ax.hist(
            scores[labels == 1], bins=bins, color="#c44e52", alpha=0.7, label="label 1"
        )
    ax.axvline(threshold, color="black", linestyle="--", linewidth=1.2, label="threshold")
    ax.set_xlabel("risk score")
    ax.set_ylabel("queries")
    ax.set_title(title)
    ax.legend(loc="upper center")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _roc_curve(scores: np.ndarray, labels: np.ndarray, auc: float, path: Path) -> None:
    order = np.argsort(-scores, kind="stable")
    sorted_labels = labels[order]
    n_pos = max(int(sorted_labels.sum()), 1)
    n_neg = max(int((1 - sorted_labels).sum()), 1)
    tpr = np.concatenate([[0.0], np.cumsum(sorted_labels) / n_pos])
    fpr = np.concatenate([[0.0], np.cumsum(1 - sorted_labels) / n_neg])
    fig, ax = plt.subplots(figsize=_FIG_SIZE)
    ax.plot(fpr, tpr, color="#c44e52", linewidth=1.6, label=f"model (AUC={auc:.4f})")
    ax.plot([0, 1], [0, 1], color="#888888", linestyle=":", linewidth=1.0, label="chance")
    ax.set_xlabel("false positive rate")
    ax.set_ylabel("true positive rate")
    ax.set_title("held-out ROC")
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def write_eval_report(
    out_dir: str,
    query_ids: list[str],
    labels: list[int],
    scores: list[float],
    metrics: EvalMetrics,
    baseline: EvalMetrics | None,
    threshold: float,
) -> list[str]:
    """Write scores.csv, metrics.csv, score_hist.png, roc.png; returns paths."""
    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    written: list[str] = []

    scores_path = directory / "scores.csv"
    with open(scores_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["query_id", "label", "risk_score"])
        for query_id, label, score in zip(query_ids, labels, scores):
            writer.writerow([query_id, label, f"{score:.6f}"])
    written.append(str(scores_path))

    metrics_path = directory / "metrics.csv"
    with open(metrics_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["scorer", "accuracy", "precision", "recall", "auc", "tp", "fp", "tn", "fn"]
        )
        rows = [("model", metrics)]
        if baseline is not None:
            rows.append(("rule_baseline", baseline))
        for name, m in rows:
            writer.writerow(
                [
                    name,
                    f"{m.accuracy:.6f}",
                    f"{m.precision:.6f}",
                    f"{m.recall:.6f}",
                    f"{m.auc:.6f}",
                    m.tp,
                    m.fp,
                    m.tn,
                    m.fn,
                ]
            )
    written.append(str(metrics_path))

    score_arr = np.asarray(scores, dtype=np.float64)
    label_arr = np.asarray(labels, dtype=np.int64)
    hist_path = directory / "score_hist.png"
    _score_histogram(score_arr, label_arr, threshold, hist_path, "score distribution")
    written.append(str(hist_path))
    roc_path = directory / "roc.png"
    _roc_curve(score_arr, label_arr, metrics.auc, roc_path)
    written.append(str(roc_path))

    logger.info("evaluation report written to %s", directory)
    return written


def write_batch_report(out_dir: str, batch: BatchResult, threshold: float) -> list[str]:
    """Write verdicts.csv and score_hist.png for a batch run; returns paths."""
    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    written: list[str] = []

    verdicts_path = directory / "verdicts.csv"
    with open(verdicts_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["query_id", "status", "risk_score", "reduced_confidence", "reasons"]
        )
        for item in batch.results:
            if isinstance(item, Verdict):
                writer.writerow(
                    [
                        item.query_id,
                        item.status,
                        f"{item.risk_score:.6f}",
                        str(item.reduced_confidence).lower(),
                        ";".join(r.code for r in item.reasons),
                    ]
                )
            else:
                writer.writerow([item.query_id, "ERROR", "", "", item.error])
    written.append(str(verdicts_path))

    scores = np.asarray(
        [i.risk_score for i in batch.results if isinstance(i, Verdict)],
        dtype=np.float64,
    )
    if scores.size:
        hist_path = directory / "score_hist.png"
        _score_histogram(scores, None, threshold, hist_path, "batch score distribution")
        written.append(str(hist_path))

    logger.info("batch report written to %s", directory)
    return written
