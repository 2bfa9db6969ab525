from __future__ import annotations

import csv

from metric_gate import analyze_batch
from metric_gate.gbdt import metrics_from_scores
from metric_gate.report import write_batch_report, write_eval_report

from conftest import Q1, Q3


def test_eval_report_files(tmp_path):
    scores = [0.1, 0.2, 0.9, 0.95, 0.4, 0.86]
    labels = [0, 0, 1, 1, 0, 1]
    ids = [f"q{i}" for i in range(6)]
    metrics = metrics_from_scores(scores, labels, 0.85)
    baseline = metrics_from_scores([float(l) for l in labels], labels, 0.5)
    out = tmp_path / "report"
    written = write_eval_report(str(out), ids, labels, scores, metrics, baseline, 0.85)
    names = {p.split("/")[-1] for p in written}
    assert names == {"scores.csv", "metrics.csv", "score_hist.png", "roc.png"}
    for p in written:
        assert (out / p.split("/")[-1]).stat().st_size > 0

    with open(out / "scores.csv", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["query_id", "label", "risk_score"]
    assert len(rows) == 7
    assert rows[1] == ["q0", "0", "0.100000"]

    with open(out / "metrics.csv", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    assert rows[0][0] == "scorer"
    scorers = {r[0] for r in rows[1:]}
    assert scorers == {"model", "rule_baseline"}


def test_eval_report_without_baseline(tmp_path):
    scores = [0.1, 0.9]
    labels = [0, 1]
    metrics = metrics_from_scores(scores, labels, 0.5)
    written = write_eval_report(str(tmp_path / "r"), ["a", "b"], labels, scores, metrics, None, 0.5)
    with open(tmp_path / "r" / "metrics.csv", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    assert [r[0] for r in rows[1:]] == ["model"]
    assert {p.split("/")[-1] for p in written} == {"scores.csv", "metrics.csv", "score_hist.png", "roc.png"}


def test_batch_report_files(tmp_path, trained, lexicon, config):
    qdir = tmp_path / "queries"
    qdir.mkdir()
    (qdir / "a.sql").write_text(Q1, encoding="utf-8")
    (qdir / "b.sql").write_text(Q3, encoding="utf-8")
    (qdir / "c.sql").write_text("INSERT INTO t (x) VALUES (1);", encoding="utf-8")
    paths = sorted(str(p) for p in qdir.glob("*.sql"))
    batch = analyze_batch(paths, trained["model"], lexicon, config)

    out = tmp_path / "report"
    written = write_batch_report(str(out), batch, config.threshold)
    names = {p.split("/")[-1] for p in written}
    assert names == {"verdicts.csv", "score_hist.png"}

    with open(out / "verdicts.csv", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["query_id", "status", "risk_score", "reduced_confidence", "reasons"]
    assert len(rows) == 4
    by_status = {r[1] for r in rows[1:]}
    assert by_status == {"BLOCKED", "APPROVED", "ERROR"}
    blocked_row = next(r for r in rows[1:] if r[1] == "BLOCKED")
    assert blocked_row[4] == "R_ZIP"
