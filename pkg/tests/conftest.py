from __future__ import annotations

import subprocess
import sys
import time
from pathlib import Path

import pytest

from metric_gate import (
    GateConfig,
    SensitiveLexicon,
    generate_corpus,
    schema_fingerprint,
    train,
    vectorize_queries,
)
from metric_gate.gbdt import GbdtHyperparams, save_model

REPO_ROOT = Path(__file__).resolve().parent.parent
FIXTURES_DIR = REPO_ROOT / "fixtures"

Q1 = "SELECT zip, COUNT(*) FROM patient_data GROUP BY zip;"
Q2 = "SELECT gender, diagnosis_code, COUNT(*) FROM patient_data GROUP BY gender, diagnosis_code;"
Q3 = "SELECT gender, COUNT(*) FROM patient_data GROUP BY gender;"


@pytest.fixture(scope="session")
def lexicon() -> SensitiveLexicon:
    return SensitiveLexicon()


@pytest.fixture(scope="session")
def config() -> GateConfig:
    return GateConfig()


@pytest.fixture(scope="session")
def small_corpus():
    return generate_corpus(200, 1)


@pytest.fixture(scope="session")
def trained(lexicon, config):
    """Default end-to-end artifacts: n=2000 seed=1 corpus, D=64, default hp.

    Wall time for generate+vectorize+train is recorded so the runtime
    budget can be asserted without retraining.
    """
    t0 = time.perf_counter()
    entries = generate_corpus(2000, 1)
    vectors = vectorize_queries([e.sql for e in entries], lexicon, config)
    labels = [float(e.label) for e in entries]
    model = train(
        vectors, labels, GbdtHyperparams(), schema_fingerprint=schema_fingerprint(64)
    )
    elapsed = time.perf_counter() - t0
    return {
        "entries": entries,
        "vectors": vectors,
        "labels": labels,
        "model": model,
        "train_seconds": elapsed,
    }


@pytest.fixture(scope="session")
def model_file(trained, tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp("model") / "model.json"
    save_model(trained["model"], path)
    return path


def run_cli(*args: str, env: dict | None = None, cwd: str | None = None):
    """Invoke the installed CLI in a subprocess; returns CompletedProcess."""
    return subprocess.run(
        [sys.executable, "-m", "metric_gate", *args],
        capture_output=True,
        text=True,
        env=env,
        cwd=cwd,
        timeout=120,
    )


@pytest.fixture(scope="session")
def cli_artifacts(tmp_path_factory):
    """Default pipeline built through the CLI itself: n=2000 seed=1 corpus
    plus a model trained with default hyperparameters."""
    root = tmp_path_factory.mktemp("cli")
    corpus = root / "corpus.jsonl"
    model = root / "model.json"
    gen = run_cli("gen-corpus", "--n", "2000", "--seed", "1", "--out", str(corpus))
    assert gen.returncode == 0, gen.stderr
    tr = run_cli("train", "--corpus", str(corpus), "--out", str(model))
    assert tr.returncode == 0, tr.stderr
    return {"root": root, "corpus": corpus, "model": model}


# one ACCEPTANCE pass/fail line per tagged criterion, printed in the
# terminal summary so it survives pytest's stdout capture
_ACCEPTANCE_RESULTS: dict[int, tuple[str, bool]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    tag = getattr(getattr(item, "function", None), "_acceptance", None)
    if tag is None:
        return
    number, name = tag
    if report.when == "call":
        _ACCEPTANCE_RESULTS[number] = (name, report.passed)
    elif report.when == "setup" and not report.passed:
        # fixture error or skip: the criterion was not demonstrated
        _ACCEPTANCE_RESULTS[number] = (name, False)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE_RESULTS):
        name, passed = _ACCEPTANCE_RESULTS[number]
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"ACCEPTANCE {number} ({name}): {verdict}")
