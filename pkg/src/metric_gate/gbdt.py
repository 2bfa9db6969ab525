"""Gradient-boosted decision trees for risk scoring, from first principles.

Newton boosting with logistic loss. Each round fits one regression tree to
the current gradient/hessian statistics:

* ``g_i = p_i - y_i`` and ``h_i = p_i (1 - p_i)`` with ``p_i = sigmoid(F_i)``
* split gain (evaluated at midpoints between consecutive distinct sorted
  feature values, exact greedy over every feature)::

      gain = 1/2 * [ G_L^2/(H_L+lambda) + G_R^2/(H_R+lambda)
                     - (G_L+G_R)^2/(H_L+H_R+lambda) ] - gamma

* a split is accepted only when gain > 0 and both children carry
  ``sum(h) >= min_child_weight``; ties break to the lowest feature index,
  then the lowest threshold
* leaf weight ``w = -G/(H+lambda)``; the ensemble updates
  ``F_i += eta * tree(x_i)`` and predicts
  ``sigmoid(base_score + eta * sum(tree outputs))``
* ``base_score = logit(clamp(mean(y), 1e-4, 1-1e-4))``

Everything is deterministic: no sampling, stable sorts, fixed iteration
order. The ``seed`` hyperparameter is carried for reproducibility metadata
but exact greedy search never draws from it.

Model files are JSON with a fixed key order and a trailing sha256 checksum
over the canonical body; save/load round-trips are byte-identical. Filesystem
failures surface as the native OSError family.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    CorruptModel,
    DimensionMismatch,
    EmptyDataset,
    FormatVersionMismatch,
    NonFiniteInput,
    SchemaMismatch,
)

__all__ = [
    "FORMAT_VERSION",
    "GbdtHyperparams",
    "GbdtModel",
    "EvalMetrics",
    "train",
    "predict_proba",
    "predict_proba_batch",
    "check_schema",
    "save_model",
    "load_model",
    "evaluate",
    "metrics_from_scores",
]

FORMAT_VERSION = 1

_BASE_CLAMP = 1e-4
_PROBA_CLAMP = 1e-15  # keeps predictions strictly inside (0, 1)


@dataclass(eq=True)
class GbdtHyperparams:
    rounds: int = 50
    max_depth: int = 3
    learning_rate: float = 0.1
    l2_lambda: float = 1.0
    gamma: float = 0.0
    min_child_weight: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError("learning_rate must be in (0, 1]")
        if self.l2_lambda < 0.0:
            raise ValueError("l2_lambda must be >= 0")
        if self.gamma < 0.0:
            raise ValueError("gamma must be >= 0")
        if self.min_child_weight < 0.0:
            raise ValueError("min_child_weight must be >= 0")


# tree nodes: {"feature": int, "threshold": float, "left": int, "right": int}
# for internal nodes, {"weight": float} for leaves; node 0 is the root
_Tree = list[dict]


@dataclass
class GbdtModel:
    schema_fingerprint: str
    hyperparams: GbdtHyperparams
    base_score: float
    n_features: int
    trees: list[_Tree]
    training_meta: dict = field(default_factory=dict)
    format_version: int = FORMAT_VERSION

    def model_id(self) -> str:
        if not hasattr(self, "_model_id"):  # models are immutable once built
            digest = hashlib.sha256(_canonical_body(self).encode("utf-8")).hexdigest()
            self._model_id = f"gbdt-{digest[:12]}"
        return self._model_id


@dataclass(eq=True)
class EvalMetrics:
    accuracy: float
    precision: float
    recall: float
    auc: float
    tp: int
    fp: int
    tn: int
    fn: int


def _sigmoid(x: np.ndarray | float):
    return 1.0 / (1.0 + np.exp(-np.asarray(x, dtype=np.float64)))


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------


def train(
    vectors: Sequence[Sequence[float]] | np.ndarray,
    labels: Sequence[float] | np.ndarray,
    hyperparams: GbdtHyperparams | None = None,
    schema_fingerprint: str = "",
    training_meta: dict | None = None,
) -> GbdtModel:
    """Fit the boosted ensemble. Deterministic for fixed inputs."""
    hp = hyperparams or GbdtHyperparams()
    X = np.asarray(vectors, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise DimensionMismatch(
            f"vectors {X.shape} do not align with {y.shape[0]} labels"
        )
    if X.shape[0] < 2:
        raise EmptyDataset("training needs at least two examples")
    if X.shape[1] < 1:
        raise DimensionMismatch("vectors have zero width")
    if not np.isfinite(X).all() or not np.isfinite(y).all():
        raise NonFiniteInput("non-finite value in training data")
    if not np.isin(y, (0.0, 1.0)).all():
        raise ValueError("labels must be 0 or 1")

    mean = float(np.clip(y.mean(), _BASE_CLAMP, 1.0 - _BASE_CLAMP))
    base_score = math.log(mean / (1.0 - mean))
    margins = np.full(X.shape[0], base_score, dtype=np.float64)

    trees: list[_Tree] = []
    for _ in range(hp.rounds):
        p = _sigmoid(margins)
        grad = p - y
        hess = p * (1.0 - p)
        tree: _Tree = []
        _build_node(
            X, grad, hess, np.arange(X.shape[0]), 0, hp, tree, margins
        )
        trees.append(tree)

    return GbdtModel(
        schema_fingerprint=schema_fingerprint,
        hyperparams=hp,
        base_score=base_score,
        n_features=int(X.shape[1]),
        trees=trees,
        training_meta=dict(training_meta or {}),
    )


def _build_node(
    X: np.ndarray,
    grad: np.ndarray,
    hess: np.ndarray,
    rows: np.ndarray,
    depth: int,
    hp: GbdtHyperparams,
    tree: _Tree,
    margins: np.ndarray,
) -> int:
    """Append the subtree for ``rows``; returns its node index.

    Leaves apply their weight to ``margins`` directly (the builder already
    knows the exact row partition), so no post-hoc prediction pass is needed.
    """
    g = grad[rows]
    h = hess[rows]
    G = float(g.sum())
    H = float(h.sum())

    split = None
    if depth < hp.max_depth and rows.shape[0] >= 2:
        split = _best_split(X, rows, g, h, G, H, hp)

    index = len(tree)
    if split is None:
        weight = -G / (H + hp.l2_lambda)
        tree.append({"weight": weight})
        margins[rows] += hp.learning_rate * weight
        return index

    feature, threshold = split
    tree.append({"feature": feature, "threshold": threshold, "left": -1, "right": -1})
    mask = X[rows, feature] < threshold
    left = _build_node(X, grad, hess, rows[mask], depth + 1, hp, tree, margins)
    right = _build_node(X, grad, hess, rows[~mask], depth + 1, hp, tree, margins)
    tree[index]["left"] = left
    tree[index]["right"] = right
    return index


def _best_split(
    X: np.ndarray,
    rows: np.ndarray,
    g: np.ndarray,
    h: np.ndarray,
    G: float,
    H: float,
    hp: GbdtHyperparams,
) -> tuple[int, float] | None:
    """Exact greedy search. Lowest feature index wins gain ties, then lowest
    threshold (candidates are scanned in ascending order and replaced only on
    strictly larger gain)."""
    lam = hp.l2_lambda
    parent_term = (G * G) / (H + lam)
    best_gain = 0.0
    best: tuple[int, float] | None = None
    for feature in range(X.shape[1]):
        x = X[rows, feature]
        order = np.argsort(x, kind="stable")
        xs = x[order]
        if xs[0] == xs[-1]:
            continue
        gs = np.cumsum(g[order])[:-1]
        hs = np.cumsum(h[order])[:-1]
        boundary = xs[:-1] != xs[1:]
        GL = gs[boundary]
        HL = hs[boundary]
        GR = G - GL
        HR = H - HL
        thresholds = (xs[:-1][boundary] + xs[1:][boundary]) / 2.0
        gains = (
            0.5 * (GL * GL / (HL + lam) + GR * GR / (HR + lam) - parent_term)
            - hp.gamma
        )
        valid = (HL >= hp.min_child_weight) & (HR >= hp.min_child_weight)
        gains = np.where(valid, gains, -np.inf)
        j = int(np.argmax(gains))  # first maximum = lowest threshold
        gain = float(gains[j])
        if gain > 0.0 and gain > best_gain:
            best_gain = gain
            best = (feature, float(thresholds[j]))
    return best


# ---------------------------------------------------------------------------
# prediction
# ---------------------------------------------------------------------------


def _tree_output(tree: _Tree, x: np.ndarray) -> float:
    node = tree[0]
    while "weight" not in node:
        node = tree[node["left"] if x[node["feature"]] < node["threshold"] else node["right"]]
    return node["weight"]


def _margins(model: GbdtModel, X: np.ndarray) -> np.ndarray:
    out = np.full(X.shape[0], model.base_score, dtype=np.float64)
    eta = model.hyperparams.learning_rate
    for i in range(X.shape[0]):
        row = X[i]
        acc = 0.0
        for tree in model.trees:
            acc += _tree_output(tree, row)
        out[i] += eta * acc
    return out


def predict_proba_batch(
    model: GbdtModel, vectors: Sequence[Sequence[float]] | np.ndarray
) -> np.ndarray:
    """Probabilities for a matrix of fused vectors, strictly inside (0, 1)."""
    X = np.asarray(vectors, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise DimensionMismatch(
            f"expected vectors of width {model.n_features}, got shape {X.shape}"
        )
    if not np.isfinite(X).all():
        raise NonFiniteInput("non-finite value in prediction input")
    p = _sigmoid(_margins(model, X))
    return np.clip(p, _PROBA_CLAMP, 1.0 - _PROBA_CLAMP)


def predict_proba(model: GbdtModel, vector: Sequence[float]) -> float:
    """Probability for one fused vector."""
    return float(predict_proba_batch(model, np.asarray(vector, dtype=np.float64)[None, :])[0])


def check_schema(model: GbdtModel, expected_fingerprint: str) -> None:
    """Refuse to score under a configuration the model was not trained for."""
    if model.schema_fingerprint != expected_fingerprint:
        raise SchemaMismatch(
            "model schema fingerprint "
            f"{model.schema_fingerprint[:12]}... does not match the active "
            f"configuration {expected_fingerprint[:12]}..."
        )


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def _payload(model: GbdtModel) -> dict:
    # construction order fixes the on-disk key order
    return {
        "format_version": model.format_version,
        "schema_fingerprint": model.schema_fingerprint,
        "hyperparams": asdict(model.hyperparams),
        "n_features": model.n_features,
        "base_score": model.base_score,
        "training_meta": model.training_meta,
        "trees": model.trees,
    }


def _canonical_body(model: GbdtModel) -> str:
    return json.dumps(_payload(model), separators=(",", ":"), sort_keys=False)


def save_model(model: GbdtModel, path: str) -> None:
    body = _canonical_body(model)
    checksum = hashlib.sha256(body.encode("utf-8")).hexdigest()
    # splice the checksum in as the final field of the same document
    text = body[:-1] + ',"checksum":"' + checksum + '"}\n'
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def load_model(path: str) -> GbdtModel:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorruptModel(f"not a valid model document: {exc}") from exc
    if not isinstance(doc, dict):
        raise CorruptModel("model document is not an object")
    version = doc.get("format_version")
    if not isinstance(version, int):
        raise CorruptModel("missing or malformed format_version")
    if version != FORMAT_VERSION:
        raise FormatVersionMismatch(
            f"model format_version {version} is not supported (expected {FORMAT_VERSION})"
        )
    checksum = doc.pop("checksum", None)
    if not isinstance(checksum, str):
        raise CorruptModel("missing integrity checksum")
    model = _decode_payload(doc)
    expected = hashlib.sha256(_canonical_body(model).encode("utf-8")).hexdigest()
    if checksum != expected:
        raise CorruptModel("integrity checksum mismatch")
    return model


def _decode_payload(doc: dict) -> GbdtModel:
    try:
        hp_doc = doc["hyperparams"]
        hp = GbdtHyperparams(
            rounds=int(hp_doc["rounds"]),
            max_depth=int(hp_doc["max_depth"]),
            learning_rate=float(hp_doc["learning_rate"]),
            l2_lambda=float(hp_doc["l2_lambda"]),
            gamma=float(hp_doc["gamma"]),
            min_child_weight=float(hp_doc["min_child_weight"]),
            seed=int(hp_doc["seed"]),
        )
        model = GbdtModel(
            schema_fingerprint=str(doc["schema_fingerprint"]),
            hyperparams=hp,
            base_score=float(doc["base_score"]),
            n_features=int(doc["n_features"]),
            trees=doc["trees"],
            training_meta=doc["training_meta"],
            format_version=int(doc["format_version"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptModel(f"malformed model field: {exc}") from exc
    _validate_trees(model)
    return model


def _validate_trees(model: GbdtModel) -> None:
    if not isinstance(model.trees, list):
        raise CorruptModel("trees must be a list")
    if not isinstance(model.training_meta, dict):
        raise CorruptModel("training_meta must be an object")
    if not math.isfinite(model.base_score):
        raise CorruptModel("non-finite base_score")
    for t_index, tree in enumerate(model.trees):
        if not isinstance(tree, list) or not tree:
            raise CorruptModel(f"tree {t_index} is empty or not a list")
        for node in tree:
            if not isinstance(node, dict):
                raise CorruptModel(f"tree {t_index} has a malformed node")
            if "weight" in node:
                if not isinstance(node["weight"], (int, float)) or not math.isfinite(
                    node["weight"]
                ):
                    raise CorruptModel(f"tree {t_index} has a non-finite leaf")
                continue
            if not all(k in node for k in ("feature", "threshold", "left", "right")):
                raise CorruptModel(f"tree {t_index} has an incomplete split node")
            feature, left, right = node["feature"], node["left"], node["right"]
            if not isinstance(feature, int) or not 0 <= feature < model.n_features:
                raise CorruptModel(f"tree {t_index} splits on invalid feature")
            if not isinstance(node["threshold"], (int, float)) or not math.isfinite(
                node["threshold"]
            ):
                raise CorruptModel(f"tree {t_index} has a non-finite threshold")
            if not all(
                isinstance(v, int) and 0 <= v < len(tree) for v in (left, right)
            ):
                raise CorruptModel(f"tree {t_index} has dangling child links")


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def metrics_from_scores(
    scores: Sequence[float] | np.ndarray,
    labels: Sequence[float] | np.ndarray,
    threshold: float,
) -> EvalMetrics:
    """Threshold classification metrics plus rank-based AUC (ties count 1/2).

    Positive prediction means ``score > threshold`` (strict, the gate's own
    rule). Precision/recall are 0 when their denominators are empty; AUC is
    0.5 when either class is absent (no ranking information).
    """
    scores = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if y.shape[0] == 0:
        raise EmptyDataset("evaluation needs at least one example")
    predicted = scores > threshold
    actual = y == 1.0
    tp = int(np.sum(predicted & actual))
    fp = int(np.sum(predicted & ~actual))
    tn = int(np.sum(~predicted & ~actual))
    fn = int(np.sum(~predicted & actual))
    total = tp + fp + tn + fn
    precision = tp / (tp + fp) if (tp + fp) > 0 else 0.0
    recall = tp / (tp + fn) if (tp + fn) > 0 else 0.0
    return EvalMetrics(
        accuracy=(tp + tn) / total,
        precision=precision,
        recall=recall,
        auc=_rank_auc(scores, actual),
        tp=tp,
        fp=fp,
        tn=tn,
        fn=fn,
    )


def evaluate(
    model: GbdtModel,
    vectors: Sequence[Sequence[float]] | np.ndarray,
    labels: Sequence[float] | np.ndarray,
    threshold: float,
) -> EvalMetrics:
    """Score ``vectors`` with the model and compute metrics at ``threshold``."""
    return metrics_from_scores(predict_proba_batch(model, vectors), labels, threshold)


def _rank_auc(scores: np.ndarray, positive: np.ndarray) -> float:
    """Mann-Whitney AUC with average ranks, so ties contribute one half."""
    n_pos = int(positive.sum())
    n_neg = positive.shape[0] - n_pos
    if n_pos == 0 or n_neg == 0:
        return 0.5  # degenerate split carries no ranking information
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(scores.shape[0], dtype=np.float64)
    sorted_scores = scores[order]
    i = 0
    while i < sorted_scores.shape[0]:
        j = i
        while j + 1 < sorted_scores.shape[0] and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0  # average 1-based rank
        i = j + 1
    rank_sum = float(ranks[positive].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)
