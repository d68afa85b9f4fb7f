"""Versioned JSON serialization for the three model kinds.

Floats ride through json's shortest-repr round trip untouched, so a
loaded model predicts bit-for-bit like the saved one. Writes go to a
temp file in the target directory followed by an atomic rename.
"""

from __future__ import annotations

import json
import os
import tempfile

import numpy as np

from .baselines import GradientBoosting, RandomForest
from .ensemble import ShootingEnsemble
from .linear import LinearModel, OffsetSet
from .tree import LEAF, RegressionTree

FORMAT_NAME = "shooting-model"
FORMAT_VERSION = 1


class PersistError(ValueError):
    """Unrecognized or malformed model document."""


def _tree_to_dict(tree: RegressionTree) -> dict:
    thresholds = [
        None if f == LEAF else t for f, t in zip(tree.feature, tree.threshold)
    ]
    return {
        "feature": tree.feature.tolist(),
        "threshold": thresholds,
        "left": tree.left.tolist(),
        "right": tree.right.tolist(),
        "value": tree.value.tolist(),
        "depth": tree.depth,
        "n_features": tree.n_features,
    }


def _tree_from_dict(d: dict) -> RegressionTree:
    thresholds = np.array(
        [np.nan if t is None else t for t in d["threshold"]], dtype=float
    )
    return RegressionTree(
        feature=np.array(d["feature"], dtype=np.int64),
        threshold=thresholds,
        left=np.array(d["left"], dtype=np.int64),
        right=np.array(d["right"], dtype=np.int64),
        value=np.array(d["value"], dtype=float),
        depth=int(d["depth"]),
        n_features=int(d["n_features"]),
    )


def _linear_to_dict(model: LinearModel) -> dict:
    return {
        "coefficients": model.coefficients.tolist(),
        "residual_variance": model.residual_variance,
        "covariance": model.covariance.tolist(),
        "covariance_factor": model.covariance_factor.tolist(),
        "jitter": model.jitter,
    }


def _linear_from_dict(d: dict) -> LinearModel:
    return LinearModel(
        coefficients=np.array(d["coefficients"], dtype=float),
        residual_variance=float(d["residual_variance"]),
        covariance=np.array(d["covariance"], dtype=float),
        covariance_factor=np.array(d["covariance_factor"], dtype=float),
        jitter=float(d["jitter"]),
    )


def model_to_dict(model) -> dict:
    if isinstance(model, ShootingEnsemble):
        kind = "shooting"
        body = {
            "linear": _linear_to_dict(model.linear),
            "offsets": {
                "offsets": model.offsets.offsets.tolist(),
                "projected": model.offsets.projected.tolist(),
            },
            "nu": model.nu,
            "trees": [_tree_to_dict(t) for t in model.trees],
        }
    elif isinstance(model, RandomForest):
        kind = "rf"
        body = {
            "trees": [_tree_to_dict(t) for t in model.trees],
            "n_features": model.n_features,
        }
    elif isinstance(model, GradientBoosting):
        kind = "gbm"
        body = {
            "base_value": model.base_value,
            "learning_rate": model.learning_rate,
            "trees": [_tree_to_dict(t) for t in model.trees],
            "n_features": model.n_features,
        }
    else:
        raise PersistError(f"cannot serialize {type(model).__name__}")
    return {"format": FORMAT_NAME, "format_version": FORMAT_VERSION, "kind": kind, "model": body}


def model_from_dict(doc: dict):
    if not isinstance(doc, dict) or doc.get("format") != FORMAT_NAME:
        raise PersistError("not a model document")
    if doc.get("format_version") != FORMAT_VERSION:
        raise PersistError(f"unsupported format_version {doc.get('format_version')!r}")
    kind = doc.get("kind")
    body = doc.get("model")
    if not isinstance(body, dict):
        raise PersistError("missing model body")
    try:
        if kind == "shooting":
            return ShootingEnsemble(
                linear=_linear_from_dict(body["linear"]),
                offsets=OffsetSet(
                    offsets=np.array(body["offsets"]["offsets"], dtype=float),
                    projected=np.array(body["offsets"]["projected"], dtype=float),
                ),
                nu=float(body["nu"]),
                trees=tuple(_tree_from_dict(t) for t in body["trees"]),
                nu_diagnostics=None,
            )
        if kind == "rf":
            return RandomForest(
                trees=tuple(_tree_from_dict(t) for t in body["trees"]),
                n_features=int(body["n_features"]),
            )
        if kind == "gbm":
            return GradientBoosting(
                base_value=float(body["base_value"]),
                learning_rate=float(body["learning_rate"]),
                trees=tuple(_tree_from_dict(t) for t in body["trees"]),
                n_features=int(body["n_features"]),
            )
    except (KeyError, TypeError) as exc:
        raise PersistError(f"malformed {kind} document: {exc}") from exc
    raise PersistError(f"unknown model kind {kind!r}")


def write_text_atomic(path: str, text: str) -> None:
    """Write via a sibling temp file and rename over the target."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_model(model, path: str) -> None:
    doc = model_to_dict(model)
    write_text_atomic(path, json.dumps(doc, allow_nan=False) + "\n")


def load_model(path: str):
    with open(path) as handle:
        try:
            doc = json.load(handle)
        except json.JSONDecodeError as exc:
            raise PersistError(f"invalid JSON: {exc}") from exc
    return model_from_dict(doc)
