"""Model documents must survive the disk round trip prediction-exact."""

from __future__ import annotations

import json

import numpy as np
import pytest

from shooting import (
    GBMConfig,
    PersistError,
    RFConfig,
    SRConfig,
    fit_gbm,
    fit_rf,
    fit_shooting,
    load_model,
    make_synthetic,
    model_from_dict,
    model_to_dict,
    predict,
    predict_gbm,
    predict_rf,
    save_model,
)
from shooting.persist import write_text_atomic


@pytest.fixture(scope="module")
def train():
    return make_synthetic(50, 3, 1.0, 17)


@pytest.fixture(scope="module")
def query():
    return make_synthetic(20, 3, 1.0, 23).features


def test_shooting_round_trip_exact(tmp_path, train, query):
    model = fit_shooting(train, SRConfig(k=5, seed=17))
    path = tmp_path / "sr.json"
    save_model(model, str(path))
    loaded = load_model(str(path))
    assert loaded.nu == model.nu
    assert loaded.nu_diagnostics is None  # diagnostics are not persisted
    assert np.array_equal(predict(loaded, query), predict(model, query))


def test_rf_round_trip_exact(tmp_path, train, query):
    model = fit_rf(train, RFConfig(n_trees=4, seed=1))
    path = tmp_path / "rf.json"
    save_model(model, str(path))
    loaded = load_model(str(path))
    assert np.array_equal(predict_rf(loaded, query), predict_rf(model, query))


def test_gbm_round_trip_exact(tmp_path, train, query):
    model = fit_gbm(train, GBMConfig(n_stages=6, seed=2))
    path = tmp_path / "gbm.json"
    save_model(model, str(path))
    loaded = load_model(str(path))
    assert loaded.base_value == model.base_value
    assert loaded.learning_rate == model.learning_rate
    assert np.array_equal(predict_gbm(loaded, query), predict_gbm(model, query))


def test_document_shape_and_leaf_thresholds(train):
    model = fit_rf(train, RFConfig(n_trees=2, seed=3))
    doc = model_to_dict(model)
    assert doc["format"] == "shooting-model"
    assert doc["format_version"] == 1
    assert doc["kind"] == "rf"
    tree = doc["model"]["trees"][0]
    for f, t in zip(tree["feature"], tree["threshold"]):
        assert (t is None) == (f == -1)
    # nan never appears, so strict JSON encoding must succeed
    json.dumps(doc, allow_nan=False)


def test_reject_wrong_format(train):
    with pytest.raises(PersistError, match="not a model document"):
        model_from_dict({"format": "something-else"})
    with pytest.raises(PersistError, match="not a model document"):
        model_from_dict([1, 2, 3])


def test_reject_wrong_version(train):
    model = fit_rf(train, RFConfig(n_trees=1))
    doc = model_to_dict(model)
    doc["format_version"] = 99
    with pytest.raises(PersistError, match="format_version"):
        model_from_dict(doc)


def test_reject_unknown_kind(train):
    model = fit_rf(train, RFConfig(n_trees=1))
    doc = model_to_dict(model)
    doc["kind"] = "mystery"
    with pytest.raises(PersistError, match="unknown model kind"):
        model_from_dict(doc)


def test_reject_truncated_body(train):
    model = fit_gbm(train, GBMConfig(n_stages=2))
    doc = model_to_dict(model)
    del doc["model"]["base_value"]
    with pytest.raises(PersistError, match="malformed"):
        model_from_dict(doc)
    doc["model"] = None
    with pytest.raises(PersistError, match="missing model body"):
        model_from_dict(doc)


def test_reject_unserializable_object():
    with pytest.raises(PersistError, match="cannot serialize"):
        model_to_dict({"not": "a model"})


def test_load_invalid_json(tmp_path):
    path = tmp_path / "junk.json"
    path.write_text("{ this is not json")
    with pytest.raises(PersistError, match="invalid JSON"):
        load_model(str(path))


def test_atomic_write_replaces_and_cleans_up(tmp_path):
    path = tmp_path / "out.txt"
    path.write_text("old")
    write_text_atomic(str(path), "new")
    assert path.read_text() == "new"
    leftovers = [p for p in tmp_path.iterdir() if p.name != "out.txt"]
    assert leftovers == []


def test_save_overwrites_previous_model(tmp_path, train, query):
    a = fit_rf(train, RFConfig(n_trees=1, seed=1))
    b = fit_rf(train, RFConfig(n_trees=3, seed=2))
    path = tmp_path / "model.json"
    save_model(a, str(path))
    save_model(b, str(path))
    loaded = load_model(str(path))
    assert len(loaded.trees) == 3
    assert np.array_equal(predict_rf(loaded, query), predict_rf(b, query))
