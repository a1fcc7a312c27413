import math

import numpy as np
import pytest

from flowtriage.flows.encode import (
    EncodeStats,
    apply_normalizer,
    encode_dataset,
    encode_features,
    fit_apply_normalizer,
    load_encoded,
    save_encoded,
)
from flowtriage.flows.types import FeatureSchema, FlowRecord


def _record(schema, **values):
    feats = [(name, values.get(name)) for name in schema.numeric_features]
    feats += [(name, values.get(name)) for name in schema.categorical_features]
    return FlowRecord(flow_id="t", raw_features=[(n, v) for n, v in feats if v is not None])


def test_numeric_copy_onehot_and_padding(schema):
    rec = _record(schema, sttl=64, sload=100.5, dload=2, spkts=10, proto="tcp")
    fv = encode_features(rec, schema)
    assert fv.values.shape == (66,)
    assert fv.values[:4].tolist() == [64.0, 100.5, 2.0, 10.0]
    assert fv.values[4:7].tolist() == [1.0, 0.0, 0.0]  # one-hot tcp
    assert not fv.values[7:].any()


def test_unsw_style_49_resolved_dims_pad_17():
    schema = FeatureSchema(
        schema_id="unsw-49",
        numeric_features=tuple(f"n{i}" for i in range(46)),
        categorical_features={"proto": ("tcp", "udp", "icmp")},
        pad_to=66,
    )
    assert schema.resolved_width == 49
    rec = FlowRecord(
        flow_id="u",
        raw_features=[(f"n{i}", float(i + 1)) for i in range(46)] + [("proto", "udp")],
    )
    fv = encode_features(rec, schema)
    assert fv.values[:46].tolist() == [float(i + 1) for i in range(46)]
    assert fv.values[46:49].tolist() == [0.0, 1.0, 0.0]
    assert fv.values[49:].tolist() == [0.0] * 17  # 17 trailing zeros


def test_all_defaults_record_is_zero_vector(schema):
    fv = encode_features(FlowRecord(flow_id="z"), schema)
    assert not fv.values.any()


def test_unseen_category_gives_zero_block_and_counts(schema):
    stats = EncodeStats()
    rec = _record(schema, sttl=1, sload=1, dload=1, spkts=1, proto="sctp")
    fv = encode_features(rec, schema, stats=stats)
    assert fv.values[4:7].tolist() == [0.0, 0.0, 0.0]
    assert stats.unseen_categories == 1
    assert stats.by_feature == {"proto": 1}


def test_nonfinite_numeric_raises(schema):
    rec = FlowRecord(flow_id="n", raw_features=[("sttl", math.inf)])
    with pytest.raises(ValueError, match="non-finite"):
        encode_features(rec, schema)


# ---------------------------------------------------------------- normalizer


def test_value_at_mean_maps_to_zero():
    train = np.array([[1.0], [2.0], [3.0]])
    stats, train_norm, applied = fit_apply_normalizer(train, np.array([[2.0]]))
    assert applied[0, 0] == 0.0


def test_hand_computed_population_sigma():
    train = np.array([[1.0], [2.0], [3.0]])
    stats, _, applied = fit_apply_normalizer(train, np.array([[2.0], [3.0]]))
    assert stats.mean[0] == 2.0
    assert stats.stddev[0] == pytest.approx(math.sqrt(2.0 / 3.0), abs=1e-12)
    assert applied[0, 0] == 0.0
    assert applied[1, 0] == pytest.approx(1.2247448713915890, abs=1e-9)


def test_identity_when_mean0_sigma1():
    rng = np.random.default_rng(0)
    raw = rng.standard_normal(200)
    train = ((raw - raw.mean()) / raw.std()).reshape(-1, 1)
    stats, norm, _ = fit_apply_normalizer(train)
    assert np.allclose(norm, train, atol=1e-9)


def test_constant_feature_maps_to_zero_not_nan():
    train = np.full((5, 1), 7.0)
    stats, norm, applied = fit_apply_normalizer(train, np.array([[7.0], [9.0]]))
    assert stats.stddev[0] == 0.0
    assert np.all(norm == 0.0)
    assert np.all(applied == 0.0)


def test_empty_train_errors():
    with pytest.raises(ValueError, match="empty"):
        fit_apply_normalizer(np.zeros((0, 3)))


def test_fit_then_apply_self_normalizes():
    rng = np.random.default_rng(3)
    train = rng.normal(5.0, 3.0, size=(500, 8))
    _, norm, _ = fit_apply_normalizer(train)
    assert np.abs(norm.mean(axis=0)).max() < 1e-9
    assert np.abs(norm.std(axis=0) - 1.0).max() < 1e-9


def test_onehot_positions_pass_through(schema):
    recs = [
        _record(schema, sttl=v, sload=v * 2, dload=1, spkts=1, proto="tcp")
        for v in (1.0, 2.0, 3.0)
    ]
    dataset = encode_dataset(recs, schema)
    stats, norm, _ = fit_apply_normalizer(dataset.X, numeric_width=schema.numeric_width)
    assert np.all(norm[:, 4] == 1.0)  # tcp one-hot untouched


def test_mean_imputation_gives_zero_zscore(schema):
    recs = [
        _record(schema, sttl=10.0, sload=1, dload=1, spkts=1, proto="tcp"),
        _record(schema, sload=2, dload=1, spkts=1, proto="tcp"),  # sttl missing
        _record(schema, sttl=30.0, sload=3, dload=1, spkts=1, proto="tcp"),
    ]
    dataset = encode_dataset(recs, schema)
    assert dataset.X[1, 0] == 20.0  # observed mean of 10 and 30
    _, norm, _ = fit_apply_normalizer(dataset.X, numeric_width=schema.numeric_width)
    assert norm[1, 0] == 0.0
    assert dataset.encode_stats.imputed_cells == 1


def test_encoded_dataset_round_trip(tmp_path, schema):
    recs = [
        _record(schema, sttl=5, sload=1, dload=2, spkts=3, proto="udp"),
        _record(schema, sttl=6, sload=2, dload=2, spkts=3, proto="tcp"),
        _record(schema, sttl=7, sload=3, dload=2, spkts=3, proto="tcp"),
    ]
    dataset = encode_dataset(recs, schema)
    stats, _, _ = fit_apply_normalizer(dataset.X, numeric_width=schema.numeric_width)
    save_encoded(dataset, stats, tmp_path)
    loaded, loaded_stats = load_encoded(tmp_path)
    assert np.array_equal(loaded.X, dataset.X)
    assert np.array_equal(loaded_stats.mean, stats.mean)
    assert np.array_equal(loaded_stats.stddev, stats.stddev)
    assert loaded.flow_ids == dataset.flow_ids


def test_apply_normalizer_does_not_mutate():
    stats, _, _ = fit_apply_normalizer(np.array([[1.0], [3.0]]))
    x = np.array([[2.0]])
    apply_normalizer(x, stats)
    assert x[0, 0] == 2.0
