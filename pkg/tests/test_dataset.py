import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import norm

from mmiboost.dataset import (Dataset, GeneratorSpec, NormParams, apply_norm, generate, load,
                              load_csv, load_libsvm, normalize_unit_interval, split_train_test,
                              write_csv, write_meta)
from mmiboost.errors import DataError


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


# -- CSV ------------------------------------------------------------------


def test_csv_with_header_and_01_labels(tmp_path):
    p = _write(tmp_path, "a.csv", "f1,f2,cls\n0.5,1,0\n2,3,1\n-1,0,1\n")
    ds = load_csv(p)
    assert ds.raw and ds.name == "a"
    np.testing.assert_array_equal(ds.features, [[0.5, 1], [2, 3], [-1, 0]])
    np.testing.assert_array_equal(ds.labels, [-1, 1, 1])
    assert ds.label_mapping == {"0": -1, "1": 1}


def test_csv_without_header_label_first(tmp_path):
    p = _write(tmp_path, "b.csv", "-1,0.1,0.2\n1,0.3,0.4\n")
    ds = load_csv(p, label_column=0)
    np.testing.assert_array_equal(ds.labels, [-1, 1])
    np.testing.assert_array_equal(ds.features, [[0.1, 0.2], [0.3, 0.4]])


def test_csv_string_labels_sorted(tmp_path):
    p = _write(tmp_path, "c.csv", "1,good\n2,bad\n3,good\n")
    ds = load_csv(p)
    np.testing.assert_array_equal(ds.labels, [1, -1, 1])


def test_csv_errors_carry_line_numbers(tmp_path):
    p = _write(tmp_path, "d.csv", "x,y\n1,1\n2,abc,1\n")
    with pytest.raises(DataError, match="line 3"):
        load_csv(p)
    p = _write(tmp_path, "e.csv", "1,1\nfoo,0\n")
    with pytest.raises(DataError, match="line 2: non-numeric"):
        load_csv(p)


@pytest.mark.parametrize("text,msg", [
    ("1,a\n2,b\n3,c\n", "two classes"),
    ("1,a\n2,a\n", "one class"),
    ("", "empty"),
])
def test_csv_label_errors(tmp_path, text, msg):
    with pytest.raises(DataError, match=msg):
        load_csv(_write(tmp_path, "f.csv", text))


def test_missing_file():
    with pytest.raises(DataError, match="no such file"):
        load_csv("/nonexistent/x.csv")


def test_write_csv_round_trip(tmp_path):
    r = np.random.default_rng(0)
    ds = Dataset(r.standard_normal((5, 3)), [1, -1, 1, 1, -1], name="rt")
    p = tmp_path / "rt.csv"
    write_csv(ds, p)
    back = load_csv(p)
    np.testing.assert_array_equal(back.features, ds.features)
    np.testing.assert_array_equal(back.labels, ds.labels)
    meta = write_meta(generate(GeneratorSpec("twonorm", 4, 3, 1)), p)
    assert "kind=twonorm" in meta.read_text()


# -- LIBSVM ---------------------------------------------------------------


def test_libsvm_dense_fill(tmp_path):
    p = _write(tmp_path, "a.svm", "+1 1:0.5 3:2\n-1 2:1.5\n# comment\n\n+1\n")
    ds = load_libsvm(p)
    np.testing.assert_array_equal(ds.features, [[0.5, 0, 2], [0, 1.5, 0], [0, 0, 0]])
    np.testing.assert_array_equal(ds.labels, [1, -1, 1])
    assert load_libsvm(p, n_features=5).p == 5
    assert load(p).p == 3


@pytest.mark.parametrize("text,msg", [
    ("1 2:1 1:1\n0 1:1\n", "line 1: feature indices must increase"),
    ("1 1:1\n0 2:x\n", "line 2: malformed"),
    ("# nothing\n", "empty"),
])
def test_libsvm_errors(tmp_path, text, msg):
    with pytest.raises(DataError, match=msg):
        load_libsvm(_write(tmp_path, "b.svm", text))


def test_libsvm_declared_width_too_small(tmp_path):
    p = _write(tmp_path, "c.svm", "1 4:1\n0 1:1\n")
    with pytest.raises(DataError, match="exceeds"):
        load_libsvm(p, n_features=3)


# -- split and normalization ----------------------------------------------


@given(n=st.integers(2, 60), frac=st.floats(0.05, 0.95), seed=st.integers(0, 2 ** 32))
def test_split_partitions_and_sizes(n, frac, seed):
    y = np.array([1, -1] * n)[:n]
    ds = Dataset(np.arange(n, dtype=float)[:, None], y)
    n_train = min(n, math.ceil(n * frac - 1e-9))
    if n_train < 2:
        with pytest.raises(DataError, match="two-class"):
            split_train_test(ds, frac, seed)
        return
    tr, te = split_train_test(ds, frac, seed)
    assert tr.n == n_train
    assert tr.n + te.n == n
    ids = np.concatenate([tr.features[:, 0], te.features[:, 0]])
    assert sorted(ids) == list(range(n))
    assert tr.has_both_classes()


def test_split_is_deterministic():
    ds = generate(GeneratorSpec("twonorm", 50, 2, 3))
    a, _ = split_train_test(ds, 0.7, 11)
    b, _ = split_train_test(ds, 0.7, 11)
    c, _ = split_train_test(ds, 0.7, 12)
    np.testing.assert_array_equal(a.features, b.features)
    assert not np.array_equal(a.features, c.features)
    assert a.n == 35


def test_split_rejects_bad_fraction():
    ds = Dataset(np.zeros((4, 1)), [1, -1, 1, -1])
    for f in (0.0, 1.0, 1.5):
        with pytest.raises(DataError):
            split_train_test(ds, f)


def test_normalize_maps_train_onto_unit_interval():
    X = np.array([[1.0, 5.0, 3.0], [3.0, 5.0, -1.0], [2.0, 5.0, 1.0]])
    tr, te, params = normalize_unit_interval(
        Dataset(X, [1, -1, 1]), Dataset([[4.0, 7.0, -3.0]], [1]))
    np.testing.assert_allclose(tr.features[:, 0], [0, 1, 0.5])
    np.testing.assert_array_equal(tr.features[:, 1], 0.0)  # constant column
    np.testing.assert_allclose(tr.features[:, 2], [1, 0, 0.5])
    np.testing.assert_array_equal(te.features, [[1.0, 1.0, 0.0]])  # clamped
    assert not tr.raw and not te.raw
    np.testing.assert_array_equal(apply_norm(Dataset(X, [1, -1, 1]), params).features,
                                  tr.features)


def test_norm_feature_mismatch():
    params = NormParams.fit(np.zeros((3, 2)))
    with pytest.raises(DataError, match="feature count"):
        params.apply(np.zeros((1, 3)))


def test_dataset_validation():
    with pytest.raises(DataError):
        Dataset(np.zeros((2, 2)), [1, 0])
    with pytest.raises(DataError):
        Dataset(np.zeros((2, 2)), [1])
    with pytest.raises(DataError):
        Dataset([[np.nan]], [1])
    ds = Dataset(np.zeros((2, 2)), [1, -1])
    with pytest.raises(ValueError):
        ds.features[0, 0] = 1.0


# -- generators -----------------------------------------------------------


def test_generator_is_seeded():
    a = generate(GeneratorSpec("ringnorm", 20, 5, 9))
    b = generate(GeneratorSpec("ringnorm", 20, 5, 9))
    np.testing.assert_array_equal(a.features, b.features)
    assert a.meta["kind"] == "ringnorm" and a.raw


def test_generator_rejects_unknown_kind():
    with pytest.raises(DataError):
        GeneratorSpec("fournorm", 10)


def _mc(kind, n=40000, d=20, seed=1):
    return generate(GeneratorSpec(kind, n, d, seed))


def test_twonorm_moments_and_bayes_error():
    ds = _mc("twonorm")
    a = 2 / math.sqrt(20)
    X, y = ds.features, ds.labels
    assert abs(np.mean(y == 1) - 0.5) < 4 * 0.5 / math.sqrt(ds.n)
    se = 4 / math.sqrt(ds.n / 2)
    assert np.all(np.abs(X[y == 1].mean(0) - a) < se)
    assert np.all(np.abs(X[y == -1].mean(0) + a) < se)
    # Bayes rule sign(sum x) errs with probability Phi(-a sqrt(d)) = Phi(-2)
    bayes = norm.cdf(-2.0)
    err = np.mean(np.where(X.sum(1) > 0, 1, -1) != y)
    assert abs(err - bayes) < 4 * math.sqrt(bayes * (1 - bayes) / ds.n)


def test_threenorm_moments():
    ds = _mc("threenorm")
    a = 2 / math.sqrt(20)
    X, y = ds.features, ds.labels
    pos, neg = X[y == 1], X[y == -1]
    se = 4 / math.sqrt(len(neg))
    alt = a * np.where(np.arange(20) % 2 == 0, 1, -1)
    assert np.all(np.abs(neg.mean(0) - alt) < se)
    # +1 is a symmetric two-component mixture: mean 0, variance 1 + a^2
    assert np.all(np.abs(pos.mean(0)) < 4 * math.sqrt(1 + a * a) / math.sqrt(len(pos)))
    assert abs(pos.var(0).mean() - (1 + a * a)) < 0.03


def test_ringnorm_moments():
    ds = _mc("ringnorm")
    a = 1 / math.sqrt(20)
    X, y = ds.features, ds.labels
    pos, neg = X[y == 1], X[y == -1]
    assert abs(pos.var(0).mean() - 4.0) < 0.06
    assert abs(neg.var(0).mean() - 1.0) < 0.015
    assert np.all(np.abs(neg.mean(0) - a) < 4 / math.sqrt(len(neg)))
    assert np.all(np.abs(pos.mean(0)) < 4 * 2 / math.sqrt(len(pos)))
