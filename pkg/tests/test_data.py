"""Tests for dataset loading, synthesis, splitting, and the baseline."""

import numpy as np
import pytest

from phasegrad.data import (
    Dataset,
    load_formant_csv,
    logistic_baseline,
    resolve_data_path,
    split_and_normalize,
    synthesize_formants,
)
from phasegrad.rng import Xoshiro256StarStar


def write_csv(tmp_path, rows, header="vowel,f1,f2"):
    path = tmp_path / "formants.csv"
    path.write_text(header + "\n" + "".join(r + "\n" for r in rows))
    return str(path)


def test_load_filters_to_task(tmp_path):
    path = write_csv(
        tmp_path,
        ["a,768,1333", "i,342,2322", "o,497,910", "a,750,1300", "u,378,997"],
    )
    ds = load_formant_csv(path, task=("a", "i"))
    assert len(ds) == 3
    assert ds.task == ("a", "i")
    assert list(ds.labels) == [0, 1, 0]
    assert ds.features[0, 0] == 768.0


def test_load_header_only_is_empty(tmp_path):
    path = write_csv(tmp_path, [])
    with pytest.raises(ValueError, match="empty dataset"):
        load_formant_csv(path)


def test_load_rejects_nonpositive_formant(tmp_path):
    path = write_csv(tmp_path, ["a,768,1333", "i,-5,2322"])
    with pytest.raises(ValueError, match="row 3"):
        load_formant_csv(path)


def test_load_rejects_malformed_value(tmp_path):
    path = write_csv(tmp_path, ["a,768,1333", "i,oops,2322"])
    with pytest.raises(ValueError, match="row 3"):
        load_formant_csv(path)


def test_load_rejects_bad_header(tmp_path):
    path = write_csv(tmp_path, ["a,768,1333"], header="x,y,z")
    with pytest.raises(ValueError, match="header"):
        load_formant_csv(path)


def test_load_needs_both_classes(tmp_path):
    path = write_csv(tmp_path, ["a,768,1333", "a,750,1300", "o,497,910"])
    with pytest.raises(ValueError, match="classes"):
        load_formant_csv(path, task=("a", "i"))


def test_load_missing_file():
    with pytest.raises(OSError):
        load_formant_csv("/nonexistent/formants.csv")


def test_dataset_validation():
    with pytest.raises(ValueError):
        Dataset(np.array([[100.0, 200.0]]), np.array([0]), ("a", "i"))
    with pytest.raises(ValueError):
        Dataset(
            np.array([[100.0, 200.0], [-1.0, 300.0]]),
            np.array([0, 1]),
            ("a", "i"),
        )


def test_synthesize_reproducible():
    a = synthesize_formants(("a", "i"), 50, Xoshiro256StarStar(3))
    b = synthesize_formants(("a", "i"), 50, Xoshiro256StarStar(3))
    assert np.array_equal(a.features, b.features)
    assert len(a) == 100
    assert np.all(a.features > 0)
    assert list(np.bincount(a.labels)) == [50, 50]


def test_synthesize_rejects_zero_count():
    with pytest.raises(ValueError):
        synthesize_formants(("a", "i"), 0, Xoshiro256StarStar(1))


def test_synthesize_rejects_unknown_class():
    with pytest.raises(ValueError):
        synthesize_formants(("a", "zz"), 10, Xoshiro256StarStar(1))


def test_split_sizes_and_cover():
    ds = synthesize_formants(("a", "i"), 138, Xoshiro256StarStar(11))
    split = split_and_normalize(ds, 0.8, Xoshiro256StarStar(12))
    assert len(split.train) == round(0.8 * 276)
    assert len(split.train) + len(split.test) == 276
    assert set(split.train) | set(split.test) == set(range(276))
    assert not set(split.train) & set(split.test)


def test_split_deterministic():
    ds = synthesize_formants(("a", "i"), 60, Xoshiro256StarStar(11))
    s1 = split_and_normalize(ds, 0.8, Xoshiro256StarStar(44))
    s2 = split_and_normalize(ds, 0.8, Xoshiro256StarStar(44))
    assert np.array_equal(s1.train, s2.train)
    assert np.array_equal(s1.mean, s2.mean)


def test_normalization_uses_train_statistics_only():
    ds = synthesize_formants(("a", "i"), 80, Xoshiro256StarStar(21))
    split = split_and_normalize(ds, 0.8, Xoshiro256StarStar(22))
    train_normed = split.normalize(ds.features[split.train])
    assert np.allclose(train_normed.mean(axis=0), 0.0, atol=1e-12)
    assert np.allclose(train_normed.std(axis=0), 1.0, atol=1e-12)
    test_normed = split.normalize(ds.features[split.test])
    assert np.max(np.abs(test_normed.mean(axis=0))) > 1e-6

    expected_mean = ds.features[split.train].mean(axis=0)
    assert np.array_equal(split.mean, expected_mean)


def test_unstratified_splits_fluctuate():
    # With a plain permutation split, at least one of 100 seeds puts a
    # class share in the training partition that differs from parity.
    ds = synthesize_formants(("a", "i"), 138, Xoshiro256StarStar(5))
    ds = Dataset(ds.features[:275], ds.labels[:275], ds.task)
    imbalanced = 0
    for seed in range(100):
        split = split_and_normalize(ds, 0.8, Xoshiro256StarStar(seed))
        share = ds.labels[split.train].mean()
        if abs(share - ds.labels.mean()) > 0.01:
            imbalanced += 1
    assert imbalanced >= 1


def test_logistic_separates_synthetic_a_vs_i():
    ds = synthesize_formants(("a", "i"), 138, Xoshiro256StarStar(17))
    split = split_and_normalize(ds, 0.8, Xoshiro256StarStar(18))
    assert logistic_baseline(ds, split) >= 0.99


def test_logistic_on_overlapping_classes_is_imperfect_but_useful():
    ds = synthesize_formants(("o", "u"), 138, Xoshiro256StarStar(19))
    split = split_and_normalize(ds, 0.8, Xoshiro256StarStar(20))
    acc = logistic_baseline(ds, split)
    assert 0.6 < acc < 1.0


def test_resolve_data_path(tmp_path, monkeypatch):
    monkeypatch.delenv("PHASEGRAD_DATA", raising=False)
    monkeypatch.chdir(tmp_path)
    assert resolve_data_path() is None

    csv_path = tmp_path / "x.csv"
    csv_path.write_text("vowel,f1,f2\n")
    monkeypatch.setenv("PHASEGRAD_DATA", str(csv_path))
    assert resolve_data_path() == str(csv_path)

    with pytest.raises(FileNotFoundError):
        resolve_data_path(str(tmp_path / "missing.csv"))


def test_fetch_script_parser():
    import importlib.util
    import pathlib

    script = pathlib.Path(__file__).resolve().parents[1] / "scripts" / "fetch_hillenbrand.py"
    spec = importlib.util.spec_from_file_location("fetch_hillenbrand", script)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)

    sample = "\n".join(
        [
            "some header text",
            "m01ah  240 132 660 1200 2400 100 200 300 400 500 600",
            "w10iy  210 220 310 2500 3100 100 200 300 400 500 600",
            "b05oa  200 240 500 0 2800 100 200 300 400 500 600",
            "not_a_row 1 2 3",
        ]
    )
    rows = mod.parse_vowdata(sample)
    assert ("a", 660.0, 1200.0) in rows
    assert ("i", 310.0, 2500.0) in rows
    assert all(vowel != "o" for vowel, _, _ in rows)
