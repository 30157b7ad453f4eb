"""Formant dataset handling.

Loads two-class vowel classification data from a CSV of first and
second formant frequencies, or synthesizes a stand-in when no file is
available. Splitting is an unstratified 80/20 permutation split, and
z-score normalization uses training-set statistics only.

The expected CSV format is a header line `vowel,f1,f2` followed by one
row per token, with vowel given as a short code (a, i, o, u, ...) and
formants in Hz. scripts/fetch_hillenbrand.py builds such a file from
the published vowel tables.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np

# Synthetic fallback: a mixture over three talker groups (men, women,
# children) with round per-group average formants in Hz and spreads
# proportional to the group mean. The mixture reproduces the wide,
# multi-modal within-class scatter of measured vowel corpora far better
# than a single Gaussian per class; weights mirror typical talker
# counts. Stand-in values for runs without a real file, not
# measurements.
SYNTHETIC_GROUPS = (
    (45.0, {"a": (768.0, 1333.0), "i": (342.0, 2322.0),
            "o": (497.0, 910.0), "u": (378.0, 997.0)}),
    (48.0, {"a": (936.0, 1551.0), "i": (437.0, 2761.0),
            "o": (555.0, 1035.0), "u": (459.0, 1105.0)}),
    (46.0, {"a": (1002.0, 1688.0), "i": (452.0, 3081.0),
            "o": (597.0, 1137.0), "u": (494.0, 1345.0)}),
)
# Relative within-group standard deviation for (F1, F2).
SYNTHETIC_REL_STD = (0.09, 0.06)

DEFAULT_DATA_PATH = os.path.join("data", "hillenbrand.csv")
DATA_PATH_ENV = "PHASEGRAD_DATA"


@dataclass(frozen=True, eq=False)
class Dataset:
    """Two-class formant dataset.

    features is an (n, 2) array of (F1, F2) in Hz; labels holds 0 for
    task[0] and 1 for task[1].
    """

    features: np.ndarray
    labels: np.ndarray
    task: tuple[str, str]

    def __post_init__(self) -> None:
        feats = np.asarray(self.features, dtype=np.float64)
        labs = np.asarray(self.labels, dtype=np.int64)
        if feats.ndim != 2 or feats.shape[1] != 2:
            raise ValueError("features must be an (n, 2) array")
        if labs.shape != (feats.shape[0],):
            raise ValueError("labels must align with features")
        if feats.shape[0] == 0:
            raise ValueError("empty dataset")
        if not np.all(feats > 0):
            raise ValueError("all formant values must be positive")
        if set(np.unique(labs)) != {0, 1}:
            raise ValueError("dataset must contain exactly two classes")
        if len(self.task) != 2 or self.task[0] == self.task[1]:
            raise ValueError("task must name two distinct classes")
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labs)

    def __len__(self) -> int:
        return self.features.shape[0]


@dataclass(frozen=True, eq=False)
class Split:
    """Train/test index partition with train-only z-score parameters."""

    train: np.ndarray
    test: np.ndarray
    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self) -> None:
        if np.intersect1d(self.train, self.test).size:
            raise ValueError("train and test indices overlap")
        if not np.all(self.std > 0):
            raise ValueError("zero feature variance in the training partition")

    def normalize(self, features: np.ndarray) -> np.ndarray:
        return (np.asarray(features, dtype=np.float64) - self.mean) / self.std


def load_formant_csv(path: str, task: tuple[str, str] = ("a", "i")) -> Dataset:
    """Read a `vowel,f1,f2` CSV and keep only the two requested classes."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError("empty dataset") from None
        if [col.strip().lower() for col in header[:3]] != ["vowel", "f1", "f2"]:
            raise ValueError("expected header 'vowel,f1,f2'")

        feats: list[tuple[float, float]] = []
        labels: list[int] = []
        seen: set[str] = set()
        for row_num, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) < 3:
                raise ValueError(f"row {row_num}: expected 3 columns")
            vowel = row[0].strip().lower()
            try:
                f1 = float(row[1])
                f2 = float(row[2])
            except ValueError:
                raise ValueError(f"row {row_num}: malformed formant value") from None
            if f1 <= 0 or f2 <= 0:
                raise ValueError(f"row {row_num}: formants must be positive")
            seen.add(vowel)
            if vowel == task[0]:
                feats.append((f1, f2))
                labels.append(0)
            elif vowel == task[1]:
                feats.append((f1, f2))
                labels.append(1)

    if not feats:
        raise ValueError("empty dataset")
    if len(set(labels)) < 2:
        raise ValueError(f"fewer than 2 requested classes present (found {sorted(seen)})")
    return Dataset(np.array(feats), np.array(labels), task)


def synthesize_formants(task: tuple[str, str], n_per_class: int, rng) -> Dataset:
    """Talker-group mixture clusters in (F1, F2) as a stand-in dataset.

    Each sample first draws a talker group, then its formants around
    that group's class center. Synthetic data for development and
    fallback runs; results on it are tagged as synthetic by the command
    layer.
    """
    if n_per_class < 1:
        raise ValueError("n_per_class must be at least 1")
    for cls in task:
        if cls not in SYNTHETIC_GROUPS[0][1]:
            raise ValueError(f"no synthetic center defined for class '{cls}'")

    weights = np.array([w for w, _ in SYNTHETIC_GROUPS])
    cum = np.cumsum(weights / weights.sum())
    feats = np.zeros((2 * n_per_class, 2))
    labels = np.zeros(2 * n_per_class, dtype=np.int64)
    row = 0
    for label, cls in enumerate(task):
        for _ in range(n_per_class):
            u = rng.uniform(0.0, 1.0)
            group = int(np.searchsorted(cum, u, side="left"))
            if group >= len(SYNTHETIC_GROUPS):
                group = len(SYNTHETIC_GROUPS) - 1
            c1, c2 = SYNTHETIC_GROUPS[group][1][cls]
            s1 = SYNTHETIC_REL_STD[0] * c1
            s2 = SYNTHETIC_REL_STD[1] * c2
            f1 = c1 + s1 * rng.normal()
            f2 = c2 + s2 * rng.normal()
            while f1 <= 0:
                f1 = c1 + s1 * rng.normal()
            while f2 <= 0:
                f2 = c2 + s2 * rng.normal()
            feats[row] = (f1, f2)
            labels[row] = label
            row += 1
    return Dataset(feats, labels, tuple(task))


def split_and_normalize(ds: Dataset, frac: float, rng) -> Split:
    """Unstratified permutation split plus train-only z-score parameters."""
    if not 0 < frac < 1:
        raise ValueError("frac must be in (0, 1)")
    n = len(ds)
    perm = rng.permutation(n)
    n_train = int(round(frac * n))
    if n_train < 2 or n_train >= n:
        raise ValueError("split leaves too few samples on one side")
    train = perm[:n_train]
    test = perm[n_train:]
    train_feats = ds.features[train]
    mean = train_feats.mean(axis=0)
    std = train_feats.std(axis=0)
    return Split(train, test, mean, std)


def logistic_baseline(ds: Dataset, split: Split) -> float:
    """Test accuracy of a two-feature logistic regression fit to train.

    Plain full-batch gradient descent on normalized features. On
    linearly separable data the weights grow without bound, so the loop
    is capped; the decision boundary stops moving long before the cap.
    """
    x_train = split.normalize(ds.features[split.train])
    y_train = ds.labels[split.train].astype(np.float64)
    x_test = split.normalize(ds.features[split.test])
    y_test = ds.labels[split.test]

    w = np.zeros(2)
    b = 0.0
    n = x_train.shape[0]
    for _ in range(20_000):
        z = x_train @ w + b
        p = 1.0 / (1.0 + np.exp(-z))
        err = p - y_train
        grad_w = x_train.T @ err / n
        grad_b = err.mean()
        if max(np.max(np.abs(grad_w)), abs(grad_b)) < 1e-6:
            break
        w -= 0.5 * grad_w
        b -= 0.5 * grad_b

    pred = (x_test @ w + b) > 0
    return float(np.mean(pred == y_test))


def resolve_data_path(explicit: str | None = None) -> str | None:
    """Locate the formant CSV: explicit flag, then env var, then default.

    Returns None when no candidate exists on disk, signalling the
    caller to fall back to synthetic data.
    """
    if explicit:
        if not os.path.isfile(explicit):
            raise FileNotFoundError(f"no formant CSV at {explicit}")
        return explicit
    env = os.environ.get(DATA_PATH_ENV)
    for path in (env, DEFAULT_DATA_PATH):
        if path and os.path.isfile(path):
            return path
    return None
