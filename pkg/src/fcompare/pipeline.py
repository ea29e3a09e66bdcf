"""
End-to-end comparative experiment on tabular data.

The dataset is shuffled and split once.  A 1-nearest-neighbour rule and a
decision stump are trained on the training part and applied to the held-out
pool, giving one ``(z, l1, l2)`` record per pool row.  Test sets of size
``n`` are then drawn from the pool with replacement ``c`` times; each is
scored with both the correlated (jvesr) and the independence-baseline
variance, and the spread of the F-measures across test sets provides the
simulated reference values.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import rng
from .estimator import DEGENERATE_TOL, DegenerateDifference, InfiniteVariance, compare
from .montecarlo import NoRetainedReps, subsample_pool


class SplitError(ValueError):
    pass


class DatasetError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    feature_names: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        X = np.asarray(self.features, dtype=np.float64)
        if X.ndim == 1:
            X = X[:, None]
        y = np.asarray(self.labels)
        if X.ndim != 2 or y.ndim != 1 or len(X) != len(y):
            raise DatasetError(f"features {X.shape} and labels {y.shape} do not align")
        if not np.isin(y, (0, 1)).all():
            raise DatasetError("labels must be 0 or 1")
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y.astype(np.int64))

    def __len__(self):
        return len(self.labels)

    def take(self, idx) -> "Dataset":
        return Dataset(self.features[idx], self.labels[idx], self.feature_names)


def read_dataset_csv(path, label_col: str) -> Dataset:
    """Load a CSV with a header row, numeric features and a 0/1 label column."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = csv.reader(fh)
        header = next(rows, None)
        if not header:
            raise DatasetError("empty file")
        header = [h.strip() for h in header]
        if label_col not in header:
            raise DatasetError(f"label column {label_col!r} not found in header {header}")
        j = header.index(label_col)
        names = tuple(h for i, h in enumerate(header) if i != j)
        X, y = [], []
        for lineno, row in enumerate(rows, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DatasetError(f"line {lineno}: expected {len(header)} fields, got {len(row)}")
            lab = row[j].strip()
            if lab not in ("0", "1"):
                raise DatasetError(f"line {lineno}: label {lab!r} is not 0 or 1")
            try:
                feats = [float(v) for i, v in enumerate(row) if i != j]
            except ValueError as exc:
                raise DatasetError(f"line {lineno}: non-numeric feature ({exc})") from None
            if not all(math.isfinite(v) for v in feats):
                raise DatasetError(f"line {lineno}: non-finite feature")
            X.append(feats)
            y.append(int(lab))
    if len(y) < 2:
        raise DatasetError("dataset needs at least 2 rows")
    return Dataset(np.array(X).reshape(len(y), len(names)), np.array(y), names)


def synthetic_blobs(n_rows: int = 5000, positive_fraction: float = 0.1,
                    n_features: int = 2, separation: float = 1.5,
                    seed: int = 0) -> Dataset:
    """Two Gaussian classes with unit covariance, positives shifted by ``separation``."""
    g = rng.stream(seed, 0, "data")
    y = (g.random(n_rows) < positive_fraction).astype(np.int64)
    X = g.standard_normal((n_rows, n_features))
    X[y == 1] += separation / math.sqrt(n_features)
    return Dataset(X, y, tuple(f"x{i}" for i in range(n_features)))


def split(data: Dataset, test_fraction: float, seed: int) -> Tuple[Dataset, Dataset]:
    """Shuffle by ``seed`` and cut into ``(train, test_pool)``."""
    if not 0 < test_fraction < 1:
        raise SplitError(f"test_fraction must lie in (0, 1), got {test_fraction!r}")
    n_test = int(round(len(data) * test_fraction))
    if n_test == 0 or n_test == len(data):
        raise SplitError(f"{len(data)} rows at test_fraction={test_fraction} leave an empty part")
    perm = rng.stream(seed, 0, "split").permutation(len(data))
    test, train = data.take(perm[:n_test]), data.take(perm[n_test:])
    if len(np.unique(train.labels)) < 2:
        raise SplitError("training part does not contain both classes")
    return train, test


# --------------------------------------------------------------------------
# classifiers
# --------------------------------------------------------------------------

class NearestNeighbor:
    """Euclidean 1-NN on min-max scaled features; ties go to the lowest row index."""

    def __init__(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        self.lo = X.min(axis=0)
        span = X.max(axis=0) - self.lo
        self.span = np.where(span > 0, span, 1.0)
        self.X = self.transform(X)
        self.y = np.asarray(y)

    def transform(self, X):
        return (np.asarray(X, dtype=np.float64) - self.lo) / self.span

    def nearest(self, X, chunk=256):
        Q = self.transform(np.atleast_2d(X))
        out = np.empty(len(Q), dtype=np.int64)
        for s in range(0, len(Q), chunk):
            diff = Q[s:s + chunk, None, :] - self.X[None, :, :]
            out[s:s + chunk] = np.argmin((diff ** 2).sum(axis=2), axis=1)
        return out

    def predict(self, X):
        return self.y[self.nearest(X)]


@dataclass(frozen=True)
class DecisionStump:
    """Predict 1 when ``x[feature] > threshold`` (polarity +1) or ``<=`` (polarity -1)."""

    feature: int
    threshold: float
    polarity: int
    train_error: int

    def predict(self, X):
        x = np.atleast_2d(X)[:, self.feature]
        above = x > self.threshold
        return (above if self.polarity == 1 else ~above).astype(np.int64)


def _require_both_classes(train: Dataset):
    if len(train) == 0 or len(np.unique(train.labels)) < 2:
        raise SplitError("training data must contain both classes")


def train_1nn(train: Dataset) -> NearestNeighbor:
    _require_both_classes(train)
    return NearestNeighbor(train.features, train.labels)


def stump_candidates(x) -> np.ndarray:
    """``-inf`` followed by the midpoints between sorted unique values."""
    u = np.unique(x)
    return np.concatenate([[-np.inf], (u[:-1] + u[1:]) / 2])


def train_stump(train: Dataset) -> DecisionStump:
    """Exhaustive search over (feature, threshold, polarity).

    Ties are resolved by lowest feature, then lowest threshold, then
    polarity +1 before -1.  A ``-inf`` threshold gives the constant rules.
    """
    if len(train) == 0:
        raise SplitError("training data is empty")
    X, y = train.features, train.labels
    n, n_pos = len(y), int(y.sum())
    best = None
    for j in range(X.shape[1]):
        order = np.argsort(X[:, j], kind="stable")
        xs, ys = X[order, j], y[order]
        thr = stump_candidates(xs)
        # rows with x <= thr, counted per threshold
        k = np.searchsorted(xs, thr, side="right")
        pos_le = np.concatenate([[0], np.cumsum(ys)])[k]
        neg_gt = (n - n_pos) - (k - pos_le)
        err_plus = pos_le + neg_gt
        err = np.stack([err_plus, n - err_plus], axis=1).ravel()
        i = int(np.argmin(err))
        if best is None or err[i] < best.train_error:
            best = DecisionStump(j, float(thr[i // 2]), 1 if i % 2 == 0 else -1, int(err[i]))
    return best


# --------------------------------------------------------------------------
# harness
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MethodBlock:
    mean_f1: Optional[float]
    mean_f2: Optional[float]
    var1: Optional[float]
    var2: Optional[float]
    corr: Optional[float]
    var_diff: Optional[float]
    z: Optional[float]
    n_degenerate: int = 0


@dataclass(frozen=True)
class HarnessReport:
    seed: int
    c: int
    c_minus: int
    n: int
    test_fraction: float
    train_size: int
    pool_size: int
    pool_f1: Optional[float]
    pool_f2: Optional[float]
    simulated: MethodBlock
    jvesr: MethodBlock
    independent: MethodBlock
    warnings: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def _avg(xs) -> Optional[float]:
    xs = [x for x in xs if x is not None and math.isfinite(x)]
    return float(np.mean(xs)) if xs else None


def _evaluate(counts, method):
    try:
        return compare(counts, method=method)
    except DegenerateDifference as exc:
        return exc.report


def _one_subsample(records, n, seed, i):
    counts = subsample_pool(records, n, seed, i)
    try:
        return _evaluate(counts, "jvesr"), _evaluate(counts, "independent")
    except InfiniteVariance:
        return None


def _method_block(reports) -> MethodBlock:
    return MethodBlock(
        mean_f1=_avg(r.stats1.f for r in reports),
        mean_f2=_avg(r.stats2.f for r in reports),
        var1=_avg(r.stats1.var for r in reports),
        var2=_avg(r.stats2.var for r in reports),
        corr=_avg(r.corr for r in reports),
        var_diff=_avg(r.var_diff for r in reports),
        z=_avg(r.z for r in reports),
        n_degenerate=sum(r.z is None for r in reports))


def _simulated_block(f1, f2) -> MethodBlock:
    f1, f2 = np.asarray(f1), np.asarray(f2)
    if len(f1) < 2:
        return MethodBlock(_avg(f1), _avg(f2), None, None, None, None, None)
    v1, v2 = float(f1.var(ddof=1)), float(f2.var(ddof=1))
    c12 = float(np.cov(f1, f2)[0, 1])
    diff = f1 - f2
    vd = float(diff.var(ddof=1))
    return MethodBlock(
        mean_f1=float(f1.mean()), mean_f2=float(f2.mean()), var1=v1, var2=v2,
        corr=c12 / math.sqrt(v1 * v2) if v1 > 0 and v2 > 0 else None,
        var_diff=vd,
        z=float(diff.mean()) / math.sqrt(vd) if vd > DEGENERATE_TOL else None,
        n_degenerate=int(vd <= DEGENERATE_TOL))


def pool_records(train: Dataset, pool: Dataset) -> np.ndarray:
    """Train both rules once and label the pool: rows of ``(z, l1, l2)``."""
    nn, stump = train_1nn(train), train_stump(train)
    return np.column_stack([pool.labels, nn.predict(pool.features),
                            stump.predict(pool.features)]).astype(np.int64)


def run_harness(data: Dataset, test_fraction: float, c: int, n: int,
                seed: int, workers: int = 1) -> HarnessReport:
    """Split, train, subsample ``c`` test sets of size ``n`` and aggregate.

    Subsamples where either rule has no true positive are excluded from
    every block; ``c_minus`` counts the rest.
    """
    if c < 2:
        raise ValueError("c must be at least 2")
    if n < 1:
        raise ValueError("n must be at least 1")
    train, pool = split(data, test_fraction, seed)
    records = pool_records(train, pool)

    def task(i):
        return _one_subsample(records, n, seed, i)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(task, range(c)))
    else:
        results = [task(i) for i in range(c)]
    kept = [r for r in results if r is not None]
    if not kept:
        raise NoRetainedReps("every subsample had TP = 0 for some classifier")
    jv = [r[0] for r in kept]
    ind = [r[1] for r in kept]

    def pool_f(a):
        z, l = records[:, 0], records[:, a]
        tp = int((z & l).sum())
        denom = 2 * tp + int((z ^ l).sum())
        return 2 * tp / denom if denom else None

    flagged = sum(bool(r.warnings) for r in jv)
    return HarnessReport(
        seed=seed, c=c, c_minus=len(kept), n=n, test_fraction=test_fraction,
        train_size=len(train), pool_size=len(pool),
        pool_f1=pool_f(1), pool_f2=pool_f(2),
        simulated=_simulated_block([r.stats1.f for r in jv], [r.stats2.f for r in jv]),
        jvesr=_method_block(jv), independent=_method_block(ind),
        warnings=[f"SmallSampleWarning in {flagged} of {len(kept)} retained subsamples"]
        if flagged else [])
