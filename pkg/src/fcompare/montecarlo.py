"""
Monte-Carlo validation of the analytic F-measure covariance.

Test sets of size ``n`` are drawn i.i.d. from a joint pmf over
``(z, l1, l2)``.  For each draw both F-measures and their plug-in
(co)variances are computed; the empirical spread of the F-measures across
draws is the "simulated" ground truth that the averaged analytic values are
checked against.  Draws where either classifier has no true positive are
excluded, as their analytic variance is infinite.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from . import rng
from .estimator import DEGENERATE_TOL, compare_many
from .tally import JointCounts

PMF_SUM_TOL = 1e-9
_KEYS = [f"{z}{a}{b}" for z in (0, 1) for a in (0, 1) for b in (0, 1)]


class PmfError(ValueError):
    pass


class NoRetainedReps(RuntimeError):
    """Every replicate had TP = 0 for at least one classifier."""


@dataclass(frozen=True, eq=False)
class JointPmf:
    p: np.ndarray

    def __post_init__(self):
        p = np.array(self.p, dtype=np.float64).reshape(2, 2, 2)
        if not np.isfinite(p).all() or (p < 0).any():
            raise PmfError("probabilities must be finite and nonnegative")
        total = p.sum()
        if abs(total - 1.0) > PMF_SUM_TOL:
            raise PmfError(f"probabilities sum to {total!r}, not 1 (tolerance {PMF_SUM_TOL})")
        p = p / total
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @classmethod
    def from_dict(cls, d: dict) -> "JointPmf":
        unknown = set(d) - set(_KEYS)
        if unknown:
            raise PmfError(f"unknown pmf keys {sorted(unknown)}; expected '000'..'111'")
        missing = set(_KEYS) - set(d)
        if missing:
            raise PmfError(f"missing pmf keys {sorted(missing)}")
        try:
            vals = [float(d[k]) for k in _KEYS]
        except (TypeError, ValueError) as exc:
            raise PmfError(f"non-numeric probability: {exc}") from None
        return cls(np.array(vals))

    @classmethod
    def load(cls, path) -> "JointPmf":
        with open(path, encoding="utf-8") as fh:
            try:
                d = json.load(fh)
            except json.JSONDecodeError as exc:
                raise PmfError(f"invalid JSON: {exc}") from None
        if not isinstance(d, dict):
            raise PmfError("pmf file must hold a JSON object")
        return cls.from_dict(d)

    @classmethod
    def from_rates(cls, prevalence, tpr, fpr, pos_coupling=0.0,
                   neg_coupling=0.0) -> "JointPmf":
        """Build a pmf from class prevalence and per-classifier rates.

        ``tpr`` and ``fpr`` are ``(rate1, rate2)`` pairs.  Within each class
        the two predictions are coupled by a number in ``[-1, 1]``: 0 is
        conditional independence, +1 the maximal agreement allowed by the
        marginals, -1 the maximal disagreement.
        """
        def joint(m1, m2, k):
            lo, hi, ind = max(0.0, m1 + m2 - 1), min(m1, m2), m1 * m2
            p11 = ind + k * ((hi - ind) if k > 0 else (ind - lo))
            return np.array([[1 - m1 - m2 + p11, m2 - p11], [m1 - p11, p11]])

        if not 0 < prevalence < 1:
            raise PmfError("prevalence must lie in (0, 1)")
        for k in (pos_coupling, neg_coupling):
            if not -1 <= k <= 1:
                raise PmfError("coupling must lie in [-1, 1]")
        p = np.empty((2, 2, 2))
        p[1] = prevalence * joint(*tpr, pos_coupling)
        p[0] = (1 - prevalence) * joint(*fpr, neg_coupling)
        return cls(np.clip(p, 0.0, None))

    def as_dict(self) -> dict:
        return {k: float(v) for k, v in zip(_KEYS, self.p.ravel())}

    def marginal_tp(self, a: int) -> float:
        """P(Z = 1, L_a = 1)."""
        return float(self.p[1].sum(axis=2 - a)[1])


def sample_test_set(pmf: JointPmf, n: int, seed: int, index: int = 0) -> JointCounts:
    """One multinomial(n, pmf) tally from replicate stream ``index``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    g = rng.stream(seed, index, "validation")
    return JointCounts(g.multinomial(n, pmf.p.ravel()).reshape(2, 2, 2))


def sample_many(pmf: JointPmf, n: int, seed: int, start: int, stop: int) -> np.ndarray:
    """Tallies for replicates ``start..stop-1`` as an ``(R, 2, 2, 2)`` array."""
    p = pmf.p.ravel()
    out = np.empty((stop - start, 8), dtype=np.int64)
    for i, r in enumerate(range(start, stop)):
        out[i] = rng.stream(seed, r, "validation").multinomial(n, p)
    return out.reshape(-1, 2, 2, 2)


def subsample_pool(pool, n: int, seed: int, index: int = 0) -> JointCounts:
    """Draw ``n`` records uniformly with replacement from ``pool`` and tally them."""
    pool = np.asarray(pool)
    if pool.ndim != 2 or len(pool) == 0:
        raise ValueError("pool must be a non-empty (N, 3) array of records")
    if n < 1:
        raise ValueError("n must be at least 1")
    g = rng.stream(seed, index, "subsample")
    idx = g.integers(0, len(pool), size=n)
    flat = pool[idx, 0] * 4 + pool[idx, 1] * 2 + pool[idx, 2]
    return JointCounts(np.bincount(flat, minlength=8))


@dataclass(frozen=True)
class SimResult:
    seed: int
    n: int
    reps_total: int
    reps_retained: int
    mean_f1: float
    mean_f2: float
    emp_var1: float
    emp_var2: float
    emp_cov: float
    emp_corr: Optional[float]
    emp_var_diff: float
    emp_z: Optional[float]
    mean_analytic_var1: float
    mean_analytic_var2: float
    mean_analytic_cov: float
    mean_analytic_corr: Optional[float]
    mean_analytic_var_diff: float
    mean_independent_var_diff: float
    mean_z_analytic: Optional[float]
    mean_z_independent: Optional[float]
    # standard errors of the empirical moments and of the analytic averages
    se_emp_var1: float
    se_emp_var2: float
    se_emp_cov: float
    se_analytic_var1: float
    se_analytic_var2: float
    se_analytic_cov: float

    def to_dict(self) -> dict:
        return asdict(self)


def _finite_or_none(x) -> Optional[float]:
    x = float(x)
    return x if math.isfinite(x) else None


def _se_variance(d):
    # large-sample standard error of the unbiased sample variance
    r = len(d)
    s2 = (d ** 2).sum() / (r - 1)
    m4 = (d ** 4).mean()
    return math.sqrt(max(m4 - s2 ** 2 * (r - 3) / (r - 1), 0.0) / r)


def _se_mean(x):
    return float(x.std(ddof=1) / math.sqrt(len(x))) if len(x) > 1 else 0.0


def _mean_defined(x):
    x = x[np.isfinite(x)]
    return float(x.mean()) if len(x) else None


def summarize(batch: dict, seed: int, n: int) -> SimResult:
    """Reduce per-draw estimator outputs (from :func:`compare_many`) to a SimResult."""
    keep = batch["retained"]
    r = int(keep.sum())
    if r == 0:
        raise NoRetainedReps("every draw had TP = 0 for some classifier")
    f1, f2 = batch["f1"][keep], batch["f2"][keep]
    v1, v2, c12 = batch["var1"][keep], batch["var2"][keep], batch["cov12"][keep]
    if r < 2:
        raise NoRetainedReps("fewer than 2 retained draws; empirical moments undefined")

    d1, d2 = f1 - f1.mean(), f2 - f2.mean()
    emp_var1 = float((d1 ** 2).sum() / (r - 1))
    emp_var2 = float((d2 ** 2).sum() / (r - 1))
    emp_cov = float((d1 * d2).sum() / (r - 1))
    emp_corr = (emp_cov / math.sqrt(emp_var1 * emp_var2)
                if emp_var1 > 0 and emp_var2 > 0 else None)
    diff = f1 - f2
    emp_var_diff = float(diff.var(ddof=1))
    emp_z = (float(diff.mean()) / math.sqrt(emp_var_diff)
             if emp_var_diff > DEGENERATE_TOL else None)

    vd = v1 + v2 - 2 * c12
    vd_ind = v1 + v2
    with np.errstate(divide="ignore", invalid="ignore"):
        corr = np.where((v1 > 0) & (v2 > 0), c12 / np.sqrt(v1 * v2), np.nan)
        z = np.where(vd > DEGENERATE_TOL, diff / np.sqrt(vd), np.nan)
        z_ind = np.where(vd_ind > DEGENERATE_TOL, diff / np.sqrt(vd_ind), np.nan)

    return SimResult(
        seed=seed, n=n, reps_total=int(len(keep)), reps_retained=r,
        mean_f1=float(f1.mean()), mean_f2=float(f2.mean()),
        emp_var1=emp_var1, emp_var2=emp_var2, emp_cov=emp_cov, emp_corr=emp_corr,
        emp_var_diff=emp_var_diff, emp_z=emp_z,
        mean_analytic_var1=float(v1.mean()), mean_analytic_var2=float(v2.mean()),
        mean_analytic_cov=float(c12.mean()),
        mean_analytic_corr=_mean_defined(corr),
        mean_analytic_var_diff=float(vd.mean()),
        mean_independent_var_diff=float(vd_ind.mean()),
        mean_z_analytic=_mean_defined(z),
        mean_z_independent=_mean_defined(z_ind),
        se_emp_var1=_se_variance(d1), se_emp_var2=_se_variance(d2),
        se_emp_cov=_se_mean(d1 * d2),
        se_analytic_var1=_se_mean(v1), se_analytic_var2=_se_mean(v2),
        se_analytic_cov=_se_mean(c12),
    )


def _chunks(total, workers):
    size = max(1, math.ceil(total / max(workers, 1)))
    return [(s, min(s + size, total)) for s in range(0, total, size)]


def run_validation(pmf: JointPmf, n: int, reps: int, seed: int,
                   workers: int = 1) -> SimResult:
    """Draw ``reps`` test sets of size ``n`` and compare analytic vs. empirical moments.

    The result depends only on ``(pmf, n, reps, seed)``; ``workers`` only
    changes how replicates are distributed over threads.
    """
    if reps < 2:
        raise ValueError("reps must be at least 2")
    if n < 1:
        raise ValueError("n must be at least 1")
    spans = _chunks(reps, workers)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(lambda s: sample_many(pmf, n, seed, *s), spans))
    else:
        parts = [sample_many(pmf, n, seed, *s) for s in spans]
    cells = np.concatenate(parts)
    return summarize(compare_many(cells), seed, n)
