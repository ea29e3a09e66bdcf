"""
F-measures, their asymptotic (co)variances and the paired comparison test.

For classifiers ``a`` and ``b`` scored on the same test set, the large-n
covariance of the sample F-measures is obtained by the delta method through
``kappa = 1/F - 1 = (FP + FN) / (2 TP)``::

    Cov(kappa_a, kappa_b) = [ Cov(E_a, FP_b) + Cov(E_a, FN_b)
                              - 2 k_a Cov(TP_a, E_b) - 2 k_b Cov(TP_b, E_a)
                              + 4 k_a k_b Cov(TP_a, TP_b) ] / (4 n p_a p_b)

    Cov(F_a, F_b) = F_a^2 F_b^2 Cov(kappa_a, kappa_b)

where ``E_a = FP_a + FN_a`` and ``TP_a, FP_a, FN_a`` are per-record
indicators, ``p_a = E[TP_a]``, and every population quantity is replaced
by its plug-in estimate from the joint tally.  With ``a == b`` this is the
classical single-classifier F-measure variance; ``a != b`` supplies the
between-classifier covariance that an independence assumption discards.

All heavy lifting happens on integer arrays shaped ``(..., 2, 2, 2)`` so
that the Monte-Carlo engine can evaluate thousands of tallies at once
through exactly the same code as the scalar API.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Optional, Tuple

import numpy as np

from . import tally
from .tally import JointCounts, cov, errors, false_neg, false_pos, true_pos

METHODS = ("jvesr", "independent")
DEGENERATE_TOL = 1e-15

# thresholds for SmallSampleWarning; pragmatic, not derived
MIN_TP = 5
F_LOW, F_HIGH = 0.05, 0.95


class Undefined(ArithmeticError):
    """The requested quantity has a 0/0 or x/0 form."""


class InfiniteVariance(Undefined):
    """A classifier has no true positives, so its F-measure variance diverges."""

    def __init__(self, algorithm):
        super().__init__(f"algorithm {algorithm} has TP = 0; variance is infinite")
        self.algorithm = algorithm


class DegenerateDifference(Undefined):
    """Var(F1 - F2) is zero, so the z-statistic is undefined.

    The partially filled report (``z`` and ``p_value`` set to None) is kept
    on the exception.
    """

    def __init__(self, report):
        super().__init__(f"Var(F1 - F2) = {report.var_diff!r} <= {DEGENERATE_TOL}; "
                         "z-statistic is undefined")
        self.report = report


class SmallSampleWarning(UserWarning):
    pass


# --------------------------------------------------------------------------
# scalar building blocks
# --------------------------------------------------------------------------

def f_measure(tp, fp, fn) -> float:
    if tp < 0 or fp < 0 or fn < 0:
        raise ValueError("counts must be nonnegative")
    if tp == 0 and fp == 0 and fn == 0:
        raise Undefined("F-measure is 0/0 when TP = FP = FN = 0")
    return 2 * tp / (2 * tp + fp + fn)


def kappa(tp, fp, fn) -> float:
    """``1/F - 1 = (FP + FN) / (2 TP)``."""
    if tp < 0 or fp < 0 or fn < 0:
        raise ValueError("counts must be nonnegative")
    if tp == 0:
        raise Undefined("kappa is undefined when TP = 0")
    return (fp + fn) / (2 * tp)


def normal_two_sided_p(z: float) -> float:
    """Two-sided tail probability ``2 (1 - Phi(|z|))``."""
    if not math.isfinite(z):
        raise ValueError("z must be finite")
    # erfc keeps full relative precision far into the tail
    return math.erfc(abs(z) / math.sqrt(2.0))


# --------------------------------------------------------------------------
# array core
# --------------------------------------------------------------------------

def _sum_cells(cells, g):
    prod = cells * g
    return prod.reshape(prod.shape[:-3] + (8,)).sum(axis=-1)


def _counts(cells, a):
    tp = _sum_cells(cells, true_pos(a))
    err = _sum_cells(cells, errors(a))
    return tp, err


def _kappa_cov(cells, a, b):
    # evaluate in canonical order so that (a, b) and (b, a) agree bit-for-bit
    if a > b:
        a, b = b, a
    n = _sum_cells(cells, 1)
    tp_a, err_a = _counts(cells, a)
    tp_b, err_b = _counts(cells, b)
    with np.errstate(divide="ignore", invalid="ignore"):
        k_a = err_a / (2 * tp_a)
        k_b = err_b / (2 * tp_b)
        p_a = tp_a / n
        p_b = tp_b / n
        ta, tb = true_pos(a), true_pos(b)
        ea, eb = errors(a), errors(b)
        bracket = (cov(cells, ea, false_pos(b))
                   + cov(cells, ea, false_neg(b))
                   - 2 * k_a * cov(cells, ta, eb)
                   - 2 * k_b * cov(cells, tb, ea)
                   + 4 * k_a * k_b * cov(cells, ta, tb))
        return bracket / (4 * n * p_a * p_b)


def _f_array(cells, a):
    tp, err = _counts(cells, a)
    with np.errstate(divide="ignore", invalid="ignore"):
        return 2 * tp / (2 * tp + err)


def compare_many(cells) -> dict:
    """Evaluate both classifiers on a batch of tallies.

    ``cells`` has shape ``(R, 2, 2, 2)``.  Returns arrays of length ``R``:
    ``tp1, tp2, f1, f2, var1, var2, cov12`` plus a boolean ``retained``
    mask (both TP >= 1).  Entries of excluded rows are NaN.
    """
    cells = np.asarray(cells, dtype=np.int64)
    tp1, _ = _counts(cells, 1)
    tp2, _ = _counts(cells, 2)
    retained = (tp1 >= 1) & (tp2 >= 1)
    out = {"tp1": tp1, "tp2": tp2, "retained": retained}
    f1, f2 = _f_array(cells, 1), _f_array(cells, 2)
    var1 = np.maximum((f1 * f1) * (f1 * f1) * _kappa_cov(cells, 1, 1), 0.0)
    var2 = np.maximum((f2 * f2) * (f2 * f2) * _kappa_cov(cells, 2, 2), 0.0)
    cov12 = (f1 * f1) * (f2 * f2) * _kappa_cov(cells, 1, 2)
    for key, arr in (("f1", f1), ("f2", f2), ("var1", var1),
                     ("var2", var2), ("cov12", cov12)):
        out[key] = np.where(retained, arr, np.nan)
    return out


# --------------------------------------------------------------------------
# scalar API
# --------------------------------------------------------------------------

def _require_tp(counts: JointCounts, *algorithms):
    for a in algorithms:
        if counts.confusion(a)["tp"] == 0:
            raise InfiniteVariance(a)


def kappa_cov(counts: JointCounts, a: int, b: int) -> float:
    """Asymptotic ``Cov(kappa_a, kappa_b)`` by plug-in."""
    _require_tp(counts, a, b)
    return float(_kappa_cov(counts.cells[None], a, b)[0])


def jvesr_cov(counts: JointCounts, a: int, b: int) -> float:
    """Asymptotic ``Cov(F_a, F_b)`` by plug-in.

    Raises :class:`InfiniteVariance` when either classifier has TP = 0.
    With ``a == b`` this is the variance of ``F_a`` and is clipped at 0
    against rounding.
    """
    ka = kappa_cov(counts, a, b)
    fa = float(_f_array(counts.cells[None], a)[0])
    fb = float(_f_array(counts.cells[None], b)[0])
    out = (fa * fa) * (fb * fb) * ka
    if a == b:
        out = max(out, 0.0)
    return out


@dataclass(frozen=True)
class FStats:
    f: float
    kappa: float
    var: float
    tp: int
    fp: int
    fn: int


@dataclass(frozen=True)
class ComparisonReport:
    stats1: FStats
    stats2: FStats
    cov12: float
    corr: Optional[float]
    var_diff: float
    z: Optional[float]
    p_value: Optional[float]
    method: str
    n: int
    alpha: float
    significant: Optional[bool]
    warnings: Tuple[str, ...] = field(default=())

    def to_dict(self) -> dict:
        d = asdict(self)
        d["warnings"] = list(self.warnings)
        return d


def fstats(counts: JointCounts, a: int) -> FStats:
    c = counts.confusion(a)
    _require_tp(counts, a)
    return FStats(f=f_measure(c["tp"], c["fp"], c["fn"]),
                  kappa=kappa(c["tp"], c["fp"], c["fn"]),
                  var=jvesr_cov(counts, a, a),
                  tp=c["tp"], fp=c["fp"], fn=c["fn"])


def small_sample_warnings(*stats: FStats) -> Tuple[str, ...]:
    out = []
    for a, s in enumerate(stats, start=1):
        if s.tp < MIN_TP:
            out.append(f"SmallSampleWarning: algorithm {a} has TP = {s.tp} < {MIN_TP}")
        if not F_LOW <= s.f <= F_HIGH:
            out.append(f"SmallSampleWarning: algorithm {a} has F = {s.f:.4g} "
                       f"outside [{F_LOW}, {F_HIGH}]")
    return tuple(out)


def compare(counts: JointCounts, method: str = "jvesr",
            alpha: float = 0.05) -> ComparisonReport:
    """Paired z-test of ``F_1 = F_2`` on a shared test set.

    ``method="jvesr"`` uses the plug-in cross-covariance;
    ``method="independent"`` sets it to zero, which is the baseline the
    correlated formula corrects.

    Raises :class:`InfiniteVariance` if either TP is 0 and
    :class:`DegenerateDifference` (carrying the report) if
    ``Var(F1 - F2) <= 1e-15``.
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    s1, s2 = fstats(counts, 1), fstats(counts, 2)
    if method == "jvesr":
        cov12 = jvesr_cov(counts, 1, 2)
        corr = cov12 / math.sqrt(s1.var * s2.var) if s1.var > 0 and s2.var > 0 else None
    else:
        cov12, corr = 0.0, 0.0
    var_diff = s1.var + s2.var - 2 * cov12
    report = ComparisonReport(
        stats1=s1, stats2=s2, cov12=cov12, corr=corr, var_diff=var_diff,
        z=None, p_value=None, method=method, n=counts.n, alpha=alpha,
        significant=None, warnings=small_sample_warnings(s1, s2))
    if var_diff <= DEGENERATE_TOL:
        raise DegenerateDifference(report)
    z = (s1.f - s2.f) / math.sqrt(var_diff)
    p = normal_two_sided_p(z)
    return replace(report, z=z, p_value=p, significant=p < alpha)


def compare_records(records, method: str = "jvesr", alpha: float = 0.05):
    return compare(tally.tally_from_records(records), method=method, alpha=alpha)
