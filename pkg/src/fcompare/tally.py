"""
Joint contingency tally over (Z, L1, L2) and exact moment evaluation.

Every record is a triple ``(z, l1, l2)`` of bits: the true label and the
predictions of two classifiers.  The 8-cell table of counts is a sufficient
statistic for all F-measure moments used in this package, so estimators
consume :class:`JointCounts` and never iterate over raw records.

Cell-functions are 2x2x2 float arrays indexed ``[z, l1, l2]``.  Moments use
the population (divide-by-n) convention.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple, Union

import numpy as np

Record = Tuple[int, int, int]
PairedLabels = Sequence[Record]

HEADER = ("z", "l1", "l2")

_Z, _L1, _L2 = np.meshgrid([0, 1], [0, 1], [0, 1], indexing="ij")


class TallyError(ValueError):
    """Base class for input errors raised while building a tally."""


class EmptyInput(TallyError):
    pass


class BadValue(TallyError):
    pass


class MissingHeader(TallyError):
    pass


class ParseError(TallyError):
    def __init__(self, line, message):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True, eq=False)
class JointCounts:
    """Immutable 2x2x2 tally ``cells[z, l1, l2]``."""

    cells: np.ndarray

    def __post_init__(self):
        cells = np.array(self.cells, dtype=np.int64).reshape(2, 2, 2)
        if (cells < 0).any():
            raise BadValue("cell counts must be nonnegative")
        if cells.sum() < 1:
            raise EmptyInput("tally must contain at least one record")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)

    @property
    def n(self) -> int:
        return int(self.cells.sum())

    def __eq__(self, other):
        if not isinstance(other, JointCounts):
            return NotImplemented
        return bool(np.array_equal(self.cells, other.cells))

    def __hash__(self):
        return hash(self.cells.tobytes())

    def __add__(self, other: "JointCounts") -> "JointCounts":
        return JointCounts(self.cells + other.cells)

    def scaled(self, m: int) -> "JointCounts":
        """Replicate every record ``m`` times."""
        return JointCounts(self.cells * int(m))

    def swapped(self) -> "JointCounts":
        """Exchange the roles of the two classifiers."""
        return JointCounts(self.cells.transpose(0, 2, 1))

    def confusion(self, a: int) -> dict:
        """TP/FP/FN/TN for classifier ``a`` (1 or 2)."""
        if a not in (1, 2):
            raise ValueError(f"algorithm index must be 1 or 2, got {a!r}")
        c = self.cells.sum(axis=3 - a)  # marginalize the other classifier
        return {"tp": int(c[1, 1]), "fp": int(c[0, 1]),
                "fn": int(c[1, 0]), "tn": int(c[0, 0])}

    def as_dict(self) -> dict:
        return {f"{z}{a}{b}": int(self.cells[z, a, b])
                for z in (0, 1) for a in (0, 1) for b in (0, 1)}

    @classmethod
    def from_dict(cls, d: dict) -> "JointCounts":
        cells = np.zeros((2, 2, 2), dtype=np.int64)
        for key, v in d.items():
            z, a, b = (int(ch) for ch in key)
            cells[z, a, b] = v
        return cls(cells)


def _validate(records: Iterable) -> np.ndarray:
    arr = np.asarray(list(records) if not isinstance(records, np.ndarray) else records)
    if arr.size == 0:
        raise EmptyInput("no records")
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise BadValue(f"records must be (z, l1, l2) triples, got shape {arr.shape}")
    if not np.isin(arr, (0, 1)).all():
        raise BadValue("every field must be exactly 0 or 1")
    return arr.astype(np.int64)


def tally_from_records(records: PairedLabels) -> JointCounts:
    """Count records into the 8 cells."""
    arr = _validate(records)
    flat = arr[:, 0] * 4 + arr[:, 1] * 2 + arr[:, 2]
    return JointCounts(np.bincount(flat, minlength=8))


def read_csv(path: Union[str, os.PathLike, io.TextIOBase]) -> np.ndarray:
    """Read a ``z,l1,l2`` file into an ``(N, 3)`` integer array.

    The header is matched case-insensitively and extra columns are rejected.
    Line numbers in errors are 1-based and count the header as line 1.
    """
    if hasattr(path, "read"):
        text = path.read()
    else:
        with open(path, newline="", encoding="utf-8") as fh:
            text = fh.read()
    rows = csv.reader(io.StringIO(text, newline=""))
    header = next(rows, None)
    if header is None or tuple(h.strip().lower() for h in header) != HEADER:
        raise MissingHeader(f"expected header 'z,l1,l2', got {header!r}")
    out = []
    for lineno, row in enumerate(rows, start=2):
        if not row:
            continue
        if len(row) != 3:
            raise ParseError(lineno, f"expected 3 fields, got {len(row)}")
        rec = []
        for tok in row:
            tok = tok.strip()
            if tok not in ("0", "1"):
                raise ParseError(lineno, f"non-binary token {tok!r}")
            rec.append(int(tok))
        out.append(rec)
    if not out:
        raise EmptyInput("file has a header but no records")
    return np.array(out, dtype=np.int64)


def write_csv(records: PairedLabels, path) -> None:
    arr = _validate(records)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(HEADER) + "\n")
        for z, a, b in arr:
            fh.write(f"{z},{a},{b}\n")


# --------------------------------------------------------------------------
# cell-functions and moments
# --------------------------------------------------------------------------

def cellfn(f) -> np.ndarray:
    """Tabulate ``f(z, l1, l2)`` into an 8-entry lookup table."""
    return np.asarray(f(_Z, _L1, _L2), dtype=np.float64) * np.ones((2, 2, 2))


ONE = cellfn(lambda z, l1, l2: 1)
Z = cellfn(lambda z, l1, l2: z)


def pred(a: int) -> np.ndarray:
    return (_L1 if a == 1 else _L2).astype(np.float64)


def true_pos(a: int) -> np.ndarray:
    """Indicator Z * L_a."""
    return Z * pred(a)


def false_pos(a: int) -> np.ndarray:
    """Indicator L_a * (1 - Z)."""
    return pred(a) * (1 - Z)


def false_neg(a: int) -> np.ndarray:
    """Indicator Z * (1 - L_a)."""
    return Z * (1 - pred(a))


def errors(a: int) -> np.ndarray:
    """Indicator of a misclassification by classifier ``a``."""
    return false_pos(a) + false_neg(a)


def _cells(counts) -> np.ndarray:
    return counts.cells if isinstance(counts, JointCounts) else np.asarray(counts)


def mean(counts, g: np.ndarray) -> np.ndarray:
    """Empirical mean ``sum(count * g) / n``.

    ``counts`` may be a :class:`JointCounts` or an integer array of shape
    ``(..., 2, 2, 2)``; leading axes are treated as a batch.
    """
    c = _cells(counts)
    flat = c.shape[:-3] + (8,)
    n = c.reshape(flat).sum(axis=-1)
    return (c * g).reshape(flat).sum(axis=-1) / n


def cov(counts, g: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Plug-in covariance ``E_n(gh) - E_n(g) E_n(h)``."""
    return mean(counts, g * h) - mean(counts, g) * mean(counts, h)
