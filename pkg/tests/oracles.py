"""Independent reference computations used only by the tests.

None of these reuse the package's moment or covariance code paths.
"""

import itertools
import math

import numpy as np

TRIPLES = list(itertools.product((0, 1), repeat=3))


def records_from_cells(cells, rng=None):
    """Expand a 2x2x2 tally into an explicit record list (optionally shuffled)."""
    recs = []
    for (z, a, b) in TRIPLES:
        recs += [(z, a, b)] * int(cells[z][a][b])
    if rng is not None:
        rng.shuffle(recs)
    return recs


def histogram(records):
    out = {t: 0 for t in TRIPLES}
    for r in records:
        out[tuple(int(v) for v in r)] += 1
    return out


def record_mean(records, f):
    total = 0.0
    for z, a, b in records:
        total += f(z, a, b)
    return total / len(records)


def record_cov(records, f, g):
    mf, mg = record_mean(records, f), record_mean(records, g)
    total = 0.0
    for z, a, b in records:
        total += (f(z, a, b) - mf) * (g(z, a, b) - mg)
    return total / len(records)


def straight_line_var(tp, fp, fn, n):
    """Single-classifier variance of F, transcribed term by term from counts."""
    t = tp / n
    e = (fp + fn) / n
    fp_, fn_ = fp / n, fn / n
    k = (fp + fn) / (2 * tp)
    cov_e_fp = fp_ - e * fp_
    cov_e_fn = fn_ - e * fn_
    cov_t_e = 0.0 - t * e
    var_t = t - t * t
    bracket = cov_e_fp + cov_e_fn - 2 * k * cov_t_e - 2 * k * cov_t_e + 4 * k * k * var_t
    f = 2 * tp / (2 * tp + fp + fn)
    return f ** 4 * bracket / (4 * n * t * t)


def _f_of_props(q, a):
    q = np.asarray(q).reshape(2, 2, 2)
    m = q.sum(axis=2) if a == 1 else q.sum(axis=1)  # [z, l_a]
    tp, fp, fn = m[1, 1], m[0, 1], m[1, 0]
    return 2 * tp / (2 * tp + fp + fn)


def delta_cov_fd(p, n, a, b, h=1e-6):
    """Multinomial delta method with central finite-difference gradients."""
    p = np.asarray(p, dtype=float).ravel()

    def grad(a):
        g = np.empty(8)
        for i in range(8):
            up, dn = p.copy(), p.copy()
            up[i] += h
            dn[i] -= h
            g[i] = (_f_of_props(up, a) - _f_of_props(dn, a)) / (2 * h)
        return g

    sigma = np.diag(p) - np.outer(p, p)
    return grad(a) @ sigma @ grad(b) / n


def brute_nearest(train_rows, query):
    best, best_d = None, math.inf
    for i, row in enumerate(train_rows):
        d = 0.0
        for x, y in zip(row, query):
            d += (x - y) ** 2
        if d < best_d:
            best, best_d = i, d
    return best


def brute_stump_error(X, y):
    """Minimum training error over every (feature, threshold, polarity)."""
    X = np.asarray(X)
    best = len(y) + 1
    for j in range(X.shape[1]):
        vals = sorted(set(X[:, j].tolist()))
        thresholds = [-math.inf] + [(u + v) / 2 for u, v in zip(vals, vals[1:])]
        for thr in thresholds:
            for pol in (1, -1):
                err = 0
                for xi, yi in zip(X[:, j], y):
                    pred = int(xi > thr) if pol == 1 else int(not xi > thr)
                    err += pred != yi
                best = min(best, err)
    return best


def random_cells(rng, size, high=40, min_tp=1):
    """Random tallies with at least ``min_tp`` true positives for both classifiers."""
    out = []
    while len(out) < size:
        c = rng.integers(0, high, size=(2, 2, 2))
        tp1 = c[1, 1, :].sum()
        tp2 = c[1, :, 1].sum()
        if tp1 >= min_tp and tp2 >= min_tp:
            out.append(c)
    return np.array(out)
