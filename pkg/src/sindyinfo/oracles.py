"""Slow, independent reference implementations for the test suite.

Nothing here imports from the rest of the package: loops and plain floats
instead of vectorised numpy, so agreement with the production code is a
genuine cross-check.
"""

from __future__ import annotations

import itertools
import math
import statistics
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class OracleReport:
    name: str
    max_abs_deviation: float
    instances_checked: int

    def __post_init__(self):
        if not math.isfinite(self.max_abs_deviation):
            raise ValueError("deviation must be finite")


def oracle_eig_2x2(matrix):
    """Eigenvalues (descending) and eigenvectors of a symmetric 2x2 matrix from its characteristic polynomial."""
    (a, b), (c, d) = [[float(v) for v in row] for row in matrix]
    if abs(b - c) > 1e-12 * max(1.0, abs(b), abs(c)):
        raise ValueError("matrix must be symmetric")
    tr = a + d
    det = a * d - b * c
    disc = math.sqrt(max(tr * tr / 4.0 - det, 0.0))
    l1, l2 = tr / 2.0 + disc, tr / 2.0 - disc
    vecs = []
    for lam in (l1, l2):
        if abs(b) > 1e-15:
            v = (b, lam - a)
        elif abs(a - lam) <= abs(d - lam):
            v = (1.0, 0.0)
        else:
            v = (0.0, 1.0)
        norm = math.hypot(*v)
        vecs.append((v[0] / norm, v[1] / norm))
    if l1 == l2:
        vecs = [(1.0, 0.0), (0.0, 1.0)]
    return (l1, l2), vecs


def oracle_entropy(series, m, r, include_self, relative=True):
    """Template-matching entropy by explicit double loops.

    ``include_self=True`` gives approximate entropy (self-matches counted,
    log-average of match fractions); ``False`` gives sample entropy over the
    first ``N - m`` templates of both lengths. ``r`` is multiplied by the
    population standard deviation when ``relative`` is set. Sample entropy
    without matches returns NaN.
    """
    u = [float(v) for v in series]
    n = len(u)
    if n > 500:
        raise ValueError("oracle limited to N <= 500")
    if max(u) == min(u):
        return 0.0
    tol = r * statistics.pstdev(u) if relative else r

    def close(i, j, length):
        for k in range(length):
            if abs(u[i + k] - u[j + k]) > tol:
                return False
        return True

    if include_self:
        def phi(length):
            count = n - length + 1
            total = 0.0
            for i in range(count):
                c = 0
                for j in range(count):
                    if close(i, j, length):
                        c += 1
                total += math.log(c / count)
            return total / count

        return phi(m) - phi(m + 1)

    templates = n - m
    b = a = 0
    for i in range(templates):
        for j in range(templates):
            if i == j:
                continue
            if close(i, j, m):
                b += 1
            if close(i, j, m + 1):
                a += 1
    if a == 0 or b == 0:
        return math.nan
    return -math.log(a / b)


def oracle_best_support(A, y, max_q=12):
    """Exhaustive best subset by BIC with an OLS fit per support.

    Returns the support as a sorted tuple of column indices. The empty model
    is always a candidate; a residual sum of squares at round-off level is
    floored so perfect fits still compare by size.
    """
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float).reshape(-1)
    m, q = A.shape
    if q > max_q:
        raise ValueError(f"q={q} exceeds max_q={max_q}")
    scale = max(float(np.dot(y, y)), 1.0)
    floor = 1e-24 * scale
    best, best_bic = (), math.inf
    for k in range(q + 1):
        for support in itertools.combinations(range(q), k):
            if k:
                sub = A[:, support]
                coef = np.linalg.pinv(sub) @ y
                resid = y - sub @ coef
            else:
                resid = y
            rss = max(float(np.dot(resid, resid)), floor)
            bic = m * math.log(rss / m) + k * math.log(m)
            if bic < best_bic - 1e-9:
                best, best_bic = support, bic
    return best
