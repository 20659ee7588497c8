"""Candidate-term libraries, finite-difference derivatives and derivative diagnostics."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from itertools import combinations_with_replacement
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._validation import check_int, check_positive
from .dynamics import Trajectory


@dataclass(frozen=True)
class TermDescriptor:
    exponents: tuple
    label: str

    @property
    def degree(self) -> int:
        return int(sum(self.exponents))


@dataclass(frozen=True)
class LibraryConfig:
    degree: int = 2
    include_constant: bool = True

    def __post_init__(self):
        check_int(self.degree, "degree", minimum=1)


def _label(exponents, names):
    parts = []
    for name, e in zip(names, exponents):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts) if parts else "1"


def polynomial_terms(n_features: int, degree: int, include_constant: bool = True, names=None):
    """All monomials of total degree <= ``degree`` in graded-lexicographic order.

    Within one degree the ordering follows ``combinations_with_replacement``,
    e.g. for two variables: x0^2, x0*x1, x1^2.
    """
    names = names or [f"x{j}" for j in range(n_features)]
    terms = []
    start = 0 if include_constant else 1
    for k in range(start, degree + 1):
        for combo in combinations_with_replacement(range(n_features), k):
            exps = [0] * n_features
            for j in combo:
                exps[j] += 1
            terms.append(TermDescriptor(tuple(exps), _label(exps, names)))
    return terms


def evaluate_terms(states, terms) -> np.ndarray:
    x = np.asarray(states, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    out = np.ones((x.shape[0], len(terms)))
    for k, term in enumerate(terms):
        for j, e in enumerate(term.exponents):
            if e:
                out[:, k] *= x[:, j] ** e
    return out


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    """Library evaluated on a block of trajectory rows."""

    terms: tuple
    values: np.ndarray
    source_rows: tuple = (0, 0)

    @property
    def labels(self):
        return [t.label for t in self.terms]

    @property
    def shape(self):
        return self.values.shape

    def to_csv(self, path):
        with Path(path).open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.labels)
            for row in self.values:
                writer.writerow([f"{v:.17g}" for v in row])


@dataclass(frozen=True, eq=False)
class DerivativeMatrix:
    values: np.ndarray
    method: str = "CentralDifference"

    @property
    def shape(self):
        return self.values.shape


def _states_of(traj):
    if isinstance(traj, Trajectory):
        return traj.states
    return np.asarray(traj, dtype=float)


def build_library(traj, cfg: LibraryConfig | None = None) -> DesignMatrix:
    """Evaluate the polynomial library on every sample of ``traj``."""
    cfg = cfg or LibraryConfig()
    x = _states_of(traj)
    if x.ndim == 1:
        x = x[None, :]
    if x.shape[0] == 0:
        raise ValueError("cannot build a library from an empty trajectory")
    terms = tuple(polynomial_terms(x.shape[1], cfg.degree, cfg.include_constant))
    return DesignMatrix(terms, evaluate_terms(x, terms), (0, x.shape[0]))


def central_diff(traj) -> DerivativeMatrix:
    """Second-order finite differences on a uniform grid, same row count as the data.

    Interior rows use the centred stencil; both ends use the three-point
    one-sided stencil (-3x0 + 4x1 - x2)/(2dt) and its mirror.
    """
    if not isinstance(traj, Trajectory):
        raise TypeError("central_diff expects a Trajectory")
    if traj.m < 3:
        raise ValueError(f"need at least 3 samples for central differences, got {traj.m}")
    return DerivativeMatrix(np.gradient(traj.states, traj.dt, axis=0, edge_order=2))


def central_diff_nonuniform(times, states) -> DerivativeMatrix:
    """Centred differences on an arbitrary increasing grid.

    Interior rows use (x[i+1] - x[i-1]) / (t[i+1] - t[i-1]); the ends use the
    second-order three-point one-sided formulas for unequal spacing.
    """
    t = np.asarray(times, dtype=float)
    x = np.asarray(states, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if t.shape[0] < 3 or x.shape[0] != t.shape[0]:
        raise ValueError("need at least 3 samples with matching times")
    if np.any(np.diff(t) <= 0):
        raise ValueError("times must be strictly increasing")
    d = np.empty_like(x)
    d[1:-1] = (x[2:] - x[:-2]) / (t[2:] - t[:-2])[:, None]

    def one_sided(t0, t1, t2, x0, x1, x2):
        h1, h2 = t1 - t0, t2 - t1
        a = -(2 * h1 + h2) / (h1 * (h1 + h2))
        b = (h1 + h2) / (h1 * h2)
        c = -h1 / (h2 * (h1 + h2))
        return a * x0 + b * x1 + c * x2

    d[0] = one_sided(t[0], t[1], t[2], x[0], x[1], x[2])
    # mirror: reverse time direction, flip sign
    d[-1] = -one_sided(-t[-1], -t[-2], -t[-3], x[-1], x[-2], x[-3])
    return DerivativeMatrix(d)


def count_extremes(deriv, window=(0, 200), small_tol: float = 1e-3, large_tol: float = 1e3) -> int:
    """Number of derivative entries in ``window`` with |e| <= small_tol or |e| >= large_tol."""
    values = deriv.values if isinstance(deriv, DerivativeMatrix) else np.asarray(deriv, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    start, stop = window
    if not (0 <= start < stop <= values.shape[0]):
        raise ValueError(f"window {window} outside rows [0, {values.shape[0]})")
    check_positive(small_tol, "small_tol")
    if not large_tol > small_tol:
        raise ValueError("large_tol must exceed small_tol")
    block = np.abs(values[start:stop])
    return int(np.count_nonzero((block <= small_tol) | (block >= large_tol)))


class PolynomialLibrary(TransformerMixin, BaseEstimator):
    """Polynomial candidate library as a scikit-learn transformer.

    Parameters
    ----------
    degree : int, default=2
        Maximum total degree of the monomials.
    include_constant : bool, default=True
        Whether the first column is the constant term.
    """

    def __init__(self, degree=2, include_constant=True):
        self.degree = degree
        self.include_constant = include_constant

    def fit(self, X, y=None):
        X = check_array(X)
        LibraryConfig(self.degree, self.include_constant)
        self.n_features_in_ = X.shape[1]
        self.terms_ = tuple(polynomial_terms(X.shape[1], self.degree, self.include_constant))
        self.n_output_features_ = len(self.terms_)
        return self

    def transform(self, X):
        check_is_fitted(self, "terms_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return evaluate_terms(X, self.terms_)

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "terms_")
        if input_features is None:
            return np.array([t.label for t in self.terms_], dtype=object)
        return np.array([_label(t.exponents, list(input_features)) for t in self.terms_], dtype=object)
