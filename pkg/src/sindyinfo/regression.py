"""Sparse regression (sequentially thresholded ridge), scoring and bagging."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg
import sympy
from joblib import Parallel, delayed
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._validation import as_matrix, check_int, check_positive
from .dynamics import SystemSpec, Trajectory, rk4_integrate, vector_field
from .exceptions import EmptySupportWarning, IntegrationDivergedError, SingularSystemError
from .features import (
    DerivativeMatrix,
    DesignMatrix,
    LibraryConfig,
    central_diff,
    central_diff_nonuniform,
    evaluate_terms,
    polynomial_terms,
)

DEFAULT_ALPHA = 1e-5
DEFAULT_MAX_ITER = 20


@dataclass(frozen=True, eq=False)
class SparseModel:
    """Coefficient matrix (q x n) and its active-term mask."""

    coefficients: np.ndarray
    active: np.ndarray
    threshold: float
    ridge_alpha: float
    iterations: int
    labels: tuple = ()
    empty_support: bool = False

    def __post_init__(self):
        coef = np.asarray(self.coefficients, dtype=float)
        if coef.ndim == 1:
            coef = coef[:, None]
        active = np.asarray(self.active, dtype=bool).reshape(coef.shape)
        coef = np.where(active, coef, 0.0)
        object.__setattr__(self, "coefficients", coef)
        object.__setattr__(self, "active", active)
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def n_terms(self) -> int:
        return int(self.active.sum())

    def predict(self, A) -> np.ndarray:
        return np.asarray(A, dtype=float) @ self.coefficients

    def equations(self, precision=4, lhs=None):
        """Human-readable right-hand sides, one string per state."""
        labels = self.labels or tuple(f"t{k}" for k in range(self.coefficients.shape[0]))
        out = []
        for j in range(self.coefficients.shape[1]):
            lhs_j = lhs[j] if lhs else f"x{j}'"
            text = ""
            for k in np.flatnonzero(self.active[:, j]):
                c = self.coefficients[k, j]
                mag = f"{abs(c):.{precision}g}" if labels[k] == "1" else f"{abs(c):.{precision}g} {labels[k]}"
                if not text:
                    text = ("-" if c < 0 else "") + mag
                else:
                    text += (" - " if c < 0 else " + ") + mag
            out.append(f"{lhs_j} = " + (text or "0"))
        return out

    def to_dict(self):
        return {
            "terms": list(self.labels),
            "coefficients": [self.coefficients[:, j].tolist() for j in range(self.coefficients.shape[1])],
            "threshold": self.threshold,
            "ridge_alpha": self.ridge_alpha,
            "iterations": self.iterations,
            "empty_support": self.empty_support,
        }

    def to_json(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))

    @classmethod
    def from_dict(cls, data):
        coef = np.array(data["coefficients"], dtype=float).T
        return cls(coef, coef != 0, data["threshold"], data["ridge_alpha"], data["iterations"],
                   tuple(data.get("terms", ())), data.get("empty_support", False))


@dataclass(frozen=True)
class FitConfig:
    """Library and STRidge settings shared by the experiment drivers."""

    degree: int = 2
    threshold: float = 0.1
    alpha: float = DEFAULT_ALPHA
    max_iter: int = DEFAULT_MAX_ITER
    include_constant: bool = True

    def __post_init__(self):
        check_int(self.degree, "degree", minimum=1)
        check_positive(self.threshold, "threshold")
        check_positive(self.alpha, "alpha", strict=False)
        check_int(self.max_iter, "max_iter", minimum=1)

    def library(self):
        return LibraryConfig(self.degree, self.include_constant)


@dataclass(frozen=True, eq=False)
class GroundTruth:
    coefficients: np.ndarray
    labels: tuple = ()


@dataclass(frozen=True, eq=False)
class EnsembleModel:
    members: list
    inclusion_probability: np.ndarray
    aggregate: SparseModel
    inclusion_cut: float = 0.6


def ridge_solve(A, y, alpha: float = 0.0) -> np.ndarray:
    """Minimise ||A xi - y||^2 + alpha ||xi||^2 through the normal equations.

    The Gram matrix is Jacobi-scaled before the Cholesky factorisation; the
    scaling is undone afterwards so the solution is for the unscaled problem.
    Raises SingularSystemError when the (regularised) Gram matrix is not
    positive definite.
    """
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    if A.ndim != 2 or A.shape[0] != y.shape[0]:
        raise ValueError(f"A rows {A.shape} do not match y {y.shape}")
    check_positive(alpha, "alpha", strict=False)
    q = A.shape[1]
    if q == 0:
        return np.zeros((0,) + y.shape[1:])
    gram = A.T @ A
    rhs_vec = A.T @ y
    d = np.sqrt(np.diag(gram) + alpha)
    d[d == 0] = 1.0
    scaled = gram / np.outer(d, d)
    scaled[np.diag_indices(q)] += alpha / d**2
    try:
        factor = scipy.linalg.cho_factor(scaled, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError("normal equations are singular; use alpha > 0") from exc
    sol = scipy.linalg.cho_solve(factor, (rhs_vec.T / d).T, check_finite=False)
    sol = (sol.T / d).T
    if not np.all(np.isfinite(sol)):
        raise SingularSystemError("normal equations produced a non-finite solution")
    return sol


def stridge(A, y, threshold: float = 0.1, alpha: float = DEFAULT_ALPHA, max_iter: int = DEFAULT_MAX_ITER,
            return_path: bool = False):
    """Sequentially thresholded ridge regression for one target column.

    Each pass ridge-solves on the current support and drops terms whose
    magnitude falls below ``threshold``. Stops when nothing is dropped or
    after ``max_iter`` passes, then refits the survivors by ordinary least
    squares. If that refit is singular the last ridge solution is kept.
    """
    A = as_matrix(A.values if isinstance(A, DesignMatrix) else A, "A")
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.shape[0] != A.shape[0]:
        raise ValueError("A and y have different row counts")
    check_positive(threshold, "threshold")
    check_int(max_iter, "max_iter", minimum=1)
    q = A.shape[1]
    support = np.ones(q, dtype=bool)
    coef = np.zeros(q)
    path = [support.copy()]
    iterations = 0
    for iterations in range(1, max_iter + 1):
        coef = np.zeros(q)
        coef[support] = ridge_solve(A[:, support], y, alpha)
        small = support & (np.abs(coef) < threshold)
        if not small.any():
            break
        support = support & ~small
        coef[~support] = 0.0
        path.append(support.copy())
        if not support.any():
            break
    empty = not support.any()
    if empty:
        warnings.warn("all terms were thresholded away", EmptySupportWarning, stacklevel=2)
        coef = np.zeros(q)
    else:
        try:
            refit = np.zeros(q)
            refit[support] = ridge_solve(A[:, support], y, 0.0)
            coef = refit
        except SingularSystemError:
            coef = np.where(support, coef, 0.0)
    model = SparseModel(coef[:, None], support[:, None], threshold, alpha, iterations, empty_support=empty)
    if return_path:
        return model, path
    return model


def fit_system(A, Ydot, threshold: float = 0.1, alpha: float = DEFAULT_ALPHA,
               max_iter: int = DEFAULT_MAX_ITER) -> SparseModel:
    """Column-by-column STRidge of every derivative onto the library."""
    labels = A.labels if isinstance(A, DesignMatrix) else ()
    values = A.values if isinstance(A, DesignMatrix) else np.asarray(A, dtype=float)
    Y = Ydot.values if isinstance(Ydot, DerivativeMatrix) else np.asarray(Ydot, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    cols, masks, iters, empty = [], [], 0, False
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", EmptySupportWarning)
        for j in range(Y.shape[1]):
            single = stridge(values, Y[:, j], threshold, alpha, max_iter)
            cols.append(single.coefficients[:, 0])
            masks.append(single.active[:, 0])
            iters = max(iters, single.iterations)
            empty = empty or single.empty_support
    if caught:
        warnings.warn(f"{len(caught)} equation(s) lost every term", EmptySupportWarning, stacklevel=2)
    return SparseModel(np.column_stack(cols), np.column_stack(masks), threshold, alpha, iters, labels, empty)


def coefficient_loss(model, truth, p="L2") -> float:
    """Entrywise L1 or L2 norm of the coefficient error."""
    a = model.coefficients if hasattr(model, "coefficients") else np.asarray(model, dtype=float)
    b = truth.coefficients if hasattr(truth, "coefficients") else np.asarray(truth, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"coefficient shapes differ: {a.shape} vs {b.shape}")
    diff = (a - b).ravel()
    key = str(p).upper()
    if key == "L1":
        return float(np.abs(diff).sum())
    if key == "L2":
        return float(np.sqrt(diff @ diff))
    raise ValueError(f"p must be 'L1' or 'L2', got {p!r}")


def ground_truth(spec: SystemSpec, degree: int = 2, include_constant: bool = True) -> GroundTruth:
    """Expand the system's right-hand side in the monomial basis of the library."""
    syms = sympy.symbols(f"x0:{spec.dim}")
    terms = polynomial_terms(spec.dim, degree, include_constant)
    index = {t.exponents: k for k, t in enumerate(terms)}
    coef = np.zeros((len(terms), spec.dim))
    for j, expr in enumerate(vector_field(spec, syms)):
        poly = sympy.Poly(sympy.expand(expr), *syms)
        for monom, c in poly.terms():
            if tuple(monom) not in index:
                raise ValueError(f"library of degree {degree} cannot represent term {monom} of {spec.display_name}")
            coef[index[tuple(monom)], j] = float(c)
    return GroundTruth(coef, tuple(t.label for t in terms))


def _member_fit(values, Y, rng_seed, threshold, alpha, max_iter):
    rng = np.random.default_rng(rng_seed)
    rows = rng.integers(0, values.shape[0], size=values.shape[0])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EmptySupportWarning)
        return fit_system(values[rows], Y[rows], threshold, alpha, max_iter)


def member_seeds(seed, count):
    return np.random.SeedSequence(seed).spawn(count)


def ensemble_fit(A, Ydot, n_boot: int = 50, seed: int = 0, threshold: float = 0.1,
                 alpha: float = DEFAULT_ALPHA, max_iter: int = DEFAULT_MAX_ITER,
                 inclusion_cut: float = 0.6, n_jobs=None) -> EnsembleModel:
    """Bootstrap-aggregated STRidge.

    Rows of (library, derivative) are resampled with replacement; member
    ``b`` uses the b-th child of ``SeedSequence(seed)`` so serial and parallel
    runs agree. The aggregate keeps the entrywise median over members for
    terms selected by at least ``inclusion_cut`` of them.
    """
    check_int(n_boot, "n_boot", minimum=2)
    if not 0 < inclusion_cut <= 1:
        raise ValueError("inclusion_cut must lie in (0, 1]")
    labels = A.labels if isinstance(A, DesignMatrix) else ()
    values = A.values if isinstance(A, DesignMatrix) else np.asarray(A, dtype=float)
    Y = Ydot.values if isinstance(Ydot, DerivativeMatrix) else np.asarray(Ydot, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    seeds = member_seeds(seed, n_boot)
    args = (threshold, alpha, max_iter)
    if n_jobs in (None, 1):
        members = [_member_fit(values, Y, s, *args) for s in seeds]
    else:
        members = Parallel(n_jobs=n_jobs)(delayed(_member_fit)(values, Y, s, *args) for s in seeds)
    members = [SparseModel(m.coefficients, m.active, m.threshold, m.ridge_alpha, m.iterations, labels,
                           m.empty_support) for m in members]
    stack = np.stack([m.coefficients for m in members])
    inclusion = np.stack([m.active for m in members]).mean(axis=0)
    keep = inclusion >= inclusion_cut - 1e-12
    agg_coef = np.where(keep, np.median(stack, axis=0), 0.0)
    aggregate = SparseModel(agg_coef, keep & (agg_coef != 0), threshold, alpha,
                            max(m.iterations for m in members), labels)
    return EnsembleModel(members, inclusion, aggregate, inclusion_cut)


def _design_and_derivative(X, t, degree, include_constant):
    X = np.asarray(X, dtype=float)
    t = np.asarray(t, dtype=float)
    cfg = LibraryConfig(degree, include_constant)
    terms = tuple(polynomial_terms(X.shape[1], cfg.degree, cfg.include_constant))
    steps = np.diff(t)
    if np.allclose(steps, steps[0], rtol=1e-9, atol=0):
        deriv = central_diff(Trajectory(t, X))
    else:
        deriv = central_diff_nonuniform(t, X)
    return DesignMatrix(terms, evaluate_terms(X, terms), (0, X.shape[0])), deriv


class STRidge(RegressorMixin, BaseEstimator):
    """Sequentially thresholded ridge regression estimator.

    ``y`` may have several columns; each is fitted independently.
    """

    def __init__(self, threshold=0.1, alpha=DEFAULT_ALPHA, max_iter=DEFAULT_MAX_ITER):
        self.threshold = threshold
        self.alpha = alpha
        self.max_iter = max_iter

    def fit(self, X, y):
        X = check_array(X)
        y = np.asarray(y, dtype=float)
        self._single_output = y.ndim == 1
        self.model_ = fit_system(X, y, self.threshold, self.alpha, self.max_iter)
        self.coef_ = self.model_.coefficients.T
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X)
        pred = self.model_.predict(X)
        return pred[:, 0] if self._single_output else pred


class SINDy(BaseEstimator):
    """Polynomial-library SINDy model.

    ``fit(X, t)`` builds the library on the states ``X`` (m x n), estimates
    derivatives by finite differences on the times ``t`` (or a scalar step),
    and runs STRidge. ``predict`` returns the model's time derivatives.

    Parameters
    ----------
    degree : int, default=2
    threshold : float, default=0.1
    alpha : float, default=1e-5
        Ridge penalty used during thresholding passes.
    max_iter : int, default=20
    include_constant : bool, default=True
    """

    def __init__(self, degree=2, threshold=0.1, alpha=DEFAULT_ALPHA, max_iter=DEFAULT_MAX_ITER,
                 include_constant=True):
        self.degree = degree
        self.threshold = threshold
        self.alpha = alpha
        self.max_iter = max_iter
        self.include_constant = include_constant

    def fit(self, X, t, x_dot=None):
        X = check_array(X)
        if np.ndim(t) == 0:
            t = float(t) * np.arange(X.shape[0])
        A, deriv = _design_and_derivative(X, t, self.degree, self.include_constant)
        if x_dot is not None:
            deriv = DerivativeMatrix(check_array(x_dot))
        self.design_ = A
        self.model_ = fit_system(A, deriv, self.threshold, self.alpha, self.max_iter)
        self.coefficients_ = self.model_.coefficients
        self.n_features_in_ = X.shape[1]
        return self

    def _check(self):
        check_is_fitted(self, "model_")

    def predict(self, X):
        self._check()
        X = check_array(X)
        return evaluate_terms(X, self.design_.terms) @ self.coefficients_

    def equations(self, precision=4):
        self._check()
        return self.model_.equations(precision)

    def simulate(self, x0, t_end, dt):
        """Integrate the learned model with RK4; raises on divergence."""
        self._check()
        terms, coef = self.design_.terms, self.coefficients_
        return simulate_model(terms, coef, x0, t_end, dt)

    def loss(self, truth, p="L2"):
        self._check()
        return coefficient_loss(self.model_, truth, p)


def _model_field(terms, coef):
    def f(x):
        if x.ndim == 1:
            return evaluate_terms(x, terms)[0] @ coef
        return (evaluate_terms(x.T, terms) @ coef).T

    return f


def simulate_model_many(terms, coef, initials, t_end, dt):
    """Integrate the learned model from each row of ``initials`` at once.

    Returns ``(times, states, ok)`` with ``states`` shaped (k, m, n); runs
    that left the finite range or exceeded 1e8 in magnitude have ``ok`` False.
    """
    coef = np.asarray(coef, dtype=float)
    x0 = np.atleast_2d(np.asarray(initials, dtype=float))
    hist = rk4_integrate(_model_field(terms, coef), x0.T, t_end, dt)
    states = np.transpose(hist, (2, 0, 1))
    with np.errstate(invalid="ignore"):
        ok = np.all(np.isfinite(states) & (np.abs(states) < 1e8), axis=(1, 2))
    return dt * np.arange(hist.shape[0]), states, ok


def simulate_model(terms, coef, x0, t_end, dt):
    """RK4 trajectory of the polynomial model ``x' = Theta(x) coef``."""
    coef = np.asarray(coef, dtype=float)

    states = rk4_integrate(_model_field(terms, coef), np.asarray(x0, dtype=float), t_end, dt)
    times = dt * np.arange(states.shape[0])
    finite = np.all(np.isfinite(states), axis=1) & np.all(np.abs(states) < 1e8, axis=1)
    if not finite.all():
        bad = int(np.argmin(finite))
        raise IntegrationDivergedError("learned model diverged", float(times[bad - 1]) if bad else float("nan"))
    return times, states


class EnsembleSINDy(SINDy):
    """Bagged SINDy: bootstrap members plus a median aggregate.

    Extra parameters ``n_boot``, ``inclusion_cut``, ``random_state`` and
    ``n_jobs`` control the bootstrap. The aggregate model drives ``predict``.
    """

    def __init__(self, degree=2, threshold=0.1, alpha=DEFAULT_ALPHA, max_iter=DEFAULT_MAX_ITER,
                 include_constant=True, n_boot=50, inclusion_cut=0.6, random_state=0, n_jobs=None):
        super().__init__(degree, threshold, alpha, max_iter, include_constant)
        self.n_boot = n_boot
        self.inclusion_cut = inclusion_cut
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, X, t, x_dot=None):
        X = check_array(X)
        if np.ndim(t) == 0:
            t = float(t) * np.arange(X.shape[0])
        A, deriv = _design_and_derivative(X, t, self.degree, self.include_constant)
        if x_dot is not None:
            deriv = DerivativeMatrix(check_array(x_dot))
        self.design_ = A
        self.ensemble_ = ensemble_fit(A, deriv, self.n_boot, self.random_state, self.threshold, self.alpha,
                                      self.max_iter, self.inclusion_cut, self.n_jobs)
        self.model_ = self.ensemble_.aggregate
        self.coefficients_ = self.model_.coefficients
        self.inclusion_probability_ = self.ensemble_.inclusion_probability
        self.n_features_in_ = X.shape[1]
        return self


def conditioned_design(m: int, q: int, kappa: float, seed=0) -> np.ndarray:
    """Random m x q design whose Gram matrix has condition number ``kappa``.

    Singular values are spaced geometrically between 1 and 1/sqrt(kappa),
    then the columns are rescaled so the Gram diagonal averages to m.
    """
    check_int(q, "q", minimum=1)
    if m < q:
        raise ValueError("need m >= q")
    if kappa < 1:
        raise ValueError("kappa must be >= 1")
    rng = np.random.default_rng(seed)
    U, _ = np.linalg.qr(rng.normal(size=(m, q)))
    V, _ = np.linalg.qr(rng.normal(size=(q, q)))
    s = np.geomspace(1.0, 1.0 / np.sqrt(kappa), q)
    A = U @ np.diag(s) @ V.T
    return A * np.sqrt(m * q / np.sum(s**2))


def perturbation_ratio(A, y, dy):
    """Relative coefficient change over (kappa * relative data change) for full least squares.

    Values at or below 1 mean the perturbation bound holds.
    """
    A = as_matrix(A, "A")
    y = np.asarray(y, dtype=float).reshape(-1)
    dy = np.asarray(dy, dtype=float).reshape(-1)
    xi = ridge_solve(A, y, 0.0)
    dxi = ridge_solve(A, y + dy, 0.0) - xi
    s = np.linalg.svd(A, compute_uv=False)
    kappa = (s[0] / s[-1]) ** 2
    return float((np.linalg.norm(dxi) / np.linalg.norm(xi)) / (kappa * np.linalg.norm(dy) / np.linalg.norm(y)))


def misidentification_rate(kappa: float, n_trials: int = 200, m: int = 60, q: int = 6, n_active: int = 3,
                           noise: float = 1.0, threshold: float = 0.5, seed=0) -> float:
    """Fraction of STRidge fits whose support differs from the true one.

    Each trial draws a design with the requested Gram condition number, a
    random support with unit-magnitude random-sign coefficients and
    Gaussian noise of fixed standard deviation.
    """
    check_int(n_trials, "n_trials", minimum=1)
    wrong = 0
    for child in np.random.SeedSequence(seed).spawn(n_trials):
        rng = np.random.default_rng(child)
        A = conditioned_design(m, q, kappa, rng)
        xi = np.zeros(q)
        idx = rng.choice(q, n_active, replace=False)
        xi[idx] = rng.choice([-1.0, 1.0], n_active)
        y = A @ xi + rng.normal(0.0, noise, m)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", EmptySupportWarning)
            fit = stridge(A, y, threshold, DEFAULT_ALPHA)
        if not np.array_equal(fit.active[:, 0], xi != 0):
            wrong += 1
    return wrong / n_trials
