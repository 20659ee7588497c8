"""Fisher information of the linear-Gaussian library regression and its spectrum.

For ``y = A xi + eps`` with ``eps ~ N(0, sigma^2 I)`` the information matrix
is ``A^T A / sigma^2``. Everything here works from that matrix: eigen
decomposition, scalar summaries, sliding-window scans along a trajectory,
aggregation over trajectories and bootstrap diagnostics.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._validation import as_matrix, as_vector, check_int, check_positive
from .exceptions import SingularSystemError, UnboundedAxisError
from .features import DesignMatrix

CLAMP_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Fim:
    matrix: np.ndarray
    sigma: float = 1.0
    rows_used: int = 0

    @property
    def q(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class FimSpectrum:
    """Eigenvalues in descending order and matching orthonormal eigenvectors (columns)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


@dataclass(frozen=True)
class InfoMetrics:
    lambda_max: float
    trace: float
    log_det: float
    lambda_min: float
    condition_number: float
    spectral_skewness: float
    effective_rank: float
    effective_dim: float
    spectral_gap: float

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True, eq=False)
class BlockScan:
    block_size: int
    stride: int
    scores: list
    block_start_times: np.ndarray
    block_starts: np.ndarray
    info_scores: np.ndarray

    def __len__(self):
        return len(self.scores)

    def column(self, name) -> np.ndarray:
        return np.array([getattr(s, name) for s in self.scores])

    def to_csv(self, path):
        header = ["block_start_time", "lambda_max", "trace", "log_det", "lambda_min", "kappa",
                  "skewness", "r_eff", "d_eff", "gap", "score"]
        with Path(path).open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for t, s, sc in zip(self.block_start_times, self.scores, self.info_scores):
                row = [t, s.lambda_max, s.trace, s.log_det, s.lambda_min, s.condition_number,
                       s.spectral_skewness, s.effective_rank, s.effective_dim, s.spectral_gap, sc]
                writer.writerow([f"{v:.17g}" for v in row])


def _values(A):
    return A.values if isinstance(A, DesignMatrix) else A


def compute_fim(A, sigma: float = 1.0) -> Fim:
    """``A^T A / sigma^2``, symmetrised."""
    check_positive(sigma, "sigma")
    A = as_matrix(_values(A), "A", allow_empty=True)
    M = (A.T @ A) / sigma**2
    return Fim(0.5 * (M + M.T), float(sigma), A.shape[0])


def log_likelihood(xi, A, y, sigma=1.0) -> float:
    r = A @ xi - y
    m = A.shape[0]
    return float(-0.5 * (r @ r) / sigma**2 - 0.5 * m * math.log(2 * math.pi * sigma**2))


def fim_vs_loglik_hessian(A, y, sigma: float = 1.0, seed: int = 0, rel_step: float = 1e-4) -> float:
    """Largest entrywise gap between the FIM and minus a finite-difference Hessian.

    The log-likelihood is differentiated twice with central differences at a
    random coefficient vector; step ``h_i = rel_step * max(1, |xi_i|)``.
    """
    A = as_matrix(_values(A), "A")
    y = np.asarray(y, dtype=float).reshape(-1)
    q = A.shape[1]
    xi = np.random.default_rng(seed).normal(size=q)
    h = rel_step * np.maximum(1.0, np.abs(xi))
    H = np.empty((q, q))
    for i in range(q):
        for j in range(i, q):
            ei = np.zeros(q)
            ej = np.zeros(q)
            ei[i] = h[i]
            ej[j] = h[j]
            val = (log_likelihood(xi + ei + ej, A, y, sigma) - log_likelihood(xi + ei - ej, A, y, sigma)
                   - log_likelihood(xi - ei + ej, A, y, sigma) + log_likelihood(xi - ei - ej, A, y, sigma))
            H[i, j] = H[j, i] = val / (4 * h[i] * h[j])
    info = compute_fim(A, sigma).matrix
    return float(np.max(np.abs(info + H)))


def _sign_fix(V):
    V = V.copy()
    for k in range(V.shape[1]):
        col = V[:, k]
        nz = np.flatnonzero(np.abs(col) > 1e-12 * max(1.0, np.abs(col).max()))
        if nz.size and col[nz[0]] < 0:
            V[:, k] = -col
    return V


def spectrum(fim) -> FimSpectrum:
    """Symmetric eigendecomposition, descending, with round-off negatives clamped to zero.

    Each eigenvector is oriented so that its first nonzero entry is positive.
    """
    M = fim.matrix if isinstance(fim, Fim) else np.asarray(fim, dtype=float)
    w, V = np.linalg.eigh(0.5 * (M + M.T))
    order = np.argsort(w)[::-1]
    w, V = w[order], V[:, order]
    top = max(w[0], 0.0) if w.size else 0.0
    w = np.where((w < 0) & (w >= -CLAMP_TOL * top), 0.0, w)
    if np.any(w < 0):
        w = np.where(w < 0, 0.0, w)
    return FimSpectrum(w, _sign_fix(V))


def _eigs(spec):
    if isinstance(spec, FimSpectrum):
        return spec.eigenvalues
    if isinstance(spec, Fim):
        return spectrum(spec).eigenvalues
    return np.sort(np.asarray(spec, dtype=float))[::-1]


def metrics(spec) -> InfoMetrics:
    """All scalar spectral summaries of one information matrix.

    Conventions: log_det is -inf and the condition number +inf when the
    smallest eigenvalue is zero; skewness is 0 for a flat spectrum; an
    all-zero spectrum has effective rank and dimension 1.
    """
    lam = _eigs(spec)
    if lam.size == 0:
        raise ValueError("empty spectrum")
    if np.any(lam < 0):
        raise ValueError("eigenvalues must be nonnegative")
    q = lam.size
    lmax, lmin = float(lam[0]), float(lam[-1])
    trace = float(lam.sum())
    log_det = float(np.sum(np.log(lam))) if lmin > 0 else -math.inf
    kappa = lmax / lmin if lmin > 0 else math.inf
    if lmax == 0:
        kappa = math.inf
    # skewness is scale free, so work on lam / lmax to avoid under/overflow
    centered = (lam - lam.mean()) / lmax if lmax > 0 else np.zeros_like(lam)
    m2 = float(np.mean(centered**2))
    m3 = float(np.mean(centered**3))
    skew = m3 / m2**1.5 if m2 > 1e-28 else 0.0
    if trace > 0:
        p = lam / trace
        nz = p[p > 0]
        r_eff = float(math.exp(-np.sum(nz * np.log(nz))))
        d_eff = float(np.sum(p) ** 2 / np.sum(p**2))
    else:
        r_eff = d_eff = 1.0
    r_eff = min(max(r_eff, 1.0), float(q))
    d_eff = min(max(d_eff, 1.0), float(q))
    return InfoMetrics(lmax, trace, log_det, lmin, kappa, skew, r_eff, d_eff, lmax - lmin)


def directional_information(fim, u) -> float:
    """Rayleigh quotient ``u^T I u`` for a unit vector ``u``."""
    M = fim.matrix if isinstance(fim, Fim) else np.asarray(fim, dtype=float)
    u = as_vector(u, "u", length=M.shape[0])
    if abs(np.linalg.norm(u) - 1.0) > 1e-8:
        raise ValueError("u must have unit norm")
    return float(u @ M @ u)


def aggregate(fims) -> Fim:
    """Sum of per-trajectory information matrices (same size and sigma)."""
    fims = list(fims)
    if not fims:
        raise ValueError("nothing to aggregate")
    q, sigma = fims[0].q, fims[0].sigma
    for f in fims[1:]:
        if f.q != q:
            raise ValueError(f"dimension mismatch: {f.q} vs {q}")
        if not math.isclose(f.sigma, sigma, rel_tol=1e-12):
            raise ValueError(f"sigma mismatch: {f.sigma} vs {sigma}")
    total = np.sum([f.matrix for f in fims], axis=0)
    return Fim(total, sigma, sum(f.rows_used for f in fims))


SCORE_MODES = ("LambdaMax", "Skew", "Combined")


def _mode(mode):
    key = str(mode).lower().replace("_", "")
    for m in SCORE_MODES:
        if m.lower() == key:
            return m
    raise ValueError(f"unknown score mode {mode!r}; expected one of {SCORE_MODES}")


def information_score(m: InfoMetrics, mode="Combined", weight: float = 1.0) -> float:
    """Scalar "higher is more informative" score.

    LambdaMax: log10(lambda_max); Skew: -skewness; Combined:
    log10(lambda_max) - weight * skewness. Zero lambda_max gives -inf.
    """
    mode = _mode(mode)
    if mode == "Skew":
        return -m.spectral_skewness
    if m.lambda_max <= 0:
        return -math.inf
    base = math.log10(m.lambda_max)
    if mode == "LambdaMax":
        return base
    return base - weight * m.spectral_skewness


def block_scan(A, sigma: float = 1.0, block_size: int = 20, stride: int = 1, times=None,
               score_mode="Combined", weight: float = 1.0) -> BlockScan:
    """Spectral metrics of every window ``[i, i + block_size)`` stepping by ``stride``."""
    values = as_matrix(_values(A), "A")
    check_int(block_size, "block_size", minimum=1)
    check_int(stride, "stride", minimum=1)
    m = values.shape[0]
    if block_size > m:
        raise ValueError(f"block_size {block_size} exceeds {m} rows")
    starts = np.arange(0, m - block_size + 1, stride)
    # windows has shape (n_blocks, q, block_size); batched Gram products
    windows = np.lib.stride_tricks.sliding_window_view(values, block_size, axis=0)[starts]
    grams = windows @ np.transpose(windows, (0, 2, 1)) / sigma**2
    grams = 0.5 * (grams + np.transpose(grams, (0, 2, 1)))
    eig = np.linalg.eigvalsh(grams)[:, ::-1]
    scores, info = [], []
    for w in eig:
        top = max(w[0], 0.0)
        w = np.where(w < 0, 0.0, w) if np.all(w >= -CLAMP_TOL * top) else np.maximum(w, 0.0)
        met = metrics(FimSpectrum(w, np.eye(w.size)))
        scores.append(met)
        info.append(information_score(met, score_mode, weight))
    t = np.asarray(times, dtype=float)[starts] if times is not None else starts.astype(float)
    return BlockScan(block_size, stride, scores, t, starts, np.array(info))


def confidence_ellipsoid_axes(spec, chi2_crit: float) -> np.ndarray:
    """Semi-axis lengths sqrt(chi2_crit / lambda_k), in the spectrum's (descending) order."""
    check_positive(chi2_crit, "chi2_crit")
    lam = _eigs(spec)
    if np.any(lam <= 0):
        raise UnboundedAxisError("zero eigenvalue gives an unbounded confidence axis")
    return np.sqrt(chi2_crit / lam)


def estimate_sigma(A, y, xi) -> float:
    """Residual-based noise estimate sqrt(||y - A xi||^2 / (m - q))."""
    A = as_matrix(_values(A), "A")
    y = np.asarray(y, dtype=float).reshape(-1)
    m, q = A.shape
    if m <= q:
        raise ValueError("need more rows than columns to estimate sigma")
    r = y - A @ np.asarray(xi, dtype=float).reshape(-1)
    return float(math.sqrt((r @ r) / (m - q)))


def cramer_rao_check(A, sigma: float = 1.0, n_reps: int = 2000, seed: int = 0, xi_true=None) -> np.ndarray:
    """Monte-Carlo variance of OLS estimates projected on each eigenvector, times lambda_k.

    Ordinary least squares attains the bound in this model, so every ratio
    should be close to 1. Ratios are ordered like the eigenvalues (descending).
    """
    A = as_matrix(_values(A), "A")
    check_positive(sigma, "sigma")
    check_int(n_reps, "n_reps", minimum=2)
    m, q = A.shape
    if np.linalg.matrix_rank(A) < q:
        raise SingularSystemError("design matrix is rank deficient")
    rng = np.random.default_rng(seed)
    xi = rng.normal(size=q) if xi_true is None else np.asarray(xi_true, dtype=float)
    eps = rng.normal(0.0, sigma, size=(m, n_reps))
    Y = (A @ xi)[:, None] + eps
    est, *_ = np.linalg.lstsq(A, Y, rcond=None)
    sp = spectrum(compute_fim(A, sigma))
    proj = sp.eigenvectors.T @ est
    return proj.var(axis=1, ddof=1) * sp.eigenvalues


@dataclass(frozen=True, eq=False)
class BaggingReport:
    member_eigenvalues: np.ndarray
    mean_eigenvalues: np.ndarray
    mean_fim: Fim
    d_eff_mean_fim: float
    d_eff_members: np.ndarray
    kappa_mean_fim: float
    kappa_members: np.ndarray
    leading_angles: np.ndarray

    @property
    def mean_member_d_eff(self) -> float:
        return float(np.mean(self.d_eff_members))

    def summary(self):
        return {
            "d_eff_mean_fim": self.d_eff_mean_fim,
            "mean_member_d_eff": self.mean_member_d_eff,
            "kappa_mean_fim": self.kappa_mean_fim,
            "median_member_kappa": float(np.median(self.kappa_members)),
            "max_leading_angle_deg": float(np.degrees(self.leading_angles.max())),
            "mean_leading_angle_deg": float(np.degrees(self.leading_angles.mean())),
            "n_boot": int(self.d_eff_members.size),
        }


def bagging_spectrum_study(A, Ydot=None, sigma: float = 1.0, n_boot: int = 50, seed: int = 0) -> BaggingReport:
    """Spectra of bootstrap information matrices versus their mean.

    ``Ydot`` is accepted for symmetry with the ensemble fit (rows are resampled
    jointly there); the information matrices only depend on the library rows.
    Member ``b`` resamples with the b-th child of ``SeedSequence(seed)``.
    """
    values = as_matrix(_values(A), "A")
    check_int(n_boot, "n_boot", minimum=2)
    m = values.shape[0]
    member_fims = []
    for child in np.random.SeedSequence(seed).spawn(n_boot):
        rows = np.random.default_rng(child).integers(0, m, size=m)
        member_fims.append(compute_fim(values[rows], sigma))
    mean = Fim(np.mean([f.matrix for f in member_fims], axis=0), sigma, m)
    mean_sp = spectrum(mean)
    mem_sp = [spectrum(f) for f in member_fims]
    mem_met = [metrics(s) for s in mem_sp]
    mean_met = metrics(mean_sp)
    v1 = mean_sp.eigenvectors[:, 0]
    angles = np.array([math.acos(min(1.0, abs(float(s.eigenvectors[:, 0] @ v1)))) for s in mem_sp])
    return BaggingReport(
        np.stack([s.eigenvalues for s in mem_sp]), mean_sp.eigenvalues, mean,
        mean_met.effective_dim, np.array([mm.effective_dim for mm in mem_met]),
        mean_met.condition_number, np.array([mm.condition_number for mm in mem_met]), angles,
    )


class FisherInformation(BaseEstimator):
    """Information matrix of a design matrix, scikit-learn style.

    ``fit(A)`` stores ``fim_``, ``eigenvalues_``, ``eigenvectors_`` and
    ``metrics_``; ``score(A)`` returns the information score of ``A``.
    """

    def __init__(self, sigma=1.0, score_mode="Combined", weight=1.0):
        self.sigma = sigma
        self.score_mode = score_mode
        self.weight = weight

    def fit(self, A, y=None):
        A = check_array(_values(A))
        self.fim_ = compute_fim(A, self.sigma)
        sp = spectrum(self.fim_)
        self.eigenvalues_ = sp.eigenvalues
        self.eigenvectors_ = sp.eigenvectors
        self.metrics_ = metrics(sp)
        self.n_features_in_ = A.shape[1]
        return self

    def information_score(self):
        check_is_fitted(self, "metrics_")
        return information_score(self.metrics_, self.score_mode, self.weight)

    def score(self, A, y=None):
        return FisherInformation(self.sigma, self.score_mode, self.weight).fit(A).information_score()


class BlockScanner(TransformerMixin, BaseEstimator):
    """Sliding-window information metrics as a transformer.

    ``transform(A)`` returns one row per block with the columns of the
    block-scan CSV (minus the start time): lambda_max, trace, log_det,
    lambda_min, kappa, skewness, r_eff, d_eff, gap, score.
    """

    def __init__(self, block_size=20, stride=1, sigma=1.0, score_mode="Combined", weight=1.0):
        self.block_size = block_size
        self.stride = stride
        self.sigma = sigma
        self.score_mode = score_mode
        self.weight = weight

    def fit(self, A, y=None):
        A = check_array(_values(A))
        self.n_features_in_ = A.shape[1]
        return self

    def transform(self, A):
        check_is_fitted(self, "n_features_in_")
        scan = block_scan(check_array(_values(A)), self.sigma, self.block_size, self.stride,
                          score_mode=self.score_mode, weight=self.weight)
        self.scan_ = scan
        cols = [list(s.as_dict().values()) + [sc] for s, sc in zip(scan.scores, scan.info_scores)]
        return np.array(cols, dtype=float)
