"""Approximate and sample entropy of scalar series."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ._validation import check_int, check_positive
from .exceptions import UndefinedEntropyWarning


@dataclass(frozen=True)
class EntropyConfig:
    """Embedding length ``m`` and tolerance.

    ``r`` is a multiple of the series' population standard deviation unless
    ``absolute_r`` is set, in which case it is used as is.
    """

    m: int = 2
    r: float = 0.2
    absolute_r: bool = False

    def __post_init__(self):
        check_int(self.m, "m", minimum=1)
        check_positive(self.r, "r")


def _series(x, cfg):
    u = np.asarray(x, dtype=float)
    if u.ndim != 1:
        raise ValueError(f"series must be 1-D, got shape {u.shape}")
    if not np.all(np.isfinite(u)):
        raise ValueError("series contains non-finite values")
    if u.size < cfg.m + 2:
        raise ValueError(f"series of length {u.size} too short for m={cfg.m}")
    return u


def _tolerance(u, cfg):
    return cfg.r if cfg.absolute_r else cfg.r * float(np.std(u))


def _match_counts(u, length, n_templates, r):
    """For each of the first ``n_templates`` windows, how many windows lie within ``r`` (Chebyshev)."""
    w = np.lib.stride_tricks.sliding_window_view(u, length)[:n_templates]
    counts = np.empty(n_templates, dtype=np.int64)
    # chunk the pairwise comparison to bound memory on long series
    chunk = max(1, 4_000_000 // max(1, n_templates * length))
    for s in range(0, n_templates, chunk):
        d = np.max(np.abs(w[s:s + chunk, None, :] - w[None, :, :]), axis=2)
        counts[s:s + chunk] = np.count_nonzero(d <= r, axis=1)
    return counts


def apen(x, cfg: EntropyConfig | None = None) -> float:
    """Approximate entropy, self-matches included.

    A constant series returns exactly 0.
    """
    cfg = cfg or EntropyConfig()
    u = _series(x, cfg)
    if np.ptp(u) == 0:
        return 0.0
    r = _tolerance(u, cfg)
    n, m = u.size, cfg.m

    def phi(k):
        c = _match_counts(u, k, n - k + 1, r) / (n - k + 1)
        return float(np.mean(np.log(c)))

    return phi(m) - phi(m + 1)


def sampen(x, cfg: EntropyConfig | None = None) -> float:
    """Sample entropy, self-matches excluded.

    Both template lengths use the first ``N - m`` windows. Returns NaN with an
    :class:`UndefinedEntropyWarning` when no pair matches.
    """
    cfg = cfg or EntropyConfig()
    u = _series(x, cfg)
    if np.ptp(u) == 0:
        return 0.0
    r = _tolerance(u, cfg)
    n, m = u.size, cfg.m
    nt = n - m
    wm = np.lib.stride_tricks.sliding_window_view(u, m)[:nt]
    wm1 = np.lib.stride_tricks.sliding_window_view(u, m + 1)[:nt]
    b = a = 0
    chunk = max(1, 4_000_000 // max(1, nt * (m + 1)))
    for s in range(0, nt, chunk):
        dm = np.max(np.abs(wm[s:s + chunk, None, :] - wm[None, :, :]), axis=2)
        dm1 = np.max(np.abs(wm1[s:s + chunk, None, :] - wm1[None, :, :]), axis=2)
        b += int(np.count_nonzero(dm <= r))
        a += int(np.count_nonzero(dm1 <= r))
    # drop the diagonal self-comparisons
    b -= nt
    a -= nt
    if a == 0 or b == 0:
        warnings.warn("no template matches; sample entropy is undefined", UndefinedEntropyWarning, stacklevel=2)
        return math.nan
    return -math.log(a / b)
