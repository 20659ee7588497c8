"""Study drivers: initial-condition landscapes, window stability, noise sweeps, bagging.

Every driver is deterministic for a given seed. Per-cell and per-run seeds
are spawned from ``numpy.random.SeedSequence`` so results do not depend on
the number of workers.
"""

from __future__ import annotations

import csv
import logging
import math
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from joblib import Parallel, delayed
from scipy.stats import spearmanr

from ._validation import as_vector, check_int, check_positive
from .dynamics import SystemSpec, Trajectory, add_noise, integrate, integrate_many
from .exceptions import EmptySupportWarning, IntegrationDivergedError
from .features import build_library, central_diff, count_extremes
from .fim import bagging_spectrum_study, compute_fim, information_score, metrics, spectrum
from .regression import FitConfig, coefficient_loss, ensemble_fit, fit_system, ground_truth
from .sampling import (
    AcquisitionConfig,
    SamplingConfig,
    SearchConfig,
    adaptive_sample,
    entropy_search_sindy,
    first_oscillation_split,
    random_baseline,
    uniform_baseline_loss,
)

log = logging.getLogger(__name__)

STATUS_OK, STATUS_DIVERGED, STATUS_DEGENERATE = 0, 1, 2


def _seed_int(*keys) -> int:
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1)[0])


def _fit(A, D, fit_cfg):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EmptySupportWarning)
        return fit_system(A, D, fit_cfg.threshold, fit_cfg.alpha, fit_cfg.max_iter)


def _spearman(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    keep = np.isfinite(a) & np.isfinite(b)
    if keep.sum() < 3 or np.ptp(a[keep]) == 0 or np.ptp(b[keep]) == 0:
        return math.nan
    return float(spearmanr(a[keep], b[keep])[0])


def _parallel(fn, items, n_jobs):
    if n_jobs in (None, 1):
        return [fn(*it) for it in items]
    return Parallel(n_jobs=n_jobs, prefer="threads")(delayed(fn)(*it) for it in items)


# --- landscapes -------------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    """Initial conditions on a plane of the first two state coordinates.

    The remaining coordinates are fixed at ``z_value`` (ignored for
    two-dimensional systems). ``train_length`` rows from t = 0 form the
    training window.
    """

    system: SystemSpec
    x_range: tuple = (-10.0, 10.0, 21)
    y_range: tuple = (-10.0, 10.0, 21)
    z_value: float = 9.0
    train_length: int = 100
    noise_level: float = 0.01
    seed: int = 0
    dt: float | None = None
    loss: str = "L2"
    score_mode: str = "Combined"
    extremes_window: int = 200

    def __post_init__(self):
        for name in ("x_range", "y_range"):
            lo, hi, count = getattr(self, name)
            check_int(int(count), f"{name} count", minimum=2)
            if not hi > lo:
                raise ValueError(f"{name} must have max > min")
        check_int(self.train_length, "train_length", minimum=3)
        check_positive(self.noise_level, "noise_level", strict=False)
        check_int(self.extremes_window, "extremes_window", minimum=1)
        q = math.comb(self.system.dim + 2, 2)
        if self.train_length < 2 * q:
            warnings.warn(f"train_length {self.train_length} is below 2q = {2 * q}", RuntimeWarning, stacklevel=2)

    @property
    def xs(self):
        lo, hi, n = self.x_range
        return np.linspace(lo, hi, int(n))

    @property
    def ys(self):
        lo, hi, n = self.y_range
        return np.linspace(lo, hi, int(n))

    @property
    def step(self):
        return self.system.default_dt if self.dt is None else self.dt

    def initial_conditions(self):
        X, Y = np.meshgrid(self.xs, self.ys, indexing="ij")
        cols = [X.ravel(), Y.ravel()]
        for _ in range(self.system.dim - 2):
            cols.append(np.full(X.size, float(self.z_value)))
        return np.column_stack(cols)

    def to_dict(self):
        d = asdict(self)
        d["system"] = self.system.to_dict()
        return d


@dataclass(eq=False)
class GridResult:
    """Loss, extreme-derivative count and information score per grid cell.

    Matrices are indexed ``[i_x, j_y]``. Cells whose ``status`` is nonzero
    (1 diverged, 2 rank-deficient library) hold NaN.
    """

    loss: np.ndarray
    extremes: np.ndarray
    info_score: np.ndarray
    status: np.ndarray
    meta: GridSpec

    def band_mask(self, width=1.0):
        X, Y = np.meshgrid(self.meta.xs, self.meta.ys, indexing="ij")
        return (np.abs(Y - X) < width) | (np.abs(Y + X) < width)

    def band_ratio(self, width=1.0):
        """Median loss on the diagonals |y-x|<w or |y+x|<w over the median elsewhere."""
        band = self.band_mask(width)
        ok = self.status == STATUS_OK
        on, off = self.loss[band & ok], self.loss[~band & ok]
        if on.size == 0 or off.size == 0:
            return math.nan
        return float(np.median(on) / np.median(off))

    def score_loss_spearman(self):
        ok = self.status == STATUS_OK
        return _spearman(self.info_score[ok], self.loss[ok])

    def write_csvs(self, out_dir):
        out = Path(out_dir)
        paths = {}
        for name in ("loss", "extremes", "info_score"):
            path = out / f"{name}.csv"
            _write_matrix(path, getattr(self, name), self.meta.xs, self.meta.ys)
            paths[name] = path
        return paths


def _write_matrix(path, mat, xs, ys):
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x\\y"] + [f"{y:.17g}" for y in ys])
        for x, row in zip(xs, mat):
            writer.writerow([f"{x:.17g}"] + ["nan" if not np.isfinite(v) else f"{v:.17g}" for v in row])


def _grid_cell(k, times, states, ok, spec, fit_cfg, truth):
    if not ok:
        return STATUS_DIVERGED, math.nan, math.nan, math.nan
    traj = Trajectory(times, states)
    if spec.noise_level > 0:
        traj = add_noise(traj, spec.noise_level, _seed_int(spec.seed, k))
    window = traj.slice(0, spec.train_length)
    A = build_library(window, fit_cfg.library())
    if np.linalg.matrix_rank(A.values) < A.shape[1]:
        return STATUS_DEGENERATE, math.nan, math.nan, math.nan
    model = _fit(A, central_diff(window), fit_cfg)
    loss = coefficient_loss(model, truth, spec.loss)
    ext = count_extremes(central_diff(traj), (0, min(spec.extremes_window, traj.m)))
    score = information_score(metrics(spectrum(compute_fim(A))), spec.score_mode)
    return STATUS_OK, loss, float(ext), score


def run_grid(spec: GridSpec, fit_cfg: FitConfig | None = None, n_jobs=None) -> GridResult:
    """Simulate, fit and score every initial condition of the grid."""
    fit_cfg = fit_cfg or FitConfig()
    truth = ground_truth(spec.system, fit_cfg.degree, fit_cfg.include_constant)
    ics = spec.initial_conditions()
    n_rows = max(spec.train_length, spec.extremes_window)
    times, states, ok = integrate_many(spec.system, ics, (n_rows - 1) * spec.step, spec.step)
    with np.errstate(invalid="ignore", over="ignore"):
        ok = ok & np.all(np.abs(states) < 1e8, axis=(1, 2))
    items = [(k, times, states[k], bool(ok[k]), spec, fit_cfg, truth) for k in range(len(ics))]
    cells = _parallel(_grid_cell, items, n_jobs)
    shape = (spec.xs.size, spec.ys.size)
    arr = np.array(cells, dtype=float)
    return GridResult(arr[:, 1].reshape(shape), arr[:, 2].reshape(shape), arr[:, 3].reshape(shape),
                      arr[:, 0].astype(int).reshape(shape), spec)


# --- window stability -------------------------------------------------------


@dataclass(eq=False)
class StabilityResult:
    initial_conditions: np.ndarray
    score_short: np.ndarray
    loss_short: np.ndarray
    score_long: np.ndarray
    loss_long: np.ndarray
    resampled: int = 0

    @property
    def spearman_short(self):
        return _spearman(self.score_short, self.loss_short)

    @property
    def spearman_long(self):
        return _spearman(self.score_long, self.loss_long)

    def to_csv(self, path):
        with Path(path).open("w", newline="") as fh:
            writer = csv.writer(fh)
            dims = self.initial_conditions.shape[1]
            writer.writerow([f"x0_{j}" for j in range(dims)] + ["score_short", "loss_short", "score_long", "loss_long"])
            for ic, a, b, c, d in zip(self.initial_conditions, self.score_short, self.loss_short, self.score_long,
                                      self.loss_long):
                writer.writerow([f"{v:.17g}" for v in ic] + [f"{v:.17g}" for v in (a, b, c, d)])


DEFAULT_BOX = ((-15.0, 15.0), (-15.0, 15.0), (5.0, 30.0))


def window_stability(system: SystemSpec, n_ics: int = 100, window_long: int = 2500, window_short: int = 625,
                     full_length: int = 5000, seed: int = 0, box=DEFAULT_BOX, noise_level: float = 0.01,
                     dt: float | None = None, fit_cfg: FitConfig | None = None, score_mode="Combined",
                     loss="L1") -> StabilityResult:
    """Information score and coefficient loss for random initial conditions at two window lengths.

    Noise is added to the full record before slicing; derivatives are taken
    within each window. Initial conditions whose trajectory diverges are
    redrawn.
    """
    check_int(n_ics, "n_ics", minimum=1)
    if not 3 <= window_short <= window_long <= full_length:
        raise ValueError("need 3 <= window_short <= window_long <= full_length")
    if n_ics < 30:
        warnings.warn("fewer than 30 initial conditions; correlations are unreliable", RuntimeWarning, stacklevel=2)
    fit_cfg = fit_cfg or FitConfig()
    dt = system.default_dt if dt is None else dt
    box = np.asarray(box, dtype=float)[: system.dim]
    truth = ground_truth(system, fit_cfg.degree, fit_cfg.include_constant)
    rng = np.random.default_rng(seed)
    chosen, records, resampled = [], [], 0
    while len(chosen) < n_ics:
        need = n_ics - len(chosen)
        ics = box[:, 0] + (box[:, 1] - box[:, 0]) * rng.random((need, system.dim))
        times, states, ok = integrate_many(system, ics, (full_length - 1) * dt, dt)
        for k in range(need):
            if not ok[k]:
                resampled += 1
                log.info("initial condition %s diverged; redrawing", ics[k])
                continue
            idx = len(chosen)
            chosen.append(ics[k])
            traj = Trajectory(times, states[k])
            if noise_level > 0:
                traj = add_noise(traj, noise_level, _seed_int(seed, idx))
            rec = []
            for w in (window_short, window_long):
                part = traj.slice(0, w)
                A = build_library(part, fit_cfg.library())
                model = _fit(A, central_diff(part), fit_cfg)
                rec += [information_score(metrics(spectrum(compute_fim(A))), score_mode),
                        coefficient_loss(model, truth, loss)]
            records.append(rec)
    rec = np.array(records)
    return StabilityResult(np.array(chosen), rec[:, 0], rec[:, 1], rec[:, 2], rec[:, 3], resampled)


# --- noise sweep ------------------------------------------------------------

SPLITS = ("UpToFirstOsc", "InclFirstOsc", "RandomSubset")


@dataclass
class NoiseLevelRow:
    level: float
    mean: float
    variance: float
    outlier_count: int
    outlier_rate: float
    n: int
    losses: list = field(default_factory=list)


def split_rows(traj: Trajectory, split: str, rng=None):
    """Training rows for one of the first-oscillation splits.

    UpToFirstOsc: samples before the first extremum of x0. InclFirstOsc:
    samples up to and including the end of the first oscillation.
    RandomSubset: as many rows as InclFirstOsc, drawn without replacement
    from the samples after the first oscillation.
    """
    end = first_oscillation_split(traj)
    if split == "InclFirstOsc":
        return np.arange(end + 1)
    if split == "UpToFirstOsc":
        d = central_diff(traj).values[:, 0]
        s = np.sign(d)
        first = int(np.flatnonzero(s[1:] * s[:-1] < 0)[0]) + 1
        return np.arange(first)
    if split == "RandomSubset":
        later = np.arange(end + 1, traj.m)
        if later.size < end + 1:
            raise ValueError("not enough samples after the first oscillation for a matched random subset")
        rng = rng or np.random.default_rng(0)
        return np.sort(rng.choice(later, end + 1, replace=False))
    raise ValueError(f"unknown split {split!r}; expected one of {SPLITS}")


def noise_sweep(system: SystemSpec, x0, split: str, noise_levels=(0.0, 0.01, 0.02, 0.05), n_seeds: int = 20,
                t_end: float = 5.0, dt: float = 0.01, fit_cfg: FitConfig | None = None, seed: int = 0,
                loss="L1", outlier_factor: float = 10.0):
    """L1 loss statistics per noise level for one training split.

    Split boundaries come from the noiseless trajectory so every seed and
    level trains on the same rows (RandomSubset draws its own rows per seed).
    An outlier is a loss above ``outlier_factor`` times the median of its
    level; mean and variance exclude outliers.
    """
    if split not in SPLITS:
        raise ValueError(f"unknown split {split!r}; expected one of {SPLITS}")
    check_int(n_seeds, "n_seeds", minimum=1)
    if n_seeds < 10:
        warnings.warn("fewer than 10 seeds per level", RuntimeWarning, stacklevel=2)
    fit_cfg = fit_cfg or FitConfig()
    x0 = as_vector(x0, "x0", system.dim)
    truth = ground_truth(system, fit_cfg.degree, fit_cfg.include_constant)
    clean = integrate(system, x0, t_end, dt)
    rows_fixed = None if split == "RandomSubset" else split_rows(clean, split)
    table = []
    for level in noise_levels:
        check_positive(level, "noise level", strict=False)
        losses = []
        for s in range(n_seeds):
            traj = add_noise(clean, level, _seed_int(seed, s))
            rows = rows_fixed if rows_fixed is not None else split_rows(clean, split, np.random.default_rng([seed, s, 99]))
            A = build_library(traj, fit_cfg.library()).values[rows]
            D = central_diff(traj).values[rows]
            losses.append(coefficient_loss(_fit(A, D, fit_cfg), truth, loss))
        table.append(_level_row(level, losses, outlier_factor))
    return table


def _level_row(level, losses, factor):
    v = np.asarray(losses, dtype=float)
    med = float(np.median(v))
    out = v > factor * med
    kept = v[~out]
    return NoiseLevelRow(float(level), float(kept.mean()) if kept.size else math.nan,
                         float(kept.var()) if kept.size else math.nan, int(out.sum()), float(out.mean()), v.size,
                         v.tolist())


def write_noise_table(path, tables: dict):
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["split", "level", "mean", "variance", "outlier_count", "outlier_rate", "n"])
        for split, rows in tables.items():
            for r in rows:
                writer.writerow([split, r.level, f"{r.mean:.17g}", f"{r.variance:.17g}", r.outlier_count,
                                 f"{r.outlier_rate:.17g}", r.n])


# --- bagging ----------------------------------------------------------------


def bagging_runs(system: SystemSpec, n_runs: int = 100, window: int = 625, noise_level: float = 0.01,
                 n_boot: int = 50, seed: int = 0, box=DEFAULT_BOX, dt: float | None = None,
                 fit_cfg: FitConfig | None = None):
    """Bootstrap spectral diagnostics on many short noisy windows.

    Run ``r`` draws its initial condition from the box with
    ``default_rng([seed, r])`` and resamples with bootstrap seed ``r``.
    Returns a list of summary dicts (see ``BaggingReport.summary``).
    """
    fit_cfg = fit_cfg or FitConfig()
    dt = system.default_dt if dt is None else dt
    box = np.asarray(box, dtype=float)[: system.dim]
    out = []
    for r in range(n_runs):
        rng = np.random.default_rng([seed, r])
        while True:
            x0 = box[:, 0] + (box[:, 1] - box[:, 0]) * rng.random(system.dim)
            try:
                traj = integrate(system, x0, (window - 1) * dt, dt)
                break
            except IntegrationDivergedError:
                continue
        traj = add_noise(traj, noise_level, _seed_int(seed, r))
        A = build_library(traj, fit_cfg.library())
        rep = bagging_spectrum_study(A, sigma=1.0, n_boot=n_boot, seed=_seed_int(seed, r, 1))
        summary = rep.summary()
        summary["run"] = r
        summary["initial_condition"] = x0.tolist()
        out.append(summary)
    return out


def coefficient_variance_study(system: SystemSpec, x0, noise_level: float = 0.03, n_outer: int = 20,
                               n_boot: int = 50, window: int = 625, dt: float | None = None,
                               fit_cfg: FitConfig | None = None, seed: int = 0):
    """Variance over noise realisations of single-fit versus bagged coefficients.

    Returns ``(single_var, bagged_var, truth_active)``, each q x n.
    """
    fit_cfg = fit_cfg or FitConfig()
    dt = system.default_dt if dt is None else dt
    truth = ground_truth(system, fit_cfg.degree, fit_cfg.include_constant)
    clean = integrate(system, as_vector(x0, "x0", system.dim), (window - 1) * dt, dt)
    single, bagged = [], []
    for s in range(n_outer):
        traj = add_noise(clean, noise_level, _seed_int(seed, s))
        A = build_library(traj, fit_cfg.library())
        D = central_diff(traj)
        single.append(_fit(A, D, fit_cfg).coefficients)
        bagged.append(ensemble_fit(A, D, n_boot, _seed_int(seed, s, 1), fit_cfg.threshold, fit_cfg.alpha,
                                   fit_cfg.max_iter).aggregate.coefficients)
    return np.var(single, axis=0), np.var(bagged, axis=0), truth.coefficients != 0


# --- sampling studies -------------------------------------------------------


def adaptive_vs_uniform(system: SystemSpec, x0, cfg: SamplingConfig | None = None, n_seeds: int = 10,
                        noise_level: float = 0.001, fit_cfg: FitConfig | None = None, seed: int = 0):
    """Adaptive sampling against the first ``2n`` uniform samples at the base step.

    One row per seed: adaptive count, adaptive loss, baseline count and
    baseline loss (both L2).
    """
    cfg = cfg or SamplingConfig()
    fit_cfg = fit_cfg or FitConfig()
    truth = ground_truth(system, fit_cfg.degree, fit_cfg.include_constant)
    rows = []
    for s in range(n_seeds):
        sd = _seed_int(seed, s)
        trace, model = adaptive_sample(system, x0, cfg, fit_cfg, noise_level=noise_level, seed=sd)
        n = trace.n_observed
        la = coefficient_loss(model, truth, "L2")
        lb = uniform_baseline_loss(system, x0, 2 * n, cfg.dt_base, fit_cfg, noise_level, sd,
                                   reference_span=float(trace.sampled_times[-1]))
        rows.append({"seed": s, "n_adaptive": n, "loss_adaptive": la, "n_baseline": 2 * n, "loss_baseline": lb,
                     "fine_fraction": float(np.mean([m == "FINE" for m in trace.modes])) if trace.modes else 0.0,
                     "stop_reason": trace.stop_reason})
    return rows


def search_vs_random(system: SystemSpec, search: SearchConfig | None = None, acq: AcquisitionConfig | None = None,
                     n_seeds: int = 10, n_baselines: int = 20, fit_cfg: FitConfig | None = None, seed: int = 0):
    """Entropy-search runs against equal-budget random-IC baselines sharing the first IC."""
    search = search or SearchConfig()
    acq = acq or AcquisitionConfig()
    rows = []
    for s in range(n_seeds):
        sd = _seed_int(seed, s)
        res = entropy_search_sindy(system, search, acq, fit_cfg, sd)
        first = res.rounds[0].initial_condition
        base = [random_baseline(system, search, acq, fit_cfg, _seed_int(seed, s, j), first).loss_l2
                for j in range(n_baselines)]
        lam = [r.lambda_min for r in res.rounds]
        rows.append({"seed": s, "loss_search": res.loss_l2, "median_baseline": float(np.median(base)),
                     "win": bool(res.loss_l2 < np.median(base)),
                     "lambda_min_monotone": bool(np.all(np.diff(lam) >= -1e-10 * max(1.0, abs(lam[-1])))),
                     "lambda_min": lam, "initial_conditions": [r.initial_condition for r in res.rounds]})
    return rows
