"""Choosing which measurements to take.

Two drivers live here:

* :func:`adaptive_sample` walks forward along one trajectory, switching
  between a coarse and a fine sampling step according to bursts and
  collapses of an information metric computed on the data collected so far.
* :func:`entropy_search_sindy` collects several trajectories. Inside each
  one, time points are chosen where a Gaussian-process surrogate is most
  uncertain; the next initial condition is the candidate whose predicted
  trajectory adds the most Fisher information to what is already known.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg

from ._validation import as_vector, check_int, check_positive
from .dynamics import SystemSpec, Trajectory, integrate, rk4_integrate, vector_field
from .exceptions import EmptySupportWarning, IntegrationDivergedError, OscillationNotFoundError
from .features import central_diff, central_diff_nonuniform, evaluate_terms, polynomial_terms
from .fim import Fim, aggregate, compute_fim, information_score, metrics, spectrum, _mode
from .regression import (
    FitConfig,
    SparseModel,
    coefficient_loss,
    ensemble_fit,
    fit_system,
    ground_truth,
    simulate_model_many,
)

COARSE = "COARSE"
FINE = "FINE"


@dataclass(frozen=True)
class SamplingConfig:
    """Settings of the coarse/fine adaptive sampler.

    The coarse step is ``round(beta)`` base steps. ``quality_window`` refits
    with an unchanged support and relative coefficient changes below
    ``quality_tol`` count as converged.
    """

    dt_base: float = 0.002
    beta: float = 5.0
    gamma_up: float = 2.5
    gamma_down: float = 0.5
    n_min: int = 30
    n_max: int = 400
    metric_mode: str = "LambdaMax"
    quality_window: int = 5
    quality_tol: float = 0.01

    def __post_init__(self):
        check_positive(self.dt_base, "dt_base")
        if not self.beta > 1:
            raise ValueError("beta must exceed 1")
        if not self.gamma_up > 1:
            raise ValueError("gamma_up must exceed 1")
        if not 0 < self.gamma_down < 1:
            raise ValueError("gamma_down must lie in (0, 1)")
        check_int(self.n_min, "n_min", minimum=1)
        check_int(self.n_max, "n_max", minimum=1)
        if self.n_min > self.n_max:
            raise ValueError("n_min must not exceed n_max")
        _mode(self.metric_mode)
        check_int(self.quality_window, "quality_window", minimum=2)
        check_positive(self.quality_tol, "quality_tol")

    @property
    def coarse_steps(self) -> int:
        return max(2, int(round(self.beta)))


@dataclass
class SamplingTrace:
    sampled_times: np.ndarray
    modes: list
    metric_history: np.ndarray
    stop_reason: str
    initial_metric: float = math.nan
    switches: list = field(default_factory=list)
    observed: np.ndarray | None = None

    @property
    def n_observed(self) -> int:
        return len(self.sampled_times)

    def to_csv(self, path):
        """One row per step: ``step, t, mode, metric, n_observed``."""
        with Path(path).open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["step", "t", "mode", "metric", "n_observed"])
            writer.writerow([0, f"{self.sampled_times[0]:.17g}", "", f"{self.initial_metric:.17g}", 1])
            for k, (t, mode, val) in enumerate(zip(self.sampled_times[1:], self.modes, self.metric_history), 1):
                writer.writerow([k, f"{t:.17g}", mode, f"{val:.17g}", k + 1])


def next_mode(mode: str, metric: float, previous: float, gamma_up: float, gamma_down: float) -> str:
    """One transition of the coarse/fine state machine."""
    if mode == COARSE and metric > gamma_up * previous:
        return FINE
    if mode == FINE and metric < gamma_down * previous:
        return COARSE
    return mode


def run_mode_machine(metrics_seq, gamma_up: float, gamma_down: float):
    """Replay the state machine on a metric sequence.

    ``metrics_seq[0]`` is the value on the initial one-sample dataset. Returns
    the mode used for each of the following steps and the list of
    ``(index, new_mode)`` switches, indexed into ``metrics_seq``.
    """
    seq = list(metrics_seq)
    mode, prev = COARSE, seq[0]
    modes, switches = [], []
    for i, val in enumerate(seq[1:], 1):
        modes.append(mode)
        new = next_mode(mode, val, prev, gamma_up, gamma_down)
        if new != mode:
            switches.append((i, new))
        mode, prev = new, val
    return modes, switches


def _metric_value(A, mode):
    met = metrics(spectrum(compute_fim(A)))
    mode = _mode(mode)
    if mode == "LambdaMax":
        return met.lambda_max
    # ratio tests need a positive scale, so map the log-type scores back through 10**
    score = information_score(met, mode)
    return 10.0**score if math.isfinite(score) else 0.0


def _fit_quiet(A, Y, fit_cfg):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EmptySupportWarning)
        return fit_system(A, Y, fit_cfg.threshold, fit_cfg.alpha, fit_cfg.max_iter)


def _quality_met(history, window, tol):
    if len(history) < window:
        return False
    recent = history[-window:]
    support = recent[0].active
    if not support.any() or any(not np.array_equal(m.active, support) for m in recent[1:]):
        return False
    for a, b in zip(recent[:-1], recent[1:]):
        denom = np.maximum(np.abs(b.coefficients[support]), 1e-12)
        if np.max(np.abs(b.coefficients[support] - a.coefficients[support]) / denom) >= tol:
            return False
    return True


def _noise_scale(states, level):
    return level * states.std(axis=0)


def adaptive_sample(system: SystemSpec, x0, cfg: SamplingConfig | None = None, fit_cfg: FitConfig | None = None,
                    sigma: float = 1.0, noise_level: float = 0.0, seed: int = 0, metric_schedule=None):
    """Coarse/fine adaptive sampling along one trajectory.

    Starting from the single observation at t = 0, each step advances by the
    coarse or fine interval, observes the state, refits the sparse model on
    all observations (derivatives by non-uniform centred differences) and
    evaluates the information metric on the accumulated library. A burst
    (metric above ``gamma_up`` times the previous value) switches to fine
    sampling; a collapse (below ``gamma_down`` times) switches back. Sampling
    stops after ``n_max`` observations or once at least ``n_min`` are held
    and the fit has stabilised.

    Parameters
    ----------
    noise_level : float
        Observation noise as a fraction of each state's standard deviation
        over the reachable time span.
    metric_schedule : sequence of float, optional
        Replaces the computed metric (testing hook). Element 0 is the value
        for the initial sample; sampling ends when the schedule runs out.

    Returns
    -------
    (SamplingTrace, SparseModel or None)
    """
    cfg = cfg or SamplingConfig()
    fit_cfg = fit_cfg or FitConfig()
    check_positive(sigma, "sigma")
    check_positive(noise_level, "noise_level", strict=False)
    x0 = as_vector(x0, "x0", length=system.dim)
    n_max = cfg.n_max if metric_schedule is None else min(cfg.n_max, len(metric_schedule))
    span_steps = (n_max - 1) * cfg.coarse_steps
    field_fn = lambda x: np.array(vector_field(system, x))  # noqa: E731
    dense = rk4_integrate(field_fn, x0, span_steps * cfg.dt_base, cfg.dt_base)
    finite = np.all(np.isfinite(dense), axis=1)
    valid_steps = int(np.argmin(finite)) - 1 if not finite.all() else dense.shape[0] - 1
    rng = np.random.default_rng(seed)
    scale = _noise_scale(dense[: valid_steps + 1], noise_level)
    terms = tuple(polynomial_terms(system.dim, fit_cfg.degree, fit_cfg.include_constant))

    def observe(k):
        return dense[k] + rng.normal(0.0, 1.0, system.dim) * scale

    steps = [0]
    obs = [observe(0)]
    rows = [evaluate_terms(obs[0], terms)[0]]

    def metric_at(n):
        if metric_schedule is not None:
            return float(metric_schedule[n])
        return _metric_value(np.array(rows) / sigma, cfg.metric_mode)

    initial = metric_at(0)
    prev, mode = initial, COARSE
    modes, history, switches, models = [], [], [], []
    model = None
    stop = "Budget"
    while len(steps) < n_max:
        k = steps[-1] + (cfg.coarse_steps if mode == COARSE else 1)
        if k > valid_steps:
            partial = SamplingTrace(np.array(steps) * cfg.dt_base, modes, np.array(history), "Diverged",
                                    initial, switches, np.array(obs))
            raise IntegrationDivergedError("trajectory diverged during adaptive sampling",
                                           valid_steps * cfg.dt_base, partial)
        modes.append(mode)
        steps.append(k)
        obs.append(observe(k))
        rows.append(evaluate_terms(obs[-1], terms)[0])
        if len(steps) >= 3:
            t_obs = np.array(steps) * cfg.dt_base
            deriv = central_diff_nonuniform(t_obs, np.array(obs)).values
            model = _fit_quiet(np.array(rows), deriv, fit_cfg)
            models.append(model)
        val = metric_at(len(steps) - 1)
        history.append(val)
        new = next_mode(mode, val, prev, cfg.gamma_up, cfg.gamma_down)
        if new != mode:
            switches.append((len(steps) - 1, new))
        mode, prev = new, val
        if len(steps) >= cfg.n_min and _quality_met(models, cfg.quality_window, cfg.quality_tol):
            stop = "Quality"
            break
    if model is not None:
        model = SparseModel(model.coefficients, model.active, model.threshold, model.ridge_alpha,
                            model.iterations, tuple(t.label for t in terms), model.empty_support)
    trace = SamplingTrace(np.array(steps) * cfg.dt_base, modes, np.array(history), stop, initial, switches,
                          np.array(obs))
    return trace, model


def uniform_baseline_loss(system: SystemSpec, x0, n_samples: int, dt: float, fit_cfg: FitConfig | None = None,
                          noise_level: float = 0.0, seed: int = 0, reference_span: float | None = None,
                          p: str = "L2") -> float:
    """Coefficient loss of a fit on the first ``n_samples`` uniform samples at step ``dt``.

    Noise is scaled by the state standard deviation over ``reference_span``
    (defaults to the sampled span) so it can match :func:`adaptive_sample`.
    """
    fit_cfg = fit_cfg or FitConfig()
    check_int(n_samples, "n_samples", minimum=3)
    span = (n_samples - 1) * dt if reference_span is None else max(reference_span, (n_samples - 1) * dt)
    traj = integrate(system, x0, span, dt)
    scale = _noise_scale(traj.states, noise_level)
    states = traj.states[:n_samples] + np.random.default_rng(seed).normal(size=(n_samples, system.dim)) * scale
    terms = tuple(polynomial_terms(system.dim, fit_cfg.degree, fit_cfg.include_constant))
    deriv = central_diff(Trajectory(traj.times[:n_samples], states)).values
    model = _fit_quiet(evaluate_terms(states, terms), deriv, fit_cfg)
    return coefficient_loss(model, ground_truth(system, fit_cfg.degree, fit_cfg.include_constant), p)


def first_oscillation_split(traj: Trajectory) -> int:
    """Index closing the first oscillation of the first state component.

    The derivative of x0 is scanned for sign changes; the first marks the
    first local extremum and the second closes the oscillation. The returned
    index is whichever sample on either side of that second change has the
    smaller derivative magnitude.
    """
    if traj.m < 3:
        raise OscillationNotFoundError("trajectory too short")
    d = central_diff(traj).values[:, 0]
    sign = np.sign(d)
    nz = np.flatnonzero(sign != 0)
    if nz.size < 2:
        raise OscillationNotFoundError("derivative of x0 never changes sign")
    flips = nz[1:][sign[nz[1:]] != sign[nz[:-1]]]
    if flips.size < 2:
        raise OscillationNotFoundError("fewer than two sign changes in the derivative of x0")
    i = int(flips[1])
    before = int(nz[np.searchsorted(nz, i) - 1])
    return before if abs(d[before]) < abs(d[i]) else i


# --- entropy search -------------------------------------------------------


@dataclass(frozen=True)
class AcquisitionConfig:
    """Surrogate and candidate settings of the two-phase search.

    ``candidate_grid`` lists initial conditions considered for new
    trajectories; ``horizon`` is the length of every trajectory.
    """

    candidate_grid: tuple = ()
    fim_metric: str = "lambda_min"
    horizon: float = 2.0
    dt: float = 0.01
    gp_length_scale: float = 0.1
    gp_signal_var: float = 1.0
    gp_noise_var: float = 1e-4
    n_ensemble_members: int = 5

    def __post_init__(self):
        for name in ("horizon", "dt", "gp_length_scale", "gp_signal_var", "gp_noise_var"):
            check_positive(getattr(self, name), name)
        if self.fim_metric not in _FIM_METRICS:
            raise ValueError(f"fim_metric must be one of {sorted(_FIM_METRICS)}")
        check_int(self.n_ensemble_members, "n_ensemble_members", minimum=1)
        object.__setattr__(self, "candidate_grid", tuple(tuple(float(v) for v in c) for c in self.candidate_grid))


_FIM_METRICS = {"lambda_min", "lambda_max", "trace", "log_det", "effective_dim", "effective_rank"}


def gp_posterior(train_t, train_y, query_t, cfg: AcquisitionConfig):
    """Exact posterior mean and latent variance of a zero-mean squared-exponential GP."""
    tt = np.asarray(train_t, dtype=float).reshape(-1)
    ty = np.asarray(train_y, dtype=float).reshape(-1)
    qt = np.asarray(query_t, dtype=float).reshape(-1)
    if tt.shape != ty.shape:
        raise ValueError("train_t and train_y differ in length")
    sv, ls = cfg.gp_signal_var, cfg.gp_length_scale
    if tt.size == 0:
        return np.zeros(qt.size), np.full(qt.size, sv)

    def kern(a, b):
        return sv * np.exp(-((a[:, None] - b[None, :]) ** 2) / (2 * ls**2))

    K = kern(tt, tt) + cfg.gp_noise_var * np.eye(tt.size)
    Ks = kern(tt, qt)
    factor = scipy.linalg.cho_factor(K, lower=True)
    mean = Ks.T @ scipy.linalg.cho_solve(factor, ty)
    v = scipy.linalg.solve_triangular(factor[0], Ks, lower=True)
    var = np.maximum(sv - np.sum(v**2, axis=0), 0.0)
    return mean, var


def predictive_entropy(posterior_var, noise_var):
    return 0.5 * np.log(2 * math.pi * math.e * (np.asarray(posterior_var, dtype=float) + noise_var))


def phase1_acquisition(candidates_t, posterior_var, noise_var: float):
    """Candidate time with the largest predictive entropy (earliest on ties).

    A 2-D ``posterior_var`` (candidates x state dimensions) has its
    per-dimension entropies summed.
    """
    cand = np.asarray(candidates_t, dtype=float).reshape(-1)
    if cand.size == 0:
        raise ValueError("no candidate times")
    ent = predictive_entropy(posterior_var, noise_var)
    if ent.ndim == 2:
        ent = ent.sum(axis=1)
    return float(cand[int(np.argmax(ent))])


def _fim_metric(fim, name):
    return getattr(metrics(spectrum(fim)), name)


def phase2_acquisition(aggregate_fim: Fim, candidates, model, cfg: AcquisitionConfig, sample_times=None,
                       members=None, terms=None):
    """Initial condition whose predicted trajectory adds the most information.

    Every candidate is simulated with the learned model over ``cfg.horizon``;
    the library evaluated at ``sample_times`` (default: the whole grid) gives
    the predicted contribution. The score is the gain of ``cfg.fim_metric``
    over ``aggregate_fim``, averaged over up to ``cfg.n_ensemble_members``
    ensemble members when ``members`` is given. Diverging candidates score
    -inf. Returns ``(chosen, scores)``.
    """
    cand = np.atleast_2d(np.asarray(candidates, dtype=float))
    if cand.shape[0] == 0:
        raise ValueError("no candidate initial conditions")
    models = list(members[: cfg.n_ensemble_members]) if members else [model]
    if terms is None:
        terms = _infer_terms(*models[0].coefficients.shape)
    base = _fim_metric(aggregate_fim, cfg.fim_metric)
    gains = np.zeros((len(models), cand.shape[0]))
    for b, mdl in enumerate(models):
        times, states, ok = simulate_model_many(terms, mdl.coefficients, cand, cfg.horizon, cfg.dt)
        idx = _time_indices(times, sample_times)
        for c in range(cand.shape[0]):
            if not ok[c]:
                gains[b, c] = -math.inf
                continue
            A = evaluate_terms(states[c, idx], terms)
            contrib = compute_fim(A, aggregate_fim.sigma)
            gains[b, c] = _fim_metric(aggregate([aggregate_fim, contrib]), cfg.fim_metric) - base
    scores = gains.mean(axis=0)
    scores[np.any(np.isneginf(gains), axis=0)] = -math.inf
    return cand[int(np.argmax(scores))], scores


def _n_terms(n, degree, include_constant):
    return math.comb(n + degree, degree) - (0 if include_constant else 1)


def _infer_terms(q, n):
    for d in range(1, 10):
        for const in (True, False):
            if q == _n_terms(n, d, const):
                return tuple(polynomial_terms(n, d, const))
    raise ValueError(f"{q} terms is not a full polynomial library in {n} variables")


def _time_indices(times, sample_times):
    if sample_times is None:
        return np.arange(times.size)
    dt = times[1] - times[0] if times.size > 1 else 1.0
    idx = np.rint(np.asarray(sample_times) / dt).astype(int)
    return np.clip(idx, 0, times.size - 1)


def phase1_schedule(grid_t, n_points: int, cfg: AcquisitionConfig, dims: int = 1, observed=None):
    """Greedy selection of ``n_points`` times on ``grid_t`` by maximum predictive entropy.

    ``observed`` (times x dims values) feeds the GP means; the posterior
    variance, and therefore the choice, depends only on where samples sit.
    The first point is always ``grid_t[0]`` (the initial condition).
    """
    grid_t = np.asarray(grid_t, dtype=float)
    chosen = [0]
    for _ in range(n_points - 1):
        t_train = grid_t[chosen]
        var = np.empty((grid_t.size, dims))
        for d in range(dims):
            y = np.zeros(len(chosen)) if observed is None else observed[chosen, d]
            var[:, d] = gp_posterior(t_train, y, grid_t, cfg)[1]
        t_new = phase1_acquisition(grid_t, var, cfg.gp_noise_var)
        chosen.append(int(np.flatnonzero(grid_t == t_new)[0]))
    return np.array(chosen)


@dataclass
class RoundReport:
    round: int
    initial_condition: list
    sampled_times: list
    lambda_min: float
    metric_value: float
    acquisition_score: float | None

    def as_dict(self):
        return asdict(self)


@dataclass
class SearchResult:
    states: np.ndarray
    derivatives: np.ndarray
    trajectory_ids: np.ndarray
    model: SparseModel
    rounds: list
    loss_l2: float | None = None

    def to_json(self, path):
        payload = {"rounds": [r.as_dict() for r in self.rounds], "model": self.model.to_dict(),
                   "loss_l2": self.loss_l2}
        Path(path).write_text(json.dumps(payload, indent=2, allow_nan=True))


@dataclass(frozen=True)
class SearchConfig:
    """Outer settings of the multi-trajectory search."""

    n_trajectories: int = 3
    n_per_trajectory: int = 60
    noise_level: float = 0.01
    n_boot: int = 20
    n_candidates: int = 64
    domain_low: tuple = (-10.0, -10.0, 9.0)
    domain_high: tuple = (10.0, 10.0, 9.0)

    def __post_init__(self):
        check_int(self.n_trajectories, "n_trajectories", minimum=1)
        check_int(self.n_per_trajectory, "n_per_trajectory", minimum=3)
        check_positive(self.noise_level, "noise_level", strict=False)
        check_int(self.n_boot, "n_boot", minimum=2)
        check_int(self.n_candidates, "n_candidates", minimum=1)
        lo, hi = np.asarray(self.domain_low, float), np.asarray(self.domain_high, float)
        if lo.shape != hi.shape or np.any(hi < lo):
            raise ValueError("domain bounds must have equal length with high >= low")


def _collect(system, x0, idx, acq, noise_level, rng):
    traj = integrate(system, x0, acq.horizon, acq.dt)
    scale = _noise_scale(traj.states, noise_level)
    noisy = traj.states + rng.normal(size=traj.states.shape) * scale
    deriv = central_diff(Trajectory(traj.times, noisy)).values
    return traj.times, noisy[idx], deriv[idx]


def _uniform(rng, lo, hi):
    return lo + (hi - lo) * rng.random(lo.size)


def entropy_search_sindy(system: SystemSpec, search: SearchConfig | None = None,
                         acq: AcquisitionConfig | None = None, fit_cfg: FitConfig | None = None, seed: int = 0,
                         initial_conditions=None, sigma: float = 1.0) -> SearchResult:
    """Multi-trajectory data collection with entropy-driven time selection.

    Each trajectory is simulated densely (step ``acq.dt``) with observation
    noise; Phase 1 picks ``n_per_trajectory`` of its grid times, and the
    derivatives at those times come from centred differences on the dense
    noisy record. Between trajectories Phase 2 scores candidate initial
    conditions (``acq.candidate_grid`` or ``search.n_candidates`` uniform
    draws from the domain) with an ensemble fitted to everything collected.

    ``initial_conditions`` overrides the search: the given list is used in
    order, which is how equal-budget random baselines are produced.
    """
    search = search or SearchConfig()
    acq = acq or AcquisitionConfig()
    fit_cfg = fit_cfg or FitConfig()
    lo, hi = np.asarray(search.domain_low, float), np.asarray(search.domain_high, float)
    if lo.size != system.dim:
        raise ValueError(f"domain must have {system.dim} coordinates")
    q = _n_terms(system.dim, fit_cfg.degree, fit_cfg.include_constant)
    if search.n_trajectories * search.n_per_trajectory < 2 * q:
        warnings.warn("fewer than 2q samples in total; the fit is poorly determined", RuntimeWarning, stacklevel=2)
    rng = np.random.default_rng(seed)
    noise_rng = np.random.default_rng([seed, 1])
    terms = tuple(polynomial_terms(system.dim, fit_cfg.degree, fit_cfg.include_constant))
    grid_t = acq.dt * np.arange(int(math.floor(acq.horizon / acq.dt + 1e-9)) + 1)
    schedule = phase1_schedule(grid_t, search.n_per_trajectory, acq, system.dim)
    sample_times = grid_t[schedule]
    if initial_conditions is not None:
        ics = [as_vector(c, "initial condition", system.dim) for c in initial_conditions]
        if len(ics) != search.n_trajectories:
            raise ValueError("need one initial condition per trajectory")
    x0 = ics[0] if initial_conditions is not None else _uniform(rng, lo, hi)
    X_parts, Y_parts, ids, fims, rounds = [], [], [], [], []
    score = None
    for m in range(search.n_trajectories):
        _, xs, ds = _collect(system, x0, schedule, acq, search.noise_level, noise_rng)
        X_parts.append(xs)
        Y_parts.append(ds)
        ids.append(np.full(xs.shape[0], m))
        fims.append(compute_fim(evaluate_terms(xs, terms), sigma))
        agg = aggregate(fims)
        rounds.append(RoundReport(m, [float(v) for v in x0], sample_times.tolist(),
                                  float(metrics(spectrum(agg)).lambda_min), float(_fim_metric(agg, acq.fim_metric)),
                                  score))
        if m == search.n_trajectories - 1:
            break
        if initial_conditions is not None:
            x0, score = ics[m + 1], None
            continue
        X = np.vstack(X_parts)
        ens = ensemble_fit(evaluate_terms(X, terms), np.vstack(Y_parts), search.n_boot, int(rng.integers(2**31)),
                           fit_cfg.threshold, fit_cfg.alpha, fit_cfg.max_iter)
        cands = (np.asarray(acq.candidate_grid, float) if acq.candidate_grid
                 else np.array([_uniform(rng, lo, hi) for _ in range(search.n_candidates)]))
        x0, scores = phase2_acquisition(agg, cands, ens.aggregate, acq, sample_times, ens.members, terms)
        score = float(np.max(scores))
    X, Y = np.vstack(X_parts), np.vstack(Y_parts)
    final = ensemble_fit(evaluate_terms(X, terms), Y, search.n_boot, int(seed), fit_cfg.threshold, fit_cfg.alpha,
                         fit_cfg.max_iter).aggregate
    final = SparseModel(final.coefficients, final.active, final.threshold, final.ridge_alpha, final.iterations,
                        tuple(t.label for t in terms), final.empty_support)
    try:
        loss = coefficient_loss(final, ground_truth(system, fit_cfg.degree, fit_cfg.include_constant), "L2")
    except ValueError:
        loss = None
    return SearchResult(X, Y, np.concatenate(ids), final, rounds, loss)


def random_baseline(system, search: SearchConfig, acq: AcquisitionConfig, fit_cfg: FitConfig | None = None,
                    seed: int = 0, first_ic=None) -> SearchResult:
    """Same budget and Phase 1 schedule, initial conditions drawn uniformly from the domain."""
    rng = np.random.default_rng([seed, 7])
    lo, hi = np.asarray(search.domain_low, float), np.asarray(search.domain_high, float)
    ics = [_uniform(rng, lo, hi) for _ in range(search.n_trajectories)]
    if first_ic is not None:
        ics[0] = np.asarray(first_ic, float)
    return entropy_search_sindy(system, search, acq, fit_cfg, seed, ics)
