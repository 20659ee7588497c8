"""Benchmark ODE systems and fixed-step trajectory generation.

Three systems are supported: Lorenz, Rossler and Van der Pol. Trajectories
are produced with classical fourth-order Runge-Kutta on a uniform grid so
that the finite-difference derivative stencils downstream see an exactly
constant step.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping

import numpy as np

from ._validation import as_vector, check_positive
from .exceptions import IntegrationDivergedError

_REQUIRED = {
    "lorenz": ("sigma", "rho", "beta"),
    "rossler": ("a", "b", "c"),
    "vanderpol": ("mu",),
}
_DIMS = {"lorenz": 3, "rossler": 3, "vanderpol": 2}
_DISPLAY = {"lorenz": "Lorenz", "rossler": "Rossler", "vanderpol": "VanDerPol"}
_ALIASES = {
    "lorenz": "lorenz",
    "rossler": "rossler",
    "rössler": "rossler",
    "vanderpol": "vanderpol",
    "van_der_pol": "vanderpol",
    "vdp": "vanderpol",
}

DEFAULT_DT = {"lorenz": 0.002, "rossler": 0.002, "vanderpol": 0.01}


def _canonical(name):
    key = str(name).strip().lower().replace("-", "_").replace(" ", "_")
    if key not in _ALIASES:
        raise ValueError(f"unknown system {name!r}; expected one of Lorenz, Rossler, VanDerPol")
    return _ALIASES[key]


@dataclass(frozen=True)
class SystemSpec:
    """A benchmark system family together with its parameter values."""

    name: str
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        key = _canonical(self.name)
        object.__setattr__(self, "name", key)
        params = {k: float(v) for k, v in dict(self.params).items()}
        missing = [p for p in _REQUIRED[key] if p not in params]
        if missing:
            raise ValueError(f"{_DISPLAY[key]} requires parameters {missing}")
        extra = set(params) - set(_REQUIRED[key])
        if extra:
            raise ValueError(f"unexpected parameters for {_DISPLAY[key]}: {sorted(extra)}")
        if not all(math.isfinite(v) for v in params.values()):
            raise ValueError("system parameters must be finite")
        object.__setattr__(self, "params", params)

    @property
    def dim(self) -> int:
        return _DIMS[self.name]

    @property
    def display_name(self) -> str:
        return _DISPLAY[self.name]

    @property
    def default_dt(self) -> float:
        return DEFAULT_DT[self.name]

    def to_dict(self):
        return {"name": self.display_name, "params": dict(self.params)}


def lorenz(sigma=10.0, rho=28.0, beta=8.0 / 3.0) -> SystemSpec:
    return SystemSpec("lorenz", {"sigma": sigma, "rho": rho, "beta": beta})


def rossler(a=0.2, b=0.2, c=5.7) -> SystemSpec:
    return SystemSpec("rossler", {"a": a, "b": b, "c": c})


def van_der_pol(mu=0.8) -> SystemSpec:
    return SystemSpec("vanderpol", {"mu": mu})


def vector_field(spec: SystemSpec, s):
    """Right-hand side as a list of component expressions.

    Only ``+``, ``-`` and ``*`` are used, so ``s`` may hold floats, numpy
    arrays of any trailing shape, or sympy symbols.
    """
    p = spec.params
    if spec.name == "lorenz":
        x, y, z = s[0], s[1], s[2]
        return [p["sigma"] * (y - x), x * (p["rho"] - z) - y, x * y - p["beta"] * z]
    if spec.name == "rossler":
        x, y, z = s[0], s[1], s[2]
        return [-y - z, x + p["a"] * y, p["b"] + z * (x - p["c"])]
    x, v = s[0], s[1]
    return [v, p["mu"] * (1 - x * x) * v - x]


def rhs(spec: SystemSpec, state) -> np.ndarray:
    """Evaluate f(x) for one state vector."""
    x = np.asarray(state, dtype=float)
    if x.shape != (spec.dim,):
        raise ValueError(f"{spec.display_name} state must have length {spec.dim}, got shape {x.shape}")
    return np.array(vector_field(spec, x), dtype=float)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Uniformly sampled states of one simulated run."""

    times: np.ndarray
    states: np.ndarray
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float).reshape(-1)
        x = np.asarray(self.states, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if x.ndim != 2 or x.shape[0] != t.shape[0]:
            raise ValueError(f"states shape {x.shape} does not match {t.shape[0]} times")
        if not np.all(np.isfinite(x)):
            raise ValueError("trajectory states must be finite")
        if t.size > 1:
            steps = np.diff(t)
            if np.any(steps <= 0):
                raise ValueError("times must be strictly increasing")
            if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
                raise ValueError("times must have a constant step")
        t.setflags(write=False)
        x.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "states", x)

    @property
    def m(self) -> int:
        return self.states.shape[0]

    @property
    def n(self) -> int:
        return self.states.shape[1]

    @property
    def dt(self) -> float:
        if self.m < 2:
            return float("nan")
        return float(self.times[1] - self.times[0])

    def __len__(self):
        return self.m

    def slice(self, start=0, stop=None) -> "Trajectory":
        return Trajectory(self.times[start:stop], self.states[start:stop], self.noise_sigma, self.seed)

    def to_csv(self, path):
        """Write ``t,x0,x1,...`` rows with 17 significant digits."""
        path = Path(path)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t"] + [f"x{j}" for j in range(self.n)])
            for t, row in zip(self.times, self.states):
                writer.writerow([f"{t:.17g}"] + [f"{v:.17g}" for v in row])

    @classmethod
    def from_csv(cls, path, noise_sigma=0.0, seed=0) -> "Trajectory":
        with Path(path).open(newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if not header or header[0].strip() != "t" or len(header) < 2:
                raise ValueError(f"{path}: expected header 't,x0,x1,...'")
            rows = [[float(v) for v in r] for r in reader if r]
        if not rows:
            raise ValueError(f"{path}: no samples")
        data = np.array(rows, dtype=float)
        if data.shape[1] != len(header):
            raise ValueError(f"{path}: ragged rows")
        return cls(data[:, 0], data[:, 1:], noise_sigma, seed)


def _n_steps(t_end, dt):
    return int(math.floor(t_end / dt + 1e-9))


def rk4_integrate(func: Callable, initial, t_end: float, dt: float) -> np.ndarray:
    """Classical RK4 for ``x' = func(x)``; returns the (m, dim) state history.

    ``initial`` may be 1-D (one state) or 2-D (dim, k) for k independent
    states integrated together. Non-finite values are propagated; the caller
    decides how to report them.
    """
    x = np.array(initial, dtype=float)
    steps = _n_steps(t_end, dt)
    out = np.empty((steps + 1,) + x.shape)
    out[0] = x
    h2 = 0.5 * dt
    h6 = dt / 6.0
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(steps):
            k1 = np.asarray(func(x))
            k2 = np.asarray(func(x + h2 * k1))
            k3 = np.asarray(func(x + h2 * k2))
            k4 = np.asarray(func(x + dt * k3))
            x = x + h6 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            out[i + 1] = x
    return out


def _field_array(spec):
    def f(x):
        return np.array(vector_field(spec, x))

    return f


def integrate(spec: SystemSpec, initial, t_end: float, dt: float | None = None) -> Trajectory:
    """Integrate ``spec`` from ``initial`` on the grid 0, dt, ..., floor(t_end/dt)*dt."""
    dt = spec.default_dt if dt is None else dt
    check_positive(dt, "dt")
    check_positive(t_end, "t_end", strict=False)
    x0 = as_vector(initial, "initial", length=spec.dim)
    states = rk4_integrate(_field_array(spec), x0, t_end, dt)
    times = dt * np.arange(states.shape[0])
    _raise_if_diverged(times, states)
    return Trajectory(times, states)


def integrate_many(spec: SystemSpec, initials, t_end: float, dt: float | None = None):
    """Integrate several initial conditions at once.

    Returns ``(times, states, ok)`` with ``states`` of shape (k, m, dim) and
    ``ok`` a boolean mask of runs that stayed finite.
    """
    dt = spec.default_dt if dt is None else dt
    check_positive(dt, "dt")
    x0 = np.asarray(initials, dtype=float)
    if x0.ndim != 2 or x0.shape[1] != spec.dim:
        raise ValueError(f"initials must have shape (k, {spec.dim})")
    hist = rk4_integrate(_field_array(spec), x0.T, t_end, dt)
    states = np.transpose(hist, (2, 0, 1))
    ok = np.all(np.isfinite(states), axis=(1, 2))
    return dt * np.arange(hist.shape[0]), states, ok


def _raise_if_diverged(times, states):
    finite = np.all(np.isfinite(states), axis=1)
    if not finite.all():
        first_bad = int(np.argmin(finite))
        last = float(times[first_bad - 1]) if first_bad > 0 else float("nan")
        raise IntegrationDivergedError(
            f"integration diverged at t={times[first_bad]:.6g}", last_valid_time=last
        )


def add_noise(traj: Trajectory, level: float, seed: int = 0) -> Trajectory:
    """Add Gaussian noise scaled to each column's standard deviation.

    Column ``j`` draws from ``default_rng([seed, j])`` so its noise does not
    depend on how many other columns exist.
    """
    check_positive(level, "level", strict=False)
    if level == 0:
        return Trajectory(traj.times, traj.states, 0.0, seed)
    states = np.array(traj.states, dtype=float)
    scale = level * states.std(axis=0)
    for j in range(states.shape[1]):
        rng = np.random.default_rng([int(seed), j])
        states[:, j] += rng.normal(0.0, scale[j], size=states.shape[0])
    return Trajectory(traj.times, states, float(level), seed)
