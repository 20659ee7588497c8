import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sindyinfo.dynamics import Trajectory
from sindyinfo.features import (
    DerivativeMatrix,
    LibraryConfig,
    PolynomialLibrary,
    build_library,
    central_diff,
    central_diff_nonuniform,
    count_extremes,
    polynomial_terms,
)


def test_two_state_degree_two_ordering():
    labels = [t.label for t in polynomial_terms(2, 2)]
    assert labels == ["1", "x0", "x1", "x0^2", "x0*x1", "x1^2"]


@pytest.mark.parametrize("n,d", [(1, 3), (2, 2), (3, 2), (3, 3), (2, 5)])
def test_library_size(n, d):
    assert len(polynomial_terms(n, d)) == math.comb(n + d, d)
    assert len(polynomial_terms(n, d, include_constant=False)) == math.comb(n + d, d) - 1


def test_single_sample_row():
    A = build_library(np.array([[1.0, 2.0]]), LibraryConfig(2))
    assert np.array_equal(A.values[0], [1, 1, 2, 1, 2, 4])


def test_empty_trajectory_rejected():
    with pytest.raises(ValueError):
        build_library(np.zeros((0, 3)))


@given(arrays(float, (4, 3), elements=st.floats(-5, 5)), st.integers(1, 3))
def test_rows_are_monomials(states, degree):
    A = build_library(states, LibraryConfig(degree))
    labels = set()
    for k, term in enumerate(A.terms):
        assert term.label not in labels
        labels.add(term.label)
        assert sum(term.exponents) <= degree
        for i in range(states.shape[0]):
            ref = 1.0
            for j, e in enumerate(term.exponents):
                ref *= states[i, j] ** e
            assert A.values[i, k] == pytest.approx(ref, rel=1e-12, abs=1e-12)
    assert np.all(A.values[:, 0] == 1)


def test_derivative_of_ramp_and_quadratic():
    t = 0.37 * np.arange(20)
    d = central_diff(Trajectory(t, np.column_stack([t, t**2]))).values
    assert np.allclose(d[:, 0], 1, atol=1e-12)
    assert np.allclose(d[:, 1], 2 * t, atol=1e-10)


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(0.01, 1.0))
def test_exact_on_any_quadratic(a, b, c, dt):
    t = dt * np.arange(12)
    d = central_diff(Trajectory(t, a + b * t + c * t**2)).values[:, 0]
    assert np.max(np.abs(d - (b + 2 * c * t))) <= 1e-10 * max(1.0, abs(b) + abs(c) * t[-1])


def test_sine_truncation_bound():
    t = 0.01 * np.arange(700)
    err = np.abs(central_diff(Trajectory(t, np.sin(t))).values[:, 0] - np.cos(t))
    # centred rows: dt^2/6 * max|f'''|; the one-sided end rows carry twice that
    assert err[1:-1].max() <= 2e-5
    assert max(err[0], err[-1]) <= 0.01**2 / 3 + 1e-9


def test_too_short_for_differences():
    with pytest.raises(ValueError):
        central_diff(Trajectory([0.0, 1.0], [[0.0], [1.0]]))


def test_nonuniform_matches_uniform_on_uniform_grid():
    t = 0.05 * np.arange(30)
    x = np.column_stack([np.sin(t), t**2])
    a = central_diff(Trajectory(t, x)).values
    b = central_diff_nonuniform(t, x).values
    assert np.allclose(a, b, atol=1e-12)


def test_nonuniform_exact_on_quadratic():
    t = np.cumsum([0.0, 0.1, 0.02, 0.3, 0.05, 0.2])
    d = central_diff_nonuniform(t, 3 * t**2 - t).values[:, 0]
    # interior stencil is exact for quadratics only with equal spacing; ends are exact
    assert d[0] == pytest.approx(-1, abs=1e-10)
    assert d[-1] == pytest.approx(6 * t[-1] - 1, abs=1e-10)


def test_count_extremes_examples():
    assert count_extremes(DerivativeMatrix(np.zeros((10, 3))), (0, 10), 1e-6, 1.0) == 30
    mid = np.full((5, 2), (0.01 + 50) / 2)
    assert count_extremes(DerivativeMatrix(mid), (0, 5), 0.01, 50) == 0
    assert count_extremes(DerivativeMatrix(np.array([[0.0], [1], [100], [0.5]])), (0, 4), 0.01, 50) == 2


def test_count_extremes_invalid():
    d = DerivativeMatrix(np.zeros((4, 1)))
    with pytest.raises(ValueError):
        count_extremes(d, (0, 5))
    with pytest.raises(ValueError):
        count_extremes(d, (0, 4), 1.0, 0.5)


@given(arrays(float, (20, 2), elements=st.floats(-1e4, 1e4)), st.floats(1e-4, 1.0), st.floats(1e-4, 1.0))
def test_count_extremes_monotone(values, s1, s2):
    d = DerivativeMatrix(values)
    lo, hi = sorted((s1, s2))
    assert count_extremes(d, (0, 20), lo, 1e3) <= count_extremes(d, (0, 20), hi, 1e3)
    assert count_extremes(d, (0, 20), 1e-5, 1e3) <= count_extremes(d, (0, 20), 1e-5, 1e2)


def test_polynomial_library_estimator():
    X = np.random.default_rng(0).normal(size=(7, 3))
    lib = PolynomialLibrary(degree=2).fit(X)
    assert lib.transform(X).shape == (7, 10)
    assert list(lib.get_feature_names_out(["x", "y", "z"]))[:5] == ["1", "x", "y", "z", "x^2"]
    with pytest.raises(ValueError):
        lib.transform(X[:, :2])


def test_design_matrix_csv(tmp_path):
    A = build_library(np.array([[1.0, 2.0], [3.0, 4.0]]))
    A.to_csv(tmp_path / "A.csv")
    lines = (tmp_path / "A.csv").read_text().splitlines()
    assert lines[0] == "1,x0,x1,x0^2,x0*x1,x1^2"
    assert len(lines) == 3
