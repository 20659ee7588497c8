"""End-to-end acceptance checks, one test per criterion.

Each test prints a ``PASS`` or ``FAIL`` line with the measured quantities
(capture is bypassed so the lines show up in plain ``pytest`` output) and a
summary table is printed when the module finishes. Run only this file with::

    pytest tests/test_acceptance.py -v
"""

import itertools
import math
import time
import warnings

import numpy as np
import pytest
from scipy.stats import spearmanr

from sindyinfo.dynamics import integrate, lorenz, rossler, van_der_pol
from sindyinfo.entropy import EntropyConfig, apen, sampen
from sindyinfo.exceptions import UndefinedEntropyWarning
from sindyinfo.experiments import (
    GridSpec,
    adaptive_vs_uniform,
    bagging_runs,
    coefficient_variance_study,
    noise_sweep,
    run_grid,
    search_vs_random,
    window_stability,
)
from sindyinfo.features import LibraryConfig, build_library, central_diff
from sindyinfo.fim import aggregate, compute_fim, cramer_rao_check, fim_vs_loglik_hessian, spectrum
from sindyinfo.oracles import oracle_entropy
from sindyinfo.regression import (
    conditioned_design,
    fit_system,
    ground_truth,
    misidentification_rate,
    perturbation_ratio,
)
from sindyinfo.sampling import SamplingConfig, run_mode_machine

RESULTS = {}


@pytest.fixture(scope="module", autouse=True)
def summary_table(request):
    yield
    capman = request.config.pluginmanager.getplugin("capturemanager")
    with capman.global_and_fixture_disabled():
        print("\n\nacceptance summary")
        for k in sorted(RESULTS):
            ok, detail = RESULTS[k]
            print(f"  {'PASS' if ok else 'FAIL'}  criterion {k:>2}: {detail}")


def report(request, number, ok, detail):
    RESULTS[number] = (bool(ok), detail)
    capman = request.config.pluginmanager.getplugin("capturemanager")
    with capman.global_and_fixture_disabled():
        print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
    assert ok, detail


def test_c01_fim_equals_negative_hessian(request):
    start = time.perf_counter()
    worst = 0.0
    for seed in range(200):
        rng = np.random.default_rng(seed)
        m, q = int(rng.integers(8, 101)), int(rng.integers(1, 7))
        A = rng.normal(size=(m, q))
        y = rng.normal(size=m)
        sigma = float(rng.uniform(0.5, 2.0))
        info = compute_fim(A, sigma).matrix
        worst = max(worst, fim_vs_loglik_hessian(A, y, sigma, seed=seed) / (1e-4 * (1 + np.abs(info).max())))
    elapsed = time.perf_counter() - start
    report(request, 1, worst <= 1 and elapsed < 5,
           f"max deviation / tolerance = {worst:.3g} over 200 designs, {elapsed:.2f} s (limit 5 s)")


def test_c02_eigenvalues_are_squared_singular_values(request):
    worst = 0.0
    for seed in range(200):
        rng = np.random.default_rng(seed)
        A = rng.normal(size=(int(rng.integers(6, 80)), int(rng.integers(1, 7))))
        sigma = float(rng.uniform(0.1, 3.0))
        lam = spectrum(compute_fim(A, sigma)).eigenvalues
        ref = np.linalg.svd(A, compute_uv=False) ** 2 / sigma**2
        worst = max(worst, float(np.max(np.abs(lam - ref) / ref)))
    report(request, 2, worst <= 1e-9, f"max relative deviation {worst:.3g} (limit 1e-9)")


def test_c03_additivity_and_bounds(request):
    dev, violations = 0.0, 0
    for seed in range(200):
        rng = np.random.default_rng(seed)
        q = int(rng.integers(2, 7))
        parts = [rng.normal(size=(int(rng.integers(1, 20)), q)) * rng.uniform(0.1, 10) for _ in range(rng.integers(2, 6))]
        fims = [compute_fim(p) for p in parts]
        tot = aggregate(fims)
        stacked = compute_fim(np.vstack(parts)).matrix
        dev = max(dev, float(np.abs(tot.matrix - stacked).max() / np.abs(stacked).max()))
        lam = spectrum(tot).eigenvalues
        each = np.array([spectrum(f).eigenvalues for f in fims])
        slack = 1e-10 * lam[0]
        ok = (np.all(lam >= each.max(axis=0) - slack)
              and math.isclose(np.trace(tot.matrix), sum(np.trace(f.matrix) for f in fims), rel_tol=1e-12)
              and each[:, 0].max() - slack <= lam[0] <= each[:, 0].sum() + slack
              and np.all(lam >= spectrum(aggregate(fims[:-1])).eigenvalues - slack))
        violations += not ok
    report(request, 3, dev <= 1e-12 and violations == 0,
           f"stacked deviation {dev:.3g} (limit 1e-12), bound violations {violations}/200")


def test_c04_cramer_rao(request):
    start = time.perf_counter()
    A = np.random.default_rng(2024).normal(size=(200, 5))
    ratios = cramer_rao_check(A, 1.0, n_reps=2000, seed=0)
    elapsed = time.perf_counter() - start
    ok = np.all((ratios >= 0.85) & (ratios <= 1.15)) and elapsed < 10
    report(request, 4, ok, f"ratios {np.round(ratios, 3).tolist()} in [0.85, 1.15], {elapsed:.2f} s")


@pytest.mark.parametrize("name,system,ic,degree", [
    ("Lorenz", lorenz(10.0, 28.0, 2.66667), (1, 3, 5), 2),
    ("Rossler", rossler(0.2, 0.2, 5.7), (1, 3, 5), 2),
    ("VanDerPol", van_der_pol(0.8), (2, 0), 3),
])
def test_c05_benchmark_recovery(request, name, system, ic, degree):
    start = time.perf_counter()
    traj = integrate(system, ic, 10.0, 0.002)
    model = fit_system(build_library(traj, LibraryConfig(degree)), central_diff(traj), 0.1)
    truth = ground_truth(system, degree)
    active = truth.coefficients != 0
    rel = np.abs(model.coefficients[active] - truth.coefficients[active]) / np.abs(truth.coefficients[active])
    elapsed = time.perf_counter() - start
    ok = np.array_equal(model.active, active) and rel.max() < 0.01 and elapsed < 10
    prev = RESULTS.get(5, (True, ""))
    detail = f"{name}: support {'exact' if np.array_equal(model.active, active) else 'WRONG'}, " \
             f"max rel error {rel.max():.2e}, {elapsed:.2f} s"
    RESULTS[5] = (prev[0] and ok, (prev[1] + "; " if prev[1] else "") + detail)
    capman = request.config.pluginmanager.getplugin("capturemanager")
    with capman.global_and_fixture_disabled():
        print(f"\n{'PASS' if ok else 'FAIL'} criterion 5 ({name}): {detail}")
    assert ok, detail


def test_c06_x_shape_landscape(request):
    start = time.perf_counter()
    res = run_grid(GridSpec(lorenz()), n_jobs=-1)
    elapsed = time.perf_counter() - start
    ratio, rho = res.band_ratio(), res.score_loss_spearman()
    report(request, 6, ratio >= 2 and rho <= -0.3 and elapsed < 600,
           f"band/off-band median loss {ratio:.2f} (>= 2), Spearman(score, loss) {rho:.3f} (<= -0.3), {elapsed:.1f} s")


def test_c07_window_stability(request):
    start = time.perf_counter()
    res = window_stability(lorenz(), n_ics=100, seed=0)
    elapsed = time.perf_counter() - start
    short, long_ = res.spearman_short, res.spearman_long
    report(request, 7, short <= -0.3 and abs(long_) < abs(short) and elapsed < 900,
           f"Spearman short {short:.3f} (<= -0.3), long {long_:.3f} (weaker), {elapsed:.1f} s")


def test_c08_first_oscillation(request):
    levels = (0.0, 0.01, 0.02, 0.05)
    tab = {s: noise_sweep(lorenz(), (1, 3, 5), s, levels, n_seeds=20)
           for s in ("UpToFirstOsc", "InclFirstOsc", "RandomSubset")}
    mean_ok = all(a.mean <= b.mean for a, b in zip(tab["InclFirstOsc"], tab["RandomSubset"]))
    rate = {s: float(np.mean([r.outlier_rate for r in rows])) for s, rows in tab.items()}
    out_ok = rate["InclFirstOsc"] < rate["UpToFirstOsc"]
    means = {s: [round(r.mean, 3) for r in rows] for s, rows in tab.items()}
    report(request, 8, mean_ok and out_ok,
           f"mean L1 Incl {means['InclFirstOsc']} vs Random {means['RandomSubset']} ({'ok' if mean_ok else 'violated'}); "
           f"outlier rate Incl {rate['InclFirstOsc']:.3f} < UpTo {rate['UpToFirstOsc']:.3f} "
           f"({'ok' if out_ok else 'violated'})")


def _reference_modes(seq, up, down):
    out, fine, switches = [], False, []
    for i in range(1, len(seq)):
        out.append("FINE" if fine else "COARSE")
        if not fine and seq[i] > up * seq[i - 1]:
            fine = True
            switches.append((i, "FINE"))
        elif fine and seq[i] < down * seq[i - 1]:
            fine = False
            switches.append((i, "COARSE"))
    return out, switches


def test_c09_adaptive_sampling(request):
    mismatches = sum(run_mode_machine(s, 2.0, 0.5) != _reference_modes(s, 2.0, 0.5)
                     for n in range(2, 7) for s in itertools.product((1.0, 3.0, 10.0), repeat=n))
    rows = adaptive_vs_uniform(lorenz(), (1, 3, 5), SamplingConfig(), n_seeds=10, noise_level=0.001)
    la = float(np.median([r["loss_adaptive"] for r in rows]))
    lb = float(np.median([r["loss_baseline"] for r in rows]))
    frac = float(np.median([r["n_adaptive"] / r["n_baseline"] for r in rows]))
    report(request, 9, mismatches == 0 and frac <= 0.5 and la <= lb,
           f"mode machine mismatches {mismatches}/1089; median count ratio {frac:.2f} (<= 0.5); "
           f"median L2 adaptive {la:.4f} vs uniform {lb:.4f} (need <=)")


def test_c10_entropy(request):
    worst = 0.0
    for seed in range(50):
        rng = np.random.default_rng(seed)
        x = rng.normal(size=int(rng.integers(20, 201)))
        cfg = EntropyConfig(2, 0.2)
        worst = max(worst, abs(apen(x, cfg) - oracle_entropy(x, 2, 0.2, True)))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UndefinedEntropyWarning)
            s, ref = sampen(x, cfg), oracle_entropy(x, 2, 0.2, False)
        if not (math.isnan(s) and math.isnan(ref)):
            worst = max(worst, abs(s - ref))
    gaps = []
    for n in (200, 500, 2000):
        g = [abs(apen(u) - sampen(u)) for u in (np.random.default_rng([n, s]).uniform(size=n) for s in range(20))]
        gaps.append(float(np.median(g)))
    mono = gaps[0] >= gaps[1] >= gaps[2]
    report(request, 10, worst <= 1e-12 and mono,
           f"max oracle deviation {worst:.2e}; median |ApEn-SampEn| over N=200/500/2000: "
           f"{', '.join(f'{g:.3f}' for g in gaps)}")


def test_c11_bagging(request):
    runs = bagging_runs(lorenz(), n_runs=100)
    d_bad = [r["run"] for r in runs if r["d_eff_mean_fim"] < r["mean_member_d_eff"] - 1e-9]
    k_good = sum(r["kappa_mean_fim"] <= r["median_member_kappa"] for r in runs)
    single, bagged, active = coefficient_variance_study(lorenz(), (1, 3, 5))
    v_good = int(np.sum((bagged <= single) & active))
    v_frac = v_good / int(active.sum())
    report(request, 11, not d_bad and k_good >= 90 and v_frac >= 0.8,
           f"d_eff(mean) >= mean d_eff fails in {len(d_bad)}/100 runs {d_bad}; "
           f"kappa(mean) <= median kappa in {k_good}/100 (>= 90); "
           f"bagged variance <= single on {v_good}/{int(active.sum())} active entries (>= 80%)")


def test_c12_entropy_search(request):
    start = time.perf_counter()
    rows = search_vs_random(lorenz(), n_seeds=10, n_baselines=20)
    wins = sum(r["win"] for r in rows)
    mono = all(r["lambda_min_monotone"] for r in rows)
    report(request, 12, wins >= 7 and mono,
           f"wins {wins}/10 (>= 7), lambda_min nondecreasing in every run: {mono}, "
           f"{time.perf_counter() - start:.0f} s")


def test_c13_conditioning_trends(request):
    worst = 0.0
    for kappa in (1.0, 10.0, 1e2, 1e3, 1e4, 1e6):
        for seed in range(50):
            rng = np.random.default_rng(seed)
            A = conditioned_design(40, 5, kappa, rng)
            y = A @ rng.normal(size=5) + 1e-3 * rng.normal(size=40)
            worst = max(worst, perturbation_ratio(A, y, 1e-4 * rng.normal(size=40)))
    kappas = [1.0, 10.0, 1e2, 1e3, 1e4]
    rates = [misidentification_rate(k) for k in kappas]
    rho = float(spearmanr(kappas, rates)[0])
    report(request, 13, worst <= 1.0 and rho >= 0.6,
           f"max perturbation ratio {worst:.3f} (<= 1); misidentification rates {rates}, Spearman {rho:.2f} (>= 0.6)")
