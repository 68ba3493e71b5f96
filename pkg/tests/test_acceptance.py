"""Acceptance criteria A1-A12, each at its stated scale and tolerance.

Every test prints one pass/fail line; run with ``pytest tests/test_acceptance.py -v``
(add ``-s`` to see the lines for passing criteria too).
"""

import itertools
import math
import time

import numpy as np

from gridest.combinatorics import aggregation_eta
from gridest.experiments import (
    ExperimentConfig,
    calibrate_constants,
    run_scenario,
)
from gridest.info import (
    bernoulli_bias_kl,
    hellinger_sq,
    hellinger_sq_biased_product,
    kl_additivity_check,
    kl_divergence,
)


def record(check_id: str, passed: bool, detail: str, elapsed: float | None = None):
    status = "PASS" if passed else "FAIL"
    suffix = f"  ({elapsed:.1f}s)" if elapsed is not None else ""
    print(f"[{status}] {check_id}: {detail}{suffix}")
    assert passed, f"{check_id}: {detail}"


def run_timed(scenario: str, trials: int, seed: int = 2024, params=None):
    start = time.perf_counter()
    result = run_scenario(
        ExperimentConfig(scenario=scenario, trials=trials, seed=seed,
                         params=params or {})
    )
    return result, time.perf_counter() - start


def biased_product_table(theta, nu):
    d = len(theta)
    probs = np.empty(2**d)
    for idx, bits in enumerate(itertools.product([0, 1], repeat=d)):
        p = 1.0
        for b, t in zip(bits, theta):
            p_one = 0.5 + t * nu
            p *= p_one if b else 1.0 - p_one
        probs[idx] = p
    return probs


def test_a01_permutation_empirical_failure():
    result, elapsed = run_timed("perm-empirical-failure", trials=2000)
    ok = result.passed and elapsed < 10
    record("A1", ok, result.assertion, elapsed)


def test_a02_product_estimator_deviation_scaling():
    result, elapsed = run_timed("deviation-scaling", trials=200)
    ok = result.passed and elapsed < 120
    record("A2", ok, result.assertion, elapsed)


def test_a03_symmetric_difference_dimension_bounds():
    result, elapsed = run_timed("symdiff-vc", trials=1)
    ok = result.passed and elapsed < 60
    record("A3", ok, result.assertion, elapsed)


def test_a04_grid_trace_count_audit():
    result, elapsed = run_timed("ssp-audit", trials=1)
    ok = result.passed and elapsed < 60
    record("A4", ok, result.assertion, elapsed)


def test_a05_mixture_modulus_soundness_and_tightness():
    result, elapsed = run_timed("modulus-mixture", trials=1)
    ok = result.passed and elapsed < 60
    record("A5", ok, result.assertion, elapsed)


def test_a06_total_correlation_modulus_soundness():
    result, elapsed = run_timed("modulus-tc", trials=1)
    ok = result.passed and elapsed < 10
    record("A6", ok, result.assertion, elapsed)


def test_a07_bias_kl_bounds_and_additivity():
    start = time.perf_counter()
    worst_env = 0.0
    for nu in np.linspace(0.0025, 0.2475, 100):
        value = bernoulli_bias_kl(float(nu))
        worst_env = max(
            worst_env, 8 * nu**2 - value, value - (32 / 3) * nu**2
        )
    envelope_ok = worst_env <= 1e-12

    rng = np.random.default_rng(77)
    worst_add = 0.0
    for d in range(1, 11):
        for nu in (0.05, 0.11, 0.2):
            theta = rng.choice([-1, 1], size=d)
            theta_p = rng.choice([-1, 1], size=d)
            full = kl_divergence(
                biased_product_table(theta, nu), biased_product_table(theta_p, nu)
            )
            worst_add = max(
                worst_add, abs(kl_additivity_check(theta, theta_p, nu) - full)
            )
    additivity_ok = worst_add <= 1e-10
    detail = (
        f"envelope excess {worst_env:.2e} <= 1e-12; "
        f"additivity gap {worst_add:.2e} <= 1e-10"
    )
    record("A7", envelope_ok and additivity_ok, detail,
           time.perf_counter() - start)


def test_a08_hellinger_closed_form_and_separation():
    start = time.perf_counter()
    worst = 0.0
    for nu in (0.05, 0.1, 0.2):
        for k in range(1, 11):
            brute = hellinger_sq(
                biased_product_table([+1] * k, nu),
                biased_product_table([-1] * k, nu),
            )
            worst = max(worst, abs(hellinger_sq_biased_product(nu, k) - brute))
    closed_ok = worst <= 1e-10

    separation_ok = True
    for eps in (0.1, 0.5, 1.0):
        for k in (1, 4, 16):
            threshold = math.sqrt(eps / (2 * k))
            for nu in np.linspace(0.01, 0.49, 49):
                if nu >= threshold:
                    separation_ok &= (
                        hellinger_sq_biased_product(float(nu), k) >= eps
                    )
    detail = f"closed-form gap {worst:.2e} <= 1e-10; separation holds"
    record("A8", closed_ok and separation_ok, detail, time.perf_counter() - start)


def test_a09_fano_lower_bound_pipeline():
    result, elapsed = run_timed("fano-omega-d", trials=1)
    ok = result.passed and elapsed < 10
    record("A9", ok, result.assertion, elapsed)


def test_a10_grid_hitting_frequency():
    start = time.perf_counter()
    cal = calibrate_constants("grid-hitting", trials=40, seed=2024)
    assert not cal["unbounded"], "no grid constant passed during calibration"
    result = run_scenario(
        ExperimentConfig(
            scenario="grid-hitting", trials=500, seed=2024,
            params={"c0": cal["smallest_passing"]},
        )
    )
    elapsed = time.perf_counter() - start
    detail = f"calibrated c0={cal['smallest_passing']}; {result.assertion}"
    record("A10", result.passed, detail, elapsed)


def test_a11_product_grid_estimator_end_to_end():
    start = time.perf_counter()
    cal = calibrate_constants("pge-end-to-end", trials=20, seed=2024)
    assert not cal["unbounded"], "no grid constant passed during calibration"
    result = run_scenario(
        ExperimentConfig(
            scenario="pge-end-to-end", trials=200, seed=2024,
            params={"c0": cal["smallest_passing"]},
        )
    )
    elapsed = time.perf_counter() - start
    ok = result.passed and elapsed < 300
    detail = f"calibrated c0={cal['smallest_passing']}; {result.assertion}"
    record("A11", ok, detail, elapsed)


def test_a12_aggregation_constant():
    eta = aggregation_eta(2)
    two_c2 = 1.0 / eta
    h2 = -(eta * math.log2(eta) + (1 - eta) * math.log2(1 - eta))
    ok = 16 < two_c2 < 17 and abs(h2 - 1 / 3) <= 1e-12
    record("A12", ok, f"2*c2 = {two_c2:.6f} in (16, 17); |H2(eta) - 1/3| = "
                      f"{abs(h2 - 1 / 3):.2e} <= 1e-12")
